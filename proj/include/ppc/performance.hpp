#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace ppc {

/// Thrown when a modulated error leaves the open funnel region.
struct OutOfFunnel : std::runtime_error {
  explicit OutOfFunnel(const std::string& what, int edge = -1)
      : std::runtime_error(what), edge(edge) {}
  int edge;
};

/// Exponential funnel rho(t) = (rho0 - rho_inf) e^{-l t} + rho_inf.
struct PerformanceSpec {
  double rho0 = 5.0;
  double rho_inf = 0.1;
  double l = 1.0;
  double M = 1.0;
};

double rho(const PerformanceSpec& spec, double t);

/// alpha(t) = -rho'(t)/rho(t); bounded above by l for rho_inf > 0.
double alpha(const PerformanceSpec& spec, double t);

/// Region of the modulated error: (-M, 1) for x0 >= 0, (-1, M) for x0 < 0.
std::pair<double, double> select_region(double x0, double M);

/// Per-edge transformation state. t_offset shifts the log mapping so the
/// transform vanishes at zero for every overshoot factor M.
struct EdgeChannel {
  PerformanceSpec spec;
  double region_lo = -1.0;
  double region_hi = 1.0;
  double g = 1.0;  // control gain, shared across both edge directions
  double t_offset = 0.0;
};

EdgeChannel make_channel(const PerformanceSpec& spec, double x0, double gain);

/// T(x_hat) = ln((x_hat - lo)/(hi - x_hat)) - ln(-lo/hi).
/// Strictly increasing, T(0)=0, blows up at the region boundary.
double transform(const EdgeChannel& ch, double x_hat);

/// dT/dx_hat = 1/(x_hat - lo) + 1/(hi - x_hat).
double transform_slope(const EdgeChannel& ch, double x_hat);

/// Normalized Jacobian: transform_slope(x_hat) / rho(t). Always positive.
double jacobian(const EdgeChannel& ch, double x_hat, double t);

}  // namespace ppc
