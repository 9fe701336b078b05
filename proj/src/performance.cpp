#include "ppc/performance.hpp"

#include <cmath>

namespace ppc {

double rho(const PerformanceSpec& spec, double t) {
  return (spec.rho0 - spec.rho_inf) * std::exp(-spec.l * t) + spec.rho_inf;
}

double alpha(const PerformanceSpec& spec, double t) {
  double decay = spec.l * (spec.rho0 - spec.rho_inf) * std::exp(-spec.l * t);
  return decay / rho(spec, t);
}

std::pair<double, double> select_region(double x0, double M) {
  if (x0 < 0.0) return {-1.0, M};
  return {-M, 1.0};
}

EdgeChannel make_channel(const PerformanceSpec& spec, double x0, double gain) {
  EdgeChannel ch;
  ch.spec = spec;
  auto [lo, hi] = select_region(x0, spec.M);
  ch.region_lo = lo;
  ch.region_hi = hi;
  ch.g = gain;
  ch.t_offset = std::log(-lo / hi);
  return ch;
}

double transform(const EdgeChannel& ch, double x_hat) {
  if (x_hat <= ch.region_lo || x_hat >= ch.region_hi)
    throw OutOfFunnel("modulated error outside the funnel region");
  return std::log((x_hat - ch.region_lo) / (ch.region_hi - x_hat)) -
         ch.t_offset;
}

double transform_slope(const EdgeChannel& ch, double x_hat) {
  if (x_hat <= ch.region_lo || x_hat >= ch.region_hi)
    throw OutOfFunnel("modulated error outside the funnel region");
  return 1.0 / (x_hat - ch.region_lo) + 1.0 / (ch.region_hi - x_hat);
}

double jacobian(const EdgeChannel& ch, double x_hat, double t) {
  return transform_slope(ch, x_hat) / rho(ch.spec, t);
}

}  // namespace ppc
