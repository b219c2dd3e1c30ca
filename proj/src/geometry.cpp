#include "bcast/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "bcast/errors.hpp"

namespace bcast::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

// Absorbs rounding in R sqrt(4 - 3 f) at the interval ends.
constexpr double kEdgeSlack = 1e-12;

}  // namespace

AreaBreakdown area_breakdown(double radius, double cs_radius) {
  if (!(radius > 0.0)) {
    throw DomainError("radio range must be positive");
  }
  if (!(cs_radius >= radius * (1.0 - kEdgeSlack) && cs_radius <= 2.0 * radius * (1.0 + kEdgeSlack))) {
    throw DomainError("carrier-sense range must lie in [R, 2R]");
  }
  const double r2 = radius * radius;
  const double cs2 = std::clamp(cs_radius * cs_radius, r2, 4.0 * r2);

  AreaBreakdown out;
  out.a_tx = kPi * r2;
  out.a_cs = kPi * (cs2 - r2);
  out.a_ph = kPi * (4.0 * r2 - cs2);
  out.hidden_fraction = (4.0 * r2 - cs2) / (3.0 * r2);
  return out;
}

double hidden_count(const NetworkParams& network, double a_ph) {
  const double r = network.radius();
  const double max_area = 3.0 * kPi * r * r;
  if (!(a_ph >= 0.0 && a_ph <= max_area * (1.0 + kEdgeSlack))) {
    throw DomainError("hidden area must lie in [0, 3 pi R^2]");
  }
  return network.lambda() * std::min(a_ph, max_area);
}

double fraction_to_cs_radius(double radius, double hidden_fraction) {
  if (!(radius > 0.0)) {
    throw DomainError("radio range must be positive");
  }
  if (!(hidden_fraction >= 0.0 && hidden_fraction <= 1.0)) {
    throw DomainError("hidden fraction must lie in [0, 1]");
  }
  return radius * std::sqrt(4.0 - 3.0 * hidden_fraction);
}

double hidden_count_for_fraction(const NetworkParams& network, double hidden_fraction) {
  const double cs = fraction_to_cs_radius(network.radius(), hidden_fraction);
  return hidden_count(network, area_breakdown(network.radius(), cs).a_ph);
}

}  // namespace bcast::geometry
