#pragma once

#include "bcast/params.hpp"

namespace bcast::geometry {

// Worst-case annulus model: receivers sit on the rim of the sender's
// range, so interferers can be anywhere inside 2R. Whatever carrier
// sensing does not cover of that disk is potentially hidden.
struct AreaBreakdown {
  double a_tx = 0.0;             // pi R^2
  double a_cs = 0.0;             // sensing area beyond a_tx
  double a_ph = 0.0;             // potential hidden node area
  double hidden_fraction = 0.0;  // a_ph / 3 pi R^2
};

/// Requires radius <= cs_radius <= 2 radius.
AreaBreakdown area_breakdown(double radius, double cs_radius);

/// Expected number of nodes in a hidden area, lambda * a_ph.
double hidden_count(const NetworkParams& network, double a_ph);

/// Carrier-sense range that leaves the given fraction of the
/// worst-case hidden area uncovered: R sqrt(4 - 3 f).
double fraction_to_cs_radius(double radius, double hidden_fraction);

/// Convenience: n_ph for a hidden fraction in [0, 1].
double hidden_count_for_fraction(const NetworkParams& network, double hidden_fraction);

}  // namespace bcast::geometry
