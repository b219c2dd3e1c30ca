#pragma once

#include <cstdint>

#include "bcast/params.hpp"

namespace bcast::analytic {

/// Poisson probability of exactly `count` events given `mean`.
/// Evaluated in log space so large counts do not overflow.
double poisson_pmf(std::int64_t count, double mean);

/// Per-slot attempt probability p' for the given network and scheme.
///
/// For carrier-sense broadcast p' is the fixed point of
///   g(x) = tau * p_eff / (delta * (1 - exp(-x N)) + tau),
/// found by bisection on x - g(x) over [0, p_eff]. g is strictly
/// decreasing, so the root is unique. Slotted aloha does not sense the
/// channel and attempts with p_eff directly.
///
/// Throws NumericalError if bisection fails to reach a residual of 1e-12.
double solve_attempt_probability(const NetworkParams& network, const SchemeParams& scheme);

/// Cross-check solver: damped fixed-point iteration whose step size is
/// scaled by the local slope of g. Independent of the bisection path.
double solve_attempt_probability_damped(const NetworkParams& network,
                                        const SchemeParams& scheme);

/// The map g whose fixed point is p'. Exposed for residual checks.
double attempt_map(double x, double n_mean, double p_effective, std::int64_t delta_slots);

struct ChannelChain {
  double p_ii = 1.0;
  double p_bi = 1.0;
  double phi_idle = 1.0;
  double phi_busy = 0.0;
  double p_limit = 1.0;
  double t_idle = SchemeParams::kSlot;
  double t_busy = 0.0;
};

ChannelChain channel_chain(double p_attempt, const NetworkParams& network,
                           std::int64_t delta_slots);

struct NodeChain {
  double p_ww = 1.0;
  double p_ws = 0.0;
  double p_wc = 0.0;
  double p_sw = 1.0;
  double p_cw = 1.0;
  double phi_wait = 1.0;
  double phi_succ = 0.0;
  double phi_coll = 0.0;
  double t_wait = SchemeParams::kSlot;
  double t_succ = 0.0;
  double t_coll = 0.0;
};

/// Throws DomainError unless 0 <= p_ws <= p_attempt <= 1.
NodeChain node_chain(double p_attempt, double p_ws, std::int64_t delta_slots);

/// Slots during which a hidden transmission destroys a frame:
/// 2 delta + 1 with carrier sensing, delta + 1 for slotted aloha.
std::int64_t vulnerable_slots(const SchemeParams& scheme);

struct SuccessFactors {
  double p1 = 0.0;  // node transmits
  double p2 = 1.0;  // no neighbour transmits in the same slot
  double p3 = 1.0;  // hidden nodes stay silent for the vulnerable period
  double p_ws = 0.0;
};

SuccessFactors success_probability(double p_attempt, const NetworkParams& network,
                                   double n_ph, std::int64_t vulnerable);

struct ThroughputResult {
  PointKey key;
  double p_attempt = 0.0;
  double p1 = 0.0;
  double p2 = 1.0;
  double p3 = 1.0;
  double n_ph = 0.0;
  std::int64_t vulnerable_slots = 0;
  double th = 0.0;
  double th_alt = 0.0;
  ChannelChain channel;
  NodeChain node;
};

/// Throughput with p' solved from the scheme parameters.
ThroughputResult throughput(const NetworkParams& network, const SchemeParams& scheme, double n_ph);

/// Throughput at a caller-supplied attempt probability, bypassing the
/// fixed point.
ThroughputResult throughput_at(double p_attempt, const NetworkParams& network,
                               const SchemeParams& scheme, double n_ph);

}  // namespace bcast::analytic
