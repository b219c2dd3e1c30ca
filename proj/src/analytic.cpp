#include "bcast/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "bcast/errors.hpp"

namespace bcast::analytic {

namespace {

constexpr double kResidualTolerance = 1e-12;
constexpr int kMaxBisectionSteps = 10000;
constexpr int kMaxDampedSteps = 10000;

// Derivative of attempt_map with respect to x; always <= 0.
double attempt_map_slope(double x, double n_mean, double p_effective, std::int64_t delta_slots) {
  const double delta = static_cast<double>(delta_slots);
  const double busy = -std::expm1(-x * n_mean);
  const double denom = delta * busy + SchemeParams::kSlot;
  return -SchemeParams::kSlot * p_effective * delta * n_mean * std::exp(-x * n_mean) /
         (denom * denom);
}

void check_probability(double value, const char* name) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw DomainError(std::string(name) + " must lie in [0, 1]");
  }
}

}  // namespace

double poisson_pmf(std::int64_t count, double mean) {
  if (count < 0) {
    throw DomainError("poisson_pmf: count must be non-negative");
  }
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw DomainError("poisson_pmf: mean must be non-negative and finite");
  }
  if (mean == 0.0) {
    return count == 0 ? 1.0 : 0.0;
  }
  const double k = static_cast<double>(count);
  return std::exp(k * std::log(mean) - mean - std::lgamma(k + 1.0));
}

double attempt_map(double x, double n_mean, double p_effective, std::int64_t delta_slots) {
  const double busy = -std::expm1(-x * n_mean);
  return SchemeParams::kSlot * p_effective /
         (static_cast<double>(delta_slots) * busy + SchemeParams::kSlot);
}

double solve_attempt_probability(const NetworkParams& network, const SchemeParams& scheme) {
  scheme.validate();
  const double p_eff = scheme.p_effective();
  if (scheme.scheme == Scheme::SlottedAloha || p_eff == 0.0) {
    return p_eff;
  }

  const double n = network.n_mean();
  const auto residual = [&](double x) {
    return x - attempt_map(x, n, p_eff, scheme.delta_slots);
  };

  // residual(0) = -p_eff < 0 and residual(p_eff) >= 0 since g <= p_eff.
  double lo = 0.0;
  double hi = p_eff;
  for (int step = 0; step < kMaxBisectionSteps; ++step) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    if (residual(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }

  const double r_lo = std::abs(residual(lo));
  const double r_hi = std::abs(residual(hi));
  const double root = r_lo <= r_hi ? lo : hi;
  if (std::min(r_lo, r_hi) > kResidualTolerance) {
    throw NumericalError("attempt probability bisection did not converge", lo, hi);
  }
  return root;
}

double solve_attempt_probability_damped(const NetworkParams& network,
                                        const SchemeParams& scheme) {
  scheme.validate();
  const double p_eff = scheme.p_effective();
  if (scheme.scheme == Scheme::SlottedAloha || p_eff == 0.0) {
    return p_eff;
  }

  const double n = network.n_mean();
  double x = 0.0;
  for (int step = 0; step < kMaxDampedSteps; ++step) {
    const double gx = attempt_map(x, n, p_eff, scheme.delta_slots);
    if (std::abs(gx - x) <= 1e-14) {
      return x;
    }
    // 1 / (1 - g') lies in (0, 1] because g is decreasing.
    const double damping = 1.0 / (1.0 - attempt_map_slope(x, n, p_eff, scheme.delta_slots));
    x = std::clamp(x + damping * (gx - x), 0.0, p_eff);
  }
  if (std::abs(attempt_map(x, n, p_eff, scheme.delta_slots) - x) <= kResidualTolerance) {
    return x;
  }
  throw NumericalError("damped attempt probability iteration did not converge", x, x);
}

ChannelChain channel_chain(double p_attempt, const NetworkParams& network,
                           std::int64_t delta_slots) {
  check_probability(p_attempt, "attempt probability");
  if (delta_slots < 1) {
    throw DomainError("frame length must be at least one slot");
  }
  ChannelChain chain;
  const double load = p_attempt * network.n_mean();
  chain.p_ii = std::exp(-load);
  chain.p_bi = 1.0;
  chain.phi_idle = 1.0 / (2.0 - chain.p_ii);
  chain.phi_busy = 1.0 - chain.phi_idle;
  chain.t_idle = SchemeParams::kSlot;
  chain.t_busy = static_cast<double>(delta_slots);
  chain.p_limit =
      SchemeParams::kSlot / (chain.t_busy * -std::expm1(-load) + SchemeParams::kSlot);
  return chain;
}

NodeChain node_chain(double p_attempt, double p_ws, std::int64_t delta_slots) {
  check_probability(p_attempt, "attempt probability");
  if (!(p_ws >= 0.0)) {
    throw DomainError("success transition probability must be non-negative");
  }
  if (p_ws > p_attempt) {
    throw DomainError("success transition probability exceeds attempt probability");
  }
  if (delta_slots < 1) {
    throw DomainError("frame length must be at least one slot");
  }
  NodeChain chain;
  chain.p_ww = 1.0 - p_attempt;
  chain.p_ws = p_ws;
  chain.p_wc = p_attempt - p_ws;
  chain.p_sw = 1.0;
  chain.p_cw = 1.0;
  // Every non-wait state returns to wait, so phi_w = phi_w p_ww + (1 - phi_w).
  chain.phi_wait = 1.0 / (1.0 + p_attempt);
  chain.phi_succ = p_ws / (1.0 + p_attempt);
  chain.phi_coll = chain.p_wc / (1.0 + p_attempt);
  chain.t_wait = SchemeParams::kSlot;
  chain.t_succ = static_cast<double>(delta_slots) + SchemeParams::kSlot;
  chain.t_coll = chain.t_succ;
  return chain;
}

std::int64_t vulnerable_slots(const SchemeParams& scheme) {
  switch (scheme.scheme) {
    case Scheme::CsmaBroadcast:
      return 2 * scheme.delta_slots + 1;
    case Scheme::SlottedAloha:
      return scheme.delta_slots + 1;
  }
  return 0;
}

SuccessFactors success_probability(double p_attempt, const NetworkParams& network,
                                   double n_ph, std::int64_t vulnerable) {
  check_probability(p_attempt, "attempt probability");
  if (!(n_ph >= 0.0) || !std::isfinite(n_ph)) {
    throw DomainError("hidden node count must be non-negative and finite");
  }
  if (vulnerable < 1) {
    throw DomainError("vulnerable period must be at least one slot");
  }
  SuccessFactors f;
  f.p1 = p_attempt;
  f.p2 = std::exp(-p_attempt * network.n_mean());
  f.p3 = std::exp(-p_attempt * n_ph * static_cast<double>(vulnerable));
  f.p_ws = f.p1 * f.p2 * f.p3;
  return f;
}

ThroughputResult throughput_at(double p_attempt, const NetworkParams& network,
                               const SchemeParams& scheme, double n_ph) {
  scheme.validate();
  ThroughputResult r;
  r.key = PointKey{scheme.scheme, scheme.threshold_gate, network.n_mean(),
                   scheme.p_ready,  scheme.delta_slots,   n_ph};
  r.p_attempt = p_attempt;
  r.n_ph = n_ph;
  r.vulnerable_slots = vulnerable_slots(scheme);

  const SuccessFactors f = success_probability(p_attempt, network, n_ph, r.vulnerable_slots);
  r.p1 = f.p1;
  r.p2 = f.p2;
  r.p3 = f.p3;

  r.channel = channel_chain(p_attempt, network, scheme.delta_slots);
  r.node = node_chain(p_attempt, f.p_ws, scheme.delta_slots);

  const double delta = static_cast<double>(scheme.delta_slots);
  r.th = f.p_ws * delta / (SchemeParams::kSlot + p_attempt * (delta + SchemeParams::kSlot));

  const NodeChain& nc = r.node;
  r.th_alt = nc.phi_succ * delta /
             (nc.phi_succ * nc.t_succ + nc.phi_coll * nc.t_coll + nc.phi_wait * nc.t_wait);
  return r;
}

ThroughputResult throughput(const NetworkParams& network, const SchemeParams& scheme,
                            double n_ph) {
  return throughput_at(solve_attempt_probability(network, scheme), network, scheme, n_ph);
}

}  // namespace bcast::analytic
