#pragma once

#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

namespace bcast {

/// Poisson node field: density and the common transmit/receive range.
/// The mean neighbour count is always derived, never stored.
class NetworkParams {
 public:
  /// Throws DomainError unless lambda > 0 and radius > 0.
  NetworkParams(double lambda, double radius);

  /// Field of unit range with the given mean neighbour count.
  static NetworkParams from_mean_neighbors(double n_mean, double radius = 1.0);

  double lambda() const { return lambda_; }
  double radius() const { return radius_; }
  double n_mean() const { return lambda_ * std::numbers::pi * radius_ * radius_; }

 private:
  double lambda_;
  double radius_;
};

enum class Scheme { CsmaBroadcast, SlottedAloha };

std::string_view to_string(Scheme scheme);
/// Accepts "csma", "CsmaBroadcast", "aloha", "SlottedAloha".
Scheme parse_scheme(std::string_view text);

/// MAC scheme configuration. Time is measured in slots, so the slot
/// duration is the numeraire and equals one.
struct SchemeParams {
  Scheme scheme = Scheme::CsmaBroadcast;
  double threshold_gate = 1.0;
  double p_ready = 0.0;
  std::int64_t delta_slots = 100;

  static constexpr double kSlot = 1.0;

  /// Ready probability after threshold gating.
  double p_effective() const { return p_ready * threshold_gate; }

  /// Throws DomainError when any field is out of range.
  void validate() const;
};

}  // namespace bcast

namespace bcast {

/// Identifies one operating point so analytic and simulated results can be
/// checked for compatibility before they are compared.
struct PointKey {
  Scheme scheme = Scheme::CsmaBroadcast;
  double threshold_gate = 1.0;
  double n_mean = 0.0;
  double p_ready = 0.0;
  std::int64_t delta_slots = 0;
  double n_ph = 0.0;

  bool matches(const PointKey& other, double rel_tol = 1e-9) const;
};

}  // namespace bcast
