#include "bcast/params.hpp"

#include <algorithm>
#include <cmath>

#include "bcast/errors.hpp"

namespace bcast {

NetworkParams::NetworkParams(double lambda, double radius) : lambda_(lambda), radius_(radius) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw DomainError("node density must be positive and finite");
  }
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw DomainError("radio range must be positive and finite");
  }
}

NetworkParams NetworkParams::from_mean_neighbors(double n_mean, double radius) {
  if (!(radius > 0.0)) {
    throw DomainError("radio range must be positive");
  }
  return NetworkParams(n_mean / (std::numbers::pi * radius * radius), radius);
}

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::CsmaBroadcast:
      return "CsmaBroadcast";
    case Scheme::SlottedAloha:
      return "SlottedAloha";
  }
  return "unknown";
}

Scheme parse_scheme(std::string_view text) {
  if (text == "csma" || text == "CsmaBroadcast") {
    return Scheme::CsmaBroadcast;
  }
  if (text == "aloha" || text == "SlottedAloha") {
    return Scheme::SlottedAloha;
  }
  throw DomainError("unknown scheme '" + std::string(text) + "'");
}

void SchemeParams::validate() const {
  if (!(p_ready >= 0.0 && p_ready <= 1.0)) {
    throw DomainError("ready probability must lie in [0, 1]");
  }
  if (!(threshold_gate > 0.0 && threshold_gate <= 1.0)) {
    throw DomainError("threshold gate must lie in (0, 1]");
  }
  if (delta_slots < 1) {
    throw DomainError("frame length must be at least one slot");
  }
}

}  // namespace bcast

namespace bcast {

namespace {

bool close(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

bool PointKey::matches(const PointKey& other, double rel_tol) const {
  return scheme == other.scheme && delta_slots == other.delta_slots &&
         close(threshold_gate, other.threshold_gate, rel_tol) &&
         close(n_mean, other.n_mean, rel_tol) && close(p_ready, other.p_ready, rel_tol) &&
         close(n_ph, other.n_ph, rel_tol);
}

}  // namespace bcast
