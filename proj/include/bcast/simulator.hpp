#pragma once

#include <concepts>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

#include "bcast/analytic.hpp"
#include "bcast/params.hpp"

namespace bcast::sim {

/// Recorded in output metadata so runs can be reproduced.
inline constexpr std::string_view kRngAlgorithm = "mt19937_64";

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct SimConfig {
  NetworkParams network{1.0, 1.0};
  SchemeParams scheme;
  double cs_radius = 1.0;
  double world_side = 8.0;
  std::int64_t slots = 10000;
  std::int64_t warmup_slots = 0;
  std::uint64_t seed = 1;

  /// Throws DomainError on inconsistent settings.
  void validate() const;

  /// Expected hidden-node count implied by cs_radius.
  double n_ph() const;
  PointKey key() const;
};

/// Poisson(lambda L^2) nodes placed uniformly on the torus.
/// Throws CapacityError when the expected count exceeds 1e7.
std::vector<Point> generate_topology(const SimConfig& config, std::mt19937_64& rng);
std::vector<Point> generate_topology(const SimConfig& config);

/// Wrapped Euclidean distance on a torus of the given side.
double torus_distance(Point a, Point b, double side);

/// Compressed adjacency: neighbours of node i are
/// indices[offsets[i] .. offsets[i + 1]).
struct Adjacency {
  std::vector<std::size_t> offsets;
  std::vector<std::size_t> indices;

  std::size_t degree(std::size_t node) const { return offsets[node + 1] - offsets[node]; }
  const std::size_t* begin(std::size_t node) const { return indices.data() + offsets[node]; }
  const std::size_t* end(std::size_t node) const { return indices.data() + offsets[node + 1]; }
};

/// All pairs within `reach` of each other, excluding self. Sorted per node.
Adjacency build_adjacency(const std::vector<Point>& positions, double reach, double side);

enum class Mode { Waiting, Transmitting };

struct NodeState {
  Point position;
  Mode mode = Mode::Waiting;
  std::int64_t remaining_slots = 0;
  std::int64_t tx_started_slot = -1;
  // Indexed like the node's receive adjacency.
  std::vector<bool> receivers_ok;
  // Slots of the current frame that fall after warmup.
  std::int64_t counted_slots = 0;
};

struct SimStats {
  PointKey key;
  std::uint64_t seed = 0;
  std::vector<std::int64_t> per_node_success_slots;
  std::vector<std::int64_t> per_node_tx_slots;
  std::vector<std::int64_t> per_node_wait_slots;
  std::int64_t total_slots = 0;
  double throughput_mean = 0.0;
  double ci95_halfwidth = 0.0;
  std::int64_t broadcasts_attempted = 0;
  std::int64_t broadcasts_succeeded = 0;

  std::size_t node_count() const { return per_node_tx_slots.size(); }
};

/// What happened in one slot. Only filled when a log is requested.
struct SlotEvents {
  std::int64_t slot = 0;
  std::vector<std::size_t> ready;
  std::vector<std::size_t> deferred;  // ready but sensed busy
  std::vector<std::size_t> started;
  std::vector<std::size_t> transmitting;
  std::vector<std::pair<std::size_t, std::size_t>> corrupted;  // (sender, receiver)
  std::vector<std::size_t> succeeded;
  std::vector<std::size_t> failed;
};

/// Decides whether a waiting node becomes ready in a slot.
template <class F>
concept ReadySource = requires(F f, std::size_t node, std::int64_t slot) {
  { f(node, slot) } -> std::convertible_to<bool>;
};

/// Bernoulli readiness driven by a 64-bit engine. One draw per waiting
/// node per slot, compared against p scaled to 2^64.
class BernoulliReady {
 public:
  BernoulliReady(std::mt19937_64& rng, double probability);

  bool operator()(std::size_t, std::int64_t) {
    const std::uint64_t draw = rng_();
    return always_ || draw < threshold_;
  }

 private:
  std::mt19937_64& rng_;
  std::uint64_t threshold_ = 0;
  bool always_ = false;
};

class World {
 public:
  World(std::vector<Point> positions, const SimConfig& config);

  /// Advance one slot. Waiting nodes ask `ready` in index order; a ready
  /// node starts a frame unless carrier sensing saw any transmission
  /// within cs_radius (its own included) in the previous slot. A receiver
  /// loses a frame if it transmits or hears a second sender in any slot
  /// of it. A broadcast succeeds only if every neighbour decoded it.
  template <ReadySource Ready>
  void step(std::int64_t slot, Ready& ready, SlotEvents* log = nullptr);

  std::size_t size() const { return nodes_.size(); }
  const NodeState& node(std::size_t i) const { return nodes_[i]; }
  const Adjacency& receive_neighbors() const { return receive_; }
  const Adjacency& sense_neighbors() const { return sense_; }

  /// Aggregates counters from slots at or after warmup.
  SimStats stats() const;

 private:
  void start_frame(std::size_t node, std::int64_t slot);
  void resolve_slot(std::int64_t slot, SlotEvents* log);

  SimConfig config_;
  std::vector<NodeState> nodes_;
  Adjacency receive_;
  Adjacency sense_;

  std::vector<std::size_t> active_;
  std::vector<std::uint8_t> transmitting_;
  std::vector<std::uint8_t> sensed_busy_;
  std::vector<std::uint32_t> heard_;

  std::vector<std::int64_t> success_slots_;
  std::vector<std::int64_t> tx_slots_;
  std::vector<std::int64_t> wait_slots_;
  std::int64_t counted_total_ = 0;
  std::int64_t attempted_ = 0;
  std::int64_t succeeded_ = 0;
};

template <ReadySource Ready>
void World::step(std::int64_t slot, Ready& ready, SlotEvents* log) {
  if (log != nullptr) {
    *log = SlotEvents{};
    log->slot = slot;
  }
  const bool senses = config_.scheme.scheme == Scheme::CsmaBroadcast;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].mode != Mode::Waiting || !ready(i, slot)) {
      continue;
    }
    if (log != nullptr) {
      log->ready.push_back(i);
    }
    if (senses && sensed_busy_[i] != 0) {
      if (log != nullptr) {
        log->deferred.push_back(i);
      }
      continue;
    }
    start_frame(i, slot);
    if (log != nullptr) {
      log->started.push_back(i);
    }
  }
  resolve_slot(slot, log);
}

/// Builds the topology from the config seed and runs every slot.
SimStats run(const SimConfig& config);

/// Per-seed means pooled over independent replications.
struct EnsembleStats {
  PointKey key;
  std::vector<std::uint64_t> seeds;
  std::vector<double> per_seed_throughput;
  double throughput_mean = 0.0;
  double ci95_halfwidth = 0.0;
};

/// Runs `replications` seeds derived from config.seed, concurrently when
/// hardware allows; results are kept in seed order.
EnsembleStats run_ensemble(const SimConfig& config, std::size_t replications);

std::uint64_t replication_seed(std::uint64_t base, std::size_t index);

/// Half-width of a 95% Student-t interval for the mean of `samples`.
double ci95_halfwidth(const std::vector<double>& samples);

struct Comparison {
  PointKey key;
  double analytic = 0.0;
  double simulated = 0.0;
  double ci95_halfwidth = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  bool within_ci = false;
  // Within the CI widened by relative_margin * simulated on each side.
  bool within_band = false;
  double relative_margin = 0.0;
};

/// Throws UsageError when the two results describe different points.
Comparison compare(const analytic::ThroughputResult& analytic, const SimStats& stats,
                   double relative_margin = 0.2);
Comparison compare(const analytic::ThroughputResult& analytic, const EnsembleStats& stats,
                   double relative_margin = 0.2);

}  // namespace bcast::sim
