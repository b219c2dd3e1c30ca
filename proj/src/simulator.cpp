#include "bcast/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include <boost/math/distributions/students_t.hpp>

#include "bcast/errors.hpp"
#include "bcast/geometry.hpp"

namespace bcast::sim {

namespace {

constexpr double kMaxExpectedNodes = 1e7;

double canonical(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double wrapped_delta(double a, double b, double side) {
  const double d = std::abs(a - b);
  return std::min(d, side - d);
}

}  // namespace

void SimConfig::validate() const {
  scheme.validate();
  const double r = network.radius();
  // area_breakdown enforces [R, 2R].
  geometry::area_breakdown(r, cs_radius);
  if (!(world_side >= 8.0 * r)) {
    throw DomainError("world side must be at least 8R");
  }
  if (warmup_slots < 0 || slots <= warmup_slots) {
    throw DomainError("need slots > warmup_slots >= 0");
  }
}

double SimConfig::n_ph() const {
  return geometry::hidden_count(network,
                                geometry::area_breakdown(network.radius(), cs_radius).a_ph);
}

PointKey SimConfig::key() const {
  return PointKey{scheme.scheme, scheme.threshold_gate, network.n_mean(),
                  scheme.p_ready, scheme.delta_slots,   n_ph()};
}

double torus_distance(Point a, Point b, double side) {
  return std::hypot(wrapped_delta(a.x, b.x, side), wrapped_delta(a.y, b.y, side));
}

std::vector<Point> generate_topology(const SimConfig& config, std::mt19937_64& rng) {
  const double side = config.world_side;
  const double expected = config.network.lambda() * side * side;
  if (expected > kMaxExpectedNodes) {
    throw CapacityError("expected node count " + std::to_string(expected) +
                        " exceeds the 1e7 limit");
  }
  std::poisson_distribution<std::int64_t> count_dist(expected);
  const std::int64_t count = count_dist(rng);

  std::vector<Point> points;
  points.reserve(static_cast<std::size_t>(count));
  for (std::int64_t i = 0; i < count; ++i) {
    const double x = canonical(rng) * side;
    const double y = canonical(rng) * side;
    points.push_back({x, y});
  }
  return points;
}

std::vector<Point> generate_topology(const SimConfig& config) {
  std::mt19937_64 rng(config.seed);
  return generate_topology(config, rng);
}

Adjacency build_adjacency(const std::vector<Point>& positions, double reach, double side) {
  const std::size_t n = positions.size();
  std::vector<std::vector<std::size_t>> lists(n);

  const auto cells_per_side = static_cast<std::size_t>(std::floor(side / reach));
  if (cells_per_side < 3) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        if (i != j && torus_distance(positions[i], positions[j], side) <= reach) {
          lists[i].push_back(j);
        }
      }
    }
  } else {
    const double cell = side / static_cast<double>(cells_per_side);
    const auto cell_of = [&](double v) {
      auto c = static_cast<std::size_t>(v / cell);
      return std::min(c, cells_per_side - 1);
    };
    std::vector<std::vector<std::size_t>> buckets(cells_per_side * cells_per_side);
    for (std::size_t i = 0; i < n; ++i) {
      buckets[cell_of(positions[i].y) * cells_per_side + cell_of(positions[i].x)].push_back(i);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t cx = cell_of(positions[i].x);
      const std::size_t cy = cell_of(positions[i].y);
      for (std::size_t dy = 0; dy < 3; ++dy) {
        for (std::size_t dx = 0; dx < 3; ++dx) {
          const std::size_t x = (cx + cells_per_side + dx - 1) % cells_per_side;
          const std::size_t y = (cy + cells_per_side + dy - 1) % cells_per_side;
          for (std::size_t j : buckets[y * cells_per_side + x]) {
            if (i != j && torus_distance(positions[i], positions[j], side) <= reach) {
              lists[i].push_back(j);
            }
          }
        }
      }
      std::sort(lists[i].begin(), lists[i].end());
    }
  }

  Adjacency adj;
  adj.offsets.reserve(n + 1);
  adj.offsets.push_back(0);
  for (const auto& list : lists) {
    adj.indices.insert(adj.indices.end(), list.begin(), list.end());
    adj.offsets.push_back(adj.indices.size());
  }
  return adj;
}

BernoulliReady::BernoulliReady(std::mt19937_64& rng, double probability) : rng_(rng) {
  if (!(probability >= 0.0 && probability <= 1.0)) {
    throw DomainError("ready probability must lie in [0, 1]");
  }
  if (probability >= 1.0) {
    always_ = true;
  } else {
    threshold_ = static_cast<std::uint64_t>(std::ldexp(probability, 64));
  }
}

World::World(std::vector<Point> positions, const SimConfig& config) : config_(config) {
  config_.validate();
  const double side = config_.world_side;
  receive_ = build_adjacency(positions, config_.network.radius(), side);
  sense_ = build_adjacency(positions, config_.cs_radius, side);

  const std::size_t n = positions.size();
  nodes_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes_[i].position = positions[i];
  }
  transmitting_.assign(n, 0);
  sensed_busy_.assign(n, 0);
  heard_.assign(n, 0);
  success_slots_.assign(n, 0);
  tx_slots_.assign(n, 0);
  wait_slots_.assign(n, 0);
}

void World::start_frame(std::size_t node, std::int64_t slot) {
  NodeState& ns = nodes_[node];
  ns.mode = Mode::Transmitting;
  ns.remaining_slots = config_.scheme.delta_slots;
  ns.tx_started_slot = slot;
  ns.receivers_ok.assign(receive_.degree(node), true);
  ns.counted_slots = 0;
  transmitting_[node] = 1;
  active_.push_back(node);
  if (slot >= config_.warmup_slots) {
    ++attempted_;
  }
}

void World::resolve_slot(std::int64_t slot, SlotEvents* log) {
  const bool counted = slot >= config_.warmup_slots;

  for (std::size_t u : active_) {
    for (const std::size_t* r = receive_.begin(u); r != receive_.end(u); ++r) {
      ++heard_[*r];
    }
  }

  for (std::size_t s : active_) {
    NodeState& ns = nodes_[s];
    std::size_t k = 0;
    for (const std::size_t* r = receive_.begin(s); r != receive_.end(s); ++r, ++k) {
      if (ns.receivers_ok[k] && (transmitting_[*r] != 0 || heard_[*r] > 1)) {
        ns.receivers_ok[k] = false;
        if (log != nullptr) {
          log->corrupted.emplace_back(s, *r);
        }
      }
    }
  }

  std::fill(sensed_busy_.begin(), sensed_busy_.end(), 0);
  for (std::size_t u : active_) {
    for (const std::size_t* r = receive_.begin(u); r != receive_.end(u); ++r) {
      heard_[*r] = 0;
    }
    sensed_busy_[u] = 1;
    for (const std::size_t* v = sense_.begin(u); v != sense_.end(u); ++v) {
      sensed_busy_[*v] = 1;
    }
  }

  if (log != nullptr) {
    log->transmitting = active_;
    std::sort(log->transmitting.begin(), log->transmitting.end());
  }

  if (counted) {
    ++counted_total_;
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (transmitting_[i] == 0) {
        ++wait_slots_[i];
      }
    }
  }

  std::size_t kept = 0;
  for (std::size_t s : active_) {
    NodeState& ns = nodes_[s];
    if (counted) {
      ++tx_slots_[s];
      ++ns.counted_slots;
    }
    if (--ns.remaining_slots > 0) {
      active_[kept++] = s;
      continue;
    }
    const bool ok = std::all_of(ns.receivers_ok.begin(), ns.receivers_ok.end(),
                                [](bool b) { return b; });
    if (ok) {
      success_slots_[s] += ns.counted_slots;
      if (ns.tx_started_slot >= config_.warmup_slots) {
        ++succeeded_;
      }
    }
    if (log != nullptr) {
      (ok ? log->succeeded : log->failed).push_back(s);
    }
    ns.mode = Mode::Waiting;
    transmitting_[s] = 0;
  }
  active_.resize(kept);
}

SimStats World::stats() const {
  SimStats out;
  out.key = config_.key();
  out.seed = config_.seed;
  out.per_node_success_slots = success_slots_;
  out.per_node_tx_slots = tx_slots_;
  out.per_node_wait_slots = wait_slots_;
  out.total_slots = counted_total_;
  out.broadcasts_attempted = attempted_;
  out.broadcasts_succeeded = succeeded_;

  if (!nodes_.empty() && counted_total_ > 0) {
    std::vector<double> fractions;
    fractions.reserve(nodes_.size());
    for (std::int64_t s : success_slots_) {
      fractions.push_back(static_cast<double>(s) / static_cast<double>(counted_total_));
    }
    double sum = 0.0;
    for (double f : fractions) {
      sum += f;
    }
    out.throughput_mean = sum / static_cast<double>(fractions.size());
    out.ci95_halfwidth = ci95_halfwidth(fractions);
  }
  return out;
}

SimStats run(const SimConfig& config) {
  config.validate();
  std::mt19937_64 rng(config.seed);
  World world(generate_topology(config, rng), config);
  BernoulliReady ready(rng, config.scheme.p_effective());
  for (std::int64_t slot = 0; slot < config.slots; ++slot) {
    world.step(slot, ready);
  }
  return world.stats();
}

std::uint64_t replication_seed(std::uint64_t base, std::size_t index) {
  return base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index);
}

double ci95_halfwidth(const std::vector<double>& samples) {
  const std::size_t n = samples.size();
  if (n < 2) {
    return 0.0;
  }
  double mean = 0.0;
  for (double v : samples) {
    mean += v;
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double v : samples) {
    ss += (v - mean) * (v - mean);
  }
  const double sd = std::sqrt(ss / static_cast<double>(n - 1));
  const boost::math::students_t dist(static_cast<double>(n - 1));
  return boost::math::quantile(dist, 0.975) * sd / std::sqrt(static_cast<double>(n));
}

EnsembleStats run_ensemble(const SimConfig& config, std::size_t replications) {
  config.validate();
  EnsembleStats out;
  out.key = config.key();
  out.seeds.resize(replications);
  out.per_seed_throughput.resize(replications);
  for (std::size_t i = 0; i < replications; ++i) {
    out.seeds[i] = replication_seed(config.seed, i);
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < replications; i = next++) {
      SimConfig c = config;
      c.seed = out.seeds[i];
      out.per_seed_throughput[i] = run(c).throughput_mean;
    }
  };
  const std::size_t threads =
      std::min<std::size_t>(std::max(1u, std::thread::hardware_concurrency()), replications);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
      pool.emplace_back(worker);
    }
  }

  if (replications > 0) {
    double sum = 0.0;
    for (double v : out.per_seed_throughput) {
      sum += v;
    }
    out.throughput_mean = sum / static_cast<double>(replications);
    out.ci95_halfwidth = ci95_halfwidth(out.per_seed_throughput);
  }
  return out;
}

namespace {

Comparison compare_summary(const analytic::ThroughputResult& analytic, const PointKey& key,
                           double mean, double ci, double relative_margin) {
  if (!analytic.key.matches(key)) {
    throw UsageError("analytic and simulated results describe different operating points");
  }
  Comparison c;
  c.key = key;
  c.analytic = analytic.th;
  c.simulated = mean;
  c.ci95_halfwidth = ci;
  c.relative_margin = relative_margin;
  c.abs_gap = std::abs(analytic.th - mean);
  if (mean > 0.0) {
    c.rel_gap = c.abs_gap / mean;
  } else {
    c.rel_gap = c.abs_gap == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  c.within_ci = c.abs_gap <= ci;
  c.within_band = c.abs_gap <= ci + relative_margin * mean;
  return c;
}

}  // namespace

Comparison compare(const analytic::ThroughputResult& analytic, const SimStats& stats,
                   double relative_margin) {
  return compare_summary(analytic, stats.key, stats.throughput_mean, stats.ci95_halfwidth,
                         relative_margin);
}

Comparison compare(const analytic::ThroughputResult& analytic, const EnsembleStats& stats,
                   double relative_margin) {
  return compare_summary(analytic, stats.key, stats.throughput_mean, stats.ci95_halfwidth,
                         relative_margin);
}

}  // namespace bcast::sim
