#pragma once

// Hand-enumerated hidden-terminal scenarios shared by the unit tests and
// the acceptance binary. Every expected slot was worked out by hand from
// the sensing and reception rules, not produced by the simulator.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "bcast/simulator.hpp"

namespace scenario {

using Ids = std::vector<std::size_t>;
using Links = std::vector<std::pair<std::size_t, std::size_t>>;

struct Script {
  std::set<std::pair<std::size_t, std::int64_t>> ready;

  bool operator()(std::size_t node, std::int64_t slot) const {
    return ready.count({node, slot}) != 0;
  }
};

struct Expect {
  Ids ready;
  Ids deferred;
  Ids started;
  Ids transmitting;
  Links corrupted;
  Ids succeeded;
  Ids failed;
};

struct Scenario {
  std::string name;
  bcast::sim::SimConfig config;
  std::vector<bcast::sim::Point> positions;
  Script script;
  std::map<std::int64_t, Expect> expected;  // slots not listed expect nothing
  std::optional<std::vector<std::int64_t>> success_slots;
  std::optional<std::vector<std::int64_t>> tx_slots;
  std::optional<std::vector<std::int64_t>> wait_slots;
  std::optional<std::int64_t> attempted;
  std::optional<std::int64_t> succeeded;
};

inline bcast::sim::SimConfig small_config(bcast::Scheme scheme, double radius, double cs,
                                          double side, std::int64_t delta, std::int64_t slots) {
  bcast::sim::SimConfig c;
  c.network = bcast::NetworkParams(1.0, radius);
  c.scheme = bcast::SchemeParams{scheme, 1.0, 0.5, delta};
  c.cs_radius = cs;
  c.world_side = side;
  c.slots = slots;
  c.warmup_slots = 0;
  return c;
}

inline std::string describe(const Ids& ids) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << (i == 0 ? "" : ",") << ids[i];
  }
  out << '}';
  return out.str();
}

inline std::string describe(const Links& links) {
  std::ostringstream out;
  out << '{';
  for (std::size_t i = 0; i < links.size(); ++i) {
    out << (i == 0 ? "" : ",") << links[i].first << "->" << links[i].second;
  }
  out << '}';
  return out.str();
}

/// Runs the scenario and returns one message per disagreement.
inline std::vector<std::string> run(const Scenario& s) {
  std::vector<std::string> problems;
  auto field = [&](std::int64_t slot, const char* what, const auto& got, const auto& want) {
    if (got != want) {
      problems.push_back(s.name + ": slot " + std::to_string(slot) + " " + what + " got " +
                         describe(got) + " want " + describe(want));
    }
  };
  auto counter = [&](const char* what, const auto& got, const auto& want) {
    if (want && got != *want) {
      problems.push_back(s.name + ": " + what + " mismatch");
    }
  };

  bcast::sim::World world(s.positions, s.config);
  Script script = s.script;
  bcast::sim::SlotEvents log;
  for (std::int64_t t = 0; t < s.config.slots; ++t) {
    world.step(t, script, &log);
    const auto it = s.expected.find(t);
    const Expect want = it == s.expected.end() ? Expect{} : it->second;
    Links corrupted = log.corrupted;
    Ids succeeded = log.succeeded;
    Ids failed = log.failed;
    std::sort(corrupted.begin(), corrupted.end());
    std::sort(succeeded.begin(), succeeded.end());
    std::sort(failed.begin(), failed.end());
    field(t, "ready", log.ready, want.ready);
    field(t, "deferred", log.deferred, want.deferred);
    field(t, "started", log.started, want.started);
    field(t, "transmitting", log.transmitting, want.transmitting);
    field(t, "corrupted", corrupted, want.corrupted);
    field(t, "succeeded", succeeded, want.succeeded);
    field(t, "failed", failed, want.failed);
  }
  const bcast::sim::SimStats stats = world.stats();
  counter("success slots", stats.per_node_success_slots, s.success_slots);
  counter("tx slots", stats.per_node_tx_slots, s.tx_slots);
  counter("wait slots", stats.per_node_wait_slots, s.wait_slots);
  counter("attempted", stats.broadcasts_attempted, s.attempted);
  counter("succeeded", stats.broadcasts_succeeded, s.succeeded);
  return problems;
}

inline Scenario two_neighbours() {
  using bcast::Scheme;
  Scenario s;
  s.name = "two neighbours";
  s.config = small_config(Scheme::CsmaBroadcast, 1.0, 1.0, 8.0, 3, 20);
  s.positions = {{1.0, 1.0}, {1.5, 1.0}};
  s.script = Script{{{0, 0}, {1, 2}, {1, 4}, {0, 5}, {0, 6}, {1, 7}, {0, 12}, {1, 12}, {1, 17}}};
  auto& e = s.expected;
  e[0] = {{0}, {}, {0}, {0}, {}, {}, {}};
  e[1] = {{}, {}, {}, {0}, {}, {}, {}};
  e[2] = {{1}, {1}, {}, {0}, {}, {0}, {}};
  e[4] = {{1}, {}, {1}, {1}, {}, {}, {}};
  e[5] = {{0}, {0}, {}, {1}, {}, {}, {}};
  e[6] = {{0}, {0}, {}, {1}, {}, {1}, {}};
  e[7] = {{1}, {1}, {}, {}, {}, {}, {}};  // senses its own frame
  e[12] = {{0, 1}, {}, {0, 1}, {0, 1}, {{0, 1}, {1, 0}}, {}, {}};
  e[13] = {{}, {}, {}, {0, 1}, {}, {}, {}};
  e[14] = {{}, {}, {}, {0, 1}, {}, {}, {0, 1}};
  e[17] = {{1}, {}, {1}, {1}, {}, {}, {}};
  e[18] = {{}, {}, {}, {1}, {}, {}, {}};
  e[19] = {{}, {}, {}, {1}, {}, {1}, {}};
  s.success_slots = std::vector<std::int64_t>{3, 6};
  s.tx_slots = std::vector<std::int64_t>{6, 9};
  s.wait_slots = std::vector<std::int64_t>{14, 11};
  s.attempted = 5;
  s.succeeded = 3;
  return s;
}

// A - B - C in a line, 1 apart, with R = 1.2: A and C both reach B only.
inline Scenario chain_hidden() {
  Scenario s;
  s.name = "chain, sensing range R";
  s.config = small_config(bcast::Scheme::CsmaBroadcast, 1.2, 1.2, 10.0, 4, 8);
  s.positions = {{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}};
  s.script = Script{{{0, 0}, {2, 2}}};
  auto& e = s.expected;
  e[0] = {{0}, {}, {0}, {0}, {}, {}, {}};
  e[1] = {{}, {}, {}, {0}, {}, {}, {}};
  e[2] = {{2}, {}, {2}, {0, 2}, {{0, 1}, {2, 1}}, {}, {}};
  e[3] = {{}, {}, {}, {0, 2}, {}, {}, {0}};
  e[4] = {{}, {}, {}, {2}, {}, {}, {}};
  e[5] = {{}, {}, {}, {2}, {}, {}, {2}};
  s.attempted = 2;
  s.succeeded = 0;
  return s;
}

inline Scenario chain_sensed() {
  Scenario s;
  s.name = "chain, sensing range 2R";
  s.config = small_config(bcast::Scheme::CsmaBroadcast, 1.2, 2.4, 10.0, 4, 8);
  s.positions = {{1.0, 1.0}, {2.0, 1.0}, {3.0, 1.0}};
  s.script = Script{{{0, 0}, {2, 2}}};
  auto& e = s.expected;
  e[0] = {{0}, {}, {0}, {0}, {}, {}, {}};
  e[1] = {{}, {}, {}, {0}, {}, {}, {}};
  e[2] = {{2}, {2}, {}, {0}, {}, {}, {}};
  e[3] = {{}, {}, {}, {0}, {}, {0}, {}};
  s.attempted = 1;
  s.succeeded = 1;
  return s;
}

inline Scenario chain_aloha() {
  Scenario s = chain_hidden();
  s.name = "chain, slotted aloha";
  s.config = small_config(bcast::Scheme::SlottedAloha, 1.2, 2.4, 10.0, 4, 8);
  return s;
}

inline std::vector<Scenario> all() {
  return {two_neighbours(), chain_hidden(), chain_sensed(), chain_aloha()};
}

}  // namespace scenario
