#include "bcast/experiments.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "bcast/analytic.hpp"
#include "bcast/errors.hpp"
#include "bcast/geometry.hpp"
#include "bcast/simulator.hpp"

namespace bcast::experiments {

namespace {

constexpr double kRadius = 1.0;

template <class T>
std::vector<T> get_vector(const nlohmann::json& value, const char* key) {
  if (!value.is_array()) {
    throw UsageError(std::string("config key '") + key + "' must be an array");
  }
  return value.get<std::vector<T>>();
}

std::vector<double> get_grid(const nlohmann::json& value, const char* key) {
  // Either an explicit list or {"log_space": [lo, hi, count]}.
  if (value.is_object()) {
    if (!value.contains("log_space") || value.size() != 1) {
      throw UsageError(std::string("config key '") + key + "' object must be {\"log_space\": [lo, hi, count]}");
    }
    const auto& ls = value.at("log_space");
    if (!ls.is_array() || ls.size() != 3) {
      throw UsageError(std::string("config key '") + key + "' log_space needs [lo, hi, count]");
    }
    return log_space(ls[0].get<double>(), ls[1].get<double>(), ls[2].get<std::size_t>());
  }
  return get_vector<double>(value, key);
}

void apply_simulation(const nlohmann::json& doc, SimulationBlock& block) {
  if (!doc.is_object()) {
    throw UsageError("config key 'simulation' must be an object");
  }
  for (const auto& [key, value] : doc.items()) {
    if (key == "slots") {
      block.slots = value.get<std::int64_t>();
    } else if (key == "warmup") {
      block.warmup = value.get<std::int64_t>();
    } else if (key == "seeds") {
      block.seeds = value.get<std::size_t>();
    } else if (key == "seed") {
      block.seed = value.get<std::uint64_t>();
    } else if (key == "world_side") {
      block.world_side = value.get<double>();
    } else if (key == "relative_margin") {
      block.relative_margin = value.get<double>();
    } else {
      throw UsageError("unknown simulation config key '" + key + "'");
    }
  }
}

sim::SimConfig sim_config(const SweepSpec& spec, Scheme scheme, double gate, double n_mean,
                          double p, double fraction) {
  const SimulationBlock& block = *spec.simulation;
  sim::SimConfig c;
  c.network = NetworkParams::from_mean_neighbors(n_mean, kRadius);
  c.scheme = SchemeParams{scheme, gate, p, spec.delta_slots};
  c.cs_radius = geometry::fraction_to_cs_radius(kRadius, fraction);
  c.world_side = block.world_side * kRadius;
  c.slots = block.slots;
  c.warmup_slots = block.warmup;
  c.seed = block.seed;
  return c;
}

// Calls fn(scheme, gate, fraction, n, p) over the grid in emission order.
template <class Fn>
void for_each_point(const SweepSpec& spec, const std::vector<Scheme>& schemes,
                    const std::vector<double>& gates, Fn&& fn) {
  for (Scheme scheme : schemes) {
    for (double gate : gates) {
      for (double fraction : spec.hidden_fractions) {
        for (double n : spec.n_grid) {
          for (double p : spec.p_grid) {
            fn(scheme, gate, fraction, n, p);
          }
        }
      }
    }
  }
}

}  // namespace

SweepSpec SweepSpec::defaults() {
  SweepSpec spec;
  spec.p_grid = log_space(1e-4, 1.0, 40);
  return spec;
}

void SweepSpec::validate() const {
  if (schemes.empty() || p_grid.empty() || n_grid.empty() || hidden_fractions.empty() ||
      gates.empty()) {
    throw UsageError("sweep grids must be non-empty");
  }
  for (double p : p_grid) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw UsageError("p values must lie in [0, 1]");
    }
  }
  for (double n : n_grid) {
    if (!(n > 0.0) || !std::isfinite(n)) {
      throw UsageError("N values must be positive");
    }
  }
  for (double f : hidden_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) {
      throw UsageError("hidden fractions must lie in [0, 1]");
    }
  }
  for (double g : gates) {
    if (!(g > 0.0 && g <= 1.0)) {
      throw UsageError("gates must lie in (0, 1]");
    }
  }
  if (delta_slots < 1) {
    throw UsageError("delta must be at least one slot");
  }
  if (format != "csv" && format != "json" && format != "svg") {
    throw UsageError("format must be csv, json or svg");
  }
  if (simulation) {
    const SimulationBlock& b = *simulation;
    if (b.warmup < 0 || b.slots <= b.warmup) {
      throw UsageError("simulation needs slots > warmup >= 0");
    }
    if (b.seeds < 1) {
      throw UsageError("simulation needs at least one seed");
    }
    if (!(b.world_side >= 8.0)) {
      throw UsageError("simulation world side must be at least 8 (in units of R)");
    }
    if (!(b.relative_margin >= 0.0)) {
      throw UsageError("relative margin must be non-negative");
    }
  }
}

std::vector<double> log_space(double lo, double hi, std::size_t count) {
  if (!(lo > 0.0 && hi >= lo) || count == 0) {
    throw UsageError("log_space needs 0 < lo <= hi and count >= 1");
  }
  std::vector<double> out;
  out.reserve(count);
  if (count == 1) {
    out.push_back(lo);
    return out;
  }
  const double a = std::log10(lo);
  const double b = std::log10(hi);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1)));
  }
  // Pin the endpoints exactly.
  out.front() = lo;
  out.back() = hi;
  return out;
}

void apply_config(const nlohmann::json& doc, SweepSpec& spec) {
  if (!doc.is_object()) {
    throw UsageError("config must be a JSON object");
  }
  try {
    for (const auto& [key, value] : doc.items()) {
      if (key == "schemes") {
        spec.schemes.clear();
        for (const auto& s : get_vector<std::string>(value, "schemes")) {
          spec.schemes.push_back(parse_scheme(s));
        }
      } else if (key == "p_grid") {
        spec.p_grid = get_grid(value, "p_grid");
      } else if (key == "n_grid") {
        spec.n_grid = get_grid(value, "n_grid");
      } else if (key == "hidden_fractions") {
        spec.hidden_fractions = get_vector<double>(value, "hidden_fractions");
      } else if (key == "delta_slots") {
        spec.delta_slots = value.get<std::int64_t>();
      } else if (key == "gates") {
        spec.gates = get_vector<double>(value, "gates");
      } else if (key == "format") {
        spec.format = value.get<std::string>();
      } else if (key == "out") {
        spec.out = value.get<std::string>();
      } else if (key == "simulation") {
        SimulationBlock block = spec.simulation.value_or(SimulationBlock{});
        apply_simulation(value, block);
        spec.simulation = block;
      } else {
        throw UsageError("unknown config key '" + key + "'");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw UsageError(std::string("bad config value: ") + e.what());
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

SweepSpec load_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config file '" + path + "'");
  }
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  SweepSpec spec = SweepSpec::defaults();
  apply_config(doc, spec);
  return spec;
}

nlohmann::json to_json(const SweepSpec& spec) {
  nlohmann::json doc;
  doc["schemes"] = nlohmann::json::array();
  for (Scheme s : spec.schemes) {
    doc["schemes"].push_back(std::string(to_string(s)));
  }
  doc["p_grid"] = spec.p_grid;
  doc["n_grid"] = spec.n_grid;
  doc["hidden_fractions"] = spec.hidden_fractions;
  doc["delta_slots"] = spec.delta_slots;
  doc["gates"] = spec.gates;
  doc["format"] = spec.format;
  doc["out"] = spec.out;
  if (spec.simulation) {
    const SimulationBlock& b = *spec.simulation;
    doc["simulation"] = {{"slots", b.slots},           {"warmup", b.warmup},
                         {"seeds", b.seeds},           {"seed", b.seed},
                         {"world_side", b.world_side}, {"relative_margin", b.relative_margin}};
  }
  return doc;
}

Row evaluate_point(Scheme scheme, double gate, double n_mean, double p, double hidden_fraction,
                   std::int64_t delta_slots) {
  const NetworkParams network = NetworkParams::from_mean_neighbors(n_mean, kRadius);
  const SchemeParams params{scheme, gate, p, delta_slots};
  const double n_ph = geometry::hidden_count_for_fraction(network, hidden_fraction);
  const analytic::ThroughputResult r = analytic::throughput(network, params, n_ph);

  Row row;
  row.scheme = scheme;
  row.gate = gate;
  row.n_mean = n_mean;
  row.p = p;
  row.p_attempt = r.p_attempt;
  row.hidden_fraction = hidden_fraction;
  row.n_ph = n_ph;
  row.v_slots = r.vulnerable_slots;
  row.p1 = r.p1;
  row.p2 = r.p2;
  row.p3 = r.p3;
  row.throughput = r.th;
  return row;
}

Table analytic_table(const SweepSpec& spec) {
  spec.validate();
  Table table;
  for_each_point(spec, spec.schemes, spec.gates,
                 [&](Scheme scheme, double gate, double fraction, double n, double p) {
                   table.push_back(evaluate_point(scheme, gate, n, p, fraction, spec.delta_slots));
                 });
  return table;
}

Figure parse_figure(std::string_view id) {
  if (id == "fig5") return Figure::Fig5;
  if (id == "fig6") return Figure::Fig6;
  if (id == "fig7") return Figure::Fig7;
  if (id == "fig8") return Figure::Fig8;
  throw UsageError("unknown figure '" + std::string(id) + "' (expected fig5, fig6, fig7 or fig8)");
}

std::string_view to_string(Figure figure) {
  switch (figure) {
    case Figure::Fig5:
      return "fig5";
    case Figure::Fig6:
      return "fig6";
    case Figure::Fig7:
      return "fig7";
    case Figure::Fig8:
      return "fig8";
  }
  return "unknown";
}

Table run_figure(Figure figure, const SweepSpec& spec) {
  spec.validate();
  const auto family = [&](Scheme scheme, const std::vector<double>& gates) {
    Table table;
    for_each_point(spec, {scheme}, gates,
                   [&](Scheme s, double gate, double fraction, double n, double p) {
                     table.push_back(evaluate_point(s, gate, n, p, fraction, spec.delta_slots));
                   });
    return table;
  };

  std::vector<double> gated;
  for (double g : spec.gates) {
    if (g < 1.0) {
      gated.push_back(g);
    }
  }

  switch (figure) {
    case Figure::Fig5:
      return family(Scheme::CsmaBroadcast, {1.0});
    case Figure::Fig6:
      if (gated.empty()) {
        throw UsageError("fig6 needs at least one gate below 1");
      }
      return family(Scheme::CsmaBroadcast, gated);
    case Figure::Fig7:
      return family(Scheme::SlottedAloha, spec.gates);
    case Figure::Fig8: {
      Table all = run_figure(Figure::Fig5, spec);
      for (Figure f : {Figure::Fig6, Figure::Fig7}) {
        Table part = run_figure(f, spec);
        all.insert(all.end(), part.begin(), part.end());
      }
      return all;
    }
  }
  return {};
}

bool ValidationTable::all_within_band() const {
  for (const auto& row : rows) {
    if (!row.within_band) {
      return false;
    }
  }
  return true;
}

ValidationTable run_validation(const SweepSpec& spec) {
  if (!spec.simulation) {
    throw UsageError("validation needs a simulation block");
  }
  ValidationTable out;
  if (spec.schemes.empty() || spec.p_grid.empty() || spec.n_grid.empty() ||
      spec.hidden_fractions.empty() || spec.gates.empty()) {
    return out;
  }
  spec.validate();
  for_each_point(spec, spec.schemes, spec.gates,
                 [&](Scheme scheme, double gate, double fraction, double n, double p) {
                   const sim::SimConfig config = sim_config(spec, scheme, gate, n, p, fraction);
                   const analytic::ThroughputResult analytic =
                       analytic::throughput(config.network, config.scheme, config.n_ph());
                   const sim::EnsembleStats stats =
                       sim::run_ensemble(config, spec.simulation->seeds);
                   const sim::Comparison cmp =
                       sim::compare(analytic, stats, spec.simulation->relative_margin);

                   ValidationRow row;
                   row.analytic = evaluate_point(scheme, gate, n, p, fraction, spec.delta_slots);
                   row.cs_radius = config.cs_radius;
                   row.sim_mean = cmp.simulated;
                   row.sim_ci95 = cmp.ci95_halfwidth;
                   row.abs_gap = cmp.abs_gap;
                   row.rel_gap = cmp.rel_gap;
                   row.within_ci = cmp.within_ci;
                   row.within_band = cmp.within_band;
                   out.rows.push_back(row);
                 });
  return out;
}

std::vector<SimulationRow> run_simulation(const SweepSpec& spec) {
  if (!spec.simulation) {
    throw UsageError("simulation needs a simulation block");
  }
  spec.validate();
  std::vector<SimulationRow> out;
  for_each_point(spec, spec.schemes, spec.gates,
                 [&](Scheme scheme, double gate, double fraction, double n, double p) {
                   const sim::SimConfig config = sim_config(spec, scheme, gate, n, p, fraction);
                   const sim::EnsembleStats stats =
                       sim::run_ensemble(config, spec.simulation->seeds);
                   SimulationRow row;
                   row.scheme = scheme;
                   row.gate = gate;
                   row.n_mean = n;
                   row.p = p;
                   row.hidden_fraction = fraction;
                   row.cs_radius = config.cs_radius;
                   row.delta_slots = spec.delta_slots;
                   row.seeds = spec.simulation->seeds;
                   row.slots = config.slots;
                   row.warmup = config.warmup_slots;
                   row.throughput_mean = stats.throughput_mean;
                   row.ci95 = stats.ci95_halfwidth;
                   out.push_back(row);
                 });
  return out;
}

}  // namespace bcast::experiments
