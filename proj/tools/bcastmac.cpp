// Command-line front end: analytic tables, figure data, simulation runs and
// analytic-vs-simulation validation sweeps.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "bcast/emit.hpp"
#include "bcast/errors.hpp"
#include "bcast/experiments.hpp"
#include "bcast/simulator.hpp"

namespace {

enum ExitCode : int {
  kOk = 0,
  kUsage = 2,
  kNumerical = 3,
  kBandFailure = 4,
  kIo = 5,
};

struct Flags {
  std::vector<std::string> schemes;
  std::vector<double> gates;
  std::vector<double> n_grid;
  std::vector<double> p_grid;
  std::vector<double> fractions;
  std::vector<double> cs_radii;
  std::int64_t delta = 0;
  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  std::size_t seeds = 0;
  std::uint64_t seed = 0;
  double margin = 0.0;
  std::string config;
  std::string format;
  std::string out;
  std::string figure = "fig8";
};

struct Options {
  CLI::Option* schemes;
  CLI::Option* gates;
  CLI::Option* n_grid;
  CLI::Option* p_grid;
  CLI::Option* fractions;
  CLI::Option* cs_radii;
  CLI::Option* delta;
  CLI::Option* slots;
  CLI::Option* warmup;
  CLI::Option* seeds;
  CLI::Option* seed;
  CLI::Option* margin;
  CLI::Option* config;
  CLI::Option* format;
  CLI::Option* out;
};

bool given(const CLI::Option* opt) { return opt->count() > 0; }

// Precedence: command line over config file over defaults.
// Validation accepts empty grids and reports an empty table; run_validation
// checks the spec itself otherwise.
enum class Command { Analytic, Simulate, Validate };

bcast::experiments::SweepSpec build_spec(const Flags& f, const Options& o, Command command) {
  const bool needs_simulation = command != Command::Analytic;
  using bcast::UsageError;
  using bcast::experiments::SimulationBlock;
  using bcast::experiments::SweepSpec;

  SweepSpec spec = given(o.config) ? bcast::experiments::load_spec(f.config) : SweepSpec::defaults();

  if (given(o.schemes)) {
    spec.schemes.clear();
    for (const auto& s : f.schemes) {
      try {
        spec.schemes.push_back(bcast::parse_scheme(s));
      } catch (const bcast::DomainError& e) {
        throw UsageError(e.what());
      }
    }
  }
  if (given(o.gates)) spec.gates = f.gates;
  if (given(o.n_grid)) spec.n_grid = f.n_grid;
  if (given(o.p_grid)) spec.p_grid = f.p_grid;
  if (given(o.fractions) && given(o.cs_radii)) {
    throw UsageError("--hidden-fraction and --cs-radius are mutually exclusive");
  }
  if (given(o.fractions)) spec.hidden_fractions = f.fractions;
  if (given(o.cs_radii)) {
    // Ranges are in units of R.
    spec.hidden_fractions.clear();
    for (double cs : f.cs_radii) {
      if (!(cs >= 1.0 && cs <= 2.0)) {
        throw UsageError("--cs-radius must lie in [1, 2] (units of R)");
      }
      spec.hidden_fractions.push_back(std::clamp((4.0 - cs * cs) / 3.0, 0.0, 1.0));
    }
  }
  if (given(o.delta)) spec.delta_slots = f.delta;
  if (given(o.format)) spec.format = f.format;
  if (given(o.out)) spec.out = f.out;

  const bool sim_flags = given(o.slots) || given(o.warmup) || given(o.seeds) || given(o.seed) ||
                         given(o.margin);
  if (sim_flags) {
    SimulationBlock block = spec.simulation.value_or(SimulationBlock{});
    if (given(o.slots)) block.slots = f.slots;
    if (given(o.warmup)) block.warmup = f.warmup;
    if (given(o.seeds)) block.seeds = f.seeds;
    if (given(o.seed)) block.seed = f.seed;
    if (given(o.margin)) block.relative_margin = f.margin;
    spec.simulation = block;
  }
  if (needs_simulation && !spec.simulation) {
    throw UsageError(
        "this command needs a simulation block (config 'simulation' or --slots/--seeds/--seed)");
  }
  if (command != Command::Validate) {
    spec.validate();
  }
  return spec;
}

bcast::emit::Metadata metadata(const bcast::experiments::SweepSpec& spec) {
  bcast::emit::Metadata meta;
  meta.timestamp = bcast::emit::utc_timestamp();
  if (spec.simulation) {
    meta.seed = spec.simulation->seed;
    meta.rng_algorithm = std::string(bcast::sim::kRngAlgorithm);
  }
  return meta;
}

void emit_table(const bcast::experiments::Table& table, const bcast::experiments::SweepSpec& spec) {
  std::string content;
  if (spec.format == "csv") {
    content = bcast::emit::to_csv(table);
  } else if (spec.format == "json") {
    content = bcast::emit::to_json(table, metadata(spec));
  } else {
    content = bcast::emit::to_svg(table);
  }
  bcast::emit::write_output(content, spec.out);
}

template <class T>
void emit_records(const T& records, const bcast::experiments::SweepSpec& spec) {
  if (spec.format == "svg") {
    throw bcast::UsageError("svg output is only available for analytic tables");
  }
  const std::string content = spec.format == "csv"
                                  ? bcast::emit::to_csv(records)
                                  : bcast::emit::to_json(records, metadata(spec));
  bcast::emit::write_output(content, spec.out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Broadcast MAC throughput: analytic model and Monte Carlo validation"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags f;
  Options o{};
  o.schemes = app.add_option("--scheme", f.schemes, "csma and/or aloha")->delimiter(',');
  o.gates = app.add_option("--gate", f.gates, "threshold gate factors in (0, 1]")->delimiter(',');
  o.n_grid = app.add_option("--n", f.n_grid, "mean neighbour counts")->delimiter(',');
  o.p_grid = app.add_option("--p", f.p_grid, "ready probabilities")->delimiter(',');
  o.fractions =
      app.add_option("--hidden-fraction", f.fractions, "hidden area fractions")->delimiter(',');
  o.cs_radii =
      app.add_option("--cs-radius", f.cs_radii, "carrier-sense ranges in units of R")->delimiter(',');
  o.delta = app.add_option("--delta", f.delta, "frame length in slots");
  o.slots = app.add_option("--slots", f.slots, "simulated slots per run");
  o.warmup = app.add_option("--warmup", f.warmup, "discarded warmup slots");
  o.seeds = app.add_option("--seeds", f.seeds, "replications per grid point");
  o.seed = app.add_option("--seed", f.seed, "base RNG seed");
  o.margin = app.add_option("--margin", f.margin, "relative validation margin");
  o.config = app.add_option("--config", f.config, "JSON sweep configuration");
  o.format = app.add_option("--format", f.format, "csv, json or svg");
  o.out = app.add_option("--out", f.out, "output path (stdout when omitted)");

  auto* analytic_cmd = app.add_subcommand("analytic", "closed-form throughput over a grid");
  auto* simulate_cmd = app.add_subcommand("simulate", "Monte Carlo throughput over a grid");
  auto* figures_cmd = app.add_subcommand("figures", "data behind the throughput figures");
  figures_cmd->add_option("--figure", f.figure, "fig5, fig6, fig7 or fig8");
  auto* validate_cmd = app.add_subcommand("validate", "analytic against simulation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*analytic_cmd) {
      const auto spec = build_spec(f, o, Command::Analytic);
      emit_table(bcast::experiments::analytic_table(spec), spec);
    } else if (*figures_cmd) {
      const auto spec = build_spec(f, o, Command::Analytic);
      emit_table(bcast::experiments::run_figure(bcast::experiments::parse_figure(f.figure), spec),
                 spec);
    } else if (*simulate_cmd) {
      const auto spec = build_spec(f, o, Command::Simulate);
      emit_records(bcast::experiments::run_simulation(spec), spec);
    } else if (*validate_cmd) {
      const auto spec = build_spec(f, o, Command::Validate);
      const auto table = bcast::experiments::run_validation(spec);
      emit_records(table, spec);
      if (!table.all_within_band()) {
        std::cerr << "validation: at least one point falls outside the tolerance band\n";
        return kBandFailure;
      }
    }
  } catch (const bcast::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const bcast::DomainError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const bcast::CapacityError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const bcast::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << " (bracket [" << e.bracket_lo() << ", "
              << e.bracket_hi() << "])\n";
    return kNumerical;
  } catch (const bcast::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  }
  return kOk;
}
