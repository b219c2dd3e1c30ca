#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "bcast/params.hpp"

namespace bcast::experiments {

inline constexpr std::string_view kVersion = "0.1.0";

/// Monte Carlo settings attached to a sweep.
struct SimulationBlock {
  std::int64_t slots = 200000;
  std::int64_t warmup = 1000;
  std::size_t seeds = 30;
  std::uint64_t seed = 1;
  // Multiples of R; at least 8.
  double world_side = 8.0;
  double relative_margin = 0.2;
};

struct SweepSpec {
  std::vector<Scheme> schemes{Scheme::CsmaBroadcast};
  std::vector<double> p_grid;
  std::vector<double> n_grid{2.0, 5.0, 10.0, 20.0};
  std::vector<double> hidden_fractions{1.0, 0.5, 0.0};
  std::int64_t delta_slots = 100;
  std::vector<double> gates{1.0, 0.5, 0.25, 0.1};
  std::string format = "csv";
  std::string out;  // empty: stdout
  std::optional<SimulationBlock> simulation;

  /// Default grids, including 40 log-spaced p values over [1e-4, 1].
  static SweepSpec defaults();

  /// Throws UsageError on empty grids or out-of-range values.
  void validate() const;
};

std::vector<double> log_space(double lo, double hi, std::size_t count);

/// Overlays the keys present in `doc` onto `spec`. Unknown keys are
/// rejected with UsageError.
void apply_config(const nlohmann::json& doc, SweepSpec& spec);
SweepSpec load_spec(const std::string& path);
nlohmann::json to_json(const SweepSpec& spec);

struct Row {
  Scheme scheme = Scheme::CsmaBroadcast;
  double gate = 1.0;
  double n_mean = 0.0;
  double p = 0.0;
  double p_attempt = 0.0;
  double hidden_fraction = 0.0;
  double n_ph = 0.0;
  std::int64_t v_slots = 0;
  double p1 = 0.0;
  double p2 = 0.0;
  double p3 = 0.0;
  double throughput = 0.0;

  bool operator==(const Row&) const = default;
};

using Table = std::vector<Row>;

/// Analytic evaluation of one operating point on a unit-range field.
Row evaluate_point(Scheme scheme, double gate, double n_mean, double p, double hidden_fraction,
                   std::int64_t delta_slots);

/// Full cross product, ordered scheme, gate, fraction, N, p.
Table analytic_table(const SweepSpec& spec);

enum class Figure { Fig5, Fig6, Fig7, Fig8 };

Figure parse_figure(std::string_view id);
std::string_view to_string(Figure figure);

/// fig5: carrier sense, no gating. fig6: carrier sense, every gate < 1.
/// fig7: slotted aloha, every gate. fig8: fig5, fig6 and fig7 in order.
Table run_figure(Figure figure, const SweepSpec& spec);

struct ValidationRow {
  Row analytic;
  double cs_radius = 0.0;
  double sim_mean = 0.0;
  double sim_ci95 = 0.0;
  double abs_gap = 0.0;
  double rel_gap = 0.0;
  bool within_ci = false;
  bool within_band = false;
};

struct ValidationTable {
  std::vector<ValidationRow> rows;

  bool all_within_band() const;
};

/// Analytic throughput against simulated ensembles at every grid point.
/// Throws UsageError when the spec has no simulation block.
ValidationTable run_validation(const SweepSpec& spec);

struct SimulationRow {
  Scheme scheme = Scheme::CsmaBroadcast;
  double gate = 1.0;
  double n_mean = 0.0;
  double p = 0.0;
  double hidden_fraction = 0.0;
  double cs_radius = 0.0;
  std::int64_t delta_slots = 0;
  std::size_t seeds = 0;
  std::int64_t slots = 0;
  std::int64_t warmup = 0;
  double throughput_mean = 0.0;
  double ci95 = 0.0;
};

/// Simulated ensembles only, one row per grid point.
std::vector<SimulationRow> run_simulation(const SweepSpec& spec);

}  // namespace bcast::experiments
