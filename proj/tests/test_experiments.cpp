#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "bcast/analytic.hpp"
#include "bcast/emit.hpp"
#include "bcast/errors.hpp"
#include "bcast/experiments.hpp"
#include "json.hpp"

using namespace bcast;
using namespace bcast::experiments;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SweepSpec three_point_spec() {
  SweepSpec spec = SweepSpec::defaults();
  spec.schemes = {Scheme::CsmaBroadcast};
  spec.gates = {1.0};
  spec.n_grid = {10.0};
  spec.hidden_fractions = {0.5};
  spec.p_grid = {0.001, 0.01, 0.1};
  return spec;
}

// Re-derive throughput from emitted columns alone.
double rederive(const Row& r, std::int64_t delta) {
  const double p = r.p_attempt;
  const double p_ws = p * std::exp(-p * r.n_mean) * std::exp(-p * r.n_ph * r.v_slots);
  const double d = static_cast<double>(delta);
  return p_ws * d / (1.0 + p * (d + 1.0));
}

}  // namespace

TEST_CASE("log-spaced grid") {
  const auto g = log_space(1e-4, 1.0, 40);
  REQUIRE(g.size() == 40);
  CHECK(g.front() == 1e-4);
  CHECK(g.back() == 1.0);
  for (std::size_t i = 1; i < g.size(); ++i) {
    CHECK(g[i] / g[i - 1] == doctest::Approx(std::pow(1e4, 1.0 / 39.0)));
  }
  CHECK_THROWS_AS(log_space(0.0, 1.0, 3), UsageError);
}

TEST_CASE("sweep spec defaults and validation") {
  SweepSpec spec = SweepSpec::defaults();
  CHECK(spec.delta_slots == 100);
  CHECK(spec.n_grid == std::vector<double>{2, 5, 10, 20});
  CHECK(spec.hidden_fractions == std::vector<double>{1.0, 0.5, 0.0});
  CHECK(spec.gates == std::vector<double>{1.0, 0.5, 0.25, 0.1});
  CHECK_NOTHROW(spec.validate());

  spec.hidden_fractions = {1.2};
  CHECK_THROWS_AS(spec.validate(), UsageError);
  spec = SweepSpec::defaults();
  spec.n_grid.clear();
  CHECK_THROWS_AS(spec.validate(), UsageError);
  spec = SweepSpec::defaults();
  spec.format = "xml";
  CHECK_THROWS_AS(spec.validate(), UsageError);
}

TEST_CASE("config overlay") {
  SweepSpec spec = SweepSpec::defaults();
  apply_config(nlohmann::json::parse(R"({
      "schemes": ["aloha", "CsmaBroadcast"],
      "p_grid": {"log_space": [0.001, 0.1, 3]},
      "delta_slots": 10,
      "simulation": {"slots": 500, "seeds": 2}
  })"),
               spec);
  CHECK(spec.schemes == std::vector<Scheme>{Scheme::SlottedAloha, Scheme::CsmaBroadcast});
  REQUIRE(spec.p_grid.size() == 3);
  CHECK(spec.p_grid[1] == doctest::Approx(0.01));
  CHECK(spec.delta_slots == 10);
  REQUIRE(spec.simulation.has_value());
  CHECK(spec.simulation->slots == 500);
  CHECK(spec.simulation->seeds == 2);
  CHECK(spec.simulation->warmup == SimulationBlock{}.warmup);
  CHECK(spec.n_grid == SweepSpec::defaults().n_grid);

  CHECK_THROWS_AS(apply_config(nlohmann::json::parse(R"({"colour": 1})"), spec), UsageError);
  CHECK_THROWS_AS(apply_config(nlohmann::json::parse(R"({"schemes": ["tdma"]})"), spec),
                  UsageError);
  CHECK_THROWS_AS(apply_config(nlohmann::json::parse(R"({"delta_slots": "ten"})"), spec),
                  UsageError);

  // Serialising and overlaying again is a fixed point.
  SweepSpec again = SweepSpec::defaults();
  apply_config(to_json(spec), again);
  CHECK(to_json(again) == to_json(spec));
}

TEST_CASE("figure tables") {
  SweepSpec spec = SweepSpec::defaults();
  spec.p_grid = log_space(1e-3, 1.0, 5);

  const Table fig5 = run_figure(Figure::Fig5, spec);
  const Table fig6 = run_figure(Figure::Fig6, spec);
  const Table fig7 = run_figure(Figure::Fig7, spec);
  const Table fig8 = run_figure(Figure::Fig8, spec);

  CHECK(fig5.size() == 3 * 4 * 5);
  CHECK(fig6.size() == 3 * 3 * 4 * 5);
  CHECK(fig7.size() == 4 * 3 * 4 * 5);
  for (const Row& r : fig5) {
    CHECK(r.scheme == Scheme::CsmaBroadcast);
    CHECK(r.gate == 1.0);
    CHECK(r.v_slots == 201);
    if (r.hidden_fraction == 0.0) {
      CHECK(r.p3 == 1.0);
    }
  }
  for (const Row& r : fig6) {
    CHECK(r.gate < 1.0);
  }
  for (const Row& r : fig7) {
    CHECK(r.scheme == Scheme::SlottedAloha);
    CHECK(r.v_slots == 101);
    CHECK(r.p_attempt == doctest::Approx(r.p * r.gate));
  }

  Table concat = fig5;
  concat.insert(concat.end(), fig6.begin(), fig6.end());
  concat.insert(concat.end(), fig7.begin(), fig7.end());
  CHECK(fig8 == concat);

  spec.gates = {1.0};
  CHECK_THROWS_AS(run_figure(Figure::Fig6, spec), UsageError);
  CHECK_THROWS_AS(parse_figure("fig9"), UsageError);
  CHECK(parse_figure("fig7") == Figure::Fig7);
}

TEST_CASE("evaluate_point uses the worst-case hidden count") {
  const Row r = evaluate_point(Scheme::CsmaBroadcast, 1.0, 10.0, 0.1, 1.0, 100);
  CHECK(r.n_ph == doctest::Approx(30.0).epsilon(1e-14));
  const Row h = evaluate_point(Scheme::CsmaBroadcast, 1.0, 10.0, 0.1, 0.5, 100);
  CHECK(h.n_ph == doctest::Approx(15.0).epsilon(1e-14));
}

TEST_CASE("CSV output") {
  SUBCASE("header and number formatting") {
    const std::string csv = emit::to_csv(Table{});
    CHECK(csv == std::string(emit::kCsvHeader) + "\n");
    CHECK(emit::format_double(0.1) == "0.1");
    CHECK(emit::format_double(1.0) == "1");
    CHECK(emit::format_double(1e-30) == "1e-30");
    CHECK(emit::csv_field("plain") == "plain");
    CHECK(emit::csv_field("a,b") == "\"a,b\"");
    CHECK(emit::csv_field("say \"hi\"") == "\"say \"\"hi\"\"\"");
  }

  SUBCASE("one-row round trip") {
    const Table one{evaluate_point(Scheme::SlottedAloha, 0.25, 5.0, 0.3, 0.5, 100)};
    const std::string csv = emit::to_csv(one);
    CHECK(csv.find('\r') == std::string::npos);
    CHECK(emit::parse_csv(csv) == one);
  }

  SUBCASE("every emitted row re-derives its throughput") {
    SweepSpec spec = SweepSpec::defaults();
    const Table rows = emit::parse_csv(emit::to_csv(run_figure(Figure::Fig8, spec)));
    REQUIRE(rows.size() == 40 * 4 * 3 * (1 + 3 + 4));
    for (const Row& r : rows) {
      CHECK(std::abs(rederive(r, spec.delta_slots) - r.throughput) <= 1e-9);
      CHECK(r.throughput >= 0.0);
      CHECK(r.throughput <= 1.0);
    }
  }

  SUBCASE("malformed input") {
    CHECK_THROWS_AS(emit::parse_csv("a,b\n"), UsageError);
    CHECK_THROWS_AS(emit::parse_csv(std::string(emit::kCsvHeader) + "\nCsmaBroadcast,1\n"),
                    UsageError);
  }
}

TEST_CASE("golden three-point CSV") {
  const std::string golden = read_file(std::string(BCAST_GOLDEN_DIR) + "/three_point.csv");
  REQUIRE(!golden.empty());
  for (int i = 0; i < 5; ++i) {
    CHECK(emit::to_csv(analytic_table(three_point_spec())) == golden);
  }
  // The golden values themselves agree with the closed form.
  for (const Row& r : emit::parse_csv(golden)) {
    CHECK(std::abs(rederive(r, 100) - r.throughput) <= 1e-12);
  }
}

TEST_CASE("JSON output") {
  emit::Metadata meta;
  meta.seed = 7;
  meta.rng_algorithm = "mt19937_64";
  meta.timestamp = "2026-01-01T00:00:00Z";
  const Table table = analytic_table(three_point_spec());
  const auto doc = nlohmann::json::parse(emit::to_json(table, meta));
  CHECK(doc.at("metadata").at("seed") == 7);
  CHECK(doc.at("metadata").at("rng_algorithm") == "mt19937_64");
  CHECK(doc.at("metadata").at("version") == std::string(kVersion));
  REQUIRE(doc.at("rows").size() == 3);
  const auto& row = doc.at("rows")[1];
  CHECK(row.size() == 12);
  CHECK(row.at("scheme") == "CsmaBroadcast");
  CHECK(row.at("throughput").get<double>() == table[1].throughput);
  CHECK(row.at("v_slots") == 201);
}

TEST_CASE("SVG output") {
  SweepSpec spec = SweepSpec::defaults();
  spec.n_grid = {10.0};
  const std::string svg = emit::to_svg(run_figure(Figure::Fig5, spec));
  CHECK(svg.rfind("<svg", 0) == 0);
  std::size_t lines = 0;
  for (std::size_t pos = svg.find("<polyline"); pos != std::string::npos;
       pos = svg.find("<polyline", pos + 1)) {
    ++lines;
  }
  CHECK(lines == 3);
  CHECK(svg.find("1e-4") != std::string::npos);
}

TEST_CASE("output errors name the path") {
  const std::string path = "/nonexistent-dir/out.csv";
  try {
    emit::write_output("x", path);
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(path) != std::string::npos);
  }
}

TEST_CASE("validation harness") {
  SweepSpec spec = SweepSpec::defaults();
  spec.gates = {1.0};
  spec.hidden_fractions = {0.0};
  spec.n_grid = {5.0};
  spec.delta_slots = 10;

  CHECK_THROWS_AS(run_validation(spec), UsageError);

  spec.simulation = SimulationBlock{};
  spec.simulation->slots = 3000;
  spec.simulation->warmup = 100;
  spec.simulation->seeds = 3;

  SUBCASE("empty grid") {
    spec.p_grid.clear();
    CHECK(run_validation(spec).rows.empty());
    CHECK(run_validation(spec).all_within_band());
  }

  SUBCASE("silent point") {
    spec.p_grid = {0.0};
    const ValidationTable t = run_validation(spec);
    REQUIRE(t.rows.size() == 1);
    CHECK(t.rows[0].analytic.throughput == 0.0);
    CHECK(t.rows[0].sim_mean == 0.0);
    CHECK(t.rows[0].within_band);
  }

  SUBCASE("band verdicts follow from the emitted columns") {
    spec.p_grid = {0.002, 0.02, 0.2};
    const ValidationTable t = run_validation(spec);
    REQUIRE(t.rows.size() == 3);
    for (const auto& row : t.rows) {
      const double gap = std::abs(row.analytic.throughput - row.sim_mean);
      CHECK(row.abs_gap == gap);
      CHECK(row.within_ci == (gap <= row.sim_ci95));
      CHECK(row.within_band == (gap <= row.sim_ci95 + 0.2 * row.sim_mean));
    }
    const auto doc = nlohmann::json::parse(emit::to_json(t, emit::Metadata{}));
    CHECK(doc.at("rows").size() == 3);
    CHECK(emit::to_csv(t).find("within_band") != std::string::npos);
  }
}
