#include "bcast/emit.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "bcast/errors.hpp"

namespace bcast::emit {

namespace {

using experiments::Row;
using experiments::SimulationRow;
using experiments::Table;
using experiments::ValidationTable;

void append_row(std::string& out, const Row& r) {
  out += csv_field(to_string(r.scheme));
  for (double v : {r.gate, r.n_mean, r.p, r.p_attempt, r.hidden_fraction, r.n_ph}) {
    out += ',';
    out += format_double(v);
  }
  out += ',';
  out += std::to_string(r.v_slots);
  for (double v : {r.p1, r.p2, r.p3, r.throughput}) {
    out += ',';
    out += format_double(v);
  }
}

nlohmann::json row_json(const Row& r) {
  return nlohmann::json{{"scheme", std::string(to_string(r.scheme))},
                        {"gate", r.gate},
                        {"n_mean", r.n_mean},
                        {"p", r.p},
                        {"p_attempt", r.p_attempt},
                        {"hidden_fraction", r.hidden_fraction},
                        {"n_ph", r.n_ph},
                        {"v_slots", r.v_slots},
                        {"p1", r.p1},
                        {"p2", r.p2},
                        {"p3", r.p3},
                        {"throughput", r.throughput}};
}

nlohmann::json metadata_json(const Metadata& meta) {
  nlohmann::json m{{"version", meta.version}};
  m["seed"] = meta.seed ? nlohmann::json(*meta.seed) : nlohmann::json(nullptr);
  m["rng_algorithm"] = meta.rng_algorithm;
  m["timestamp"] = meta.timestamp;
  return m;
}

std::string dump(const nlohmann::json& rows, const Metadata& meta) {
  nlohmann::json doc{{"metadata", metadata_json(meta)}, {"rows", rows}};
  return doc.dump(2) + "\n";
}

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) {
    throw UsageError("unterminated quoted CSV field");
  }
  fields.push_back(std::move(cur));
  return fields;
}

double parse_double(const std::string& text) {
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw UsageError("bad number in CSV: '" + text + "'");
  }
  return value;
}

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) {
    throw std::runtime_error("format_double: buffer too small");
  }
  return std::string(buf, ptr);
}

std::string csv_field(std::string_view text) {
  if (text.find_first_of(",\"\r\n") == std::string_view::npos) {
    return std::string(text);
  }
  std::string out = "\"";
  for (char c : text) {
    if (c == '"') {
      out += '"';
    }
    out += c;
  }
  out += '"';
  return out;
}

std::string to_csv(const Table& table) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const Row& r : table) {
    append_row(out, r);
    out += '\n';
  }
  return out;
}

std::string to_csv(const ValidationTable& table) {
  std::string out(kCsvHeader);
  out += ",cs_radius,sim_mean,sim_ci95,abs_gap,rel_gap,within_ci,within_band\n";
  for (const auto& v : table.rows) {
    append_row(out, v.analytic);
    for (double d : {v.cs_radius, v.sim_mean, v.sim_ci95, v.abs_gap, v.rel_gap}) {
      out += ',';
      out += format_double(d);
    }
    out += v.within_ci ? ",true" : ",false";
    out += v.within_band ? ",true\n" : ",false\n";
  }
  return out;
}

std::string to_csv(const std::vector<SimulationRow>& rows) {
  std::string out =
      "scheme,gate,n_mean,p,hidden_fraction,cs_radius,delta_slots,seeds,slots,warmup,"
      "throughput_mean,ci95\n";
  for (const auto& r : rows) {
    out += csv_field(to_string(r.scheme));
    for (double d : {r.gate, r.n_mean, r.p, r.hidden_fraction, r.cs_radius}) {
      out += ',';
      out += format_double(d);
    }
    out += ',' + std::to_string(r.delta_slots) + ',' + std::to_string(r.seeds) + ',' +
           std::to_string(r.slots) + ',' + std::to_string(r.warmup);
    out += ',' + format_double(r.throughput_mean) + ',' + format_double(r.ci95) + '\n';
  }
  return out;
}

std::string to_json(const Table& table, const Metadata& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (const Row& r : table) {
    rows.push_back(row_json(r));
  }
  return dump(rows, meta);
}

std::string to_json(const ValidationTable& table, const Metadata& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& v : table.rows) {
    nlohmann::json j = row_json(v.analytic);
    j["cs_radius"] = v.cs_radius;
    j["sim_mean"] = v.sim_mean;
    j["sim_ci95"] = v.sim_ci95;
    j["abs_gap"] = v.abs_gap;
    j["rel_gap"] = std::isfinite(v.rel_gap) ? nlohmann::json(v.rel_gap) : nlohmann::json(nullptr);
    j["within_ci"] = v.within_ci;
    j["within_band"] = v.within_band;
    rows.push_back(std::move(j));
  }
  return dump(rows, meta);
}

std::string to_json(const std::vector<SimulationRow>& sim_rows, const Metadata& meta) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : sim_rows) {
    rows.push_back({{"scheme", std::string(to_string(r.scheme))},
                    {"gate", r.gate},
                    {"n_mean", r.n_mean},
                    {"p", r.p},
                    {"hidden_fraction", r.hidden_fraction},
                    {"cs_radius", r.cs_radius},
                    {"delta_slots", r.delta_slots},
                    {"seeds", r.seeds},
                    {"slots", r.slots},
                    {"warmup", r.warmup},
                    {"throughput_mean", r.throughput_mean},
                    {"ci95", r.ci95}});
  }
  return dump(rows, meta);
}

std::string to_svg(const Table& table) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 480.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 230.0;
  constexpr double kTop = 30.0;
  constexpr double kBottom = 50.0;
  static constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                             "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                             "#bcbd22", "#17becf"};

  // Family key: scheme, gate, hidden fraction, N.
  using Key = std::tuple<int, double, double, double>;
  std::map<Key, std::vector<std::pair<double, double>>> families;
  std::vector<Key> order;
  double p_min = 0.0;
  double p_max = 0.0;
  double th_max = 0.0;
  for (const Row& r : table) {
    if (!(r.p > 0.0)) {
      continue;
    }
    const Key key{static_cast<int>(r.scheme), r.gate, r.hidden_fraction, r.n_mean};
    auto [it, inserted] = families.try_emplace(key);
    if (inserted) {
      order.push_back(key);
    }
    it->second.emplace_back(r.p, r.throughput);
    p_min = p_min == 0.0 ? r.p : std::min(p_min, r.p);
    p_max = std::max(p_max, r.p);
    th_max = std::max(th_max, r.throughput);
  }
  if (p_max <= p_min) {
    p_max = p_min * 10.0;
  }
  if (th_max <= 0.0) {
    th_max = 1.0;
  }

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double lx0 = std::log10(p_min);
  const double lx1 = std::log10(p_max);
  const auto px = [&](double p) { return kLeft + (std::log10(p) - lx0) / (lx1 - lx0) * plot_w; };
  const auto py = [&](double th) { return kTop + plot_h - th / th_max * plot_h; };

  std::ostringstream svg;
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n";
  svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg << "<g stroke=\"black\" fill=\"none\">\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << kLeft + plot_w
      << "\" y2=\"" << kTop + plot_h << "\"/>\n"
      << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\""
      << kTop + plot_h << "\"/>\n</g>\n";

  svg << "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int decade = static_cast<int>(std::ceil(lx0 - 1e-9));
       decade <= static_cast<int>(std::floor(lx1 + 1e-9)); ++decade) {
    const double x = px(std::pow(10.0, decade));
    svg << "<line x1=\"" << x << "\" y1=\"" << kTop + plot_h << "\" x2=\"" << x << "\" y2=\""
        << kTop + plot_h + 5 << "\" stroke=\"black\"/>\n";
    svg << "<text x=\"" << x << "\" y=\"" << kTop + plot_h + 18
        << "\" text-anchor=\"middle\">1e" << decade << "</text>\n";
  }
  for (int i = 0; i <= 4; ++i) {
    const double th = th_max * i / 4.0;
    svg << "<text x=\"" << kLeft - 6 << "\" y=\"" << py(th) + 4 << "\" text-anchor=\"end\">"
        << format_double(std::round(th * 1e4) / 1e4) << "</text>\n";
  }
  svg << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 10
      << "\" text-anchor=\"middle\">p</text>\n";
  svg << "<text x=\"15\" y=\"" << kTop + plot_h / 2 << "\" transform=\"rotate(-90 15 "
      << kTop + plot_h / 2 << ")\" text-anchor=\"middle\">throughput</text>\n";
  svg << "</g>\n";

  std::size_t index = 0;
  for (const Key& key : order) {
    const auto& pts = families.at(key);
    const char* colour = kPalette[index % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& [p, th] : pts) {
      svg << px(p) << ',' << py(th) << ' ';
    }
    svg << "\"/>\n";

    const auto scheme = static_cast<Scheme>(std::get<0>(key));
    std::ostringstream label;
    label << to_string(scheme) << " q=" << format_double(std::get<1>(key))
          << " hidden=" << format_double(std::get<2>(key))
          << " N=" << format_double(std::get<3>(key));
    const double ly = kTop + 12.0 * static_cast<double>(index);
    svg << "<text x=\"" << kLeft + plot_w + 10 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"9\" fill=\"" << colour << "\">"
        << xml_escape(label.str()) << "</text>\n";
    ++index;
  }
  svg << "</svg>\n";
  return svg.str();
}

Table parse_csv(std::string_view text) {
  Table table;
  std::size_t pos = 0;
  bool header = true;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (header) {
      if (line != kCsvHeader) {
        throw UsageError("unexpected CSV header");
      }
      header = false;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto f = split_record(line);
    if (f.size() != 12) {
      throw UsageError("CSV row has " + std::to_string(f.size()) + " fields, expected 12");
    }
    Row r;
    try {
      r.scheme = parse_scheme(f[0]);
    } catch (const DomainError& e) {
      throw UsageError(e.what());
    }
    r.gate = parse_double(f[1]);
    r.n_mean = parse_double(f[2]);
    r.p = parse_double(f[3]);
    r.p_attempt = parse_double(f[4]);
    r.hidden_fraction = parse_double(f[5]);
    r.n_ph = parse_double(f[6]);
    r.v_slots = static_cast<std::int64_t>(parse_double(f[7]));
    r.p1 = parse_double(f[8]);
    r.p2 = parse_double(f[9]);
    r.p3 = parse_double(f[10]);
    r.throughput = parse_double(f[11]);
    table.push_back(r);
  }
  if (header) {
    throw UsageError("empty CSV input");
  }
  return table;
}

void write_output(const std::string& content, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << content;
    std::cout.flush();
    if (!std::cout) {
      throw IoError("failed writing to stdout");
    }
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot open output file '" + path + "'");
  }
  out << content;
  out.close();
  if (!out) {
    throw IoError("failed writing output file '" + path + "'");
  }
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace bcast::emit
