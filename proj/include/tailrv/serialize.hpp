#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "tailrv/empirics.hpp"
#include "tailrv/errors.hpp"
#include "tailrv/estimate.hpp"
#include "tailrv/grid.hpp"
#include "tailrv/identities.hpp"
#include "tailrv/path.hpp"
#include "tailrv/representer.hpp"

namespace tailrv {

/// Shortest round-trip decimal; locale-independent.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

using Meta = std::map<std::string, std::string>;

inline void write_meta_comment(std::ostream& os, const Meta& meta) {
  if (meta.empty()) return;
  os << "#";
  for (const auto& [k, v] : meta) os << " " << k << "=" << v;
  os << "\n";
}

// ---- grid / path ----

inline nlohmann::json grid_to_json(const GridSpec& g) {
  return nlohmann::json{{"dim_t", g.dim_t},
                        {"dim_x", g.dim_x},
                        {"window", {g.lo, g.hi}},
                        {"resolution", g.res}};
}

inline GridSpec grid_from_json(const nlohmann::json& j) {
  GridSpec g;
  try {
    g.dim_t = j.at("dim_t").get<int>();
    g.dim_x = j.at("dim_x").get<int>();
    g.lo = j.at("window").at(0).get<std::vector<double>>();
    g.hi = j.at("window").at(1).get<std::vector<double>>();
    g.res = j.at("resolution").get<std::vector<std::size_t>>();
  } catch (const nlohmann::json::exception& e) {
    throw error(errc::config, std::string("grid: ") + e.what());
  }
  g.validate();
  return g;
}

inline nlohmann::json path_to_json(const CadlagPath& p) {
  return nlohmann::json{{"grid", grid_to_json(p.grid())}, {"values", p.values()}};
}

inline CadlagPath path_from_json(const nlohmann::json& j) {
  GridSpec g = grid_from_json(j.at("grid"));
  auto vals = j.at("values").get<std::vector<double>>();
  return CadlagPath(std::move(g), std::move(vals));
}

/// CSV with header t_1,...,t_l,x_1,...,x_d; one row per cell in lexicographic
/// grid order.
inline void write_path_csv(std::ostream& os, const CadlagPath& p, const Meta& meta = {}) {
  write_meta_comment(os, meta);
  const GridSpec& g = p.grid();
  for (int i = 0; i < g.dim_t; ++i) os << (i ? "," : "") << "t_" << (i + 1);
  for (int j = 0; j < g.dim_x; ++j) os << ",x_" << (j + 1);
  os << "\n";
  for (std::size_t c = 0; c < g.cells(); ++c) {
    auto t = g.point(c);
    for (int i = 0; i < g.dim_t; ++i) os << (i ? "," : "") << fmt_double(t[i]);
    for (int j = 0; j < g.dim_x; ++j) os << "," << fmt_double(p.at(c)[j]);
    os << "\n";
  }
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s) {
  try {
    return std::stod(s);
  } catch (...) {
    throw error(errc::config, "bad number in CSV: '" + s + "'");
  }
}

}  // namespace detail

/// Reconstructs a path from its CSV form (uniform grid inferred from the time
/// columns; axes need at least two distinct values -- otherwise use JSON).
inline CadlagPath read_path_csv(std::istream& is) {
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    header = detail::split_csv_line(line);
    break;
  }
  if (header.empty()) throw error(errc::config, "empty CSV");
  int l = 0, d = 0;
  for (const auto& h : header) {
    if (h.rfind("t_", 0) == 0) ++l;
    else if (h.rfind("x_", 0) == 0) ++d;
    else throw error(errc::config, "unexpected CSV column: " + h);
  }
  if (l < 1 || d < 1) throw error(errc::config, "CSV needs t_* and x_* columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto f = detail::split_csv_line(line);
    if (static_cast<int>(f.size()) != l + d) throw error(errc::config, "CSV row width mismatch");
    std::vector<double> row(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) row[i] = detail::parse_double(f[i]);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw error(errc::config, "CSV has no rows");

  GridSpec g;
  g.dim_t = l;
  g.dim_x = d;
  g.lo.resize(l);
  g.hi.resize(l);
  g.res.resize(l);
  for (int i = 0; i < l; ++i) {
    std::vector<double> vals;
    for (const auto& r : rows) vals.push_back(r[static_cast<std::size_t>(i)]);
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    if (vals.size() < 2)
      throw error(errc::config, "cannot infer grid step from CSV (single value on an axis); "
                                "use the JSON envelope");
    double w = vals[1] - vals[0];
    g.lo[i] = vals.front();
    g.hi[i] = vals.back() + w;
    g.res[i] = vals.size();
  }
  g.validate();
  CadlagPath p = CadlagPath::zero(g);
  for (const auto& r : rows) {
    std::vector<double> t(r.begin(), r.begin() + l);
    std::size_t c = g.locate(t);
    for (int j = 0; j < d; ++j) p.at(c)[j] = r[static_cast<std::size_t>(l + j)];
  }
  return p;
}

inline CadlagPath read_path_file(const std::string& filename) {
  std::ifstream is(filename);
  if (!is) throw error(errc::config, "cannot open " + filename);
  if (filename.size() > 5 && filename.substr(filename.size() - 5) == ".json") {
    nlohmann::json j;
    is >> j;
    return path_from_json(j);
  }
  return read_path_csv(is);
}

/// Batch CSV: leading sample_id column, then the per-cell rows per sample.
inline void write_batch_csv(std::ostream& os, const std::vector<CadlagPath>& batch,
                            const Meta& meta = {}) {
  write_meta_comment(os, meta);
  if (batch.empty()) return;
  const GridSpec& g = batch.front().grid();
  os << "sample_id";
  for (int i = 0; i < g.dim_t; ++i) os << ",t_" << (i + 1);
  for (int j = 0; j < g.dim_x; ++j) os << ",x_" << (j + 1);
  os << "\n";
  for (std::size_t s = 0; s < batch.size(); ++s) {
    for (std::size_t c = 0; c < g.cells(); ++c) {
      os << s;
      auto t = g.point(c);
      for (int i = 0; i < g.dim_t; ++i) os << "," << fmt_double(t[i]);
      for (int j = 0; j < g.dim_x; ++j) os << "," << fmt_double(batch[s].at(c)[j]);
      os << "\n";
    }
  }
}

/// Weighted sample set: weight column, then flattened cell values.
inline void write_weighted_set_csv(std::ostream& os, const WeightedSampleSet& set,
                                   const Meta& meta = {}) {
  write_meta_comment(os, meta);
  if (set.paths.empty()) return;
  const GridSpec& g = set.paths.front().grid();
  os << "weight";
  for (std::size_t c = 0; c < g.cells(); ++c)
    for (int j = 0; j < g.dim_x; ++j) os << ",c" << c << "_x" << (j + 1);
  os << "\n";
  for (std::size_t i = 0; i < set.paths.size(); ++i) {
    os << fmt_double(set.weights[i]);
    for (std::size_t c = 0; c < g.cells(); ++c)
      for (int j = 0; j < g.dim_x; ++j) os << "," << fmt_double(set.paths[i].at(c)[j]);
    os << "\n";
  }
}

// ---- estimates / reports / tables ----

inline nlohmann::json estimate_to_json(const MCEstimate& e) {
  return nlohmann::json{
      {"value", e.value}, {"stderr", e.stderr_}, {"n", e.n}, {"seed", e.seed}, {"clipped", e.clipped}};
}

inline nlohmann::json report_to_json(const IdentityReport& r) {
  return nlohmann::json{{"identity", r.identity},
                        {"functional", r.functional},
                        {"site_h", r.site_h},
                        {"site_t", r.site_t},
                        {"x", r.x},
                        {"lhs", r.lhs},
                        {"lhs_stderr", r.lhs_se},
                        {"rhs", r.rhs},
                        {"rhs_stderr", r.rhs_se},
                        {"discrepancy_sigma", r.discrepancy_sigma},
                        {"pass", r.pass}};
}

inline nlohmann::json reports_to_json(const std::vector<IdentityReport>& rs) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rs) arr.push_back(report_to_json(r));
  return arr;
}

inline void print_reports_table(std::ostream& os, const std::vector<IdentityReport>& rs) {
  os << "identity     functional    h      t      x      lhs            rhs            sigma    pass\n";
  for (const auto& r : rs) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-12s %-13s %-6zu %-6zu %-6g %-14.7g %-14.7g %-8.3g %s\n",
                  r.identity.c_str(), r.functional.c_str(), r.site_h, r.site_t, r.x, r.lhs, r.rhs,
                  r.discrepancy_sigma, r.pass ? "ok" : "FAIL");
    os << buf;
  }
}

inline void write_table_csv(std::ostream& os, const DiagnosticTable& tab, const Meta& meta = {}) {
  write_meta_comment(os, meta);
  os << "eta,z,value,stderr\n";
  for (std::size_t i = 0; i < tab.etas.size(); ++i)
    for (std::size_t j = 0; j < tab.zs.size(); ++j)
      os << fmt_double(tab.etas[i]) << "," << fmt_double(tab.zs[j]) << ","
         << fmt_double(tab.value[i * tab.zs.size() + j]) << ","
         << fmt_double(tab.se[i * tab.zs.size() + j]) << "\n";
}

}  // namespace tailrv
