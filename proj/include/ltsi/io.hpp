#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "ltsi/analysis.hpp"
#include "ltsi/errors.hpp"
#include "ltsi/grid.hpp"
#include "ltsi/realization.hpp"
#include "ltsi/sim.hpp"
#include "ltsi/symbol.hpp"

namespace ltsi {

using ordered_json = nlohmann::ordered_json;

// %.17g guarantees round-trip of any double; used for CSV cells. JSON numbers
// go through nlohmann's shortest-round-trip writer, which is deterministic.
inline std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline ordered_json complex_to_json(const Complex& c) {
  return ordered_json::array({c.real(), c.imag()});
}

inline Complex complex_from_json(const ordered_json& j) {
  if (!j.is_array() || j.size() != 2)
    throw ConfigError("complex values serialize as [re, im]");
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

inline ordered_json matrix_to_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (int i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (int j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Matrix matrix_from_json(const ordered_json& j) {
  if (!j.is_array() || j.empty() || !j.at(0).is_array() || j.at(0).empty())
    throw ConfigError("matrix values serialize as nested arrays of [re, im]");
  Matrix m(j.size(), j.at(0).size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (j.at(i).size() != static_cast<std::size_t>(m.cols()))
      throw ConfigError("ragged matrix rows in JSON");
    for (std::size_t k = 0; k < j.at(i).size(); ++k)
      m(i, k) = complex_from_json(j.at(i).at(k));
  }
  return m;
}

inline ordered_json grid_to_json(const FrequencyGrid& g) {
  return ordered_json{{"omega_min", g.omega_min()},
                      {"step", g.step()},
                      {"count", g.count()},
                      {"excluded", g.excluded()}};
}

inline FrequencyGrid grid_from_json(const ordered_json& j) {
  return FrequencyGrid(j.at("omega_min").get<double>(), j.at("step").get<double>(),
                       j.at("count").get<int>(),
                       j.value("excluded", std::vector<int>{}));
}

inline ordered_json symbol_to_json(const MatrixSymbol& s) {
  ordered_json j{{"rows", s.rows()}, {"cols", s.cols()}};
  if (s.is_closed_form()) {
    ordered_json entries = ordered_json::array();
    for (const auto& row : s.closed_form_entries()) {
      ordered_json jrow = ordered_json::array();
      for (const auto& p : row) {
        ordered_json coeffs = ordered_json::array();
        for (const auto& c : p.coeffs()) coeffs.push_back(complex_to_json(c));
        jrow.push_back(ordered_json{{"coeffs", std::move(coeffs)}});
      }
      entries.push_back(std::move(jrow));
    }
    j["entries"] = std::move(entries);
    return j;
  }
  if (s.is_sampled()) {
    j["grid"] = grid_to_json(s.sampled_grid());
    ordered_json values = ordered_json::array();
    for (const auto& v : s.sampled_values()) values.push_back(matrix_to_json(v));
    j["values"] = std::move(values);
    return j;
  }
  throw ConfigError("composite symbols must be materialized before serialization");
}

inline MatrixSymbol symbol_from_json(const ordered_json& j) {
  int rows = j.at("rows").get<int>(), cols = j.at("cols").get<int>();
  if (j.contains("entries")) {
    const auto& entries = j.at("entries");
    if (static_cast<int>(entries.size()) != rows)
      throw ConfigError("symbol row count disagrees with entries");
    std::vector<std::vector<Polynomial>> out(rows);
    for (int i = 0; i < rows; ++i) {
      const auto& row = entries.at(i);
      if (static_cast<int>(row.size()) != cols)
        throw ConfigError("symbol column count disagrees with entries");
      out[i].reserve(cols);
      for (int k = 0; k < cols; ++k) {
        std::vector<Complex> coeffs;
        for (const auto& c : row.at(k).at("coeffs"))
          coeffs.push_back(complex_from_json(c));
        out[i].emplace_back(std::move(coeffs));
      }
    }
    return MatrixSymbol::closed_form(std::move(out));
  }
  if (j.contains("values")) {
    FrequencyGrid grid = grid_from_json(j.at("grid"));
    std::vector<Matrix> values;
    values.reserve(j.at("values").size());
    for (const auto& v : j.at("values")) values.push_back(matrix_from_json(v));
    auto sym = MatrixSymbol::sampled(std::move(grid), std::move(values));
    if (sym.rows() != rows || sym.cols() != cols)
      throw ConfigError("symbol shape disagrees with sampled values");
    return sym;
  }
  throw ConfigError("symbol JSON needs either 'entries' or 'values'");
}

// Custom model files: {"name": ..., "A": symbol, "B": symbol, "C": symbol,
// "grid": grid}.
inline LtsiRealization realization_from_json(const ordered_json& j) {
  return LtsiRealization(symbol_from_json(j.at("A")), symbol_from_json(j.at("B")),
                         symbol_from_json(j.at("C")), grid_from_json(j.at("grid")));
}

inline std::string trace_csv(const SimulationTrace& tr) {
  std::string out = "t,E,supply,balance\n";
  double e0 = tr.energy.empty() ? 0.0 : tr.energy.front();
  for (std::size_t i = 0; i < tr.times.size(); ++i) {
    out += fmt_g17(tr.times[i]);
    out += ',';
    out += fmt_g17(tr.energy[i]);
    out += ',';
    out += fmt_g17(tr.supply[i]);
    out += ',';
    out += fmt_g17(tr.energy[i] - e0 - tr.supply[i]);
    out += '\n';
  }
  return out;
}

inline std::string field_csv(const SpatialGrid& g, const Eigen::MatrixXcd& field) {
  std::string out = "x";
  for (int r = 0; r < field.rows(); ++r) {
    out += ",c" + std::to_string(r) + "_re,c" + std::to_string(r) + "_im";
  }
  out += '\n';
  for (int k = 0; k < g.points; ++k) {
    out += fmt_g17(g.x(k));
    for (int r = 0; r < field.rows(); ++r) {
      out += ',';
      out += fmt_g17(field(r, k).real());
      out += ',';
      out += fmt_g17(field(r, k).imag());
    }
    out += '\n';
  }
  return out;
}

inline void write_text_file(const std::filesystem::path& path,
                            const std::string& content) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path.string() + "' for writing");
  f << content;
  if (!f) throw ConfigError("failed writing '" + path.string() + "'");
}

inline std::string read_text_file(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path))
    throw ConfigError("'" + path.string() + "' is not a regular file");
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open '" + path.string() + "'");
  return std::string(std::istreambuf_iterator<char>(f),
                     std::istreambuf_iterator<char>());
}

}  // namespace ltsi
