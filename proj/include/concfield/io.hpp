#pragma once

// Serialization shared by the CLI and the tests: 17-significant-digit number
// formatting (CSV and JSON carry the same values), atomic file writes via
// tmp + rename (interrupted runs never leave partial files), model/matrix
// JSON, and x-grid parsing.

#include "concfield/linalg.hpp"
#include "concfield/model.hpp"

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace concfield {

using Json = nlohmann::json;

[[nodiscard]] inline std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void atomic_write_file(const std::string& path,
                              const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw std::runtime_error("cannot open for writing: " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

[[nodiscard]] inline Json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  return Json::parse(in);
}

[[nodiscard]] inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (long i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (long j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

[[nodiscard]] inline Matrix matrix_from_json(const Json& j) {
  const auto fail = [] {
    throw std::invalid_argument(
        "matrix JSON must be a non-empty array of equal-length arrays of "
        "numbers");
  };
  if (!j.is_array() || j.empty()) fail();
  const size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) fail();
  const size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (size_t i = 0; i < rows; ++i) {
    if (!j[i].is_array() || j[i].size() != cols) fail();
    for (size_t k = 0; k < cols; ++k) {
      if (!j[i][k].is_number()) fail();
      m(static_cast<long>(i), static_cast<long>(k)) = j[i][k].get<double>();
    }
  }
  return m;
}

[[nodiscard]] inline SpdMatrix spd_from_json_file(const std::string& path) {
  return SpdMatrix(matrix_from_json(load_json_file(path)));
}

[[nodiscard]] inline Json model_to_json(const FieldModel& m) {
  Json j;
  j["dim"] = m.dim;
  j["d0sq"] = matrix_to_json(m.d0sq.mat());
  j["v0sq"] = matrix_to_json(m.v0sq.mat());
  j["dstar"] = matrix_to_json(m.dstar.mat());
  j["nu0"] = m.nu0;
  j["g"] = m.g;
  j["eps"] = m.eps;
  j["omega0"] = m.omega0;
  j["delta0"] = m.delta0;
  j["aa"] = m.aa;
  j["r0"] = m.r0;
  return j;
}

[[nodiscard]] inline FieldModel model_from_json(const Json& j) {
  const auto need = [&](const char* key) -> const Json& {
    auto it = j.find(key);
    if (it == j.end())
      throw std::invalid_argument(std::string("model JSON missing key: ") +
                                  key);
    return *it;
  };
  FieldModel m;
  m.dim = need("dim").get<int>();
  m.d0sq = SpdMatrix(matrix_from_json(need("d0sq")));
  m.v0sq = SpdMatrix(matrix_from_json(need("v0sq")));
  m.dstar = SpdMatrix(matrix_from_json(need("dstar")));
  m.nu0 = need("nu0").get<double>();
  m.g = need("g").get<double>();
  m.eps = need("eps").get<double>();
  m.omega0 = need("omega0").get<double>();
  m.delta0 = need("delta0").get<double>();
  m.aa = need("aa").get<double>();
  m.r0 = need("r0").get<double>();
  return m;
}

namespace detail {

[[nodiscard]] inline double parse_double_strict(const std::string& s) {
  size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
  if (pos != s.size())
    throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

}  // namespace detail

// Accepts either a comma list "a,b,c" or an inclusive range "a..b:step".
[[nodiscard]] inline std::vector<double> parse_x_list(const std::string& text) {
  const auto fail = [&]() -> std::vector<double> {
    throw std::invalid_argument(
        "x list: expected 'a,b,c' or 'a..b:step', got '" + text + "'");
  };
  try {
    const size_t dots = text.find("..");
    if (dots != std::string::npos) {
      const size_t colon = text.find(':', dots + 2);
      if (colon == std::string::npos) return fail();
      const double a = detail::parse_double_strict(text.substr(0, dots));
      const double b =
          detail::parse_double_strict(text.substr(dots + 2, colon - dots - 2));
      const double step = detail::parse_double_strict(text.substr(colon + 1));
      if (!(step > 0.0) || b < a) return fail();
      std::vector<double> out;
      for (long long i = 0;; ++i) {
        const double v = a + static_cast<double>(i) * step;
        if (v > b + 1e-9 * step) break;
        out.push_back(v);
        if (i > 1000000) return fail();
      }
      return out;
    }
    std::vector<double> out;
    size_t start = 0;
    while (start <= text.size()) {
      const size_t comma = text.find(',', start);
      const size_t end = comma == std::string::npos ? text.size() : comma;
      out.push_back(detail::parse_double_strict(text.substr(start, end - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (out.empty()) return fail();
    return out;
  } catch (const std::invalid_argument&) {
    return fail();
  }
}

}  // namespace concfield
