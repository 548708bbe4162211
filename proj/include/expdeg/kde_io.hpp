#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "expdeg/errors.hpp"
#include "expdeg/hpreal.hpp"
#include "expdeg/kde.hpp"
#include "json.hpp"

namespace expdeg {

struct CsvMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;  // row-major
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ';' || ch == '\t') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    auto a = f.find_first_not_of(' ');
    auto b = f.find_last_not_of(' ');
    f = a == std::string::npos ? std::string() : f.substr(a, b - a + 1);
  }
  return out;
}

inline bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end == s.c_str() + s.size();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace detail

/// Numeric CSV: one row per point, comma separated; a first row with any non-numeric
/// field is a header. Blank lines and lines starting with '#' are skipped.
inline CsvMatrix parse_csv_matrix(const std::string& text, const std::string& name = "csv") {
  CsvMatrix mat;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos || line[line.find_first_not_of(" \t")] == '#') continue;
    auto fields = detail::split_fields(line);
    std::vector<double> row;
    bool numeric = true;
    for (const auto& f : fields) {
      double v;
      if (!detail::parse_double(f, v)) {
        numeric = false;
        break;
      }
      row.push_back(v);
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw ParseError(name + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    first = false;
    if (mat.rows == 0) mat.cols = row.size();
    if (row.size() != mat.cols) throw ParseError(name + ":" + std::to_string(lineno) + ": wrong number of columns");
    for (double v : row) {
      if (!std::isfinite(v)) throw ParseError(name + ":" + std::to_string(lineno) + ": non-finite value");
    }
    mat.data.insert(mat.data.end(), row.begin(), row.end());
    ++mat.rows;
  }
  if (mat.rows == 0) throw ParseError(name + ": no data rows");
  return mat;
}

inline CsvMatrix read_csv_matrix(const std::string& path) { return parse_csv_matrix(detail::read_file(path), path); }

/// Instance from separate point files and a weight file (one weight per row).
inline KdeInstance load_instance_csv(const std::string& x_path, const std::string& y_path, const std::string& w_path,
                                     const HPReal& delta) {
  CsvMatrix X = read_csv_matrix(x_path), Y = read_csv_matrix(y_path), W = read_csv_matrix(w_path);
  if (X.cols != Y.cols) throw ParseError("point files have different dimensions");
  if (X.rows != Y.rows) throw ParseError("point files have different row counts");
  if (W.cols != 1 || W.rows != X.rows) throw ParseError("weight file must hold one value per point");
  KdeInstance inst;
  inst.n = X.rows;
  inst.m = X.cols;
  inst.X = std::move(X.data);
  inst.Y = std::move(Y.data);
  inst.w = std::move(W.data);
  inst.delta = delta;
  return inst;
}

namespace detail {

inline HPReal real_field(const nlohmann::json& j, long prec, const char* what) {
  if (j.is_string()) return HPReal::parse(j.get<std::string>(), prec);
  if (j.is_number()) return HPReal(j.get<double>(), prec);
  throw ParseError(std::string("instance: field '") + what + "' must be a number or decimal string");
}

inline std::vector<double> rows_of(const nlohmann::json& j, std::size_t n, std::size_t m, const char* what) {
  if (!j.is_array() || j.size() != n) throw ParseError(std::string("instance: '") + what + "' must have n rows");
  std::vector<double> out;
  out.reserve(n * m);
  for (const auto& row : j) {
    if (!row.is_array() || row.size() != m) throw ParseError(std::string("instance: rows of '") + what + "' must have m entries");
    for (const auto& v : row) {
      if (!v.is_number()) throw ParseError(std::string("instance: '") + what + "' entries must be numbers");
      out.push_back(v.get<double>());
    }
  }
  return out;
}

}  // namespace detail

/// {n, m, x: [[...]], y: [[...]], w: [...], delta, B?}; delta and B accept decimal strings.
inline KdeInstance parse_instance_json(const std::string& text, long prec = kDefaultPrecision) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("instance: ") + e.what());
  }
  if (!j.is_object()) throw ParseError("instance: document must be an object");
  for (const char* key : {"n", "m", "x", "y", "w", "delta"}) {
    if (!j.contains(key)) throw ParseError(std::string("instance: missing field '") + key + "'");
  }
  if (!j["n"].is_number_unsigned() || !j["m"].is_number_unsigned()) throw ParseError("instance: n and m must be positive integers");
  KdeInstance inst;
  inst.n = j["n"].get<std::size_t>();
  inst.m = j["m"].get<std::size_t>();
  inst.X = detail::rows_of(j["x"], inst.n, inst.m, "x");
  inst.Y = detail::rows_of(j["y"], inst.n, inst.m, "y");
  if (!j["w"].is_array() || j["w"].size() != inst.n) throw ParseError("instance: 'w' must have n entries");
  for (const auto& v : j["w"]) {
    if (!v.is_number()) throw ParseError("instance: 'w' entries must be numbers");
    inst.w.push_back(v.get<double>());
  }
  inst.delta = detail::real_field(j["delta"], prec, "delta");
  if (j.contains("B") && !j["B"].is_null()) inst.B = detail::real_field(j["B"], prec, "B");
  return inst;
}

inline std::string render_instance_json(const KdeInstance& inst) {
  nlohmann::ordered_json j;
  j["n"] = inst.n;
  j["m"] = inst.m;
  auto rows = [&](const std::vector<double>& a) {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < inst.n; ++i) {
      out.push_back(std::vector<double>(a.begin() + static_cast<long>(i * inst.m),
                                        a.begin() + static_cast<long>((i + 1) * inst.m)));
    }
    return out;
  };
  j["x"] = rows(inst.X);
  j["y"] = rows(inst.Y);
  j["w"] = inst.w;
  j["delta"] = inst.delta.to_decimal();
  if (inst.B) j["B"] = inst.B->to_decimal();
  return j.dump() + "\n";
}

/// Points uniform in an axis-aligned cube of side sqrt(B/m), so every squared distance is at
/// most B; weights uniform in [-1, 1].
inline KdeInstance random_instance(std::size_t n, std::size_t m, double B, const HPReal& delta, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double side = std::sqrt(B / static_cast<double>(m)) * (1.0 - 1e-12);
  KdeInstance inst;
  inst.n = n;
  inst.m = m;
  inst.delta = delta;
  inst.B = HPReal(B, kDefaultPrecision);
  inst.X.resize(n * m);
  inst.Y.resize(n * m);
  inst.w.resize(n);
  for (auto& v : inst.X) v = side * unit(gen);
  for (auto& v : inst.Y) v = side * unit(gen);
  for (auto& v : inst.w) v = 2.0 * unit(gen) - 1.0;
  return inst;
}

struct BenchRow {
  std::size_t n = 0;
  double matvec_ms = 0.0;
  double bruteforce_ms = 0.0;
  double error_ratio = 0.0;  // ||v - brute force||_inf / ||w||_1
};

struct BenchReport {
  std::uint64_t M = 0;
  std::uint64_t degree = 0;
  std::uint64_t distinct_monomials = 0;
  std::uint64_t nonzero_coefficients = 0;
  double build_ms = 0.0;
  std::vector<BenchRow> rows;
  double slope_matvec = 0.0;
  double slope_bruteforce = 0.0;
};

/// Least-squares slope of log y against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("loglog_slope: need at least two points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(std::max(y[i], 1e-9));
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(std::max(y[i], 1e-9)) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

/// Times the low-rank matvec (feature map built once) against brute force over sizes `ns`.
inline BenchReport run_bench(const std::vector<std::size_t>& ns, std::size_t m, double B, const HPReal& delta,
                             std::uint64_t seed, unsigned workers = 1, std::uint64_t ceiling = kDefaultTermCeiling) {
  if (ns.empty()) throw DomainError("bench: empty size list");
  BenchReport rep;
  KdeOptions opt;
  opt.workers = workers;
  opt.ceiling = ceiling;
  KdeInstance probe = random_instance(2, m, B, delta, seed);
  auto t0 = std::chrono::steady_clock::now();
  const long p = kDefaultPrecision;
  ProblemSpec spec{HPReal(B, p), ldexp(HPReal(delta, p), -1), Target::EXP_NEG};
  ExportedPolynomial poly = export_polynomial(spec, find_degree(spec, p));
  FeatureMap fm = expand_kernel_poly(poly, m, ceiling);
  rep.build_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  rep.M = fm.M;
  rep.degree = fm.d;
  rep.distinct_monomials = fm.half.size();
  rep.nonzero_coefficients = fm.nonzero();
  std::vector<double> xs, tm, tb;
  for (std::size_t n : ns) {
    KdeInstance inst = random_instance(n, m, B, delta, seed + n);
    KdeResult r = kde_matvec(inst, fm, opt);
    auto t1 = std::chrono::steady_clock::now();
    std::vector<double> bf = kde_bruteforce(inst);
    double bf_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t1).count();
    double w1 = 0, worst = 0;
    for (double w : inst.w) w1 += std::fabs(w);
    for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::fabs(bf[i] - r.v[i]));
    rep.rows.push_back({n, r.elapsed_matvec_ms, bf_ms, w1 > 0 ? worst / w1 : 0.0});
    xs.push_back(static_cast<double>(n));
    tm.push_back(r.elapsed_matvec_ms);
    tb.push_back(bf_ms);
  }
  if (ns.size() >= 2) {
    rep.slope_matvec = loglog_slope(xs, tm);
    rep.slope_bruteforce = loglog_slope(xs, tb);
  }
  return rep;
}

}  // namespace expdeg
