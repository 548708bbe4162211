#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "expdeg/approx.hpp"
#include "expdeg/coeffs.hpp"
#include "expdeg/errors.hpp"
#include "expdeg/hpreal.hpp"
#include "expdeg/kde.hpp"
#include "expdeg/kde_io.hpp"
#include "expdeg/poly_document.hpp"
#include "json.hpp"

namespace expdeg {

enum ExitCode : int { kExitOk = 0, kExitUsage = 2, kExitSoundness = 3, kExitCapacity = 4 };

struct CliConfig {
  std::string subcommand;
  long precision_bits = kDefaultPrecision;
  std::string output_format;  // empty: the subcommand's default
  std::uint64_t seed = 0;
  bool timings = true;
};

namespace cli {

using ojson = nlohmann::ordered_json;
using Record = std::vector<std::pair<std::string, ojson>>;

inline std::string dec(const HPReal& x, std::size_t digits = 20) { return x.to_decimal(digits); }

inline std::string cell(const ojson& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  return v.dump();
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline void emit_table(std::ostream& out, const std::vector<std::string>& header, const std::vector<std::vector<ojson>>& rows,
                       const std::string& fmt) {
  if (fmt == "json") {
    ojson arr = ojson::array();
    for (const auto& r : rows) {
      ojson o;
      for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
      arr.push_back(std::move(o));
    }
    out << arr.dump(2) << "\n";
    return;
  }
  const char* sep = fmt == "csv" ? "," : " ";
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? sep : "") << header[i];
  out << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? sep : "") << (fmt == "csv" ? csv_escape(cell(r[i])) : cell(r[i]));
    out << "\n";
  }
}

inline void emit_record(std::ostream& out, const Record& rec, const std::string& fmt) {
  if (fmt == "json") {
    ojson o;
    for (const auto& [k, v] : rec) o[k] = v;
    out << o.dump(2) << "\n";
  } else if (fmt == "csv") {
    std::vector<std::string> header;
    std::vector<ojson> row;
    for (const auto& [k, v] : rec) {
      header.push_back(k);
      row.push_back(v);
    }
    emit_table(out, header, {row}, "csv");
  } else {
    for (const auto& [k, v] : rec) out << k << ": " << cell(v) << "\n";
  }
}

inline HPReal parse_real(const std::string& s, long prec, const char* what) {
  try {
    return HPReal::parse(s, prec);
  } catch (const ParseError&) {
    throw ParseError(std::string("invalid value for ") + what + ": '" + s + "'");
  }
}

inline std::string read_text(const std::string& path) { return detail::read_file(path); }

inline Record degree_record(const DegreeCertificate& c, const RegimePrediction& r) {
  ojson lead = r.order_of_magnitude_only ? ojson() : ojson(dec(r.leading_constant));
  return {{"target", to_string(c.spec.target)},
          {"B", c.spec.B.to_decimal()},
          {"delta", c.spec.delta.to_decimal()},
          {"D_upper", c.D_upper},
          {"D_lower", c.D_lower},
          {"lower_witness", to_string(c.lower_witness)},
          {"lower_value", dec(c.lower_value)},
          {"tail_upper", dec(c.tail_upper_at_D)},
          {"radius_sum", dec(c.radius_sum)},
          {"precision_bits", c.precision_bits},
          {"regime", to_string(r.regime)},
          {"rho", dec(r.rho)},
          {"predicted_degree", dec(r.predicted_degree)},
          {"constant_name", to_string(r.constant_name)},
          {"leading_constant", lead},
          {"constant_lo", dec(r.constant_lo)},
          {"constant_hi", dec(r.constant_hi)},
          {"order_of_magnitude_only", r.order_of_magnitude_only}};
}

// "lo:hi:count", geometric spacing.
inline std::vector<HPReal> parse_range(const std::string& s, long prec) {
  auto a = s.find(':');
  auto b = a == std::string::npos ? std::string::npos : s.find(':', a + 1);
  if (b == std::string::npos) throw ParseError("range must be lo:hi:count, got '" + s + "'");
  HPReal lo = parse_real(s.substr(0, a), prec, "range"), hi = parse_real(s.substr(a + 1, b - a - 1), prec, "range");
  std::string cs = s.substr(b + 1);
  char* end = nullptr;
  long count = std::strtol(cs.c_str(), &end, 10);
  if (cs.empty() || *end != '\0' || count < 1 || count > 100000) throw ParseError("range count must be a positive integer");
  if (!(lo > 0) || !(hi >= lo) || !hi.is_finite()) throw ParseError("range needs 0 < lo <= hi");
  std::vector<HPReal> out;
  for (long i = 0; i < count; ++i) {
    if (count == 1) {
      out.push_back(lo);
      break;
    }
    HPReal t = HPReal(i, prec) / HPReal(count - 1, prec);
    out.push_back(i == count - 1 ? hi : lo * exp(t * log(hi / lo)));
  }
  return out;
}

}  // namespace cli

/// Parses argv, runs one subcommand and returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  using cli::ojson;
  CliConfig cfg;
  CLI::App app{"Certified polynomial approximation of exp on [0, B] and polynomial-method Gaussian KDE", "expdeg"};
  app.require_subcommand(1);
  app.fallthrough();
  long precision = 0;
  app.add_option("--precision", precision, "Working precision in bits (default 128 or EXPDEG_PRECISION)")
      ->check(CLI::Range(kMinPrecision, kPrecisionCeiling));
  app.add_option("--format", cfg.output_format, "Output format")->check(CLI::IsMember({"json", "csv", "text"}));
  app.add_option("--seed", cfg.seed, "Seed for randomized inputs");
  bool no_timings = false;
  app.add_flag("--no-timings", no_timings, "Omit wall-clock timings so output is byte-reproducible");

  // degree / build
  std::string B_s, delta_s, target_s = "exp-neg", output_path;
  auto* c_degree = app.add_subcommand("degree", "Certified minimum-degree bracket and regime prediction");
  c_degree->add_option("--B", B_s, "Interval length B >= 1")->required();
  c_degree->add_option("--delta", delta_s, "Tolerance in (0, 1)")->required();
  c_degree->add_option("--target", target_s, "exp-neg or exp-pos")->check(CLI::IsMember({"exp-neg", "exp-pos"}));

  auto* c_build = app.add_subcommand("build", "Write the certified polynomial document");
  c_build->add_option("--B", B_s, "Interval length B >= 1")->required();
  c_build->add_option("--delta", delta_s, "Tolerance in (0, 1)")->required();
  c_build->add_option("--target", target_s, "exp-neg or exp-pos")->check(CLI::IsMember({"exp-neg", "exp-pos"}));
  c_build->add_option("--output,-o", output_path, "Output file (default stdout)");

  // coeffs
  std::string lambda_s;
  std::uint64_t count = 0;
  auto* c_coeffs = app.add_subcommand("coeffs", "Chebyshev coefficients with error radii");
  c_coeffs->add_option("--lambda", lambda_s, "lambda = B/2")->required();
  c_coeffs->add_option("--target", target_s, "exp-neg or exp-pos")->check(CLI::IsMember({"exp-neg", "exp-pos"}));
  c_coeffs->add_option("--count", count, "Number of coefficients")->required()->check(CLI::Range(1, 1 << 20));

  // eval
  std::string poly_path, points_path;
  auto* c_eval = app.add_subcommand("eval", "Evaluate a polynomial document at points");
  c_eval->add_option("--poly", poly_path, "Polynomial document")->required();
  c_eval->add_option("--points", points_path, "File with one z per line")->required();

  // kde
  std::string inst_path, x_path, y_path, w_path, kde_B_s, kde_delta_s, scalar_s = "auto";
  unsigned workers = 1;
  bool validate = false, check_diameter = false;
  std::uint64_t ceiling = kDefaultTermCeiling;
  auto* c_kde = app.add_subcommand("kde", "Batch Gaussian KDE by the polynomial method");
  auto* o_inst = c_kde->add_option("--instance", inst_path, "Instance JSON document");
  auto* o_x = c_kde->add_option("--x", x_path, "Query points CSV");
  auto* o_y = c_kde->add_option("--y", y_path, "Data points CSV");
  auto* o_w = c_kde->add_option("--w", w_path, "Weights CSV");
  o_inst->excludes(o_x)->excludes(o_y)->excludes(o_w);
  c_kde->add_option("--delta", kde_delta_s, "Tolerance in (0, 1); overrides the instance");
  c_kde->add_option("--B", kde_B_s, "Squared-diameter bound; estimated from the points when absent");
  c_kde->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  c_kde->add_option("--scalar", scalar_s, "Matvec scalar")
      ->check(CLI::IsMember({"auto", "double", "double-double", "high-precision"}));
  c_kde->add_option("--ceiling", ceiling, "Maximum stored feature terms");
  c_kde->add_flag("--validate", validate, "Compare against brute force");
  c_kde->add_flag("--check-diameter", check_diameter, "Exact O(n^2 m) squared-diameter check");

  // regimes
  std::vector<std::string> B_list, delta_list, kappa_list;
  std::string B_range;
  bool no_certify = false;
  std::uint64_t cost_n = 1ull << 32;
  double alpha = 1.0, beta = 1.0;
  auto* c_regimes = app.add_subcommand("regimes", "Sweep (B, delta) or kappa grids");
  c_regimes->add_option("--B", B_list, "B values")->delimiter(',');
  c_regimes->add_option("--B-range", B_range, "Geometric range lo:hi:count");
  c_regimes->add_option("--delta", delta_list, "delta values (default 1e-6)")->delimiter(',');
  c_regimes->add_option("--target", target_s, "exp-neg or exp-pos")->check(CLI::IsMember({"exp-neg", "exp-pos"}));
  c_regimes->add_flag("--no-certify", no_certify, "Skip the certified degree search");
  c_regimes->add_option("--kappa", kappa_list, "kappa values for the KDE exponent model")->delimiter(',');
  c_regimes->add_option("--n", cost_n, "n for the exponent model")->check(CLI::Range(std::uint64_t{2}, ~std::uint64_t{0}));
  c_regimes->add_option("--alpha", alpha, "m = alpha ln n");
  c_regimes->add_option("--beta", beta, "delta = n^-beta");

  // bench
  std::vector<std::size_t> bench_ns{1024, 2048, 4096, 8192, 16384};
  std::size_t bench_m = 8;
  std::string bench_B = "9", bench_delta = "1e-3";
  auto* c_bench = app.add_subcommand("bench", "Time the low-rank matvec against brute force");
  c_bench->add_option("--n", bench_ns, "Sizes")->delimiter(',')->check(CLI::Range(std::size_t{2}, std::size_t{1} << 24));
  c_bench->add_option("--m", bench_m, "Dimension")->check(CLI::Range(1, 64));
  c_bench->add_option("--B", bench_B, "Squared-diameter bound");
  c_bench->add_option("--delta", bench_delta, "Tolerance");
  c_bench->add_option("--workers", workers, "Worker threads")->check(CLI::Range(1, 256));
  c_bench->add_option("--ceiling", ceiling, "Maximum stored feature terms");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    cfg.precision_bits = precision ? precision : precision_from_env(kDefaultPrecision);
    cfg.timings = !no_timings;
    const long prec = cfg.precision_bits;
    auto fmt_or = [&](const char* d) { return cfg.output_format.empty() ? std::string(d) : cfg.output_format; };
    Target target = parse_target(target_s);

    if (c_degree->parsed()) {
      cfg.subcommand = "degree";
      ProblemSpec spec{cli::parse_real(B_s, prec, "--B"), cli::parse_real(delta_s, prec, "--delta"), target};
      spec.validate();
      DegreeCertificate cert = find_degree(spec, prec);
      RegimePrediction pred = predict_degree(spec, prec);
      cli::emit_record(out, cli::degree_record(cert, pred), fmt_or("json"));
      return kExitOk;
    }

    if (c_build->parsed()) {
      cfg.subcommand = "build";
      ProblemSpec spec{cli::parse_real(B_s, prec, "--B"), cli::parse_real(delta_s, prec, "--delta"), target};
      spec.validate();
      ExportedPolynomial poly = export_polynomial(spec, find_degree(spec, prec));
      std::string doc = render_polynomial(poly);
      if (!(parse_polynomial(doc) == poly)) throw SoundnessError("polynomial document does not round-trip");
      if (output_path.empty()) {
        out << doc;
      } else {
        std::ofstream f(output_path, std::ios::binary);
        if (!f) throw ParseError("cannot write '" + output_path + "'");
        f << doc;
      }
      return kExitOk;
    }

    if (c_coeffs->parsed()) {
      cfg.subcommand = "coeffs";
      HPReal lambda = cli::parse_real(lambda_s, prec, "--lambda");
      if (!lambda.is_finite() || !(lambda > 0)) throw DomainError("lambda must be positive");
      std::vector<std::vector<ojson>> rows;
      for (std::uint64_t v = 0; v < count; ++v) {
        CoeffValue c = target == Target::EXP_NEG ? compute_A(v, lambda, prec) : compute_B(v, lambda, prec);
        rows.push_back({v, c.value.to_decimal(), c.error_radius.to_decimal(6)});
      }
      cli::emit_table(out, {"v", "value", "error_radius"}, rows, fmt_or("csv"));
      return kExitOk;
    }

    if (c_eval->parsed()) {
      cfg.subcommand = "eval";
      ExportedPolynomial poly = parse_polynomial(cli::read_text(poly_path));
      const ProblemSpec& spec = poly.certificate.spec;
      if (!(poly.error_bound < spec.delta)) throw SoundnessError("document error bound is not below delta");
      long pe = std::max(poly.eval_precision(), prec) + 32;
      std::vector<std::vector<ojson>> rows;
      std::istringstream in(cli::read_text(points_path));
      std::string line;
      bool first = true;
      HPReal tol = poly.error_bound * (1 + HPReal::pow2(-30, pe));
      while (std::getline(in, line)) {
        auto fields = detail::split_fields(line);
        if (fields.empty() || fields[0].empty() || fields[0][0] == '#') continue;
        HPReal z(0, pe);
        try {
          z = HPReal::parse(fields[0], pe);
        } catch (const ParseError&) {
          if (first) {
            first = false;
            continue;
          }
          throw;
        }
        first = false;
        bool inside = z >= 0 && z <= poly.domain_B;
        if (!inside) err << "warning: z = " << fields[0] << " lies outside [0, " << poly.domain_B.to_decimal() << "]\n";
        HPReal p = poly.eval_cheb(z);
        HPReal f = target_value(poly.target(), z);
        HPReal e = p - f;
        if (inside && abs(e) > tol) throw SoundnessError("measured error exceeds the certified bound at z = " + fields[0]);
        if (!poly.monomial_form.empty()) {
          HPReal q = poly.eval_monomial(HPReal(z, pe + 64 + 3 * static_cast<long>(poly.degree)));
          HPReal scale = max(max(abs(p), abs(HPReal(q, pe))), HPReal(spec.delta, pe));
          if (inside && abs(HPReal(q, pe) - p) > poly.error_bound + HPReal::pow2(-40, pe) * scale) {
            throw SoundnessError("monomial and Chebyshev forms disagree at z = " + fields[0]);
          }
        }
        rows.push_back({fields[0], cli::dec(p), cli::dec(f), cli::dec(e, 6)});
      }
      cli::emit_table(out, {"z", "p", "f", "error"}, rows, fmt_or("csv"));
      return kExitOk;
    }

    if (c_kde->parsed()) {
      cfg.subcommand = "kde";
      KdeInstance inst;
      if (!inst_path.empty()) {
        inst = parse_instance_json(cli::read_text(inst_path), prec);
        if (!kde_delta_s.empty()) inst.delta = cli::parse_real(kde_delta_s, prec, "--delta");
      } else {
        if (x_path.empty() || y_path.empty() || w_path.empty()) throw ParseError("kde needs --instance or all of --x --y --w");
        if (kde_delta_s.empty()) throw ParseError("kde with point files needs --delta");
        inst = load_instance_csv(x_path, y_path, w_path, cli::parse_real(kde_delta_s, prec, "--delta"));
      }
      KdeOptions opt;
      if (!kde_B_s.empty()) opt.B = cli::parse_real(kde_B_s, prec, "--B");
      opt.workers = workers;
      opt.scalar = parse_scalar(scalar_s);
      opt.ceiling = ceiling;
      opt.validate_diameter = check_diameter;
      opt.prec_bits = prec;
      KdeSolution sol = solve_kde(inst, opt);
      const KdeResult& r = sol.result;
      ojson doc;
      doc["n"] = inst.n;
      doc["m"] = inst.m;
      doc["delta"] = inst.delta.to_decimal();
      doc["M"] = r.M;
      doc["degree"] = r.degree;
      doc["B_used"] = r.B_used.to_decimal();
      doc["B_estimated"] = r.B_estimated;
      doc["B_estimate"] = r.B_estimate.to_decimal();
      doc["distinct_monomials"] = r.distinct_monomials;
      doc["nonzero_coefficients"] = r.nonzero_coefficients;
      doc["scalar"] = to_string(r.scalar);
      doc["scalar_bits"] = r.scalar_bits;
      const DegreeCertificate& c = sol.poly.certificate;
      doc["certificate"] = ojson{{"delta_poly", c.spec.delta.to_decimal()},
                                 {"D_upper", c.D_upper},
                                 {"D_lower", c.D_lower},
                                 {"lower_witness", to_string(c.lower_witness)},
                                 {"error_bound", cli::dec(sol.poly.error_bound)}};
      doc["rounding_bound"] = cli::dec(r.rounding_error);
      if (r.max_sq_distance) doc["max_sq_distance"] = *r.max_sq_distance;
      doc["warnings"] = r.warnings;
      doc["v"] = r.v;
      double bf_ms = 0.0;
      if (validate) {
        auto t0 = std::chrono::steady_clock::now();
        std::vector<double> bf = kde_bruteforce(inst);
        bf_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        double w1 = 0, worst = 0;
        for (double w : inst.w) w1 += std::fabs(w);
        for (std::size_t i = 0; i < inst.n; ++i) worst = std::max(worst, std::fabs(bf[i] - r.v[i]));
        double ratio = w1 > 0 ? worst / w1 : 0.0;
        doc["validation"] = ojson{{"max_abs_error", worst}, {"w_l1", w1}, {"ratio", ratio},
                                  {"within_delta", HPReal(ratio, prec) <= inst.delta}};
      }
      if (cfg.timings) {
        ojson t{{"build", r.elapsed_build_ms}, {"matvec", r.elapsed_matvec_ms}};
        if (validate) t["bruteforce"] = bf_ms;
        doc["timings_ms"] = t;
      }
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      std::string fmt = fmt_or("json");
      if (fmt == "json") {
        out << doc.dump(2) << "\n";
      } else {
        std::vector<std::vector<ojson>> rows;
        for (std::size_t i = 0; i < r.v.size(); ++i) rows.push_back({i, r.v[i]});
        if (fmt == "text") {
          for (const auto& [k, v] : doc.items()) {
            if (k != "v") out << k << ": " << cli::cell(v) << "\n";
          }
        }
        cli::emit_table(out, {"i", "v"}, rows, fmt);
      }
      return kExitOk;
    }

    if (c_regimes->parsed()) {
      cfg.subcommand = "regimes";
      std::string fmt = fmt_or("csv");
      if (!kappa_list.empty()) {
        std::vector<std::vector<ojson>> rows;
        for (const auto& ks : kappa_list) {
          double kappa = cli::parse_real(ks, prec, "--kappa").to_double();
          CostModel cm = cost_model(cost_n, alpha, beta, kappa);
          rows.push_back({ks, cli::dec(cm.nu), cli::dec(cm.kappa_nu), cm.degree, cm.d_int, cm.m_int, cm.M, cm.exponent_bound,
                          cm.envelope, cm.nu_ratio});
        }
        cli::emit_table(out, {"kappa", "nu", "kappa_nu", "degree", "d", "m", "M", "exponent_bound", "envelope", "nu_ratio"},
                        rows, fmt);
        return kExitOk;
      }
      std::vector<HPReal> Bs;
      for (const auto& s : B_list) Bs.push_back(cli::parse_real(s, prec, "--B"));
      if (!B_range.empty()) {
        auto r = cli::parse_range(B_range, prec);
        Bs.insert(Bs.end(), r.begin(), r.end());
      }
      if (Bs.empty()) throw ParseError("regimes needs --B, --B-range or --kappa");
      if (delta_list.empty()) delta_list.push_back("1e-6");
      std::vector<std::vector<ojson>> rows;
      for (const auto& ds : delta_list) {
        HPReal delta = cli::parse_real(ds, prec, "--delta");
        for (const HPReal& B : Bs) {
          ProblemSpec spec{B, delta, target};
          spec.validate();
          RegimePrediction pred = predict_degree(spec, prec);
          ojson up, lo;
          if (!no_certify) {
            DegreeCertificate cert = find_degree(spec, prec);
            up = cert.D_upper;
            lo = cert.D_lower;
          }
          rows.push_back({cli::dec(B), cli::dec(delta), to_string(target), cli::dec(pred.rho), to_string(pred.regime),
                          cli::dec(pred.predicted_degree), up, lo});
        }
      }
      cli::emit_table(out, {"B", "delta", "target", "rho", "regime", "predicted_degree", "D_upper", "D_lower"}, rows, fmt);
      return kExitOk;
    }

    if (c_bench->parsed()) {
      cfg.subcommand = "bench";
      double B = cli::parse_real(bench_B, prec, "--B").to_double();
      HPReal delta = cli::parse_real(bench_delta, prec, "--delta");
      BenchReport rep = run_bench(bench_ns, bench_m, B, delta, cfg.seed, workers, ceiling);
      std::string fmt = fmt_or("csv");
      std::vector<std::string> header{"n", "M", "degree", "error_ratio"};
      if (cfg.timings) {
        header.push_back("matvec_ms");
        header.push_back("bruteforce_ms");
      }
      std::vector<std::vector<ojson>> rows;
      for (const auto& row : rep.rows) {
        std::vector<ojson> r{row.n, rep.M, rep.degree, row.error_ratio};
        if (cfg.timings) {
          r.push_back(row.matvec_ms);
          r.push_back(row.bruteforce_ms);
        }
        rows.push_back(std::move(r));
      }
      if (fmt == "json") {
        ojson doc;
        ojson arr = ojson::array();
        for (const auto& r : rows) {
          ojson o;
          for (std::size_t i = 0; i < header.size(); ++i) o[header[i]] = r[i];
          arr.push_back(std::move(o));
        }
        doc["rows"] = arr;
        if (cfg.timings) {
          doc["slope_matvec"] = rep.slope_matvec;
          doc["slope_bruteforce"] = rep.slope_bruteforce;
        }
        out << doc.dump(2) << "\n";
      } else {
        cli::emit_table(out, header, rows, fmt);
        if (cfg.timings) {
          err << "slope matvec " << rep.slope_matvec << " bruteforce " << rep.slope_bruteforce << "\n";
        }
      }
      return kExitOk;
    }
    err << "error: no subcommand\n";
    return kExitUsage;
  } catch (const CapacityError& e) {
    err << "capacity: " << e.what() << "; required = " << e.required() << "\n";
    return kExitCapacity;
  } catch (const PrecisionOverflow& e) {
    err << "capacity: " << e.what() << "; required bits = " << e.required_bits() << "\n";
    return kExitCapacity;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal: " << e.what() << "\n";
    return kExitSoundness;
  }
}

}  // namespace expdeg
