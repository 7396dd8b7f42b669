// Batch front-end: parse measure-spec JSON, run experiments, persist reports.
//
// Exit codes: 0 success, 1 configuration error, 2 numeric non-convergence.
// Errors are also written as structured JSON on stderr.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "helson/bounds.hpp"
#include "helson/common.hpp"
#include "helson/matrix.hpp"
#include "helson/measure.hpp"
#include "helson/schatten.hpp"
#include "helson/spectral.hpp"

namespace {

using nlohmann::json;
using namespace helson;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open \"" + path + "\"");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& bytes, std::uint64_t h = 1469598103934665603ull) {
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

measure::MeasureSpec load_measure(const std::string& path, std::string* bytes) {
  *bytes = read_file(path);
  json j;
  try {
    j = json::parse(*bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("measure JSON parse error: ") + e.what());
  }
  measure::MeasureSpec spec;
  try {
    spec = measure::spec_from_json(j, /*strict=*/true);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("measure schema error: ") + e.what());
  }
  const auto rep = measure::validate(spec);
  if (!rep.ok) {
    std::string why = "measure rejected:";
    for (const auto& issue : rep.issues)
      why += " term " + std::to_string(issue.term_index) + ": " + issue.reason + ";";
    throw ConfigError(why);
  }
  return spec;
}

void emit(const std::string& out_path, const std::string& payload) {
  if (out_path.empty()) {
    std::cout << payload;
    if (!payload.empty() && payload.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write \"" + out_path + "\"");
  out << payload;
}

json stamp(json j, std::uint64_t config_hash) {
  j["version"] = kVersion;
  j["config_hash"] = hash_hex(config_hash);
  return j;
}

json bounds_report(const measure::MeasureSpec& spec, std::int64_t n,
                   std::optional<double> b_override, std::int64_t col_cap) {
  json out;
  out["envelope"] = bounds::to_json(bounds::envelope_constants(spec, b_override));
  const auto ac = measure::asymptotic_class(spec);
  if (spec.positive()) {
    const auto sb = bounds::schur_bound(spec, col_cap);
    out["schur_bound"] =
        json{{"value", sb.value}, {"inconclusive", sb.inconclusive},
             {"col_cap", sb.col_cap}};
  } else {
    out["schur_bound"] = nullptr;
  }
  if (spec.positive() && ac.kind != measure::AsymptoticClass::Kind::Diverges) {
    json probes = json::array();
    double eps[4] = {0.5, 0.2, 0.1, 0.05};
    std::int64_t pn = std::max<std::int64_t>(32, n / 8);
    for (int i = 0; i < 4; ++i, pn *= 2) {
      const auto pr = bounds::a_eps_probe(spec, eps[i], pn);
      probes.push_back(json{{"eps", pr.eps}, {"n", pr.n},
                            {"quotient", pr.quotient}});
    }
    out["probes"] = probes;
  } else if (ac.kind == measure::AsymptoticClass::Kind::Diverges) {
    // divergent family: report the witness instead of the probes
    try {
      const std::int64_t wn = bounds::choose_witness_n(spec, 1.0);
      out["witness"] = bounds::to_json(
          bounds::unboundedness_witness(spec, 1.0, wn));
    } catch (const std::exception& e) {
      out["witness"] = json{{"error", e.what()}};
    }
    out["probes"] = nullptr;
  } else {
    out["probes"] = nullptr;
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Helson matrices induced by measures: build truncations and "
               "run spectral diagnostics"};
  app.require_subcommand(1);

  std::string measure_path, measure2_path, matrix_path, config_path;
  std::string out_path, format = "json", kind = "trace";
  std::int64_t n = 512, length = 0, col_cap = 200000;
  double tol = 1e-8, p = 1.0, gamma1 = 1.0, gamma2 = 1.0;
  std::optional<double> b_override;
  bool want_vectors = false;

  const auto add_common = [&](CLI::App* cmd, bool need_measure) {
    if (need_measure)
      cmd->add_option("--measure", measure_path, "measure spec JSON file")
          ->required();
    cmd->add_option("--n", n, "truncation size (indices 2..n+1)");
    cmd->add_option("--tol", tol, "numeric tolerance");
    cmd->add_option("--out", out_path, "output path (default stdout)");
  };

  auto* c_build = app.add_subcommand("build", "emit a truncation (CSV or binary)");
  add_common(c_build, true);
  c_build->add_option("--format", format, "csv|bin")
      ->check(CLI::IsMember({"csv", "bin"}));

  auto* c_spectrum = app.add_subcommand("spectrum", "eigenvalues and functionals");
  c_spectrum->add_option("--measure", measure_path, "measure spec JSON file");
  c_spectrum->add_option("--matrix", matrix_path, "HELS1 truncation file");
  c_spectrum->add_option("--n", n, "truncation size");
  c_spectrum->add_option("--tol", tol, "numeric tolerance");
  c_spectrum->add_option("--out", out_path, "output path");
  c_spectrum->add_flag("--vectors", want_vectors,
                       "retain eigenvectors and check residuals");

  auto* c_bounds = app.add_subcommand("bounds", "Schur bound, envelope, probes");
  add_common(c_bounds, true);
  double b_val = -1.0;
  c_bounds->add_option("--b", b_val, "shift override for the lower envelope");
  c_bounds->add_option("--col-cap", col_cap, "Schur column cap");

  auto* c_classify = app.add_subcommand("classify", "boundedness/compactness verdict");
  add_common(c_classify, true);

  auto* c_schatten = app.add_subcommand("schatten", "Schatten-class series tests");
  add_common(c_schatten, true);
  c_schatten->add_option("--kind", kind, "trace|hs|col|diag|entry")
      ->check(CLI::IsMember({"trace", "hs", "col", "diag", "entry"}));
  c_schatten->add_option("--p", p, "Schatten exponent (col/diag/entry)");
  c_schatten->add_option("--length", length, "series length (default --n)");

  auto* c_diff = app.add_subcommand("diff", "difference-operator diagnostics");
  add_common(c_diff, true);
  c_diff->add_option("--measure2", measure2_path, "second measure spec")->required();
  c_diff->add_option("--gamma1", gamma1, "weight of the first matrix");
  c_diff->add_option("--gamma2", gamma2, "weight of the second matrix");

  auto* c_predict = app.add_subcommand("predict", "essential / a.c. spectrum prediction");
  add_common(c_predict, true);

  auto* c_report = app.add_subcommand("report", "full JSON report");
  c_report->add_option("--measure", measure_path, "measure spec JSON file");
  c_report->add_option("--config", config_path,
                       "experiment config JSON (measure, n, tol, out, format)");
  c_report->add_option("--n", n, "truncation size");
  c_report->add_option("--tol", tol, "numeric tolerance");
  c_report->add_option("--out", out_path, "output path");

  CLI11_PARSE(app, argc, argv);

  if (c_bounds->parsed() && b_val >= 0.0) b_override = b_val;

  if (c_report->parsed() && !config_path.empty()) {
    const std::string raw = read_file(config_path);
    json cfg;
    try {
      cfg = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw ConfigError(std::string("config parse error: ") + e.what());
    }
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
      const std::string& k = it.key();
      if (k != "measure" && k != "n" && k != "tol" && k != "out" && k != "format")
        throw ConfigError("unknown key \"" + k + "\" in experiment config");
    }
    if (!cfg.contains("measure"))
      throw ConfigError("experiment config needs a \"measure\" object");
    if (cfg.contains("n")) n = cfg["n"].get<std::int64_t>();
    if (cfg.contains("tol")) tol = cfg["tol"].get<double>();
    if (cfg.contains("out")) out_path = cfg["out"].get<std::string>();
    if (cfg.contains("format")) format = cfg["format"].get<std::string>();
    measure::MeasureSpec spec;
    try {
      spec = measure::spec_from_json(cfg["measure"], true);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("config measure schema error: ") + e.what());
    }
    const auto vrep = measure::validate(spec);
    if (!vrep.ok) throw ConfigError("config measure rejected");
    const std::uint64_t h = fnv1a(raw);
    json out;
    out["classify"] = bounds::to_json(bounds::classify(spec));
    const auto t = matrix::build_truncation(spec, static_cast<int>(n), tol);
    out["spectrum"] = spectral::to_json(spectral::eig_sym(t.entries));
    out["bounds"] = bounds_report(spec, n, {}, col_cap);
    out["schatten"] = json{
        {"trace-cond", schatten::to_json(schatten::schatten_series(
                           spec.positive()
                               ? spec
                               : measure::hahn_decompose(spec).total_variation,
                           schatten::SeriesKind::TraceCond, 0.0, n))}};
    if (measure::is_density_only(spec) && spec.positive()) {
      try {
        out["predict"] = schatten::to_json(schatten::spectrum_predict(
            spec, static_cast<int>(std::min<std::int64_t>(n, 512))));
      } catch (const std::invalid_argument&) {
        out["predict"] = nullptr;
      }
    } else {
      out["predict"] = nullptr;
    }
    emit(out_path, stamp(out, h).dump(2));
    return 0;
  }

  std::string measure_bytes;
  std::optional<measure::MeasureSpec> spec;
  if (!measure_path.empty()) spec = load_measure(measure_path, &measure_bytes);

  std::ostringstream params;
  params << app.get_subcommands().front()->get_name() << " n=" << n
         << " tol=" << tol << " p=" << p << " kind=" << kind
         << " g1=" << gamma1 << " g2=" << gamma2;
  const std::uint64_t h = fnv1a(measure_bytes + params.str());

  if (c_build->parsed()) {
    const auto t = matrix::build_truncation(*spec, static_cast<int>(n), tol);
    std::ostringstream os(std::ios::binary);
    if (format == "bin")
      matrix::save_binary(t, os);
    else
      matrix::save_csv(t, os);
    emit(out_path, os.str());
    return 0;
  }

  if (c_spectrum->parsed()) {
    if (measure_path.empty() == matrix_path.empty())
      throw ConfigError("spectrum needs exactly one of --measure or --matrix");
    SymMatrix m;
    if (!matrix_path.empty()) {
      std::ifstream in(matrix_path, std::ios::binary);
      if (!in) throw ConfigError("cannot open \"" + matrix_path + "\"");
      m = matrix::load_binary(in);
    } else {
      m = matrix::build_truncation(*spec, static_cast<int>(n), tol).entries;
    }
    const auto rep = spectral::eig_sym(m, want_vectors);
    emit(out_path, stamp(spectral::to_json(rep), h).dump(2));
    return 0;
  }

  if (c_bounds->parsed()) {
    emit(out_path, stamp(bounds_report(*spec, n, b_override, col_cap), h).dump(2));
    return 0;
  }

  if (c_classify->parsed()) {
    emit(out_path, stamp(bounds::to_json(bounds::classify(*spec)), h).dump(2));
    return 0;
  }

  if (c_schatten->parsed()) {
    const std::int64_t len = length > 0 ? length : n;
    schatten::SeriesKind sk = schatten::SeriesKind::TraceCond;
    if (kind == "hs") sk = schatten::SeriesKind::HS;
    if (kind == "col") sk = schatten::SeriesKind::ColP;
    if (kind == "diag") sk = schatten::SeriesKind::DiagP;
    if (kind == "entry") sk = schatten::SeriesKind::EntryP;
    json out;
    if (spec->positive()) {
      out = schatten::to_json(schatten::schatten_series(*spec, sk, p, len));
    } else {
      out = schatten::to_json(schatten::schatten_series(
          measure::hahn_decompose(*spec).total_variation, sk, p, len));
      out["note"] = "signed spec: series computed for |mu|";
      const auto stb = schatten::signed_trace_bound(*spec, len);
      out["signed_trace_bound"] =
          json{{"bound", stb.bound},
               {"infinite", stb.infinite},
               {"form_inequality_ok", stb.form_inequality_ok}};
    }
    emit(out_path, stamp(out, h).dump(2));
    return 0;
  }

  if (c_diff->parsed()) {
    std::string bytes2;
    const auto spec2 = load_measure(measure2_path, &bytes2);
    const auto d = schatten::difference_operator(*spec, spec2, gamma1, gamma2,
                                                 static_cast<int>(n));
    emit(out_path, stamp(schatten::to_json(d), fnv1a(bytes2, h)).dump(2));
    return 0;
  }

  if (c_predict->parsed()) {
    const auto pr = schatten::spectrum_predict(*spec, static_cast<int>(n));
    emit(out_path, stamp(schatten::to_json(pr), h).dump(2));
    return 0;
  }

  if (c_report->parsed()) {
    if (measure_path.empty())
      throw ConfigError("report needs --measure or --config");
    json out;
    out["classify"] = bounds::to_json(bounds::classify(*spec));
    const auto t = matrix::build_truncation(*spec, static_cast<int>(n), tol);
    out["spectrum"] = spectral::to_json(spectral::eig_sym(t.entries));
    out["bounds"] = bounds_report(*spec, n, {}, col_cap);
    out["schatten"] = json{
        {"trace-cond", schatten::to_json(schatten::schatten_series(
                           spec->positive()
                               ? *spec
                               : measure::hahn_decompose(*spec).total_variation,
                           schatten::SeriesKind::TraceCond, 0.0, n))}};
    if (measure::is_density_only(*spec) && spec->positive()) {
      try {
        out["predict"] = schatten::to_json(schatten::spectrum_predict(
            *spec, static_cast<int>(std::min<std::int64_t>(n, 512))));
      } catch (const std::invalid_argument&) {
        out["predict"] = nullptr;
      }
    } else {
      out["predict"] = nullptr;
    }
    emit(out_path, stamp(out, h).dump(2));
    return 0;
  }

  throw ConfigError("no subcommand executed");
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << json{{"error", {{"type", "config"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 1;
  } catch (const NumericError& e) {
    std::cerr << json{{"error",
                       {{"type", "numeric"},
                        {"message", e.what()},
                        {"best_estimate", e.best_estimate},
                        {"achieved_tolerance", e.achieved_tolerance}}}}
                     .dump()
              << std::endl;
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump()
              << std::endl;
    return 2;
  }
}
