#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef HELSON_CLI_PATH
#error "HELSON_CLI_PATH must be defined"
#endif

namespace {

using nlohmann::json;

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  out << content;
}

RunResult run_cli(const std::string& args) {
  const std::string out_file = "/tmp/helson_cli_test_stdout";
  const std::string err_file = "/tmp/helson_cli_test_stderr";
  const std::string cmd = std::string(HELSON_CLI_PATH) + " " + args + " >" +
                          out_file + " 2>" + err_file;
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WEXITSTATUS(status);
  r.out = slurp(out_file);
  r.err = slurp(err_file);
  return r;
}

const char* kExpA1 = R"({"terms":[{"coef":1.0,"atom":{"kind":"exp","a":1.0}}]})";
const char* kDeltaHalf =
    R"({"terms":[{"coef":1.0,"atom":{"kind":"pointmass","c":0.5,"w":1.0}}]})";
const char* kZero = R"({"terms":[]})";
const char* kLeb = R"({"terms":[{"coef":1.0,"atom":{"kind":"power","p":0.0}}]})";

}  // namespace

TEST_CASE("classify subcommand: exponential verdict with exact envelope") {
  write_file("/tmp/exp_a1.json", kExpA1);
  const auto r = run_cli("classify --measure /tmp/exp_a1.json");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["verdict"] == "BoundedNonCompact");
  CHECK(j["envelope"]["C"] == 1.0);
  CHECK(j["envelope"]["D"] == 1.0);
  CHECK(j["envelope"]["b"] == 1.0);
  CHECK(j.contains("version"));
  CHECK(j.contains("config_hash"));
}

TEST_CASE("spectrum subcommand: rank-one point mass at n = 100") {
  write_file("/tmp/delta_half.json", kDeltaHalf);
  const auto r = run_cli("spectrum --measure /tmp/delta_half.json --n 100");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  double expect = 0.0;
  for (int m = 101; m >= 2; --m) expect += std::pow(m, -2.0);
  CHECK(std::abs(j["eigenvalues"][0].get<double>() - expect) <= 1e-12);
  CHECK(std::abs(j["eigenvalues"][1].get<double>()) <= 1e-10);
}

TEST_CASE("build subcommand: zero measure CSV") {
  write_file("/tmp/zero.json", kZero);
  const auto r = run_cli("build --measure /tmp/zero.json --n 8 --format csv");
  REQUIRE(r.exit_code == 0);
  std::istringstream lines(r.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "m\\n,2,3,4,5,6,7,8,9");
  int rows = 0;
  std::string line;
  while (std::getline(lines, line)) {
    ++rows;
    CHECK(line.substr(line.find(',')) == ",0,0,0,0,0,0,0,0");
  }
  CHECK(rows == 8);
}

TEST_CASE("round trip: build binary, spectrum from matrix matches measure") {
  write_file("/tmp/leb.json", kLeb);
  const auto rb = run_cli(
      "build --measure /tmp/leb.json --n 24 --format bin --out /tmp/leb.hels");
  REQUIRE(rb.exit_code == 0);
  const auto r1 = run_cli("spectrum --matrix /tmp/leb.hels");
  const auto r2 = run_cli("spectrum --measure /tmp/leb.json --n 24");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  const json j1 = json::parse(r1.out);
  const json j2 = json::parse(r2.out);
  // bit-for-bit identical spectral payloads (hashes differ by config)
  CHECK(j1["eigenvalues"] == j2["eigenvalues"]);
  CHECK(j1["trace"] == j2["trace"]);
  CHECK(j1["hs_norm"] == j2["hs_norm"]);
  CHECK(j1["trace_norm_lower"] == j2["trace_norm_lower"]);
}

TEST_CASE("schatten and diff subcommands") {
  write_file("/tmp/leb.json", kLeb);
  write_file("/tmp/exp_a1.json", kExpA1);
  const auto rs = run_cli(
      "schatten --measure /tmp/leb.json --kind trace --length 256");
  REQUIRE(rs.exit_code == 0);
  CHECK(json::parse(rs.out)["verdict"] == "diverges");

  const auto rd = run_cli(
      "diff --measure /tmp/leb.json --measure2 /tmp/exp_a1.json --n 64");
  REQUIRE(rd.exit_code == 0);
  const json jd = json::parse(rd.out);
  CHECK(jd["psd"] == true);
  CHECK(jd["positive_measure"] == true);
  CHECK(jd["series"]["verdict"] == "converges");
}

TEST_CASE("bounds subcommand") {
  write_file("/tmp/exp_a1.json", kExpA1);
  const auto r = run_cli("bounds --measure /tmp/exp_a1.json --n 256");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["envelope"]["C"] == 1.0);
  CHECK(j["envelope"]["D"] == 1.0);
  CHECK(j["schur_bound"]["value"].get<double>() <= 3.1415926535898 * 1.001);
  REQUIRE(j["probes"].is_array());
  REQUIRE(j["probes"].size() == 4);
  double prev = 0.0;
  for (const auto& p : j["probes"]) {
    CHECK(p["quotient"].get<double>() > prev);
    prev = p["quotient"].get<double>();
  }
}

TEST_CASE("predict subcommand") {
  write_file("/tmp/exp_a1.json", kExpA1);
  const auto r = run_cli("predict --measure /tmp/exp_a1.json --n 128");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  REQUIRE(j["sigma_ac"].is_array());
  CHECK(std::abs(j["sigma_ac"][1].get<double>() - 3.141592653589793) <= 1e-12);
}

TEST_CASE("report subcommand with a config file") {
  const std::string cfg = R"({"measure":{"terms":[{"coef":1.0,"atom":
    {"kind":"exp","a":1.0}}]},"n":64,"tol":1e-9,"format":"json"})";
  write_file("/tmp/experiment.json", cfg);
  const auto r = run_cli("report --config /tmp/experiment.json");
  REQUIRE(r.exit_code == 0);
  const json j = json::parse(r.out);
  CHECK(j["classify"]["verdict"] == "BoundedNonCompact");
  CHECK(j.contains("spectrum"));
  CHECK(j.contains("bounds"));
  CHECK(j.contains("schatten"));
  CHECK(j.contains("version"));

  // unknown config keys are rejected
  write_file("/tmp/bad_experiment.json",
             R"({"measure":{"terms":[]},"n":8,"zzz":1})");
  CHECK(run_cli("report --config /tmp/bad_experiment.json").exit_code == 1);
}

TEST_CASE("deterministic output for identical config") {
  write_file("/tmp/exp_a1.json", kExpA1);
  const auto r1 = run_cli("classify --measure /tmp/exp_a1.json");
  const auto r2 = run_cli("classify --measure /tmp/exp_a1.json");
  CHECK(r1.out == r2.out);
}

TEST_CASE("config errors exit 1 with structured JSON on stderr") {
  const auto r1 = run_cli("classify --measure /tmp/nonexistent_measure.json");
  CHECK(r1.exit_code == 1);
  const json e1 = json::parse(r1.err);
  CHECK(e1["error"]["type"] == "config");

  write_file("/tmp/bad_measure.json",
             R"({"terms":[{"coef":1.0,"atom":{"kind":"exp","a":1.0,"x":1}}]})");
  const auto r2 = run_cli("classify --measure /tmp/bad_measure.json");
  CHECK(r2.exit_code == 1);

  write_file("/tmp/rejected.json",
             R"({"terms":[{"coef":1.0,"atom":{"kind":"pointmass","c":0.0,"w":1.0}}]})");
  const auto r3 = run_cli("classify --measure /tmp/rejected.json");
  CHECK(r3.exit_code == 1);
  CHECK(json::parse(r3.err)["error"]["message"].get<std::string>().find(
            "c=0 point mass") != std::string::npos);

  const auto r4 = run_cli("classify --no-such-flag");
  CHECK(r4.exit_code != 0);
}

TEST_CASE("numeric non-convergence exits 2") {
  write_file("/tmp/log_spec.json",
             R"({"terms":[{"coef":1.0,"atom":{"kind":"log"}}]})");
  const auto r = run_cli("spectrum --measure /tmp/log_spec.json --n 4 --tol 1e-30");
  CHECK(r.exit_code == 2);
  const json e = json::parse(r.err);
  CHECK(e["error"]["type"] == "numeric");
  CHECK(e["error"].contains("achieved_tolerance"));
}
