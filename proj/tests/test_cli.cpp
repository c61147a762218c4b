#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>
#include <sys/wait.h>
#include <unistd.h>

#include "gipsp/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string output;
};

fs::path scratch() {
  static const fs::path root = [] {
    auto p = fs::temp_directory_path() / ("gipsp-cli-test-" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
  }();
  return root;
}

Result run(const std::string& args) {
  const auto log = scratch() / "last.log";
  const std::string cmd = std::string(GIPSP_CLI) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(status), ss.str()};
}

std::string config(const std::string& name) { return (fs::path(GIPSP_CONFIGS) / name).string(); }

json load(const fs::path& file) {
  std::ifstream in(file);
  return json::parse(in);
}

std::string slurp(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Runs a config once per process and caches the output directory.
fs::path run_once(const std::string& name, const std::string& tag = "") {
  const auto dir = scratch() / (name + tag);
  if (!fs::exists(dir / "report.json")) {
    const auto r = run("run " + config(name + ".json") + " --out " + dir.string());
    REQUIRE_MESSAGE(r.code == 0, r.output);
  }
  return dir;
}

} // namespace

TEST_CASE("invalid constants are a configuration error") {
  const auto cfg = scratch() / "bad.json";
  auto j = load(config("gauge-pair.json"));
  j["constants"] = {{"lambda", -1.0}};
  std::ofstream(cfg) << j.dump();
  const auto r = run("run " + cfg.string() + " --out " + (scratch() / "bad").string());
  CHECK(r.code == 2);
  CHECK(r.output.find("constants.lambda") != std::string::npos);
}

TEST_CASE("report on a directory without artifacts") {
  const auto dir = scratch() / "empty";
  fs::create_directories(dir);
  const auto r = run("report " + dir.string());
  CHECK(r.code != 0);
  CHECK(r.output.find("config.json") != std::string::npos);
  CHECK(r.output.find("report.json") != std::string::npos);
}

TEST_CASE("gauge pair run") {
  const auto dir = run_once("gauge-pair");
  const auto rep = load(dir / "report.json");
  CHECK(rep["passed"].get<bool>());
  CHECK(rep["exit_code"].get<int>() == 0);
  CHECK(rep["metrics"]["wg_gauge_invariance_max_err"].get<double>() <= 1e-8);
  for (const std::string k : {"wg", "wg_radial", "qg", "qg_radial"}) {
    CHECK(rep["metrics"].contains(k + "_total_err"));
    CHECK(fs::exists(dir / (k + ".bin")));
    CHECK(fs::exists(dir / (k + ".json")));
    CHECK(fs::exists(dir / (k + "_slice.csv")));
  }
  const auto r = run("report " + dir.string());
  CHECK(r.code == 0);
  for (const std::string k : {"wg_total_err", "wg_radial_total_err", "qg_total_err", "qg_radial_total_err"}) {
    CHECK(r.output.find(k) != std::string::npos);
  }
}

TEST_CASE("free packet run: W_g equals W without a field") {
  const auto dir = run_once("free-packet");
  const auto rep = load(dir / "report.json");
  CHECK(rep["passed"].get<bool>());
  CHECK(rep["metrics"]["wg_equals_w_max_err"].get<double>() <= 1e-14);
}

TEST_CASE("reruns are deterministic") {
  const auto a = run_once("gauge-pair");
  const auto b = run_once("gauge-pair", "-again");
  const auto ma = load(a / "report.json")["metrics"];
  const auto mb = load(b / "report.json")["metrics"];
  CHECK(ma.size() == mb.size());
  for (const auto& [key, value] : ma.items()) {
    REQUIRE(mb.contains(key));
    CHECK(std::abs(value.get<double>() - mb[key].get<double>()) <= 1e-13);
  }
  for (const std::string k : {"wg", "wg_radial", "qg", "qg_radial"}) {
    CHECK(slurp(a / (k + ".json")) == slurp(b / (k + ".json")));
    json meta;
    CHECK(gipsp::max_abs_diff(gipsp::read_array(a / k, meta), gipsp::read_array(b / k, meta)) <= 1e-13);
  }
}

TEST_CASE("gauge-independent outputs agree between a gauge and its transform") {
  const auto a = run_once("gauge-pair");
  const auto b = run_once("gauge-pair-symmetric");
  CHECK(load(b / "report.json")["passed"].get<bool>());
  for (const std::string k : {"wg", "wg_radial", "qg", "qg_radial"}) {
    json ma;
    json mb;
    const auto va = gipsp::read_array(a / k, ma);
    const auto vb = gipsp::read_array(b / k, mb);
    REQUIRE(va.size() == vb.size());
    CHECK(gipsp::max_abs_diff(va, vb) <= 1e-8);
    CHECK(ma["kind"] == mb["kind"]);
  }
}
