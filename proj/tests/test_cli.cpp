#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <doctest.h>
#include <json.hpp>

#include "../tools/commands.hpp"
#include "crosc/atom_model.hpp"
#include "crosc/scan.hpp"
#include "crosc/series.hpp"

namespace fs = std::filesystem;
using namespace crosc;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("crosc_cli_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "crosc");
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json read_json(const std::string& path) { return nlohmann::json::parse(slurp(path)); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("build-model writes loadable models") {
    TempDir tmp;
    const Result r = run({"build-model", "--preset", "ladder5", "-o", tmp / "m.json"});
    REQUIRE(r.code == cli::kOk);
    CHECK(load_atom_model(tmp / "m.json").size() == ladder5_model().size());

    const Result s = run({"build-model", "--softcore", "--points", "301", "--extent", "40", "--cap-start", "30", "--n-keep", "6",
                          "-o", tmp / "sc.json"});
    REQUIRE(s.code == cli::kOk);
    const AtomModel sc = load_atom_model(tmp / "sc.json");
    CHECK(sc.size() == 6);
    CHECK(sc.level(0).energy.real() < sc.level(1).energy.real());

    CHECK(run({"build-model", "--preset", "ladder5"}).code == cli::kUsage);
    CHECK(run({"build-model", "--preset", "nope", "-o", tmp / "x.json"}).code == cli::kUsage);
  }

  TEST_CASE("usage errors exit with 2") {
    TempDir tmp;
    CHECK(run({}).code == cli::kUsage);
    CHECK(run({"frobnicate"}).code == cli::kUsage);
    CHECK(run({"--preset", "ladder5", "analyze", "--bogus"}).code == cli::kUsage);
    CHECK(run({"--preset", "ladder5", "analyze", "--intensity", "1e13"}).code == cli::kUsage);
    CHECK(run({"--model", tmp / "missing.json", "analyze", "--omega-au", "0.3", "--intensity", "1e13"}).code ==
          cli::kUsage);
    CHECK(run({"--preset", "ladder5", "--workers", "0", "scan"}).code == cli::kUsage);
    const Result bad = run({"--preset", "ladder5", "--out-dir", tmp.path.string(), "analyze", "--excited", "zz",
                            "--omega-au", "0.3", "--intensity", "1e13"});
    CHECK(bad.code == cli::kUsage);
    CHECK_FALSE(bad.err.empty());
    CHECK(run({"--help"}).code == cli::kOk);
  }

  TEST_CASE("analyze: lossless two-level system is undamped") {
    TempDir tmp;
    const Result r = run({"--preset", "two-level", "--out-dir", tmp.path.string(), "analyze", "--order", "1",
                          "--intensity", "1e12", "--resonant", "--cycles", "20"});
    REQUIRE(r.code == cli::kOk);
    const auto s = read_json(tmp / "summary.json");
    CHECK(s["zeta"].get<double>() == doctest::Approx(0.0));
    CHECK(s["resonant"].get<bool>());
    CHECK(s["tdse"]["final_norm"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));

    std::ifstream in(tmp / "series.csv");
    const auto series = read_series_csv(in);
    REQUIRE(series.size() == 3);
    CHECK(series[0].source == "tdse");
    CHECK(series[1].source == "effham");
    CHECK(series[1].has_envelopes());
    CHECK(series[2].source == "effham_eq4");
    CHECK_FALSE(series[2].has_envelopes());
    const auto heff = read_json(tmp / "heff.json");
    CHECK(heff.contains("heff0"));
    CHECK(heff.contains("heff1"));
  }

  TEST_CASE("analyze: zero field leaves the ground state alone") {
    TempDir tmp;
    const Result r = run({"--preset", "two-level", "--out-dir", tmp.path.string(), "analyze", "--order", "1",
                          "--intensity", "0", "--omega-au", "0.5", "--cycles", "10"});
    REQUIRE(r.code == cli::kOk);
    std::ifstream in(tmp / "series.csv");
    for (const auto& s : read_series_csv(in)) {
      for (double p : s.pop_excited) CHECK(p < 1e-12);
    }
  }

  TEST_CASE("analyze and compare on the ladder fixture") {
    TempDir tmp;
    const std::string field = std::string(CROSC_DATA_DIR) + "/field_rect_1e14.json";
    const Result r = run({"--model", std::string(CROSC_DATA_DIR) + "/ladder5.json", "--out-dir",
                          tmp.path.string(), "compare", "--ground", "0", "--excited", "2", "--field", field});
    REQUIRE(r.code == cli::kOk);
    const auto c = read_json(tmp / "compare.json");
    CHECK(c["eq4_error_over_m_max"].get<double>() < 0.1);
    CHECK(c["envelope_within_slack"].get<bool>());

    const Result j = run({"--preset", "ladder5", "--format", "json", "--out-dir", tmp / "j", "analyze",
                          "--excited", "2", "--field", field, "--no-tdse"});
    REQUIRE(j.code == cli::kOk);
    const auto table = read_json(tmp / "j/series.json");
    REQUIRE(table.is_array());
    CHECK(table[0].contains("pop_excited"));
    CHECK(fs::exists(tmp / "j/summary.json"));
  }

  TEST_CASE("scan: single node and worker determinism") {
    TempDir tmp;
    const Result one = run({"--preset", "ladder5", "--out-dir", tmp / "one", "scan", "--excited", "2",
                            "--omega-count", "1", "--intensity-count", "1"});
    REQUIRE(one.code == cli::kOk);
    std::ifstream regime(tmp / "one/regime.csv");
    CHECK(read_regime_csv(regime).size() == 1);

    const Result a = run({"--preset", "ladder5", "--workers", "1", "--out-dir", tmp / "a", "scan", "--excited", "2"});
    const Result b = run({"--preset", "ladder5", "--workers", "4", "--out-dir", tmp / "b", "--svg", "scan",
                          "--excited", "2"});
    REQUIRE(a.code == cli::kOk);
    REQUIRE(b.code == cli::kOk);
    for (const char* f : {"regime.csv", "resonance.csv", "heff_grid.json", "ridge.csv"}) {
      CHECK_MESSAGE(slurp(tmp / "a/" + f) == slurp(tmp / "b/" + f), f);
    }
    CHECK(fs::exists(tmp / "b/max_pop.svg"));
    std::ifstream res(tmp / "a/resonance.csv");
    const auto rows = read_resonance_csv(res);
    REQUIRE(rows.size() == 10);
    CHECK(rows.back().omega_max > rows[1].omega_max);

    // resonance from the dumped grid reproduces the scan
    const Result again = run({"--preset", "ladder5", "--out-dir", tmp / "c", "resonance", "--excited", "2",
                              "--heff-grid", tmp / "a/heff_grid.json"});
    REQUIRE(again.code == cli::kOk);
    CHECK(slurp(tmp / "c/resonance.csv") == slurp(tmp / "a/resonance.csv"));
  }

  TEST_CASE("scan: masked nodes are a partial failure") {
    TempDir tmp;
    const Result r = run({"--preset", "ladder5", "--out-dir", tmp.path.string(), "scan", "--excited", "2",
                          "--omega-count", "4", "--intensity-count", "4", "--max-correction", "1e-9"});
    CHECK(r.code == cli::kPartialFailure);
    CHECK(fs::exists(tmp / "failures.json"));
    std::ifstream regime(tmp / "regime.csv");
    for (const auto& c : read_regime_csv(regime)) CHECK_FALSE(c.valid);
  }
}
