#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "wmt/io.hpp"
#include "wmt/multiscale.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wmt;

namespace {

struct Run {
  int code;
  std::string out;
};

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("wmt_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

Run wmt_run(const std::string& args, const fs::path& dir) {
  const auto log = dir / "stdout.txt";
  const std::string cmd = std::string(WMT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, read_text(log)};
}

std::string slurp(const fs::path& p) { return read_text(p); }

double omega_from(const std::string& out) {
  const auto pos = out.find("omega: ");
  REQUIRE(pos != std::string::npos);
  return std::stod(out.substr(pos + 7));
}

}  // namespace

TEST_CASE("geodesic input gives zero omega and zero norms") {
  const auto dir = scratch("geo");
  auto r = wmt_run("gen-gaussian --bump 0 --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  r = wmt_run("analyze " + (dir / "curve.json").string() + " --levels 4 --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  CHECK(r.out.find("omega: 0.000000") != std::string::npos);
  std::istringstream norms(slurp(dir / "norms.csv"));
  std::string line;
  std::getline(norms, line);
  CHECK(line == "level,index,time,norm");
  int rows = 0;
  while (std::getline(norms, line)) {
    ++rows;
    CHECK(line.substr(line.rfind(',') + 1) == "0");
  }
  CHECK(rows == 17 + 33 + 65 + 129);
  const auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report["command"] == "analyze");
  CHECK(report["norms"].size() == 4);

  r = wmt_run("optimality " + (dir / "curve.json").string() + " --out-dir " + dir.string(), dir);
  CHECK(r.out.find("omega: 0.000000") != std::string::npos);
}

TEST_CASE("exit codes") {
  const auto dir = scratch("codes");
  json bad = {{"kind", "gaussian"}, {"level", 2}, {"elements", json::array()}};
  for (int i = 0; i < 6; ++i) bad["elements"].push_back({{"mean", i}, {"variance", 1.0}});
  write_text_atomic(dir / "bad.json", bad.dump());
  auto r = wmt_run("analyze " + (dir / "bad.json").string() + " --out-dir " + dir.string(), dir);
  CHECK(r.code == 2);
  CHECK(r.out.find("LengthNotDyadic") != std::string::npos);

  r = wmt_run("analyze " + (dir / "missing.json").string() + " --out-dir " + dir.string(), dir);
  CHECK(r.code == 1);

  write_text_atomic(dir / "corrupt.json", R"({"p":2,"kind":"gaussian","coarse":{"kind":"gaussian","level":0,
    "elements":[{"mean":0,"variance":1},{"mean":1,"variance":1}]},"layers":[{"level":1,"details":[{"type":"zero"}]}]})");
  r = wmt_run("synthesize " + (dir / "corrupt.json").string() + " --out-dir " + dir.string(), dir);
  CHECK(r.code == 2);

  r = wmt_run("analyze", dir);
  CHECK(r.code == 2);
  r = wmt_run("analyze " + (dir / "bad.json").string() + " --p 3 --levels 1", dir);
  CHECK(r.code == 2);
}

TEST_CASE("analyze then synthesize round trip") {
  const auto dir = scratch("roundtrip");
  REQUIRE(wmt_run("simulate-dipole --steps 64 --particles 6 --seed 3 --out-dir " + dir.string(), dir).code == 0);
  const auto input = (dir / "dipole.json").string();
  REQUIRE(wmt_run("analyze " + input + " --levels 4 --out-dir " + dir.string(), dir).code == 0);
  const auto r =
      wmt_run("synthesize " + (dir / "pyramid.json").string() + " --reference " + input + " --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report["max_error"].get<double>() <= 1e-8);

  // Deterministic outputs.
  const auto first = slurp(dir / "norms.csv");
  REQUIRE(wmt_run("analyze " + input + " --levels 4 --out-dir " + dir.string(), dir).code == 0);
  CHECK(slurp(dir / "norms.csv") == first);
}

TEST_CASE("denoise extremes and ground truth report") {
  const auto dir = scratch("denoise");
  REQUIRE(wmt_run("gen-gaussian --out-dir " + (dir / "truth").string(), dir).code == 0);
  REQUIRE(wmt_run("gen-gaussian --noise-mean 0.05 --noise-var 0.05 --seed 4 --out-dir " + (dir / "noisy").string(), dir)
              .code == 0);
  const auto noisy = (dir / "noisy" / "curve.json").string();
  const auto truth = (dir / "truth" / "curve.json").string();

  auto r = wmt_run("denoise " + noisy + " --levels 4 --threshold 1e300 --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto same = read_sequence(dir / "denoised.json");
  double worst = 0.0;
  for (double v : elementwise_distance(same, read_sequence(noisy))) worst = std::max(worst, v);
  CHECK(worst <= 1e-8);

  r = wmt_run("denoise " + noisy + " --levels 4 --threshold 0 --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto flat = read_sequence(dir / "denoised.json");
  const auto coarse = analyze(read_sequence(noisy), 4).coarse;
  worst = 0.0;
  for (double v : elementwise_distance(flat, subdivide_r(coarse, 4))) worst = std::max(worst, v);
  CHECK(worst <= 1e-12);

  r = wmt_run("denoise " + noisy + " --levels 4 --threshold 0.01 --truth " + truth + " --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto report = json::parse(slurp(dir / "report.json"));
  CHECK(report["max_distance_to_truth_denoised"].get<double>() < report["max_distance_to_truth_input"].get<double>());
  CHECK(fs::exists(dir / "denoised_table.csv"));
}

TEST_CASE("dipole noise raises omega") {
  const auto dir = scratch("dipole");
  REQUIRE(wmt_run("simulate-dipole --noise 0 --seed 7 --out-dir " + (dir / "clean").string(), dir).code == 0);
  REQUIRE(wmt_run("simulate-dipole --noise 0.1 --seed 7 --out-dir " + (dir / "noisy").string(), dir).code == 0);
  const auto a = wmt_run("optimality " + (dir / "clean" / "dipole.json").string() + " --levels 6 --out-dir " + dir.string(), dir);
  const auto b = wmt_run("optimality " + (dir / "noisy" / "dipole.json").string() + " --levels 6 --out-dir " + dir.string(), dir);
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(omega_from(b.out) > omega_from(a.out));
}

TEST_CASE("detect on the jump fixture") {
  const auto dir = scratch("detect");
  REQUIRE(wmt_run("gen-gaussian --jump 0.05 --out-dir " + dir.string(), dir).code == 0);
  const auto r = wmt_run("detect " + (dir / "curve.json").string() + " --levels 4 --out-dir " + dir.string(), dir);
  REQUIRE(r.code == 0);
  const auto report = json::parse(slurp(dir / "report.json"));
  std::vector<double> times;
  for (const auto& f : report["anomalies"])
    if (f["level"] == 4 && times.size() < 2) times.push_back(f["time"].get<double>());
  REQUIRE(times.size() == 2);
  std::sort(times.begin(), times.end());
  const double step = 1.0 / 128.0;
  CHECK(std::abs(times[0] - 1.0 / 3.0) <= 2 * step);
  CHECK(std::abs(times[1] - 2.0 / 3.0) <= 2 * step);
  CHECK(fs::exists(dir / "anomalies.csv"));
}

TEST_CASE("family and csv formats") {
  const auto dir = scratch("family");
  REQUIRE(wmt_run("gen-gaussian --out-dir " + dir.string(), dir).code == 0);
  REQUIRE(wmt_run("gen-family " + (dir / "curve.json").string() + " --k 0 --out-dir " + dir.string(), dir).code == 0);
  const auto r = wmt_run("optimality " + (dir / "family.json").string() + " --out-dir " + dir.string(), dir);
  CHECK(r.out.find("omega: 0.000000") != std::string::npos);

  std::string csv = "0,1,2\n";
  for (int i = 0; i < 9; ++i) csv += "0.5,0.25,0.25\n";
  write_text_atomic(dir / "probs.csv", csv);
  const auto a = wmt_run("analyze " + (dir / "probs.csv").string() + " --out-dir " + dir.string(), dir);
  CHECK(a.code == 0);
  CHECK(a.out.find("omega: 0.000000") != std::string::npos);
}
