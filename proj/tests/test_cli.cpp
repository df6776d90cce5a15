#include <catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / ("gcp_cli_test_" + std::to_string(::getpid()));
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void put(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

struct Run {
  int code;
  std::string out, err;
};

Run gcp(const std::string& args) {
  const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
  const std::string cmd = std::string(GCP_CLI_PATH) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

// 60 points in R^3 with a mean shift after the 30th.
fs::path shifted_obs() {
  const auto p = scratch() / "shift.txt";
  std::mt19937_64 rng(12);
  std::normal_distribution<double> z;
  std::ostringstream os;
  os.precision(17);
  for (int i = 0; i < 60; ++i) {
    for (int k = 0; k < 3; ++k) os << (k ? " " : "") << z(rng) + (i >= 30 ? 2.0 : 0.0);
    os << "\n";
  }
  put(p, os.str());
  return p;
}

int data_rows(const std::string& plot) {
  std::istringstream in(plot);
  std::string line;
  int rows = 0;
  bool header = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (header) {
      header = false;
      continue;
    }
    ++rows;
  }
  return rows;
}

}  // namespace

TEST_CASE("scan report and plot data") {
  const auto in = shifted_obs();
  const auto rep = scratch() / "scan.json", plot = scratch() / "scan.tsv";
  const auto r = gcp("scan --input " + in.string() + " --graph mst --k 3 --n0 5 --n1 55 --perms 99 --seed 3 --out " +
                     rep.string() + " --plot-out " + plot.string());
  REQUIRE(r.code == 0);
  const auto j = json::parse(slurp(rep));
  CHECK(j["schema_version"] == 1);
  CHECK(j["status"] == "ok");
  CHECK(j["n"] == 60);
  CHECK(j["graph_summary"]["edges"] == 3 * 59);
  const auto tau = j["statistic"]["tau_hat"].get<int>();
  CHECK(std::abs(tau - 30) <= 3);
  const auto& perm = j["pvalues"]["permutation"];
  CHECK(perm["replicates"] == 99);
  const int exc = perm["exceedances"];
  CHECK(perm["raw_fraction"].get<double>() == Catch::Approx(exc / 99.0));
  CHECK(perm["p_hat"].get<double>() == Catch::Approx((1.0 + exc) / 100.0));
  CHECK(j["pvalues"]["skew"].get<double>() < 0.01);
  CHECK(data_rows(slurp(plot)) == 55 - 5 + 1);
  CHECK_FALSE(j.contains("wall_clock_seconds"));
}

TEST_CASE("reports are identical for any worker count") {
  const auto in = shifted_obs();
  const auto a = scratch() / "w1.json", b = scratch() / "w8.json";
  const std::string common = "scan --input " + in.string() + " --k 2 --perms 500 --block-size 3 --moment-replicates 300";
  REQUIRE(gcp(common + " --workers 1 --out " + a.string()).code == 0);
  REQUIRE(gcp(common + " --workers 8 --out " + b.string()).code == 0);
  CHECK(slurp(a) == slurp(b));
  REQUIRE(gcp(common + " --workers 8 --timing --out " + b.string()).code == 0);
  CHECK(json::parse(slurp(b)).contains("wall_clock_seconds"));
}

TEST_CASE("report on stdout parses back") {
  const auto r = gcp("scan-interval --input " + shifted_obs().string() + " --l0 5 --l1 40");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["status"] == "ok");
  CHECK(j["statistic"].contains("t1"));
  CHECK(j["diagonal_max"].size() == 36);
  CHECK(json::parse(j.dump()) == j);
}

TEST_CASE("confidence region and segmentation subcommands") {
  const auto in = shifted_obs();
  const auto ci = gcp("ci --input " + in.string() + " --k 3");
  REQUIRE(ci.code == 0);
  const auto j = json::parse(ci.out);
  const auto tau = j["confidence_region"]["tau_hat"].get<int>();
  const auto members = j["confidence_region"]["C"]["members"].get<std::vector<int>>();
  CHECK(std::find(members.begin(), members.end(), tau) != members.end());
  CHECK(j["confidence_region"]["D"]["members"].size() <= members.size());

  const auto seg = gcp("segment --input " + in.string() + " --k 3 --min-seg 10");
  REQUIRE(seg.code == 0);
  const auto cps = json::parse(seg.out)["change_points"].get<std::vector<int>>();
  REQUIRE_FALSE(cps.empty());
  CHECK(std::any_of(cps.begin(), cps.end(), [](int c) { return std::abs(c - 30) <= 3; }));
}

TEST_CASE("ingestion of each input format") {
  const auto obs = scratch() / "small.txt";
  put(obs, "1 2\n3 4\n5 6\n");
  auto r = gcp("scan --input " + obs.string() + " --n0 1 --n1 2");
  CHECK(r.code != 1);
  CHECK(json::parse(r.out)["n"] == 3);

  const auto graph = scratch() / "path.txt";
  put(graph, "n 3\n1 2\n2 3\n");
  r = gcp("scan --format graph --input " + graph.string() + " --n0 1 --n1 2");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["graph_summary"]["edges"] == 2);

  const auto dist = scratch() / "dist.txt";
  put(dist, "0 1 3\n1 0 2\n3 2 0\n");
  r = gcp("scan --format dist --input " + dist.string() + " --n0 1 --n1 2");
  REQUIRE(r.code == 0);
  CHECK(json::parse(r.out)["config"]["metric"] == "precomputed");

  const auto net = scratch() / "net";
  fs::create_directories(net);
  put(net / "day1.txt", "0 1 0\n1 0 1\n0 1 0\n");
  put(net / "day2.txt", "0 1 1\n1 0 0\n1 0 0\n");
  put(net / "day3.txt", "0 1 0\n0 0 1\n0 1 0\n");
  r = gcp("scan --format network --input " + net.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("DimensionMismatch") != std::string::npos);
  CHECK(r.err.find("day3.txt") != std::string::npos);
}

TEST_CASE("errors and degenerate input") {
  const auto empty = scratch() / "empty_graph.txt";
  put(empty, "n 5\n");
  auto r = gcp("scan --format graph --input " + empty.string());
  CHECK(r.code == 2);
  CHECK(json::parse(r.out)["status"] == "degenerate");

  const auto bad = scratch() / "bad.txt";
  put(bad, "1 2\n3 x\n");
  r = gcp("scan --input " + bad.string());
  CHECK(r.code == 1);
  CHECK(r.err.find("line 2, column 2") != std::string::npos);

  CHECK(gcp("scan --input " + bad.string() + " --no-such-flag").code == 1);
  CHECK(gcp("scan --input /nonexistent/file").code == 1);
  CHECK(gcp("scan --input " + shifted_obs().string() + " --graph tree").code == 1);
  CHECK(gcp("--help").code == 0);
}

TEST_CASE("simulate subcommand") {
  const auto r = gcp("simulate --d 5 --delta 2 --runs 4 --n 60 --tau 30 --graphs mst:1,nng:2 --seed 9");
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["cells"].size() == 2);
  CHECK(j["cells"][1]["graph"] == "nng");
  CHECK(j["cells"][1]["k"] == 2);
  for (const auto& c : j["cells"]) CHECK(c["rejections"].get<int>() <= 4);
}
