#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <sys/wait.h>

#include "json.hpp"

#include "brt/io.hpp"
#include "oracles.hpp"

namespace {

struct RunResult {
  int code;
  std::string output;  // combined stdout + stderr
};

const oracle::TempDir& work_dir() {
  static oracle::TempDir dir;
  return dir;
}

RunResult run(const std::string& args) {
  static int counter = 0;
  const std::string log = work_dir() / ("run" + std::to_string(counter++) + ".log");
  const std::string cmd = std::string(BRT_CLI_PATH) + " " + args + " >" + log + " 2>&1";
  const int raw = std::system(cmd.c_str());
  RunResult r;
  r.code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  std::ifstream is(log);
  r.output.assign((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return r;
}

std::string path(const std::string& name) { return work_dir() / name; }

nlohmann::json load_json(const std::string& p) {
  std::ifstream is(p);
  REQUIRE(is);
  return nlohmann::json::parse(is);
}

}  // namespace

TEST_CASE("command line workflow") {
  // The sections run in order inside one shared scratch directory; each
  // section depends on the files made by the previous ones.

  SECTION("phantom generation") {
    const RunResult r =
        run("phantom --kind combined --size 60 --out " + path("ph"));
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(path("ph.json")));
    CHECK(std::filesystem::exists(path("ph.csv")));
    CHECK(std::filesystem::exists(path("ph.params.json")));
    const brt::ImageGrid img = brt::read_image(path("ph"));
    CHECK(img.size == 60);
    CHECK(load_json(path("ph.params.json"))["kind"] == "combined");
  }

  SECTION("unknown phantom kind is a usage error") {
    const RunResult r = run("phantom --kind nope --out " + path("x"));
    CHECK(r.code == 2);
  }

  SECTION("forward projection") {
    const RunResult r = run("forward --image " + path("ph") + " --M 40 --N 16 --out " +
                            path("sino"));
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    const brt::Sinogram s = brt::read_sinogram(path("sino"));
    CHECK(s.M == 40);
    CHECK(s.N == 16);
  }

  SECTION("forward with a contradictory disc radius fails") {
    const RunResult r = run("forward --image " + path("ph") + " --R 2.0 --M 8 --N 4 --out " +
                            path("bad_sino"));
    CHECK(r.code == 3);
    CHECK(r.output.find("R") != std::string::npos);
  }

  SECTION("operator precomputation") {
    const RunResult r =
        run("precompute --M 40 --N 16 --out " + path("cache.bin"));
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    CHECK(std::filesystem::exists(path("cache.bin")));
    CHECK(load_json(path("cache.bin.params.json"))["rank"] == 20);
  }

  SECTION("inversion with metrics and preview") {
    const RunResult r = run("invert --sinogram " + path("sino") + " --cache " +
                            path("cache.bin") + " --grid-size 60 --exact " + path("ph") +
                            " --pgm " + path("rec.pgm") + " --out " + path("rec"));
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    const nlohmann::json report = load_json(path("rec.report.json"));
    CHECK(report.contains("rel_l2_percent"));
    CHECK(report["artifact_profile"].size() == 50);
    CHECK(report["rank"] == 20);
    CHECK(std::filesystem::exists(path("rec.pgm")));
    const brt::ImageGrid rec = brt::read_image(path("rec"));
    CHECK(rec.size == 60);
  }

  SECTION("inversion without a cache points at precompute") {
    const RunResult r = run("invert --sinogram " + path("sino") + " --cache " +
                            path("no_such_cache.bin") + " --out " + path("rec2"));
    CHECK(r.code == 3);
    CHECK(r.output.find("precompute") != std::string::npos);
  }

  SECTION("inversion with a mismatched cache is a configuration error") {
    REQUIRE(run("precompute --M 40 --N 16 --theta 0.6 --out " + path("cache_other.bin")).code ==
            0);
    const RunResult r = run("invert --sinogram " + path("sino") + " --cache " +
                            path("cache_other.bin") + " --out " + path("rec3"));
    CHECK(r.code == 3);
    CHECK(r.output.find("theta") != std::string::npos);
  }

  SECTION("conditioning report") {
    const RunResult r = run("report --cache " + path("cache.bin") + " --out " + path("cond.csv"));
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    std::ifstream is(path("cond.csv"));
    std::string header;
    std::getline(is, header);
    CHECK(header == "n,cond_full,cond_truncated,sigma_r_plus_1");
    int rows = 0;
    for (std::string line; std::getline(is, line);)
      if (!line.empty()) ++rows;
    CHECK(rows == 9);
  }

  SECTION("standalone metrics") {
    const RunResult r = run("metrics --rec " + path("rec") + " --exact " + path("ph") +
                            " --out " + path("metrics.json"));
    CAPTURE(r.output);
    REQUIRE(r.code == 0);
    const nlohmann::json m = load_json(path("metrics.json"));
    CHECK(m.contains("rel_l2_percent"));
    CHECK(m["artifact_profile"].size() == 50);
    CHECK(m["rel_l2_percent"].get<double>() > 0.0);
  }

  SECTION("repeated inversion is deterministic") {
    const RunResult r = run("invert --sinogram " + path("sino") + " --cache " +
                            path("cache.bin") + " --grid-size 60 --out " + path("rec_again"));
    REQUIRE(r.code == 0);
    const brt::ImageGrid a = brt::read_image(path("rec"));
    const brt::ImageGrid b = brt::read_image(path("rec_again"));
    CHECK(a.values == b.values);
  }

  SECTION("missing required options are usage errors") {
    CHECK(run("phantom --kind disk").code == 2);
    CHECK(run("forward --out x").code == 2);
    CHECK(run("frobnicate").code == 2);
    CHECK(run("--help").code == 0);
  }
}
