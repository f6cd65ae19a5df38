// Command-line front end for the broken-ray tomography toolkit.
//
// Subcommands cover the full workflow: phantom generation, forward
// simulation, operator precomputation, inversion, cache conditioning reports,
// and image comparison metrics. Every subcommand that produces an output file
// also writes a JSON echo of the fully resolved parameters next to it (or to
// the path given with --params).

#include <cstdio>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "brt/brt.hpp"

namespace {

std::string default_params_path(const std::string& out) {
  return brt::detail::data_stem(out) + ".params.json";
}

void write_params(const nlohmann::json& j, const std::string& explicit_path,
                  const std::string& out) {
  const std::string path = explicit_path.empty() ? default_params_path(out) : explicit_path;
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw std::runtime_error("'" + path + "': cannot open for writing");
  os << j.dump(2) << '\n';
}

struct PhantomArgs {
  std::string kind, out, params;
  int size = 150;
  double R = 1.0;
  double center_x = 0.05, center_y = 0.0, radius = 0.15, intensity = 1.0;
};

struct ForwardArgs {
  std::string image, out, params;
  double R = 1.0;  // used only when --R is passed; otherwise taken from the image
  double theta = brt::pi / 6;
  int chirality = +1;
  int M = 150, N = 150;
  double epsilon = 1e-3;
  double noise = 0.0;
  unsigned long long seed = 0;
  int threads = 0;
};

struct PrecomputeArgs {
  std::string out, params;
  double R = 1.0, theta = brt::pi / 6;
  int chirality = +1;
  int M = 150, N = 150;
  double epsilon = 1e-3;
  double rank_fraction = 0.5;
  int threads = 0;
};

struct InvertArgs {
  std::string sinogram, cache, out, exact, pgm, params;
  int grid_size = 150;
  int threads = 0;
};

struct ReportArgs {
  std::string cache, out, params;
};

struct MetricsArgs {
  std::string rec, exact, out, params;
  double theta = brt::pi / 6;
  double epsilon = 1e-3;
};

void run_phantom(const PhantomArgs& a) {
  brt::ImageGrid img =
      a.kind == "disk"
          ? brt::phantom_disk(a.size, a.R, {a.center_x, a.center_y}, a.radius, a.intensity)
          : brt::phantom_combined(a.size, a.R);
  brt::write_image(img, a.out);

  nlohmann::json j;
  j["command"] = "phantom";
  j["kind"] = a.kind;
  j["size"] = a.size;
  j["R"] = a.R;
  if (a.kind == "disk") {
    j["center"] = {a.center_x, a.center_y};
    j["radius"] = a.radius;
    j["intensity"] = a.intensity;
  }
  j["out"] = brt::detail::data_stem(a.out);
  write_params(j, a.params, a.out);
  std::printf("wrote %s.{json,csv} (%dx%d)\n", brt::detail::data_stem(a.out).c_str(), a.size,
              a.size);
}

void run_forward(const ForwardArgs& a, bool r_given) {
  const brt::ImageGrid img = brt::read_image(a.image);
  brt::AcquisitionConfig cfg;
  cfg.R = r_given ? a.R : img.R;
  cfg.theta = a.theta;
  cfg.chirality = a.chirality;

  brt::Sinogram sino = brt::project(img, cfg, a.M, a.N, a.epsilon, a.threads);
  if (a.noise != 0.0) sino = brt::add_noise(sino, a.noise, a.seed);
  brt::write_sinogram(sino, a.out);

  nlohmann::json j;
  j["command"] = "forward";
  j["image"] = brt::detail::data_stem(a.image);
  j["R"] = cfg.R;
  j["theta"] = cfg.theta;
  j["chirality"] = cfg.chirality;
  j["M"] = a.M;
  j["N"] = a.N;
  j["epsilon"] = a.epsilon;
  j["noise"] = a.noise;
  j["seed"] = a.seed;
  j["out"] = brt::detail::data_stem(a.out);
  write_params(j, a.params, a.out);
  std::printf("wrote %s.{json,csv} (M=%d, N=%d)\n", brt::detail::data_stem(a.out).c_str(), a.M,
              a.N);
}

void run_precompute(const PrecomputeArgs& a) {
  brt::AcquisitionConfig cfg;
  cfg.R = a.R;
  cfg.theta = a.theta;
  cfg.chirality = a.chirality;

  const brt::OperatorCache cache =
      brt::precompute(cfg, a.M, a.N, a.epsilon, a.rank_fraction, a.threads);
  brt::write_operator_cache(cache, a.out);

  nlohmann::json j;
  j["command"] = "precompute";
  j["R"] = a.R;
  j["theta"] = a.theta;
  j["chirality"] = a.chirality;
  j["M"] = a.M;
  j["N"] = a.N;
  j["epsilon"] = a.epsilon;
  j["rank_fraction"] = a.rank_fraction;
  j["rank"] = cache.rank;
  j["out"] = a.out;
  write_params(j, a.params, a.out);
  std::printf("wrote %s (%zu operators, rank %d)\n", a.out.c_str(), cache.ops.size(), cache.rank);
}

void run_invert(const InvertArgs& a) {
  {
    std::ifstream probe(a.cache, std::ios::binary);
    if (!probe)
      throw std::runtime_error("operator cache '" + a.cache +
                               "' not found; run 'brt precompute' to create it");
  }
  const brt::Sinogram sino = brt::read_sinogram(a.sinogram);
  const brt::OperatorCache cache = brt::read_operator_cache(a.cache);

  brt::InversionResult result = brt::invert(sino, cache, a.grid_size, a.threads);

  std::vector<double> profile;
  bool have_profile = false;
  if (!a.exact.empty()) {
    const brt::ImageGrid exact = brt::read_image(a.exact);
    result.report.rel_l2_percent = brt::relative_l2(result.image, exact, cache.cfg);
    profile = brt::artifact_profile(result.image, exact, cache.cfg, cache.epsilon);
    have_profile = true;
  }

  const std::string stem = brt::detail::data_stem(a.out);
  brt::write_image(result.image, a.out);
  brt::write_report_json(result.report, stem + ".report.json",
                         have_profile ? &profile : nullptr);
  if (!a.pgm.empty()) brt::write_pgm(result.image, a.pgm);

  nlohmann::json j;
  j["command"] = "invert";
  j["sinogram"] = brt::detail::data_stem(a.sinogram);
  j["cache"] = a.cache;
  j["grid_size"] = a.grid_size;
  j["out"] = stem;
  write_params(j, a.params, a.out);

  std::printf("wrote %s.{json,csv} and %s.report.json (%.3f s", stem.c_str(), stem.c_str(),
              result.report.seconds_total);
  if (result.report.rel_l2_percent)
    std::printf(", relative L2 error %.2f%%", *result.report.rel_l2_percent);
  std::printf(")\n");
}

void run_report(const ReportArgs& a) {
  const brt::OperatorCache cache = brt::read_operator_cache(a.cache);
  brt::write_condition_table(cache, a.out);

  nlohmann::json j;
  j["command"] = "report";
  j["cache"] = a.cache;
  j["out"] = a.out;
  write_params(j, a.params, a.out);
  std::printf("wrote %s (%zu rows)\n", a.out.c_str(), cache.ops.size());
}

void run_metrics(const MetricsArgs& a) {
  const brt::ImageGrid rec = brt::read_image(a.rec);
  const brt::ImageGrid exact = brt::read_image(a.exact);
  brt::AcquisitionConfig cfg;
  cfg.R = rec.R;
  cfg.theta = a.theta;

  nlohmann::json j;
  j["rel_l2_percent"] = brt::relative_l2(rec, exact, cfg);
  j["artifact_profile"] = brt::artifact_profile(rec, exact, cfg, a.epsilon);
  {
    std::ofstream os(a.out, std::ios::trunc);
    if (!os) throw std::runtime_error("'" + a.out + "': cannot open for writing");
    os << j.dump(2) << '\n';
  }

  nlohmann::json p;
  p["command"] = "metrics";
  p["rec"] = brt::detail::data_stem(a.rec);
  p["exact"] = brt::detail::data_stem(a.exact);
  p["theta"] = a.theta;
  p["epsilon"] = a.epsilon;
  p["out"] = a.out;
  write_params(p, a.params, a.out);
  std::printf("wrote %s (relative L2 error %.2f%%)\n", a.out.c_str(),
              j["rel_l2_percent"].get<double>());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "broken-ray tomography toolkit: simulate V-line transforms of disc-supported "
      "images and reconstruct them by angular harmonic decomposition"};
  app.require_subcommand(1);
  app.footer(
      "exit codes: 0 success, 2 usage error, 3 configuration mismatch or missing input, "
      "4 numerical failure");

  PhantomArgs ph;
  CLI::App* phantom = app.add_subcommand("phantom", "generate a test image");
  phantom->add_option("--kind", ph.kind, "phantom kind")
      ->required()
      ->check(CLI::IsMember({"disk", "combined"}));
  phantom->add_option("--size", ph.size, "image grid size in pixels")->capture_default_str();
  phantom->add_option("--R", ph.R, "disc radius")->capture_default_str();
  phantom->add_option("--center-x", ph.center_x, "disk center x (disk kind)")->capture_default_str();
  phantom->add_option("--center-y", ph.center_y, "disk center y (disk kind)")->capture_default_str();
  phantom->add_option("--radius", ph.radius, "disk radius (disk kind)")->capture_default_str();
  phantom->add_option("--intensity", ph.intensity, "disk value (disk kind)")->capture_default_str();
  phantom->add_option("--out", ph.out, "output image stem")->required();
  phantom->add_option("--params", ph.params, "parameter echo path (default {out}.params.json)");
  phantom->callback([&] { run_phantom(ph); });

  ForwardArgs fw;
  CLI::App* forward = app.add_subcommand("forward", "simulate the broken-ray transform");
  forward->add_option("--image", fw.image, "input image stem")->required();
  forward->add_option("--out", fw.out, "output sinogram stem")->required();
  CLI::Option* fw_r =
      forward->add_option("--R", fw.R, "disc radius (default: taken from the image)");
  forward->add_option("--theta", fw.theta, "break half-angle in radians")->capture_default_str();
  forward->add_option("--chirality", fw.chirality, "break orientation: +1 or -1")->capture_default_str();
  forward->add_option("--M", fw.M, "radial sample count")->capture_default_str();
  forward->add_option("--N", fw.N, "direction count (even)")->capture_default_str();
  forward->add_option("--epsilon", fw.epsilon, "boundary margin")->capture_default_str();
  forward->add_option("--noise", fw.noise, "multiplicative Gaussian noise level")->capture_default_str();
  forward->add_option("--seed", fw.seed, "noise seed")->capture_default_str();
  forward->add_option("--threads", fw.threads, "worker threads (0 = all cores)")->capture_default_str();
  forward->add_option("--params", fw.params, "parameter echo path (default {out}.params.json)");
  forward->callback([&] { run_forward(fw, fw_r->count() > 0); });

  PrecomputeArgs pc;
  CLI::App* precompute = app.add_subcommand("precompute", "build the inversion operator cache");
  precompute->add_option("--out", pc.out, "output cache path")->required();
  precompute->add_option("--R", pc.R, "disc radius")->capture_default_str();
  precompute->add_option("--theta", pc.theta, "break half-angle in radians")->capture_default_str();
  precompute->add_option("--chirality", pc.chirality, "break orientation: +1 or -1")->capture_default_str();
  precompute->add_option("--M", pc.M, "radial sample count")->capture_default_str();
  precompute->add_option("--N", pc.N, "direction count (even)")->capture_default_str();
  precompute->add_option("--epsilon", pc.epsilon, "boundary margin")->capture_default_str();
  precompute->add_option("--rank-fraction", pc.rank_fraction,
                         "kept fraction of the singular spectrum")->capture_default_str();
  precompute->add_option("--threads", pc.threads, "worker threads (0 = all cores)")->capture_default_str();
  precompute->add_option("--params", pc.params, "parameter echo path (default {out}.params.json)");
  precompute->callback([&] { run_precompute(pc); });

  InvertArgs iv;
  CLI::App* invert = app.add_subcommand("invert", "reconstruct an image from a sinogram");
  invert->add_option("--sinogram", iv.sinogram, "input sinogram stem")->required();
  invert->add_option("--cache", iv.cache, "operator cache path")->required();
  invert->add_option("--out", iv.out, "output image stem")->required();
  invert->add_option("--grid-size", iv.grid_size, "reconstruction grid size")->capture_default_str();
  invert->add_option("--exact", iv.exact, "exact image stem for error metrics");
  invert->add_option("--pgm", iv.pgm, "also write an 8-bit PGM preview here");
  invert->add_option("--threads", iv.threads, "worker threads (0 = all cores)")->capture_default_str();
  invert->add_option("--params", iv.params, "parameter echo path (default {out}.params.json)");
  invert->callback([&] { run_invert(iv); });

  ReportArgs rp;
  CLI::App* report = app.add_subcommand("report", "write a cache conditioning table");
  report->add_option("--cache", rp.cache, "operator cache path")->required();
  report->add_option("--out", rp.out, "output CSV path")->required();
  report->add_option("--params", rp.params, "parameter echo path (default {out}.params.json)");
  report->callback([&] { run_report(rp); });

  MetricsArgs mt;
  CLI::App* metrics = app.add_subcommand("metrics", "compare a reconstruction to an exact image");
  metrics->add_option("--rec", mt.rec, "reconstructed image stem")->required();
  metrics->add_option("--exact", mt.exact, "exact image stem")->required();
  metrics->add_option("--theta", mt.theta, "break half-angle in radians")->capture_default_str();
  metrics->add_option("--epsilon", mt.epsilon, "inner radius of the artifact profile")->capture_default_str();
  metrics->add_option("--out", mt.out, "output JSON path")->required();
  metrics->add_option("--params", mt.params, "parameter echo path (default {out}.params.json)");
  metrics->callback([&] { run_metrics(mt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const brt::RankDeficiencyError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const brt::ConfigMismatchError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::runtime_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 4;
  }
  return 0;
}
