#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "wmt/errors.hpp"
#include "wmt/experiments.hpp"
#include "wmt/io.hpp"
#include "wmt/multiscale.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace wmt;

namespace {

enum ExitCode { kOk = 0, kIo = 1, kValidation = 2, kNumerical = 3 };

struct Common {
  std::string input;
  std::string format;
  std::string out_dir = ".";
  int levels = -1;
  double p = 2.0;
  std::uint64_t seed = 0;
};

struct Report {
  std::string command;
  json body = json::object();
  std::chrono::steady_clock::time_point started = std::chrono::steady_clock::now();
};

void init_logging() {
  auto logger = spdlog::stderr_color_mt("wmt");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("WMT_LOG")) spdlog::set_level(spdlog::level::from_str(env));
}

MeasureSequence load_sequence(const Common& c) {
  const FileFormat fmt = c.format.empty() ? format_from_path(c.input) : parse_format(c.format);
  auto seq = read_sequence(c.input, fmt);
  spdlog::info("read {} {} measures from {}", seq.size(), to_string(seq.kind()), c.input);
  return seq;
}

int resolve_levels(const Common& c, const MeasureSequence& seq) {
  if (c.levels >= 0) return c.levels;
  return std::min(seq.level, default_level(seq.size()));
}

fs::path out_path(const Common& c, const std::string& name) {
  fs::path dir(c.out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create output directory " + dir.string());
  return dir / name;
}

/// One row per (element, atom): index,time,atom,weight,x0[,x1...] or
/// index,time,mean,variance for Gaussian sequences.
std::string sequence_table(const MeasureSequence& seq) {
  std::string out;
  if (seq.kind() == MeasureKind::Gaussian) {
    out = "index,time,mean,variance\n";
    for (std::size_t i = 0; i < seq.size(); ++i) {
      const auto& g = std::get<GaussianMeasure>(seq.elements[i]);
      out += std::to_string(i) + ',' + format_double(seq.time_of(i)) + ',' + format_double(g.mean()) + ',' +
             format_double(g.variance()) + '\n';
    }
    return out;
  }
  const std::size_t dim = std::get<DiscreteMeasure>(seq.elements.front()).dim();
  out = "index,time,atom,weight";
  for (std::size_t c = 0; c < dim; ++c) out += ",x" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < seq.size(); ++i) {
    const auto& d = std::get<DiscreteMeasure>(seq.elements[i]);
    for (std::size_t k = 0; k < d.size(); ++k) {
      out += std::to_string(i) + ',' + format_double(seq.time_of(i)) + ',' + std::to_string(k) + ',' +
             format_double(d.weight(k));
      for (double x : d.atom(k)) out += ',' + format_double(x);
      out += '\n';
    }
  }
  return out;
}

void write_sequence_outputs(const Common& c, const MeasureSequence& seq, const std::string& stem, Report& r) {
  const FileFormat fmt = c.format.empty() ? FileFormat::Json : parse_format(c.format);
  const auto main = out_path(c, stem + (fmt == FileFormat::Csv ? ".csv" : ".json"));
  write_sequence(main, seq, fmt);
  const auto table = out_path(c, stem + "_table.csv");
  write_text_atomic(table, sequence_table(seq));
  r.body["outputs"].push_back(main.string());
  r.body["outputs"].push_back(table.string());
}

json norm_table(const Pyramid& pyr) {
  json rows = json::array();
  for (std::size_t l = 0; l < pyr.norms.size(); ++l) {
    const auto& v = pyr.norms[l];
    double one = 0.0;
    double inf = 0.0;
    for (double x : v) {
      one += x;
      inf = std::max(inf, x);
    }
    rows.push_back({{"level", l + 1}, {"one_norm", one}, {"inf_norm", inf}, {"per_index", v}});
  }
  return rows;
}

void write_pyramid_outputs(const Common& c, const Pyramid& pyr, Report& r) {
  const auto pyr_path = out_path(c, "pyramid.json");
  const auto norms_path = out_path(c, "norms.csv");
  write_pyramid(pyr_path, pyr);
  write_text_atomic(norms_path, norms_csv(pyr));
  r.body["outputs"].push_back(pyr_path.string());
  r.body["outputs"].push_back(norms_path.string());
  r.body["norms"] = norm_table(pyr);
}

double max_of(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, x);
  return m;
}

void finish(const Common& c, Report& r) {
  r.body["command"] = r.command;
  if (!c.input.empty()) r.body["input"] = c.input;
  r.body["wall_time"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - r.started).count();
  write_text_atomic(out_path(c, "report.json"), r.body.dump(2) + "\n");
}

void print_omega(double omega) { std::printf("omega: %.6f\n", omega); }

void run_analyze(const Common& c, Report& r) {
  const auto seq = load_sequence(c);
  const int levels = resolve_levels(c, seq);
  const auto pyr = analyze(seq, levels, c.p);
  write_pyramid_outputs(c, pyr, r);
  const double omega = optimality_number(pyr);
  r.body["levels"] = levels;
  r.body["optimality"] = omega;
  print_omega(omega);
}

void run_synthesize(const Common& c, const std::string& reference, Report& r) {
  const auto pyr = read_pyramid(c.input);
  const auto seq = synthesize(pyr);
  write_sequence_outputs(c, seq, "synthesized", r);
  r.body["levels"] = pyr.levels();
  if (!reference.empty()) {
    Common ref = c;
    ref.input = reference;
    ref.format.clear();
    const auto err = elementwise_distance(seq, load_sequence(ref), pyr.p);
    r.body["per_element_error"] = err;
    r.body["max_error"] = max_of(err);
    std::printf("max_error: %.3e\n", max_of(err));
  }
}

void run_denoise(const Common& c, double threshold, const std::string& truth, Report& r) {
  const auto seq = load_sequence(c);
  const int levels = resolve_levels(c, seq);
  const auto pyr = analyze(seq, levels, c.p);
  const auto cleaned = threshold_details(pyr, threshold);
  const auto out = synthesize(cleaned);
  write_sequence_outputs(c, out, "denoised", r);
  const double deviation = max_of(elementwise_distance(out, seq, c.p));
  r.body["levels"] = levels;
  r.body["threshold"] = threshold;
  r.body["zeroed_details"] = count_nonzero_details(pyr) - count_nonzero_details(cleaned);
  r.body["max_deviation_from_input"] = deviation;
  std::printf("zeroed: %zu\nmax_deviation: %.6f\n", count_nonzero_details(pyr) - count_nonzero_details(cleaned),
              deviation);
  if (!truth.empty()) {
    Common t = c;
    t.input = truth;
    t.format.clear();
    const auto reference = load_sequence(t);
    const double before = max_of(elementwise_distance(seq, reference, c.p));
    const double after = max_of(elementwise_distance(out, reference, c.p));
    r.body["max_distance_to_truth_input"] = before;
    r.body["max_distance_to_truth_denoised"] = after;
    std::printf("truth_distance: %.6f -> %.6f\n", before, after);
  }
}

void run_detect(const Common& c, double k_sigma, Report& r) {
  const auto seq = load_sequence(c);
  const int levels = resolve_levels(c, seq);
  const auto pyr = analyze(seq, levels, c.p);
  const auto flags = detect_anomalies(pyr, seq, k_sigma);
  std::string table = "level,index,time,norm\n";
  json list = json::array();
  for (const auto& f : flags) {
    table += std::to_string(f.level) + ',' + std::to_string(f.index) + ',' + format_double(f.time) + ',' +
             format_double(f.norm) + '\n';
    list.push_back({{"level", f.level}, {"index", f.index}, {"time", f.time}, {"norm", f.norm}});
    std::printf("level %d index %zu time %.6f norm %.6f\n", f.level, f.index, f.time, f.norm);
  }
  const auto path = out_path(c, "anomalies.csv");
  write_text_atomic(path, table);
  write_pyramid_outputs(c, pyr, r);
  r.body["outputs"].push_back(path.string());
  r.body["levels"] = levels;
  r.body["k_sigma"] = k_sigma;
  r.body["anomalies"] = list;
}

void run_optimality(const Common& c, bool shift, Report& r) {
  const auto seq = load_sequence(c);
  const int levels = resolve_levels(c, seq);
  OptimalityOptions opts;
  opts.shift_averaged = shift;
  const auto res = optimality_number(seq, levels, opts, c.p);
  r.body["levels"] = levels;
  r.body["optimality"] = res.omega;
  r.body["omega_unshifted"] = res.omega_unshifted;
  if (shift) {
    r.body["omega_shifted"] = res.omega_shifted;
    r.body["shifted_levels"] = res.shifted_levels;
    r.body["dropped_trailing"] = res.dropped_trailing;
    if (res.dropped_trailing > 0) spdlog::info("shifted window dropped {} trailing elements", res.dropped_trailing);
  }
  write_text_atomic(out_path(c, "optimality.csv"), "omega\n" + format_double(res.omega) + "\n");
  print_omega(res.omega);
}

}  // namespace

int main(int argc, char** argv) {
  init_logging();
  CLI::App app{"Multiscale transform for sequences of probability measures"};
  app.require_subcommand(1);

  Common c;
  auto add_common = [&](CLI::App* sub, bool with_input) {
    if (with_input) sub->add_option("input,--in", c.input, "Input file")->required();
    sub->add_option("--format", c.format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out-dir", c.out_dir, "Output directory");
    sub->add_option("--p", c.p, "Cost exponent")->check(CLI::Range(1.0, 1e6));
  };
  auto add_levels = [&](CLI::App* sub) {
    sub->add_option("--levels", c.levels, "Refinement levels J (default: largest admissible, at most 6)")
        ->check(CLI::Range(0, 30));
  };

  auto* analyze_cmd = app.add_subcommand("analyze", "Forward transform: pyramid.json, norms.csv, omega");
  add_common(analyze_cmd, true);
  add_levels(analyze_cmd);

  std::string reference;
  auto* synth_cmd = app.add_subcommand("synthesize", "Inverse transform of a pyramid file");
  add_common(synth_cmd, true);
  synth_cmd->add_option("--reference", reference, "Sequence to compare against");

  double threshold = 0.01;
  std::string truth;
  auto* denoise_cmd = app.add_subcommand("denoise", "Zero large details and reconstruct");
  add_common(denoise_cmd, true);
  add_levels(denoise_cmd);
  denoise_cmd->add_option("--threshold", threshold, "Details with larger norm are zeroed")->check(CLI::NonNegativeNumber);
  denoise_cmd->add_option("--truth", truth, "Ground-truth sequence for the report");

  double k_sigma = 3.0;
  auto* detect_cmd = app.add_subcommand("detect", "Flag unusually large details");
  add_common(detect_cmd, true);
  add_levels(detect_cmd);
  detect_cmd->add_option("--k-sigma", k_sigma, "Robust threshold multiplier")->check(CLI::NonNegativeNumber);

  bool shift = false;
  auto* opt_cmd = app.add_subcommand("optimality", "Print the optimality number");
  add_common(opt_cmd, true);
  add_levels(opt_cmd);
  opt_cmd->add_flag("--shift", shift, "Average with the window shifted by one index");

  DipoleSpec dipole;
  std::string dipole_spec;
  double noise_variance = 0.0;
  auto* sim_cmd = app.add_subcommand("simulate-dipole", "Particles in a dipole field");
  add_common(sim_cmd, false);
  sim_cmd->add_option("--spec", dipole_spec, "JSON spec file (flags override it)");
  sim_cmd->add_option("--noise", noise_variance, "Variance of the per-step field noise")->check(CLI::NonNegativeNumber);
  sim_cmd->add_option("--particles", dipole.n_particles, "Number of particles");
  sim_cmd->add_option("--steps", dipole.n_steps, "Number of Euler steps (even)");
  sim_cmd->add_option("--dt", dipole.timestep, "Timestep");
  sim_cmd->add_option("--seed", c.seed, "RNG seed");

  GaussianCurveSpec curve;
  std::string curve_spec;
  double noise_mean = 0.0;
  double noise_var = 0.0;
  bool no_taper = false;
  double jump = 0.0;
  auto* gen_cmd = app.add_subcommand("gen-gaussian", "Synthetic Gaussian curve");
  add_common(gen_cmd, false);
  gen_cmd->add_option("--spec", curve_spec, "JSON spec file (flags override it)");
  gen_cmd->add_option("--samples", curve.n_samples, "Number of samples");
  gen_cmd->add_option("--bump", curve.bump_amplitude, "Deviation from the geodesic");
  gen_cmd->add_option("--noise-mean", noise_mean, "Stddev of mean noise");
  gen_cmd->add_option("--noise-var", noise_var, "Stddev of variance noise");
  gen_cmd->add_flag("--no-taper", no_taper, "Do not fade the noise near the endpoints");
  gen_cmd->add_option("--jump", jump, "Variance factor on the middle third");
  gen_cmd->add_option("--seed", c.seed, "RNG seed");

  double k = 0.0;
  auto* fam_cmd = app.add_subcommand("gen-family", "Blend a Gaussian curve with its endpoint geodesic");
  add_common(fam_cmd, true);
  fam_cmd->add_option("--k", k, "Blend weight in [0, 1]")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  Report r;
  r.body["outputs"] = json::array();
  try {
    if (analyze_cmd->parsed()) {
      r.command = "analyze";
      run_analyze(c, r);
    } else if (synth_cmd->parsed()) {
      r.command = "synthesize";
      run_synthesize(c, reference, r);
    } else if (denoise_cmd->parsed()) {
      r.command = "denoise";
      run_denoise(c, threshold, truth, r);
    } else if (detect_cmd->parsed()) {
      r.command = "detect";
      run_detect(c, k_sigma, r);
    } else if (opt_cmd->parsed()) {
      r.command = "optimality";
      run_optimality(c, shift, r);
    } else if (sim_cmd->parsed()) {
      r.command = "simulate-dipole";
      DipoleSpec spec = dipole;
      if (!dipole_spec.empty()) {
        spec = dipole_spec_from_json(read_json(dipole_spec));
        if (sim_cmd->count("--particles")) spec.n_particles = dipole.n_particles;
        if (sim_cmd->count("--steps")) spec.n_steps = dipole.n_steps;
        if (sim_cmd->count("--dt")) spec.timestep = dipole.timestep;
      }
      if (sim_cmd->count("--seed") || dipole_spec.empty()) spec.seed = c.seed;
      if (sim_cmd->count("--noise") || dipole_spec.empty()) spec.field_noise_sigma = std::sqrt(noise_variance);
      const auto seq = simulate_dipole(spec);
      write_sequence_outputs(c, seq, "dipole", r);
      r.body["spec"] = to_json(spec);
    } else if (gen_cmd->parsed()) {
      r.command = "gen-gaussian";
      GaussianCurveSpec spec = curve;
      if (!curve_spec.empty()) {
        spec = curve_spec_from_json(read_json(curve_spec));
        if (gen_cmd->count("--samples")) spec.n_samples = curve.n_samples;
        if (gen_cmd->count("--bump")) spec.bump_amplitude = curve.bump_amplitude;
      }
      if (gen_cmd->count("--seed") || curve_spec.empty()) spec.seed = c.seed;
      if (noise_mean > 0.0 || noise_var > 0.0) spec.noise = CurveNoise{noise_mean, noise_var, !no_taper};
      if (jump > 0.0) spec.jump = CurveJump{jump};
      const auto gen = gen_gaussian_curve(spec);
      if (gen.clamped_variances > 0) spdlog::warn("{} variances clamped to {}", gen.clamped_variances, kVarianceFloor);
      write_sequence_outputs(c, gen.sequence, "curve", r);
      r.body["spec"] = to_json(spec);
      r.body["clamped_variances"] = gen.clamped_variances;
    } else if (fam_cmd->parsed()) {
      r.command = "gen-family";
      const auto seq = gen_weighted_family(load_sequence(c), k);
      write_sequence_outputs(c, seq, "family", r);
      r.body["k"] = k;
    }
    finish(c, r);
  } catch (const Error& e) {
    std::fprintf(stderr, "%s\n", e.what());
    switch (e.category()) {
      case ErrorCategory::Io:
        return kIo;
      case ErrorCategory::Numerical:
        return kNumerical;
      default:
        return kValidation;
    }
  } catch (const fs::filesystem_error& e) {
    std::fprintf(stderr, "IoError: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "NumericalFailure: %s\n", e.what());
    return kNumerical;
  }
  return kOk;
}
