#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <iostream>

#include "sfeval/binaural.hpp"
#include "sfeval/dsp.hpp"
#include "sfeval/error.hpp"
#include "sfeval/harness.hpp"
#include "sfeval/sh.hpp"
#include "sfeval/swf.hpp"
#include "sfeval/vectors.hpp"
#include "sfeval/wav.hpp"

namespace fs = std::filesystem;
using namespace sfeval;

namespace {

int cmd_render(const std::string& technique_name, const std::string& layout_name,
               double azimuth, double elevation, const std::string& input_wav,
               double pink_duration, uint64_t seed, const std::string& hrir,
               const std::string& out_dir, double rate, int finest_level,
               const std::string& lifting_name, double normalize_dbfs,
               bool save_ambi, const std::string& dump_wavelets) {
  const Technique technique = technique_from_string(technique_name);
  const LoudspeakerLayout layout = load_layout(layout_name);
  const Direction position = Direction::from_degrees(azimuth, elevation);
  const LiftingScheme lifting = lifting_scheme_from_string(lifting_name);

  std::vector<double> s;
  if (!input_wav.empty()) {
    const MultichannelSignal wav = read_wav(input_wav);
    rate = wav.sample_rate;
    s = wav.channel(0);
  } else {
    s = generate_pink_noise(pink_duration, rate, seed);
  }

  fs::create_directories(out_dir);
  const fs::path out(out_dir);

  MultichannelSignal feeds;
  const auto hierarchy = build_octahedron_hierarchy(finest_level);
  if (technique == Technique::swf) {
    feeds = swf_render(hierarchy, position, s, rate, layout, lifting);
    if (!dump_wavelets.empty()) {
      const auto encoded = swf_encode(hierarchy, position, s, rate);
      write_wavelet_csv(dump_wavelets, swf_analysis(hierarchy, encoded, lifting),
                        hierarchy);
    }
  } else {
    const ShSignal encoded =
        encode_plane_wave(layout_order(layout), position, s, rate);
    if (save_ambi) write_ambisonic_wav(out / "ambisonics.wav", encoded);
    feeds = dual_band_decode(encoded, layout);
  }
  write_wav(out / "feeds.wav", feeds);

  fs::path manifest(hrir);
  if (hrir.empty()) {
    const auto head_dir = out / "spherical_head_hrir";
    manifest = head_dir / "manifest.json";
    if (!fs::exists(manifest)) {
      auto dirs = default_hrir_directions();
      dirs.push_back(position);
      write_spherical_head_set(head_dir, dirs, rate);
    }
  }
  const HrirSet hrirs = load_hrir_set(manifest);
  const BinauralPair system_bin = normalize_peak(
      render_virtual_loudspeakers(feeds, layout, hrirs), normalize_dbfs);
  const BinauralPair reference_bin = normalize_peak(
      render_direct_reference(s, rate, position, hrirs), normalize_dbfs);
  write_stereo_wav(out / "binaural.wav", system_bin);
  write_stereo_wav(out / "reference.wav", reference_bin);
  std::cout << "wrote " << (out / "feeds.wav").string() << ", binaural.wav, "
            << "reference.wav (" << layout.size() << " loudspeakers)\n";
  return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& out_dir,
                 uint64_t seed_override, bool has_seed, int jobs) {
  ExperimentConfig config = config_path.empty()
                                ? default_config()
                                : load_config(config_path);
  if (!out_dir.empty()) config.output_dir = out_dir;
  if (has_seed) config.seed = seed_override;
  if (jobs > 0) config.jobs = jobs;

  const ExperimentResult result = run_experiment(config);
  fs::create_directories(config.output_dir);
  const auto csv_path = config.output_dir / "metrics.csv";
  write_metrics_csv(csv_path, result.records, config_hash(config));
  std::cout << "wrote " << csv_path.string() << " (" << result.records.size()
            << " rows)\n";
  for (const auto& failure : result.failures)
    std::cerr << "condition failed: " << failure << "\n";
  return result.failures.empty() ? 0 : 1;
}

int cmd_aggregate(const std::string& metrics_path, const std::string& metric,
                  const std::string& group_by, const std::string& out_path,
                  uint64_t seed) {
  const auto records = read_metrics_csv(metrics_path);
  BootstrapOptions options;
  options.seed = seed;
  const auto rows = aggregate(records, metric, group_by, options);
  write_aggregate_csv(out_path, rows, metric, group_by);
  std::cout << "wrote " << out_path << " (" << rows.size() << " groups)\n";
  for (const auto& r : rows)
    std::printf("  %-28s n=%-3zu median=%12.6g  ci=[%g, %g]\n",
                r.group.c_str(), r.count, r.median, r.ci_low, r.ci_high);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sound-field rendering and objective evaluation toolkit"};
  app.require_subcommand(1);

  // render
  auto* render = app.add_subcommand(
      "render", "render one technique/layout/position condition to WAV files");
  std::string technique = "ambisonics", layout = "octahedron";
  double azimuth = 0.0, elevation = 0.0;
  std::string input_wav, hrir, out_dir = "out", lifting = "vertex_smoothing";
  std::string dump_wavelets;
  double pink_duration = 0.1, rate = 48000.0, normalize_dbfs = -1.0;
  uint64_t seed = 1;
  int finest_level = 2;
  bool save_ambi = false;
  render->add_option("--technique", technique, "ambisonics or swf");
  render->add_option("--layout", layout, "octahedron, tdesign24 or lebedev50");
  render->add_option("--azimuth", azimuth, "source azimuth, degrees CCW from front");
  render->add_option("--elevation", elevation, "source elevation, degrees");
  render->add_option("--input", input_wav, "mono WAV programme (default: pink noise)");
  render->add_option("--pink-duration", pink_duration, "pink noise length, seconds");
  render->add_option("--seed", seed, "pink noise seed");
  render->add_option("--hrir", hrir, "HRIR manifest JSON (default: built-in spherical head)");
  render->add_option("--out", out_dir, "output directory");
  render->add_option("--rate", rate, "sample rate (ignored with --input)");
  render->add_option("--swf-level", finest_level, "SWF encoding mesh level");
  render->add_option("--lifting", lifting, "vertex_smoothing or detail_update");
  render->add_option("--normalize-dbfs", normalize_dbfs, "binaural peak target");
  render->add_flag("--save-ambi", save_ambi, "also write the ACN/SN3D ambisonic WAV");
  render->add_option("--dump-wavelets", dump_wavelets, "write wavelet coefficient CSV here");

  // evaluate
  auto* evaluate = app.add_subcommand(
      "evaluate", "run the full condition sweep and write metrics.csv");
  std::string config_path, eval_out;
  uint64_t eval_seed = 0;
  int jobs = 0;
  evaluate->add_option("--config", config_path, "experiment config JSON");
  evaluate->add_option("--out", eval_out, "output directory override");
  auto* seed_opt = evaluate->add_option("--seed", eval_seed, "sweep seed override");
  evaluate->add_option("--jobs", jobs, "parallel conditions");

  // aggregate
  auto* agg = app.add_subcommand(
      "aggregate", "medians with bootstrap confidence intervals from metrics.csv");
  std::string metrics_path = "out/metrics.csv", metric = "itd_error_s";
  std::string group_by = "system", agg_out = "summary.csv";
  uint64_t agg_seed = 9001;
  agg->add_option("--metrics", metrics_path, "metrics.csv path");
  agg->add_option("--metric", metric,
                  "itd_error_s, ild_error_db, iacc_error, psd_phon, re_mag, "
                  "rv_mag or spread_deg");
  agg->add_option("--group-by", group_by, "system, technique, layout or position");
  agg->add_option("--out", agg_out, "summary CSV path");
  agg->add_option("--seed", agg_seed, "bootstrap seed");

  // gen-noise
  auto* gen = app.add_subcommand("gen-noise", "write deterministic pink noise");
  double noise_duration = 0.1, noise_rate = 48000.0;
  uint64_t noise_seed = 1;
  std::string noise_out = "pink.wav";
  gen->add_option("--duration", noise_duration, "seconds");
  gen->add_option("--rate", noise_rate, "sample rate");
  gen->add_option("--seed", noise_seed, "generator seed");
  gen->add_option("--out", noise_out, "output WAV");

  // gen-head-hrir
  auto* head = app.add_subcommand(
      "gen-head-hrir", "write a synthetic spherical-head HRIR set");
  std::string head_out = "head_hrir";
  double head_rate = 48000.0;
  int head_grid = 0;
  head->add_option("--out", head_out, "output directory");
  head->add_option("--rate", head_rate, "sample rate");
  head->add_option("--grid", head_grid,
                   "extra Fibonacci grid points (default: only the layout "
                   "and panning directions)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (render->parsed())
      return cmd_render(technique, layout, azimuth, elevation, input_wav,
                        pink_duration, seed, hrir, out_dir, rate, finest_level,
                        lifting, normalize_dbfs, save_ambi, dump_wavelets);
    if (evaluate->parsed())
      return cmd_evaluate(config_path, eval_out, eval_seed,
                          seed_opt->count() > 0, jobs);
    if (agg->parsed())
      return cmd_aggregate(metrics_path, metric, group_by, agg_out, agg_seed);
    if (gen->parsed()) {
      const auto noise = generate_pink_noise(noise_duration, noise_rate, noise_seed);
      MultichannelSignal sig;
      sig.sample_rate = noise_rate;
      sig.samples.resize(1, static_cast<long>(noise.size()));
      for (size_t i = 0; i < noise.size(); ++i)
        sig.samples(0, static_cast<long>(i)) = noise[i];
      write_wav(noise_out, sig);
      std::cout << "wrote " << noise_out << " (" << noise.size() << " samples)\n";
      return 0;
    }
    if (head->parsed()) {
      auto dirs = default_hrir_directions();
      if (head_grid > 0)
        for (const auto& d : fibonacci_grid(head_grid)) dirs.push_back(d);
      write_spherical_head_set(head_out, dirs, head_rate);
      std::cout << "wrote " << head_out << "/manifest.json (" << dirs.size()
                << " directions)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
