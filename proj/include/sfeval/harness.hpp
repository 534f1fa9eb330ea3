#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sfeval/binaural.hpp"
#include "sfeval/vectors.hpp"

namespace sfeval {

struct ProgrammeSpec {
  enum class Kind { pink_noise, wav_file };
  Kind kind = Kind::pink_noise;
  std::string id;
  double duration_s = 0.1;
  uint64_t seed = 1;
  std::filesystem::path wav_path;
};

struct SystemSpec {
  Technique technique = Technique::ambisonics;
  std::string layout;
};

struct ExperimentConfig {
  std::vector<SystemSpec> systems;
  std::vector<Direction> positions;
  std::vector<ProgrammeSpec> programmes;
  std::filesystem::path hrir_manifest;  // empty -> built-in spherical head
  double sample_rate = 48000.0;
  std::filesystem::path output_dir = "out";
  int swf_finest_level = 2;
  LiftingScheme lifting = LiftingScheme::vertex_smoothing;
  SpreadFormula spread = SpreadFormula::arccos_re;
  VectorMode vector_mode = VectorMode::broadband_rms;
  double normalize_dbfs = -1.0;
  bool save_renders = false;
  uint64_t seed = 1;
  int jobs = 1;
};

/// Default grid: the six technique/layout systems, the ten standard
/// panning positions and two 100 ms pink-noise programmes.
ExperimentConfig default_config();

ExperimentConfig load_config(const std::filesystem::path& path);

/// Hash of the canonical config serialisation, written into the CSV header.
uint64_t config_hash(const ExperimentConfig& config);

struct MetricRecord {
  std::string technique;
  std::string layout;
  double azimuth_deg = 0.0;
  double elevation_deg = 0.0;
  std::string programme;
  double itd_error_s = 0.0;
  double ild_error_db = 0.0;
  double iacc_error = 0.0;
  double psd_phon = 0.0;
  // Programme-independent vector quantities, duplicated per row.
  double re_mag = 0.0;
  double rv_mag = 0.0;
  double spread_deg = 0.0;
  // Provenance.
  std::string lifting_scheme;
  std::string vector_mode;
  std::string spread_formula;
  double normalize_dbfs = -1.0;
};

struct ExperimentResult {
  std::vector<MetricRecord> records;
  std::vector<std::string> failures;  // "system/position/programme: reason"
};

/// Convenience alias for the deterministic pink-noise generator.
std::vector<double> generate_pink_noise(double duration_s, double sample_rate,
                                        uint64_t seed);

/// Runs the full condition sweep: render reference and system, normalise
/// both, compute metric errors and the vector analysis, one record per
/// condition x programme. Failures abort only their own condition.
ExperimentResult run_experiment(const ExperimentConfig& config);

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const MetricRecord> records,
                       uint64_t config_hash_value);
std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path);

struct AggregateRow {
  std::string group;
  size_t count = 0;
  double median = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
};

struct BootstrapOptions {
  int resamples = 10000;
  uint64_t seed = 9001;
  double confidence = 0.95;
};

double median(std::span<const double> values);

/// Bias-corrected percentile bootstrap interval of the median.
AggregateRow bootstrap_median(std::span<const double> values,
                              const BootstrapOptions& options = {});

/// Per-group median and bootstrap confidence interval of one metric column.
/// group_by is one of "system", "technique", "layout", "position"; groups
/// with fewer than three records are skipped.
std::vector<AggregateRow> aggregate(std::span<const MetricRecord> records,
                                    const std::string& metric,
                                    const std::string& group_by,
                                    const BootstrapOptions& options = {});

void write_aggregate_csv(const std::filesystem::path& path,
                         std::span<const AggregateRow> rows,
                         const std::string& metric,
                         const std::string& group_by);

}  // namespace sfeval
