#include "sfeval/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <atomic>
#include <future>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sfeval/dsp.hpp"
#include "sfeval/error.hpp"
#include "sfeval/metrics.hpp"
#include "sfeval/sh.hpp"
#include "sfeval/wav.hpp"

namespace sfeval {

std::vector<double> generate_pink_noise(double duration_s, double sample_rate,
                                        uint64_t seed) {
  return dsp::pink_noise(duration_s, sample_rate, seed);
}

ExperimentConfig default_config() {
  ExperimentConfig config;
  for (const char* layout : {"octahedron", "tdesign24", "lebedev50"}) {
    config.systems.push_back({Technique::ambisonics, layout});
    config.systems.push_back({Technique::swf, layout});
  }
  const double positions[][2] = {{0, 0},  {30, 0},  {90, 0},  {135, 0},
                                 {180, 0}, {0, 45},  {0, 90},  {0, 135},
                                 {45, 45}, {135, 45}};
  for (const auto& p : positions)
    config.positions.push_back(Direction::from_degrees(p[0], p[1]));
  config.programmes.push_back(
      {ProgrammeSpec::Kind::pink_noise, "pink1", 0.1, 1, {}});
  config.programmes.push_back(
      {ProgrammeSpec::Kind::pink_noise, "pink2", 0.1, 2, {}});
  return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }

  ExperimentConfig config = default_config();
  if (j.contains("systems")) {
    config.systems.clear();
    for (const auto& s : j["systems"])
      config.systems.push_back(
          {technique_from_string(s.at("technique").get<std::string>()),
           s.at("layout").get<std::string>()});
  }
  if (j.contains("positions")) {
    config.positions.clear();
    for (const auto& p : j["positions"])
      config.positions.push_back(
          Direction::from_degrees(p.at(0).get<double>(), p.at(1).get<double>()));
  }
  if (j.contains("programmes")) {
    config.programmes.clear();
    int index = 0;
    for (const auto& p : j["programmes"]) {
      ProgrammeSpec spec;
      const auto type = p.value("type", std::string("pink_noise"));
      if (type == "pink_noise") {
        spec.kind = ProgrammeSpec::Kind::pink_noise;
        spec.duration_s = p.value("duration_s", 0.1);
        spec.seed = p.value("seed", static_cast<uint64_t>(index + 1));
        spec.id = p.value("id", "pink" + std::to_string(index + 1));
      } else if (type == "wav") {
        spec.kind = ProgrammeSpec::Kind::wav_file;
        spec.wav_path = p.at("path").get<std::string>();
        spec.id = p.value("id", spec.wav_path.stem().string());
      } else {
        throw ConfigError("unknown programme type '" + type + "'");
      }
      config.programmes.push_back(std::move(spec));
      ++index;
    }
  }
  if (j.contains("hrir_manifest"))
    config.hrir_manifest = j["hrir_manifest"].get<std::string>();
  config.sample_rate = j.value("sample_rate", config.sample_rate);
  if (j.contains("output_dir"))
    config.output_dir = j["output_dir"].get<std::string>();
  if (j.contains("swf")) {
    config.swf_finest_level = j["swf"].value("finest_level", 2);
    if (j["swf"].contains("lifting"))
      config.lifting =
          lifting_scheme_from_string(j["swf"]["lifting"].get<std::string>());
  }
  if (j.contains("spread_formula"))
    config.spread =
        spread_formula_from_string(j["spread_formula"].get<std::string>());
  if (j.contains("vector_mode"))
    config.vector_mode =
        vector_mode_from_string(j["vector_mode"].get<std::string>());
  config.normalize_dbfs = j.value("normalize_dbfs", config.normalize_dbfs);
  config.save_renders = j.value("save_renders", config.save_renders);
  config.seed = j.value("seed", config.seed);
  config.jobs = j.value("jobs", config.jobs);

  if (config.systems.empty() || config.positions.empty() ||
      config.programmes.empty())
    throw ConfigError("config has an empty condition grid");
  for (const auto& p : config.programmes)
    if (p.kind == ProgrammeSpec::Kind::wav_file &&
        !std::filesystem::exists(p.wav_path))
      throw ConfigError("programme wav does not exist: " +
                        p.wav_path.string());
  return config;
}

namespace {

std::string canonical_config_string(const ExperimentConfig& c) {
  std::ostringstream os;
  os.precision(12);
  for (const auto& s : c.systems)
    os << to_string(s.technique) << '/' << s.layout << ';';
  for (const auto& p : c.positions)
    os << p.azimuth_deg() << ',' << p.elevation_deg() << ';';
  for (const auto& p : c.programmes)
    os << p.id << ',' << static_cast<int>(p.kind) << ',' << p.duration_s << ','
       << p.seed << ',' << p.wav_path.string() << ';';
  os << c.hrir_manifest.string() << ';' << c.sample_rate << ';'
     << c.swf_finest_level << ';' << to_string(c.lifting) << ';'
     << to_string(c.spread) << ';' << to_string(c.vector_mode) << ';'
     << c.normalize_dbfs << ';' << c.seed;
  return os.str();
}

uint64_t fnv1a(const std::string& s) {
  uint64_t hash = 1469598103934665603ull;
  for (unsigned char ch : s) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  return hash;
}

struct Condition {
  size_t system = 0;
  size_t position = 0;
  size_t programme = 0;
};

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

}  // namespace

uint64_t config_hash(const ExperimentConfig& config) {
  return fnv1a(canonical_config_string(config));
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  // Resolve the HRIR set: an explicit manifest, or the built-in spherical
  // head written once into the output directory.
  std::filesystem::create_directories(config.output_dir);
  std::filesystem::path manifest = config.hrir_manifest;
  if (manifest.empty()) {
    const auto head_dir = config.output_dir / "spherical_head_hrir";
    manifest = head_dir / "manifest.json";
    if (!std::filesystem::exists(manifest)) {
      std::vector<Direction> dirs = default_hrir_directions();
      for (const auto& p : config.positions) {
        bool found = false;
        for (const auto& d : dirs)
          if (d.angle_to(p) < 1e-6) {
            found = true;
            break;
          }
        if (!found) dirs.push_back(p);
      }
      write_spherical_head_set(head_dir, dirs, config.sample_rate);
    }
  }
  const HrirSet hrirs = load_hrir_set(manifest);
  if (hrirs.sample_rate() != config.sample_rate)
    throw ConfigError("HRIR sample rate " +
                      std::to_string(hrirs.sample_rate()) +
                      " != configured rate " +
                      std::to_string(config.sample_rate));

  // Programme material.
  std::vector<std::vector<double>> signals;
  for (const auto& p : config.programmes) {
    if (p.kind == ProgrammeSpec::Kind::pink_noise) {
      signals.push_back(
          generate_pink_noise(p.duration_s, config.sample_rate, p.seed));
    } else {
      const MultichannelSignal wav = read_wav(p.wav_path);
      if (wav.sample_rate != config.sample_rate)
        throw ConfigError("programme '" + p.id + "' rate mismatch");
      signals.push_back(wav.channel(0));
    }
  }

  // Layouts and per-system vector analyses (programme independent).
  std::vector<LoudspeakerLayout> layouts;
  for (const auto& s : config.systems) layouts.push_back(load_layout(s.layout));

  RenderAnalysisOptions vec_options;
  vec_options.mode = config.vector_mode;
  vec_options.spread = config.spread;
  vec_options.lifting = config.lifting;
  vec_options.swf_finest_level = config.swf_finest_level;

  const auto hierarchy = build_octahedron_hierarchy(config.swf_finest_level);

  std::vector<Condition> conditions;
  for (size_t s = 0; s < config.systems.size(); ++s)
    for (size_t p = 0; p < config.positions.size(); ++p)
      for (size_t g = 0; g < config.programmes.size(); ++g)
        conditions.push_back({s, p, g});

  struct Slot {
    std::optional<MetricRecord> record;
    std::string failure;
  };
  std::vector<Slot> slots(conditions.size());

  auto run_condition = [&](const Condition& cond, Slot& slot) {
    const SystemSpec& system = config.systems[cond.system];
    const LoudspeakerLayout& layout = layouts[cond.system];
    const Direction& position = config.positions[cond.position];
    const ProgrammeSpec& programme = config.programmes[cond.programme];
    const std::vector<double>& s = signals[cond.programme];
    try {
      MultichannelSignal feeds;
      if (system.technique == Technique::swf) {
        feeds = swf_render(hierarchy, position, s, config.sample_rate, layout,
                           config.lifting);
      } else {
        const ShSignal encoded = encode_plane_wave(
            layout_order(layout), position, s, config.sample_rate);
        feeds = dual_band_decode(encoded, layout);
      }
      const BinauralPair system_bin = normalize_peak(
          render_virtual_loudspeakers(feeds, layout, hrirs),
          config.normalize_dbfs);
      const BinauralPair reference_bin = normalize_peak(
          render_direct_reference(s, config.sample_rate, position, hrirs),
          config.normalize_dbfs);

      const IaccItdResult sys_ii = compute_iacc_itd(system_bin);
      const IaccItdResult ref_ii = compute_iacc_itd(reference_bin);
      const IldResult sys_ild = compute_ild(system_bin);
      const IldResult ref_ild = compute_ild(reference_bin);
      const double psd = compute_psd(system_bin, reference_bin);
      const VectorAnalysis va =
          analyze_rendering(system.technique, layout, position, vec_options);

      MetricRecord rec;
      rec.technique = std::string(to_string(system.technique));
      rec.layout = layout.name;
      rec.azimuth_deg = position.azimuth_deg();
      rec.elevation_deg = position.elevation_deg();
      rec.programme = programme.id;
      rec.itd_error_s = signed_error(sys_ii.itd_s, ref_ii.itd_s);
      rec.iacc_error = signed_error(sys_ii.iacc, ref_ii.iacc);
      rec.ild_error_db =
          signed_error(sys_ild.broadband_hf_db, ref_ild.broadband_hf_db);
      rec.psd_phon = psd;
      rec.re_mag = va.re_mag;
      rec.rv_mag = va.rv_mag;
      rec.spread_deg = va.spread_deg;
      rec.lifting_scheme = std::string(to_string(config.lifting));
      rec.vector_mode = std::string(to_string(config.vector_mode));
      rec.spread_formula = std::string(to_string(config.spread));
      rec.normalize_dbfs = config.normalize_dbfs;
      slot.record = std::move(rec);

      if (config.save_renders) {
        std::ostringstream name;
        name << to_string(system.technique) << '_' << layout.name << "_az"
             << position.azimuth_deg() << "_el" << position.elevation_deg()
             << '_' << programme.id;
        const auto dir = config.output_dir / "renders";
        std::filesystem::create_directories(dir);
        write_wav(dir / (name.str() + "_feeds.wav"), feeds);
        write_stereo_wav(dir / (name.str() + "_bin.wav"), system_bin);
        write_stereo_wav(dir / (name.str() + "_ref.wav"), reference_bin);
      }
    } catch (const std::exception& e) {
      std::ostringstream os;
      os << to_string(system.technique) << '/' << layout.name << " az "
         << position.azimuth_deg() << " el " << position.elevation_deg()
         << " programme " << programme.id << ": " << e.what();
      slot.failure = os.str();
    }
  };

  const int jobs = std::max(1, config.jobs);
  if (jobs == 1) {
    for (size_t i = 0; i < conditions.size(); ++i)
      run_condition(conditions[i], slots[i]);
  } else {
    std::atomic<size_t> next(0);
    std::vector<std::future<void>> workers;
    for (int w = 0; w < jobs; ++w)
      workers.push_back(std::async(std::launch::async, [&]() {
        for (size_t i = next.fetch_add(1); i < conditions.size();
             i = next.fetch_add(1))
          run_condition(conditions[i], slots[i]);
      }));
    for (auto& w : workers) w.get();
  }

  ExperimentResult result;
  for (auto& slot : slots) {
    if (slot.record)
      result.records.push_back(std::move(*slot.record));
    else
      result.failures.push_back(std::move(slot.failure));
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path,
                       std::span<const MetricRecord> records,
                       uint64_t config_hash_value) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  char hash_hex[20];
  std::snprintf(hash_hex, sizeof(hash_hex), "%016llx",
                static_cast<unsigned long long>(config_hash_value));
  os << "# sfeval metrics v1 config_hash=" << hash_hex << "\n";
  os << "technique,layout,azimuth_deg,elevation_deg,programme,"
        "itd_error_s,ild_error_db,iacc_error,psd_phon,"
        "re_mag,rv_mag,spread_deg,"
        "lifting_scheme,vector_mode,spread_formula,normalize_dbfs\n";
  for (const auto& r : records) {
    os << r.technique << ',' << r.layout << ',' << format_double(r.azimuth_deg)
       << ',' << format_double(r.elevation_deg) << ',' << r.programme << ','
       << format_double(r.itd_error_s) << ',' << format_double(r.ild_error_db)
       << ',' << format_double(r.iacc_error) << ','
       << format_double(r.psd_phon) << ',' << format_double(r.re_mag) << ','
       << format_double(r.rv_mag) << ',' << format_double(r.spread_deg) << ','
       << r.lifting_scheme << ',' << r.vector_mode << ',' << r.spread_formula
       << ',' << format_double(r.normalize_dbfs) << "\n";
  }
}

std::vector<MetricRecord> read_metrics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open " + path.string());
  std::vector<MetricRecord> records;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ls(line);
    std::string field;
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (fields.size() < 16)
      throw IngestError("malformed metrics row: " + line);
    MetricRecord r;
    r.technique = fields[0];
    r.layout = fields[1];
    r.azimuth_deg = std::stod(fields[2]);
    r.elevation_deg = std::stod(fields[3]);
    r.programme = fields[4];
    r.itd_error_s = std::stod(fields[5]);
    r.ild_error_db = std::stod(fields[6]);
    r.iacc_error = std::stod(fields[7]);
    r.psd_phon = std::stod(fields[8]);
    r.re_mag = std::stod(fields[9]);
    r.rv_mag = std::stod(fields[10]);
    r.spread_deg = std::stod(fields[11]);
    r.lifting_scheme = fields[12];
    r.vector_mode = fields[13];
    r.spread_formula = fields[14];
    r.normalize_dbfs = std::stod(fields[15]);
    records.push_back(std::move(r));
  }
  return records;
}

double median(std::span<const double> values) {
  if (values.empty()) throw BoundsError("median of empty set");
  std::vector<double> v(values.begin(), values.end());
  std::sort(v.begin(), v.end());
  const size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

namespace {

// Acklam's rational approximation of the standard normal quantile.
double normal_quantile(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;
  if (p <= 0.0) return -37.0;
  if (p >= 1.0) return 37.0;
  if (p < plow) {
    const double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    const double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  const double q = p - 0.5;
  const double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

}  // namespace

AggregateRow bootstrap_median(std::span<const double> values,
                              const BootstrapOptions& options) {
  AggregateRow row;
  row.count = values.size();
  row.median = median(values);

  std::mt19937_64 rng(options.seed);
  std::uniform_int_distribution<size_t> pick(0, values.size() - 1);
  std::vector<double> resampled(options.resamples);
  std::vector<double> sample(values.size());
  for (int b = 0; b < options.resamples; ++b) {
    for (auto& v : sample) v = values[pick(rng)];
    resampled[static_cast<size_t>(b)] = median(sample);
  }
  std::sort(resampled.begin(), resampled.end());

  // Bias correction.
  const auto below = static_cast<double>(
      std::lower_bound(resampled.begin(), resampled.end(), row.median) -
      resampled.begin());
  const double z0 =
      normal_quantile(std::clamp(below / options.resamples, 1e-9, 1.0 - 1e-9));
  const double alpha = 1.0 - options.confidence;
  const double z_lo = normal_quantile(alpha / 2.0);
  const double z_hi = normal_quantile(1.0 - alpha / 2.0);
  auto percentile = [&](double p) {
    const double idx =
        std::clamp(p, 0.0, 1.0) * (options.resamples - 1);
    return resampled[static_cast<size_t>(std::llround(idx))];
  };
  row.ci_low = percentile(normal_cdf(2.0 * z0 + z_lo));
  row.ci_high = percentile(normal_cdf(2.0 * z0 + z_hi));
  if (row.ci_low > row.median) row.ci_low = row.median;
  if (row.ci_high < row.median) row.ci_high = row.median;
  return row;
}

namespace {

double metric_value(const MetricRecord& r, const std::string& metric) {
  if (metric == "itd_error_s") return r.itd_error_s;
  if (metric == "ild_error_db") return r.ild_error_db;
  if (metric == "iacc_error") return r.iacc_error;
  if (metric == "psd_phon") return r.psd_phon;
  if (metric == "re_mag") return r.re_mag;
  if (metric == "rv_mag") return r.rv_mag;
  if (metric == "spread_deg") return r.spread_deg;
  throw ConfigError("unknown metric '" + metric + "'");
}

std::string group_key(const MetricRecord& r, const std::string& group_by) {
  if (group_by == "system") return r.technique + "/" + r.layout;
  if (group_by == "technique") return r.technique;
  if (group_by == "layout") return r.layout;
  if (group_by == "position") {
    std::ostringstream os;
    os << '(' << r.azimuth_deg << ", " << r.elevation_deg << ')';
    return os.str();
  }
  throw ConfigError("unknown group_by '" + group_by + "'");
}

}  // namespace

std::vector<AggregateRow> aggregate(std::span<const MetricRecord> records,
                                    const std::string& metric,
                                    const std::string& group_by,
                                    const BootstrapOptions& options) {
  std::vector<std::pair<std::string, std::vector<double>>> groups;
  for (const auto& r : records) {
    const std::string key = group_key(r, group_by);
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const auto& g) { return g.first == key; });
    if (it == groups.end()) {
      groups.push_back({key, {}});
      it = groups.end() - 1;
    }
    it->second.push_back(metric_value(r, metric));
  }
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });

  std::vector<AggregateRow> rows;
  for (const auto& [key, values] : groups) {
    if (values.size() < 3) continue;  // undersized group skipped
    AggregateRow row = bootstrap_median(values, options);
    row.group = key;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_aggregate_csv(const std::filesystem::path& path,
                         std::span<const AggregateRow> rows,
                         const std::string& metric,
                         const std::string& group_by) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << "# sfeval summary v1 metric=" << metric << " group_by=" << group_by
     << "\n";
  os << "group,count,median,ci_low,ci_high\n";
  for (const auto& r : rows)
    os << r.group << ',' << r.count << ',' << format_double(r.median) << ','
       << format_double(r.ci_low) << ',' << format_double(r.ci_high) << "\n";
}

}  // namespace sfeval
