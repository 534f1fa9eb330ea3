#include "sfeval/binaural.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "sfeval/dsp.hpp"
#include "sfeval/error.hpp"
#include "sfeval/wav.hpp"

namespace sfeval {

namespace {
constexpr double kPi = std::numbers::pi;
}

const HrirSet::Entry& HrirSet::nearest(const Direction& d) const {
  const Vec3 u = d.unit();
  size_t best = 0;
  double best_dot = -2.0;
  for (size_t i = 0; i < entries_.size(); ++i) {
    const double dot = u.dot(entries_[i].unit);
    if (dot > best_dot) {
      best_dot = dot;
      best = i;
    }
  }
  return entries_[best];
}

double HrirSet::nearest_distance_deg(const Direction& d) const {
  return angle_between_deg(d.unit(), nearest(d).unit);
}

HrirSet load_hrir_set(const std::filesystem::path& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in)
    throw IngestError("cannot open HRIR manifest " + manifest_path.string());
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw IngestError("HRIR manifest " + manifest_path.string() +
                      " is not valid JSON: " + e.what());
  }
  if (!manifest.contains("entries") || !manifest["entries"].is_array() ||
      manifest["entries"].empty())
    throw IngestError("HRIR manifest " + manifest_path.string() +
                      " has no entries");

  HrirSet set;
  set.name_ = manifest.value("name", manifest_path.stem().string());
  const auto base = manifest_path.parent_path();
  for (const auto& item : manifest["entries"]) {
    if (!item.contains("azimuth") || !item.contains("elevation") ||
        !item.contains("wav"))
      throw IngestError("HRIR manifest entry missing azimuth/elevation/wav");
    const auto wav_path = base / item["wav"].get<std::string>();
    BinauralPair ir;
    try {
      ir = read_stereo_wav(wav_path);
    } catch (const Error& e) {
      throw IngestError("HRIR entry '" + wav_path.string() +
                        "': " + e.what());
    }
    if (set.entries_.empty()) {
      set.sample_rate_ = ir.sample_rate;
      set.ir_length_ = static_cast<long>(ir.left.size());
    } else if (ir.sample_rate != set.sample_rate_) {
      throw IngestError("HRIR entry '" + wav_path.string() +
                        "' sample rate differs from the rest of the set");
    } else if (static_cast<long>(ir.left.size()) != set.ir_length_) {
      throw IngestError("HRIR entry '" + wav_path.string() +
                        "' length differs from the rest of the set");
    }
    HrirSet::Entry entry;
    entry.direction =
        Direction::from_degrees(item["azimuth"].get<double>(),
                                item["elevation"].get<double>());
    entry.unit = entry.direction.unit();
    entry.left = std::move(ir.left);
    entry.right = std::move(ir.right);
    set.entries_.push_back(std::move(entry));
  }

  // Coverage statistic over a coarse probe grid.
  double worst = 0.0;
  for (const auto& probe : fibonacci_grid(500))
    worst = std::max(worst, set.nearest_distance_deg(probe));
  set.max_gap_deg_ = worst;
  return set;
}

BinauralPair render_direct_reference(std::span<const double> s,
                                     double sample_rate, const Direction& d,
                                     const HrirSet& hrirs) {
  if (sample_rate != hrirs.sample_rate())
    throw ConfigError("render_direct_reference: signal rate " +
                      std::to_string(sample_rate) + " != HRIR rate " +
                      std::to_string(hrirs.sample_rate()));
  const auto& entry = hrirs.nearest(d);
  BinauralPair out;
  out.sample_rate = sample_rate;
  out.left = dsp::convolve(s, entry.left);
  out.right = dsp::convolve(s, entry.right);
  return out;
}

BinauralPair render_virtual_loudspeakers(const MultichannelSignal& feeds,
                                         const LoudspeakerLayout& layout,
                                         const HrirSet& hrirs) {
  if (feeds.channels() != layout.size())
    throw ShapeError("render_virtual_loudspeakers: " +
                     std::to_string(feeds.channels()) + " feeds for layout '" +
                     layout.name + "' of size " +
                     std::to_string(layout.size()));
  if (feeds.sample_rate != hrirs.sample_rate())
    throw ConfigError("render_virtual_loudspeakers: sample rate mismatch");

  const size_t out_len =
      static_cast<size_t>(feeds.frames()) + static_cast<size_t>(hrirs.ir_length()) - 1;
  BinauralPair out;
  out.sample_rate = feeds.sample_rate;
  out.left.assign(out_len, 0.0);
  out.right.assign(out_len, 0.0);
  for (int i = 0; i < layout.size(); ++i) {
    const auto feed = feeds.channel(i);
    if (std::all_of(feed.begin(), feed.end(), [](double v) { return v == 0.0; }))
      continue;
    const auto& entry = hrirs.nearest(layout.directions[static_cast<size_t>(i)]);
    const auto l = dsp::convolve(feed, entry.left);
    const auto r = dsp::convolve(feed, entry.right);
    for (size_t t = 0; t < l.size(); ++t) {
      out.left[t] += l[t];
      out.right[t] += r[t];
    }
  }
  return out;
}

BinauralPair normalize_peak(const BinauralPair& p, double target_dbfs) {
  const double peak = std::max(dsp::peak_abs(p.left), dsp::peak_abs(p.right));
  if (peak <= 0.0)
    throw MetricError("normalize_peak: silent input");
  const double scale = std::pow(10.0, target_dbfs / 20.0) / peak;
  BinauralPair out;
  out.sample_rate = p.sample_rate;
  out.left = p.left;
  out.right = p.right;
  for (auto& v : out.left) v *= scale;
  for (auto& v : out.right) v *= scale;
  return out;
}

// ---------------------------------------------------------------------------
// Spherical head model
// ---------------------------------------------------------------------------

namespace {

// Windowed-sinc fractional delay of a unit impulse.
void add_delayed_impulse(std::vector<double>& ir, double delay_samples,
                         double gain) {
  constexpr int kHalfTaps = 16;
  const int center = static_cast<int>(std::floor(delay_samples));
  for (int k = -kHalfTaps; k <= kHalfTaps; ++k) {
    const int idx = center + k;
    if (idx < 0 || idx >= static_cast<int>(ir.size())) continue;
    const double t = static_cast<double>(idx) - delay_samples;
    const double sinc = t == 0.0 ? 1.0 : std::sin(kPi * t) / (kPi * t);
    const double window = 0.5 + 0.5 * std::cos(kPi * t / (kHalfTaps + 1));
    ir[static_cast<size_t>(idx)] += gain * sinc * window;
  }
}

// One ear of the Brown-Duda style model: Woodworth arrival time plus a
// first-order head-shadow shelf driven by the angle to the ear axis.
std::vector<double> ear_response(double theta_rad, double sample_rate,
                                 const SphericalHeadOptions& opt) {
  const double a_over_c = opt.head_radius_m / opt.speed_of_sound;
  double delay_s;
  if (theta_rad <= kPi / 2.0)
    delay_s = -a_over_c * std::cos(theta_rad);
  else
    delay_s = a_over_c * (theta_rad - kPi / 2.0);
  // Keep delays positive and leave room for the sinc tail.
  const double base_delay = 2.0 * a_over_c * sample_rate + 24.0;

  std::vector<double> ir(static_cast<size_t>(opt.ir_length), 0.0);
  add_delayed_impulse(ir, base_delay + delay_s * sample_rate, 1.0);

  // Shadow shelf H(s) = (alpha s + w0) / (s + w0), w0 = 2c/a;
  // alpha in [0.1, 2] from the incidence angle.
  const double alpha =
      1.05 + 0.95 * std::cos(theta_rad * 180.0 / 150.0);
  const double w0 = 2.0 * opt.speed_of_sound / opt.head_radius_m;
  const double wd = w0 / (2.0 * sample_rate);  // bilinear, no prewarp needed
  dsp::Biquad shelf;
  const double norm = 1.0 + wd;
  shelf.b0 = (alpha + wd) / norm;
  shelf.b1 = (wd - alpha) / norm;
  shelf.b2 = 0.0;
  shelf.a1 = (wd - 1.0) / norm;
  shelf.a2 = 0.0;
  dsp::BiquadCascade cascade;
  cascade.sections.push_back(shelf);
  return cascade.filter(ir);
}

}  // namespace

BinauralPair spherical_head_hrir(const Direction& d, double sample_rate,
                                 const SphericalHeadOptions& options) {
  const Vec3 u = d.unit();
  const Vec3 left_ear{0.0, 1.0, 0.0};
  const Vec3 right_ear{0.0, -1.0, 0.0};
  const double theta_l = std::acos(std::clamp(u.dot(left_ear), -1.0, 1.0));
  const double theta_r = std::acos(std::clamp(u.dot(right_ear), -1.0, 1.0));
  BinauralPair out;
  out.sample_rate = sample_rate;
  out.left = ear_response(theta_l, sample_rate, options);
  out.right = ear_response(theta_r, sample_rate, options);
  return out;
}

void write_spherical_head_set(const std::filesystem::path& out_dir,
                              std::span<const Direction> directions,
                              double sample_rate,
                              const SphericalHeadOptions& options) {
  std::filesystem::create_directories(out_dir);
  nlohmann::json manifest;
  manifest["name"] = "spherical-head";
  manifest["sample_rate"] = sample_rate;
  manifest["entries"] = nlohmann::json::array();
  int index = 0;
  for (const auto& d : directions) {
    char name[32];
    std::snprintf(name, sizeof(name), "p%04d.wav", index++);
    write_stereo_wav(out_dir / name, spherical_head_hrir(d, sample_rate, options),
                     WavFormat::float32);
    manifest["entries"].push_back({{"azimuth", d.azimuth_deg()},
                                   {"elevation", d.elevation_deg()},
                                   {"wav", name}});
  }
  std::ofstream os(out_dir / "manifest.json");
  if (!os)
    throw IngestError("cannot write manifest in " + out_dir.string());
  os << manifest.dump(1) << '\n';
}

std::vector<Direction> default_hrir_directions() {
  std::vector<Direction> dirs;
  auto add_unique = [&dirs](const Direction& d) {
    for (const auto& existing : dirs)
      if (existing.angle_to(d) < 1e-6) return;
    dirs.push_back(d);
  };
  for (const char* name : {"octahedron", "tdesign24", "lebedev50"})
    for (const auto& d : load_layout(name).directions) add_unique(d);
  const double positions[][2] = {{0, 0},  {30, 0},  {90, 0},  {135, 0},
                                 {180, 0}, {0, 45},  {0, 90},  {0, 135},
                                 {45, 45}, {135, 45}};
  for (const auto& p : positions)
    add_unique(Direction::from_degrees(p[0], p[1]));
  return dirs;
}

}  // namespace sfeval
