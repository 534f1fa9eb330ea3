#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "sfeval/geometry.hpp"
#include "sfeval/signal.hpp"

namespace sfeval {

/// A set of head-related impulse responses on a spherical grid with
/// nearest-neighbour lookup. Loaded from a JSON manifest:
///   { "name": "...", "sample_rate": 48000,
///     "entries": [ {"azimuth": 0, "elevation": 0, "wav": "p000.wav"}, ... ] }
/// Each entry references a stereo WAV (left, right); all entries must share
/// one sample rate and length.
class HrirSet {
 public:
  struct Entry {
    Direction direction;
    Vec3 unit;
    std::vector<double> left;
    std::vector<double> right;
  };

  double sample_rate() const { return sample_rate_; }
  size_t size() const { return entries_.size(); }
  long ir_length() const { return ir_length_; }
  const std::string& name() const { return name_; }

  /// Largest nearest-neighbour distance over a probe grid, in degrees;
  /// recorded at load time (the reference measurement grids stay under 2).
  double max_gap_deg() const { return max_gap_deg_; }

  const Entry& nearest(const Direction& d) const;
  double nearest_distance_deg(const Direction& d) const;

  friend HrirSet load_hrir_set(const std::filesystem::path& manifest_path);

 private:
  std::string name_;
  double sample_rate_ = 0.0;
  long ir_length_ = 0;
  double max_gap_deg_ = 0.0;
  std::vector<Entry> entries_;
};

HrirSet load_hrir_set(const std::filesystem::path& manifest_path);

/// Reference rendering: s convolved with the nearest-neighbour HRIR pair
/// for d (full linear convolution).
BinauralPair render_direct_reference(std::span<const double> s,
                                     double sample_rate, const Direction& d,
                                     const HrirSet& hrirs);

/// Virtual-loudspeaker rendering: each feed convolved with the HRIR of its
/// loudspeaker direction, summed per ear.
BinauralPair render_virtual_loudspeakers(const MultichannelSignal& feeds,
                                         const LoudspeakerLayout& layout,
                                         const HrirSet& hrirs);

/// Scales both ears jointly so the larger channel peak sits at target_dbfs.
BinauralPair normalize_peak(const BinauralPair& p, double target_dbfs = -1.0);

struct SphericalHeadOptions {
  double head_radius_m = 0.0875;
  double speed_of_sound = 343.0;
  int ir_length = 256;
};

/// Analytic spherical-head HRIR (Woodworth arrival times plus a one-pole
/// head-shadow filter), used for self-contained end-to-end runs and as the
/// default data for the acceptance sweep. Left ear at azimuth +90.
BinauralPair spherical_head_hrir(const Direction& d, double sample_rate,
                                 const SphericalHeadOptions& options = {});

/// Writes a spherical-head HRIR set (manifest + per-direction stereo WAVs)
/// covering the given directions.
void write_spherical_head_set(const std::filesystem::path& out_dir,
                              std::span<const Direction> directions,
                              double sample_rate,
                              const SphericalHeadOptions& options = {});

/// Directions needed by the default experiment grid: the three built-in
/// layouts plus the standard panning positions.
std::vector<Direction> default_hrir_directions();

}  // namespace sfeval
