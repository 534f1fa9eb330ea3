#pragma once

#include <span>
#include <string_view>

#include "sfeval/geometry.hpp"
#include "sfeval/swf.hpp"

namespace sfeval {

enum class Technique { ambisonics, swf };
std::string_view to_string(Technique t);
Technique technique_from_string(std::string_view name);

/// Source-spread estimators derived from the energy vector.
enum class SpreadFormula {
  arccos_re,        // 2 * acos(|rE|), degrees
  frank,            // 186.4 * (1 - |rE|) + 10.7
  energy_variance,  // 2 * energy-weighted RMS angle about the rE direction
};
std::string_view to_string(SpreadFormula f);
SpreadFormula spread_formula_from_string(std::string_view name);

/// How broadband loudspeaker gains are reduced to one vector analysis for
/// the dual-band Ambisonics decoders.
///   broadband_rms: per-loudspeaker RMS amplitude of the two bands mixed
///     with a pink-weighted Linkwitz-Riley split (the analysis sees the
///     same broadband feeds the listener would).
///   split_band: velocity quantities from the low-band (pseudo-inverse)
///     gains, energy quantities from the high-band (max-rE) gains.
enum class VectorMode { broadband_rms, split_band };
std::string_view to_string(VectorMode m);
VectorMode vector_mode_from_string(std::string_view name);

struct VectorAnalysis {
  double pressure = 0.0;  // sum of gains
  double energy = 0.0;    // sum of squared gains
  Vec3 velocity{};        // rV
  Vec3 energy_vector{};   // rE
  double rv_mag = 0.0;
  double re_mag = 0.0;
  double spread_deg = 0.0;
  bool rv_defined = true;  // false when pressure vanished
};

/// Gerzon analysis of one broadband gain vector.
VectorAnalysis analyze_gains(std::span<const double> gains,
                             const LoudspeakerLayout& layout,
                             SpreadFormula spread = SpreadFormula::arccos_re);

struct RenderAnalysisOptions {
  VectorMode mode = VectorMode::broadband_rms;
  SpreadFormula spread = SpreadFormula::arccos_re;
  LiftingScheme lifting = LiftingScheme::vertex_smoothing;
  int swf_finest_level = 2;
  double crossover_hz = 800.0;
};

/// Vector analysis of a technique/layout pair reproducing a unit source
/// from d. SWF gains are frequency independent; Ambisonics gains combine
/// the two decoder bands according to options.mode.
VectorAnalysis analyze_rendering(Technique technique,
                                 const LoudspeakerLayout& layout,
                                 const Direction& d,
                                 const RenderAnalysisOptions& options = {});

/// Fractions of pink-noise (1/f) power under the squared low, squared high
/// and cross Linkwitz-Riley 4 magnitude responses over 20 Hz - 20 kHz,
/// normalised so low + 2*cross + high = 1.
struct PinkBandSplit {
  double low = 0.0;
  double high = 0.0;
  double cross = 0.0;
};
PinkBandSplit pink_band_split(double crossover_hz);

}  // namespace sfeval
