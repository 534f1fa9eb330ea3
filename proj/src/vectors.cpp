#include "sfeval/vectors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "sfeval/error.hpp"
#include "sfeval/sh.hpp"

namespace sfeval {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kRadToDeg = 180.0 / kPi;
}  // namespace

std::string_view to_string(Technique t) {
  return t == Technique::ambisonics ? "ambisonics" : "swf";
}

Technique technique_from_string(std::string_view name) {
  if (name == "ambisonics") return Technique::ambisonics;
  if (name == "swf") return Technique::swf;
  throw ConfigError("unknown technique '" + std::string(name) + "'");
}

std::string_view to_string(SpreadFormula f) {
  switch (f) {
    case SpreadFormula::arccos_re: return "arccos_re";
    case SpreadFormula::frank: return "frank";
    default: return "energy_variance";
  }
}

SpreadFormula spread_formula_from_string(std::string_view name) {
  if (name == "arccos_re") return SpreadFormula::arccos_re;
  if (name == "frank") return SpreadFormula::frank;
  if (name == "energy_variance") return SpreadFormula::energy_variance;
  throw ConfigError("unknown spread formula '" + std::string(name) + "'");
}

std::string_view to_string(VectorMode m) {
  return m == VectorMode::broadband_rms ? "broadband_rms" : "split_band";
}

VectorMode vector_mode_from_string(std::string_view name) {
  if (name == "broadband_rms") return VectorMode::broadband_rms;
  if (name == "split_band") return VectorMode::split_band;
  throw ConfigError("unknown vector mode '" + std::string(name) + "'");
}

namespace {

double spread_from(const VectorAnalysis& va, std::span<const double> gains,
                   const LoudspeakerLayout& layout, SpreadFormula formula) {
  const double re = std::clamp(va.re_mag, 0.0, 1.0);
  switch (formula) {
    case SpreadFormula::arccos_re:
      return 2.0 * std::acos(re) * kRadToDeg;
    case SpreadFormula::frank:
      return 186.4 * (1.0 - re) + 10.7;
    case SpreadFormula::energy_variance: {
      if (va.energy <= 0.0) return 0.0;
      const Vec3 axis = va.re_mag > 1e-12
                            ? va.energy_vector / va.re_mag
                            : Vec3{1.0, 0.0, 0.0};
      double acc = 0.0;
      for (size_t i = 0; i < gains.size(); ++i) {
        const double w = gains[i] * gains[i];
        if (w == 0.0) continue;
        const double ang = angle_between_deg(axis, layout.units[i]) / kRadToDeg;
        acc += w * ang * ang;
      }
      return 2.0 * std::sqrt(acc / va.energy) * kRadToDeg;
    }
  }
  return 0.0;
}

}  // namespace

VectorAnalysis analyze_gains(std::span<const double> gains,
                             const LoudspeakerLayout& layout,
                             SpreadFormula spread) {
  if (static_cast<int>(gains.size()) != layout.size())
    throw ShapeError("analyze_gains: " + std::to_string(gains.size()) +
                     " gains for layout of size " +
                     std::to_string(layout.size()));
  VectorAnalysis va;
  Vec3 vel{}, en{};
  for (size_t i = 0; i < gains.size(); ++i) {
    const double g = gains[i];
    va.pressure += g;
    va.energy += g * g;
    vel += g * layout.units[i];
    en += g * g * layout.units[i];
  }
  if (va.energy <= 0.0)
    throw MetricError("analyze_gains: all-zero gain vector");

  va.energy_vector = en / va.energy;
  va.re_mag = va.energy_vector.norm();
  if (std::abs(va.pressure) > 1e-12 * std::sqrt(va.energy)) {
    va.velocity = vel / va.pressure;
    va.rv_mag = va.velocity.norm();
    va.rv_defined = true;
  } else {
    va.velocity = Vec3{};
    va.rv_mag = 0.0;
    va.rv_defined = false;
  }
  va.spread_deg = spread_from(va, gains, layout, spread);
  return va;
}

PinkBandSplit pink_band_split(double crossover_hz) {
  // LR4 magnitude pair in analog form: |L| = 1/(1+u^4), |H| = u^4/(1+u^4),
  // u = f / crossover; |L| + |H| = 1 (the bands are phase matched).
  // Pink weighting S(f) ~ 1/f over 20 Hz .. 20 kHz, integrated on a log
  // axis where it becomes uniform.
  const int n = 4096;
  const double lo = std::log(20.0), hi = std::log(20000.0);
  PinkBandSplit split;
  double total = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double t = lo + (hi - lo) * i / n;
    const double f = std::exp(t);
    const double u4 = std::pow(f / crossover_hz, 4.0);
    const double l = 1.0 / (1.0 + u4);
    const double h = u4 / (1.0 + u4);
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;  // trapezoid
    split.low += w * l * l;
    split.high += w * h * h;
    split.cross += w * l * h;
    total += w;
  }
  split.low /= total;
  split.high /= total;
  split.cross /= total;
  return split;
}

VectorAnalysis analyze_rendering(Technique technique,
                                 const LoudspeakerLayout& layout,
                                 const Direction& d,
                                 const RenderAnalysisOptions& options) {
  if (technique == Technique::swf) {
    const auto h = build_octahedron_hierarchy(options.swf_finest_level);
    const Eigen::VectorXd g = swf_render_gains(h, d, layout, options.lifting);
    return analyze_gains(std::span<const double>(g.data(),
                                                 static_cast<size_t>(g.size())),
                         layout, options.spread);
  }

  const int order = layout_order(layout);
  const Eigen::VectorXd g_low =
      decoder_pinv(layout, order).decode_direction(d);
  const Eigen::VectorXd g_high =
      decoder_maxre(layout, order).decode_direction(d);

  if (options.mode == VectorMode::split_band) {
    VectorAnalysis low = analyze_gains(
        std::span<const double>(g_low.data(), static_cast<size_t>(g_low.size())),
        layout, options.spread);
    VectorAnalysis high = analyze_gains(
        std::span<const double>(g_high.data(),
                                static_cast<size_t>(g_high.size())),
        layout, options.spread);
    VectorAnalysis out = high;  // energy quantities from the max-rE band
    out.pressure = low.pressure;
    out.velocity = low.velocity;
    out.rv_mag = low.rv_mag;
    out.rv_defined = low.rv_defined;
    return out;
  }

  // Broadband RMS amplitude of each loudspeaker feed under pink weighting.
  const PinkBandSplit split = pink_band_split(options.crossover_hz);
  std::vector<double> rms(static_cast<size_t>(layout.size()));
  for (int i = 0; i < layout.size(); ++i) {
    const double gl = g_low(i);
    const double gh = g_high(i);
    const double power = split.low * gl * gl + split.high * gh * gh +
                         2.0 * split.cross * gl * gh;
    rms[static_cast<size_t>(i)] = std::sqrt(std::max(0.0, power));
  }
  return analyze_gains(rms, layout, options.spread);
}

}  // namespace sfeval
