#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "sfeval/geometry.hpp"
#include "sfeval/signal.hpp"

namespace sfeval {

/// Real spherical harmonics at d, ACN channel order, N3D normalisation,
/// Condon-Shortley phase excluded. (order+1)^2 values.
std::vector<double> sh_eval(int order, const Direction& d);

/// Matrix of sh_eval columns, (order+1)^2 x directions.
Eigen::MatrixXd sh_matrix(int order, const std::vector<Direction>& dirs);

/// Per-order max-rE weights g_n = P_n(cos(137.9 deg / (N + 1.51))).
std::vector<double> max_re_weights(int order);

/// Legendre polynomial P_n(x).
double legendre_pn(int n, double x);

/// Ambisonic signal: (order+1)^2 channels, ACN order, N3D normalisation.
struct ShSignal {
  int order = 0;
  MultichannelSignal channels;
};

/// Encodes a mono signal as a plane wave from d.
ShSignal encode_plane_wave(int order, const Direction& d,
                           std::span<const double> s, double sample_rate);

enum class DecoderBand { low, high };

struct DecoderMatrix {
  std::string layout_name;
  int order = 0;
  DecoderBand band = DecoderBand::low;
  Eigen::MatrixXd gains;  // loudspeakers x (order+1)^2

  /// Loudspeaker gains for a unit plane wave from d.
  Eigen::VectorXd decode_direction(const Direction& d) const;
};

/// Moore-Penrose pseudo-inverse decoder (low band). Requires
/// layout.size() >= (order+1)^2.
DecoderMatrix decoder_pinv(const LoudspeakerLayout& layout, int order);

/// Pseudo-inverse decoder with per-order max-rE weighting (high band),
/// rescaled so the decoded energy of a front-centre source matches the
/// low-band decoder.
DecoderMatrix decoder_maxre(const LoudspeakerLayout& layout, int order);

/// Ambisonics order used with each built-in layout (octahedron 1,
/// tdesign24 3, lebedev50 5).
int layout_order(const LoudspeakerLayout& layout);

/// Dual-band decode: a phase-matched 4th-order Linkwitz-Riley crossover
/// splits the signal at crossover_hz; the low band goes through the
/// pseudo-inverse decoder and the high band through the max-rE decoder.
MultichannelSignal dual_band_decode(const ShSignal& x,
                                    const LoudspeakerLayout& layout,
                                    double crossover_hz = 800.0);

/// Lebedev-50 quadrature (order-11 rule): directions plus weights summing
/// to one. Exact for spherical polynomials up to degree 11.
struct SphericalQuadrature {
  std::vector<Direction> directions;
  std::vector<double> weights;
};
SphericalQuadrature lebedev50_quadrature();

/// ACN/SN3D (AmbiX) WAV interface; channel count must be a perfect square.
/// Converted to/from the internal N3D representation.
ShSignal read_ambisonic_wav(const std::filesystem::path& path);
void write_ambisonic_wav(const std::filesystem::path& path, const ShSignal& x);

}  // namespace sfeval
