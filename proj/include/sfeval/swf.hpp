#pragma once

#include <filesystem>
#include <span>
#include <string_view>

#include "sfeval/geometry.hpp"
#include "sfeval/signal.hpp"

namespace sfeval {

/// Lifting filters for the mesh wavelet transform. Both split level-k
/// samples into even (coarse vertices) and odd (vertices inserted at
/// level k) parts and are invertible by construction.
///
///  vertex_smoothing (default): the coarse sample is a constant-preserving
///    local average taken before prediction,
///        s_i = v_i / 2 + (1 / (2 deg_i)) * sum of incident odd samples,
///    and details are the odd residuals against the smoothed endpoints,
///        d_j = v_j - (s_a + s_b) / 2.
///    A sample concentrated on a coarse vertex stays on that vertex at
///    every coarser level, which keeps vertex-aligned sources on a single
///    loudspeaker after truncation.
///
///  detail_update: interpolating predict first, d_j = v_j - (v_a + v_b)/2,
///    then s_i = v_i + (1 / (2 deg_i)) * sum of incident odd details.
enum class LiftingScheme { vertex_smoothing, detail_update };

std::string_view to_string(LiftingScheme scheme);
LiftingScheme lifting_scheme_from_string(std::string_view name);

/// Critically sampled wavelet representation of per-vertex signals.
/// Row i holds the scaling coefficients when i < V(0) and the detail
/// coefficients for the level where vertex i was introduced otherwise.
struct WaveletCoeffs {
  int finest_level = 0;
  LiftingScheme scheme = LiftingScheme::vertex_smoothing;
  double sample_rate = 48000.0;
  Eigen::MatrixXd values;  // V(finest_level) rows

  int coefficient_count() const { return static_cast<int>(values.rows()); }
};

/// Places a mono source at d on the finest mesh by spherical barycentric
/// (tri-linear) amplitude weights; all other vertex rows are zero.
MultichannelSignal swf_encode(const TriMeshHierarchy& h, const Direction& d,
                              std::span<const double> s, double sample_rate);

/// Forward lifting transform, finest level down to the scaling level.
WaveletCoeffs swf_analysis(const TriMeshHierarchy& h,
                           const MultichannelSignal& vertex_signals,
                           LiftingScheme scheme = LiftingScheme::vertex_smoothing);

/// Inverse lifting up to target_level. Details stored for levels above
/// target_level are ignored (truncation); output has V(target_level) rows.
MultichannelSignal swf_synthesis(const TriMeshHierarchy& h,
                                 const WaveletCoeffs& c, int target_level);

/// Zeroes all detail coefficients above `level`; count is unchanged.
WaveletCoeffs swf_truncate(const WaveletCoeffs& c, int level,
                           const TriMeshHierarchy& h);

/// Mesh level a layout is rendered from: the octahedron maps to level 0
/// directly; other layouts use the finest level whose vertex count does
/// not exceed layout size + 16 (tdesign24 -> 1, lebedev50 -> 2).
int swf_target_level(const TriMeshHierarchy& h, const LoudspeakerLayout& layout);

/// Full render: tri-linear encode at the finest mesh of h, analysis,
/// synthesis at the layout's level, then barycentric remap of each
/// mesh-vertex feed onto the layout triangulation (identity for the
/// octahedron).
MultichannelSignal swf_render(const TriMeshHierarchy& h, const Direction& d,
                              std::span<const double> s, double sample_rate,
                              const LoudspeakerLayout& layout,
                              LiftingScheme scheme = LiftingScheme::vertex_smoothing);

/// Broadband per-loudspeaker gains of a unit source (the render applied to
/// a single unit sample), used by the vector analysis.
Eigen::VectorXd swf_render_gains(const TriMeshHierarchy& h, const Direction& d,
                                 const LoudspeakerLayout& layout,
                                 LiftingScheme scheme = LiftingScheme::vertex_smoothing);

/// Remap matrix (layout.size() x V(level)): barycentric gains of every
/// mesh-vertex direction over the layout triangulation.
Eigen::MatrixXd swf_remap_matrix(const TriMeshHierarchy& h, int level,
                                 const LoudspeakerLayout& layout);

/// Debug dump: one "level,vertex_index,value" row per coefficient, where
/// value is the RMS over frames.
void write_wavelet_csv(const std::filesystem::path& path,
                       const WaveletCoeffs& c, const TriMeshHierarchy& h);

}  // namespace sfeval
