#include "sfeval/swf.hpp"

#include <cmath>
#include <fstream>

#include "sfeval/error.hpp"

namespace sfeval {

std::string_view to_string(LiftingScheme scheme) {
  return scheme == LiftingScheme::vertex_smoothing ? "vertex_smoothing"
                                                   : "detail_update";
}

LiftingScheme lifting_scheme_from_string(std::string_view name) {
  if (name == "vertex_smoothing") return LiftingScheme::vertex_smoothing;
  if (name == "detail_update") return LiftingScheme::detail_update;
  throw ConfigError("unknown lifting scheme '" + std::string(name) + "'");
}

MultichannelSignal swf_encode(const TriMeshHierarchy& h, const Direction& d,
                              std::span<const double> s, double sample_rate) {
  const TriMesh& mesh = h.finest();
  const auto loc = locate_triangle(mesh, d);
  const auto& tri = mesh.triangles[static_cast<size_t>(loc.triangle)];

  MultichannelSignal out;
  out.sample_rate = sample_rate;
  out.samples = Eigen::MatrixXd::Zero(static_cast<long>(mesh.vertices.size()),
                                      static_cast<long>(s.size()));
  for (int corner = 0; corner < 3; ++corner) {
    const double w = loc.weights[static_cast<size_t>(corner)];
    if (w == 0.0) continue;
    for (long t = 0; t < static_cast<long>(s.size()); ++t)
      out.samples(tri[static_cast<size_t>(corner)], t) +=
          w * s[static_cast<size_t>(t)];
  }
  return out;
}

namespace {

// One analysis step, level k -> k-1, in place on the first V(k) rows.
void analysis_step(const HierarchyLevel& level, int coarse_count,
                   LiftingScheme scheme, Eigen::MatrixXd& v) {
  const int new_count = static_cast<int>(level.parents.size());
  if (scheme == LiftingScheme::vertex_smoothing) {
    // Smooth evens from odd samples, then predict odds from smoothed evens.
    Eigen::MatrixXd smoothed =
        0.5 * v.block(0, 0, coarse_count, v.cols());
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      const auto odd = v.row(coarse_count + j);
      smoothed.row(a) += odd / (2.0 * level.even_degree[static_cast<size_t>(a)]);
      smoothed.row(b) += odd / (2.0 * level.even_degree[static_cast<size_t>(b)]);
    }
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      v.row(coarse_count + j) -= 0.5 * (smoothed.row(a) + smoothed.row(b));
    }
    v.block(0, 0, coarse_count, v.cols()) = smoothed;
  } else {
    // Interpolating predict, then update evens from the details.
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      v.row(coarse_count + j) -= 0.5 * (v.row(a) + v.row(b));
    }
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      const auto detail = v.row(coarse_count + j);
      v.row(a) += detail / (2.0 * level.even_degree[static_cast<size_t>(a)]);
      v.row(b) += detail / (2.0 * level.even_degree[static_cast<size_t>(b)]);
    }
  }
}

// One synthesis step, level k-1 -> k, in place on the first V(k) rows.
void synthesis_step(const HierarchyLevel& level, int coarse_count,
                    LiftingScheme scheme, Eigen::MatrixXd& v) {
  const int new_count = static_cast<int>(level.parents.size());
  if (scheme == LiftingScheme::vertex_smoothing) {
    // Un-predict odds against the smoothed evens, then un-smooth.
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      v.row(coarse_count + j) += 0.5 * (v.row(a) + v.row(b));
    }
    Eigen::MatrixXd evens = v.block(0, 0, coarse_count, v.cols());
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      const auto odd = v.row(coarse_count + j);
      evens.row(a) -= odd / (2.0 * level.even_degree[static_cast<size_t>(a)]);
      evens.row(b) -= odd / (2.0 * level.even_degree[static_cast<size_t>(b)]);
    }
    v.block(0, 0, coarse_count, v.cols()) = 2.0 * evens;
  } else {
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      const auto detail = v.row(coarse_count + j);
      v.row(a) -= detail / (2.0 * level.even_degree[static_cast<size_t>(a)]);
      v.row(b) -= detail / (2.0 * level.even_degree[static_cast<size_t>(b)]);
    }
    for (int j = 0; j < new_count; ++j) {
      const auto [a, b] = level.parents[static_cast<size_t>(j)];
      v.row(coarse_count + j) += 0.5 * (v.row(a) + v.row(b));
    }
  }
}

}  // namespace

WaveletCoeffs swf_analysis(const TriMeshHierarchy& h,
                           const MultichannelSignal& vertex_signals,
                           LiftingScheme scheme) {
  const int finest = h.max_level();
  if (vertex_signals.channels() != h.vertex_count(finest))
    throw ShapeError("swf_analysis: expected " +
                     std::to_string(h.vertex_count(finest)) + " rows, got " +
                     std::to_string(vertex_signals.channels()));
  WaveletCoeffs c;
  c.finest_level = finest;
  c.scheme = scheme;
  c.sample_rate = vertex_signals.sample_rate;
  c.values = vertex_signals.samples;
  for (int k = finest; k >= 1; --k)
    analysis_step(h.level(k), h.vertex_count(k - 1), scheme, c.values);
  return c;
}

MultichannelSignal swf_synthesis(const TriMeshHierarchy& h,
                                 const WaveletCoeffs& c, int target_level) {
  if (target_level < 0 || target_level > c.finest_level)
    throw BoundsError("swf_synthesis: target level " +
                      std::to_string(target_level) + " outside [0, " +
                      std::to_string(c.finest_level) + "]");
  if (c.coefficient_count() != h.vertex_count(c.finest_level))
    throw ShapeError("swf_synthesis: coefficient count does not match hierarchy");
  Eigen::MatrixXd v = c.values.block(0, 0, h.vertex_count(target_level),
                                     c.values.cols());
  for (int k = 1; k <= target_level; ++k)
    synthesis_step(h.level(k), h.vertex_count(k - 1), c.scheme, v);
  MultichannelSignal out;
  out.sample_rate = c.sample_rate;
  out.samples = std::move(v);
  return out;
}

WaveletCoeffs swf_truncate(const WaveletCoeffs& c, int level,
                           const TriMeshHierarchy& h) {
  if (level < 0 || level > c.finest_level)
    throw BoundsError("swf_truncate: level " + std::to_string(level) +
                      " outside [0, " + std::to_string(c.finest_level) + "]");
  WaveletCoeffs out = c;
  const int keep = h.vertex_count(level);
  if (keep < out.coefficient_count())
    out.values.block(keep, 0, out.coefficient_count() - keep, out.values.cols())
        .setZero();
  return out;
}

int swf_target_level(const TriMeshHierarchy& h,
                     const LoudspeakerLayout& layout) {
  if (layout.name == "octahedron") return 0;
  int target = 0;
  for (int k = 0; k <= h.max_level(); ++k)
    if (h.vertex_count(k) <= layout.size() + 16) target = k;
  return target;
}

Eigen::MatrixXd swf_remap_matrix(const TriMeshHierarchy& h, int level,
                                 const LoudspeakerLayout& layout) {
  const TriMesh& mesh = h.mesh(level);
  Eigen::MatrixXd remap = Eigen::MatrixXd::Zero(
      layout.size(), static_cast<long>(mesh.vertices.size()));
  for (int v = 0; v < static_cast<int>(mesh.vertices.size()); ++v) {
    const auto loc = locate_triangle(layout.units, layout.triangles,
                                     mesh.vertices[static_cast<size_t>(v)]);
    const auto& tri = layout.triangles[static_cast<size_t>(loc.triangle)];
    for (int corner = 0; corner < 3; ++corner)
      remap(tri[static_cast<size_t>(corner)], v) +=
          loc.weights[static_cast<size_t>(corner)];
  }
  return remap;
}

namespace {

// Maps mesh level-0 vertices onto the octahedron layout channels by
// direction match; the layout file order is free.
Eigen::MatrixXd octahedron_permutation(const TriMeshHierarchy& h,
                                       const LoudspeakerLayout& layout) {
  const TriMesh& base = h.mesh(0);
  Eigen::MatrixXd perm = Eigen::MatrixXd::Zero(layout.size(), 6);
  for (int v = 0; v < 6; ++v) {
    int match = -1;
    for (int l = 0; l < layout.size(); ++l) {
      if (angle_between_deg(base.vertices[static_cast<size_t>(v)],
                            layout.units[static_cast<size_t>(l)]) < 0.1) {
        match = l;
        break;
      }
    }
    if (match < 0)
      throw ConfigError(
          "octahedron layout does not contain the axis direction of mesh "
          "vertex " +
          std::to_string(v));
    perm(match, v) = 1.0;
  }
  return perm;
}

void check_supported_layout(const LoudspeakerLayout& layout) {
  if (layout.name != "octahedron" && layout.name != "tdesign24" &&
      layout.name != "lebedev50")
    throw ConfigError("swf_render: unsupported layout '" + layout.name + "'");
}

}  // namespace

MultichannelSignal swf_render(const TriMeshHierarchy& h, const Direction& d,
                              std::span<const double> s, double sample_rate,
                              const LoudspeakerLayout& layout,
                              LiftingScheme scheme) {
  check_supported_layout(layout);
  const MultichannelSignal encoded = swf_encode(h, d, s, sample_rate);
  const WaveletCoeffs coeffs = swf_analysis(h, encoded, scheme);
  const int target = swf_target_level(h, layout);
  const MultichannelSignal mesh_feeds = swf_synthesis(h, coeffs, target);

  const Eigen::MatrixXd map = layout.name == "octahedron"
                                  ? octahedron_permutation(h, layout)
                                  : swf_remap_matrix(h, target, layout);
  MultichannelSignal out;
  out.sample_rate = sample_rate;
  out.samples = map * mesh_feeds.samples;
  return out;
}

Eigen::VectorXd swf_render_gains(const TriMeshHierarchy& h, const Direction& d,
                                 const LoudspeakerLayout& layout,
                                 LiftingScheme scheme) {
  const double unit[1] = {1.0};
  const MultichannelSignal feeds =
      swf_render(h, d, std::span<const double>(unit, 1), 48000.0, layout,
                 scheme);
  return feeds.samples.col(0);
}

void write_wavelet_csv(const std::filesystem::path& path,
                       const WaveletCoeffs& c, const TriMeshHierarchy& h) {
  std::ofstream os(path);
  if (!os) throw IngestError("cannot write " + path.string());
  os << "level,vertex_index,value\n";
  for (int i = 0; i < c.coefficient_count(); ++i) {
    int level = 0;
    while (i >= h.vertex_count(level)) ++level;
    const double value = std::sqrt(c.values.row(i).squaredNorm() /
                                   static_cast<double>(c.values.cols()));
    os << level << ',' << i << ',' << value << '\n';
  }
}

}  // namespace sfeval
