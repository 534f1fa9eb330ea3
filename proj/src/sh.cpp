#include "sfeval/sh.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <numbers>

#include "sfeval/dsp.hpp"
#include "sfeval/error.hpp"
#include "sfeval/wav.hpp"

namespace sfeval {

namespace {

constexpr double kPi = std::numbers::pi;

// Associated Legendre P_n^m(x) without the Condon-Shortley phase,
// for all n <= order, m <= n. Result indexed [n][m].
std::vector<std::vector<double>> assoc_legendre_all(int order, double x) {
  std::vector<std::vector<double>> p(order + 1);
  for (int n = 0; n <= order; ++n) p[n].assign(n + 1, 0.0);
  p[0][0] = 1.0;
  const double somx2 = std::sqrt(std::max(0.0, 1.0 - x * x));
  for (int m = 1; m <= order; ++m)
    p[m][m] = p[m - 1][m - 1] * (2.0 * m - 1.0) * somx2;
  for (int m = 0; m < order; ++m)
    p[m + 1][m] = x * (2.0 * m + 1.0) * p[m][m];
  for (int n = 2; n <= order; ++n)
    for (int m = 0; m <= n - 2; ++m)
      p[n][m] = ((2.0 * n - 1.0) * x * p[n - 1][m] -
                 (n + m - 1.0) * p[n - 2][m]) /
                (n - m);
  return p;
}

double factorial_ratio(int n, int m) {
  // (n - m)! / (n + m)!
  double r = 1.0;
  for (int k = n - m + 1; k <= n + m; ++k) r /= k;
  return r;
}

}  // namespace

std::vector<double> sh_eval(int order, const Direction& d) {
  if (order < 0) throw BoundsError("sh_eval: order must be >= 0");
  const double az = d.azimuth_deg() * kPi / 180.0;
  const double sin_el = std::sin(d.elevation_deg() * kPi / 180.0);
  const auto p = assoc_legendre_all(order, sin_el);

  std::vector<double> y(static_cast<size_t>((order + 1) * (order + 1)));
  for (int n = 0; n <= order; ++n) {
    for (int m = -n; m <= n; ++m) {
      const int am = std::abs(m);
      const double norm = std::sqrt((2.0 * n + 1.0) * (m == 0 ? 1.0 : 2.0) *
                                    factorial_ratio(n, am));
      const double trig = m < 0    ? std::sin(am * az)
                          : m > 0  ? std::cos(am * az)
                                   : 1.0;
      y[static_cast<size_t>(n * n + n + m)] = norm * p[n][am] * trig;
    }
  }
  return y;
}

Eigen::MatrixXd sh_matrix(int order, const std::vector<Direction>& dirs) {
  const int k = (order + 1) * (order + 1);
  Eigen::MatrixXd m(k, static_cast<int>(dirs.size()));
  for (int j = 0; j < static_cast<int>(dirs.size()); ++j) {
    const auto y = sh_eval(order, dirs[static_cast<size_t>(j)]);
    for (int q = 0; q < k; ++q) m(q, j) = y[static_cast<size_t>(q)];
  }
  return m;
}

double legendre_pn(int n, double x) {
  if (n == 0) return 1.0;
  double pm1 = 1.0, p = x;
  for (int k = 2; k <= n; ++k) {
    const double next = ((2.0 * k - 1.0) * x * p - (k - 1.0) * pm1) / k;
    pm1 = p;
    p = next;
  }
  return p;
}

std::vector<double> max_re_weights(int order) {
  if (order < 0) throw BoundsError("max_re_weights: order must be >= 0");
  const double arg = std::cos(137.9 * kPi / 180.0 / (order + 1.51));
  std::vector<double> g(static_cast<size_t>(order + 1));
  for (int n = 0; n <= order; ++n)
    g[static_cast<size_t>(n)] = legendre_pn(n, arg);
  return g;
}

ShSignal encode_plane_wave(int order, const Direction& d,
                           std::span<const double> s, double sample_rate) {
  if (s.empty()) throw ShapeError("encode_plane_wave: empty signal");
  const auto y = sh_eval(order, d);
  const int k = static_cast<int>(y.size());
  Eigen::MatrixXd out(k, static_cast<long>(s.size()));
  for (int q = 0; q < k; ++q)
    for (long t = 0; t < static_cast<long>(s.size()); ++t)
      out(q, t) = y[static_cast<size_t>(q)] * s[static_cast<size_t>(t)];
  return ShSignal{order, MultichannelSignal{sample_rate, std::move(out)}};
}

Eigen::VectorXd DecoderMatrix::decode_direction(const Direction& d) const {
  const auto y = sh_eval(order, d);
  return gains *
         Eigen::Map<const Eigen::VectorXd>(y.data(),
                                           static_cast<long>(y.size()));
}

DecoderMatrix decoder_pinv(const LoudspeakerLayout& layout, int order) {
  const int k = (order + 1) * (order + 1);
  if (layout.size() < k)
    throw ConfigError("layout '" + layout.name + "' has " +
                      std::to_string(layout.size()) +
                      " loudspeakers, fewer than (order+1)^2 = " +
                      std::to_string(k));
  const Eigen::MatrixXd y = sh_matrix(order, layout.directions);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      y, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = 1e-10 * sv(0);
  Eigen::VectorXd inv_sv(sv.size());
  for (long i = 0; i < sv.size(); ++i)
    inv_sv(i) = sv(i) > cutoff ? 1.0 / sv(i) : 0.0;
  // pinv(Y) = V * diag(1/s) * U^T, loudspeakers x k.
  Eigen::MatrixXd d = svd.matrixV() * inv_sv.asDiagonal() *
                      svd.matrixU().transpose();
  return DecoderMatrix{layout.name, order, DecoderBand::low, std::move(d)};
}

DecoderMatrix decoder_maxre(const LoudspeakerLayout& layout, int order) {
  DecoderMatrix d = decoder_pinv(layout, order);
  d.band = DecoderBand::high;
  const auto g = max_re_weights(order);
  Eigen::VectorXd w(d.gains.cols());
  for (int n = 0; n <= order; ++n)
    for (int m = -n; m <= n; ++m)
      w(n * n + n + m) = g[static_cast<size_t>(n)];
  d.gains = d.gains * w.asDiagonal();

  // Match decoded energy for a front-centre source to the low-band decoder.
  const Direction front = Direction::from_degrees(0.0, 0.0);
  const double e_low =
      decoder_pinv(layout, order).decode_direction(front).squaredNorm();
  const double e_high = d.gains.rows() > 0
                            ? d.decode_direction(front).squaredNorm()
                            : 0.0;
  if (e_high <= 0.0)
    throw ConfigError("max-rE decoder: zero energy at front centre");
  d.gains *= std::sqrt(e_low / e_high);
  return d;
}

int layout_order(const LoudspeakerLayout& layout) {
  if (layout.name == "octahedron") return 1;
  if (layout.name == "tdesign24") return 3;
  if (layout.name == "lebedev50") return 5;
  // Largest order the layout can carry.
  int order = 0;
  while ((order + 2) * (order + 2) <= layout.size()) ++order;
  return order;
}

MultichannelSignal dual_band_decode(const ShSignal& x,
                                    const LoudspeakerLayout& layout,
                                    double crossover_hz) {
  const int k = (x.order + 1) * (x.order + 1);
  if (x.channels.channels() != k)
    throw ShapeError("dual_band_decode: channel count does not match order");
  if (x.order != layout_order(layout))
    throw ConfigError("dual_band_decode: order " + std::to_string(x.order) +
                      " does not match layout '" + layout.name +
                      "' (expects order " +
                      std::to_string(layout_order(layout)) + ")");

  const auto xover = dsp::linkwitz_riley4(crossover_hz, x.channels.sample_rate);
  const long frames = x.channels.frames();
  Eigen::MatrixXd low(k, frames), high(k, frames);
  for (int q = 0; q < k; ++q) {
    const auto ch = x.channels.channel(q);
    const auto lo = xover.low.filter(ch);
    const auto hi = xover.high.filter(ch);
    for (long t = 0; t < frames; ++t) {
      low(q, t) = lo[static_cast<size_t>(t)];
      high(q, t) = hi[static_cast<size_t>(t)];
    }
  }
  const DecoderMatrix dl = decoder_pinv(layout, x.order);
  const DecoderMatrix dh = decoder_maxre(layout, x.order);
  MultichannelSignal out;
  out.sample_rate = x.channels.sample_rate;
  out.samples = dl.gains * low + dh.gains * high;
  return out;
}

SphericalQuadrature lebedev50_quadrature() {
  SphericalQuadrature q;
  const double a1 = 4.0 / 315.0;
  const double a2 = 64.0 / 2835.0;
  const double a3 = 27.0 / 1280.0;
  const double b = 14641.0 / 725760.0;
  auto push = [&q](double x, double y, double z, double w) {
    q.directions.push_back(Direction::from_unit({x, y, z}));
    q.weights.push_back(w);
  };
  for (double s : {1.0, -1.0}) {
    push(s, 0, 0, a1);
    push(0, s, 0, a1);
    push(0, 0, s, a1);
  }
  const double r2 = 1.0 / std::numbers::sqrt2;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0}) {
      push(s1 * r2, s2 * r2, 0, a2);
      push(s1 * r2, 0, s2 * r2, a2);
      push(0, s1 * r2, s2 * r2, a2);
    }
  const double r3 = 1.0 / std::numbers::sqrt3;
  for (double s1 : {1.0, -1.0})
    for (double s2 : {1.0, -1.0})
      for (double s3 : {1.0, -1.0}) push(s1 * r3, s2 * r3, s3 * r3, a3);
  const double l = 1.0 / std::sqrt(11.0);
  const double m = 3.0 / std::sqrt(11.0);
  for (int pos = 0; pos < 3; ++pos)
    for (double s1 : {1.0, -1.0})
      for (double s2 : {1.0, -1.0})
        for (double s3 : {1.0, -1.0}) {
          double c[3] = {l, l, l};
          c[pos] = m;
          push(s1 * c[0], s2 * c[1], s3 * c[2], b);
        }
  return q;
}

ShSignal read_ambisonic_wav(const std::filesystem::path& path) {
  MultichannelSignal sig = read_wav(path);
  const int ch = sig.channels();
  const int order = static_cast<int>(std::lround(std::sqrt(ch))) - 1;
  if ((order + 1) * (order + 1) != ch)
    throw IngestError("ambisonic wav '" + path.string() + "' has " +
                      std::to_string(ch) +
                      " channels; expected a perfect square");
  // SN3D -> N3D: scale order n by sqrt(2n+1).
  for (int n = 0; n <= order; ++n) {
    const double s = std::sqrt(2.0 * n + 1.0);
    for (int m = -n; m <= n; ++m) sig.samples.row(n * n + n + m) *= s;
  }
  return ShSignal{order, std::move(sig)};
}

void write_ambisonic_wav(const std::filesystem::path& path, const ShSignal& x) {
  MultichannelSignal sig = x.channels;
  for (int n = 0; n <= x.order; ++n) {
    const double s = 1.0 / std::sqrt(2.0 * n + 1.0);
    for (int m = -n; m <= n; ++m) sig.samples.row(n * n + n + m) *= s;
  }
  write_wav(path, sig, WavFormat::float32);
}

}  // namespace sfeval
