#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "sfeval/error.hpp"
#include "sfeval/dsp.hpp"
#include "sfeval/sh.hpp"

using namespace sfeval;

TEST_CASE("order zero is the constant one") {
  const auto y = sh_eval(0, Direction::from_degrees(37.0, -12.0));
  REQUIRE(y.size() == 1);
  CHECK(y[0] == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("first order at the front direction") {
  const auto y = sh_eval(1, Direction::from_degrees(0.0, 0.0));
  REQUIRE(y.size() == 4);
  CHECK(std::abs(y[0] - 1.0) < 1e-12);
  CHECK(std::abs(y[1]) < 1e-12);
  CHECK(std::abs(y[2]) < 1e-12);
  CHECK(std::abs(y[3] - std::sqrt(3.0)) < 1e-12);
}

TEST_CASE("first order is sqrt(3) times the unit vector components") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int i = 0; i < 50; ++i) {
    const Direction d = Direction::from_degrees(az(rng), el(rng));
    const Vec3 u = d.unit();
    const auto y = sh_eval(1, d);
    CHECK(y[1] == doctest::Approx(std::sqrt(3.0) * u.y).epsilon(1e-12));
    CHECK(y[2] == doctest::Approx(std::sqrt(3.0) * u.z).epsilon(1e-12));
    CHECK(y[3] == doctest::Approx(std::sqrt(3.0) * u.x).epsilon(1e-12));
  }
}

TEST_CASE("addition theorem: per-order power sums to 2n+1") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> az(-180.0, 180.0), el(-90.0, 90.0);
  for (int i = 0; i < 100; ++i) {
    const auto y = sh_eval(5, Direction::from_degrees(az(rng), el(rng)));
    for (int n = 0; n <= 5; ++n) {
      double sum = 0.0;
      for (int m = -n; m <= n; ++m) {
        const double v = y[static_cast<size_t>(n * n + n + m)];
        sum += v * v;
      }
      CHECK(std::abs(sum - (2.0 * n + 1.0)) < 1e-9);
    }
  }
}

TEST_CASE("order-5 Gram matrix over Lebedev-50 quadrature is the identity") {
  const auto quad = lebedev50_quadrature();
  REQUIRE(quad.directions.size() == 50);
  const Eigen::MatrixXd y = sh_matrix(5, quad.directions);
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(36, 36);
  for (int i = 0; i < 50; ++i)
    gram += quad.weights[static_cast<size_t>(i)] * y.col(i) * y.col(i).transpose();
  const double err = (gram - Eigen::MatrixXd::Identity(36, 36))
                         .cwiseAbs()
                         .maxCoeff();
  CHECK(err < 1e-10);
}

TEST_CASE("plane-wave encoding scales the signal by the SH values") {
  const std::vector<double> impulse = {1.0, 0.0, 0.0};
  const auto enc =
      encode_plane_wave(1, Direction::from_degrees(0.0, 0.0), impulse, 48000.0);
  REQUIRE(enc.channels.channels() == 4);
  CHECK(enc.channels.samples(0, 0) == doctest::Approx(1.0));
  CHECK(enc.channels.samples(1, 0) == doctest::Approx(0.0));
  CHECK(enc.channels.samples(2, 0) == doctest::Approx(0.0));
  CHECK(enc.channels.samples(3, 0) == doctest::Approx(std::sqrt(3.0)));
  CHECK(enc.channels.samples.col(1).cwiseAbs().maxCoeff() == 0.0);

  // Linearity in the signal is exact.
  const std::vector<double> scaled = {2.5, 0.0, 0.0};
  const auto enc2 =
      encode_plane_wave(1, Direction::from_degrees(0.0, 0.0), scaled, 48000.0);
  CHECK((enc2.channels.samples - 2.5 * enc.channels.samples).norm() == 0.0);

  const auto zero_order =
      encode_plane_wave(0, Direction::from_degrees(123.0, 45.0), impulse, 48000.0);
  REQUIRE(zero_order.channels.channels() == 1);
  CHECK(zero_order.channels.samples(0, 0) == 1.0);
}

TEST_CASE("pseudo-inverse decoder satisfies D*Y = I on Lebedev-50") {
  const auto layout = load_layout("lebedev50");
  const auto dec = decoder_pinv(layout, 5);
  const Eigen::MatrixXd y = sh_matrix(5, layout.directions);
  const Eigen::MatrixXd dy = y * dec.gains;  // (36 x 50) * (50 x 36)
  const double err =
      (dy - Eigen::MatrixXd::Identity(36, 36)).cwiseAbs().maxCoeff();
  CHECK(err < 1e-8);
}

TEST_CASE("decoder matrices are deterministic") {
  const auto layout = load_layout("tdesign24");
  const auto a = decoder_pinv(layout, 3);
  const auto b = decoder_pinv(layout, 3);
  CHECK((a.gains - b.gains).cwiseAbs().maxCoeff() == 0.0);
  const auto ma = decoder_maxre(layout, 3);
  const auto mb = decoder_maxre(layout, 3);
  CHECK((ma.gains - mb.gains).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("order too high for the layout is rejected") {
  const auto layout = load_layout("octahedron");
  CHECK_THROWS_AS(decoder_pinv(layout, 2), ConfigError);  // 9 > 6 channels
  CHECK_NOTHROW(decoder_pinv(layout, 1));
}

TEST_CASE("max-rE weights match the closed form and decrease") {
  const auto g1 = max_re_weights(1);
  REQUIRE(g1.size() == 2);
  CHECK(g1[0] == doctest::Approx(1.0));
  // cos(137.9 deg / 2.51) frozen from the closed form.
  CHECK(g1[1] == doctest::Approx(0.574458879).epsilon(1e-9));
  for (int order = 1; order <= 5; ++order) {
    const auto g = max_re_weights(order);
    for (size_t n = 1; n < g.size(); ++n) CHECK(g[n] < g[n - 1]);
    CHECK(g.back() > 0.0);
  }
}

TEST_CASE("dual-band crossover sums flat and splits at DC") {
  const double fs = 48000.0;
  const auto xover = dsp::linkwitz_riley4(800.0, fs);
  for (double f : {20.0, 100.0, 800.0, 2000.0, 10000.0, 20000.0}) {
    const double w = 2.0 * std::numbers::pi * f / fs;
    const auto sum = xover.low.response(w) + xover.high.response(w);
    const double db = 20.0 * std::log10(std::abs(sum));
    CHECK(std::abs(db) < 0.1);
  }
  // High-pass blocks DC exactly.
  CHECK(std::abs(xover.high.response(0.0)) < 1e-12);
  CHECK(std::abs(xover.low.response(0.0) - 1.0) < 1e-12);
}

TEST_CASE("dual-band decode of a constant equals the pinv decode") {
  const auto layout = load_layout("octahedron");
  const long frames = 2048;
  ShSignal x;
  x.order = 1;
  x.channels.sample_rate = 48000.0;
  const auto y = sh_eval(1, Direction::from_degrees(30.0, 10.0));
  x.channels.samples.resize(4, frames);
  for (int q = 0; q < 4; ++q)
    x.channels.samples.row(q).setConstant(y[static_cast<size_t>(q)]);

  const auto feeds = dual_band_decode(x, layout);
  const Eigen::VectorXd expected =
      decoder_pinv(layout, 1).decode_direction(Direction::from_degrees(30.0, 10.0));
  // Steady state away from the filter transient.
  for (int i = 0; i < layout.size(); ++i) {
    const double got = feeds.samples(i, frames - 1);
    CHECK(std::abs(got - expected(i)) <
          1e-3 * std::max(1.0, std::abs(expected(i))));
  }
}

TEST_CASE("dual-band decode enforces the layout's designated order") {
  const auto layout = load_layout("octahedron");
  ShSignal x;
  x.order = 3;
  x.channels.sample_rate = 48000.0;
  x.channels.samples = Eigen::MatrixXd::Zero(16, 16);
  CHECK_THROWS_AS(dual_band_decode(x, layout), ConfigError);
}

TEST_CASE("dual-band decode is linear and maps silence to silence") {
  const auto layout = load_layout("octahedron");
  std::mt19937_64 rng(5);
  std::normal_distribution<double> dist;
  ShSignal a, b;
  a.order = b.order = 1;
  a.channels.sample_rate = b.channels.sample_rate = 48000.0;
  a.channels.samples.resize(4, 256);
  b.channels.samples.resize(4, 256);
  for (long i = 0; i < 4; ++i)
    for (long t = 0; t < 256; ++t) {
      a.channels.samples(i, t) = dist(rng);
      b.channels.samples(i, t) = dist(rng);
    }
  ShSignal mix = a;
  mix.channels.samples = 2.0 * a.channels.samples - 0.5 * b.channels.samples;
  const auto fa = dual_band_decode(a, layout);
  const auto fb = dual_band_decode(b, layout);
  const auto fmix = dual_band_decode(mix, layout);
  CHECK((fmix.samples - (2.0 * fa.samples - 0.5 * fb.samples))
            .cwiseAbs()
            .maxCoeff() < 1e-12);

  ShSignal silent;
  silent.order = 1;
  silent.channels.sample_rate = 48000.0;
  silent.channels.samples = Eigen::MatrixXd::Zero(4, 64);
  CHECK(dual_band_decode(silent, layout).samples.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ambisonic wav round trip converts SN3D at the boundary") {
  const auto dir = std::filesystem::temp_directory_path() / "sfeval_sh_test";
  std::filesystem::create_directories(dir);
  const std::vector<double> s = {0.5, -0.25, 0.125};
  const ShSignal enc =
      encode_plane_wave(2, Direction::from_degrees(45.0, 30.0), s, 48000.0);
  write_ambisonic_wav(dir / "x.wav", enc);
  const ShSignal back = read_ambisonic_wav(dir / "x.wav");
  REQUIRE(back.order == 2);
  CHECK((back.channels.samples - enc.channels.samples).cwiseAbs().maxCoeff() <
        1e-6);  // float32 file precision
}
