#include "sfeval/dsp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "sfeval/error.hpp"

namespace sfeval::dsp {

namespace {
constexpr double kPi = std::numbers::pi;
}

size_t next_pow2(size_t n) {
  size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

void fft(std::vector<std::complex<double>>& a, bool inverse) {
  const size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0)
    throw ShapeError("fft size must be a power of two");
  for (size_t i = 1, j = 0; i < n; ++i) {
    size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * kPi / static_cast<double>(len) * (inverse ? 1 : -1);
    const std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (size_t j = 0; j < len / 2; ++j) {
        const std::complex<double> u = a[i + j];
        const std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse)
    for (auto& x : a) x /= static_cast<double>(n);
}

std::vector<double> convolve_direct(std::span<const double> a,
                                    std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  std::vector<double> out(a.size() + b.size() - 1, 0.0);
  for (size_t i = 0; i < a.size(); ++i) {
    const double ai = a[i];
    if (ai == 0.0) continue;
    for (size_t j = 0; j < b.size(); ++j) out[i + j] += ai * b[j];
  }
  return out;
}

std::vector<double> convolve_fft(std::span<const double> a,
                                 std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const size_t out_len = a.size() + b.size() - 1;
  const size_t n = next_pow2(out_len);
  std::vector<std::complex<double>> fa(n), fb(n);
  std::copy(a.begin(), a.end(), fa.begin());
  std::copy(b.begin(), b.end(), fb.begin());
  fft(fa);
  fft(fb);
  for (size_t i = 0; i < n; ++i) fa[i] *= fb[i];
  fft(fa, true);
  std::vector<double> out(out_len);
  for (size_t i = 0; i < out_len; ++i) out[i] = fa[i].real();
  return out;
}

std::vector<double> convolve(std::span<const double> a,
                             std::span<const double> b) {
  const double direct_cost = static_cast<double>(a.size()) * b.size();
  return direct_cost < 256.0 * 1024.0 ? convolve_direct(a, b)
                                      : convolve_fft(a, b);
}

std::vector<double> hilbert_envelope(std::span<const double> x) {
  if (x.empty()) return {};
  const size_t n = next_pow2(x.size());
  std::vector<std::complex<double>> spec(n);
  std::copy(x.begin(), x.end(), spec.begin());
  fft(spec);
  // Analytic signal: double positive frequencies, zero negative ones.
  for (size_t i = 1; i < n / 2; ++i) spec[i] *= 2.0;
  for (size_t i = n / 2 + 1; i < n; ++i) spec[i] = 0.0;
  fft(spec, true);
  std::vector<double> env(x.size());
  for (size_t i = 0; i < x.size(); ++i) env[i] = std::abs(spec[i]);
  return env;
}

std::complex<double> Biquad::response(double w) const {
  const std::complex<double> z1 = std::polar(1.0, -w);
  const std::complex<double> z2 = z1 * z1;
  return (b0 + b1 * z1 + b2 * z2) / (1.0 + a1 * z1 + a2 * z2);
}

std::vector<double> BiquadCascade::filter(std::span<const double> x) const {
  std::vector<double> y(x.begin(), x.end());
  for (const auto& s : sections) {
    double w1 = 0.0, w2 = 0.0;
    for (auto& v : y) {
      const double in = v;
      const double out = s.b0 * in + w1;
      w1 = s.b1 * in - s.a1 * out + w2;
      w2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  for (auto& v : y) v *= gain;
  return y;
}

std::complex<double> BiquadCascade::response(double w) const {
  std::complex<double> h(gain, 0.0);
  for (const auto& s : sections) h *= s.response(w);
  return h;
}

BiquadCascade butterworth_lowpass(int order, double cutoff_hz,
                                  double sample_rate) {
  if (order < 1) throw BoundsError("butterworth order must be >= 1");
  if (cutoff_hz <= 0.0 || cutoff_hz >= sample_rate / 2.0)
    throw ConfigError("butterworth cutoff outside (0, Nyquist)");
  // Bilinear transform with frequency prewarping.
  const double wc = std::tan(kPi * cutoff_hz / sample_rate);
  BiquadCascade cascade;
  for (int k = 0; k < order / 2; ++k) {
    // Analog pole pair angle for the Butterworth circle.
    const double theta = kPi * (2.0 * k + 1.0) / (2.0 * order) + kPi / 2.0;
    const double re = std::cos(theta) * wc;
    const double im = std::sin(theta) * wc;
    // s^2 - 2 re s + (re^2+im^2) in the denominator, wc^2 numerator.
    const double a = re * re + im * im;
    const double norm = 1.0 - 2.0 * re + a;
    Biquad s;
    s.b0 = wc * wc / norm;
    s.b1 = 2.0 * s.b0;
    s.b2 = s.b0;
    s.a1 = (2.0 * a - 2.0) / norm;
    s.a2 = (1.0 + 2.0 * re + a) / norm;
    cascade.sections.push_back(s);
  }
  if (order % 2) {
    // Real pole at -wc.
    const double norm = 1.0 + wc;
    Biquad s;
    s.b0 = wc / norm;
    s.b1 = s.b0;
    s.b2 = 0.0;
    s.a1 = (wc - 1.0) / norm;
    s.a2 = 0.0;
    cascade.sections.push_back(s);
  }
  return cascade;
}

CrossoverPair linkwitz_riley4(double crossover_hz, double sample_rate) {
  if (crossover_hz <= 0.0 || crossover_hz >= sample_rate / 2.0)
    throw ConfigError("crossover frequency outside (0, Nyquist)");
  const double wc = std::tan(kPi * crossover_hz / sample_rate);
  const double k2 = wc * wc;
  const double norm = 1.0 + std::numbers::sqrt2 * wc + k2;

  Biquad lp;
  lp.b0 = k2 / norm;
  lp.b1 = 2.0 * lp.b0;
  lp.b2 = lp.b0;
  lp.a1 = 2.0 * (k2 - 1.0) / norm;
  lp.a2 = (1.0 - std::numbers::sqrt2 * wc + k2) / norm;

  Biquad hp;
  hp.b0 = 1.0 / norm;
  hp.b1 = -2.0 * hp.b0;
  hp.b2 = hp.b0;
  hp.a1 = lp.a1;
  hp.a2 = lp.a2;

  CrossoverPair pair;
  pair.low.sections = {lp, lp};
  pair.high.sections = {hp, hp};
  return pair;
}

std::vector<double> filtfilt(const BiquadCascade& filter,
                             std::span<const double> x) {
  std::vector<double> y = filter.filter(x);
  std::reverse(y.begin(), y.end());
  y = filter.filter(y);
  std::reverse(y.begin(), y.end());
  return y;
}

double rms(std::span<const double> x) {
  if (x.empty()) return 0.0;
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(x.size()));
}

double peak_abs(std::span<const double> x) {
  double peak = 0.0;
  for (double v : x) peak = std::max(peak, std::abs(v));
  return peak;
}

std::vector<double> pink_noise(double duration_s, double sample_rate,
                               uint64_t seed) {
  if (duration_s <= 0.0) throw BoundsError("pink noise duration must be > 0");
  const auto n = static_cast<size_t>(std::llround(duration_s * sample_rate));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> white(0.0, 1.0);
  std::vector<double> out(n);
  double b0 = 0.0, b1 = 0.0, b2 = 0.0, b3 = 0.0, b4 = 0.0, b5 = 0.0, b6 = 0.0;
  for (auto& v : out) {
    const double w = white(rng);
    b0 = 0.99886 * b0 + w * 0.0555179;
    b1 = 0.99332 * b1 + w * 0.0750759;
    b2 = 0.96900 * b2 + w * 0.1538520;
    b3 = 0.86650 * b3 + w * 0.3104856;
    b4 = 0.55000 * b4 + w * 0.5329522;
    b5 = -0.7616 * b5 - w * 0.0168980;
    v = b0 + b1 + b2 + b3 + b4 + b5 + b6 + w * 0.5362;
    b6 = w * 0.115926;
  }
  const double peak = peak_abs(out);
  if (peak > 0.0)
    for (auto& v : out) v /= peak;
  return out;
}

}  // namespace sfeval::dsp
