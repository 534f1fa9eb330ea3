#include "sfeval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "sfeval/dsp.hpp"
#include "sfeval/error.hpp"

namespace sfeval {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------------------
// ERB scale
// ---------------------------------------------------------------------------

double erb_rate_from_hz(double f_hz) {
  return 21.4 * std::log10(1.0 + 0.00437 * f_hz);
}

double hz_from_erb_rate(double erb) {
  return (std::pow(10.0, erb / 21.4) - 1.0) / 0.00437;
}

double erb_bandwidth_hz(double f_hz) { return 24.7 * (0.00437 * f_hz + 1.0); }

// ---------------------------------------------------------------------------
// IACC / ITD
// ---------------------------------------------------------------------------

IaccItdResult compute_iacc_itd(const BinauralPair& p) {
  if (p.left.size() != p.right.size() || p.left.empty())
    throw ShapeError("compute_iacc_itd: channel length mismatch");
  if (p.sample_rate < 8000.0)
    throw ConfigError("compute_iacc_itd: sample rate below 8 kHz");

  const auto lp = dsp::butterworth_lowpass(5, 3000.0, p.sample_rate);
  auto env_l = dsp::hilbert_envelope(dsp::filtfilt(lp, p.left));
  auto env_r = dsp::hilbert_envelope(dsp::filtfilt(lp, p.right));

  auto remove_mean = [](std::vector<double>& e) {
    double mean = 0.0;
    for (double v : e) mean += v;
    mean /= static_cast<double>(e.size());
    for (auto& v : e) v -= mean;
  };
  remove_mean(env_l);
  remove_mean(env_r);

  double norm_l = 0.0, norm_r = 0.0;
  for (double v : env_l) norm_l += v * v;
  for (double v : env_r) norm_r += v * v;
  const double denom = std::sqrt(norm_l * norm_r);
  if (denom <= 0.0)
    throw MetricError("compute_iacc_itd: silent channel");

  const long n = static_cast<long>(env_l.size());
  const long max_lag =
      static_cast<long>(std::floor(1e-3 * p.sample_rate));
  IaccItdResult result;
  double best = -1.0;
  for (long lag = -max_lag; lag <= max_lag; ++lag) {
    double acc = 0.0;
    // IACF(lag) correlates left(t) with right(t + lag).
    const long t0 = std::max<long>(0, -lag);
    const long t1 = std::min<long>(n, n - lag);
    for (long t = t0; t < t1; ++t)
      acc += env_l[static_cast<size_t>(t)] * env_r[static_cast<size_t>(t + lag)];
    const double iacf = std::abs(acc) / denom;
    if (iacf > best) {
      best = iacf;
      result.itd_s = static_cast<double>(lag) / p.sample_rate;
    }
  }
  result.iacc = std::clamp(best, 0.0, 1.0);
  return result;
}

// ---------------------------------------------------------------------------
// Gammatone filter bank
// ---------------------------------------------------------------------------

GammatoneFilterbank::GammatoneFilterbank(int bands, double f_low_hz,
                                         double f_high_hz, double sample_rate)
    : sample_rate_(sample_rate) {
  if (bands < 1) throw BoundsError("gammatone: need at least one band");
  if (f_high_hz >= sample_rate / 2.0)
    throw ConfigError("gammatone: top band above Nyquist");
  const double e0 = erb_rate_from_hz(f_low_hz);
  const double e1 = erb_rate_from_hz(f_high_hz);
  for (int b = 0; b < bands; ++b) {
    const double erb = e0 + (e1 - e0) * b / (bands - 1.0);
    centers_hz_.push_back(hz_from_erb_rate(erb));
  }
  for (double fc : centers_hz_) {
    // Pole of the complex one-pole resonator repeated four times; the
    // 1.019 factor matches the 4th-order gammatone ERB definition.
    const double bw = 2.0 * kPi * 1.019 * erb_bandwidth_hz(fc);
    const double r = std::exp(-bw / sample_rate);
    const double theta = 2.0 * kPi * fc / sample_rate;
    poles_.push_back(std::polar(r, theta));

    // Normalise the real-output response to exactly unity at fc:
    // taking the real part of the complex cascade output corresponds to
    // H(w) = (Hc(w) + conj(Hc(-w))) / 2 for real input.
    const auto stage = [&](std::complex<double> pole, double w) {
      return (1.0 - std::abs(pole)) /
             (1.0 - pole * std::exp(std::complex<double>(0.0, -w)));
    };
    const std::complex<double> pole = poles_.back();
    std::complex<double> h_pos(1.0, 0.0), h_neg(1.0, 0.0);
    for (int k = 0; k < 4; ++k) {
      h_pos *= stage(pole, theta);
      h_neg *= stage(pole, -theta);
    }
    const std::complex<double> h_real = 0.5 * (h_pos + std::conj(h_neg));
    gains_.push_back(1.0 / std::abs(h_real));
  }
}

std::vector<double> GammatoneFilterbank::filter_band(
    int band, std::span<const double> x) const {
  if (band < 0 || band >= bands())
    throw BoundsError("gammatone: band index out of range");
  const std::complex<double> pole = poles_[static_cast<size_t>(band)];
  const double in_gain = 1.0 - std::abs(pole);
  std::vector<std::complex<double>> w(x.begin(), x.end());
  for (int stage = 0; stage < 4; ++stage) {
    std::complex<double> state(0.0, 0.0);
    for (auto& v : w) {
      state = in_gain * v + pole * state;
      v = state;
    }
  }
  std::vector<double> y(x.size());
  const double g = gains_[static_cast<size_t>(band)];
  for (size_t i = 0; i < x.size(); ++i) y[i] = g * w[i].real();
  return y;
}

// ---------------------------------------------------------------------------
// ILD
// ---------------------------------------------------------------------------

IldResult compute_ild(const BinauralPair& p) {
  if (p.left.size() != p.right.size() || p.left.empty())
    throw ShapeError("compute_ild: channel length mismatch");
  const GammatoneFilterbank bank(42, 20.0, 20000.0, p.sample_rate);

  IldResult result;
  result.center_frequencies_hz = bank.center_frequencies_hz();
  result.per_band.resize(static_cast<size_t>(bank.bands()));
  double hf_sum = 0.0;
  int hf_count = 0;
  bool any_defined = false;
  for (int b = 0; b < bank.bands(); ++b) {
    const double rms_l = dsp::rms(bank.filter_band(b, p.left));
    const double rms_r = dsp::rms(bank.filter_band(b, p.right));
    if (rms_l <= 0.0 || rms_r <= 0.0) continue;  // excluded, stays unset
    const double ild = 20.0 * std::log10(rms_l / rms_r);
    result.per_band[static_cast<size_t>(b)] = ild;
    any_defined = true;
    if (bank.center_frequencies_hz()[static_cast<size_t>(b)] > 1500.0) {
      hf_sum += ild;
      ++hf_count;
    }
  }
  if (!any_defined)
    throw MetricError("compute_ild: all bands silent");
  result.broadband_hf_db = hf_count > 0 ? hf_sum / hf_count : 0.0;
  return result;
}

// ---------------------------------------------------------------------------
// ISO 226:2003 equal-loudness contours
// ---------------------------------------------------------------------------

namespace {

struct Iso226Row {
  double f, alpha, lu, tf;
};

// 29-point table of the 2003 standard: frequency, exponent alpha_f,
// magnitude of the linear transfer function L_U, threshold of hearing T_f.
constexpr Iso226Row kIso226[] = {
    {20.0, 0.532, -31.6, 78.5},   {25.0, 0.506, -27.2, 68.7},
    {31.5, 0.480, -23.0, 59.5},   {40.0, 0.455, -19.1, 51.1},
    {50.0, 0.432, -15.9, 44.0},   {63.0, 0.409, -13.0, 37.5},
    {80.0, 0.387, -10.3, 31.5},   {100.0, 0.367, -8.1, 26.5},
    {125.0, 0.349, -6.2, 22.1},   {160.0, 0.330, -4.5, 17.9},
    {200.0, 0.315, -3.1, 14.4},   {250.0, 0.301, -2.0, 11.4},
    {315.0, 0.288, -1.1, 8.6},    {400.0, 0.276, -0.4, 6.2},
    {500.0, 0.267, 0.0, 4.4},     {630.0, 0.259, 0.3, 3.0},
    {800.0, 0.253, 0.5, 2.2},     {1000.0, 0.250, 0.0, 2.4},
    {1250.0, 0.246, -2.7, 3.5},   {1600.0, 0.244, -4.1, 1.7},
    {2000.0, 0.243, -1.0, -1.3},  {2500.0, 0.243, 1.7, -4.2},
    {3150.0, 0.243, 2.5, -6.0},   {4000.0, 0.242, 1.2, -5.4},
    {5000.0, 0.242, -2.1, -1.5},  {6300.0, 0.245, -7.1, 6.0},
    {8000.0, 0.254, -11.2, 12.6}, {10000.0, 0.271, -10.7, 13.9},
    {12500.0, 0.301, -3.1, 12.3},
};

Iso226Row iso226_interpolate(double f_hz) {
  constexpr int n = static_cast<int>(std::size(kIso226));
  if (f_hz <= kIso226[0].f) return kIso226[0];
  if (f_hz >= kIso226[n - 1].f) return kIso226[n - 1];
  int i = 0;
  while (kIso226[i + 1].f < f_hz) ++i;
  const auto& a = kIso226[i];
  const auto& b = kIso226[i + 1];
  const double t =
      std::log(f_hz / a.f) / std::log(b.f / a.f);
  return {f_hz, a.alpha + t * (b.alpha - a.alpha), a.lu + t * (b.lu - a.lu),
          a.tf + t * (b.tf - a.tf)};
}

}  // namespace

double iso226_phon_from_spl(double f_hz, double level_db) {
  const Iso226Row row = iso226_interpolate(f_hz);
  const double af =
      std::pow(10.0, row.alpha * (level_db + row.lu - 94.0) / 10.0);
  const double threshold_term =
      std::pow(0.4 * std::pow(10.0, (row.tf + row.lu) / 10.0 - 9.0), row.alpha);
  const double arg = (af - threshold_term) / 4.47e-3 + 1.15;
  return 40.0 * std::log10(std::max(arg, 1e-12));
}

// ---------------------------------------------------------------------------
// PSD
// ---------------------------------------------------------------------------

namespace {

constexpr size_t kPsdFftSize = 65536;
// Digital full scale mapped to a nominal listening level.
constexpr double kPsdFullScaleSpl = 100.0;

// ERB-band-averaged phon spectrum of one ear signal.
std::vector<double> phon_spectrum(std::span<const double> x, double rate,
                                  std::span<const double> band_edges_hz) {
  std::vector<std::complex<double>> spec(kPsdFftSize);
  const size_t n = std::min(x.size(), kPsdFftSize);
  std::copy(x.begin(), x.begin() + static_cast<long>(n), spec.begin());
  dsp::fft(spec);

  const double hz_per_bin = rate / static_cast<double>(kPsdFftSize);
  std::vector<double> phons;
  phons.reserve(band_edges_hz.size() - 1);
  for (size_t b = 0; b + 1 < band_edges_hz.size(); ++b) {
    const auto lo = static_cast<size_t>(std::ceil(band_edges_hz[b] / hz_per_bin));
    const auto hi = static_cast<size_t>(
        std::min<double>(std::floor(band_edges_hz[b + 1] / hz_per_bin),
                         kPsdFftSize / 2.0));
    double power = 0.0;
    size_t count = 0;
    for (size_t k = lo; k <= hi && k <= kPsdFftSize / 2; ++k) {
      power += std::norm(spec[k]);
      ++count;
    }
    const double mag = count > 0 ? std::sqrt(power / count) : 0.0;
    const double spl =
        kPsdFullScaleSpl + 20.0 * std::log10(std::max(mag, 1e-12));
    const double fc = std::sqrt(band_edges_hz[b] * band_edges_hz[b + 1]);
    const double phon = iso226_phon_from_spl(fc, spl);
    // Sones intermediate per the model definition; the report stays in
    // phons so the round trip is exact.
    const double sones = std::pow(2.0, (phon - 40.0) / 10.0);
    phons.push_back(40.0 + 10.0 * std::log2(sones));
  }
  return phons;
}

}  // namespace

double compute_psd(const BinauralPair& p, const BinauralPair& ref) {
  if (p.sample_rate != ref.sample_rate)
    throw ConfigError("compute_psd: sample rate mismatch");
  if (p.left.empty() || ref.left.empty())
    throw ShapeError("compute_psd: empty input");
  const bool silent_p =
      dsp::peak_abs(p.left) <= 0.0 && dsp::peak_abs(p.right) <= 0.0;
  const bool silent_ref =
      dsp::peak_abs(ref.left) <= 0.0 && dsp::peak_abs(ref.right) <= 0.0;
  if (silent_p || silent_ref)
    throw MetricError("compute_psd: silent input");

  // 1-ERB-wide bands spanning 20 Hz - 20 kHz.
  const double e0 = erb_rate_from_hz(20.0);
  const double e1 = erb_rate_from_hz(std::min(20000.0, 0.45 * p.sample_rate));
  const int bands = static_cast<int>(std::floor(e1 - e0));
  std::vector<double> edges;
  for (int b = 0; b <= bands; ++b)
    edges.push_back(hz_from_erb_rate(e0 + (e1 - e0) * b / bands));

  double acc = 0.0;
  int count = 0;
  for (int ear = 0; ear < 2; ++ear) {
    const auto& sys = ear == 0 ? p.left : p.right;
    const auto& rf = ear == 0 ? ref.left : ref.right;
    const auto phon_sys = phon_spectrum(sys, p.sample_rate, edges);
    const auto phon_ref = phon_spectrum(rf, p.sample_rate, edges);
    for (size_t b = 0; b < phon_sys.size(); ++b) {
      acc += std::abs(phon_sys[b] - phon_ref[b]);
      ++count;
    }
  }
  return count > 0 ? acc / count : 0.0;
}

}  // namespace sfeval
