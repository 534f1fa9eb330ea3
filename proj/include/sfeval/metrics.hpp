#pragma once

#include <optional>
#include <span>
#include <vector>

#include "sfeval/signal.hpp"

namespace sfeval {

struct IaccItdResult {
  double iacc = 0.0;   // [0, 1]
  double itd_s = 0.0;  // [-1e-3, 1e-3], positive when the right ear lags
};

/// MaxIACCe-LP estimate: both ears low-passed at 3 kHz (5th-order
/// Butterworth, applied forward-backward for zero phase), Hilbert envelopes
/// taken and mean-removed, normalised cross-correlation evaluated for lags
/// within +-1 ms. IACC is the maximum absolute correlation, ITD its lag.
IaccItdResult compute_iacc_itd(const BinauralPair& p);

struct IldResult {
  /// Per-band level difference 20*log10(rms_L/rms_R); unset where one ear
  /// had no energy in the band.
  std::vector<std::optional<double>> per_band;
  std::vector<double> center_frequencies_hz;
  /// Mean over defined bands with centre frequency above 1.5 kHz.
  double broadband_hf_db = 0.0;
};

/// 42-band gammatone ILD, 1-ERB-spaced centre frequencies over
/// 20 Hz - 20 kHz.
IldResult compute_ild(const BinauralPair& p);

/// Perceptual spectral difference in phons: 65536-point magnitude spectra
/// band-averaged onto an ERB-spaced axis, converted to loudness level with
/// the ISO 226 equal-loudness contours (sones intermediate), then the mean
/// absolute phon difference over bands and ears. No loudness normalisation
/// or solid-angle weighting.
double compute_psd(const BinauralPair& p, const BinauralPair& ref);

/// Per-condition error, system minus reference.
inline double signed_error(double system_value, double reference_value) {
  return system_value - reference_value;
}

/// 4th-order all-pole gammatone filter bank on an ERB-rate grid.
class GammatoneFilterbank {
 public:
  GammatoneFilterbank(int bands, double f_low_hz, double f_high_hz,
                      double sample_rate);

  int bands() const { return static_cast<int>(centers_hz_.size()); }
  const std::vector<double>& center_frequencies_hz() const {
    return centers_hz_;
  }

  /// Band output for one channel (real bandpass signal, unity gain at the
  /// band centre).
  std::vector<double> filter_band(int band, std::span<const double> x) const;

 private:
  double sample_rate_;
  std::vector<double> centers_hz_;
  std::vector<std::complex<double>> poles_;  // per band
  std::vector<double> gains_;
};

/// Glasberg & Moore ERB rate and its inverse.
double erb_rate_from_hz(double f_hz);
double hz_from_erb_rate(double erb);
double erb_bandwidth_hz(double f_hz);

/// Loudness level (phon) of a pure tone at frequency f and SPL level_db,
/// by inversion of the ISO 226:2003 contour family (clamped to the tabled
/// 20 Hz - 12.5 kHz range at the edges).
double iso226_phon_from_spl(double f_hz, double level_db);

}  // namespace sfeval
