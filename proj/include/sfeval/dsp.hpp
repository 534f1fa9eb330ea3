#pragma once

#include <complex>
#include <span>
#include <vector>

namespace sfeval::dsp {

/// In-place radix-2 FFT; size must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse = false);

size_t next_pow2(size_t n);

/// Full linear convolution, length a.size()+b.size()-1, evaluated directly.
std::vector<double> convolve_direct(std::span<const double> a,
                                    std::span<const double> b);

/// Full linear convolution via FFT; matches convolve_direct to ~1e-9.
std::vector<double> convolve_fft(std::span<const double> a,
                                 std::span<const double> b);

/// Picks direct or FFT convolution by a cost threshold.
std::vector<double> convolve(std::span<const double> a,
                             std::span<const double> b);

/// Magnitude of the analytic signal (FFT method; input is zero-padded to a
/// power of two and the first x.size() samples are returned).
std::vector<double> hilbert_envelope(std::span<const double> x);

/// One biquad section, direct form II transposed.
struct Biquad {
  double b0 = 1.0, b1 = 0.0, b2 = 0.0;
  double a1 = 0.0, a2 = 0.0;  // denominator, a0 normalised to 1

  std::complex<double> response(double w) const;  // w = 2*pi*f/fs
};

/// Cascade of biquads with an overall gain.
struct BiquadCascade {
  std::vector<Biquad> sections;
  double gain = 1.0;

  std::vector<double> filter(std::span<const double> x) const;
  std::complex<double> response(double w) const;
};

/// Butterworth low-pass of arbitrary order via bilinear transform.
BiquadCascade butterworth_lowpass(int order, double cutoff_hz, double sample_rate);

/// Linkwitz-Riley 4th-order crossover pair (two squared 2nd-order
/// Butterworth sections). The two outputs are phase-matched and sum to an
/// all-pass response.
struct CrossoverPair {
  BiquadCascade low;
  BiquadCascade high;
};
CrossoverPair linkwitz_riley4(double crossover_hz, double sample_rate);

/// Zero-phase filtering: forward pass, reverse, forward pass, reverse.
std::vector<double> filtfilt(const BiquadCascade& filter,
                             std::span<const double> x);

double rms(std::span<const double> x);
double peak_abs(std::span<const double> x);

/// Deterministic pink noise (-10 dB/decade) with unit peak: seeded white
/// Gaussian noise through the Kellet 3-pole/1-zero pinking approximation.
std::vector<double> pink_noise(double duration_s, double sample_rate,
                               uint64_t seed);

}  // namespace sfeval::dsp
