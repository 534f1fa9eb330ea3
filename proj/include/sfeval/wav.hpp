#pragma once

#include <filesystem>

#include "sfeval/signal.hpp"

namespace sfeval {

enum class WavFormat { float32, int24, int16 };

/// Reads a PCM (16/24-bit) or IEEE float (32-bit) RIFF WAV file.
MultichannelSignal read_wav(const std::filesystem::path& path);

void write_wav(const std::filesystem::path& path,
               const MultichannelSignal& signal,
               WavFormat format = WavFormat::float32);

/// Stereo convenience wrappers used for HRIRs and binaural renders.
BinauralPair read_stereo_wav(const std::filesystem::path& path);
void write_stereo_wav(const std::filesystem::path& path,
                      const BinauralPair& pair,
                      WavFormat format = WavFormat::float32);

}  // namespace sfeval
