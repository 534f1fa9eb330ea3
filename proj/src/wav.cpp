#include "sfeval/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "sfeval/error.hpp"

namespace sfeval {

namespace {

constexpr uint16_t kFormatPcm = 1;
constexpr uint16_t kFormatFloat = 3;
constexpr uint16_t kFormatExtensible = 0xFFFE;

uint32_t read_u32(const uint8_t* p) {
  return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
         (static_cast<uint32_t>(p[2]) << 16) |
         (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void append_u32(std::vector<uint8_t>& v, uint32_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 8) & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 16) & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 24) & 0xFF));
}

void append_u16(std::vector<uint8_t>& v, uint16_t x) {
  v.push_back(static_cast<uint8_t>(x & 0xFF));
  v.push_back(static_cast<uint8_t>((x >> 8) & 0xFF));
}

void append_tag(std::vector<uint8_t>& v, const char* tag) {
  v.insert(v.end(), tag, tag + 4);
}

}  // namespace

MultichannelSignal read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot open wav file " + path.string());
  std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                             std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw IngestError("not a RIFF/WAVE file: " + path.string());

  uint16_t format = 0, channels = 0, bits = 0;
  uint32_t rate = 0;
  const uint8_t* data = nullptr;
  size_t data_len = 0;

  size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const char* tag = reinterpret_cast<const char*>(bytes.data() + pos);
    const uint32_t len = read_u32(bytes.data() + pos + 4);
    const uint8_t* body = bytes.data() + pos + 8;
    if (pos + 8 + len > bytes.size())
      throw IngestError("truncated wav chunk in " + path.string());
    if (std::memcmp(tag, "fmt ", 4) == 0) {
      if (len < 16) throw IngestError("bad fmt chunk in " + path.string());
      format = read_u16(body);
      channels = read_u16(body + 2);
      rate = read_u32(body + 4);
      bits = read_u16(body + 14);
      if (format == kFormatExtensible && len >= 40)
        format = read_u16(body + 24);  // sub-format GUID leading bytes
    } else if (std::memcmp(tag, "data", 4) == 0) {
      data = body;
      data_len = len;
    }
    pos += 8 + len + (len & 1);
  }
  if (channels == 0 || data == nullptr)
    throw IngestError("wav file missing fmt or data chunk: " + path.string());

  const size_t bytes_per_sample = bits / 8u;
  if (bytes_per_sample == 0)
    throw IngestError("wav file with zero sample width: " + path.string());
  const size_t frames = data_len / (bytes_per_sample * channels);

  MultichannelSignal sig;
  sig.sample_rate = rate;
  sig.samples.resize(channels, static_cast<long>(frames));
  for (size_t f = 0; f < frames; ++f) {
    for (size_t c = 0; c < channels; ++c) {
      const uint8_t* p = data + (f * channels + c) * bytes_per_sample;
      double v = 0.0;
      if (format == kFormatFloat && bits == 32) {
        float fv;
        std::memcpy(&fv, p, 4);
        v = fv;
      } else if (format == kFormatFloat && bits == 64) {
        double dv;
        std::memcpy(&dv, p, 8);
        v = dv;
      } else if (format == kFormatPcm && bits == 16) {
        const auto s = static_cast<int16_t>(p[0] | (p[1] << 8));
        v = s / 32768.0;
      } else if (format == kFormatPcm && bits == 24) {
        int32_t s = p[0] | (p[1] << 8) | (p[2] << 16);
        if (s & 0x800000) s |= ~0xFFFFFF;
        v = s / 8388608.0;
      } else if (format == kFormatPcm && bits == 32) {
        int32_t s;
        std::memcpy(&s, p, 4);
        v = s / 2147483648.0;
      } else {
        throw IngestError("unsupported wav encoding (format " +
                          std::to_string(format) + ", " +
                          std::to_string(bits) + " bit) in " + path.string());
      }
      sig.samples(static_cast<long>(c), static_cast<long>(f)) = v;
    }
  }
  return sig;
}

void write_wav(const std::filesystem::path& path,
               const MultichannelSignal& signal, WavFormat format) {
  const int channels = signal.channels();
  const long frames = signal.frames();
  if (channels <= 0) throw ShapeError("write_wav: no channels");

  uint16_t bits = 32, fmt = kFormatFloat;
  if (format == WavFormat::int24) {
    bits = 24;
    fmt = kFormatPcm;
  } else if (format == WavFormat::int16) {
    bits = 16;
    fmt = kFormatPcm;
  }
  const uint32_t bytes_per_frame = channels * bits / 8u;
  const uint32_t data_len = static_cast<uint32_t>(frames) * bytes_per_frame;

  std::vector<uint8_t> out;
  out.reserve(44 + data_len);
  append_tag(out, "RIFF");
  append_u32(out, 36 + data_len);
  append_tag(out, "WAVE");
  append_tag(out, "fmt ");
  append_u32(out, 16);
  append_u16(out, fmt);
  append_u16(out, static_cast<uint16_t>(channels));
  append_u32(out, static_cast<uint32_t>(std::lround(signal.sample_rate)));
  append_u32(out, static_cast<uint32_t>(std::lround(signal.sample_rate)) *
                      bytes_per_frame);
  append_u16(out, static_cast<uint16_t>(bytes_per_frame));
  append_u16(out, bits);
  append_tag(out, "data");
  append_u32(out, data_len);

  for (long f = 0; f < frames; ++f) {
    for (int c = 0; c < channels; ++c) {
      const double v = signal.samples(c, f);
      if (format == WavFormat::float32) {
        const float fv = static_cast<float>(v);
        uint32_t u;
        std::memcpy(&u, &fv, 4);
        append_u32(out, u);
      } else if (format == WavFormat::int24) {
        const double clipped = std::clamp(v, -1.0, 8388607.0 / 8388608.0);
        const auto s = static_cast<int32_t>(std::lround(clipped * 8388608.0));
        out.push_back(static_cast<uint8_t>(s & 0xFF));
        out.push_back(static_cast<uint8_t>((s >> 8) & 0xFF));
        out.push_back(static_cast<uint8_t>((s >> 16) & 0xFF));
      } else {
        const double clipped = std::clamp(v, -1.0, 32767.0 / 32768.0);
        const auto s = static_cast<int16_t>(std::lround(clipped * 32768.0));
        append_u16(out, static_cast<uint16_t>(s));
      }
    }
  }
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IngestError("cannot write wav file " + path.string());
  os.write(reinterpret_cast<const char*>(out.data()),
           static_cast<std::streamsize>(out.size()));
}

BinauralPair read_stereo_wav(const std::filesystem::path& path) {
  MultichannelSignal sig = read_wav(path);
  if (sig.channels() != 2)
    throw IngestError("expected stereo wav, got " +
                      std::to_string(sig.channels()) + " channels: " +
                      path.string());
  BinauralPair pair;
  pair.sample_rate = sig.sample_rate;
  pair.left = sig.channel(0);
  pair.right = sig.channel(1);
  return pair;
}

void write_stereo_wav(const std::filesystem::path& path,
                      const BinauralPair& pair, WavFormat format) {
  if (pair.left.size() != pair.right.size())
    throw ShapeError("write_stereo_wav: channel length mismatch");
  MultichannelSignal sig;
  sig.sample_rate = pair.sample_rate;
  sig.samples.resize(2, static_cast<long>(pair.left.size()));
  for (size_t i = 0; i < pair.left.size(); ++i) {
    sig.samples(0, static_cast<long>(i)) = pair.left[i];
    sig.samples(1, static_cast<long>(i)) = pair.right[i];
  }
  write_wav(path, sig, format);
}

}  // namespace sfeval
