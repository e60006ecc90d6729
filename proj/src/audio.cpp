#include "intonarank/audio.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace intonarank {

void validate(const AudioClip& clip) {
    if (clip.sample_rate < 8000) {
        throw std::invalid_argument("AudioClip: sample_rate must be >= 8000 Hz");
    }
    const std::size_t min_len = static_cast<std::size_t>(0.025 * clip.sample_rate);
    if (clip.samples.size() < min_len) {
        throw std::invalid_argument("AudioClip: shorter than one 25 ms frame");
    }
    for (double s : clip.samples) {
        if (!std::isfinite(s) || s < -1.0 || s > 1.0) {
            throw std::invalid_argument("AudioClip: sample out of [-1, 1]");
        }
    }
}

namespace {

constexpr double kPcm16Scale = 32768.0;

uint32_t read_u32(const unsigned char* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}

uint16_t read_u16(const unsigned char* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip read_wav(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::string bytes((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
    const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
    const std::size_t n = bytes.size();

    if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 || std::memcmp(p + 8, "WAVE", 4) != 0) {
        throw FormatError("not a RIFF/WAVE file: " + path);
    }

    bool have_fmt = false;
    uint16_t channels = 0, bits = 0, audio_format = 0;
    uint32_t sample_rate = 0;
    const unsigned char* data = nullptr;
    uint32_t data_size = 0;

    std::size_t off = 12;
    while (off + 8 <= n) {
        const char* id = bytes.data() + off;
        const uint32_t size = read_u32(p + off + 4);
        const std::size_t body = off + 8;
        if (body + size > n) throw FormatError("truncated chunk in " + path);
        if (std::memcmp(id, "fmt ", 4) == 0) {
            if (size < 16) throw FormatError("truncated fmt chunk in " + path);
            audio_format = read_u16(p + body);
            channels = read_u16(p + body + 2);
            sample_rate = read_u32(p + body + 4);
            bits = read_u16(p + body + 14);
            have_fmt = true;
        } else if (std::memcmp(id, "data", 4) == 0) {
            data = p + body;
            data_size = size;
        }
        off = body + size + (size & 1);  // chunks are word-aligned
    }

    if (!have_fmt || data == nullptr) throw FormatError("missing fmt/data chunk in " + path);
    if (audio_format != 1) throw FormatError("not PCM: " + path);
    if (channels != 1) throw FormatError("not mono: " + path);
    if (bits != 16) throw FormatError("not 16-bit: " + path);
    if (sample_rate == 0) throw FormatError("zero sample rate: " + path);

    AudioClip clip;
    clip.sample_rate = static_cast<int>(sample_rate);
    const std::size_t count = data_size / 2;
    clip.samples.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        const int16_t v = static_cast<int16_t>(read_u16(data + 2 * i));
        clip.samples[i] = v / kPcm16Scale;
    }
    return clip;
}

void write_wav(const AudioClip& clip, const std::string& path) {
    validate(clip);

    std::string out;
    out.reserve(44 + clip.samples.size() * 2);
    const uint32_t data_size = static_cast<uint32_t>(clip.samples.size() * 2);
    const uint32_t sr = static_cast<uint32_t>(clip.sample_rate);

    out.append("RIFF");
    put_u32(out, 36 + data_size);
    out.append("WAVE");
    out.append("fmt ");
    put_u32(out, 16);
    put_u16(out, 1);   // PCM
    put_u16(out, 1);   // mono
    put_u32(out, sr);
    put_u32(out, sr * 2);  // byte rate
    put_u16(out, 2);   // block align
    put_u16(out, 16);  // bits per sample
    out.append("data");
    put_u32(out, data_size);

    for (double s : clip.samples) {
        long q = std::lround(s * kPcm16Scale);
        if (q > 32767) q = 32767;
        if (q < -32768) q = -32768;
        put_u16(out, static_cast<uint16_t>(static_cast<int16_t>(q)));
    }

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace intonarank
