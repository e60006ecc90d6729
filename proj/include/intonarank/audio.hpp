#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace intonarank {

// Filesystem / stream failures; the CLI maps this to its I/O exit code.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed or unsupported file contents (bad RIFF header, stereo input, ...).
struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Mono PCM waveform, samples in [-1, 1].
struct AudioClip {
    std::vector<double> samples;
    int sample_rate = 16000;

    double duration() const {
        return static_cast<double>(samples.size()) / sample_rate;
    }
};

// Throws std::invalid_argument when the clip breaks its invariants
// (non-finite or out-of-range samples, sample_rate < 8000, shorter than one
// 25 ms frame).
void validate(const AudioClip& clip);

// 16-bit PCM mono RIFF/WAVE. read_wav scales samples by 1/32768; write_wav
// quantizes with round-to-nearest and symmetric clamp so a full-scale +1.0
// encodes as 32767 and the round trip error stays within 1/32768.
AudioClip read_wav(const std::string& path);
void write_wav(const AudioClip& clip, const std::string& path);

}  // namespace intonarank
