#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "intonarank/audio.hpp"
#include "intonarank/intonation.hpp"

namespace intonarank {

enum class Contour { fall, rise };

// Recipe for one synthetic clip: a three-partial harmonic tone whose pitch
// ramps by terminal_shift semitones over the final-syllable window, plus
// additive Gaussian noise at the given SNR.
struct SynthSpec {
    double duration = 1.0;        // seconds, [0.3, 10]
    double base_f0 = 220.0;       // Hz, [80, 400]
    Contour contour = Contour::fall;
    double terminal_shift = 0.0;  // semitones, [0, 12]
    double snr_db = 40.0;
    std::uint64_t seed = 0;
    int sample_rate = 16000;
};

inline constexpr std::array<const char*, 5> kEmotions{"neutral", "sad", "happy",
                                                      "angry", "surprise"};

struct ManifestEntry {
    std::string path;     // relative to the manifest's directory
    std::string speaker;
    std::string emotion;  // one of kEmotions
    Intonation intonation = Intonation::unlabeled;
    std::optional<double> terminal_shift;  // generator ground truth
};

// Deterministic per seed. Throws std::invalid_argument on spec violations.
AudioClip generate_clip(const SynthSpec& spec);

// Writes n_statement falling and n_question rising clips (terminal shift
// uniform in [2, 8] semitones) plus manifest.jsonl under out_dir. Returns the
// manifest. Deterministic per seed.
std::vector<ManifestEntry> generate_corpus(int n_statement, int n_question,
                                           std::uint64_t seed,
                                           const std::string& out_dir);

// JSONL, one entry per line. write_manifest goes through a temp file + rename.
void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path);
std::vector<ManifestEntry> read_manifest(const std::string& path);

}  // namespace intonarank
