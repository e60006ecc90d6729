#include "intonarank/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>

#include "intonarank/framing.hpp"
#include "nlohmann/json.hpp"

namespace intonarank {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void validate(const SynthSpec& spec) {
    if (!(spec.duration >= 0.3 && spec.duration <= 10.0)) {
        throw std::invalid_argument("SynthSpec: duration outside [0.3, 10] s");
    }
    if (!(spec.base_f0 >= 80.0 && spec.base_f0 <= 400.0)) {
        throw std::invalid_argument("SynthSpec: base_f0 outside [80, 400] Hz");
    }
    if (!(spec.terminal_shift >= 0.0 && spec.terminal_shift <= 12.0)) {
        throw std::invalid_argument("SynthSpec: terminal_shift outside [0, 12] st");
    }
    if (!std::isfinite(spec.snr_db)) {
        throw std::invalid_argument("SynthSpec: snr_db not finite");
    }
    if (spec.sample_rate < 8000) {
        throw std::invalid_argument("SynthSpec: sample_rate below 8000 Hz");
    }
}

// The semitone ramp spans the final window but tops out kTerminalHold
// seconds before the end; 25 ms analysis frames never reach the very last
// instant, so without the hold the endpoint pitch could not be observed.
constexpr double kTerminalHold = 0.08;

}  // namespace

AudioClip generate_clip(const SynthSpec& spec) {
    validate(spec);

    const int sr = spec.sample_rate;
    const auto n = static_cast<std::size_t>(std::lround(spec.duration * sr));
    const double total = static_cast<double>(n) / sr;

    const double win_start = std::max(0.0, total - kFinalWindowSeconds);
    const double win_len = total - win_start;
    const double hold = std::min(kTerminalHold, 0.25 * win_len);
    const double ramp_end = total - hold;
    const double ramp_len = ramp_end - win_start;
    const double shift = (spec.contour == Contour::rise ? spec.terminal_shift
                                                        : -spec.terminal_shift);

    AudioClip clip;
    clip.sample_rate = sr;
    clip.samples.resize(n);

    // Three partials at 0 / -6 / -12 dB relative amplitude.
    constexpr double a1 = 0.3, a2 = 0.15, a3 = 0.075;

    double phase = 0.0;
    double signal_power = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / sr;
        double st = 0.0;
        if (t >= ramp_end) {
            st = shift;
        } else if (t > win_start && ramp_len > 0.0) {
            st = shift * (t - win_start) / ramp_len;
        }
        const double f0 = spec.base_f0 * std::exp2(st / 12.0);
        phase += 2.0 * std::numbers::pi * f0 / sr;
        const double s = a1 * std::sin(phase) + a2 * std::sin(2.0 * phase) +
                         a3 * std::sin(3.0 * phase);
        clip.samples[i] = s;
        signal_power += s * s;
    }
    signal_power /= static_cast<double>(n);

    const double noise_std =
        std::sqrt(signal_power * std::pow(10.0, -spec.snr_db / 10.0));
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (double& s : clip.samples) {
        s = std::clamp(s + noise_std * gauss(rng), -1.0, 1.0);
    }
    return clip;
}

namespace {

json entry_to_json(const ManifestEntry& e) {
    json j;
    j["path"] = e.path;
    j["speaker"] = e.speaker;
    j["emotion"] = e.emotion;
    j["intonation"] = to_string(e.intonation);
    if (e.terminal_shift) {
        j["terminal_shift"] = *e.terminal_shift;
    } else {
        j["terminal_shift"] = nullptr;
    }
    return j;
}

ManifestEntry entry_from_json(const json& j) {
    ManifestEntry e;
    e.path = j.at("path").get<std::string>();
    e.speaker = j.at("speaker").get<std::string>();
    e.emotion = j.at("emotion").get<std::string>();
    e.intonation = intonation_from_string(j.at("intonation").get<std::string>());
    const auto& shift = j.at("terminal_shift");
    if (!shift.is_null()) e.terminal_shift = shift.get<double>();

    if (e.path.empty()) throw FormatError("manifest entry with empty path");
    if (std::find(kEmotions.begin(), kEmotions.end(), e.emotion) == kEmotions.end()) {
        throw FormatError("manifest entry with unknown emotion: " + e.emotion);
    }
    return e;
}

}  // namespace

void write_manifest(const std::vector<ManifestEntry>& entries,
                    const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open for writing: " + tmp);
        for (const auto& e : entries) {
            out << entry_to_json(e).dump() << '\n';
        }
        if (!out) throw IoError("write failed: " + tmp);
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw IoError("rename failed: " + tmp + " -> " + path);
}

std::vector<ManifestEntry> read_manifest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<ManifestEntry> entries;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded()) throw FormatError("bad JSON line in " + path);
        entries.push_back(entry_from_json(j));
    }
    return entries;
}

std::vector<ManifestEntry> generate_corpus(int n_statement, int n_question,
                                           std::uint64_t seed,
                                           const std::string& out_dir) {
    if (n_statement < 1 || n_question < 1) {
        throw std::invalid_argument("generate_corpus: counts must be >= 1");
    }

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create directory: " + out_dir);

    std::mt19937_64 rng(seed);
    // A typical per-speaker pitch band; a wider base range would swamp the
    // contour cues with speaker variation.
    std::uniform_real_distribution<double> dur_dist(0.8, 2.0);
    std::uniform_real_distribution<double> f0_dist(200.0, 240.0);
    std::uniform_real_distribution<double> shift_dist(2.0, 8.0);
    std::uniform_real_distribution<double> snr_dist(30.0, 50.0);
    std::uniform_int_distribution<int> emotion_dist(0, static_cast<int>(kEmotions.size()) - 1);
    std::uniform_int_distribution<int> speaker_dist(1, 10);

    std::vector<ManifestEntry> manifest;
    manifest.reserve(static_cast<std::size_t>(n_statement + n_question));

    const auto make_entries = [&](int count, Intonation label, const char* stem) {
        for (int i = 0; i < count; ++i) {
            SynthSpec spec;
            spec.duration = dur_dist(rng);
            spec.base_f0 = f0_dist(rng);
            spec.terminal_shift = shift_dist(rng);
            spec.snr_db = snr_dist(rng);
            spec.contour = (label == Intonation::question) ? Contour::rise
                                                           : Contour::fall;
            spec.seed = rng();
            const int emotion = emotion_dist(rng);
            const int speaker = speaker_dist(rng);

            char name[32];
            std::snprintf(name, sizeof(name), "%s%04d.wav", stem, i);
            write_wav(generate_clip(spec), (fs::path(out_dir) / name).string());

            char spk[16];
            std::snprintf(spk, sizeof(spk), "spk%02d", speaker);
            manifest.push_back(ManifestEntry{name, spk, kEmotions[static_cast<std::size_t>(emotion)],
                                             label, spec.terminal_shift});
        }
    };

    make_entries(n_statement, Intonation::statement, "s");
    make_entries(n_question, Intonation::question, "q");

    write_manifest(manifest, (fs::path(out_dir) / "manifest.jsonl").string());
    return manifest;
}

}  // namespace intonarank
