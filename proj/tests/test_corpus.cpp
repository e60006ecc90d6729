#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "intonarank/corpus.hpp"
#include "intonarank/features.hpp"
#include "intonarank/pitch.hpp"

using namespace intonarank;
namespace fs = std::filesystem;

TEST_CASE("generate_clip is bit-deterministic per seed") {
    SynthSpec spec;
    spec.duration = 1.0;
    spec.base_f0 = 220.0;
    spec.contour = Contour::rise;
    spec.terminal_shift = 6.0;
    spec.snr_db = 40.0;
    spec.seed = 7;
    const AudioClip a = generate_clip(spec);
    const AudioClip b = generate_clip(spec);
    REQUIRE(a.samples.size() == b.samples.size());
    CHECK(a.samples == b.samples);
    spec.seed = 8;
    CHECK(generate_clip(spec).samples != a.samples);
}

TEST_CASE("6-semitone rise lands near 311 Hz at the end") {
    SynthSpec spec;
    spec.duration = 1.0;
    spec.base_f0 = 220.0;
    spec.contour = Contour::rise;
    spec.terminal_shift = 6.0;
    spec.snr_db = 40.0;
    spec.seed = 11;
    const AudioClip clip = generate_clip(spec);
    const PitchTrack track = estimate_f0(clip);

    // Median voiced f0 over the last 50 ms, measured by the f0 estimator.
    std::vector<double> tail;
    for (const auto& f : track.frames) {
        if (f.voiced && f.time >= clip.duration() - 0.05) tail.push_back(f.f0);
    }
    REQUIRE(tail.size() >= 3);
    std::sort(tail.begin(), tail.end());
    const double median = tail[tail.size() / 2];
    CHECK(std::abs(median - 220.0 * std::exp2(0.5)) < 5.0);  // 311.13 Hz
}

TEST_CASE("zero terminal shift keeps the terminal slope flat") {
    SynthSpec spec;
    spec.duration = 1.0;
    spec.base_f0 = 220.0;
    spec.contour = Contour::rise;
    spec.terminal_shift = 0.0;
    spec.snr_db = 40.0;
    spec.seed = 11;
    const ProsodyFeatures f = extract_features(generate_clip(spec));
    CHECK(std::abs(f.terminal_slope) <= 10.0);
}

TEST_CASE("generated clips obey the AudioClip invariants (property)") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> dur(0.3, 4.0);
    std::uniform_real_distribution<double> f0(80.0, 400.0);
    std::uniform_real_distribution<double> shift(0.0, 12.0);
    std::uniform_real_distribution<double> snr(0.0, 60.0);
    for (int i = 0; i < 50; ++i) {
        SynthSpec spec;
        spec.duration = dur(rng);
        spec.base_f0 = f0(rng);
        spec.contour = (i % 2 == 0) ? Contour::rise : Contour::fall;
        spec.terminal_shift = shift(rng);
        spec.snr_db = snr(rng);
        spec.seed = rng();
        CHECK_NOTHROW(validate(generate_clip(spec)));
    }
}

TEST_CASE("spec invariant violations are rejected") {
    SynthSpec spec;
    spec.duration = 0.1;
    CHECK_THROWS_AS(generate_clip(spec), std::invalid_argument);
    spec.duration = 1.0;
    spec.base_f0 = 50.0;
    CHECK_THROWS_AS(generate_clip(spec), std::invalid_argument);
    spec.base_f0 = 220.0;
    spec.terminal_shift = 13.0;
    CHECK_THROWS_AS(generate_clip(spec), std::invalid_argument);
}

TEST_CASE("generate_corpus contract and determinism") {
    const fs::path dir1 = fs::temp_directory_path() / "intonarank_corpus_a";
    const fs::path dir2 = fs::temp_directory_path() / "intonarank_corpus_b";
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    const auto manifest = generate_corpus(6, 4, 42, dir1.string());
    REQUIRE(manifest.size() == 10);
    std::size_t statements = 0, questions = 0;
    for (const auto& e : manifest) {
        statements += (e.intonation == Intonation::statement) ? 1 : 0;
        questions += (e.intonation == Intonation::question) ? 1 : 0;
        REQUIRE(e.terminal_shift.has_value());
        CHECK(*e.terminal_shift >= 2.0);
        CHECK(*e.terminal_shift <= 8.0);
        CHECK(std::find(kEmotions.begin(), kEmotions.end(), e.emotion) != kEmotions.end());
        CHECK(fs::exists(dir1 / e.path));
    }
    CHECK(statements == 6);
    CHECK(questions == 4);

    generate_corpus(6, 4, 42, dir2.string());
    std::ifstream a(dir1 / "manifest.jsonl", std::ios::binary);
    std::ifstream b(dir2 / "manifest.jsonl", std::ios::binary);
    const std::string bytes_a((std::istreambuf_iterator<char>(a)), {});
    const std::string bytes_b((std::istreambuf_iterator<char>(b)), {});
    CHECK(bytes_a == bytes_b);

    // Round trip through the parser is structurally equal.
    const auto parsed = read_manifest((dir1 / "manifest.jsonl").string());
    REQUIRE(parsed.size() == manifest.size());
    for (std::size_t i = 0; i < parsed.size(); ++i) {
        CHECK(parsed[i].path == manifest[i].path);
        CHECK(parsed[i].speaker == manifest[i].speaker);
        CHECK(parsed[i].emotion == manifest[i].emotion);
        CHECK(parsed[i].intonation == manifest[i].intonation);
        CHECK(parsed[i].terminal_shift == manifest[i].terminal_shift);
    }

    CHECK_THROWS_AS(generate_corpus(0, 4, 1, dir1.string()), std::invalid_argument);
    fs::remove_all(dir1);
    fs::remove_all(dir2);
}

TEST_CASE("manifest parser rejects bad entries") {
    const fs::path p = fs::temp_directory_path() / "intonarank_manifest_bad.jsonl";
    std::ofstream(p) << R"({"path":"x.wav","speaker":"s","emotion":"bored","intonation":"statement","terminal_shift":null})"
                     << '\n';
    CHECK_THROWS_AS(read_manifest(p.string()), FormatError);
    std::ofstream(p, std::ios::trunc) << "not json\n";
    CHECK_THROWS_AS(read_manifest(p.string()), FormatError);
    fs::remove(p);
}
