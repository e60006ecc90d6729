#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "nlohmann/json.hpp"

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::string kCli = INTONARANK_CLI_PATH;

struct RunResult {
    int exit_code = -1;
    std::string out;
};

RunResult run(const std::string& args, const std::string& env = "") {
    const std::string cmd = env + (env.empty() ? "" : " ") + kCli + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    RunResult res;
    std::array<char, 4096> buf{};
    std::size_t n = 0;
    while ((n = fread(buf.data(), 1, buf.size(), pipe)) > 0) res.out.append(buf.data(), n);
    const int status = pclose(pipe);
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return res;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

json first_line_json(const std::string& out) {
    const auto pos = out.find('\n');
    return json::parse(out.substr(0, pos));
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("gen-corpus writes clips and a manifest, deterministically") {
    TempDir tmp("intonarank_cli_gen");
    const auto d1 = (tmp.path / "r1").string();
    const auto d2 = (tmp.path / "r2").string();

    const RunResult r1 = run("gen-corpus --statements 8 --questions 8 --seed 7 --out " + d1);
    CHECK(r1.exit_code == 0);
    const json report = first_line_json(r1.out);
    CHECK(report["entries"] == 16);
    CHECK(fs::exists(fs::path(d1) / "manifest.jsonl"));
    CHECK(fs::exists(fs::path(d1) / "s0000.wav"));
    CHECK(fs::exists(fs::path(d1) / "q0007.wav"));

    const RunResult r2 = run("gen-corpus --statements 8 --questions 8 --seed 7 --out " + d2);
    CHECK(r2.exit_code == 0);
    CHECK(slurp(fs::path(d1) / "manifest.jsonl") == slurp(fs::path(d2) / "manifest.jsonl"));
    CHECK(slurp(fs::path(d1) / "q0003.wav") == slurp(fs::path(d2) / "q0003.wav"));
}

TEST_CASE("gen-corpus without a seed is a usage error") {
    TempDir tmp("intonarank_cli_noseed");
    const RunResult r = run("gen-corpus --statements 2 --questions 2 --out " + (tmp.path / "x").string());
    CHECK(r.exit_code == 2);
}

TEST_CASE("INTONARANK_SEED provides the seed fallback") {
    TempDir tmp("intonarank_cli_envseed");
    const auto d1 = (tmp.path / "flag").string();
    const auto d2 = (tmp.path / "env").string();
    CHECK(run("gen-corpus --statements 3 --questions 3 --seed 21 --out " + d1).exit_code == 0);
    CHECK(run("gen-corpus --statements 3 --questions 3 --out " + d2, "INTONARANK_SEED=21").exit_code == 0);
    CHECK(slurp(fs::path(d1) / "manifest.jsonl") == slurp(fs::path(d2) / "manifest.jsonl"));
}

TEST_CASE("train, score and label pipeline") {
    TempDir tmp("intonarank_cli_train");
    const auto dir = (tmp.path / "corpus").string();
    REQUIRE(run("gen-corpus --statements 20 --questions 20 --seed 7 --out " + dir).exit_code == 0);
    const std::string manifest = dir + "/manifest.jsonl";
    const auto model1 = (tmp.path / "m1.json").string();
    const auto model2 = (tmp.path / "m2.json").string();

    const RunResult t1 = run("train --manifest " + manifest + " --model " + model1 + " --seed 5");
    REQUIRE(t1.exit_code == 0);
    const json report = first_line_json(t1.out);
    CHECK(report["pair_order_accuracy"] == 1.0);
    CHECK(report["sigma"] == 1.0);

    // Retraining the same inputs produces byte-identical artifacts.
    REQUIRE(run("train --manifest " + manifest + " --model " + model2 + " --seed 5").exit_code == 0);
    CHECK(slurp(model1) == slurp(model2));

    // Scoring a rising clip from the corpus gives a higher intensity than a
    // falling one.
    const RunResult q = run("score --model " + model1 + " --input " + dir + "/q0004.wav");
    const RunResult s = run("score --model " + model1 + " --input " + dir + "/s0004.wav");
    REQUIRE(q.exit_code == 0);
    REQUIRE(s.exit_code == 0);
    CHECK(first_line_json(q.out)["intensity"].get<double>() >
          first_line_json(s.out)["intensity"].get<double>());

    // Score runs are byte-reproducible.
    CHECK(run("score --model " + model1 + " --input " + dir + "/q0004.wav").out == q.out);

    // Manual intensity mode echoes the value and emits the embedding.
    const RunResult manual = run("score --model " + model1 + " --intensity 0.9 --seed 1");
    REQUIRE(manual.exit_code == 0);
    const json mreport = first_line_json(manual.out);
    CHECK(mreport["intensity"] == 0.9);
    CHECK(mreport["h_i"].size() == 16);
    CHECK(run("score --model " + model1 + " --intensity 0.9 --seed 1").out == manual.out);

    CHECK(run("score --model " + model1 + " --intensity 1.5").exit_code == 6);
    CHECK(run("score --model " + model1).exit_code == 2);
    CHECK(run("score --model " + model1 + " --intensity 0.5 --input " + dir + "/q0004.wav").exit_code == 2);

    // label rewrites only the intonation field and agrees with the generator.
    const std::string before = slurp(manifest);
    REQUIRE(run("label --manifest " + manifest + " --seed 11").exit_code == 0);
    const std::string after = slurp(manifest);

    std::istringstream before_s(before), after_s(after);
    std::string line_b, line_a;
    int agree = 0, total = 0;
    while (std::getline(before_s, line_b) && std::getline(after_s, line_a)) {
        const json jb = json::parse(line_b), ja = json::parse(line_a);
        CHECK(jb["path"] == ja["path"]);
        CHECK(jb["speaker"] == ja["speaker"]);
        CHECK(jb["emotion"] == ja["emotion"]);
        CHECK(jb["terminal_shift"] == ja["terminal_shift"]);
        ++total;
        agree += (jb["intonation"] == ja["intonation"]) ? 1 : 0;
    }
    CHECK(total == 40);
    CHECK(agree >= 38);  // >= 95%
}

TEST_CASE("train exits 4 when a label class is missing") {
    TempDir tmp("intonarank_cli_oneclass");
    const auto dir = (tmp.path / "corpus").string();
    REQUIRE(run("gen-corpus --statements 4 --questions 4 --seed 3 --out " + dir).exit_code == 0);

    // Rewrite every label to statement.
    const std::string manifest = dir + "/manifest.jsonl";
    std::istringstream in(slurp(manifest));
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        json j = json::parse(line);
        j["intonation"] = "statement";
        out << j.dump() << '\n';
    }
    std::ofstream(manifest, std::ios::trunc) << out.str();

    CHECK(run("train --manifest " + manifest + " --model " + (tmp.path / "m.json").string() +
              " --seed 5").exit_code == 4);
}

TEST_CASE("eval-metrics on a file against itself reports zeros") {
    TempDir tmp("intonarank_cli_eval");
    const auto dir = (tmp.path / "corpus").string();
    REQUIRE(run("gen-corpus --statements 2 --questions 2 --seed 9 --out " + dir).exit_code == 0);
    const std::string wav = dir + "/q0000.wav";

    const RunResult r = run("eval-metrics --ref " + wav + " --syn " + wav);
    REQUIRE(r.exit_code == 0);
    const json j = first_line_json(r.out);
    CHECK(j["mcd_db"] == 0.0);
    CHECK(j["ffe"] == 0.0);
    CHECK(j["duration_mse"] == 0.0);
    CHECK(j["frames_compared"].get<int>() > 0);

    CHECK(run("eval-metrics --ref " + wav + " --syn /does/not/exist.wav").exit_code == 3);
}

TEST_CASE("grad-check passes and is seeded") {
    const RunResult r = run("grad-check --seed 3");
    CHECK(r.exit_code == 0);
    std::istringstream lines(r.out);
    std::string line;
    int checks = 0;
    while (std::getline(lines, line)) {
        const json j = json::parse(line);
        if (j.contains("check")) {
            ++checks;
            CHECK(j["pass"] == true);
            CHECK(j["max_rel_error"].get<double>() <= 1e-4);
        }
    }
    CHECK(checks == 5);
    CHECK(run("grad-check").exit_code == 2);  // no seed anywhere
}

TEST_CASE("config file supplies defaults, flags override") {
    TempDir tmp("intonarank_cli_config");
    const auto dir = (tmp.path / "corpus").string();
    REQUIRE(run("gen-corpus --statements 6 --questions 6 --seed 13 --out " + dir).exit_code == 0);

    const auto cfg_path = (tmp.path / "run.json").string();
    {
        json cfg;
        cfg["seed"] = 5;
        cfg["paths"] = {{"manifest", dir + "/manifest.jsonl"},
                        {"model_file", (tmp.path / "from_config.json").string()}};
        cfg["ranker"] = {{"C", 0.1}};
        cfg["sigma"] = "auto";
        std::ofstream(cfg_path) << cfg.dump(2);
    }

    CHECK(run("--config " + cfg_path + " train").exit_code == 0);
    CHECK(fs::exists(tmp.path / "from_config.json"));

    // A flag overrides the config value.
    CHECK(run("--config " + cfg_path + " train --model " + (tmp.path / "flag.json").string())
              .exit_code == 0);
    CHECK(fs::exists(tmp.path / "flag.json"));

    CHECK(run("--config /no/such/config.json train").exit_code == 3);
}

TEST_CASE("unknown subcommands and missing arguments are usage errors") {
    CHECK(run("frobnicate").exit_code == 2);
    CHECK(run("").exit_code == 2);
    CHECK(run("train --seed 5").exit_code == 2);  // no manifest/model anywhere
}

TEST_CASE("I/O failures exit 3") {
    CHECK(run("gen-corpus --statements 2 --questions 2 --seed 1 --out /proc/intonarank_nope").exit_code == 3);
    CHECK(run("label --manifest /does/not/exist.jsonl --seed 1").exit_code == 3);
}

TEST_CASE("solver non-convergence exits 5") {
    TempDir tmp("intonarank_cli_noconv");
    const auto dir = (tmp.path / "corpus").string();
    REQUIRE(run("gen-corpus --statements 6 --questions 6 --seed 2 --out " + dir).exit_code == 0);
    CHECK(run("train --manifest " + dir + "/manifest.jsonl --model " +
              (tmp.path / "m.json").string() + " --seed 5 --max-iters 2").exit_code == 5);
}

TEST_CASE("feature dump has the documented shape") {
    TempDir tmp("intonarank_cli_dump");
    const auto dir = (tmp.path / "corpus").string();
    REQUIRE(run("gen-corpus --statements 3 --questions 3 --seed 4 --out " + dir).exit_code == 0);
    const auto dump = (tmp.path / "features.jsonl").string();
    REQUIRE(run("train --manifest " + dir + "/manifest.jsonl --model " +
                (tmp.path / "m.json").string() + " --seed 5 --features-out " + dump).exit_code == 0);

    std::istringstream lines(slurp(dump));
    std::string line;
    int n = 0;
    while (std::getline(lines, line)) {
        const json j = json::parse(line);
        CHECK(j["features"].size() == 8);
        CHECK(j["window"].size() == 2);
        CHECK(j["window"][0].get<double>() < j["window"][1].get<double>());
        CHECK(!j["path"].get<std::string>().empty());
        ++n;
    }
    CHECK(n == 6);
}

TEST_CASE("report_file duplicates the stdout report") {
    TempDir tmp("intonarank_cli_report");
    const auto report = (tmp.path / "report.jsonl").string();
    const auto cfg_path = (tmp.path / "cfg.json").string();
    {
        json cfg;
        cfg["paths"] = {{"report_file", report}};
        std::ofstream(cfg_path) << cfg.dump();
    }
    const RunResult r = run("--config " + cfg_path + " grad-check --seed 3");
    CHECK(r.exit_code == 0);
    CHECK(slurp(report) == r.out);
}
