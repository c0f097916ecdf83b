#include <doctest.h>

#include <fstream>

#include "support/support.hpp"
#include "timeqa/core/errors.hpp"
#include "timeqa/core/io.hpp"
#include "timeqa/pipeline/config.hpp"
#include "timeqa/pipeline/stages.hpp"
#include "timeqa/pipeline/transcode.hpp"

using namespace timeqa;
using namespace timeqa::pipeline;
namespace fs = std::filesystem;

namespace {

nlohmann::json fixture_json() {
    return nlohmann::json::parse(read_text(tsupport::source_dir() / "fixtures" / "pipeline.json"), nullptr, true, true);
}

PipelineConfig fixture_config() { return parse_config(fixture_json(), tsupport::source_dir() / "fixtures"); }

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    std::string line;
    while (std::getline(in, line)) ++n;
    return n;
}

void keep_first_lines(const fs::path& p, std::size_t n) {
    std::ifstream in(p);
    std::string line, out;
    for (std::size_t i = 0; i < n && std::getline(in, line); ++i) out += line + "\n";
    in.close();
    std::ofstream(p, std::ios::trunc) << out;
}

}  // namespace

TEST_SUITE("pipeline") {
    TEST_CASE("config validation") {
        auto base = tsupport::source_dir() / "fixtures";
        CHECK_NOTHROW(parse_config(fixture_json(), base));

        auto j = fixture_json();
        j["taskgen"]["min_displacment"] = 0.2;
        CHECK_THROWS_AS(parse_config(j, base), ConfigInvalid);
        j = fixture_json();
        j["mtp"]["frame_index_fraction"] = 0.7;
        CHECK_THROWS_AS(parse_config(j, base), ConfigInvalid);
        j = fixture_json();
        j["mtp"]["index_base"] = 2;
        CHECK_THROWS_AS(parse_config(j, base), ConfigInvalid);
        j = fixture_json();
        j["debias"]["balance_gap"] = "one";
        CHECK_THROWS_AS(parse_config(j, base), ConfigInvalid);
        j = fixture_json();
        j["audit"]["judges"].erase(2);
        CHECK_THROWS_AS(parse_config(j, base), ConfigInvalid);

        tsupport::TempDir dir;
        std::ofstream(dir / "bad.json") << "{ \"seed\": ";
        CHECK_THROWS_AS(load_config(dir / "bad.json"), ConfigInvalid);
    }

    TEST_CASE("seed override changes the config hash") {
        auto a = fixture_config();
        auto b = a;
        set_seed(b, 43);
        CHECK(config_hash(a) != config_hash(b));
        CHECK(b.normalized["seed"] == 43);
        CHECK(section_hash(a, {"audit"}) != section_hash(a, {"mtp"}));
    }

    TEST_CASE("render_manifest examples") {
        EditManifest m{"v1.mp4", 20, 200, 0, 0, {Crop{3, 9}, Reverse{}}};
        auto plan = render_manifest(m);
        REQUIRE(plan.size() == 2);
        CHECK(plan[0].op == "trim");
        CHECK(plan[1].op == "reverse");

        EditManifest c{"v1.mp4", 20, 200, 0, 0, {Concat{"v2.mp4", ConcatPosition::before, 50}}};
        auto cp = render_manifest(c);
        REQUIRE(cp.size() == 1);
        CHECK(cp[0].op == "concat");
        CHECK(cp[0].args[0].second == "v2.mp4");
        CHECK(cp[0].args[1].second == "v1.mp4");

        CHECK_THROWS_AS(render_manifest(EditManifest{"v.mp4", 20, 200, 0, 0, {Crop{5, 2}}}), InvalidManifest);
        CHECK_THROWS_AS(render_manifest(EditManifest{"v.mp4", 20, 200, 0, 0, {ExtractFrame{3}, Reverse{}}}),
                        UnsupportedOperation);
        CHECK(render_manifest(EditManifest{"v.mp4", 20, 200, 0, 0, {}}).empty());
        CHECK(plan_text(plan).find("trim") == 0);
    }

    TEST_CASE("stages skip when unchanged and refuse tampered inputs") {
        tsupport::TempDir dir;
        auto cfg = fixture_config();
        RunOptions opts{dir.path(), false, {}};
        for (auto s : {Stage::ingest, Stage::generate, Stage::debias}) CHECK_FALSE(run_stage(s, cfg, opts).skipped);
        CHECK(run_stage(Stage::generate, cfg, opts).skipped);

        auto changed = cfg;
        changed.qagen.mc_fraction = 0.6;
        changed.normalized["qagen"]["mc_fraction"] = 0.6;
        CHECK_FALSE(run_stage(Stage::generate, changed, opts).skipped);
        CHECK_THROWS_AS(run_stage(Stage::audit, cfg, opts), MissingDependency);
        CHECK_NOTHROW(run_stage(Stage::debias, changed, opts));

        std::ofstream(dir / "debias/items.jsonl", std::ios::app) << "\n";
        CHECK_THROWS_AS(run_stage(Stage::audit, changed, opts), MissingDependency);

        tsupport::TempDir fresh;
        CHECK_THROWS_AS(run_stage(Stage::debias, cfg, RunOptions{fresh.path(), false, {}}), MissingDependency);
    }

    TEST_CASE("audit without judges is a config error") {
        tsupport::TempDir dir;
        auto j = fixture_json();
        j["audit"]["judges"] = nlohmann::json::array();
        auto cfg = parse_config(j, tsupport::source_dir() / "fixtures");
        RunOptions opts{dir.path(), false, {}};
        for (auto s : {Stage::ingest, Stage::generate, Stage::debias}) run_stage(s, cfg, opts);
        CHECK_THROWS_AS(run_stage(Stage::audit, cfg, opts), ConfigInvalid);
    }

    TEST_CASE("resume after an interrupted audit repeats no judge call") {
        tsupport::TempDir dir;
        auto cfg = fixture_config();
        RunOptions opts{dir.path(), false, {}};
        for (auto s : {Stage::ingest, Stage::generate, Stage::debias}) run_stage(s, cfg, opts);
        auto full = run_stage(Stage::audit, cfg, opts);
        REQUIRE(full.judge_calls > 100);
        const auto cache = dir / "cache/audit_verdicts.jsonl";
        REQUIRE(line_count(cache) == full.judge_calls);
        const auto reference = read_text(dir / "audit/benchmark.jsonl");

        // Interrupted: only the first third of the calls finished and no output was written.
        const std::size_t done = full.judge_calls / 3;
        keep_first_lines(cache, done);
        fs::remove(dir / "audit/benchmark.jsonl");

        opts.resume = true;
        auto resumed = run_stage(Stage::audit, cfg, opts);
        CHECK_FALSE(resumed.skipped);
        CHECK(resumed.cache_hits == done + full.cache_hits);
        CHECK(resumed.judge_calls == full.judge_calls - done);
        CHECK(read_text(dir / "audit/benchmark.jsonl") == reference);

        fs::remove(dir / "audit/benchmark.jsonl");
        opts.resume = false;
        auto cold = run_stage(Stage::audit, cfg, opts);
        CHECK(cold.judge_calls == full.judge_calls);
    }

    TEST_CASE("report summarizes the run") {
        tsupport::TempDir dir;
        auto cfg = fixture_config();
        RunOptions opts{dir.path(), false, {}};
        for (auto s : {Stage::ingest, Stage::generate}) run_stage(s, cfg, opts);
        auto text = run_report(dir.path());
        CHECK(text.find("generate") != std::string::npos);
        CHECK_THROWS_AS(run_report(dir / "nothing"), MissingDependency);
    }
}
