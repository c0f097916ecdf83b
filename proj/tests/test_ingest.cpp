#include <doctest.h>

#include "support/support.hpp"
#include "timeqa/core/errors.hpp"
#include "timeqa/core/io.hpp"
#include "timeqa/ingest/parse.hpp"

using namespace timeqa;
using namespace timeqa::ingest;

namespace {

bool mentions(const std::vector<std::string>& msgs, const std::string& needle) {
    for (const auto& m : msgs)
        if (m.find(needle) != std::string::npos) return true;
    return false;
}

}  // namespace

TEST_SUITE("ingest") {
    TEST_CASE("one caption event maps directly") {
        auto clips = parse_corpus_text(SchemaId::timestamped_caption,
                                       R"({"clip_id":"c1","duration_s":90,"frame_count":2700,)"
                                       R"("events":[{"description":"a dog runs","start_s":10,"end_s":25}]})");
        REQUIRE(clips.size() == 1);
        const auto& events = std::get<std::vector<TemporalEvent>>(clips[0].payload);
        REQUIRE(events.size() == 1);
        CHECK(events[0].start_s == 10);
        CHECK(events[0].end_s == 25);
        CHECK(events[0].video_duration_s == 90);
        CHECK(clips[0].video_uri == "c1");
    }

    TEST_CASE("start equal to end is a temporal inconsistency") {
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::action_interval,
                                          R"({"clip_id":"a","duration_s":10,"fps":10,"actions":[{"label":"x","start_s":5.0,"end_s":5.0}]})"),
                        TemporalInconsistency);
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::goal_step,
                                          R"({"clip_id":"g","duration_s":10,"fps":10,"goal":"g","steps":[{"description":"s","start_s":6,"end_s":2}]})"),
                        TemporalInconsistency);
    }

    TEST_CASE("duplicate clip ids are rejected with the record index") {
        const std::string rec = R"({"clip_id":"dup","duration_s":10,"fps":10,"actions":[{"label":"x","start_s":1,"end_s":2}]})";
        try {
            parse_corpus_text(SchemaId::action_interval, rec + "\n" + rec + "\n");
            FAIL("expected SchemaViolation");
        } catch (const SchemaViolation& e) {
            CHECK(e.record_index() == 1);
        }
    }

    TEST_CASE("empty corpora") {
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::bbox_track, "\n\n"), EmptyCorpus);
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::bbox_track, "[]"), EmptyCorpus);
    }

    TEST_CASE("validate_clip names field and rule") {
        NormalizedClip clip{"c", "c", 3, 90, 0, 0, std::vector<BBoxTrack>{tsupport::track_of({{0.2, 0.5}, {0.4, 0.5}})}};
        CHECK(validate_clip(clip).empty());
        std::get<0>(clip.payload)[0].boxes[1].x_center = 1.3;
        auto v = validate_clip(clip);
        REQUIRE(v.size() == 1);
        CHECK(mentions(v, "x_center"));

        NormalizedClip steps{"s", "s", 60, 600, 0, 0,
                             StepSequence{"goal", {{"a", 0, 10, true}, {"b", 8, 20, true}, {"c", 21, 30, true}}}};
        auto sv = validate_clip(steps);
        REQUIRE(sv.size() == 1);
        CHECK(mentions(sv, "steps[0]"));
        CHECK(mentions(sv, "steps[1]"));
        CHECK(mentions(sv, "overlap"));
    }

    TEST_CASE("pixel boxes are normalized and need frame dimensions") {
        auto clips = parse_corpus_text(SchemaId::bbox_track,
                                       R"({"clip_id":"p","duration_s":1,"fps":10,"frame_width":200,"frame_height":100,)"
                                       R"("tracks":[{"object_id":"1","category":"car","boxes":[)"
                                       R"({"frame_index":0,"xmin":0,"ymin":0,"xmax":100,"ymax":50},)"
                                       R"({"frame_index":3,"bbox":{"xmin":100,"ymin":50,"xmax":200,"ymax":100}}]}]})");
        const auto& box = std::get<std::vector<BBoxTrack>>(clips[0].payload)[0].boxes;
        CHECK(box[0].x_center == doctest::Approx(0.25));
        CHECK(box[0].y_center == doctest::Approx(0.25));
        CHECK(box[0].width == doctest::Approx(0.5));
        CHECK(box[1].x_center == doctest::Approx(0.75));
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::bbox_track,
                                          R"({"clip_id":"p","duration_s":1,"fps":10,"tracks":[{"object_id":"1","category":"car",)"
                                          R"("boxes":[{"frame_index":0,"xmin":0,"ymin":0,"xmax":10,"ymax":5}]}]})"),
                        SchemaViolation);
    }

    TEST_CASE("corpus-native layouts") {
        SUBCASE("ActivityNet keyed by video") {
            auto clips = parse_corpus_text(SchemaId::timestamped_caption,
                                           R"({"v_b":{"duration":60,"timestamps":[[1,5],[10,20]],"sentences":["x","y"]},)"
                                           R"("v_a":{"duration":30,"timestamps":[[0,3]],"sentences":["z"]}})",
                                           ParseOptions{25});
            REQUIRE(clips.size() == 2);
            CHECK(clips[0].clip_id == "v_a");
            CHECK(clips[0].frame_count == 750);
            CHECK(std::get<std::vector<TemporalEvent>>(clips[1].payload).size() == 2);
        }
        SUBCASE("Charades action strings") {
            auto clips = parse_corpus_text(SchemaId::action_interval,
                                           R"({"clip_id":"ch","duration_s":30,"fps":24,"actions":"c092 11.90 21.20;c147 0.00 12.60"})");
            const auto& acts = std::get<std::vector<ActionInterval>>(clips[0].payload);
            REQUIRE(acts.size() == 2);
            CHECK(acts[0].action_label == "c092");
            CHECK(acts[1].end_s == doctest::Approx(12.6));
        }
        SUBCASE("Ego4D goal steps") {
            auto clips = parse_corpus_text(SchemaId::goal_step,
                                           R"([{"video_uid":"e","duration":100,"fps":30,"goal_description":"cook",)"
                                           R"("segments":[{"step_description":"a","start_time":1,"end_time":4,"is_relevant":"essential"},)"
                                           R"({"step_description":"b","start_time":5,"end_time":9,"is_relevant":"optional"}]}])");
            const auto& seq = std::get<StepSequence>(clips[0].payload);
            CHECK(seq.goal_description == "cook");
            CHECK(seq.steps[0].is_essential);
            CHECK_FALSE(seq.steps[1].is_essential);
        }
        SUBCASE("VidOR trajectories") {
            auto clips = parse_corpus_text(SchemaId::bbox_track,
                                           R"({"video_id":"vo","fps":2,"frame_count":2,"width":100,"height":100,)"
                                           R"("subject/objects":[{"tid":3,"category":"bird"}],)"
                                           R"("trajectories":[[{"tid":3,"bbox":{"xmin":0,"ymin":0,"xmax":20,"ymax":20}}],)"
                                           R"([{"tid":3,"bbox":{"xmin":60,"ymin":0,"xmax":80,"ymax":20}}]]})");
            const auto& t = std::get<std::vector<BBoxTrack>>(clips[0].payload);
            REQUIRE(t.size() == 1);
            CHECK(t[0].category == "bird");
            CHECK(t[0].boxes[1].x_center == doctest::Approx(0.7));
        }
    }

    TEST_CASE("missing frame information") {
        const char* rec = R"({"clip_id":"n","duration_s":10,"actions":[{"label":"x","start_s":1,"end_s":2}]})";
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::action_interval, rec), SchemaViolation);
        CHECK(parse_corpus_text(SchemaId::action_interval, rec, ParseOptions{10})[0].frame_count == 100);
    }

    TEST_CASE("schema mismatch is a schema violation") {
        CHECK_THROWS_AS(parse_corpus_text(SchemaId::bbox_track,
                                          R"({"schema":"goal_step","clip_id":"x","duration_s":1,"fps":1,"tracks":[]})"),
                        SchemaViolation);
    }

    TEST_CASE("fixture corpus parses deterministically into valid clips") {
        const auto dir = tsupport::source_dir() / "fixtures/corpus";
        std::vector<CorpusSource> sources = {{SchemaId::bbox_track, dir / "tracks.jsonl"},
                                             {SchemaId::goal_step, dir / "goalsteps.json"},
                                             {SchemaId::timestamped_caption, dir / "captions.json"},
                                             {SchemaId::action_interval, dir / "actions.jsonl"}};
        auto a = parse_corpora(sources, ParseOptions{30});
        auto b = parse_corpora(sources, ParseOptions{30});
        REQUIRE(a.size() == b.size());
        CHECK(a.size() > 200);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(validate_clip(a[i]).empty());
            CHECK(clip_to_json(a[i]) == clip_to_json(b[i]));
            CHECK(clip_to_json(clip_from_json(clip_to_json(a[i]))) == clip_to_json(a[i]));
        }
        CHECK(a.front().schema() == SchemaId::bbox_track);
        CHECK(a.back().schema() == SchemaId::action_interval);
    }
}
