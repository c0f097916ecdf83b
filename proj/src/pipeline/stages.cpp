#include "timeqa/pipeline/stages.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "timeqa/audit/audit.hpp"
#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/io.hpp"
#include "timeqa/debias/debias.hpp"
#include "timeqa/eval/score.hpp"
#include "timeqa/judge/cache.hpp"
#include "timeqa/mtp/mtp.hpp"
#include "timeqa/pipeline/transcode.hpp"
#include "timeqa/qagen/templates.hpp"

namespace timeqa::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(Stage s) noexcept {
    switch (s) {
        case Stage::ingest: return "ingest";
        case Stage::generate: return "generate";
        case Stage::debias: return "debias";
        case Stage::mtp: return "mtp";
        case Stage::audit: return "audit";
        case Stage::evaluate: return "evaluate";
    }
    return "?";
}

std::optional<Stage> parse_stage(std::string_view s) noexcept {
    for (auto st : kAllStages)
        if (to_string(st) == s) return st;
    return std::nullopt;
}

std::vector<std::string> stage_outputs(Stage stage) {
    switch (stage) {
        case Stage::ingest: return {"ingest/clips.jsonl"};
        case Stage::generate: return {"generate/items.jsonl", "generate/edit_plan.txt"};
        case Stage::debias: return {"debias/items.jsonl", "debias/balance_report.json"};
        case Stage::mtp: return {"mtp/augmented.jsonl", "mtp/mtp_report.json"};
        case Stage::audit:
            return {"audit/benchmark.jsonl", "audit/removed.jsonl",    "audit/verdicts.jsonl",
                    "audit/diagnostics.json", "audit/audit_report.txt", "audit/frame_plan.txt"};
        case Stage::evaluate: return {"evaluate/score.json", "evaluate/score.txt"};
    }
    return {};
}

namespace {

json record_json(const StageRecord& r) {
    return {{"complete", r.complete}, {"config_hash", r.config_hash}, {"inputs", r.inputs},
            {"outputs", r.outputs},   {"counts", r.counts},           {"drops", r.drops}};
}

StageRecord record_from(const json& j) {
    StageRecord r;
    r.complete = j.value("complete", false);
    r.config_hash = j.value("config_hash", "");
    r.inputs = j.value("inputs", std::map<std::string, std::string>{});
    r.outputs = j.value("outputs", std::map<std::string, std::string>{});
    r.counts = j.value("counts", std::map<std::string, std::size_t>{});
    r.drops = j.value("drops", std::map<std::string, std::size_t>{});
    return r;
}

}  // namespace

nlohmann::json to_json(const RunManifest& m) {
    json stages = json::object();
    for (const auto& [s, r] : m.stages) stages[std::string(to_string(s))] = record_json(r);
    return {{"config_hash", m.config_hash}, {"stages", stages}};
}

RunManifest RunManifest::load(const fs::path& path) {
    RunManifest m;
    if (!fs::exists(path)) return m;
    auto j = json::parse(read_text(path), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw MissingDependency(path.string() + ": run manifest is not valid JSON");
    m.config_hash = j.value("config_hash", "");
    if (auto it = j.find("stages"); it != j.end() && it->is_object()) {
        for (const auto& [name, rec] : it->items()) {
            auto s = parse_stage(name);
            if (!s) throw MissingDependency(path.string() + ": unknown stage '" + name + "'");
            m.stages[*s] = record_from(rec);
        }
    }
    return m;
}

void RunManifest::save(const fs::path& path) const { write_atomic(path, to_json(*this).dump(2) + "\n"); }

namespace {

const char* kManifestName = "run_manifest.json";

std::vector<std::string> stage_sections(Stage s) {
    switch (s) {
        case Stage::ingest: return {"corpora", "ingest"};
        case Stage::generate: return {"taskgen", "qagen", "assets_dir"};
        case Stage::debias: return {"debias"};
        case Stage::mtp: return {"mtp", "assets_dir"};
        case Stage::audit: return {"audit"};
        case Stage::evaluate: return {};
    }
    return {};
}

// Stage-produced inputs: (producer, path relative to the stage dir).
std::vector<std::pair<Stage, std::string>> internal_inputs(Stage s) {
    switch (s) {
        case Stage::ingest: return {};
        case Stage::generate: return {{Stage::ingest, "ingest/clips.jsonl"}};
        case Stage::debias: return {{Stage::generate, "generate/items.jsonl"}};
        case Stage::mtp: return {};
        case Stage::audit: return {{Stage::debias, "debias/items.jsonl"}};
        case Stage::evaluate: return {{Stage::audit, "audit/benchmark.jsonl"}};
    }
    return {};
}

std::vector<fs::path> txt_files(const fs::path& dir) {
    std::vector<fs::path> out;
    if (!fs::is_directory(dir)) throw MissingDependency("asset directory " + dir.string() + " not found");
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".txt") out.push_back(e.path());
    std::sort(out.begin(), out.end());
    return out;
}

fs::path predictions_path(const PipelineConfig& cfg, const RunOptions& opts) {
    return opts.predictions.empty() ? cfg.predictions : opts.predictions;
}

// External inputs keyed by a location-independent label.
std::map<std::string, fs::path> external_inputs(Stage s, const PipelineConfig& cfg, const RunOptions& opts) {
    std::map<std::string, fs::path> out;
    switch (s) {
        case Stage::ingest:
            if (cfg.corpora.empty()) throw ConfigInvalid("no corpora configured");
            for (std::size_t i = 0; i < cfg.corpora.size(); ++i)
                out["corpus[" + std::to_string(i) + "]"] = cfg.corpora[i].path;
            break;
        case Stage::generate:
            for (const auto& p : txt_files(cfg.assets_dir / "templates")) out["templates/" + p.filename().string()] = p;
            break;
        case Stage::mtp:
            if (cfg.mtp.input.empty()) throw ConfigInvalid("mtp.input is not set");
            out["mtp_input"] = cfg.mtp.input;
            for (const auto& p : txt_files(cfg.assets_dir / "prompts")) out["prompts/" + p.filename().string()] = p;
            break;
        case Stage::evaluate: {
            auto p = predictions_path(cfg, opts);
            if (p.empty()) throw ConfigInvalid("no predictions file (evaluate.predictions or --predictions)");
            out["predictions"] = p;
            break;
        }
        default: break;
    }
    return out;
}

std::string hash_existing(const fs::path& p, const std::string& label) {
    if (!fs::exists(p)) throw MissingDependency(label + ": " + p.string() + " not found");
    return sha256_file(p);
}

template <class T>
std::string jsonl(const std::vector<T>& rows) {
    std::string out;
    for (const auto& r : rows) {
        json j = r;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<qagen::QAItem> load_items(const fs::path& p) {
    std::vector<qagen::QAItem> items;
    for (const auto& line : read_lines(p)) items.push_back(json::parse(line).get<qagen::QAItem>());
    return items;
}

void count_dimensions(std::map<std::string, std::size_t>& counts, const std::string& prefix,
                      const std::vector<qagen::QAItem>& items) {
    for (const auto& item : items) ++counts[prefix + "." + std::string(to_string(item.dimension))];
}

struct Context {
    const PipelineConfig& cfg;
    const RunOptions& opts;
    StageRecord& rec;
    StageOutcome& outcome;
    std::map<std::string, std::string> files;  // relative output path -> content

    fs::path at(const std::string& rel) const { return opts.stage_dir / rel; }
};

std::unique_ptr<judge::ResponseCache> open_cache(const Context& c, const std::string& name) {
    const auto path = c.opts.stage_dir / "cache" / name;
    if (!c.opts.resume && fs::exists(path)) fs::remove(path);
    return std::make_unique<judge::ResponseCache>(path);
}

void do_ingest(Context& c) {
    auto clips = ingest::parse_corpora(c.cfg.corpora, c.cfg.ingest);
    std::string out;
    for (const auto& clip : clips) {
        out += ingest::clip_to_json(clip).dump() + "\n";
        ++c.rec.counts["clips." + std::string(ingest::to_string(clip.schema()))];
    }
    c.rec.counts["clips"] = clips.size();
    c.files["ingest/clips.jsonl"] = std::move(out);
}

void do_generate(Context& c) {
    std::vector<ingest::NormalizedClip> clips;
    std::size_t index = 0;
    for (const auto& line : read_lines(c.at("ingest/clips.jsonl")))
        clips.push_back(ingest::clip_from_json(json::parse(line), index++));

    auto gen = taskgen::generate_all(clips, c.cfg.taskgen, c.cfg.seed);
    auto templates = qagen::TemplateLibrary::load(c.cfg.assets_dir / "templates");
    auto result = qagen::generate_items(gen.candidates, templates, c.cfg.qagen, c.cfg.seed);

    std::string plan;
    for (const auto& item : result.items) {
        if (!item.edit || item.edit->ops.empty()) continue;
        plan += "# " + item.item_id + "\n" + plan_text(render_manifest(*item.edit));
    }
    c.rec.counts["candidates"] = gen.candidates.size();
    c.rec.counts["items"] = result.items.size();
    count_dimensions(c.rec.counts, "items", result.items);
    for (const auto& [k, v] : gen.drops) c.rec.drops[k] += v;
    for (const auto& [k, v] : result.drops) c.rec.drops[k] += v;
    c.files["generate/items.jsonl"] = jsonl(result.items);
    c.files["generate/edit_plan.txt"] = std::move(plan);
}

void do_debias(Context& c) {
    auto items = load_items(c.at("generate/items.jsonl"));
    auto result = debias::run_debias(items, c.cfg.debias, c.cfg.seed);
    json reports = json::array();
    for (const auto& r : result.reports) reports.push_back(debias::to_json(r));
    c.rec.counts["items_in"] = items.size();
    c.rec.counts["items"] = result.items.size();
    count_dimensions(c.rec.counts, "items", result.items);
    for (const auto& r : result.reports) {
        if (r.downsampled) c.rec.drops[std::string(to_string(r.dimension)) + ": long-tail downsampled"] += r.downsampled;
        if (r.reversal_pairs) c.rec.counts["reversal_pairs"] += r.reversal_pairs;
    }
    c.files["debias/items.jsonl"] = jsonl(result.items);
    c.files["debias/balance_report.json"] = reports.dump(2) + "\n";
}

void do_mtp(Context& c) {
    auto samples = mtp::load_samples(c.cfg.mtp.input);
    auto prompts = mtp::PromptPools::load(c.cfg.assets_dir / "prompts");
    std::unique_ptr<judge::Judge> gate;
    if (c.cfg.mtp.gate_judge) gate = judge::make_judge(*c.cfg.mtp.gate_judge);
    const bool unflagged = std::any_of(samples.begin(), samples.end(), [](const auto& s) { return !s.temporal_flag; });
    if (!gate && unflagged) spdlog::warn("mtp: samples without temporal_flag and no gate_judge; treated as non-temporal");
    auto cache = open_cache(c, "mtp_gate.jsonl");

    auto result = mtp::apply_mtp(samples, c.cfg.mtp.params, prompts, gate.get(), cache.get(), c.cfg.seed);
    std::string out;
    for (const auto& s : result.samples) out += mtp::to_json(s).dump() + "\n";
    c.rec.counts["samples"] = result.samples.size();
    for (const auto& [k, v] : result.counts) c.rec.counts["aux." + k] = v;
    c.outcome.judge_calls = gate ? gate->calls() : 0;
    c.outcome.cache_hits = cache->hits();
    c.files["mtp/augmented.jsonl"] = std::move(out);
    c.files["mtp/mtp_report.json"] = json{{"counts", result.counts}, {"unparseable_gate_replies", result.gate.unparseable}}.dump(2) + "\n";
}

void do_audit(Context& c) {
    require_judges(c.cfg);
    auto items = load_items(c.at("debias/items.jsonl"));
    std::vector<std::unique_ptr<judge::Judge>> owned;
    std::vector<judge::Judge*> judges;
    audit::AuditConfig acfg;
    acfg.diagnostic_judge = c.cfg.audit.diagnostic_judge;
    acfg.probe.shared_frame = c.cfg.audit.shared_frame;
    acfg.probe.frames_dir = c.cfg.audit.frames_dir.empty() ? c.at("audit/frames") : c.cfg.audit.frames_dir;
    bool needs_frames = false;
    for (const auto& spec : c.cfg.audit.judges) {
        owned.push_back(judge::make_judge(spec));
        judges.push_back(owned.back().get());
        acfg.max_in_flight.push_back(spec.max_in_flight);
        acfg.retries.push_back(spec.retries);
        needs_frames = needs_frames || spec.kind == "http";
    }

    // The plan names default frame paths relative to the stage dir so it does not depend on where the run lives.
    auto plan_cfg = acfg;
    if (c.cfg.audit.frames_dir.empty()) plan_cfg.probe.frames_dir = "audit/frames";
    const auto plan = audit::frame_plan(items, judges, plan_cfg, c.cfg.seed);
    if (needs_frames) {
        std::istringstream lines(plan);
        std::string line;
        std::size_t missing = 0;
        while (std::getline(lines, line)) {
            const fs::path path = line.substr(line.rfind(' ') + 1);
            missing += !fs::exists(path.is_absolute() ? path : c.opts.stage_dir / path);
        }
        if (missing > 0) {
            write_atomic(c.at("audit/frame_plan.txt"), plan);
            throw MissingDependency(std::to_string(missing) + " probe frame(s) not extracted; see " +
                                    c.at("audit/frame_plan.txt").string());
        }
    }

    auto cache = open_cache(c, "audit_verdicts.jsonl");
    auto result = audit::run_audit(items, judges, acfg, cache.get(), c.cfg.seed);

    std::string removed, verdicts;
    for (const auto& d : result.removed) removed += audit::to_json(d).dump() + "\n";
    for (const auto& v : result.verdicts) verdicts += audit::to_json(v).dump() + "\n";
    c.rec.counts["candidates"] = items.size() - result.open_ended_excluded;
    c.rec.counts["kept"] = result.benchmark.size();
    c.rec.counts["removed"] = result.removed.size();
    c.rec.counts["open_ended_excluded"] = result.open_ended_excluded;
    c.rec.counts["unavailable_verdicts"] = result.unavailable_verdicts;
    count_dimensions(c.rec.counts, "kept", result.benchmark);
    if (!result.removed.empty()) c.rec.drops["shortcut: >= 2 of 3 judges correct from one frame"] = result.removed.size();
    if (!result.incomplete.empty()) c.rec.drops["incomplete verdicts"] = result.incomplete.size();
    for (auto* j : judges) c.outcome.judge_calls += j->calls();
    c.outcome.cache_hits = cache->hits();

    c.files["audit/benchmark.jsonl"] = jsonl(result.benchmark);
    c.files["audit/removed.jsonl"] = std::move(removed);
    c.files["audit/verdicts.jsonl"] = std::move(verdicts);
    c.files["audit/diagnostics.json"] =
        json{{"before", audit::to_json(result.before)}, {"after", audit::to_json(result.after)}}.dump(2) + "\n";
    c.files["audit/audit_report.txt"] = audit::report_text(result);
    c.files["audit/frame_plan.txt"] = plan;
}

void do_evaluate(Context& c) {
    auto benchmark = load_items(c.at("audit/benchmark.jsonl"));
    auto preds = eval::load_predictions(predictions_path(c.cfg, c.opts));
    auto report = eval::score(benchmark, preds);
    c.rec.counts["scored"] = benchmark.size() - report.skipped_open_ended;
    c.rec.counts["unparsed"] = report.unparsed_count;
    c.rec.counts["missing"] = report.missing_count;
    c.files["evaluate/score.json"] = eval::to_json(report).dump(2) + "\n";
    c.files["evaluate/score.txt"] = eval::to_text(report);
}

bool outputs_intact(const StageRecord& rec, const fs::path& dir) {
    if (rec.outputs.empty()) return false;
    for (const auto& [rel, hash] : rec.outputs)
        if (!fs::exists(dir / rel) || sha256_file(dir / rel) != hash) return false;
    return true;
}

// A producer whose own inputs changed after it ran left stale outputs behind.
void check_upstream(Stage producer, const RunManifest& manifest, const fs::path& dir, const std::string& name) {
    const auto& rec = manifest.stages.at(producer);
    for (const auto& [upstream, rel] : internal_inputs(producer)) {
        auto recorded = rec.inputs.find(rel);
        if (recorded == rec.inputs.end() || !fs::exists(dir / rel) || sha256_file(dir / rel) != recorded->second)
            throw MissingDependency(name + ": stage '" + std::string(to_string(producer)) + "' is stale: " + rel +
                                    " changed after it ran");
        check_upstream(upstream, manifest, dir, name);
    }
}

}  // namespace

StageOutcome run_stage(Stage stage, const PipelineConfig& cfg, const RunOptions& opts) {
    if (stage == Stage::audit) require_judges(cfg);
    const auto manifest_path = opts.stage_dir / kManifestName;
    auto manifest = RunManifest::load(manifest_path);
    const auto name = std::string(to_string(stage));

    StageRecord fresh;
    fresh.config_hash = section_hash(cfg, stage_sections(stage));
    for (const auto& [producer, rel] : internal_inputs(stage)) {
        auto it = manifest.stages.find(producer);
        if (it == manifest.stages.end() || !it->second.complete)
            throw MissingDependency(name + ": stage '" + std::string(to_string(producer)) + "' has not completed");
        const auto current = hash_existing(opts.stage_dir / rel, name);
        auto recorded = it->second.outputs.find(rel);
        if (recorded == it->second.outputs.end() || recorded->second != current)
            throw MissingDependency(name + ": " + rel + " does not match the hash recorded by stage '" +
                                    std::string(to_string(producer)) + "'");
        fresh.inputs[rel] = current;
        check_upstream(producer, manifest, opts.stage_dir, name);
    }
    for (const auto& [label, path] : external_inputs(stage, cfg, opts)) fresh.inputs[label] = hash_existing(path, label);

    StageOutcome outcome;
    if (auto it = manifest.stages.find(stage); it != manifest.stages.end()) {
        const auto& old = it->second;
        if (old.complete && old.config_hash == fresh.config_hash && old.inputs == fresh.inputs &&
            outputs_intact(old, opts.stage_dir)) {
            spdlog::info("{}: up to date, skipped", name);
            outcome.record = old;
            outcome.skipped = true;
            return outcome;
        }
    }

    manifest.stages.erase(stage);
    manifest.config_hash = config_hash(cfg);
    manifest.save(manifest_path);

    spdlog::info("{}: running", name);
    Context c{cfg, opts, fresh, outcome, {}};
    switch (stage) {
        case Stage::ingest: do_ingest(c); break;
        case Stage::generate: do_generate(c); break;
        case Stage::debias: do_debias(c); break;
        case Stage::mtp: do_mtp(c); break;
        case Stage::audit: do_audit(c); break;
        case Stage::evaluate: do_evaluate(c); break;
    }
    for (const auto& [rel, content] : c.files) {
        write_atomic(opts.stage_dir / rel, content);
        fresh.outputs[rel] = sha256_hex(content);
    }
    fresh.complete = true;
    manifest.stages[stage] = fresh;
    manifest.save(manifest_path);
    for (const auto& [k, v] : fresh.counts) spdlog::debug("{}: {} = {}", name, k, v);
    spdlog::info("{}: done ({} output file(s), {} judge call(s), {} cache hit(s))", name, fresh.outputs.size(),
                 outcome.judge_calls, outcome.cache_hits);
    outcome.record = std::move(fresh);
    return outcome;
}

std::string run_report(const fs::path& stage_dir) {
    const auto manifest_path = stage_dir / kManifestName;
    if (!fs::exists(manifest_path)) throw MissingDependency("no run manifest in " + stage_dir.string());
    auto m = RunManifest::load(manifest_path);
    std::ostringstream out;
    out << "Run " << stage_dir.string() << "\nconfig " << m.config_hash << "\n\n";
    for (auto s : kAllStages) {
        auto it = m.stages.find(s);
        if (it == m.stages.end()) continue;
        out << to_string(s) << (it->second.complete ? "" : " (incomplete)") << '\n';
        for (const auto& [k, v] : it->second.counts) out << "  " << k << ": " << v << '\n';
        for (const auto& [k, v] : it->second.drops) out << "  dropped, " << k << ": " << v << '\n';
    }
    for (const char* rel : {"audit/audit_report.txt", "evaluate/score.txt"}) {
        if (fs::exists(stage_dir / rel)) out << '\n' << rel << "\n" << read_text(stage_dir / rel);
    }
    return out.str();
}

}  // namespace timeqa::pipeline
