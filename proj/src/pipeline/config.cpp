#include "timeqa/pipeline/config.hpp"

#include <set>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/hash.hpp"
#include "timeqa/core/io.hpp"

namespace timeqa::pipeline {

namespace {

using nlohmann::json;

// Reads typed fields out of one config object and rejects keys nobody asked for.
class Section {
public:
    Section(const json& j, std::string name) : name_(std::move(name)) {
        if (j.is_null()) return;
        if (!j.is_object()) throw ConfigInvalid(name_ + ": must be an object");
        j_ = j;
    }

    template <class T>
    T get(const std::string& key, T fallback) {
        seen_.insert(key);
        auto it = j_.find(key);
        if (it == j_.end() || it->is_null()) return fallback;
        try {
            return it->get<T>();
        } catch (const json::exception&) {
            throw ConfigInvalid(path(key) + ": wrong type");
        }
    }

    const json& raw(const std::string& key) {
        seen_.insert(key);
        static const json null;
        auto it = j_.find(key);
        return it == j_.end() ? null : *it;
    }

    void finish() const {
        for (const auto& [k, v] : j_.items())
            if (!seen_.count(k)) throw ConfigInvalid(path(k) + ": unknown key");
    }

    std::string path(const std::string& key) const { return name_.empty() ? key : name_ + "." + key; }

private:
    std::string name_;
    json j_ = json::object();
    std::set<std::string> seen_;
};

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigInvalid(what);
}

void in_range(double v, double lo, double hi, const std::string& name, bool open_lo = false) {
    require(open_lo ? v > lo && v <= hi : v >= lo && v <= hi,
            name + " must be in " + (open_lo ? "(" : "[") + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    if (p.empty()) return {};
    std::filesystem::path path(p);
    return path.is_absolute() ? path : (base / path).lexically_normal();
}

judge::JudgeSpec parse_judge(const json& j, const std::string& name, json& norm) {
    Section s(j, name);
    judge::JudgeSpec spec;
    spec.id = s.get<std::string>("id", "");
    spec.kind = s.get<std::string>("kind", "http");
    spec.url = s.get<std::string>("url", "");
    spec.model = s.get<std::string>("model", "");
    spec.auth_env = s.get<std::string>("auth_env", "");
    spec.max_in_flight = s.get<int>("max_in_flight", 4);
    spec.retries = s.get<int>("retries", 3);
    spec.timeout_s = s.get<double>("timeout_s", 60);
    spec.stub_letter = s.get<std::string>("stub_letter", "A");
    s.finish();
    require(!spec.id.empty(), name + ".id must be set");
    require(spec.kind == "http" || spec.kind == "stub" || spec.kind == "stub_gate", name + ".kind: unknown '" + spec.kind + "'");
    require(spec.kind != "http" || !spec.url.empty(), name + ".url must be set for http judges");
    require(spec.max_in_flight >= 1, name + ".max_in_flight must be >= 1");
    require(spec.retries >= 0, name + ".retries must be >= 0");
    require(spec.timeout_s > 0, name + ".timeout_s must be > 0");
    norm = {{"id", spec.id},           {"kind", spec.kind},       {"url", spec.url},
            {"model", spec.model},     {"auth_env", spec.auth_env}, {"max_in_flight", spec.max_in_flight},
            {"retries", spec.retries}, {"timeout_s", spec.timeout_s}, {"stub_letter", spec.stub_letter}};
    return spec;
}

}  // namespace

PipelineConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
    if (!j.is_object()) throw ConfigInvalid("config must be a JSON object");
    PipelineConfig cfg;
    json& n = cfg.normalized;
    Section top(j, "");

    cfg.seed = top.get<std::uint64_t>("seed", 42);
    const auto assets = top.get<std::string>("assets_dir", "assets");
    const auto output = top.get<std::string>("output_dir", "out");
    cfg.assets_dir = resolve(base_dir, assets);
    cfg.output_dir = resolve(base_dir, output);
    n["seed"] = cfg.seed;
    n["assets_dir"] = assets;
    n["output_dir"] = output;

    n["corpora"] = json::array();
    const auto& corpora = top.raw("corpora");
    require(corpora.is_null() || corpora.is_array(), "corpora must be an array");
    if (corpora.is_array()) {
        for (std::size_t i = 0; i < corpora.size(); ++i) {
            Section s(corpora[i], "corpora[" + std::to_string(i) + "]");
            const auto schema_name = s.get<std::string>("schema", "");
            const auto path = s.get<std::string>("path", "");
            s.finish();
            auto schema = ingest::parse_schema_id(schema_name);
            require(schema.has_value(), s.path("schema") + ": unknown schema '" + schema_name + "'");
            require(!path.empty(), s.path("path") + " must be set");
            cfg.corpora.push_back({*schema, resolve(base_dir, path)});
            n["corpora"].push_back({{"schema", schema_name}, {"path", path}});
        }
    }

    {
        Section s(top.raw("ingest"), "ingest");
        cfg.ingest.default_fps = s.get<double>("default_fps", 0);
        s.finish();
        require(cfg.ingest.default_fps >= 0, "ingest.default_fps must be >= 0");
        n["ingest"] = {{"default_fps", cfg.ingest.default_fps}};
    }
    {
        Section s(top.raw("taskgen"), "taskgen");
        auto& t = cfg.taskgen;
        t.direction.min_displacement = s.get<double>("min_displacement", t.direction.min_displacement);
        t.direction.monotonicity_slack = s.get<double>("monotonicity_slack", t.direction.monotonicity_slack);
        t.max_same_category = s.get<int>("max_same_category", t.max_same_category);
        const auto scope = s.get<std::string>("crowd_scope", "segment");
        t.min_steps = s.get<int>("min_steps", t.min_steps);
        t.max_steps = s.get<int>("max_steps", t.max_steps);
        t.min_essential_fraction = s.get<double>("min_essential_fraction", t.min_essential_fraction);
        t.reasoning_splits = s.get<int>("reasoning_splits", t.reasoning_splits);
        t.min_action_s = s.get<double>("min_action_s", t.min_action_s);
        t.random_crop = s.get<bool>("random_crop", t.random_crop);
        s.finish();
        require(scope == "segment" || scope == "clip", "taskgen.crowd_scope must be \"segment\" or \"clip\"");
        t.crowd_scope = scope == "clip" ? taskgen::CrowdScope::clip : taskgen::CrowdScope::segment;
        in_range(t.direction.min_displacement, 0, 1, "taskgen.min_displacement", true);
        in_range(t.direction.monotonicity_slack, 0, 1, "taskgen.monotonicity_slack");
        require(t.max_same_category >= 1, "taskgen.max_same_category must be >= 1");
        require(t.min_steps >= 2, "taskgen.min_steps must be >= 2");
        require(t.max_steps >= t.min_steps, "taskgen.max_steps must be >= min_steps");
        in_range(t.min_essential_fraction, 0, 1, "taskgen.min_essential_fraction");
        require(t.reasoning_splits >= 1, "taskgen.reasoning_splits must be >= 1");
        require(t.min_action_s >= 0, "taskgen.min_action_s must be >= 0");
        n["taskgen"] = {{"min_displacement", t.direction.min_displacement},
                        {"monotonicity_slack", t.direction.monotonicity_slack},
                        {"max_same_category", t.max_same_category},
                        {"crowd_scope", scope},
                        {"min_steps", t.min_steps},
                        {"max_steps", t.max_steps},
                        {"min_essential_fraction", t.min_essential_fraction},
                        {"reasoning_splits", t.reasoning_splits},
                        {"min_action_s", t.min_action_s},
                        {"random_crop", t.random_crop}};
    }
    {
        Section s(top.raw("qagen"), "qagen");
        cfg.qagen.mc_fraction = s.get<double>("mc_fraction", cfg.qagen.mc_fraction);
        s.finish();
        in_range(cfg.qagen.mc_fraction, 0, 1, "qagen.mc_fraction");
        n["qagen"] = {{"mc_fraction", cfg.qagen.mc_fraction}};
    }
    {
        Section s(top.raw("debias"), "debias");
        auto& d = cfg.debias;
        d.balance_gap = s.get<int>("balance_gap", d.balance_gap);
        d.longtail_cap = s.get<double>("longtail_cap", d.longtail_cap);
        d.reversal_fraction = s.get<double>("reversal_fraction", d.reversal_fraction);
        const auto& quotas = s.raw("quotas");
        s.finish();
        require(d.balance_gap >= 0, "debias.balance_gap must be >= 0");
        require(d.longtail_cap > 0, "debias.longtail_cap must be > 0");
        in_range(d.reversal_fraction, 0, 1, "debias.reversal_fraction");
        json qn = json::object();
        if (!quotas.is_null()) {
            require(quotas.is_object(), "debias.quotas must be an object");
            for (const auto& [k, v] : quotas.items()) {
                auto dim = parse_dimension(k);
                require(dim.has_value(), "debias.quotas: unknown dimension '" + k + "'");
                require(v.is_number_unsigned(), "debias.quotas." + k + " must be a non-negative integer");
                d.quotas[*dim] = v.get<std::size_t>();
                qn[k] = d.quotas[*dim];
            }
        }
        n["debias"] = {{"balance_gap", d.balance_gap},
                       {"longtail_cap", d.longtail_cap},
                       {"reversal_fraction", d.reversal_fraction},
                       {"quotas", qn}};
    }
    {
        Section s(top.raw("mtp"), "mtp");
        auto& m = cfg.mtp;
        const auto input = s.get<std::string>("input", "");
        m.input = resolve(base_dir, input);
        m.params.ratios.frame_index_fraction = s.get<double>("frame_index_fraction", m.params.ratios.frame_index_fraction);
        m.params.ratios.assigned_qa_fraction = s.get<double>("assigned_qa_fraction", m.params.ratios.assigned_qa_fraction);
        m.params.min_frames = s.get<int>("min_frames", m.params.min_frames);
        m.params.index_base = s.get<int>("index_base", m.params.index_base);
        const auto& gate = s.raw("gate_judge");
        s.finish();
        m.params.ratios.validate();
        require(m.params.min_frames >= 1, "mtp.min_frames must be >= 1");
        require(m.params.index_base == 0 || m.params.index_base == 1, "mtp.index_base must be 0 or 1");
        n["mtp"] = {{"input", input},
                    {"frame_index_fraction", m.params.ratios.frame_index_fraction},
                    {"assigned_qa_fraction", m.params.ratios.assigned_qa_fraction},
                    {"min_frames", m.params.min_frames},
                    {"index_base", m.params.index_base},
                    {"gate_judge", nullptr}};
        if (!gate.is_null()) {
            m.gate_judge = parse_judge(gate, "mtp.gate_judge", n["mtp"]["gate_judge"]);
            m.params.max_in_flight = m.gate_judge->max_in_flight;
            m.params.retries = m.gate_judge->retries;
        }
    }
    {
        Section s(top.raw("audit"), "audit");
        auto& a = cfg.audit;
        const auto& judges = s.raw("judges");
        a.diagnostic_judge = s.get<int>("diagnostic_judge", 0);
        a.shared_frame = s.get<bool>("shared_frame", true);
        const auto frames = s.get<std::string>("frames_dir", "");
        a.frames_dir = resolve(base_dir, frames);
        s.finish();
        require(judges.is_null() || judges.is_array(), "audit.judges must be an array");
        json jn = json::array();
        if (judges.is_array()) {
            for (std::size_t i = 0; i < judges.size(); ++i) {
                json one;
                a.judges.push_back(parse_judge(judges[i], "audit.judges[" + std::to_string(i) + "]", one));
                jn.push_back(one);
            }
        }
        require(a.judges.empty() || a.judges.size() == 3, "audit.judges must list exactly 3 judges");
        require(a.diagnostic_judge >= 0 && a.diagnostic_judge <= 2, "audit.diagnostic_judge must be 0, 1 or 2");
        n["audit"] = {{"judges", jn}, {"diagnostic_judge", a.diagnostic_judge}, {"shared_frame", a.shared_frame},
                      {"frames_dir", frames}};
    }
    {
        Section s(top.raw("evaluate"), "evaluate");
        const auto preds = s.get<std::string>("predictions", "");
        s.finish();
        cfg.predictions = resolve(base_dir, preds);
        n["evaluate"] = {{"predictions", preds}};
    }
    top.finish();
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text(path);
    } catch (const Error& e) {
        throw ConfigInvalid(e.what());
    }
    auto j = nlohmann::json::parse(text, nullptr, false, true);
    if (j.is_discarded()) throw ConfigInvalid(path.string() + ": not valid JSON");
    return parse_config(j, path.parent_path().empty() ? std::filesystem::path(".") : path.parent_path());
}

void set_seed(PipelineConfig& cfg, std::uint64_t seed) {
    cfg.seed = seed;
    cfg.normalized["seed"] = seed;
}

void require_judges(const PipelineConfig& cfg) {
    if (cfg.audit.judges.size() < 3)
        throw ConfigInvalid("audit needs 3 judge specs (audit.judges), found " + std::to_string(cfg.audit.judges.size()));
}

std::string config_hash(const PipelineConfig& cfg) { return sha256_hex(cfg.normalized.dump()); }

std::string section_hash(const PipelineConfig& cfg, const std::vector<std::string>& sections) {
    nlohmann::json j{{"seed", cfg.seed}};
    for (const auto& s : sections) j[s] = cfg.normalized.contains(s) ? cfg.normalized[s] : nlohmann::json(nullptr);
    return sha256_hex(j.dump());
}

}  // namespace timeqa::pipeline
