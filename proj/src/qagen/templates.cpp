#include "timeqa/qagen/templates.hpp"

#include <cctype>

#include "timeqa/core/errors.hpp"
#include "timeqa/core/io.hpp"
#include "timeqa/core/rng.hpp"

namespace timeqa::qagen {

std::string_view to_string(TemplateKind k) noexcept { return k == TemplateKind::question ? "question" : "instruction"; }

std::vector<std::string> load_template_lines(const std::filesystem::path& path) {
    std::vector<std::string> out;
    for (auto& line : read_lines(path)) {
        auto first = line.find_first_not_of(" \t");
        if (line[first] == '#') continue;
        auto last = line.find_last_not_of(" \t");
        out.push_back(line.substr(first, last - first + 1));
    }
    if (out.empty()) throw Error("template asset " + path.string() + " holds no template");
    return out;
}

namespace {

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

// Calls fn(literal) and fn(placeholder-name) in sequence over the template.
template <class Lit, class Ph>
void scan(std::string_view t, Lit on_literal, Ph on_placeholder) {
    std::size_t i = 0;
    while (i < t.size()) {
        if (t[i] == '{' && i + 1 < t.size() && ident_start(t[i + 1])) {
            std::size_t j = i + 1;
            while (j < t.size() && ident_char(t[j])) ++j;
            if (j < t.size() && t[j] == '}') {
                on_placeholder(t.substr(i + 1, j - i - 1));
                i = j + 1;
                continue;
            }
        }
        on_literal(t[i]);
        ++i;
    }
}

}  // namespace

std::vector<std::string> placeholders(std::string_view tmpl) {
    std::vector<std::string> names;
    scan(tmpl, [](char) {}, [&](std::string_view n) { names.emplace_back(n); });
    return names;
}

std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    scan(
        tmpl, [&](char c) { out.push_back(c); },
        [&](std::string_view n) {
            auto it = values.find(std::string(n));
            if (it == values.end()) throw UnresolvedPlaceholder(std::string(n));
            out += it->second;
        });
    return out;
}

TemplateLibrary TemplateLibrary::load(const std::filesystem::path& dir) {
    TemplateLibrary lib;
    for (auto d : kAllDimensions) {
        for (auto k : {TemplateKind::question, TemplateKind::instruction}) {
            auto path = dir / (std::string(to_string(d)) + "_" + std::string(to_string(k)) + ".txt");
            lib.set(TemplatePool{d, k, load_template_lines(path)});
        }
    }
    return lib;
}

void TemplateLibrary::set(TemplatePool pool) {
    if (pool.templates.empty()) throw Error("template pool is empty");
    auto key = std::make_pair(pool.dimension, pool.kind);
    pools_[key] = std::move(pool);
}

const TemplatePool& TemplateLibrary::get(Dimension d, TemplateKind k) const {
    auto it = pools_.find({d, k});
    if (it == pools_.end())
        throw Error("no " + std::string(to_string(k)) + " templates for " + std::string(to_string(d)));
    return it->second;
}

Rendered render_template(const taskgen::LabeledCandidate& cand, const TemplatePool& pool, std::uint64_t seed) {
    if (pool.templates.empty()) throw Error("template pool is empty");
    Rng rng(seed);
    auto idx = static_cast<int>(rng.below(pool.templates.size()));
    return {substitute(pool.templates[static_cast<std::size_t>(idx)], cand.context), idx};
}

std::string render_question(const taskgen::LabeledCandidate& cand, const TemplatePool& pool, std::uint64_t seed) {
    if (pool.kind != TemplateKind::question) throw Error("render_question needs a question pool");
    return render_template(cand, pool, seed).text;
}

}  // namespace timeqa::qagen
