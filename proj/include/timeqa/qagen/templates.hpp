#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "timeqa/core/types.hpp"
#include "timeqa/taskgen/candidate.hpp"

namespace timeqa::qagen {

enum class TemplateKind { question, instruction };

std::string_view to_string(TemplateKind k) noexcept;

struct TemplatePool {
    Dimension dimension = Dimension::dynamic;
    TemplateKind kind = TemplateKind::question;
    std::vector<std::string> templates;
};

/// Reads a template asset: one template per line, '#' starts a comment line,
/// blank lines ignored. Throws Error when the file holds no template.
std::vector<std::string> load_template_lines(const std::filesystem::path& path);

/// Names of the `{name}` placeholders in a template, in order of appearance.
std::vector<std::string> placeholders(std::string_view tmpl);

/// Replaces every `{name}` with its value. Throws UnresolvedPlaceholder.
std::string substitute(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// All question and instruction pools, one per (dimension, kind).
class TemplateLibrary {
public:
    /// Loads `<dimension>_<kind>.txt` for every dimension and kind.
    static TemplateLibrary load(const std::filesystem::path& dir);

    void set(TemplatePool pool);
    const TemplatePool& get(Dimension d, TemplateKind k) const;

private:
    std::map<std::pair<Dimension, TemplateKind>, TemplatePool> pools_;
};

struct Rendered {
    std::string text;
    int template_index = 0;
};

/// Picks a template uniformly by `seed` and fills it from the candidate context.
Rendered render_template(const taskgen::LabeledCandidate& cand, const TemplatePool& pool, std::uint64_t seed);

/// Question-kind rendering. Throws UnresolvedPlaceholder, or Error if the pool is not a question pool.
std::string render_question(const taskgen::LabeledCandidate& cand, const TemplatePool& pool, std::uint64_t seed);

}  // namespace timeqa::qagen
