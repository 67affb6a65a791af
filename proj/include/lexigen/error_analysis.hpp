#pragma once

// Heuristic detectors for mechanically checkable definition errors, and corpus
// statistics over their labels. All detectors work on tokenize() output, so they
// are insensitive to case and normalization form.

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lexigen/error.hpp"
#include "lexigen/io.hpp"
#include "lexigen/lexicon.hpp"
#include "lexigen/prompt.hpp"
#include "lexigen/textmetrics.hpp"
#include "lexigen/unicode.hpp"
#include "lexigen/wordlists.hpp"

namespace lexigen {

enum class ErrorLabel { CircularDefinition, TokenizerArtifact, NounAsVerb, LanguageInterference, Degenerate };

inline constexpr std::array<ErrorLabel, 5> kAllErrorLabels = {
    ErrorLabel::CircularDefinition, ErrorLabel::TokenizerArtifact, ErrorLabel::NounAsVerb,
    ErrorLabel::LanguageInterference, ErrorLabel::Degenerate};

inline std::string_view label_name(ErrorLabel l) {
    switch (l) {
    case ErrorLabel::CircularDefinition:
        return "CircularDefinition";
    case ErrorLabel::TokenizerArtifact:
        return "TokenizerArtifact";
    case ErrorLabel::NounAsVerb:
        return "NounAsVerb";
    case ErrorLabel::LanguageInterference:
        return "LanguageInterference";
    case ErrorLabel::Degenerate:
        return "Degenerate";
    }
    return "?";
}

inline std::optional<ErrorLabel> parse_label(std::string_view name) {
    for (ErrorLabel l : kAllErrorLabels)
        if (label_name(l) == name)
            return l;
    return std::nullopt;
}

using LabelSet = std::set<ErrorLabel>;

class WordList {
  public:
    WordList() = default;

    template <class Range>
    explicit WordList(const Range &words) {
        for (std::string_view w : words)
            add(w);
    }

    void add(std::string_view w) {
        const std::string norm = unicode::nfc_lower(unicode::trim(w));
        if (!norm.empty())
            words_.insert(norm);
    }

    bool contains(const std::string &token) const { return words_.count(token) != 0; }
    std::size_t size() const noexcept { return words_.size(); }

  private:
    std::unordered_set<std::string> words_;
};

// One word per line, '#' comments.
inline WordList load_word_list(const std::filesystem::path &path) {
    const std::string text = io::read_file(path);
    unicode::require_utf8(text, path.string());
    WordList list;
    for (std::string_view line : io::split_lines(text)) {
        const std::string w = unicode::trim(line);
        if (!w.empty() && w.front() != '#')
            list.add(w);
    }
    return list;
}

struct ClassifierConfig {
    WordList spanish{wordlists::kSpanishFunctionWords};
    WordList english{wordlists::kEnglishFunctionWords};
    double spanish_max_fraction = 0.05;
    double english_min_fraction = 0.2;
};

inline const ClassifierConfig &default_classifier() {
    static const ClassifierConfig config;
    return config;
}

// Prompt-audit context: the template a definition was generated with.
struct PromptAudit {
    bool template_quotes_lemma = true;
};

inline std::optional<PromptAudit> audit_for_prompt_id(std::string_view prompt_id) {
    if (const PromptTemplate *t = templates::find(prompt_id))
        return PromptAudit{t->quote_lemma};
    return std::nullopt;
}

namespace detail {

inline bool is_article(const std::string &t) {
    return t == "el" || t == "la" || t == "los" || t == "las" || t == "un" || t == "una";
}

inline bool matches_at(const TokenSequence &toks, std::size_t at, const TokenSequence &needle) {
    if (at + needle.size() > toks.size())
        return false;
    for (std::size_t i = 0; i < needle.size(); ++i)
        if (toks[at + i] != needle[i])
            return false;
    return true;
}

// English evidence for a token: an English function word, or spelling that native
// Spanish words do not use.
inline bool english_evidence(const std::string &tok, const WordList &english) {
    if (english.contains(tok))
        return true;
    for (std::string_view cue : {"ss", "ck", "sh", "th", "w"})
        if (tok.find(cue) != std::string::npos)
            return true;
    return tok.size() > 4 && tok.compare(tok.size() - 3, 3, "ing") == 0;
}

inline std::string fold_tokens(const TokenSequence &toks) {
    std::string joined;
    for (const auto &t : toks) {
        joined += t;
        joined += ' ';
    }
    return unicode::fold_diacritics(joined);
}

} // namespace detail

// "[article] lemma es|son|se refiere ...", or a definition that is nothing but the
// (optionally determined) lemma.
inline bool is_circular(const TokenSequence &def, const TokenSequence &lemma) {
    if (lemma.empty())
        return false;
    for (std::size_t start : {std::size_t{0}, std::size_t{1}}) {
        if (start == 1 && (def.empty() || !detail::is_article(def[0])))
            continue;
        if (!detail::matches_at(def, start, lemma))
            continue;
        const std::size_t next = start + lemma.size();
        if (next == def.size())
            return true;
        if (def[next] == "es" || def[next] == "son")
            return true;
        if (next + 1 < def.size() && def[next] == "se" && def[next + 1] == "refiere")
            return true;
    }
    return false;
}

inline bool is_noun_as_verb(const Lemma &lemma, const TokenSequence &def) {
    if (lemma.pos() != PosTag::Noun || def.empty())
        return false;
    if (def[0] == "verbo" || (def.size() > 1 && def[0] == "el" && def[1] == "verbo"))
        return true;
    for (std::size_t i = 0; i + 2 < def.size(); ++i)
        if (def[i] == "es" && def[i + 1] == "un" && def[i + 2] == "verbo")
            return true;
    return false;
}

inline bool is_language_interference(const TokenSequence &def, const ClassifierConfig &cfg) {
    if (def.empty())
        return false;
    std::size_t es = 0, en = 0;
    for (const auto &t : def) {
        es += cfg.spanish.contains(t);
        en += detail::english_evidence(t, cfg.english);
    }
    const double n = static_cast<double>(def.size());
    return es / n < cfg.spanish_max_fraction && en / n >= cfg.english_min_fraction;
}

// Empty, the lemma itself (modulo diacritics), or a lone foreign word.
inline bool is_degenerate(const TokenSequence &def, const TokenSequence &lemma,
                          const ClassifierConfig &cfg) {
    if (def.empty())
        return true;
    if (detail::fold_tokens(def) == detail::fold_tokens(lemma))
        return true;
    return def.size() == 1 && !cfg.spanish.contains(def[0]) &&
           detail::english_evidence(def[0], cfg.english);
}

inline LabelSet classify(const Lemma &lemma, std::string_view definition,
                         const ClassifierConfig &cfg = default_classifier(),
                         std::optional<PromptAudit> audit = std::nullopt) {
    const TokenSequence def = tokenize(definition);
    const TokenSequence lem = tokenize(lemma.surface());
    LabelSet labels;
    if (is_circular(def, lem))
        labels.insert(ErrorLabel::CircularDefinition);
    if (is_noun_as_verb(lemma, def))
        labels.insert(ErrorLabel::NounAsVerb);
    if (is_language_interference(def, cfg))
        labels.insert(ErrorLabel::LanguageInterference);
    if (is_degenerate(def, lem, cfg))
        labels.insert(ErrorLabel::Degenerate);
    if (audit && !audit->template_quotes_lemma)
        labels.insert(ErrorLabel::TokenizerArtifact);
    return labels;
}

struct LabelCount {
    std::size_t count = 0;
    double fraction = 0.0;

    friend bool operator==(const LabelCount &, const LabelCount &) = default;
};

struct ErrorStats {
    std::size_t total = 0;
    std::map<ErrorLabel, LabelCount> per_label;

    friend bool operator==(const ErrorStats &, const ErrorStats &) = default;
};

using LabeledDefinition = std::pair<Lemma, LabelSet>;

inline ErrorStats summarize(std::span<const LabeledDefinition> labeled) {
    ErrorStats stats;
    stats.total = labeled.size();
    for (ErrorLabel l : kAllErrorLabels)
        stats.per_label[l] = LabelCount{};
    for (const auto &[lemma, labels] : labeled)
        for (ErrorLabel l : labels)
            ++stats.per_label[l].count;
    if (stats.total)
        for (auto &[label, c] : stats.per_label)
            c.fraction = static_cast<double>(c.count) / static_cast<double>(stats.total);
    return stats;
}

inline std::vector<LabeledDefinition> classify_dictionary(std::span<const GeneratedDefinition> dict,
                                                          const ClassifierConfig &cfg,
                                                          bool prompt_audit) {
    std::vector<LabeledDefinition> out;
    out.reserve(dict.size());
    for (const auto &d : dict)
        out.emplace_back(d.lemma, classify(d.lemma, d.text, cfg,
                                           prompt_audit ? audit_for_prompt_id(d.prompt_id)
                                                        : std::nullopt));
    return out;
}

inline nlohmann::ordered_json to_json(const ErrorStats &stats) {
    nlohmann::ordered_json labels = nlohmann::ordered_json::object();
    for (const auto &[label, c] : stats.per_label)
        labels[std::string(label_name(label))] = {{"count", c.count}, {"fraction", c.fraction}};
    return {{"total", stats.total}, {"labels", labels}};
}

inline ErrorStats error_stats_from_json(const nlohmann::json &j) {
    ErrorStats stats;
    stats.total = j.at("total").get<std::size_t>();
    for (const auto &[name, v] : j.at("labels").items()) {
        const auto label = parse_label(name);
        if (!label)
            throw ParseError(0, "unknown error label '" + name + "'");
        stats.per_label[*label] = LabelCount{v.at("count").get<std::size_t>(),
                                             v.at("fraction").get<double>()};
    }
    return stats;
}

} // namespace lexigen
