#pragma once

// Domain types for lemma lists, generated dictionaries and reference dictionaries,
// plus their on-disk formats.
//
//   lemma list      UTF-8 text, "surface[\tPOS[\tneo]]" per line, '#' comments
//   dictionary      one JSON object per line:
//                   {lemma, pos?, neologism, text, prompt_id, batch_id,
//                    tokens_prompt, tokens_completion, cost_eur}
//   references      one JSON object per line: {lemma, senses: [text, ...]}

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lexigen/error.hpp"
#include "lexigen/io.hpp"
#include "lexigen/unicode.hpp"

namespace lexigen {

enum class PosTag { Noun, Verb, Adjective, Adverb };

inline constexpr PosTag kAllPosTags[] = {PosTag::Noun, PosTag::Verb, PosTag::Adjective,
                                         PosTag::Adverb};

inline std::string_view pos_code(PosTag p) {
    switch (p) {
    case PosTag::Noun:
        return "N";
    case PosTag::Verb:
        return "V";
    case PosTag::Adjective:
        return "ADJ";
    case PosTag::Adverb:
        return "ADV";
    }
    return "?";
}

inline std::string_view pos_name(PosTag p) {
    switch (p) {
    case PosTag::Noun:
        return "Nouns";
    case PosTag::Verb:
        return "Verbs";
    case PosTag::Adjective:
        return "Adjectives";
    case PosTag::Adverb:
        return "Adverbs";
    }
    return "?";
}

// Accepts N/V/ADJ/ADV in any letter case.
inline std::optional<PosTag> parse_pos(std::string_view token) {
    std::string up(token);
    std::transform(up.begin(), up.end(), up.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    if (up == "N")
        return PosTag::Noun;
    if (up == "V")
        return PosTag::Verb;
    if (up == "ADJ")
        return PosTag::Adjective;
    if (up == "ADV")
        return PosTag::Adverb;
    return std::nullopt;
}

// A surface form to define. The surface is stored NFC-normalized, so equality of
// two Lemma values is the identity used for dedup and reference lookup.
class Lemma {
  public:
    explicit Lemma(std::string_view surface, std::optional<PosTag> pos = std::nullopt,
                   bool neologism = false)
        : pos_(pos), neologism_(neologism) {
        if (!unicode::is_valid_utf8(surface))
            throw EncodingError("lemma is not valid UTF-8");
        surface_ = unicode::nfc(surface);
        if (surface_.empty())
            throw std::invalid_argument("lemma surface is empty");
        if (surface_.find_first_of("\r\n") != std::string::npos)
            throw std::invalid_argument("lemma surface contains a newline");
        if (unicode::trim(surface_) != surface_)
            throw std::invalid_argument("lemma surface has surrounding whitespace: '" + surface_ + "'");
    }

    const std::string &surface() const noexcept { return surface_; }
    std::optional<PosTag> pos() const noexcept { return pos_; }
    bool neologism() const noexcept { return neologism_; }

    friend bool operator==(const Lemma &, const Lemma &) = default;

  private:
    std::string surface_;
    std::optional<PosTag> pos_;
    bool neologism_ = false;
};

// Ordered, duplicate-free sequence of lemmas (identity = NFC surface, case-sensitive).
class LemmaList {
  public:
    LemmaList() = default;

    // Returns false, leaving the list unchanged, when the surface is already present.
    bool add(Lemma lemma) {
        if (!seen_.insert(lemma.surface()).second)
            return false;
        items_.push_back(std::move(lemma));
        return true;
    }

    bool contains(std::string_view surface) const {
        return seen_.count(unicode::nfc(surface)) != 0;
    }

    std::size_t size() const noexcept { return items_.size(); }
    bool empty() const noexcept { return items_.empty(); }
    const Lemma &operator[](std::size_t i) const { return items_[i]; }
    auto begin() const noexcept { return items_.begin(); }
    auto end() const noexcept { return items_.end(); }
    std::span<const Lemma> items() const noexcept { return items_; }

    friend bool operator==(const LemmaList &a, const LemmaList &b) { return a.items_ == b.items_; }

  private:
    std::vector<Lemma> items_;
    std::unordered_set<std::string> seen_;
};

struct LemmaParseResult {
    LemmaList lemmas;
    std::size_t duplicates = 0;
};

// Parses a lemma list. When `pos_columns` is false every column after the first is
// ignored, so annotated lists can be read as plain surface lists.
inline LemmaParseResult parse_lemma_list(std::string_view text, bool pos_columns = true) {
    unicode::require_utf8(text, "lemma list");
    LemmaParseResult result;
    const auto lines = io::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        std::string_view line = lines[i];
        const std::string trimmed = unicode::trim(line);
        if (trimmed.empty() || trimmed.front() == '#')
            continue;

        std::vector<std::string_view> cols;
        std::size_t pos = 0;
        while (true) {
            const std::size_t tab = line.find('\t', pos);
            cols.push_back(line.substr(pos, tab == std::string_view::npos ? tab : tab - pos));
            if (tab == std::string_view::npos)
                break;
            pos = tab + 1;
        }

        std::optional<PosTag> tag;
        bool neo = false;
        if (pos_columns) {
            if (cols.size() > 3)
                throw ParseError(lineno, "too many columns (expected at most 3)");
            if (cols.size() >= 2) {
                const std::string token = unicode::trim(cols[1]);
                if (!token.empty()) {
                    tag = parse_pos(token);
                    if (!tag)
                        throw ParseError(lineno, "malformed POS tag '" + token +
                                                     "' (expected N, V, ADJ or ADV)");
                }
            }
            if (cols.size() == 3) {
                const std::string flag = unicode::trim(cols[2]);
                if (flag == "neo" || flag == "NEO")
                    neo = true;
                else if (!flag.empty())
                    throw ParseError(lineno, "unknown flag '" + flag + "' (expected 'neo')");
            }
        }

        const std::string surface = unicode::trim(cols[0]);
        if (surface.empty())
            throw ParseError(lineno, "empty lemma");
        if (!result.lemmas.add(Lemma(surface, tag, neo)))
            ++result.duplicates;
    }
    return result;
}

inline std::string serialize_lemma_list(const LemmaList &lemmas) {
    std::string out;
    for (const Lemma &l : lemmas) {
        out += l.surface();
        if (l.pos() || l.neologism()) {
            out += '\t';
            if (l.pos())
                out += pos_code(*l.pos());
        }
        if (l.neologism())
            out += "\tneo";
        out += '\n';
    }
    return out;
}

inline LemmaParseResult load_lemma_list(const std::filesystem::path &path, bool pos_columns = true) {
    return parse_lemma_list(io::read_file(path), pos_columns);
}

struct GeneratedDefinition {
    Lemma lemma;
    std::string text{};
    std::string prompt_id{};
    std::int64_t batch_id = 0;
    std::uint64_t tokens_prompt = 0;
    std::uint64_t tokens_completion = 0;
    double cost_eur = 0.0;

    void validate() const {
        if (unicode::trim(text).empty())
            throw std::invalid_argument("definition for '" + lemma.surface() + "' is empty");
        if (!(cost_eur >= 0.0))
            throw std::invalid_argument("negative cost for '" + lemma.surface() + "'");
    }

    friend bool operator==(const GeneratedDefinition &, const GeneratedDefinition &) = default;
};

using Dictionary = std::vector<GeneratedDefinition>;

struct Sense {
    int id = 0; // 1-based rank in the reference dictionary
    std::string text;

    friend bool operator==(const Sense &, const Sense &) = default;
};

class ReferenceEntry {
  public:
    ReferenceEntry(Lemma lemma, const std::vector<std::string> &texts) : lemma_(std::move(lemma)) {
        if (texts.empty())
            throw std::invalid_argument("reference entry '" + lemma_.surface() + "' has no senses");
        int id = 1;
        for (const auto &t : texts)
            senses_.push_back(Sense{id++, t});
    }

    const Lemma &lemma() const noexcept { return lemma_; }
    const std::vector<Sense> &senses() const noexcept { return senses_; }
    bool monosemous() const noexcept { return senses_.size() == 1; }
    bool polysemous() const noexcept { return senses_.size() > 1; }

    friend bool operator==(const ReferenceEntry &, const ReferenceEntry &) = default;

  private:
    Lemma lemma_;
    std::vector<Sense> senses_;
};

using ReferenceMap = std::map<std::string, ReferenceEntry>;

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson lemma_fields(const Lemma &l, ojson j) {
    j["lemma"] = l.surface();
    if (l.pos())
        j["pos"] = pos_code(*l.pos());
    j["neologism"] = l.neologism();
    return j;
}

inline Lemma lemma_from_json(const nlohmann::json &j, std::size_t lineno) {
    if (!j.contains("lemma") || !j["lemma"].is_string())
        throw ParseError(lineno, "missing string field 'lemma'");
    std::optional<PosTag> tag;
    if (j.contains("pos") && !j["pos"].is_null()) {
        if (!j["pos"].is_string() || !(tag = parse_pos(j["pos"].get<std::string>())))
            throw ParseError(lineno, "malformed 'pos' field");
    }
    bool neo = false;
    if (j.contains("neologism")) {
        if (!j["neologism"].is_boolean())
            throw ParseError(lineno, "'neologism' must be a boolean");
        neo = j["neologism"].get<bool>();
    }
    try {
        return Lemma(j["lemma"].get<std::string>(), tag, neo);
    } catch (const std::invalid_argument &e) {
        throw ParseError(lineno, e.what());
    }
}

template <class T>
T required(const nlohmann::json &j, const char *key, std::size_t lineno) {
    if (!j.contains(key))
        throw ParseError(lineno, std::string("missing field '") + key + "'");
    try {
        return j[key].get<T>();
    } catch (const nlohmann::json::exception &) {
        throw ParseError(lineno, std::string("field '") + key + "' has the wrong type");
    }
}

inline nlohmann::json parse_json_line(std::string_view line, std::size_t lineno) {
    try {
        return nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(lineno, std::string("malformed record: ") + e.what());
    }
}

} // namespace detail

inline std::string format_record(const GeneratedDefinition &d) {
    detail::ojson j = detail::lemma_fields(d.lemma, detail::ojson::object());
    j["text"] = d.text;
    j["prompt_id"] = d.prompt_id;
    j["batch_id"] = d.batch_id;
    j["tokens_prompt"] = d.tokens_prompt;
    j["tokens_completion"] = d.tokens_completion;
    j["cost_eur"] = d.cost_eur;
    return j.dump();
}

inline GeneratedDefinition parse_record(std::string_view line, std::size_t lineno) {
    const nlohmann::json j = detail::parse_json_line(line, lineno);
    if (!j.is_object())
        throw ParseError(lineno, "record is not an object");
    GeneratedDefinition d{detail::lemma_from_json(j, lineno),
                          detail::required<std::string>(j, "text", lineno),
                          detail::required<std::string>(j, "prompt_id", lineno),
                          detail::required<std::int64_t>(j, "batch_id", lineno),
                          detail::required<std::uint64_t>(j, "tokens_prompt", lineno),
                          detail::required<std::uint64_t>(j, "tokens_completion", lineno),
                          detail::required<double>(j, "cost_eur", lineno)};
    try {
        d.validate();
    } catch (const std::invalid_argument &e) {
        throw ParseError(lineno, e.what());
    }
    return d;
}

inline std::string format_dictionary(std::span<const GeneratedDefinition> entries) {
    std::string out;
    for (const auto &d : entries) {
        if (!unicode::is_valid_utf8(d.text))
            throw EncodingError("definition for '" + d.lemma.surface() + "' is not valid UTF-8");
        out += format_record(d);
        out += '\n';
    }
    return out;
}

inline Dictionary parse_dictionary(std::string_view text) {
    unicode::require_utf8(text, "dictionary");
    Dictionary out;
    const auto lines = io::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        if (unicode::trim(lines[i]).empty())
            continue;
        out.push_back(parse_record(lines[i], i + 1));
    }
    return out;
}

inline void save_dictionary(std::span<const GeneratedDefinition> entries,
                            const std::filesystem::path &path) {
    io::write_file(path, format_dictionary(entries));
}

inline void append_dictionary(std::span<const GeneratedDefinition> entries,
                              const std::filesystem::path &path) {
    if (!entries.empty())
        io::append_file(path, format_dictionary(entries));
}

inline Dictionary load_dictionary(const std::filesystem::path &path) {
    return parse_dictionary(io::read_file(path));
}

inline ReferenceMap parse_reference_dictionary(std::string_view text) {
    unicode::require_utf8(text, "reference dictionary");
    ReferenceMap out;
    const auto lines = io::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::size_t lineno = i + 1;
        if (unicode::trim(lines[i]).empty())
            continue;
        const nlohmann::json j = detail::parse_json_line(lines[i], lineno);
        if (!j.is_object())
            throw ParseError(lineno, "record is not an object");
        Lemma lemma = detail::lemma_from_json(j, lineno);
        const auto texts = detail::required<std::vector<std::string>>(j, "senses", lineno);
        if (texts.empty())
            throw ParseError(lineno, "entry '" + lemma.surface() + "' has zero senses");
        for (const auto &t : texts)
            if (unicode::trim(t).empty())
                throw ParseError(lineno, "entry '" + lemma.surface() + "' has an empty sense");
        std::string key = lemma.surface();
        if (out.count(key))
            throw ParseError(lineno, "duplicate lemma '" + key + "'");
        out.emplace(std::move(key), ReferenceEntry(std::move(lemma), texts));
    }
    return out;
}

inline ReferenceMap load_reference_dictionary(const std::filesystem::path &path) {
    return parse_reference_dictionary(io::read_file(path));
}

inline std::string format_reference_dictionary(const ReferenceMap &refs) {
    std::string out;
    for (const auto &[key, entry] : refs) {
        detail::ojson j = detail::ojson::object();
        j["lemma"] = entry.lemma().surface();
        if (entry.lemma().pos())
            j["pos"] = pos_code(*entry.lemma().pos());
        auto senses = detail::ojson::array();
        for (const auto &s : entry.senses())
            senses.push_back(s.text);
        j["senses"] = std::move(senses);
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace lexigen
