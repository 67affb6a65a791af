#pragma once

// Prompt rendering, batch planning, batched-completion parsing and the throughput
// cost model.
//
// A batched prompt lists its lemmas as a numbered block
//
//     1. "casa"
//     2. "perro"
//
// and the completion is expected to answer in the same numbering,
// '1. "casa": definition', one item per line.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lexigen/error.hpp"
#include "lexigen/io.hpp"
#include "lexigen/lexicon.hpp"
#include "lexigen/unicode.hpp"

namespace lexigen {

inline constexpr std::string_view kWordPlaceholder = "[word]";

struct PromptTemplate {
    std::string id;
    std::string body; // exactly one [word] placeholder
    bool batched = false;
    bool quote_lemma = true;
    std::string single_variant; // batched templates: id used for single-lemma retries

    void validate() const {
        const auto first = body.find(kWordPlaceholder);
        if (first == std::string::npos ||
            body.find(kWordPlaceholder, first + kWordPlaceholder.size()) != std::string::npos)
            throw std::invalid_argument("template '" + id + "' must contain exactly one [word]");
    }
};

namespace templates {

inline const PromptTemplate &literal() {
    static const PromptTemplate t{
        "literal", "Genera en español la definición para la palabra literal [word]", false, true, ""};
    return t;
}

inline const PromptTemplate &literal_batch() {
    static const PromptTemplate t{
        "literal-batch",
        "Genera en español la definición para cada palabra literal de la lista numerada. "
        "Responde una línea por palabra con el mismo número, la palabra entre comillas, "
        "dos puntos y la definición.\n[word]",
        true, true, "literal"};
    return t;
}

inline const PromptTemplate &original() {
    static const PromptTemplate t{"original", "Generate in Spanish a definition of the word [word]",
                                  false, true, ""};
    return t;
}

inline const PromptTemplate &original_batch() {
    static const PromptTemplate t{
        "original-batch",
        "Generate in Spanish a definition of each word in the numbered list. Answer one line "
        "per word with the same number, the word in quotes, a colon and the definition.\n[word]",
        true, true, "original"};
    return t;
}

inline std::span<const PromptTemplate *const> all() {
    static const PromptTemplate *const list[] = {&literal(), &literal_batch(), &original(),
                                                 &original_batch()};
    return list;
}

inline const PromptTemplate *find(std::string_view id) {
    for (const auto *t : all())
        if (t->id == id)
            return t;
    return nullptr;
}

inline const PromptTemplate &get(std::string_view id) {
    if (const auto *t = find(id))
        return *t;
    throw ConfigError("unknown template '" + std::string(id) + "'");
}

// The template to use for a given batch size: a single-lemma family id is promoted
// to its "-batch" form when more than one lemma goes into each prompt.
inline const PromptTemplate &for_match_size(std::string_view id, int match_size) {
    const PromptTemplate &t = get(id);
    if (match_size > 1 && !t.batched)
        return get(std::string(id) + "-batch");
    return t;
}

inline const PromptTemplate &single_for(const PromptTemplate &t) {
    if (!t.batched)
        return t;
    return get(t.single_variant);
}

} // namespace templates

struct BatchConfig {
    int match_size = 1;
    int max_tokens = 100;
    double temperature = 0.5;
    double price_per_1k_tokens_eur = 0.02;

    void validate() const {
        if (match_size < 1)
            throw ConfigError("match_size must be >= 1");
        if (max_tokens < 16)
            throw ConfigError("max_tokens must be >= 16");
        if (!(temperature >= 0.0 && temperature <= 2.0))
            throw ConfigError("temperature must be in [0, 2]");
        if (!(price_per_1k_tokens_eur >= 0.0))
            throw ConfigError("price_per_1k_tokens_eur must be >= 0");
    }
};

// One row of the batch-size throughput table: how many lemmas a half-hour run at a
// given match size processed, and what it cost.
struct ThroughputRow {
    int match_size = 1;
    int max_tokens = 100;
    std::uint64_t processed_per_half_hour = 0;
    double price_per_half_hour_eur = 0.0;

    friend bool operator==(const ThroughputRow &, const ThroughputRow &) = default;
};

inline const std::vector<ThroughputRow> &default_presets() {
    static const std::vector<ThroughputRow> rows = {
        {1, 100, 400, 0.60},
        {3, 500, 1179, 0.78},
        {5, 1000, 1290, 0.84},
        {10, 2000, 1650, 0.90},
    };
    return rows;
}

inline const ThroughputRow *find_preset(std::span<const ThroughputRow> rows, int match_size) {
    for (const auto &r : rows)
        if (r.match_size == match_size)
            return &r;
    return nullptr;
}

// CSV with header "match_size,max_tokens,processed_per_half_hour,price_per_half_hour_eur".
inline std::vector<ThroughputRow> parse_presets(std::string_view text) {
    std::vector<ThroughputRow> rows;
    const auto lines = io::split_lines(text);
    bool header_seen = false;
    for (std::size_t i = 0; i < lines.size(); ++i) {
        const std::string line = unicode::trim(lines[i]);
        if (line.empty() || line.front() == '#')
            continue;
        if (!header_seen) {
            if (line != "match_size,max_tokens,processed_per_half_hour,price_per_half_hour_eur")
                throw ParseError(i + 1, "unexpected preset header");
            header_seen = true;
            continue;
        }
        ThroughputRow r;
        char comma[3];
        int consumed = 0;
        unsigned long long processed = 0;
        if (std::sscanf(line.c_str(), "%d%c%d%c%llu%c%lf%n", &r.match_size, &comma[0],
                        &r.max_tokens, &comma[1], &processed, &comma[2],
                        &r.price_per_half_hour_eur, &consumed) != 7 ||
            static_cast<std::size_t>(consumed) != line.size() || comma[0] != ',' ||
            comma[1] != ',' || comma[2] != ',')
            throw ParseError(i + 1, "malformed preset row");
        r.processed_per_half_hour = processed;
        if (r.match_size < 1 || r.processed_per_half_hour == 0 || r.price_per_half_hour_eur < 0)
            throw ParseError(i + 1, "preset row out of range");
        rows.push_back(r);
    }
    if (rows.empty())
        throw ParseError(0, "preset table has no rows");
    return rows;
}

inline std::vector<ThroughputRow> load_presets(const std::filesystem::path &path) {
    return parse_presets(io::read_file(path));
}

struct CostEstimate {
    std::uint64_t n_lemmas = 0;
    double total_eur = 0.0;
    double cents_per_lemma = 0.0;
    double est_wall_hours = 0.0;
};

inline CostEstimate estimate_cost(std::uint64_t n_lemmas, const ThroughputRow &row) {
    if (row.processed_per_half_hour == 0)
        throw std::invalid_argument("throughput row has zero processed lemmas");
    CostEstimate e;
    e.n_lemmas = n_lemmas;
    e.cents_per_lemma =
        row.price_per_half_hour_eur / static_cast<double>(row.processed_per_half_hour) * 100.0;
    e.total_eur = static_cast<double>(n_lemmas) * e.cents_per_lemma / 100.0;
    e.est_wall_hours =
        static_cast<double>(n_lemmas) / static_cast<double>(row.processed_per_half_hour) * 0.5;
    return e;
}

// "casa" -> "\"casa\""; embedded quotes and backslashes are backslash-escaped.
inline std::string quote_lemma(std::string_view surface) {
    std::string out = "\"";
    for (char c : surface) {
        if (c == '"' || c == '\\')
            out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string build_prompt(std::span<const Lemma> lemmas, const PromptTemplate &tpl) {
    tpl.validate();
    if (lemmas.empty())
        throw std::invalid_argument("prompt needs at least one lemma");
    if (!tpl.batched && lemmas.size() != 1)
        throw std::invalid_argument("template '" + tpl.id + "' takes exactly one lemma, got " +
                                    std::to_string(lemmas.size()));
    auto render = [&](const Lemma &l) {
        return tpl.quote_lemma ? quote_lemma(l.surface()) : l.surface();
    };
    std::string slot;
    if (tpl.batched) {
        for (std::size_t k = 0; k < lemmas.size(); ++k) {
            if (k)
                slot += '\n';
            slot += std::to_string(k + 1) + ". " + render(lemmas[k]);
        }
    } else {
        slot = render(lemmas.front());
    }
    std::string out = tpl.body;
    out.replace(out.find(kWordPlaceholder), kWordPlaceholder.size(), slot);
    return out;
}

struct Batch {
    std::int64_t batch_id = 0;
    std::vector<Lemma> lemmas;
    std::string prompt_id;
    std::string prompt_text;
};

inline std::vector<Batch> plan_batches(std::span<const Lemma> lemmas, const BatchConfig &config,
                                       const PromptTemplate &tpl) {
    config.validate();
    std::vector<Batch> plan;
    const std::size_t size = static_cast<std::size_t>(config.match_size);
    for (std::size_t start = 0; start < lemmas.size(); start += size) {
        Batch b;
        b.batch_id = static_cast<std::int64_t>(plan.size());
        const std::size_t end = std::min(lemmas.size(), start + size);
        b.lemmas.assign(lemmas.begin() + static_cast<std::ptrdiff_t>(start),
                        lemmas.begin() + static_cast<std::ptrdiff_t>(end));
        b.prompt_id = tpl.id;
        b.prompt_text = build_prompt(b.lemmas, tpl);
        plan.push_back(std::move(b));
    }
    return plan;
}

inline std::vector<Batch> plan_batches(const LemmaList &lemmas, const BatchConfig &config,
                                       const PromptTemplate &tpl) {
    return plan_batches(lemmas.items(), config, tpl);
}

// Raised (as a value) when a batched completion cannot be aligned item-for-item with
// its batch. `recovered[k]` holds the text for lemma k+1 when that slot was usable;
// `missing` lists the 1-based slots that were not.
struct AlignmentError {
    std::vector<std::size_t> missing;
    std::vector<std::optional<std::string>> recovered;
    std::string reason;
};

using BatchParse = std::variant<std::vector<GeneratedDefinition>, AlignmentError>;

namespace detail {

struct Marker {
    std::size_t number;
    std::string text;
};

// A marker is a line whose first non-blank characters are "<digits>." followed by a
// space, a tab or the end of the line.
inline std::optional<std::pair<std::size_t, std::string_view>> match_marker(std::string_view line) {
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t'))
        ++i;
    const std::size_t digits = i;
    while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i])))
        ++i;
    if (i == digits || i - digits > 6 || i >= line.size() || line[i] != '.')
        return std::nullopt;
    ++i;
    if (i < line.size() && line[i] != ' ' && line[i] != '\t')
        return std::nullopt;
    std::size_t number = 0;
    std::from_chars(line.data() + digits, line.data() + i - 1, number);
    return std::make_pair(number, line.substr(i));
}

inline std::vector<Marker> scan_markers(std::string_view completion) {
    std::vector<Marker> markers;
    for (std::string_view line : io::split_lines(completion)) {
        if (auto m = match_marker(line)) {
            markers.push_back(Marker{m->first, std::string(m->second)});
        } else if (!markers.empty()) {
            markers.back().text += '\n';
            markers.back().text += line;
        }
    }
    return markers;
}

inline bool starts_with(std::string_view s, std::string_view prefix) {
    return s.substr(0, prefix.size()) == prefix;
}

// Drops an echoed '"lemma":' (or 'lemma:') head from a segment.
inline std::string strip_echo(std::string segment, const Lemma &lemma) {
    segment = unicode::trim(segment);
    std::string_view rest = segment;
    const std::string quoted = quote_lemma(lemma.surface());
    bool echoed = false;
    if (starts_with(rest, quoted)) {
        rest.remove_prefix(quoted.size());
        echoed = true;
    } else if (starts_with(rest, lemma.surface() + ":")) {
        rest.remove_prefix(lemma.surface().size());
        echoed = true;
    }
    if (echoed) {
        while (!rest.empty() && (rest.front() == ' ' || rest.front() == '\t'))
            rest.remove_prefix(1);
        for (std::string_view sep : {":", "-", "–", "—"}) {
            if (starts_with(rest, sep)) {
                rest.remove_prefix(sep.size());
                break;
            }
        }
    }
    return unicode::trim(rest);
}

} // namespace detail

inline BatchParse parse_batch_completion(std::string_view completion, const Batch &batch) {
    const std::size_t n = batch.lemmas.size();
    const auto markers = detail::scan_markers(completion);

    AlignmentError err;
    err.recovered.assign(n, std::nullopt);
    for (std::size_t k = 1; k <= n; ++k) {
        std::size_t hits = 0, at = 0;
        for (std::size_t m = 0; m < markers.size(); ++m)
            if (markers[m].number == k) {
                ++hits;
                at = m;
            }
        bool ok = hits == 1;
        for (std::size_t m = 0; ok && m < markers.size(); ++m)
            if ((m < at && markers[m].number >= k) || (m > at && markers[m].number <= k))
                ok = false;
        if (ok) {
            std::string text = detail::strip_echo(markers[at].text, batch.lemmas[k - 1]);
            if (!text.empty())
                err.recovered[k - 1] = std::move(text);
        }
        if (!err.recovered[k - 1])
            err.missing.push_back(k);
    }

    if (markers.size() != n || !err.missing.empty()) {
        err.reason = markers.size() != n
                         ? "expected " + std::to_string(n) + " numbered items, found " +
                               std::to_string(markers.size())
                         : "items out of order or empty";
        return err;
    }

    std::vector<GeneratedDefinition> defs;
    defs.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        GeneratedDefinition d{batch.lemmas[k], std::move(*err.recovered[k]), batch.prompt_id,
                              batch.batch_id};
        defs.push_back(std::move(d));
    }
    return defs;
}

// Single-lemma prompts are answered with the bare definition; an echoed lemma head is
// tolerated. Returns nullopt for an empty answer.
inline std::optional<std::string> parse_single_completion(std::string_view completion,
                                                          const Lemma &lemma) {
    std::string text = detail::strip_echo(std::string(completion), lemma);
    if (text.empty())
        return std::nullopt;
    return text;
}

// Inverse of the numbered answer format; used by the mock provider and tests.
inline std::string render_numbered_completion(std::span<const Lemma> lemmas,
                                              std::span<const std::string> texts) {
    if (lemmas.size() != texts.size())
        throw std::invalid_argument("one text per lemma required");
    std::string out;
    for (std::size_t k = 0; k < lemmas.size(); ++k) {
        if (k)
            out += '\n';
        out += std::to_string(k + 1) + ". " + quote_lemma(lemmas[k].surface()) + ": " + texts[k];
    }
    return out;
}

} // namespace lexigen
