#pragma once

// Monosemy and polysemy evaluation of a generated dictionary against references,
// plus the report, per-lemma records and figure-data emitters.
//
// Every lemma found in both the dictionary and the references lands in exactly one
// track: one reference sense -> monosemy, two or more -> polysemy. Dictionary lemmas
// without a reference are counted as skipped.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lexigen/error.hpp"
#include "lexigen/error_analysis.hpp"
#include "lexigen/io.hpp"
#include "lexigen/lexicon.hpp"
#include "lexigen/parallel.hpp"
#include "lexigen/prompt.hpp"
#include "lexigen/providers.hpp"
#include "lexigen/textmetrics.hpp"

namespace lexigen {

struct EvaluationRecord {
    Lemma lemma;
    std::size_t n_senses = 1;
    MetricScores scores{};
    std::optional<int> best_sense_id{}; // polysemous lemmas only
    std::optional<double> best_cosine{};

    bool polysemous() const noexcept { return best_sense_id.has_value(); }

    friend bool operator==(const EvaluationRecord &, const EvaluationRecord &) = default;
};

struct PosBreakdown {
    std::size_t count = 0;
    double mean_cosine = 0.0;
    double share_of_total = 0.0; // percent of the monosemous set

    friend bool operator==(const PosBreakdown &, const PosBreakdown &) = default;
};

struct MonosemyReport {
    std::size_t n = 0;
    MetricScores aggregate; // corpus BLEU, mean of everything else
    std::map<PosTag, PosBreakdown> by_pos;
    std::size_t unknown_pos = 0; // counted in n, excluded from by_pos
    LengthStats gen_lengths;
    LengthStats ref_lengths;

    friend bool operator==(const MonosemyReport &, const MonosemyReport &) = default;
};

struct PolysemyReport {
    std::size_t n = 0;
    double mean_best_cosine = 0.0;
    std::map<int, std::size_t> match_histogram;
    std::map<int, double> mean_best_cosine_by_sense_id;

    friend bool operator==(const PolysemyReport &, const PolysemyReport &) = default;
};

// Embeds each distinct text once per run, in chunks the providers accept.
class EmbeddingCache {
  public:
    static constexpr std::size_t kChunk = 64;

    explicit EmbeddingCache(EmbeddingProvider &provider) : provider_(provider) {}

    // Embeds every uncached text, in order of first appearance.
    void prefetch(std::span<const std::string> texts) {
        std::vector<std::string> pending;
        std::unordered_set<std::string> queued;
        for (const auto &t : texts)
            if (!cache_.count(t) && queued.insert(t).second)
                pending.push_back(t);
        for (std::size_t start = 0; start < pending.size(); start += kChunk) {
            const std::size_t end = std::min(pending.size(), start + kChunk);
            std::span<const std::string> chunk(pending.data() + start, end - start);
            auto vectors = provider_.embed(chunk);
            if (vectors.size() != chunk.size())
                throw ProviderError("embedding provider returned the wrong number of vectors");
            for (std::size_t i = 0; i < chunk.size(); ++i) {
                if (vectors[i].empty())
                    throw ProviderError("embedding provider returned an empty vector");
                if (dim_ == 0)
                    dim_ = vectors[i].size();
                else if (vectors[i].size() != dim_)
                    throw ProviderError("embedding dimension changed within run: " +
                                        std::to_string(dim_) + " -> " +
                                        std::to_string(vectors[i].size()));
                cache_.emplace(chunk[i], std::move(vectors[i]));
            }
        }
    }

    // Only valid for prefetched texts; safe to call concurrently after prefetch.
    const EmbeddingVector &at(const std::string &text) const {
        auto it = cache_.find(text);
        if (it == cache_.end())
            throw std::logic_error("text was not prefetched: " + text);
        return it->second;
    }

    std::size_t size() const noexcept { return cache_.size(); }
    std::size_t dim() const noexcept { return dim_; }

  private:
    EmbeddingProvider &provider_;
    std::unordered_map<std::string, EmbeddingVector> cache_;
    std::size_t dim_ = 0;
};

struct EvaluationOptions {
    std::size_t workers = 4;
};

struct MonosemyResult {
    MonosemyReport report;
    std::vector<EvaluationRecord> records;
    std::size_t skipped = 0;
};

struct PolysemyResult {
    PolysemyReport report;
    std::vector<EvaluationRecord> records;
    std::size_t skipped = 0;
};

namespace detail {

struct Joined {
    std::vector<const GeneratedDefinition *> mono;
    std::vector<const GeneratedDefinition *> poly;
    std::vector<const ReferenceEntry *> mono_refs;
    std::vector<const ReferenceEntry *> poly_refs;
    std::size_t skipped = 0;
};

// First occurrence wins when a lemma repeats in the dictionary.
inline Joined join(std::span<const GeneratedDefinition> gen, const ReferenceMap &refs) {
    Joined j;
    std::unordered_set<std::string> seen;
    for (const auto &d : gen) {
        if (!seen.insert(d.lemma.surface()).second)
            continue;
        auto it = refs.find(d.lemma.surface());
        if (it == refs.end()) {
            ++j.skipped;
        } else if (it->second.monosemous()) {
            j.mono.push_back(&d);
            j.mono_refs.push_back(&it->second);
        } else {
            j.poly.push_back(&d);
            j.poly_refs.push_back(&it->second);
        }
    }
    if (j.mono.empty() && j.poly.empty())
        throw EmptyEvaluation("no dictionary lemma has a reference entry");
    return j;
}

inline MetricScores lexical_scores(const std::string &gen, const std::string &ref) {
    const TokenSequence cand = tokenize(gen);
    const TokenSequence refs = tokenize(ref);
    const TokenPair pair{cand, refs};
    MetricScores s;
    s.bleu_cumulative = bleu_cumulative(std::span(&pair, 1));
    s.bleu_1gram = bleu_1gram(std::span(&pair, 1));
    s.levenshtein = static_cast<double>(levenshtein(gen, ref));
    s.jaccard = jaccard(cand, refs);
    return s;
}

inline MonosemyResult evaluate_mono(const Joined &j, EmbeddingCache &cache,
                                    const EvaluationOptions &opts) {
    MonosemyResult result;
    result.skipped = j.skipped;
    const std::size_t n = j.mono.size();
    MonosemyReport &rep = result.report;
    rep.n = n;
    if (n == 0)
        return result;

    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
        texts.push_back(j.mono[i]->text);
        texts.push_back(j.mono_refs[i]->senses().front().text);
    }
    cache.prefetch(texts);

    result.records.resize(n, EvaluationRecord{.lemma = j.mono.front()->lemma});
    std::vector<TokenPair> pairs(n);
    parallel_for(n, opts.workers, [&](std::size_t i) {
        const std::string &gen = j.mono[i]->text;
        const std::string &ref = j.mono_refs[i]->senses().front().text;
        EvaluationRecord rec{.lemma = j.mono[i]->lemma, .n_senses = 1, .scores = lexical_scores(gen, ref)};
        rec.scores.cosine = cosine(cache.at(gen), cache.at(ref));
        result.records[i] = std::move(rec);
        pairs[i] = {tokenize(gen), tokenize(ref)};
    });

    rep.aggregate.bleu_cumulative = bleu_cumulative(pairs);
    rep.aggregate.bleu_1gram = bleu_1gram(pairs);
    std::map<PosTag, double> cos_sum;
    for (const auto &r : result.records) {
        rep.aggregate.levenshtein += r.scores.levenshtein;
        rep.aggregate.jaccard += r.scores.jaccard;
        rep.aggregate.cosine += r.scores.cosine;
        if (const auto pos = r.lemma.pos()) {
            ++rep.by_pos[*pos].count;
            cos_sum[*pos] += r.scores.cosine;
        } else {
            ++rep.unknown_pos;
        }
    }
    const double dn = static_cast<double>(n);
    rep.aggregate.levenshtein /= dn;
    rep.aggregate.jaccard /= dn;
    rep.aggregate.cosine /= dn;
    for (auto &[pos, b] : rep.by_pos) {
        b.mean_cosine = cos_sum[pos] / static_cast<double>(b.count);
        b.share_of_total = 100.0 * static_cast<double>(b.count) / dn;
    }

    std::vector<std::string> gen_texts, ref_texts;
    for (std::size_t i = 0; i < n; ++i) {
        gen_texts.push_back(j.mono[i]->text);
        ref_texts.push_back(j.mono_refs[i]->senses().front().text);
    }
    rep.gen_lengths = length_stats(gen_texts);
    rep.ref_lengths = length_stats(ref_texts);
    return result;
}

inline PolysemyResult evaluate_poly(const Joined &j, EmbeddingCache &cache,
                                    const EvaluationOptions &opts) {
    PolysemyResult result;
    result.skipped = j.skipped;
    const std::size_t n = j.poly.size();
    PolysemyReport &rep = result.report;
    rep.n = n;
    if (n == 0)
        return result;

    std::vector<std::string> texts;
    for (std::size_t i = 0; i < n; ++i) {
        texts.push_back(j.poly[i]->text);
        for (const auto &s : j.poly_refs[i]->senses())
            texts.push_back(s.text);
    }
    cache.prefetch(texts);

    result.records.resize(n, EvaluationRecord{.lemma = j.poly.front()->lemma});
    parallel_for(n, opts.workers, [&](std::size_t i) {
        const std::string &gen = j.poly[i]->text;
        const auto &senses = j.poly_refs[i]->senses();
        const EmbeddingVector &gv = cache.at(gen);
        std::size_t best = 0;
        double best_cos = cosine(gv, cache.at(senses[0].text));
        for (std::size_t k = 1; k < senses.size(); ++k) {
            const double c = cosine(gv, cache.at(senses[k].text));
            if (c > best_cos) {
                best_cos = c;
                best = k;
            }
        }
        EvaluationRecord rec{.lemma = j.poly[i]->lemma,
                             .n_senses = senses.size(),
                             .scores = lexical_scores(gen, senses[best].text)};
        rec.scores.cosine = best_cos;
        rec.best_sense_id = senses[best].id;
        rec.best_cosine = best_cos;
        result.records[i] = std::move(rec);
    });

    double total = 0.0;
    for (const auto &r : result.records) {
        ++rep.match_histogram[*r.best_sense_id];
        rep.mean_best_cosine_by_sense_id[*r.best_sense_id] += *r.best_cosine;
        total += *r.best_cosine;
    }
    rep.mean_best_cosine = total / static_cast<double>(n);
    for (auto &[id, sum] : rep.mean_best_cosine_by_sense_id)
        sum /= static_cast<double>(rep.match_histogram[id]);
    return result;
}

} // namespace detail

inline MonosemyResult evaluate_monosemous(std::span<const GeneratedDefinition> gen,
                                          const ReferenceMap &refs, EmbeddingProvider &embedder,
                                          const EvaluationOptions &opts = {}) {
    EmbeddingCache cache(embedder);
    return detail::evaluate_mono(detail::join(gen, refs), cache, opts);
}

inline PolysemyResult evaluate_polysemous(std::span<const GeneratedDefinition> gen,
                                          const ReferenceMap &refs, EmbeddingProvider &embedder,
                                          const EvaluationOptions &opts = {}) {
    EmbeddingCache cache(embedder);
    return detail::evaluate_poly(detail::join(gen, refs), cache, opts);
}

struct EvaluationResult {
    MonosemyReport monosemy;
    PolysemyReport polysemy;
    std::vector<EvaluationRecord> records; // dictionary order
    std::size_t skipped = 0;
};

// Both tracks over one shared embedding cache.
inline EvaluationResult evaluate(std::span<const GeneratedDefinition> gen, const ReferenceMap &refs,
                                 EmbeddingProvider &embedder, const EvaluationOptions &opts = {}) {
    const detail::Joined j = detail::join(gen, refs);
    EmbeddingCache cache(embedder);
    MonosemyResult mono = detail::evaluate_mono(j, cache, opts);
    PolysemyResult poly = detail::evaluate_poly(j, cache, opts);

    EvaluationResult out;
    out.monosemy = std::move(mono.report);
    out.polysemy = std::move(poly.report);
    out.skipped = j.skipped;

    std::unordered_map<std::string, EvaluationRecord *> by_lemma;
    for (auto &r : mono.records)
        by_lemma.emplace(r.lemma.surface(), &r);
    for (auto &r : poly.records)
        by_lemma.emplace(r.lemma.surface(), &r);
    for (const auto &d : gen) {
        auto it = by_lemma.find(d.lemma.surface());
        if (it != by_lemma.end() && it->second) {
            out.records.push_back(std::move(*it->second));
            it->second = nullptr;
        }
    }
    return out;
}

struct RunMeta {
    std::string template_id;
    BatchConfig config;
    std::string provider_mode;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> dictionary_prompt_ids;

    friend bool operator==(const RunMeta &a, const RunMeta &b) {
        return a.template_id == b.template_id && a.config.match_size == b.config.match_size &&
               a.config.max_tokens == b.config.max_tokens &&
               a.config.temperature == b.config.temperature &&
               a.config.price_per_1k_tokens_eur == b.config.price_per_1k_tokens_eur &&
               a.provider_mode == b.provider_mode && a.seed == b.seed &&
               a.dictionary_prompt_ids == b.dictionary_prompt_ids;
    }
};

struct EvaluationReport {
    MonosemyReport monosemy;
    PolysemyReport polysemy;
    std::size_t skipped = 0;
    RunMeta meta;
    std::optional<ErrorStats> errors;

    friend bool operator==(const EvaluationReport &, const EvaluationReport &) = default;
};

namespace detail {

using ojson = nlohmann::ordered_json;

inline ojson scores_json(const MetricScores &s) {
    return {{"bleu_cumulative", s.bleu_cumulative}, {"bleu_1gram", s.bleu_1gram},
            {"levenshtein", s.levenshtein},         {"jaccard", s.jaccard},
            {"cosine", s.cosine}};
}

inline MetricScores scores_from(const nlohmann::json &j) {
    return {j.at("bleu_cumulative").get<double>(), j.at("bleu_1gram").get<double>(),
            j.at("levenshtein").get<double>(), j.at("jaccard").get<double>(),
            j.at("cosine").get<double>()};
}

inline ojson lengths_json(const LengthStats &s) {
    return {{"mean_words", s.mean_words}, {"sd_words", s.sd_words},
            {"mean_chars", s.mean_chars}, {"sd_chars", s.sd_chars}};
}

inline LengthStats lengths_from(const nlohmann::json &j) {
    return {j.at("mean_words").get<double>(), j.at("sd_words").get<double>(),
            j.at("mean_chars").get<double>(), j.at("sd_chars").get<double>()};
}

} // namespace detail

inline nlohmann::ordered_json to_json(const EvaluationReport &r) {
    using detail::ojson;
    ojson by_pos = ojson::object();
    for (const auto &[pos, b] : r.monosemy.by_pos)
        by_pos[std::string(pos_code(pos))] = {
            {"count", b.count}, {"mean_cosine", b.mean_cosine}, {"share_of_total", b.share_of_total}};
    ojson mono = {{"n", r.monosemy.n},
                  {"aggregate", detail::scores_json(r.monosemy.aggregate)},
                  {"by_pos", by_pos},
                  {"unknown_pos", r.monosemy.unknown_pos},
                  {"gen_lengths", detail::lengths_json(r.monosemy.gen_lengths)},
                  {"ref_lengths", detail::lengths_json(r.monosemy.ref_lengths)}};

    ojson hist = ojson::object(), by_id = ojson::object();
    for (const auto &[id, count] : r.polysemy.match_histogram)
        hist[std::to_string(id)] = count;
    for (const auto &[id, mean] : r.polysemy.mean_best_cosine_by_sense_id)
        by_id[std::to_string(id)] = mean;
    ojson poly = {{"n", r.polysemy.n},
                  {"mean_best_cosine", r.polysemy.mean_best_cosine},
                  {"match_histogram", hist},
                  {"mean_best_cosine_by_sense_id", by_id}};

    ojson meta = {{"template_id", r.meta.template_id},
                  {"provider_mode", r.meta.provider_mode},
                  {"seed", r.meta.seed ? ojson(*r.meta.seed) : ojson(nullptr)},
                  {"config",
                   {{"match_size", r.meta.config.match_size},
                    {"max_tokens", r.meta.config.max_tokens},
                    {"temperature", r.meta.config.temperature},
                    {"price_per_1k_tokens_eur", r.meta.config.price_per_1k_tokens_eur}}},
                  {"dictionary_prompt_ids", r.meta.dictionary_prompt_ids}};

    ojson out = {{"monosemy", mono}, {"polysemy", poly}, {"skipped", r.skipped}, {"meta", meta}};
    if (r.errors)
        out["errors"] = to_json(*r.errors);
    return out;
}

inline EvaluationReport report_from_json(const nlohmann::json &j) {
    EvaluationReport r;
    try {
        const auto &mono = j.at("monosemy");
        r.monosemy.n = mono.at("n").get<std::size_t>();
        r.monosemy.aggregate = detail::scores_from(mono.at("aggregate"));
        for (const auto &[code, b] : mono.at("by_pos").items()) {
            const auto pos = parse_pos(code);
            if (!pos)
                throw ParseError(0, "unknown POS '" + code + "' in report");
            r.monosemy.by_pos[*pos] = PosBreakdown{b.at("count").get<std::size_t>(),
                                                   b.at("mean_cosine").get<double>(),
                                                   b.at("share_of_total").get<double>()};
        }
        r.monosemy.unknown_pos = mono.at("unknown_pos").get<std::size_t>();
        r.monosemy.gen_lengths = detail::lengths_from(mono.at("gen_lengths"));
        r.monosemy.ref_lengths = detail::lengths_from(mono.at("ref_lengths"));

        const auto &poly = j.at("polysemy");
        r.polysemy.n = poly.at("n").get<std::size_t>();
        r.polysemy.mean_best_cosine = poly.at("mean_best_cosine").get<double>();
        for (const auto &[id, count] : poly.at("match_histogram").items())
            r.polysemy.match_histogram[std::stoi(id)] = count.get<std::size_t>();
        for (const auto &[id, mean] : poly.at("mean_best_cosine_by_sense_id").items())
            r.polysemy.mean_best_cosine_by_sense_id[std::stoi(id)] = mean.get<double>();

        r.skipped = j.at("skipped").get<std::size_t>();
        const auto &meta = j.at("meta");
        r.meta.template_id = meta.at("template_id").get<std::string>();
        r.meta.provider_mode = meta.at("provider_mode").get<std::string>();
        if (!meta.at("seed").is_null())
            r.meta.seed = meta.at("seed").get<std::uint64_t>();
        const auto &cfg = meta.at("config");
        r.meta.config.match_size = cfg.at("match_size").get<int>();
        r.meta.config.max_tokens = cfg.at("max_tokens").get<int>();
        r.meta.config.temperature = cfg.at("temperature").get<double>();
        r.meta.config.price_per_1k_tokens_eur = cfg.at("price_per_1k_tokens_eur").get<double>();
        r.meta.dictionary_prompt_ids = meta.at("dictionary_prompt_ids").get<std::vector<std::string>>();
        if (j.contains("errors"))
            r.errors = error_stats_from_json(j.at("errors"));
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(0, std::string("malformed report: ") + e.what());
    } catch (const std::logic_error &e) {
        throw ParseError(0, std::string("malformed report: ") + e.what());
    }
    return r;
}

inline std::string format_report(const EvaluationReport &r) { return to_json(r).dump(2) + "\n"; }

inline EvaluationReport load_report(const std::filesystem::path &path) {
    const std::string text = io::read_file(path);
    try {
        return report_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error &e) {
        throw ParseError(0, std::string("malformed report: ") + e.what());
    }
}

inline std::string format_record(const EvaluationRecord &r) {
    detail::ojson j = detail::lemma_fields(r.lemma, detail::ojson::object());
    j["track"] = r.polysemous() ? "polysemy" : "monosemy";
    j["n_senses"] = r.n_senses;
    j["scores"] = detail::scores_json(r.scores);
    if (r.best_sense_id) {
        j["best_sense_id"] = *r.best_sense_id;
        j["best_cosine"] = *r.best_cosine;
    }
    return j.dump();
}

inline EvaluationRecord parse_evaluation_record(std::string_view line, std::size_t lineno) {
    const nlohmann::json j = detail::parse_json_line(line, lineno);
    try {
        EvaluationRecord r{.lemma = detail::lemma_from_json(j, lineno)};
        r.n_senses = j.at("n_senses").get<std::size_t>();
        r.scores = detail::scores_from(j.at("scores"));
        if (j.contains("best_sense_id")) {
            r.best_sense_id = j.at("best_sense_id").get<int>();
            r.best_cosine = j.at("best_cosine").get<double>();
        }
        return r;
    } catch (const nlohmann::json::exception &e) {
        throw ParseError(lineno, std::string("malformed evaluation record: ") + e.what());
    }
}

inline std::vector<EvaluationRecord> load_records(const std::filesystem::path &path) {
    const std::string text = io::read_file(path);
    std::vector<EvaluationRecord> out;
    const auto lines = io::split_lines(text);
    for (std::size_t i = 0; i < lines.size(); ++i)
        if (!lines[i].empty())
            out.push_back(parse_evaluation_record(lines[i], i + 1));
    return out;
}

// Writes the report object to `report_path` and one record per line to `records_path`.
inline void emit_report(const EvaluationReport &report, std::span<const EvaluationRecord> records,
                        const std::filesystem::path &report_path,
                        const std::filesystem::path &records_path) {
    io::write_file(report_path, format_report(report));
    std::string lines;
    for (const auto &r : records) {
        lines += format_record(r);
        lines += '\n';
    }
    io::write_file(records_path, lines);
}

inline std::string format_figure_data(const PolysemyReport &report) {
    std::string out = "sense_id,count,mean_best_cosine\n";
    char buf[96];
    for (const auto &[id, count] : report.match_histogram) {
        const auto it = report.mean_best_cosine_by_sense_id.find(id);
        const double mean = it == report.mean_best_cosine_by_sense_id.end() ? 0.0 : it->second;
        std::snprintf(buf, sizeof buf, "%d,%zu,%.6f\n", id, count, mean);
        out += buf;
    }
    return out;
}

inline void emit_figure_data(const PolysemyReport &report, const std::filesystem::path &path) {
    io::write_file(path, format_figure_data(report));
}

} // namespace lexigen
