#pragma once

// Subcommand implementations behind the `lexigen` executable. Each returns the
// process exit code:
//
//   0 success, 2 config/input error, 3 empty evaluation, 4 provider terminal failure

#include <algorithm>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "lexigen/config.hpp"
#include "lexigen/error.hpp"
#include "lexigen/error_analysis.hpp"
#include "lexigen/evaluation.hpp"
#include "lexigen/generate.hpp"
#include "lexigen/http_providers.hpp"
#include "lexigen/io.hpp"
#include "lexigen/lexicon.hpp"
#include "lexigen/prompt.hpp"
#include "lexigen/providers.hpp"

namespace lexigen::cli {

enum ExitCode : int { kOk = 0, kConfigError = 2, kEmptyEvaluation = 3, kProviderFailure = 4 };

struct CommandArgs {
    std::optional<std::filesystem::path> config_file;
    ConfigEntries overrides; // from flags; applied after the config file
    std::string lemmas;
    std::string refs;
    std::string dict;
    std::string out;
    std::string report;
    bool audit_prompts = false;
};

namespace detail {

inline std::string fmt(const char *f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

inline const std::string &require(const std::string &value, const char *flag) {
    if (value.empty())
        throw ConfigError(std::string("missing required option ") + flag);
    return value;
}

inline std::vector<ThroughputRow> presets_for(const RunConfig &cfg) {
    if (cfg.presets_path.empty())
        return default_presets();
    return load_presets(cfg.presets_path);
}

inline Endpoint live_endpoint(const RunConfig &cfg) {
    try {
        Endpoint ep = endpoint_from_env(cfg.endpoint);
        ep.timeout = cfg.timeout;
        return ep;
    } catch (const ProviderError &e) {
        throw ConfigError(e.what());
    }
}

inline std::shared_ptr<CompletionProvider> make_completion_provider(const RunConfig &cfg) {
    cfg.validate_providers();
    if (cfg.mode == ProviderMode::Mock) {
        MockCompletionOptions opts;
        opts.seed = *cfg.seed;
        opts.misaligned_lemmas = cfg.mock_misaligned;
        opts.failing_lemmas = cfg.mock_failing;
        return std::make_shared<MockCompletionProvider>(opts);
    }
    auto limiter = std::make_shared<RateLimiter>(cfg.retry.rpm, SystemClock::shared());
    return std::make_shared<ResilientCompletionProvider>(
        std::make_shared<HttpCompletionProvider>(live_endpoint(cfg)), cfg.retry, limiter);
}

inline std::shared_ptr<EmbeddingProvider> make_embedding_provider(const RunConfig &cfg) {
    cfg.validate_providers();
    if (cfg.mode == ProviderMode::Mock)
        return std::make_shared<MockEmbeddingProvider>(*cfg.seed, cfg.mock_dim);
    auto limiter = std::make_shared<RateLimiter>(cfg.retry.rpm, SystemClock::shared());
    return std::make_shared<ResilientEmbeddingProvider>(
        std::make_shared<HttpEmbeddingProvider>(live_endpoint(cfg)), cfg.retry, limiter);
}

inline ClassifierConfig classifier_for(const RunConfig &cfg) {
    ClassifierConfig c;
    if (!cfg.es_wordlist.empty())
        c.spanish = load_word_list(cfg.es_wordlist);
    if (!cfg.en_wordlist.empty())
        c.english = load_word_list(cfg.en_wordlist);
    c.spanish_max_fraction = cfg.spanish_max_fraction;
    c.english_min_fraction = cfg.english_min_fraction;
    return c;
}

// report.json -> report.records.jsonl / report.figure.csv
inline std::filesystem::path sibling(const std::filesystem::path &report, const char *suffix) {
    std::filesystem::path p = report;
    p.replace_extension();
    p += suffix;
    return p;
}

inline void print_error_stats(const ErrorStats &stats, std::ostream &out) {
    out << fmt("Errors (total=%zu)\n", stats.total);
    for (const auto &[label, c] : stats.per_label)
        out << fmt("  %-22s %6zu  %.4f\n", std::string(label_name(label)).c_str(), c.count,
                   c.fraction);
}

template <class Fn>
int guarded(std::ostream &err, Fn &&fn) {
    try {
        return fn();
    } catch (const EmptyEvaluation &e) {
        err << "error: " << e.what() << '\n';
        return kEmptyEvaluation;
    } catch (const ProviderError &e) {
        err << "error: provider failure: " << e.what() << '\n';
        return kProviderFailure;
    } catch (const Error &e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    } catch (const std::invalid_argument &e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }
}

} // namespace detail

inline void print_report(const EvaluationReport &r, std::ostream &out) {
    using detail::fmt;
    const auto &m = r.monosemy;
    out << fmt("Monosemy (n=%zu)\n", m.n);
    out << fmt("  %-16s %10s\n", "Metric", "Score");
    out << fmt("  %-16s %10.4f\n", "Cumulative BLEU", m.aggregate.bleu_cumulative);
    out << fmt("  %-16s %10.4f\n", "1-gram BLEU", m.aggregate.bleu_1gram);
    out << fmt("  %-16s %10.2f\n", "Levenshtein", m.aggregate.levenshtein);
    out << fmt("  %-16s %10.4f\n", "Jaccard", m.aggregate.jaccard);
    out << '\n';
    out << fmt("Definition lengths %10s %10s\n", "Mean", "Std Dev");
    out << fmt("  %-16s %10.1f %10.1f\n", "ref words", m.ref_lengths.mean_words, m.ref_lengths.sd_words);
    out << fmt("  %-16s %10.1f %10.1f\n", "ref characters", m.ref_lengths.mean_chars, m.ref_lengths.sd_chars);
    out << fmt("  %-16s %10.1f %10.1f\n", "gen words", m.gen_lengths.mean_words, m.gen_lengths.sd_words);
    out << fmt("  %-16s %10.1f %10.1f\n", "gen characters", m.gen_lengths.mean_chars, m.gen_lengths.sd_chars);
    out << '\n';
    out << fmt("Cosine by POS  %10s %12s\n", "Cosine", "% of total");
    out << fmt("  %-12s %10.4f %12.2f\n", "All", m.aggregate.cosine, m.n ? 100.0 : 0.0);
    for (const auto &[pos, b] : m.by_pos)
        out << fmt("  %-12s %10.4f %12.2f\n", std::string(pos_name(pos)).c_str(), b.mean_cosine,
                   b.share_of_total);
    if (m.unknown_pos)
        out << fmt("  (%zu lemmas without POS)\n", m.unknown_pos);
    out << '\n';
    const auto &p = r.polysemy;
    out << fmt("Polysemy (n=%zu)\n", p.n);
    out << fmt("  mean best cosine %.4f\n", p.mean_best_cosine);
    out << fmt("  %8s %8s %18s\n", "sense_id", "count", "mean_best_cosine");
    for (const auto &[id, count] : p.match_histogram)
        out << fmt("  %8d %8zu %18.4f\n", id, count, p.mean_best_cosine_by_sense_id.at(id));
    out << '\n';
    if (r.errors) {
        detail::print_error_stats(*r.errors, out);
        out << '\n';
    }
    out << fmt("skipped: %zu\n", r.skipped);
}

inline int cmd_estimate(const CommandArgs &args, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        using detail::fmt;
        const RunConfig cfg = build_config(args.config_file, args.overrides);
        const auto presets = detail::presets_for(cfg);
        const auto lemmas = load_lemma_list(detail::require(args.lemmas, "--lemmas"));
        const ThroughputRow *row = find_preset(presets, cfg.batch.match_size);
        if (!row)
            throw ConfigError("no throughput preset for match size " +
                              std::to_string(cfg.batch.match_size));

        out << fmt("%10s %10s %16s %10s %12s\n", "match_size", "max_tokens", "processed/30min",
                   "price_eur", "cents/lemma");
        for (const auto &r : presets)
            out << fmt("%10d %10d %16llu %10.2f %12.4f\n", r.match_size, r.max_tokens,
                       static_cast<unsigned long long>(r.processed_per_half_hour),
                       r.price_per_half_hour_eur, estimate_cost(1, r).cents_per_lemma);
        const CostEstimate e = estimate_cost(lemmas.lemmas.size(), *row);
        out << '\n';
        out << fmt("selected: match_size %d, max_tokens %d\n", row->match_size, row->max_tokens);
        out << fmt("lemmas: %llu\n", static_cast<unsigned long long>(e.n_lemmas));
        out << fmt("cents_per_lemma: %.4f\n", e.cents_per_lemma);
        out << fmt("total_eur: %.2f\n", e.total_eur);
        out << fmt("est_wall_hours: %.1f\n", e.est_wall_hours);
        if (lemmas.duplicates)
            err << fmt("warning: %zu duplicate lemmas dropped\n", lemmas.duplicates);
        return static_cast<int>(kOk);
    });
}

inline int cmd_generate(const CommandArgs &args, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        using detail::fmt;
        const RunConfig cfg = build_config(args.config_file, args.overrides);
        const auto lemmas = load_lemma_list(detail::require(args.lemmas, "--lemmas"));
        const std::filesystem::path out_path = detail::require(args.out, "--out");
        auto provider = detail::make_completion_provider(cfg);

        Dictionary existing;
        if (std::filesystem::exists(out_path))
            existing = load_dictionary(out_path);
        else
            io::write_file(out_path, "");

        GenerationOptions opts;
        opts.config = cfg.batch;
        opts.config.max_tokens = cfg.effective_max_tokens(detail::presets_for(cfg));
        opts.template_id = cfg.template_id;
        opts.workers = cfg.workers;

        const GenerationSummary s = generate_dictionary(
            lemmas.lemmas, existing, *provider, opts,
            [&](std::span<const GeneratedDefinition> defs) { append_dictionary(defs, out_path); });

        for (const auto &r : s.retries)
            out << fmt("retry: batch %lld lemma \"%s\" attempt %d %s\n",
                       static_cast<long long>(r.batch_id), r.lemma.c_str(), r.attempt,
                       r.succeeded ? "ok" : "failed");
        for (const auto &l : s.failed_lemmas)
            out << fmt("failed: \"%s\"\n", l.c_str());
        out << fmt("requested: %zu\n", s.requested);
        out << fmt("skipped: %zu\n", s.skipped_existing);
        out << fmt("generated: %zu\n", s.generated);
        out << fmt("retried: %zu\n", s.retried);
        out << fmt("failed: %zu\n", s.failed);
        out << fmt("tokens: %llu prompt, %llu completion\n",
                   static_cast<unsigned long long>(s.tokens_prompt),
                   static_cast<unsigned long long>(s.tokens_completion));
        out << fmt("cost_eur: %.4f\n", s.cost_eur);
        if (lemmas.duplicates)
            err << fmt("warning: %zu duplicate lemmas dropped\n", lemmas.duplicates);
        if (s.terminal_failure) {
            err << "error: provider failure: " << s.terminal_message << '\n';
            err << "partial output kept in " << out_path.string() << "; re-run to resume\n";
            return static_cast<int>(kProviderFailure);
        }
        return static_cast<int>(kOk);
    });
}

inline int cmd_evaluate(const CommandArgs &args, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        const RunConfig cfg = build_config(args.config_file, args.overrides);
        const Dictionary gen = load_dictionary(detail::require(args.dict, "--dict"));
        const ReferenceMap refs = load_reference_dictionary(detail::require(args.refs, "--refs"));
        const std::filesystem::path report_path = detail::require(args.out, "--out");
        const ClassifierConfig classifier = detail::classifier_for(cfg);
        auto embedder = detail::make_embedding_provider(cfg);

        EvaluationOptions eopts;
        eopts.workers = cfg.workers;
        EvaluationResult result = evaluate(gen, refs, *embedder, eopts);

        EvaluationReport report;
        report.monosemy = result.monosemy;
        report.polysemy = result.polysemy;
        report.skipped = result.skipped;
        report.meta.template_id = cfg.template_id;
        report.meta.config = cfg.batch;
        report.meta.config.max_tokens = cfg.effective_max_tokens(detail::presets_for(cfg));
        report.meta.provider_mode = std::string(mode_name(cfg.mode));
        report.meta.seed = cfg.seed;
        std::set<std::string> ids;
        for (const auto &d : gen)
            ids.insert(d.prompt_id);
        report.meta.dictionary_prompt_ids.assign(ids.begin(), ids.end());
        const auto labeled = classify_dictionary(gen, classifier, args.audit_prompts);
        report.errors = summarize(labeled);

        emit_report(report, result.records, report_path, detail::sibling(report_path, ".records.jsonl"));
        emit_figure_data(report.polysemy, detail::sibling(report_path, ".figure.csv"));
        print_report(report, out);
        return static_cast<int>(kOk);
    });
}

inline int cmd_errors(const CommandArgs &args, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        const RunConfig cfg = build_config(args.config_file, args.overrides);
        const Dictionary gen = load_dictionary(detail::require(args.dict, "--dict"));
        const auto labeled = classify_dictionary(gen, detail::classifier_for(cfg), args.audit_prompts);
        const ErrorStats stats = summarize(labeled);

        if (!args.out.empty()) {
            std::string lines;
            for (const auto &[lemma, labels] : labeled) {
                nlohmann::ordered_json j;
                j["lemma"] = lemma.surface();
                auto names = nlohmann::ordered_json::array();
                for (ErrorLabel l : labels)
                    names.push_back(label_name(l));
                j["labels"] = std::move(names);
                lines += j.dump();
                lines += '\n';
            }
            io::write_file(args.out, lines);
        }
        if (!args.report.empty()) {
            EvaluationReport report = load_report(args.report);
            report.errors = stats;
            io::write_file(args.report, format_report(report));
        }
        detail::print_error_stats(stats, out);
        return static_cast<int>(kOk);
    });
}

inline int cmd_report(const CommandArgs &args, std::ostream &out, std::ostream &err) {
    return detail::guarded(err, [&] {
        print_report(load_report(detail::require(args.report, "--report")), out);
        return static_cast<int>(kOk);
    });
}

} // namespace lexigen::cli
