#pragma once

// Batched dictionary generation over a bounded worker pool.
//
// Batches are submitted concurrently but committed to the sink strictly in batch_id
// order. Slots a batched answer failed to align are retried as single-lemma prompts
// (at most `max_single_retries` times each) before the lemma is recorded as failed.
// A terminal provider error stops new submissions; batches already answered are
// still committed so a re-run only has to fill the gap.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_set>
#include <variant>
#include <vector>

#include "lexigen/error.hpp"
#include "lexigen/lexicon.hpp"
#include "lexigen/parallel.hpp"
#include "lexigen/prompt.hpp"
#include "lexigen/providers.hpp"

namespace lexigen {

struct GenerationOptions {
    BatchConfig config;
    std::string template_id = "literal";
    std::size_t workers = 4;
    int max_single_retries = 2;
};

struct RetryEvent {
    std::int64_t batch_id = 0;
    std::string lemma;
    int attempt = 0; // 1-based
    bool succeeded = false;
};

struct GenerationSummary {
    std::size_t requested = 0;
    std::size_t skipped_existing = 0;
    std::size_t generated = 0;
    std::size_t retried = 0; // single-lemma retry prompts issued
    std::size_t failed = 0;
    std::vector<std::string> failed_lemmas;
    std::vector<RetryEvent> retries;
    std::uint64_t tokens_prompt = 0;
    std::uint64_t tokens_completion = 0;
    double cost_eur = 0.0;
    bool terminal_failure = false;
    std::string terminal_message;
};

using DefinitionSink = std::function<void(std::span<const GeneratedDefinition>)>;

namespace detail {

struct BatchOutcome {
    std::vector<GeneratedDefinition> definitions;
    std::vector<std::string> failed;
    std::vector<RetryEvent> retries;
    std::uint64_t tokens_prompt = 0;
    std::uint64_t tokens_completion = 0;
};

inline std::uint64_t share(std::uint64_t total, std::size_t parts, std::size_t k) {
    return total / parts + (k < total % parts ? 1 : 0);
}

inline double token_cost(std::uint64_t tokens, const BatchConfig &cfg) {
    return static_cast<double>(tokens) * cfg.price_per_1k_tokens_eur / 1000.0;
}

inline BatchOutcome run_batch(const Batch &batch, const PromptTemplate &tpl,
                              CompletionProvider &provider, const GenerationOptions &opts) {
    const BatchConfig &cfg = opts.config;
    BatchOutcome out;
    const std::size_t n = batch.lemmas.size();

    const CompletionResult res =
        provider.complete(CompletionRequest{batch.prompt_text, cfg.max_tokens, cfg.temperature});
    out.tokens_prompt += res.tokens_prompt;
    out.tokens_completion += res.tokens_completion;

    std::vector<std::optional<std::string>> texts(n);
    if (tpl.batched) {
        BatchParse parsed = parse_batch_completion(res.text, batch);
        if (auto *defs = std::get_if<std::vector<GeneratedDefinition>>(&parsed)) {
            for (std::size_t k = 0; k < n; ++k)
                texts[k] = std::move((*defs)[k].text);
        } else {
            texts = std::move(std::get<AlignmentError>(parsed).recovered);
        }
    } else {
        texts[0] = parse_single_completion(res.text, batch.lemmas[0]);
    }

    // The batch call is billed to the lemmas it answered.
    std::size_t answered = 0;
    for (const auto &t : texts)
        answered += t.has_value();
    std::size_t slot = 0;
    std::vector<GeneratedDefinition> defs(n, GeneratedDefinition{.lemma = batch.lemmas[0]});
    for (std::size_t k = 0; k < n; ++k) {
        if (!texts[k])
            continue;
        GeneratedDefinition &d = defs[k];
        d = GeneratedDefinition{.lemma = batch.lemmas[k],
                                .text = std::move(*texts[k]),
                                .prompt_id = batch.prompt_id,
                                .batch_id = batch.batch_id};
        d.tokens_prompt = share(res.tokens_prompt, answered, slot);
        d.tokens_completion = share(res.tokens_completion, answered, slot);
        d.cost_eur = token_cost(d.tokens_prompt + d.tokens_completion, cfg);
        ++slot;
    }

    const PromptTemplate &single = templates::single_for(tpl);
    for (std::size_t k = 0; k < n; ++k) {
        if (!defs[k].text.empty())
            continue;
        const Lemma &lemma = batch.lemmas[k];
        const std::string prompt = build_prompt(std::span(&lemma, 1), single);
        bool ok = false;
        for (int attempt = 1; attempt <= opts.max_single_retries && !ok; ++attempt) {
            const CompletionResult r =
                provider.complete(CompletionRequest{prompt, cfg.max_tokens, cfg.temperature});
            out.tokens_prompt += r.tokens_prompt;
            out.tokens_completion += r.tokens_completion;
            auto text = parse_single_completion(r.text, lemma);
            ok = text.has_value();
            out.retries.push_back(RetryEvent{batch.batch_id, lemma.surface(), attempt, ok});
            if (ok) {
                GeneratedDefinition d{.lemma = lemma,
                                      .text = std::move(*text),
                                      .prompt_id = single.id,
                                      .batch_id = batch.batch_id,
                                      .tokens_prompt = r.tokens_prompt,
                                      .tokens_completion = r.tokens_completion};
                d.cost_eur = token_cost(r.tokens_prompt + r.tokens_completion, cfg);
                defs[k] = std::move(d);
            }
        }
        if (!ok)
            out.failed.push_back(lemma.surface());
    }

    for (auto &d : defs)
        if (!d.text.empty())
            out.definitions.push_back(std::move(d));
    return out;
}

} // namespace detail

inline GenerationSummary generate_dictionary(const LemmaList &lemmas,
                                             std::span<const GeneratedDefinition> existing,
                                             CompletionProvider &provider,
                                             const GenerationOptions &opts, const DefinitionSink &sink) {
    opts.config.validate();
    const PromptTemplate &tpl = templates::for_match_size(opts.template_id, opts.config.match_size);

    GenerationSummary summary;
    summary.requested = lemmas.size();

    std::unordered_set<std::string> done;
    std::int64_t next_batch_id = 0;
    for (const auto &d : existing) {
        done.insert(d.lemma.surface());
        next_batch_id = std::max(next_batch_id, d.batch_id + 1);
    }
    std::vector<Lemma> todo;
    for (const Lemma &l : lemmas) {
        if (done.count(l.surface()))
            ++summary.skipped_existing;
        else
            todo.push_back(l);
    }

    std::vector<Batch> plan = plan_batches(todo, opts.config, tpl);
    for (auto &b : plan)
        b.batch_id += next_batch_id;

    std::vector<std::optional<detail::BatchOutcome>> outcomes(plan.size());
    std::size_t next_commit = 0;
    std::mutex mu;
    std::atomic<bool> stop{false};

    auto commit_ready = [&] { // holds mu
        while (next_commit < plan.size() && outcomes[next_commit]) {
            sink(outcomes[next_commit]->definitions);
            ++next_commit;
        }
    };

    parallel_for(plan.size(), opts.workers, [&](std::size_t i) {
        if (stop.load())
            return;
        try {
            detail::BatchOutcome outcome = detail::run_batch(plan[i], tpl, provider, opts);
            std::lock_guard lock(mu);
            outcomes[i] = std::move(outcome);
            commit_ready();
        } catch (const ProviderError &e) {
            std::lock_guard lock(mu);
            if (!summary.terminal_failure) {
                summary.terminal_failure = true;
                summary.terminal_message = e.what();
            }
            stop.store(true);
        }
    });

    // After a terminal failure, answered batches past the gap are still kept.
    for (std::size_t i = next_commit; i < plan.size(); ++i)
        if (outcomes[i])
            sink(outcomes[i]->definitions);

    for (const auto &o : outcomes) {
        if (!o)
            continue;
        summary.generated += o->definitions.size();
        summary.failed += o->failed.size();
        summary.failed_lemmas.insert(summary.failed_lemmas.end(), o->failed.begin(), o->failed.end());
        summary.retries.insert(summary.retries.end(), o->retries.begin(), o->retries.end());
        summary.retried += o->retries.size();
        summary.tokens_prompt += o->tokens_prompt;
        summary.tokens_completion += o->tokens_completion;
    }
    summary.cost_eur =
        detail::token_cost(summary.tokens_prompt + summary.tokens_completion, opts.config);
    return summary;
}

} // namespace lexigen
