#pragma once

// Completion and embedding provider contracts, deterministic mocks, and the
// rate-limit/retry decorators shared by every implementation.

#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iterator>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "lexigen/error.hpp"
#include "lexigen/lexicon.hpp"
#include "lexigen/prompt.hpp"
#include "lexigen/rate_limit.hpp"
#include "lexigen/textmetrics.hpp"
#include "lexigen/unicode.hpp"

namespace lexigen {

struct CompletionRequest {
    std::string prompt;
    int max_tokens = 100;
    double temperature = 0.5;

    void validate() const {
        if (max_tokens <= 0)
            throw std::invalid_argument("max_tokens must be positive");
        if (!(temperature >= 0.0 && temperature <= 2.0))
            throw std::invalid_argument("temperature must be in [0, 2]");
    }
};

struct CompletionResult {
    std::string text;
    std::uint64_t tokens_prompt = 0;
    std::uint64_t tokens_completion = 0;
};

class CompletionProvider {
  public:
    virtual ~CompletionProvider() = default;
    // Returns the provider text verbatim.
    virtual CompletionResult complete(const CompletionRequest &request) = 0;
};

class EmbeddingProvider {
  public:
    virtual ~EmbeddingProvider() = default;
    // One vector per text, same order, constant dimension for the session.
    virtual std::vector<EmbeddingVector> embed(std::span<const std::string> texts) = 0;
};

namespace detail {

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t splitmix64(std::uint64_t &state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Uniform in [-1, 1), identical on every platform.
inline double unit_uniform(std::uint64_t &state) {
    return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
}

inline std::uint64_t whitespace_tokens(std::string_view s) {
    std::uint64_t n = 0;
    bool in_token = false;
    for (char32_t c : unicode::code_points(s)) {
        const bool space = unicode::is_space(c);
        if (!space && !in_token)
            ++n;
        in_token = !space;
    }
    return n;
}

// Reads a backslash-escaped quoted string starting at s[pos] == '"'.
inline std::optional<std::string> read_quoted(std::string_view s, std::size_t pos) {
    if (pos >= s.size() || s[pos] != '"')
        return std::nullopt;
    std::string out;
    for (std::size_t i = pos + 1; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            out += s[++i];
        } else if (s[i] == '"') {
            return out;
        } else {
            out += s[i];
        }
    }
    return std::nullopt;
}

} // namespace detail

// Canned definition for a lemma: a pure function of (seed, lemma).
inline std::string mock_definition(std::uint64_t seed, std::string_view lemma) {
    static constexpr std::string_view heads[] = {
        "Acción de",  "Cualidad de",   "Objeto que sirve para", "Persona que se dedica a",
        "Lugar donde", "Conjunto de", "Efecto de",             "Que tiene relación con"};
    static constexpr std::string_view words[] = {
        "cuidar",    "la",       "tierra",   "con",      "paciencia", "un",       "grupo",
        "de",        "personas", "formar",   "algo",     "nuevo",     "agua",     "luz",
        "camino",    "casa",     "trabajo",  "pequeño",  "grande",    "antiguo",  "moverse",
        "rápido",    "el",       "tiempo",   "medida",   "forma",     "usar",     "objetos",
        "animal",    "planta",   "sonido",   "color",    "fuerte",    "suave",    "mar",
        "ciudad",    "comer",    "dormir",   "hablar",   "escribir",  "uso",      "común"};
    std::uint64_t state = seed ^ detail::fnv1a(lemma);
    std::string out(heads[detail::splitmix64(state) % std::size(heads)]);
    const std::size_t n = 3 + detail::splitmix64(state) % 5;
    for (std::size_t i = 0; i < n; ++i) {
        out += ' ';
        out += words[detail::splitmix64(state) % std::size(words)];
    }
    out += '.';
    return out;
}

struct MockCompletionOptions {
    std::uint64_t seed = 0;
    // Omitted from batched answers (single-lemma prompts still answer).
    std::set<std::string> misaligned_lemmas{};
    // Any prompt mentioning one of these fails terminally.
    std::set<std::string> failing_lemmas{};
    // The first N calls fail with a transient error.
    std::uint32_t transient_failures = 0;
};

// Answers single prompts with mock_definition() and numbered prompts with the
// numbered answer format.
class MockCompletionProvider final : public CompletionProvider {
  public:
    explicit MockCompletionProvider(MockCompletionOptions options) : opts_(std::move(options)) {}

    CompletionResult complete(const CompletionRequest &request) override {
        request.validate();
        const auto call = calls_.fetch_add(1);
        if (call < opts_.transient_failures)
            throw TransientError("mock transient failure");

        std::vector<std::string> lemmas;
        bool batched = false;
        for (std::string_view line : io::split_lines(request.prompt)) {
            auto m = detail::match_marker(line);
            if (!m)
                continue;
            std::string_view rest = m->second;
            const auto q = rest.find('"');
            if (auto lemma = detail::read_quoted(rest, q == std::string_view::npos ? rest.size() : q)) {
                lemmas.push_back(*lemma);
                batched = true;
            }
        }
        if (!batched) {
            const auto q = request.prompt.find('"');
            if (auto lemma = detail::read_quoted(request.prompt, q == std::string::npos ? request.prompt.size() : q))
                lemmas.push_back(*lemma);
            else {
                const auto sp = request.prompt.find_last_of(' ');
                lemmas.push_back(request.prompt.substr(sp == std::string::npos ? 0 : sp + 1));
            }
        }
        for (const auto &l : lemmas)
            if (opts_.failing_lemmas.count(unicode::nfc(l)))
                throw ProviderError("mock terminal failure for '" + l + "'");

        std::string text;
        if (batched) {
            for (std::size_t k = 0; k < lemmas.size(); ++k) {
                if (opts_.misaligned_lemmas.count(unicode::nfc(lemmas[k])))
                    continue;
                if (!text.empty())
                    text += '\n';
                text += std::to_string(k + 1) + ". " + quote_lemma(lemmas[k]) + ": " +
                        mock_definition(opts_.seed, unicode::nfc(lemmas[k]));
            }
        } else {
            text = mock_definition(opts_.seed, unicode::nfc(lemmas.front()));
        }
        return CompletionResult{text, detail::whitespace_tokens(request.prompt),
                                detail::whitespace_tokens(text)};
    }

    std::uint64_t calls() const noexcept { return calls_.load(); }

  private:
    MockCompletionOptions opts_;
    std::atomic<std::uint64_t> calls_{0};
};

// Unit vectors from a seeded hash of the token multiset: texts sharing tokens get
// higher cosine, identical token multisets get identical vectors.
class MockEmbeddingProvider final : public EmbeddingProvider {
  public:
    static constexpr std::size_t kDefaultDim = 256;

    explicit MockEmbeddingProvider(std::uint64_t seed, std::size_t dim = kDefaultDim)
        : seed_(seed), dim_(dim) {
        if (dim == 0)
            throw std::invalid_argument("embedding dimension must be positive");
    }

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        if (texts.empty())
            throw std::invalid_argument("embed of an empty list");
        calls_.fetch_add(1);
        texts_.fetch_add(texts.size());
        std::vector<EmbeddingVector> out;
        out.reserve(texts.size());
        for (const auto &t : texts) {
            if (unicode::trim(t).empty())
                throw std::invalid_argument("embed of an empty text");
            out.push_back(vector_for(t));
        }
        return out;
    }

    std::size_t dim() const noexcept { return dim_; }
    std::uint64_t calls() const noexcept { return calls_.load(); }
    std::uint64_t texts_embedded() const noexcept { return texts_.load(); }

  private:
    EmbeddingVector vector_for(const std::string &text) const {
        TokenSequence toks = tokenize(text);
        if (toks.empty())
            toks.push_back(unicode::nfc_lower(text));
        EmbeddingVector v(dim_, 0.0);
        for (const auto &tok : toks) {
            std::uint64_t state = seed_ ^ detail::fnv1a(tok);
            for (auto &x : v)
                x += detail::unit_uniform(state);
        }
        double norm = 0.0;
        for (double x : v)
            norm += x * x;
        norm = std::sqrt(norm);
        for (auto &x : v)
            x /= norm;
        return v;
    }

    std::uint64_t seed_;
    std::size_t dim_;
    std::atomic<std::uint64_t> calls_{0};
    std::atomic<std::uint64_t> texts_{0};
};

// Rate limit + retry around any completion provider.
class ResilientCompletionProvider final : public CompletionProvider {
  public:
    ResilientCompletionProvider(std::shared_ptr<CompletionProvider> inner, RetryPolicy policy,
                                std::shared_ptr<RateLimiter> limiter,
                                std::shared_ptr<Clock> clock = SystemClock::shared())
        : call_(with_rate_limit_and_retry(
              [inner = std::move(inner)](const CompletionRequest &r) { return inner->complete(r); },
              policy, std::move(limiter), std::move(clock))) {}

    CompletionResult complete(const CompletionRequest &request) override { return call_(request); }

  private:
    std::function<CompletionResult(const CompletionRequest &)> call_;
};

class ResilientEmbeddingProvider final : public EmbeddingProvider {
  public:
    ResilientEmbeddingProvider(std::shared_ptr<EmbeddingProvider> inner, RetryPolicy policy,
                               std::shared_ptr<RateLimiter> limiter,
                               std::shared_ptr<Clock> clock = SystemClock::shared())
        : call_(with_rate_limit_and_retry(
              [inner = std::move(inner)](std::span<const std::string> t) { return inner->embed(t); },
              policy, std::move(limiter), std::move(clock))) {}

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        return call_(texts);
    }

  private:
    std::function<std::vector<EmbeddingVector>(std::span<const std::string>)> call_;
};

} // namespace lexigen
