#pragma once

// Similarity and length metrics over definition texts. All functions are pure.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "lexigen/unicode.hpp"

namespace lexigen {

// Lowercased, punctuation-stripped word tokens. Build with tokenize().
using TokenSequence = std::vector<std::string>;

using EmbeddingVector = std::vector<double>;

struct MetricScores {
    double bleu_cumulative = 0.0;
    double bleu_1gram = 0.0;
    double levenshtein = 0.0;
    double jaccard = 0.0;
    double cosine = 0.0;

    friend bool operator==(const MetricScores &, const MetricScores &) = default;
};

struct LengthStats {
    double mean_words = 0.0;
    double sd_words = 0.0;
    double mean_chars = 0.0;
    double sd_chars = 0.0;

    friend bool operator==(const LengthStats &, const LengthStats &) = default;
};

// NFC, lowercase, split on Unicode whitespace, strip punctuation at both ends of
// each token, drop tokens left empty. Diacritics are kept.
inline TokenSequence tokenize(std::string_view text) {
    const std::u32string cps = unicode::code_points(unicode::nfc_lower(text));
    TokenSequence tokens;
    std::size_t i = 0;
    while (i < cps.size()) {
        while (i < cps.size() && unicode::is_space(cps[i]))
            ++i;
        std::size_t b = i;
        while (i < cps.size() && !unicode::is_space(cps[i]))
            ++i;
        std::size_t e = i;
        while (b < e && unicode::is_punct(cps[b]))
            ++b;
        while (e > b && unicode::is_punct(cps[e - 1]))
            --e;
        if (b == e)
            continue;
        std::string tok;
        for (std::size_t k = b; k < e; ++k)
            unicode::append_utf8(tok, cps[k]);
        tokens.push_back(std::move(tok));
    }
    return tokens;
}

// Sufficient statistics for corpus BLEU. Accumulate per pair, merge partial sums
// with +=, then read the score.
class BleuStats {
  public:
    static constexpr int kMaxOrder = 8;

    explicit BleuStats(int max_n = 4) : max_n_(max_n) {
        if (max_n < 1 || max_n > kMaxOrder)
            throw std::invalid_argument("BLEU order must be in [1, 8]");
    }

    void add(const TokenSequence &candidate, const TokenSequence &reference) {
        candidate_length_ += candidate.size();
        reference_length_ += reference.size();
        for (int n = 1; n <= max_n_; ++n) {
            const auto cand = count_ngrams(candidate, n);
            const auto ref = count_ngrams(reference, n);
            std::uint64_t matched = 0;
            for (const auto &[gram, count] : cand) {
                auto it = ref.find(gram);
                if (it != ref.end())
                    matched += std::min(count, it->second);
            }
            matched_[n - 1] += matched;
            if (candidate.size() >= static_cast<std::size_t>(n))
                total_[n - 1] += candidate.size() - n + 1;
        }
    }

    BleuStats &operator+=(const BleuStats &other) {
        if (other.max_n_ != max_n_)
            throw std::invalid_argument("cannot merge BLEU statistics of different order");
        candidate_length_ += other.candidate_length_;
        reference_length_ += other.reference_length_;
        for (int n = 0; n < max_n_; ++n) {
            matched_[n] += other.matched_[n];
            total_[n] += other.total_[n];
        }
        return *this;
    }

    double brevity_penalty() const {
        if (candidate_length_ == 0)
            return 0.0;
        if (candidate_length_ >= reference_length_)
            return 1.0;
        return std::exp(1.0 - static_cast<double>(reference_length_) /
                                  static_cast<double>(candidate_length_));
    }

    // Unsmoothed: any zero precision with positive weight gives 0.
    double score(std::span<const double> weights) const {
        if (weights.size() != static_cast<std::size_t>(max_n_))
            throw std::invalid_argument("BLEU needs one weight per n-gram order");
        const double wsum = std::accumulate(weights.begin(), weights.end(), 0.0);
        if (std::abs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("BLEU weights must sum to 1");
        if (candidate_length_ == 0)
            return 0.0;
        double log_sum = 0.0;
        for (int n = 0; n < max_n_; ++n) {
            if (weights[n] == 0.0)
                continue;
            if (matched_[n] == 0 || total_[n] == 0)
                return 0.0;
            log_sum += weights[n] * std::log(static_cast<double>(matched_[n]) /
                                             static_cast<double>(total_[n]));
        }
        return brevity_penalty() * std::exp(log_sum);
    }

    int max_n() const noexcept { return max_n_; }
    std::uint64_t candidate_length() const noexcept { return candidate_length_; }
    std::uint64_t reference_length() const noexcept { return reference_length_; }
    std::uint64_t matched(int n) const { return matched_.at(n - 1); }
    std::uint64_t total(int n) const { return total_.at(n - 1); }

  private:
    static std::unordered_map<std::string, std::uint64_t> count_ngrams(const TokenSequence &toks,
                                                                       int n) {
        std::unordered_map<std::string, std::uint64_t> counts;
        if (toks.size() < static_cast<std::size_t>(n))
            return counts;
        for (std::size_t i = 0; i + n <= toks.size(); ++i) {
            std::string key = toks[i];
            for (int k = 1; k < n; ++k) {
                key += '\x1f';
                key += toks[i + k];
            }
            ++counts[key];
        }
        return counts;
    }

    int max_n_;
    std::uint64_t candidate_length_ = 0;
    std::uint64_t reference_length_ = 0;
    std::array<std::uint64_t, kMaxOrder> matched_{};
    std::array<std::uint64_t, kMaxOrder> total_{};
};

using TokenPair = std::pair<TokenSequence, TokenSequence>; // (candidate, reference)

// Corpus-level BLEU: clipped counts and lengths are summed over all pairs before the
// precisions and brevity penalty are taken.
inline double bleu_corpus(std::span<const TokenPair> pairs, int max_n,
                          std::span<const double> weights) {
    if (pairs.empty())
        throw std::invalid_argument("BLEU over an empty corpus");
    BleuStats stats(max_n);
    for (const auto &[cand, ref] : pairs)
        stats.add(cand, ref);
    return stats.score(weights);
}

inline constexpr std::array<double, 4> kBleuUniform4 = {0.25, 0.25, 0.25, 0.25};
inline constexpr std::array<double, 1> kBleuUnigram = {1.0};

inline double bleu_cumulative(std::span<const TokenPair> pairs) {
    return bleu_corpus(pairs, 4, kBleuUniform4);
}

inline double bleu_1gram(std::span<const TokenPair> pairs) {
    return bleu_corpus(pairs, 1, kBleuUnigram);
}

// Unit-cost edit distance over the Unicode scalars of the NFC forms. Case-sensitive.
inline std::size_t levenshtein(std::string_view a, std::string_view b) {
    std::u32string s = unicode::code_points(unicode::nfc(a));
    std::u32string t = unicode::code_points(unicode::nfc(b));
    if (s.size() < t.size())
        std::swap(s, t);
    std::vector<std::size_t> prev(t.size() + 1), cur(t.size() + 1);
    std::iota(prev.begin(), prev.end(), std::size_t{0});
    for (std::size_t i = 1; i <= s.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= t.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (s[i - 1] == t[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[t.size()];
}

// Set Jaccard; two empty sequences count as identical.
inline double jaccard(const TokenSequence &a, const TokenSequence &b) {
    const std::unordered_set<std::string> sa(a.begin(), a.end());
    const std::unordered_set<std::string> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty())
        return 1.0;
    std::size_t inter = 0;
    for (const auto &t : sa)
        inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return static_cast<double>(inter) / static_cast<double>(uni);
}

inline double cosine(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size())
        throw std::invalid_argument("cosine of vectors with different dimensions");
    double dot = 0.0, nu = 0.0, nv = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += u[i] * v[i];
        nu += u[i] * u[i];
        nv += v[i] * v[i];
    }
    if (nu == 0.0 || nv == 0.0)
        throw std::invalid_argument("cosine of a zero-norm vector");
    return std::clamp(dot / (std::sqrt(nu) * std::sqrt(nv)), -1.0, 1.0);
}

namespace detail {

inline std::pair<double, double> mean_and_population_sd(std::span<const double> xs) {
    const double n = static_cast<double>(xs.size());
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / n)};
}

} // namespace detail

// Words are tokenize() tokens; characters are Unicode scalars of the raw text.
inline LengthStats length_stats(std::span<const std::string> texts) {
    if (texts.empty())
        throw std::invalid_argument("length statistics of an empty list");
    std::vector<double> words, chars;
    words.reserve(texts.size());
    chars.reserve(texts.size());
    for (const auto &t : texts) {
        words.push_back(static_cast<double>(tokenize(t).size()));
        chars.push_back(static_cast<double>(unicode::count_code_points(t)));
    }
    LengthStats s;
    std::tie(s.mean_words, s.sd_words) = detail::mean_and_population_sd(words);
    std::tie(s.mean_chars, s.sd_chars) = detail::mean_and_population_sd(chars);
    return s;
}

} // namespace lexigen
