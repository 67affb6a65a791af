#pragma once

// Independent reference implementations, random generators and fakes shared by the
// unit tests and the acceptance binary.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "lexigen/lexicon.hpp"
#include "lexigen/providers.hpp"
#include "lexigen/textmetrics.hpp"
#include "lexigen/unicode.hpp"

namespace lexigen::testkit {

// ---- oracles --------------------------------------------------------------

// Full (|a|+1) x (|b|+1) table, no row swapping.
inline std::size_t levenshtein_matrix(const std::u32string &a, const std::u32string &b) {
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i)
        d[i][0] = i;
    for (std::size_t j = 0; j <= b.size(); ++j)
        d[0][j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i)
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t best = d[i - 1][j - 1] + (a[i - 1] != b[j - 1]);
            best = std::min(best, d[i - 1][j] + 1);
            best = std::min(best, d[i][j - 1] + 1);
            d[i][j] = best;
        }
    return d[a.size()][b.size()];
}

// Corpus BLEU by brute force: n-grams as token vectors, clipping by linear scan,
// geometric mean as a product of powers.
inline double bleu_naive(const std::vector<std::pair<TokenSequence, TokenSequence>> &pairs, int max_n,
                         const std::vector<double> &weights) {
    std::vector<double> matched(max_n, 0.0), total(max_n, 0.0);
    double c = 0, r = 0;
    for (const auto &[cand, ref] : pairs) {
        c += static_cast<double>(cand.size());
        r += static_cast<double>(ref.size());
        for (int n = 1; n <= max_n; ++n) {
            auto grams = [n](const TokenSequence &t) {
                std::vector<TokenSequence> out;
                for (std::size_t i = 0; i + n <= t.size(); ++i)
                    out.emplace_back(t.begin() + i, t.begin() + i + n);
                return out;
            };
            const auto cg = grams(cand);
            const auto rg = grams(ref);
            std::vector<TokenSequence> seen;
            for (const auto &g : cg) {
                if (std::find(seen.begin(), seen.end(), g) != seen.end())
                    continue;
                seen.push_back(g);
                const auto in_c = std::count(cg.begin(), cg.end(), g);
                const auto in_r = std::count(rg.begin(), rg.end(), g);
                matched[n - 1] += static_cast<double>(std::min(in_c, in_r));
            }
            total[n - 1] += static_cast<double>(cg.size());
        }
    }
    if (c == 0)
        return 0.0;
    double geo = 1.0;
    for (int n = 0; n < max_n; ++n) {
        if (weights[n] == 0)
            continue;
        if (total[n] == 0)
            return 0.0;
        geo *= std::pow(matched[n] / total[n], weights[n]);
    }
    const double bp = c >= r ? 1.0 : std::exp(1.0 - r / c);
    return bp * geo;
}

inline double jaccard_sets(const TokenSequence &a, const TokenSequence &b) {
    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    if (sa.empty() && sb.empty())
        return 1.0;
    std::vector<std::string> inter, uni;
    std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
    std::set_union(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(uni));
    return static_cast<double>(inter.size()) / static_cast<double>(uni.size());
}

// ---- fixtures -------------------------------------------------------------

// 20 (candidate, reference) definition pairs. Reference values computed offline with
// exact rational precisions.
inline const std::vector<std::pair<std::string, std::string>> &bleu_fixture() {
    static const std::vector<std::pair<std::string, std::string>> pairs = {
        {"mueble con un tablero horizontal y patas", "mueble formado por un tablero horizontal sostenido por patas"},
        {"abertura en la pared para dar luz", "abertura en una pared para dar luz y ventilación"},
        {"planta de tronco leñoso y alto", "planta de tronco leñoso que se ramifica a cierta altura"},
        {"corriente de agua que va al mar", "corriente natural de agua que fluye hacia el mar"},
        {"conjunto de hojas impresas", "conjunto de hojas impresas y encuadernadas que forman un volumen"},
        {"utensilio para comer sopa", "utensilio con un mango y una parte cóncava"},
        {"aparato que da luz", "aparato que sirve para dar luz artificial"},
        {"gran elevación natural del terreno", "gran elevación natural del terreno"},
        {"ave pequeña que vuela", "ave de tamaño pequeño capaz de volar"},
        {"construcción para cruzar un río", "construcción que permite cruzar un río o un desnivel"},
        {"instrumento que sirve para medir el tiempo", "instrumento que sirve para medir y señalar el tiempo"},
        {"calzado que cubre el pie", "calzado que cubre el pie y tiene la suela dura"},
        {"masa de vapor de agua de la nube", "masa de vapor de agua suspendida en la atmósfera"},
        {"polvo de trigo molido", "polvo que resulta de moler el trigo u otros granos"},
        {"objeto de metal para abrir puertas", "instrumento de metal que sirve para abrir o cerrar una cerradura"},
        {"serie de peldaños para subir", "serie de peldaños que sirve para subir o bajar"},
        {"herramienta para cortar papel", "instrumento de dos hojas cruzadas que sirve para cortar"},
        {"instrumento musical de seis cuerdas", "instrumento musical de cuerda con una caja de resonancia"},
        {"del color de la hierba", "del color de la hierba fresca"},
        {"que que se mueve muy muy deprisa", "que se mueve o sucede con gran velocidad"},
    };
    return pairs;
}

inline constexpr double kBleuFixtureCumulative = 0.25106971492542907;
inline constexpr double kBleuFixtureUnigram = 0.4131045002202278;

inline std::vector<TokenPair> tokenized(const std::vector<std::pair<std::string, std::string>> &raw) {
    std::vector<TokenPair> out;
    for (const auto &[c, r] : raw)
        out.emplace_back(tokenize(c), tokenize(r));
    return out;
}

// ---- generators -----------------------------------------------------------

// Scalars whose NFC form is themselves and which never compose with a neighbour.
inline char32_t random_scalar(std::mt19937_64 &rng) {
    static constexpr std::pair<char32_t, char32_t> ranges[] = {
        {U'a', U'z'}, {0xE0, 0xFF}, {0x3B1, 0x3C9}, {0x430, 0x44F}, {0x4E00, 0x4E40}, {0x1F600, 0x1F64F}};
    const auto &[lo, hi] = ranges[rng() % std::size(ranges)];
    return lo + static_cast<char32_t>(rng() % (hi - lo + 1));
}

// Small alphabets make shared substrings (and small distances) likely.
inline std::u32string random_u32(std::mt19937_64 &rng, std::size_t max_len, std::size_t alphabet = 0) {
    std::vector<char32_t> pool;
    if (alphabet)
        for (std::size_t i = 0; i < alphabet; ++i)
            pool.push_back(random_scalar(rng));
    const std::size_t len = rng() % (max_len + 1);
    std::u32string s;
    for (std::size_t i = 0; i < len; ++i)
        s.push_back(alphabet ? pool[rng() % pool.size()] : random_scalar(rng));
    return s;
}

inline std::string utf8(const std::u32string &s) {
    std::string out;
    for (char32_t c : s)
        unicode::append_utf8(out, c);
    return out;
}

inline TokenSequence random_tokens(std::mt19937_64 &rng, std::size_t max_len, std::size_t vocab) {
    TokenSequence out(rng() % (max_len + 1));
    for (auto &t : out)
        t = "w" + std::to_string(rng() % vocab);
    return out;
}

inline std::vector<double> random_vector(std::mt19937_64 &rng, std::size_t dim) {
    std::normal_distribution<double> g;
    std::vector<double> v(dim);
    do {
        for (auto &x : v)
            x = g(rng);
    } while (std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
    return v;
}

// n distinct lemmas "l0001", ... with a few accented ones mixed in.
inline std::vector<Lemma> random_lemmas(std::mt19937_64 &rng, std::size_t n) {
    std::vector<Lemma> out;
    std::set<std::string> seen;
    static constexpr const char *stems[] = {"casa", "árbol", "niño", "canción", "pingüino", "río", "sol"};
    while (out.size() < n) {
        std::string s = std::string(stems[rng() % std::size(stems)]) + std::to_string(rng() % 100000);
        if (seen.insert(s).second)
            out.emplace_back(s);
    }
    return out;
}

// ---- fakes ----------------------------------------------------------------

// Returns pre-assigned vectors for known texts, optionally scaled per text.
class PlantedEmbeddingProvider final : public EmbeddingProvider {
  public:
    explicit PlantedEmbeddingProvider(std::map<std::string, EmbeddingVector> table)
        : table_(std::move(table)) {}

    void set_scale(std::map<std::string, double> scale) { scale_ = std::move(scale); }

    std::vector<EmbeddingVector> embed(std::span<const std::string> texts) override {
        calls_.fetch_add(1);
        std::vector<EmbeddingVector> out;
        for (const auto &t : texts) {
            EmbeddingVector v = table_.at(t);
            if (auto it = scale_.find(t); it != scale_.end())
                for (auto &x : v)
                    x *= it->second;
            out.push_back(std::move(v));
        }
        return out;
    }

    std::uint64_t calls() const noexcept { return calls_.load(); }

  private:
    std::map<std::string, EmbeddingVector> table_;
    std::map<std::string, double> scale_;
    std::atomic<std::uint64_t> calls_{0};
};

// A polysemy fixture whose argmax answers are known in advance. Lemma i has
// 2 + i % 4 senses; sense s is the basis vector e_s. The generated definition is
// e_p + 0.5 e_q with q != p, so its best sense is p with cosine 2/sqrt(5).
struct PlantedPolysemy {
    Dictionary dictionary;
    ReferenceMap references;
    std::map<std::string, EmbeddingVector> vectors;
    std::map<std::string, int> planted; // lemma -> 1-based sense id
    std::map<int, std::size_t> histogram;
};

inline PlantedPolysemy planted_polysemy(std::size_t n_lemmas, std::uint64_t seed) {
    constexpr std::size_t kDim = 6;
    std::mt19937_64 rng(seed);
    PlantedPolysemy f;
    for (std::size_t i = 0; i < n_lemmas; ++i) {
        const std::string surface = "lema" + std::to_string(i);
        const std::size_t n_senses = 2 + i % 4;
        const std::size_t p = rng() % n_senses;
        std::size_t q = rng() % (n_senses - 1);
        if (q >= p)
            ++q;
        std::vector<std::string> senses;
        for (std::size_t s = 0; s < n_senses; ++s) {
            senses.push_back("sentido " + std::to_string(s + 1) + " de " + surface);
            EmbeddingVector e(kDim, 0.0);
            e[s] = 1.0;
            f.vectors[senses.back()] = e;
        }
        const std::string gen = "definición generada de " + surface;
        EmbeddingVector g(kDim, 0.0);
        g[p] = 1.0;
        g[q] = 0.5;
        f.vectors[gen] = g;
        Lemma lemma(surface, PosTag::Noun);
        f.references.emplace(surface, ReferenceEntry(lemma, senses));
        f.dictionary.push_back(GeneratedDefinition{.lemma = lemma, .text = gen, .prompt_id = "literal"});
        f.planted[surface] = static_cast<int>(p + 1);
        ++f.histogram[static_cast<int>(p + 1)];
    }
    return f;
}

// ---- temp dirs --------------------------------------------------------------

class TempDir {
  public:
    TempDir() {
        static std::atomic<unsigned> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("lexigen-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir &) = delete;
    TempDir &operator=(const TempDir &) = delete;

    const std::filesystem::path &path() const noexcept { return path_; }
    std::filesystem::path operator/(const std::string &name) const { return path_ / name; }

  private:
    std::filesystem::path path_;
};

} // namespace lexigen::testkit
