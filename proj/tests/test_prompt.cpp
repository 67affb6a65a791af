#include <gtest/gtest.h>

#include "lexigen/prompt.hpp"
#include "lexigen/providers.hpp"
#include "support.hpp"

using namespace lexigen;

namespace {

Batch make_batch(std::vector<Lemma> lemmas, const PromptTemplate &tpl = templates::literal_batch()) {
    Batch b;
    b.lemmas = std::move(lemmas);
    b.prompt_id = tpl.id;
    b.prompt_text = build_prompt(b.lemmas, tpl);
    return b;
}

std::vector<Lemma> lemmas_of(std::initializer_list<const char *> surfaces) {
    std::vector<Lemma> out;
    for (const char *s : surfaces)
        out.emplace_back(s);
    return out;
}

} // namespace

TEST(Prompt, LiteralSingle) {
    const Lemma casa("casa");
    EXPECT_EQ(build_prompt(std::span(&casa, 1), templates::literal()),
              "Genera en español la definición para la palabra literal \"casa\"");
    EXPECT_EQ(build_prompt(std::span(&casa, 1), templates::original()),
              "Generate in Spanish a definition of the word \"casa\"");
}

TEST(Prompt, BatchedNumbering) {
    const auto ls = lemmas_of({"a", "b", "c"});
    const std::string p = build_prompt(ls, templates::literal_batch());
    const auto p1 = p.find("1. \"a\""), p2 = p.find("2. \"b\""), p3 = p.find("3. \"c\"");
    ASSERT_NE(p1, std::string::npos);
    ASSERT_NE(p2, std::string::npos);
    ASSERT_NE(p3, std::string::npos);
    EXPECT_LT(p1, p2);
    EXPECT_LT(p2, p3);
}

TEST(Prompt, ArityMismatch) {
    const auto ls = lemmas_of({"a", "b"});
    EXPECT_THROW(build_prompt(ls, templates::literal()), std::invalid_argument);
    EXPECT_THROW(build_prompt({}, templates::literal_batch()), std::invalid_argument);
    PromptTemplate bad{"bad", "no placeholder", false, true, ""};
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Prompt, QuoteEscapingRoundTrips) {
    const auto ls = lemmas_of({"di\"jo", "barra\\", "normal"});
    const Batch b = make_batch(ls);
    EXPECT_NE(b.prompt_text.find("1. \"di\\\"jo\""), std::string::npos);
    MockCompletionProvider mock({.seed = 5});
    const auto res = mock.complete({b.prompt_text, 200, 0.5});
    const auto parsed = parse_batch_completion(res.text, b);
    ASSERT_TRUE(std::holds_alternative<std::vector<GeneratedDefinition>>(parsed));
    const auto &defs = std::get<std::vector<GeneratedDefinition>>(parsed);
    for (std::size_t k = 0; k < ls.size(); ++k) {
        EXPECT_EQ(defs[k].lemma, ls[k]);
        EXPECT_EQ(defs[k].text, mock_definition(5, ls[k].surface()));
    }
}

TEST(Templates, LookupAndPromotion) {
    EXPECT_EQ(templates::for_match_size("literal", 1).id, "literal");
    EXPECT_EQ(templates::for_match_size("literal", 5).id, "literal-batch");
    EXPECT_EQ(templates::for_match_size("original", 3).id, "original-batch");
    EXPECT_EQ(templates::single_for(templates::literal_batch()).id, "literal");
    EXPECT_THROW(templates::get("nope"), ConfigError);
    for (const auto *t : templates::all()) {
        EXPECT_NO_THROW(t->validate());
        EXPECT_TRUE(t->quote_lemma);
    }
}

TEST(PlanBatches, CeilingArithmetic) {
    std::mt19937_64 rng(1);
    const auto ls = testkit::random_lemmas(rng, 10);
    auto sizes = [&](int m) {
        BatchConfig cfg;
        cfg.match_size = m;
        std::vector<std::size_t> out;
        for (const auto &b : plan_batches(ls, cfg, templates::for_match_size("literal", m)))
            out.push_back(b.lemmas.size());
        return out;
    };
    EXPECT_EQ(sizes(3), (std::vector<std::size_t>{3, 3, 3, 1}));
    EXPECT_EQ(sizes(1), std::vector<std::size_t>(10, 1));
    EXPECT_EQ(sizes(10), std::vector<std::size_t>{10});
    EXPECT_TRUE(plan_batches(std::span<const Lemma>{}, BatchConfig{}, templates::literal()).empty());
}

TEST(PlanBatches, PartitionProperty) {
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const auto ls = testkit::random_lemmas(rng, rng() % 60);
        BatchConfig cfg;
        cfg.match_size = 1 + static_cast<int>(rng() % 12);
        const auto plan = plan_batches(ls, cfg, templates::for_match_size("literal", cfg.match_size));
        std::vector<Lemma> flat;
        for (std::size_t i = 0; i < plan.size(); ++i) {
            EXPECT_EQ(plan[i].batch_id, static_cast<std::int64_t>(i));
            EXPECT_GE(plan[i].lemmas.size(), 1u);
            EXPECT_LE(plan[i].lemmas.size(), static_cast<std::size_t>(cfg.match_size));
            if (i + 1 < plan.size()) {
                EXPECT_EQ(plan[i].lemmas.size(), static_cast<std::size_t>(cfg.match_size));
            }
            flat.insert(flat.end(), plan[i].lemmas.begin(), plan[i].lemmas.end());
        }
        EXPECT_EQ(flat, ls);
    }
}

TEST(BatchConfig, Validation) {
    BatchConfig c;
    EXPECT_DOUBLE_EQ(c.temperature, 0.5);
    EXPECT_NO_THROW(c.validate());
    c.max_tokens = 15;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.match_size = 0;
    EXPECT_THROW(c.validate(), ConfigError);
    c = {};
    c.temperature = 2.5;
    EXPECT_THROW(c.validate(), ConfigError);
}

TEST(ParseBatch, WellFormed) {
    const Batch b = make_batch(lemmas_of({"casa", "perro"}));
    const auto r = parse_batch_completion("1. \"casa\": vivienda.\n2. \"perro\": animal doméstico.", b);
    ASSERT_TRUE(std::holds_alternative<std::vector<GeneratedDefinition>>(r));
    const auto &defs = std::get<std::vector<GeneratedDefinition>>(r);
    EXPECT_EQ(defs[0].text, "vivienda.");
    EXPECT_EQ(defs[1].text, "animal doméstico.");
    EXPECT_EQ(defs[1].prompt_id, "literal-batch");
}

TEST(ParseBatch, Undercount) {
    const Batch b = make_batch(lemmas_of({"casa", "perro"}));
    const auto r = parse_batch_completion("1. texto", b);
    ASSERT_TRUE(std::holds_alternative<AlignmentError>(r));
    const auto &e = std::get<AlignmentError>(r);
    EXPECT_EQ(e.missing, std::vector<std::size_t>{2});
    EXPECT_EQ(e.recovered[0], "texto");
}

TEST(ParseBatch, OutOfOrderDuplicateAndEmpty) {
    const Batch b = make_batch(lemmas_of({"a", "b", "c"}));
    {
        const auto r = parse_batch_completion("2. dos\n1. uno\n3. tres", b);
        ASSERT_TRUE(std::holds_alternative<AlignmentError>(r));
        EXPECT_EQ(std::get<AlignmentError>(r).missing, (std::vector<std::size_t>{1, 2}));
    }
    {
        const auto r = parse_batch_completion("1. uno\n2. dos\n2. otra\n3. tres", b);
        ASSERT_TRUE(std::holds_alternative<AlignmentError>(r));
        EXPECT_EQ(std::get<AlignmentError>(r).missing, std::vector<std::size_t>{2});
    }
    {
        const auto r = parse_batch_completion("1. uno\n2. \"b\":\n3. tres", b);
        ASSERT_TRUE(std::holds_alternative<AlignmentError>(r));
        EXPECT_EQ(std::get<AlignmentError>(r).missing, std::vector<std::size_t>{2});
    }
}

TEST(ParseBatch, ContinuationLinesJoin) {
    const Batch b = make_batch(lemmas_of({"a", "b"}));
    const auto r = parse_batch_completion("Aquí van:\n1. \"a\": uno\n   sigue\n2. b: dos", b);
    ASSERT_TRUE(std::holds_alternative<std::vector<GeneratedDefinition>>(r));
    const auto &defs = std::get<std::vector<GeneratedDefinition>>(r);
    EXPECT_EQ(defs[0].text, "uno\n   sigue");
    EXPECT_EQ(defs[1].text, "dos");
}

TEST(ParseBatch, MockTenLemmaRoundTrip) {
    std::mt19937_64 rng(4);
    const Batch b = make_batch(testkit::random_lemmas(rng, 10));
    MockCompletionProvider mock({.seed = 9});
    const auto r = parse_batch_completion(mock.complete({b.prompt_text, 2000, 0.5}).text, b);
    ASSERT_TRUE(std::holds_alternative<std::vector<GeneratedDefinition>>(r));
    const auto &defs = std::get<std::vector<GeneratedDefinition>>(r);
    ASSERT_EQ(defs.size(), 10u);
    for (std::size_t k = 0; k < 10; ++k)
        EXPECT_EQ(defs[k].text, mock_definition(9, b.lemmas[k].surface()));
}

TEST(ParseBatch, RenderedRoundTripProperty) {
    std::mt19937_64 rng(6);
    static constexpr const char *words[] = {"uno", "dos", "tres:", "cuatro - cinco", "seis.", "«siete»"};
    for (int trial = 0; trial < 300; ++trial) {
        const Batch b = make_batch(testkit::random_lemmas(rng, 1 + rng() % 12));
        std::vector<std::string> texts;
        for (std::size_t k = 0; k < b.lemmas.size(); ++k) {
            std::string t = words[rng() % std::size(words)];
            for (std::size_t w = rng() % 4; w > 0; --w)
                t += std::string(" ") + words[rng() % std::size(words)];
            texts.push_back(t);
        }
        const auto r = parse_batch_completion(render_numbered_completion(b.lemmas, texts), b);
        ASSERT_TRUE(std::holds_alternative<std::vector<GeneratedDefinition>>(r));
        const auto &defs = std::get<std::vector<GeneratedDefinition>>(r);
        for (std::size_t k = 0; k < texts.size(); ++k) {
            EXPECT_EQ(defs[k].lemma, b.lemmas[k]);
            EXPECT_EQ(defs[k].text, texts[k]);
        }
    }
}

TEST(ParseSingle, StripsEcho) {
    const Lemma casa("casa");
    EXPECT_EQ(parse_single_completion("  Vivienda.  ", casa), "Vivienda.");
    EXPECT_EQ(parse_single_completion("\"casa\": Vivienda.", casa), "Vivienda.");
    EXPECT_EQ(parse_single_completion("casa: Vivienda.", casa), "Vivienda.");
    EXPECT_FALSE(parse_single_completion("   ", casa));
}

TEST(Cost, TableOneRows) {
    const double published[] = {0.15, 0.0662, 0.0651, 0.0545};
    const auto &rows = default_presets();
    ASSERT_EQ(rows.size(), 4u);
    for (std::size_t i = 0; i < 4; ++i)
        EXPECT_NEAR(estimate_cost(rows[i].processed_per_half_hour, rows[i]).cents_per_lemma,
                    published[i], 1e-4)
            << "row " << i;
}

TEST(Cost, Examples) {
    const ThroughputRow r1{1, 100, 400, 0.60}, r10{10, 2000, 1650, 0.90};
    EXPECT_NEAR(estimate_cost(400, r1).cents_per_lemma, 0.15, 1e-12);
    const auto full = estimate_cost(66353, r10);
    EXPECT_NEAR(full.total_eur, 36.19, 0.01);
    EXPECT_NEAR(full.est_wall_hours, 20.1, 0.05);
    EXPECT_THROW(estimate_cost(1, ThroughputRow{1, 100, 0, 1.0}), std::invalid_argument);
}

TEST(Cost, IdentityProperty) {
    std::mt19937_64 rng(8);
    for (int i = 0; i < 1000; ++i) {
        const ThroughputRow row{1, 100, 1 + rng() % 5000, static_cast<double>(rng() % 10000) / 100.0};
        const std::uint64_t n = rng() % 1000000;
        const auto e = estimate_cost(n, row);
        EXPECT_NEAR(e.cents_per_lemma * static_cast<double>(n) / 100.0, e.total_eur, 1e-9);
    }
}

TEST(Presets, ParseCsv) {
    const auto rows = parse_presets(
        "match_size,max_tokens,processed_per_half_hour,price_per_half_hour_eur\n"
        "1,100,400,0.60\n3,500,1179,0.78\n5,1000,1290,0.84\n10,2000,1650,0.90\n");
    EXPECT_EQ(rows, default_presets());
    EXPECT_THROW(parse_presets("bad header\n1,2,3,4\n"), ParseError);
    EXPECT_THROW(parse_presets("match_size,max_tokens,processed_per_half_hour,price_per_half_hour_eur\n1,2,x,4\n"),
                 ParseError);
    EXPECT_THROW(parse_presets("match_size,max_tokens,processed_per_half_hour,price_per_half_hour_eur\n"),
                 ParseError);
}
