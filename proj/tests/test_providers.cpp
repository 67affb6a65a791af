#include <gtest/gtest.h>

#include <thread>

#include "lexigen/providers.hpp"
#include "lexigen/rate_limit.hpp"
#include "support.hpp"

using namespace lexigen;
using namespace std::chrono_literals;

TEST(MockCompletion, SingleIsDeterministic) {
    MockCompletionProvider a({.seed = 1}), b({.seed = 1}), c({.seed = 2});
    const CompletionRequest req{"Genera en español la definición para la palabra literal \"casa\"", 100, 0.5};
    EXPECT_EQ(a.complete(req).text, b.complete(req).text);
    EXPECT_EQ(a.complete(req).text, mock_definition(1, "casa"));
    EXPECT_NE(a.complete(req).text, c.complete(req).text);
    EXPECT_EQ(a.calls(), 3u);
}

TEST(MockCompletion, TokenCountsAreWhitespaceTokens) {
    MockCompletionProvider mock({.seed = 1});
    const auto r = mock.complete({"defina \"casa\"", 100, 0.5});
    EXPECT_EQ(r.tokens_prompt, 2u);
    EXPECT_EQ(r.tokens_completion, detail::whitespace_tokens(r.text));
    EXPECT_EQ(detail::whitespace_tokens("  a  b\tc\n"), 3u);
}

TEST(MockCompletion, FaultInjection) {
    MockCompletionProvider mock({.seed = 1,
                                 .misaligned_lemmas = {"b"},
                                 .failing_lemmas = {"zeta"},
                                 .transient_failures = 1});
    const std::string batched = "lista\n1. \"a\"\n2. \"b\"\n3. \"c\"";
    EXPECT_THROW(mock.complete({batched, 100, 0.5}), TransientError);
    const auto r = mock.complete({batched, 100, 0.5});
    EXPECT_NE(r.text.find("1. \"a\""), std::string::npos);
    EXPECT_EQ(r.text.find("2. "), std::string::npos);
    EXPECT_NE(r.text.find("3. \"c\""), std::string::npos);
    EXPECT_EQ(mock.complete({"palabra \"b\"", 100, 0.5}).text, mock_definition(1, "b"));
    try {
        mock.complete({"palabra \"zeta\"", 100, 0.5});
        FAIL();
    } catch (const TransientError &) {
        FAIL() << "terminal failure must not be transient";
    } catch (const ProviderError &) {
    }
}

TEST(MockCompletion, ValidatesRequest) {
    MockCompletionProvider mock({.seed = 1});
    EXPECT_THROW(mock.complete({"x", 0, 0.5}), std::invalid_argument);
    EXPECT_THROW(mock.complete({"x", 10, 3.0}), std::invalid_argument);
}

TEST(MockEmbedding, UnitNormDeterministicAndTokenDriven) {
    MockEmbeddingProvider e(7, 64);
    const std::vector<std::string> texts = {"una casa grande", "Una casa, grande.", "un perro pequeño"};
    const auto v = e.embed(texts);
    ASSERT_EQ(v.size(), 3u);
    for (const auto &x : v) {
        ASSERT_EQ(x.size(), 64u);
        double n = 0;
        for (double d : x)
            n += d * d;
        EXPECT_NEAR(n, 1.0, 1e-12);
    }
    EXPECT_EQ(v[0], v[1]);
    EXPECT_NE(v[0], v[2]);
    EXPECT_EQ(MockEmbeddingProvider(7, 64).embed(texts), v);
    EXPECT_EQ(e.calls(), 1u);
    EXPECT_EQ(e.texts_embedded(), 3u);
    EXPECT_THROW(e.embed(std::vector<std::string>{}), std::invalid_argument);
    EXPECT_THROW(MockEmbeddingProvider(1, 0), std::invalid_argument);
}

TEST(MockEmbedding, SharedTokensRaiseCosine) {
    MockEmbeddingProvider e(3);
    const std::vector<std::string> t = {"agua del mar salada", "agua del mar fría", "tren rápido nocturno"};
    const auto v = e.embed(t);
    EXPECT_GT(cosine(v[0], v[1]), cosine(v[0], v[2]));
}

TEST(RateLimiter, NeverExceedsRpmInAnyWindow) {
    auto clock = std::make_shared<FakeClock>();
    RateLimiter limiter(5, clock);
    std::vector<Clock::time_point> admitted;
    for (int i = 0; i < 23; ++i) {
        admitted.push_back(limiter.acquire());
        clock->advance(std::chrono::seconds(i % 3));
    }
    for (std::size_t i = 0; i < admitted.size(); ++i) {
        std::size_t in_window = 0;
        for (const auto &t : admitted)
            in_window += t >= admitted[i] && t < admitted[i] + 60s;
        EXPECT_LE(in_window, 5u);
    }
    EXPECT_GT(clock->sleeps(), 0u);
}

TEST(RateLimiter, FirstBurstIsFree) {
    auto clock = std::make_shared<FakeClock>();
    RateLimiter limiter(3, clock);
    const auto t0 = clock->now();
    for (int i = 0; i < 3; ++i)
        EXPECT_EQ(limiter.acquire(), t0);
    EXPECT_EQ(clock->sleeps(), 0u);
    EXPECT_EQ(limiter.acquire(), t0 + 60s);
    EXPECT_THROW(RateLimiter(0, clock), std::invalid_argument);
}

TEST(RateLimiter, ThreadSafe) {
    auto clock = std::make_shared<FakeClock>();
    RateLimiter limiter(10, clock);
    std::vector<Clock::time_point> admitted(40);
    std::vector<std::thread> pool;
    for (int w = 0; w < 4; ++w)
        pool.emplace_back([&, w] {
            for (int i = 0; i < 10; ++i)
                admitted[w * 10 + i] = limiter.acquire();
        });
    for (auto &t : pool)
        t.join();
    std::sort(admitted.begin(), admitted.end());
    for (std::size_t i = 10; i < admitted.size(); ++i)
        EXPECT_GE(admitted[i] - admitted[i - 10], 60s);
}

TEST(Backoff, ExponentialCappedJittered) {
    RetryPolicy p;
    p.base_backoff = 100ms;
    p.max_backoff = 1000ms;
    std::mt19937_64 rng(1);
    for (std::uint32_t attempt = 1; attempt <= 8; ++attempt) {
        const double raw = std::min(100.0 * std::pow(2.0, attempt - 1), 1000.0);
        for (int i = 0; i < 50; ++i) {
            const double ms = std::chrono::duration<double, std::milli>(backoff_delay(p, attempt, rng)).count();
            EXPECT_GE(ms, raw * 0.5 - 1e-6);
            EXPECT_LE(ms, raw + 1e-6);
        }
    }
}

namespace {

struct Flaky {
    int failures_left;
    bool terminal = false;
    int calls = 0;
    int operator()(int x) {
        ++calls;
        if (terminal)
            throw ProviderError("401");
        if (failures_left-- > 0)
            throw TransientError("503");
        return x * 2;
    }
};

} // namespace

TEST(Retry, RecoversFromTransientFailures) {
    auto clock = std::make_shared<FakeClock>();
    auto flaky = std::make_shared<Flaky>(Flaky{2});
    RetryPolicy p;
    auto op = with_rate_limit_and_retry([flaky](int x) { return (*flaky)(x); }, p, nullptr, clock);
    EXPECT_EQ(op(21), 42);
    EXPECT_EQ(flaky->calls, 3);
    EXPECT_EQ(clock->sleeps(), 2u);
}

TEST(Retry, GivesUpAfterMaxRetries) {
    auto clock = std::make_shared<FakeClock>();
    auto flaky = std::make_shared<Flaky>(Flaky{100});
    RetryPolicy p;
    p.max_retries = 3;
    auto op = with_rate_limit_and_retry([flaky](int x) { return (*flaky)(x); }, p, nullptr, clock);
    try {
        op(1);
        FAIL();
    } catch (const TransientError &) {
        FAIL() << "exhausted retries must surface as terminal";
    } catch (const ProviderError &e) {
        EXPECT_NE(std::string(e.what()).find("gave up after 4 attempts"), std::string::npos);
    }
    EXPECT_EQ(flaky->calls, 4);
}

TEST(Retry, TerminalErrorsAreNotRetried) {
    auto clock = std::make_shared<FakeClock>();
    auto flaky = std::make_shared<Flaky>(Flaky{0, true});
    auto op = with_rate_limit_and_retry([flaky](int x) { return (*flaky)(x); }, RetryPolicy{}, nullptr, clock);
    EXPECT_THROW(op(1), ProviderError);
    EXPECT_EQ(flaky->calls, 1);
}

TEST(Retry, EveryAttemptPassesTheLimiter) {
    auto clock = std::make_shared<FakeClock>();
    auto limiter = std::make_shared<RateLimiter>(2, clock);
    auto inner = std::make_shared<MockCompletionProvider>(MockCompletionOptions{.seed = 1, .transient_failures = 3});
    RetryPolicy p;
    p.base_backoff = 1ms;
    p.max_backoff = 1ms;
    ResilientCompletionProvider resilient(inner, p, limiter, clock);
    const auto start = clock->now();
    EXPECT_EQ(resilient.complete({"palabra \"casa\"", 100, 0.5}).text, mock_definition(1, "casa"));
    EXPECT_EQ(inner->calls(), 4u);
    EXPECT_GE(clock->now() - start, 60s); // 4 attempts at 2 rpm
}
