#pragma once

// Sliding-window request limiter and jittered exponential backoff. Time goes
// through a Clock so tests can drive both with a fake.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <thread>
#include <type_traits>
#include <utility>

#include "lexigen/error.hpp"

namespace lexigen {

class Clock {
  public:
    using duration = std::chrono::nanoseconds;
    using time_point = std::chrono::time_point<std::chrono::steady_clock, duration>;

    virtual ~Clock() = default;
    virtual time_point now() = 0;
    virtual void sleep_until(time_point t) = 0;

    void sleep_for(duration d) { sleep_until(now() + d); }
};

class SystemClock final : public Clock {
  public:
    time_point now() override { return std::chrono::steady_clock::now(); }
    void sleep_until(time_point t) override { std::this_thread::sleep_until(t); }

    static std::shared_ptr<Clock> shared() {
        static auto clock = std::make_shared<SystemClock>();
        return clock;
    }
};

// Time only moves when somebody sleeps.
class FakeClock final : public Clock {
  public:
    time_point now() override {
        std::lock_guard lock(mu_);
        return now_;
    }

    void sleep_until(time_point t) override {
        std::lock_guard lock(mu_);
        ++sleeps_;
        now_ = std::max(now_, t);
    }

    void advance(duration d) {
        std::lock_guard lock(mu_);
        now_ += d;
    }

    std::size_t sleeps() const {
        std::lock_guard lock(mu_);
        return sleeps_;
    }

  private:
    mutable std::mutex mu_;
    time_point now_{};
    std::size_t sleeps_ = 0;
};

// Permits at most `rpm` acquisitions in any half-open 60 s window.
class RateLimiter {
  public:
    static constexpr Clock::duration kWindow = std::chrono::seconds(60);

    RateLimiter(std::uint32_t rpm, std::shared_ptr<Clock> clock) : rpm_(rpm), clock_(std::move(clock)) {
        if (rpm == 0)
            throw std::invalid_argument("rate limit must be positive");
    }

    // Blocks until a slot is free; returns the time the call was admitted.
    Clock::time_point acquire() {
        std::unique_lock lock(mu_);
        while (true) {
            const auto now = clock_->now();
            while (!granted_.empty() && granted_.front() + kWindow <= now)
                granted_.pop_front();
            if (granted_.size() < rpm_) {
                granted_.push_back(now);
                return now;
            }
            const auto wake = granted_.front() + kWindow;
            lock.unlock();
            clock_->sleep_until(wake);
            lock.lock();
        }
    }

    std::uint32_t rpm() const noexcept { return rpm_; }

  private:
    std::uint32_t rpm_;
    std::shared_ptr<Clock> clock_;
    std::mutex mu_;
    std::deque<Clock::time_point> granted_;
};

struct RetryPolicy {
    std::uint32_t rpm = 60;
    std::uint32_t max_retries = 3;
    std::chrono::milliseconds base_backoff{500};
    std::chrono::milliseconds max_backoff{30000};
    std::uint64_t jitter_seed = 0x5eed;
};

// Delay before retry number `attempt` (1-based): base * 2^(attempt-1), capped, then
// scaled by a uniform jitter factor in [0.5, 1].
inline Clock::duration backoff_delay(const RetryPolicy &policy, std::uint32_t attempt,
                                     std::mt19937_64 &rng) {
    const auto exp = std::min<std::uint32_t>(attempt - 1, 30);
    const auto raw = std::min<std::int64_t>(policy.base_backoff.count() * (std::int64_t{1} << exp),
                                            policy.max_backoff.count());
    std::uniform_real_distribution<double> jitter(0.5, 1.0);
    return std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double, std::milli>(static_cast<double>(raw) * jitter(rng)));
}

// Wraps `op` so every attempt passes the limiter and TransientError is retried up to
// policy.max_retries times. Any other exception propagates at once. Once retries are
// exhausted the last transient failure is rethrown as a terminal ProviderError.
template <class Op>
auto with_rate_limit_and_retry(Op op, RetryPolicy policy, std::shared_ptr<RateLimiter> limiter,
                               std::shared_ptr<Clock> clock) {
    auto rng = std::make_shared<std::mt19937_64>(policy.jitter_seed);
    auto rng_mu = std::make_shared<std::mutex>();
    return [op = std::move(op), policy, limiter = std::move(limiter), clock = std::move(clock), rng,
            rng_mu](auto &&...args) mutable {
        for (std::uint32_t attempt = 0;; ++attempt) {
            if (limiter)
                limiter->acquire();
            try {
                return op(args...);
            } catch (const TransientError &e) {
                if (attempt >= policy.max_retries)
                    throw ProviderError(std::string(e.what()) + " (gave up after " +
                                        std::to_string(attempt + 1) + " attempts)");
                Clock::duration delay;
                {
                    std::lock_guard lock(*rng_mu);
                    delay = backoff_delay(policy, attempt + 1, *rng);
                }
                clock->sleep_for(delay);
            }
        }
    };
}

} // namespace lexigen
