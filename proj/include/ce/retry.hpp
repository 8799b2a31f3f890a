#pragma once
// Bounded retry with exponential backoff and jitter.
//
// RetryableError (network, rate limit) is retried up to max_attempts; a
// server-advised delay (e.g. Retry-After) takes precedence over the computed
// backoff. Everything else propagates immediately. The sleep function is
// injectable so tests run without wall-clock waits.

#include <algorithm>
#include <chrono>
#include <functional>
#include <random>
#include <thread>

#include "ce/errors.hpp"

namespace ce {

struct RetryPolicy {
    int max_attempts = 4;
    std::chrono::milliseconds base_delay{250};
    double multiplier = 2.0;
    double jitter = 0.1;  // +/- fraction of the computed delay
    std::chrono::milliseconds max_delay{10000};
};

using SleepFn = std::function<void(std::chrono::milliseconds)>;

inline void default_sleep(std::chrono::milliseconds d) { std::this_thread::sleep_for(d); }

inline std::chrono::milliseconds backoff_delay(const RetryPolicy& policy, int attempt) {
    double d = static_cast<double>(policy.base_delay.count());
    for (int i = 1; i < attempt; ++i) d *= policy.multiplier;
    d = std::min(d, static_cast<double>(policy.max_delay.count()));
    if (policy.jitter > 0.0) {
        thread_local std::mt19937_64 rng{std::random_device{}()};
        std::uniform_real_distribution<double> spread(1.0 - policy.jitter, 1.0 + policy.jitter);
        d *= spread(rng);
    }
    return std::chrono::milliseconds(static_cast<long long>(d));
}

template <typename F>
auto with_retries(const RetryPolicy& policy, F&& op, const SleepFn& sleep = default_sleep)
    -> decltype(op()) {
    int attempts = std::max(1, policy.max_attempts);
    for (int attempt = 1;; ++attempt) {
        try {
            return op();
        } catch (const RetryableError& e) {
            if (attempt >= attempts) throw;
            auto delay = e.advised_delay ? *e.advised_delay : backoff_delay(policy, attempt);
            sleep(delay);
        }
    }
}

}  // namespace ce
