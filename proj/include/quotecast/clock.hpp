#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <mutex>
#include <thread>

namespace quotecast {

// Injected time source so daemon loops can run under virtual time in tests.
// now() is UTC epoch seconds; sleep_for() must return early when the
// shutdown signal fires.
class Clock {
public:
    virtual ~Clock() = default;
    virtual std::int64_t now() const = 0;
    virtual void sleep_for(std::chrono::milliseconds d) = 0;
};

// Cooperative shutdown flag shared between a daemon loop and its owner.
class ShutdownSignal {
public:
    void request() {
        {
            std::lock_guard<std::mutex> lk(mu_);
            requested_ = true;
        }
        cv_.notify_all();
    }

    bool requested() const {
        std::lock_guard<std::mutex> lk(mu_);
        return requested_;
    }

    // Returns true if shutdown was requested before the wait elapsed.
    bool wait_for(std::chrono::milliseconds d) {
        std::unique_lock<std::mutex> lk(mu_);
        return cv_.wait_for(lk, d, [this] { return requested_; });
    }

private:
    mutable std::mutex mu_;
    std::condition_variable cv_;
    bool requested_ = false;
};

class SystemClock final : public Clock {
public:
    explicit SystemClock(ShutdownSignal* shutdown = nullptr) : shutdown_(shutdown) {}

    std::int64_t now() const override {
        return std::chrono::duration_cast<std::chrono::seconds>(
                   std::chrono::system_clock::now().time_since_epoch())
            .count();
    }

    void sleep_for(std::chrono::milliseconds d) override {
        if (shutdown_ != nullptr) {
            shutdown_->wait_for(d);
        } else {
            std::this_thread::sleep_for(d);
        }
    }

private:
    ShutdownSignal* shutdown_;
};

// Deterministic clock: sleep advances time instantly and is accounted for,
// so tests can assert exact virtual-time budgets.
class VirtualClock final : public Clock {
public:
    explicit VirtualClock(std::int64_t start_epoch = 1'647'381'600)
        : now_ms_(start_epoch * 1000) {}

    std::int64_t now() const override { return now_ms_.load() / 1000; }

    void sleep_for(std::chrono::milliseconds d) override {
        now_ms_ += d.count();
        slept_ms_ += d.count();
    }

    void advance(std::chrono::milliseconds d) { now_ms_ += d.count(); }

    std::int64_t total_slept_ms() const { return slept_ms_.load(); }

private:
    std::atomic<std::int64_t> now_ms_;
    std::atomic<std::int64_t> slept_ms_{0};
};

}  // namespace quotecast
