#pragma once

#include <chrono>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace amlt {

// Time source seam: production code uses SteadyClock; tests inject FakeClock
// to script elapsed times deterministically.
class Clock {
public:
    virtual ~Clock() = default;
    virtual double now() = 0;  // seconds, monotonic
};

class SteadyClock final : public Clock {
public:
    double now() override {
        return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
            .count();
    }
};

// Scripted clock. now() calls alternate interval-start / interval-end; each
// completed interval advances time by the next scripted delta. Throws when
// the script runs out so tests fail loudly on miscounted intervals.
class FakeClock final : public Clock {
public:
    FakeClock() = default;
    explicit FakeClock(std::vector<double> deltas) : deltas_(std::move(deltas)) {}

    void push(double delta) { deltas_.push_back(delta); }

    double now() override {
        if (!open_) {
            open_ = true;
            return t_;
        }
        open_ = false;
        if (next_ >= deltas_.size())
            throw std::out_of_range("FakeClock: delta script exhausted");
        t_ += deltas_[next_++];
        return t_;
    }

    std::size_t consumed() const { return next_; }

private:
    std::vector<double> deltas_;
    std::size_t next_ = 0;
    double t_ = 0.0;
    bool open_ = false;
};

}  // namespace amlt
