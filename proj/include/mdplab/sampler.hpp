#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "mdplab/mdp.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

struct Transition {
    int state = 0;
    int action = 0;
    double reward = 0.0;
    int next_state = 0;
};

// Walks a single Markovian trajectory of the behavior policy. Identical
// seeds and inputs produce bit-identical transition streams.
class TrajectorySampler {
public:
    TrajectorySampler(const TabularMdp& mdp, Policy behavior, std::uint64_t seed,
                      int start_state = 0)
        : mdp_(&mdp), behavior_(std::move(behavior)), rng_(seed), seed_(seed),
          state_(start_state) {
        behavior_.validate(mdp.n_states, mdp.n_actions);
        if (start_state < 0 || start_state >= mdp.n_states)
            throw std::invalid_argument("TrajectorySampler: start state out of range");
    }

    Transition step() {
        const int s = state_;
        const int a = behavior_.is_deterministic() ? behavior_.action(s)
                                                   : rng_.categorical(behavior_.row(s));
        const int s2 = rng_.categorical(mdp_->transition_row(s, a));
        state_ = s2;
        ++t_;
        return {s, a, mdp_->reward_at(s, a), s2};
    }

    int current_state() const { return state_; }
    long long steps() const { return t_; }
    std::uint64_t seed() const { return seed_; }
    const TabularMdp& mdp() const { return *mdp_; }

private:
    const TabularMdp* mdp_;
    Policy behavior_;
    Xoshiro256ss rng_;
    std::uint64_t seed_;
    int state_;
    long long t_ = 0;
};

// Visit counts K_t(s,a) with an O(1) minimum. The running minimum only moves
// when the last pair sitting at it gets visited, at which point the pairs at
// the new minimum are recounted.
class VisitCounter {
public:
    explicit VisitCounter(int n_pairs)
        : counts_(n_pairs, 0), min_(0), at_min_(n_pairs) {}

    void record(int pair) {
        if (counts_[pair] == min_) {
            if (--at_min_ == 0) {
                ++min_;
                ++counts_[pair];
                ++total_;
                for (long long c : counts_) at_min_ += (c == min_);
                return;
            }
        }
        ++counts_[pair];
        ++total_;
    }

    long long count(int pair) const { return counts_[pair]; }
    long long min_count() const { return min_; }
    long long total() const { return total_; }
    int size() const { return static_cast<int>(counts_.size()); }

private:
    std::vector<long long> counts_;
    long long total_ = 0;
    long long min_ = 0;
    int at_min_ = 0;
};

} // namespace mdplab
