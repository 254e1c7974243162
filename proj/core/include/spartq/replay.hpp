#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "spartq/env.hpp"

namespace spartq {

// n-step transition record. `ret` accumulates sum_k gamma^k r_{t+k} over
// the `steps` actually spanned; terminal windows bootstrap nothing.
struct Transition {
    StateVector s;
    int a = 0;
    double ret = 0.0;
    StateVector s_next;
    int steps = 1;
    bool terminal = false;
    bool is_demo = false;
};

// Binary sum-tree over leaf priorities; prefix-sum sampling picks leaf k
// with probability leaf_k / total.
class SumTree {
public:
    explicit SumTree(std::size_t capacity = 1);
    void set(std::size_t idx, double priority);
    double get(std::size_t idx) const;
    double total() const;
    std::size_t sample(double prefix) const;  // prefix in [0, total)
    std::size_t capacity() const { return capacity_; }
    void grow(std::size_t new_capacity);

private:
    std::size_t capacity_ = 0;  // power of two
    std::size_t used_ = 0;      // leaves with assigned priorities
    std::vector<double> tree_;  // 1-based heap layout, leaves at [capacity_, 2*capacity_)
};

struct PerParams {
    double alpha = 0.6;   // applied at store time: leaf = (|td|+eps_p)^alpha
    double eps_p = 1e-3;
};

// Prioritized memory. Agent memory is a ring buffer that evicts the
// oldest entry at capacity; demo memory never evicts and grows past its
// initial capacity when better-than-best episodes arrive.
class PrioritizedMemory {
public:
    PrioritizedMemory(std::size_t capacity, bool evicting, PerParams params = {});

    void push(Transition t);
    void update_priorities(const std::vector<std::size_t>& indices,
                           const std::vector<double>& td_errors);

    std::size_t size() const { return items_.size(); }
    bool empty() const { return items_.empty(); }
    const Transition& at(std::size_t idx) const { return items_[idx]; }
    double priority(std::size_t idx) const { return tree_.get(idx); }
    double total_priority() const { return tree_.total(); }
    std::size_t sample_index(double prefix) const { return tree_.sample(prefix); }
    const PerParams& params() const { return params_; }

private:
    std::size_t capacity_;
    bool evicting_;
    PerParams params_;
    std::vector<Transition> items_;
    std::size_t next_slot_ = 0;  // ring position when evicting
    SumTree tree_;
    double max_leaf_ = 1.0;  // priority given to new entries
};

// One sampled batch; slots name (memory, index) for priority updates.
struct SampledBatch {
    std::vector<const Transition*> items;
    std::vector<float> weights;  // importance weights, max-normalized
    // memory id 0 = demo, 1 = agent
    std::vector<std::pair<int, std::size_t>> slots;
};

// ceil(rho*batch) draws from demo, the rest from agent; shortfall on the
// agent side is drawn from demo. beta is the importance-sampling exponent.
SampledBatch sample_mixed(const PrioritizedMemory& demo, const PrioritizedMemory& agent,
                          int batch, double rho, double beta, std::mt19937_64& rng);

void update_priorities(PrioritizedMemory& demo, PrioritizedMemory& agent,
                       const SampledBatch& batch, const std::vector<double>& td_errors);

struct EpisodeStep {
    StateVector s;
    int a = 0;
    double r = 0.0;
};

// n-step windows over one episode; the window never crosses the episode
// end, and `s_next` of step t is the state observed at t + steps (the
// final post-episode state for windows reaching the end).
std::vector<Transition> build_nstep(const std::vector<EpisodeStep>& episode,
                                    const StateVector& final_state, int n, double gamma);

// Demo transitions persist so `demo` and `train` are separate invocations.
void save_transitions(const std::vector<Transition>& ts, int g, const std::string& path);
std::vector<Transition> load_transitions(const std::string& path, int expected_g);

}  // namespace spartq
