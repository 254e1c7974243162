#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "spartq/baselines.hpp"
#include "spartq/cost.hpp"
#include "spartq/env.hpp"
#include "spartq/mlp.hpp"
#include "spartq/replay.hpp"

namespace spartq {

struct TrainConfig {
    int g = 30;
    int m = 8;                 // computers = partitions
    int episodes = 3000;       // e_max
    int pretrain_episodes = 3000;
    int target_sync = 100;     // U, in training steps
    int rollout_check = 10;    // pretrain convergence check interval
    double eps_r = 0.1;
    double eps_s = 0.2;
    int batch = 32;
    double rho = 0.25;
    int n_step = 3;
    double gamma = 0.99;
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double lambda3 = 1e-5;
    double margin = 0.8;
    double eta = 0.001;
    std::uint64_t seed = 0;
    std::size_t agent_capacity = 10000;
    std::size_t demo_capacity = 100;
    PerParams per;             // alpha / eps_p
    double beta_start = 0.4;   // annealed linearly to 1.0 over training
    CostParams cost;
    bool no_pretrain = false;
    bool no_grid_shift = false;
    bool no_prune = false;

    void validate() const;
    std::vector<int> net_dims() const;
};

struct LossBreakdown {
    double l_n = 0.0;
    double l_c = 0.0;
    double l_l2 = 0.0;
    double total = 0.0;
    std::vector<double> td_errors;  // per sample, for priority updates
};

struct BestTracker {
    PartitionSet best;      // P_b
    CostReport best_report; // full (never pruned)
};

// Eq-style combined loss over one sampled batch. Importance weights apply
// to the TD term only; the margin term covers demo samples only; the L2
// term covers weight matrices, not biases. Bootstrap maxima are restricted
// to valid actions decoded from the stored next state.
std::pair<LossBreakdown, GradientSet> compute_losses(const SampledBatch& batch, const Mlp& main,
                                                     const Mlp& target, const TrainConfig& cfg);

// Extended epsilon-greedy: eps_r random valid action, eps_s a one-grid-
// shift of the greedy action (fallback greedy when no shift is valid),
// otherwise the masked argmax (ties -> lowest action index).
CutAction select_action(const StateVector& s, const std::vector<std::uint8_t>& mask,
                        const Mlp& main, const TrainConfig& cfg, std::mt19937_64& rng);

CutAction greedy_action(const StateVector& s, const std::vector<std::uint8_t>& mask,
                        const Mlp& main, int g);

struct PretrainResult {
    bool converged = false;
    int episodes_run = 0;
};

// Trains on demo memory only; every rollout_check episodes a greedy
// rollout is compared against the demo partitions; stops on a match.
PretrainResult pretrain(const DemoEpisode& demo, const std::vector<Transition>& demo_transitions,
                        const CellHistogram& hist, const TrainConfig& cfg, Mlp& main, Mlp& target,
                        AdamState& opt, PrioritizedMemory& demo_mem, std::mt19937_64& rng);

struct EpisodeLog {
    int episode = 0;
    double reward = 0.0;
    double weighted_cost = 0.0;  // -1 when pruned (cost not fully known)
    bool pruned = false;
    double l_n = 0.0;
    double l_c = 0.0;
    double l_l2 = 0.0;
    double best_cost = 0.0;
};

struct TrainResult {
    BestTracker best;
    std::vector<EpisodeLog> log;
    int full_evaluations = 0;  // episodes costed without pruning
    PretrainResult pretrain;
};

struct TrainHooks {
    // Forces the action at (episode, t); used to replay identical action
    // sequences across ablation arms.
    std::function<std::optional<CutAction>(int episode, int t)> force_action;
    // Observes every executed action.
    std::function<void(int episode, int t, const CutAction&)> on_action;
    // Called after each episode (e.g. periodic snapshots).
    std::function<void(const EpisodeLog&, const Mlp&, const AdamState&)> on_episode;
};

// Pre-training followed by the main loop; returns the best partitions,
// the per-episode log, and the evaluation counters. `main` and `opt` are
// updated in place.
TrainResult train(const Dataset& data, const CellHistogram& hist, const Workload& workload,
                  const TrainConfig& cfg, const DemoEpisode& demo,
                  const std::vector<Transition>& demo_transitions, Mlp& main, AdamState& opt,
                  const TrainHooks& hooks = {});

// Builds the demo transition set for a baseline episode: intermediate
// rewards 0, final reward 1.0 (P_b starts at P_d, so the demo episode
// scores exactly 1 under the reward definition).
std::vector<Transition> demo_transitions_for(const DemoEpisode& demo, const CellHistogram& hist,
                                             const TrainConfig& cfg);

struct EvalRow {
    std::string method;
    std::vector<double> per_query;
    double weighted_total = 0.0;
};

struct EvalTable {
    std::vector<EvalRow> rows;  // Uniform, Quad, KDB, Demo, Learned
    int best_row = -1;          // by weighted total
    int second_row = -1;
};

EvalTable evaluate_all(const Dataset& data, const CellHistogram& hist, const Workload& workload,
                       const TrainConfig& cfg, const PartitionSet& learned);

std::string eval_table_text(const EvalTable& t, const Workload& w);
std::string eval_table_csv(const EvalTable& t, const Workload& w);

std::string training_log_csv(const std::vector<EpisodeLog>& log);

}  // namespace spartq
