// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Each check carries its own independent oracle.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "spartq/baselines.hpp"
#include "spartq/cost.hpp"
#include "spartq/env.hpp"
#include "spartq/mlp.hpp"
#include "spartq/replay.hpp"
#include "spartq/trainer.hpp"
#include "test_util.hpp"

using namespace spartq;
using test::unit_grid;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int number, const char* name, bool ok, double seconds) {
    std::printf("criterion %2d %-38s %s (%.1fs)\n", number, name, ok ? "PASS" : "FAIL", seconds);
    if (!ok) ++failures;
}

void run(int number, const char* name, const std::function<bool()>& fn) {
    const auto t0 = Clock::now();
    bool ok = false;
    try {
        ok = fn();
    } catch (const std::exception& e) {
        std::printf("  exception: %s\n", e.what());
        ok = false;
    }
    const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
    report(number, name, ok, secs);
}

// ---- criterion 1 & 2 helpers ----

bool disjoint_cover(const PartitionSet& ps) {
    const int g = ps.grid.g;
    std::vector<int> cover(std::size_t(g) * g, 0);
    for (const RectPartition& r : ps.rects) {
        if (r.top < 0 || r.left < 0 || r.bottom > g || r.right > g) return false;
        if (r.top >= r.bottom || r.left >= r.right) return false;
        for (int i = r.top; i < r.bottom; ++i)
            for (int j = r.left; j < r.right; ++j) ++cover[std::size_t(i) * g + j];
    }
    for (int c : cover)
        if (c != 1) return false;
    return true;
}

bool partition_invariants() {
    std::mt19937_64 rng(11);
    const int reps_per_g = 334;
    for (int g : {4, 8, 16}) {
        for (int rep = 0; rep < reps_per_g; ++rep) {
            PartitionSet ps = init_single(unit_grid(g));
            std::uniform_int_distribution<int> ncuts(0, 2 * g);
            const int want = ncuts(rng);
            int applied = 0;
            for (int c = 0; c < want; ++c) {
                auto actions = enumerate_valid_actions(ps);
                if (actions.empty()) break;
                std::uniform_int_distribution<std::size_t> pick(0, actions.size() - 1);
                ps = apply_cut(ps, actions[pick(rng)]);
                ++applied;
            }
            if (ps.rects.size() != std::size_t(applied) + 1) return false;
            if (!disjoint_cover(ps)) return false;
            if (!(bounds_from_rects(g, ps.rects) == ps.bounds)) return false;
        }
    }
    return true;
}

bool rect_based_valid(const PartitionSet& ps, const CutAction& a) {
    for (const RectPartition& r : ps.rects) {
        if (a.dir == Dir::Right && r.left == a.j && r.top < a.i && a.i < r.bottom) return true;
        if (a.dir == Dir::Down && r.top == a.i && r.left < a.j && a.j < r.right) return true;
    }
    return false;
}

bool action_condition_equivalence() {
    std::mt19937_64 rng(22);
    for (int rep = 0; rep < 1000; ++rep) {
        const int g = 4 + int(rng() % 9);
        PartitionSet ps = test::random_partition(g, int(rng() % (2 * g)), rng);
        for (int idx = 0; idx < 2 * g * g; ++idx) {
            const CutAction a = index_to_action(idx, g);
            if (is_valid_cut(ps, a) != rect_based_valid(ps, a)) return false;
        }
    }
    return true;
}

// ---- criterion 3 ----

// The rectifier is non-differentiable at 0, so the finite-difference
// probe only makes sense when every hidden pre-activation stays on one
// side of the kink across the +-h perturbation. Inputs are resampled
// until the net is safely inside a smooth region.
template <typename T>
double min_hidden_preactivation(const BasicMlp<T>& net, const typename BasicMlp<T>::Mat& x) {
    double lo = std::numeric_limits<double>::infinity();
    typename BasicMlp<T>::Mat a = x;
    for (std::size_t l = 0; l + 1 < net.layer_count(); ++l) {
        typename BasicMlp<T>::Mat z = (net.weights[l] * a).colwise() + net.biases[l];
        lo = std::min(lo, double(z.cwiseAbs().minCoeff()));
        a = z.cwiseMax(T(0));
    }
    return lo;
}

bool gradient_check() {
    std::mt19937_64 rng(33);
    double worst = 0.0;
    for (int net_k = 0; net_k < 20; ++net_k) {
        std::vector<int> dims = {int(2 + rng() % 7), int(2 + rng() % 7), int(2 + rng() % 7),
                                 int(1 + rng() % 8)};
        BasicMlp<double> net(dims, rng());
        const int batch = 2;
        Eigen::MatrixXd x(dims[0], batch);
        Eigen::MatrixXd w(dims.back(), batch);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (Eigen::Index c = 0; c < batch; ++c)
                for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, c) = u(rng);
            if (min_hidden_preactivation(net, x) > 0.05) break;
        }
        for (Eigen::Index c = 0; c < batch; ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r) w(r, c) = u(rng);
        auto value = [&](const BasicMlp<double>& n) {
            return (n.forward(x).cwiseProduct(w)).sum();
        };
        auto grads = backward(net, x, w);
        const double h = 1e-3;
        for (std::size_t l = 0; l < net.layer_count(); ++l) {
            for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
                for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c) {
                    BasicMlp<double> plus = net, minus = net;
                    plus.weights[l](r, c) += h;
                    minus.weights[l](r, c) -= h;
                    const double fd = (value(plus) - value(minus)) / (2 * h);
                    const double an = grads.d_weights[l](r, c);
                    const double rel = std::abs(an - fd) / std::max(1.0, std::abs(fd));
                    worst = std::max(worst, rel);
                }
            for (Eigen::Index r = 0; r < net.biases[l].size(); ++r) {
                BasicMlp<double> plus = net, minus = net;
                plus.biases[l](r) += h;
                minus.biases[l](r) -= h;
                const double fd = (value(plus) - value(minus)) / (2 * h);
                const double an = grads.d_biases[l](r);
                worst = std::max(worst, std::abs(an - fd) / std::max(1.0, std::abs(fd)));
            }
        }
    }
    if (worst >= 1e-4) std::printf("  max relative error %.3e\n", worst);
    return worst < 1e-4;
}

// ---- criterion 4 ----

std::int64_t brute_pairs(const std::vector<Point>& pts, double eps) {
    std::int64_t n = 0;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            const double dx = pts[a].x - pts[b].x;
            const double dy = pts[a].y - pts[b].y;
            if (dx * dx + dy * dy <= eps * eps) ++n;
        }
    return n;
}

bool cost_oracle_soundness() {
    std::mt19937_64 rng(44);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        Dataset d;
        const int n = 10 + int(rng() % 491);
        for (int k = 0; k < n; ++k) d.points.push_back({u(rng), u(rng)});
        const double eps = 0.01 + 0.15 * u(rng);
        const int g = 4 + int(rng() % 9);
        RectPartition full{0, 0, g, g};
        LocalJoinStats s = local_join_stats(d, full, unit_grid(g), eps);
        const std::int64_t exact = brute_pairs(d.points, eps);
        if (s.candidate_pairs < exact) return false;
        if (count_pairs_within(d.points, eps) != exact) return false;
    }
    return true;
}

// ---- criterion 5 ----

bool reward_identities() {
    std::mt19937_64 rng(55);
    std::uniform_real_distribution<double> u(0.1, 100.0);
    for (int rep = 0; rep < 100; ++rep) {
        const int q = 1 + int(rng() % 5);
        std::vector<DistanceJoinQuery> queries;
        CostReport rep_x;
        for (int k = 0; k < q; ++k) {
            queries.push_back({0.01 * (k + 1), u(rng)});
            rep_x.per_query.push_back(u(rng));
        }
        Workload w = make_workload(queries);
        if (std::abs(compute_reward(rep_x, rep_x, w) - 1.0) > 1e-12) return false;
    }
    Workload single = make_workload({{0.01, 1.0}});
    CostReport best{{100.0}, false};
    CostReport half{{50.0}, false};
    return compute_reward(best, half, single) == 4.0;
}

// ---- criterion 6 ----

bool demo_fidelity() {
    SyntheticParams p;
    p.clusters = {GaussianCluster{0.6, 0.3, 0.3, 0.08}, GaussianCluster{0.4, 0.75, 0.7, 0.12}};
    Dataset d = gen_synthetic(SyntheticKind::GaussianMixture, 5000, 7, p);
    const GridSpec grid = unit_grid(10);
    CellHistogram h = build_histogram(d, grid);
    DemoEpisode demo = kdb_actions(h, grid, 4);

    // Bit-exact replay.
    PartitionSet ps = init_single(grid);
    for (const CutAction& a : demo.actions) {
        if (!is_valid_cut(ps, a)) return false;
        ps = apply_cut(ps, a);
    }
    if (!(ps.bounds == demo.final.bounds)) return false;
    if (ps.rects.size() != demo.final.rects.size()) return false;
    for (std::size_t k = 0; k < ps.rects.size(); ++k)
        if (!(ps.rects[k] == demo.final.rects[k])) return false;

    // Each split is line-optimal on its axis (exhaustive over the rect's
    // interior lines).
    ps = init_single(grid);
    for (const CutAction& a : demo.actions) {
        const RectPartition* target = nullptr;
        for (const RectPartition& r : ps.rects) {
            const bool hit = (a.dir == Dir::Down && r.top == a.i && r.left < a.j && a.j < r.right) ||
                             (a.dir == Dir::Right && r.left == a.j && r.top < a.i && a.i < r.bottom);
            if (hit) target = &r;
        }
        if (!target) return false;
        std::int64_t total = 0;
        for (int i = target->top; i < target->bottom; ++i)
            for (int j = target->left; j < target->right; ++j) total += h.at(i, j);

        auto imbalance_v = [&](int line) {
            std::int64_t left = 0;
            for (int i = target->top; i < target->bottom; ++i)
                for (int j = target->left; j < line; ++j) left += h.at(i, j);
            return std::abs(2 * left - total);
        };
        auto imbalance_h = [&](int line) {
            std::int64_t top = 0;
            for (int i = target->top; i < line; ++i)
                for (int j = target->left; j < target->right; ++j) top += h.at(i, j);
            return std::abs(2 * top - total);
        };
        if (a.dir == Dir::Down) {
            std::int64_t best = total + 1;
            for (int line = target->left + 1; line < target->right; ++line)
                best = std::min(best, imbalance_v(line));
            if (imbalance_v(a.j) != best) return false;
        } else {
            std::int64_t best = total + 1;
            for (int line = target->top + 1; line < target->bottom; ++line)
                best = std::min(best, imbalance_h(line));
            if (imbalance_h(a.i) != best) return false;
        }
        ps = apply_cut(ps, a);
    }
    return true;
}

// ---- criteria 7-10: training runs ----

Dataset skewed_dataset(int n, std::uint64_t seed) {
    SyntheticParams p;
    p.clusters = {GaussianCluster{0.7, 0.25, 0.3, 0.06}, GaussianCluster{0.3, 0.75, 0.72, 0.1}};
    return gen_synthetic(SyntheticKind::GaussianMixture, n, seed, p);
}

bool pretrain_convergence() {
    Dataset d = skewed_dataset(2000, 3);
    const GridSpec grid = unit_grid(6);
    CellHistogram h = build_histogram(d, grid);
    TrainConfig cfg;
    cfg.g = 6;
    cfg.m = 4;
    cfg.pretrain_episodes = 500;
    DemoEpisode demo = kdb_actions(h, grid, cfg.m);
    auto demo_ts = demo_transitions_for(demo, h, cfg);

    int converged = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        Mlp main(cfg.net_dims(), seed);
        Mlp target = main;
        AdamState opt(main);
        PrioritizedMemory demo_mem(cfg.demo_capacity, false, cfg.per);
        for (const Transition& t : demo_ts) demo_mem.push(t);
        std::mt19937_64 rng(seed);
        PretrainResult res = pretrain(demo, demo_ts, h, cfg, main, target, opt, demo_mem, rng);
        if (res.converged && res.episodes_run <= 500) ++converged;
    }
    if (converged < 4) std::printf("  converged in %d/5 seeds\n", converged);
    return converged >= 4;
}

struct RunSetup {
    Dataset data;
    CellHistogram hist;
    Workload workload;
    DemoEpisode demo;
    std::vector<Transition> demo_ts;
    double demo_cost = 0.0;
};

RunSetup make_run_setup(const TrainConfig& cfg, const Workload& w, std::uint64_t data_seed,
                        bool skewed = true) {
    RunSetup s;
    s.data = skewed ? skewed_dataset(3000, data_seed)
                    : gen_synthetic(SyntheticKind::Uniform, 3000, data_seed, SyntheticParams{});
    const GridSpec grid = unit_grid(cfg.g);
    s.hist = build_histogram(s.data, grid);
    s.workload = w;
    s.demo = kdb_actions(s.hist, grid, cfg.m);
    s.demo_ts = demo_transitions_for(s.demo, s.hist, cfg);
    s.demo_cost = workload_cost(s.data, s.demo.final, w, cfg.cost).weighted_total(w);
    return s;
}

TrainResult run_training(const RunSetup& s, TrainConfig cfg, std::uint64_t seed,
                         const TrainHooks& hooks = {}) {
    cfg.seed = seed;
    Mlp main(cfg.net_dims(), seed);
    AdamState opt(main);
    return train(s.data, s.hist, s.workload, cfg, s.demo, s.demo_ts, main, opt, hooks);
}

TrainConfig train_cfg_g10() {
    TrainConfig cfg;
    cfg.g = 10;
    cfg.m = 4;
    cfg.episodes = 300;
    cfg.pretrain_episodes = 300;
    return cfg;
}

bool best_cost_guarantee() {
    TrainConfig cfg = train_cfg_g10();
    Workload w = make_workload({{0.01, 0.3}, {0.02, 0.3}, {0.04, 0.4}});
    RunSetup s = make_run_setup(cfg, w, 9);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TrainResult res = run_training(s, cfg, seed);
        const double best = res.best.best_report.weighted_total(w);
        if (best > s.demo_cost) {
            std::printf("  seed %llu: best %.1f > demo %.1f\n", (unsigned long long)seed, best,
                        s.demo_cost);
            return false;
        }
    }
    return true;
}

bool learning_effectiveness() {
    TrainConfig cfg = train_cfg_g10();
    Workload w = make_workload({{0.01, 0.02}, {0.02, 0.03}, {0.04, 0.95}});
    RunSetup s = make_run_setup(cfg, w, 9);
    int improved = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        TrainResult res = run_training(s, cfg, seed);
        if (res.best.best_report.weighted_total(w) < s.demo_cost) ++improved;
    }
    if (improved < 3) std::printf("  improved in %d/5 seeds\n", improved);
    return improved >= 3;
}

bool pruning_ablation() {
    TrainConfig cfg = train_cfg_g10();
    cfg.no_pretrain = true;  // both arms; the comparison is about costing
    Workload w = make_workload({{0.01, 0.3}, {0.02, 0.3}, {0.04, 0.4}});
    // Uniform data: unbalanced layouts are much more expensive than the
    // balanced demonstration, so pruning gets real opportunities.
    RunSetup s = make_run_setup(cfg, w, 9, false);
    const std::uint64_t seed = 2;

    // Reference arm: full evaluation every episode, actions recorded.
    std::map<std::pair<int, int>, CutAction> script;
    TrainHooks record;
    record.on_action = [&](int e, int t, const CutAction& a) { script[{e, t}] = a; };
    TrainConfig ref_cfg = cfg;
    ref_cfg.no_prune = true;
    TrainResult ref = run_training(s, ref_cfg, seed, record);

    // Pruned arm: identical action sequences, default pruning.
    TrainHooks force;
    force.force_action = [&](int e, int t) -> std::optional<CutAction> {
        return script.at({e, t});
    };
    TrainResult pruned = run_training(s, cfg, seed, force);

    if (pruned.full_evaluations >= ref.full_evaluations) {
        std::printf("  full evaluations: pruned %d vs reference %d\n", pruned.full_evaluations,
                    ref.full_evaluations);
        return false;
    }
    if (!(pruned.best.best.bounds == ref.best.best.bounds)) {
        std::printf("  best partitions differ between arms\n");
        return false;
    }
    return true;
}

// ---- criterion 11 ----

bool per_distribution() {
    std::mt19937_64 rng(66);
    std::uniform_real_distribution<double> u(0.05, 4.0);
    for (int vec = 0; vec < 10; ++vec) {
        const int n = 8 + int(rng() % 25);
        std::vector<double> prio(n);
        double total = 0.0;
        SumTree tree(n);
        for (int k = 0; k < n; ++k) {
            prio[k] = u(rng);
            tree.set(std::size_t(k), prio[k]);
            total += prio[k];
        }
        std::vector<std::int64_t> hits(n, 0);
        const int draws = 100000;
        std::uniform_real_distribution<double> prefix(0.0, total);
        for (int k = 0; k < draws; ++k) {
            std::size_t idx = tree.sample(prefix(rng));
            if (idx >= std::size_t(n)) return false;
            ++hits[idx];
        }
        double chi2 = 0.0;
        for (int k = 0; k < n; ++k) {
            const double expect = draws * prio[k] / total;
            chi2 += (hits[k] - expect) * (hits[k] - expect) / expect;
        }
        const double p = test::chi2_p_value(chi2, n - 1);
        if (p <= 0.01) {
            std::printf("  vector %d: p = %.4f\n", vec, p);
            return false;
        }
    }
    return true;
}

// ---- criterion 12 ----

bool nstep_returns() {
    StateVector s0 = {0.0f}, s1 = {1.0f}, s2 = {2.0f}, sf = {3.0f};
    std::vector<EpisodeStep> ep = {{s0, 0, 0.0}, {s1, 1, 0.0}, {s2, 2, 1.0}};
    auto ts = build_nstep(ep, sf, 3, 0.99);
    if (ts.size() != 3) return false;
    if (ts[0].ret != 0.9801 || ts[1].ret != 0.99 || ts[2].ret != 1.0) return false;
    for (const Transition& t : ts)
        if (!t.terminal) return false;
    return ts[0].steps == 3 && ts[1].steps == 2 && ts[2].steps == 1;
}

// ---- criterion 13 ----

bool checkpoint_roundtrip() {
    Mlp net({int(state_size(6)), 64, 32, action_space(6)}, 13);
    AdamState opt(net);
    const std::string path =
        (std::filesystem::temp_directory_path() / "spartq_accept_ckpt.bin").string();
    save_checkpoint(net, opt, path);
    auto [net2, opt2] = load_checkpoint(path);
    std::filesystem::remove(path);

    std::mt19937_64 rng(14);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    for (int k = 0; k < 100; ++k) {
        Eigen::MatrixXf x(net.in_dim(), 1);
        for (Eigen::Index r = 0; r < x.rows(); ++r) x(r, 0) = u(rng);
        Eigen::MatrixXf a = net.forward(x);
        Eigen::MatrixXf b = net2.forward(x);
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            if (a(r, 0) != b(r, 0)) return false;
    }
    return true;
}

}  // namespace

int main() {
    run(1, "partition invariants", partition_invariants);
    run(2, "action-condition equivalence", action_condition_equivalence);
    run(3, "gradient check", gradient_check);
    run(4, "cost-oracle soundness", cost_oracle_soundness);
    run(5, "reward identities", reward_identities);
    run(6, "demo fidelity", demo_fidelity);
    run(7, "pre-training convergence", pretrain_convergence);
    run(8, "best-cost guarantee", best_cost_guarantee);
    run(9, "learning effectiveness", learning_effectiveness);
    run(10, "pruning ablation", pruning_ablation);
    run(11, "prioritized sampling distribution", per_distribution);
    run(12, "n-step returns", nstep_returns);
    run(13, "checkpoint round-trip", checkpoint_roundtrip);

    if (failures == 0) {
        std::printf("all 13 criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", failures);
    return 1;
}
