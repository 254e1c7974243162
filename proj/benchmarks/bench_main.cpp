#include <benchmark/benchmark.h>

#include <random>

#include "spartq/cost.hpp"
#include "spartq/env.hpp"
#include "spartq/mlp.hpp"
#include "spartq/trainer.hpp"

using namespace spartq;

namespace {

GridSpec unit_grid(int g) { return GridSpec{BBox{0.0, 0.0, 1.0, 1.0}, g}; }

CellHistogram random_hist(int g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    CellHistogram h;
    h.g = g;
    h.counts.resize(std::size_t(g) * g);
    for (auto& c : h.counts) {
        c = std::int64_t(rng() % 50);
        h.total += c;
    }
    return h;
}

PartitionSet random_partition(int g, int cuts, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    PartitionSet ps = init_single(unit_grid(g));
    for (int k = 0; k < cuts; ++k) {
        auto actions = enumerate_valid_actions(ps);
        if (actions.empty()) break;
        ps = apply_cut(ps, actions[rng() % actions.size()]);
    }
    return ps;
}

void BM_EnumerateValidActions(benchmark::State& state) {
    const int g = int(state.range(0));
    PartitionSet ps = random_partition(g, g, 1);
    for (auto _ : state) benchmark::DoNotOptimize(enumerate_valid_actions(ps));
}
BENCHMARK(BM_EnumerateValidActions)->Arg(10)->Arg(30);

void BM_ApplyCut(benchmark::State& state) {
    const int g = int(state.range(0));
    PartitionSet ps = init_single(unit_grid(g));
    const CutAction a{0, g / 2, Dir::Down};
    for (auto _ : state) benchmark::DoNotOptimize(apply_cut(ps, a));
}
BENCHMARK(BM_ApplyCut)->Arg(10)->Arg(30);

void BM_EncodeState(benchmark::State& state) {
    const int g = int(state.range(0));
    CellHistogram h = random_hist(g, 2);
    EnvState e = make_env(unit_grid(g), h);
    for (auto _ : state) benchmark::DoNotOptimize(encode_state(e));
}
BENCHMARK(BM_EncodeState)->Arg(10)->Arg(30);

void BM_WorkloadCost(benchmark::State& state) {
    const int n = int(state.range(0));
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Dataset d;
    for (int k = 0; k < n; ++k) d.points.push_back({u(rng), u(rng)});
    PartitionSet ps = random_partition(10, 3, 4);
    Workload w = make_workload({{0.01, 0.3}, {0.02, 0.3}, {0.04, 0.4}});
    CostParams p;
    for (auto _ : state) benchmark::DoNotOptimize(workload_cost(d, ps, w, p));
}
BENCHMARK(BM_WorkloadCost)->Arg(1000)->Arg(10000);

void BM_MlpForward(benchmark::State& state) {
    const int g = int(state.range(0));
    TrainConfig cfg;
    cfg.g = g;
    Mlp net(cfg.net_dims(), 5);
    Eigen::MatrixXf x = Eigen::MatrixXf::Random(net.in_dim(), 32);
    for (auto _ : state) benchmark::DoNotOptimize(net.forward(x));
}
BENCHMARK(BM_MlpForward)->Arg(10)->Arg(30);

void BM_MlpBackward(benchmark::State& state) {
    const int g = int(state.range(0));
    TrainConfig cfg;
    cfg.g = g;
    Mlp net(cfg.net_dims(), 5);
    Eigen::MatrixXf x = Eigen::MatrixXf::Random(net.in_dim(), 32);
    Eigen::MatrixXf up = Eigen::MatrixXf::Random(net.out_dim(), 32);
    for (auto _ : state) benchmark::DoNotOptimize(backward(net, x, up));
}
BENCHMARK(BM_MlpBackward)->Arg(10)->Arg(30);

}  // namespace

BENCHMARK_MAIN();
