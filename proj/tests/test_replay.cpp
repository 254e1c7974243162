#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "spartq/replay.hpp"
#include "test_util.hpp"

using namespace spartq;

namespace {

Transition make_transition(float tag, int a = 0) {
    Transition t;
    t.s = {tag, 0.0f, 1.0f};
    t.a = a;
    t.ret = 0.5;
    t.s_next = {tag + 0.5f, 1.0f, 0.0f};
    t.steps = 2;
    return t;
}

}  // namespace

TEST_CASE("sum tree: root equals the sum of leaves") {
    SumTree tree(8);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.0, 5.0);
    double sum = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
        const double p = u(rng);
        tree.set(k, p);
        sum += p;
    }
    CHECK(tree.total() == doctest::Approx(sum).epsilon(1e-12));
    tree.set(3, 0.0);
    sum -= tree.get(3);
    CHECK(tree.get(3) == 0.0);
}

TEST_CASE("sum tree: prefix sampling hits the owning leaf") {
    SumTree tree(4);
    tree.set(0, 1.0);
    tree.set(1, 2.0);
    tree.set(2, 0.0);
    tree.set(3, 4.0);
    CHECK(tree.sample(0.5) == 0);
    CHECK(tree.sample(1.5) == 1);
    CHECK(tree.sample(2.999) == 1);
    CHECK(tree.sample(3.0001) == 3);
    CHECK(tree.sample(6.9) == 3);
}

TEST_CASE("sum tree: grow preserves priorities") {
    SumTree tree(2);
    tree.set(0, 3.0);
    tree.set(1, 1.0);
    tree.grow(8);
    CHECK(tree.get(0) == 3.0);
    CHECK(tree.get(1) == 1.0);
    CHECK(tree.total() == 4.0);
    tree.set(5, 2.0);
    CHECK(tree.total() == 6.0);
}

TEST_CASE("memory: new entries get the running max priority") {
    PrioritizedMemory mem(16, true);
    mem.push(make_transition(0));
    CHECK(mem.priority(0) == 1.0);
    // Raise one priority; the next push inherits the new max.
    mem.update_priorities({0}, {10.0});
    const double raised = mem.priority(0);
    CHECK(raised == doctest::Approx(std::pow(10.0 + 1e-3, 0.6)));
    mem.push(make_transition(1));
    CHECK(mem.priority(1) == raised);
}

TEST_CASE("memory: agent ring buffer evicts the oldest") {
    PrioritizedMemory mem(4, true);
    for (int k = 0; k < 5; ++k) mem.push(make_transition(float(k), k));
    CHECK(mem.size() == 4);
    // Slot 0 was overwritten by the 5th push.
    CHECK(mem.at(0).a == 4);
    CHECK(mem.at(1).a == 1);
}

TEST_CASE("memory: demo memory grows past its initial capacity") {
    PrioritizedMemory demo(4, false);
    for (int k = 0; k < 9; ++k) demo.push(make_transition(float(k), k));
    CHECK(demo.size() == 9);
    for (int k = 0; k < 9; ++k) CHECK(demo.at(k).a == k);
    CHECK(demo.total_priority() == doctest::Approx(9.0));
}

TEST_CASE("sample_mixed: demo fraction and shortfall rule") {
    std::mt19937_64 rng(3);
    PrioritizedMemory demo(100, false);
    PrioritizedMemory agent(100, true);
    for (int k = 0; k < 20; ++k) {
        Transition t = make_transition(float(k), k);
        t.is_demo = true;
        demo.push(t);
    }
    for (int k = 0; k < 20; ++k) agent.push(make_transition(float(k), 100 + k));

    SampledBatch b = sample_mixed(demo, agent, 32, 0.25, 0.4, rng);
    REQUIRE(b.items.size() == 32);
    REQUIRE(b.slots.size() == 32);
    REQUIRE(b.weights.size() == 32);
    int demo_draws = 0;
    for (auto [mem, idx] : b.slots) demo_draws += (mem == 0);
    CHECK(demo_draws == 8);  // ceil(0.25 * 32)
    for (float w : b.weights) {
        CHECK(w > 0.0f);
        CHECK(w <= 1.0f);
    }
    // Uniform priorities: every weight is the max, so exactly 1.
    for (float w : b.weights) CHECK(w == doctest::Approx(1.0f));

    PrioritizedMemory empty_agent(100, true);
    SampledBatch all_demo = sample_mixed(demo, empty_agent, 32, 0.25, 0.4, rng);
    REQUIRE(all_demo.items.size() == 32);
    for (auto [mem, idx] : all_demo.slots) CHECK(mem == 0);
}

TEST_CASE("sample_mixed: draw frequency follows the priority law") {
    // Two agent entries with priorities p0, p1 set via td errors such that
    // the stored values are 1 and 3: expect 25% / 75% draws.
    std::mt19937_64 rng(7);
    PerParams per;
    per.alpha = 1.0;  // identity so the target ratios are exact
    per.eps_p = 0.0;
    PrioritizedMemory demo(4, false, per);
    demo.push(make_transition(0, 0));  // demo side satisfied with one entry
    PrioritizedMemory agent(4, true, per);
    agent.push(make_transition(1, 1));
    agent.push(make_transition(2, 2));
    agent.update_priorities({0, 1}, {1.0, 3.0});

    std::map<int, int> hits;
    const int rounds = 25000;
    for (int k = 0; k < rounds; ++k) {
        SampledBatch b = sample_mixed(demo, agent, 4, 0.25, 1.0, rng);
        for (auto [mem, idx] : b.slots)
            if (mem == 1) ++hits[int(idx)];
    }
    const double n = double(hits[0] + hits[1]);
    const double e0 = n * 0.25, e1 = n * 0.75;
    const double chi2 = (hits[0] - e0) * (hits[0] - e0) / e0 + (hits[1] - e1) * (hits[1] - e1) / e1;
    CHECK(test::chi2_p_value(chi2, 1) > 0.001);

    // Importance weights at beta=1 favor the rare entry.
    SampledBatch wb = sample_mixed(demo, agent, 8, 0.25, 1.0, rng);
    float w_low = 0, w_high = 0;
    for (std::size_t k = 0; k < wb.slots.size(); ++k) {
        if (wb.slots[k].first != 1) continue;
        if (wb.slots[k].second == 0) w_low = wb.weights[k];
        if (wb.slots[k].second == 1) w_high = wb.weights[k];
    }
    if (w_low > 0 && w_high > 0) CHECK(w_low > w_high);
}

TEST_CASE("priority floor: zero td error still yields positive priority") {
    PrioritizedMemory mem(4, true);
    mem.push(make_transition(0));
    mem.update_priorities({0}, {0.0});
    CHECK(mem.priority(0) == doctest::Approx(std::pow(1e-3, 0.6)));
    CHECK(mem.priority(0) > 0.0);
}

TEST_CASE("update_priorities: routes through batch slots") {
    std::mt19937_64 rng(11);
    PrioritizedMemory demo(8, false);
    PrioritizedMemory agent(8, true);
    demo.push(make_transition(0));
    agent.push(make_transition(1));
    SampledBatch b = sample_mixed(demo, agent, 2, 0.5, 0.4, rng);
    std::vector<double> tds(b.slots.size(), 5.0);
    update_priorities(demo, agent, b, tds);
    const double expect = std::pow(5.0 + 1e-3, 0.6);
    CHECK(demo.priority(0) == doctest::Approx(expect));
    CHECK(agent.priority(0) == doctest::Approx(expect));
}

TEST_CASE("build_nstep: terminal-reward example gives the exact returns") {
    StateVector s0 = {0.0f}, s1 = {1.0f}, s2 = {2.0f}, sf = {3.0f};
    std::vector<EpisodeStep> ep = {{s0, 4, 0.0}, {s1, 5, 0.0}, {s2, 6, 1.0}};
    auto ts = build_nstep(ep, sf, 3, 0.99);
    REQUIRE(ts.size() == 3);
    CHECK(ts[0].ret == 0.99 * 0.99);
    CHECK(ts[0].ret == doctest::Approx(0.9801).epsilon(1e-15));
    CHECK(ts[1].ret == 0.99);
    CHECK(ts[2].ret == 1.0);
    for (const Transition& t : ts) {
        CHECK(t.terminal);
        CHECK(t.s_next == sf);
    }
    CHECK(ts[0].steps == 3);
    CHECK(ts[1].steps == 2);
    CHECK(ts[2].steps == 1);
    CHECK(ts[0].a == 4);
}

TEST_CASE("build_nstep: long episode windows stop at the boundary") {
    std::vector<EpisodeStep> ep;
    for (int t = 0; t < 7; ++t) ep.push_back({{float(t)}, t, double(t)});
    StateVector sf = {100.0f};
    auto ts = build_nstep(ep, sf, 3, 0.5);
    REQUIRE(ts.size() == 7);
    // Early windows span the full n steps and bootstrap from within the
    // episode.
    CHECK(ts[0].steps == 3);
    CHECK_FALSE(ts[0].terminal);
    CHECK(ts[0].s_next == ep[3].s);
    CHECK(ts[0].ret == doctest::Approx(0.0 + 0.5 * 1.0 + 0.25 * 2.0));
    CHECK(ts[3].ret == doctest::Approx(3.0 + 0.5 * 4.0 + 0.25 * 5.0));
    // The last windows shrink and become terminal.
    CHECK(ts[5].steps == 2);
    CHECK(ts[5].terminal);
    CHECK(ts[5].s_next == sf);
    CHECK(ts[5].ret == doctest::Approx(5.0 + 0.5 * 6.0));
    CHECK(ts[6].steps == 1);
    CHECK(ts[6].ret == 6.0);
}

TEST_CASE("transitions persist and round trip") {
    std::mt19937_64 rng(13);
    const int g = 4;
    std::vector<Transition> ts;
    for (int k = 0; k < 5; ++k) {
        Transition t;
        t.s.assign(state_size(g), 0.0f);
        t.s_next.assign(state_size(g), 0.0f);
        for (auto& v : t.s) v = float(rng() % 7) / 7.0f;
        for (auto& v : t.s_next) v = float(rng() % 7) / 7.0f;
        t.a = int(rng() % action_space(g));
        t.ret = double(k) * 0.33;
        t.steps = 1 + int(rng() % 3);
        t.terminal = k == 4;
        t.is_demo = true;
        ts.push_back(std::move(t));
    }
    const std::string path =
        (std::filesystem::temp_directory_path() / "spartq_demo.bin").string();
    save_transitions(ts, g, path);
    auto back = load_transitions(path, g);
    REQUIRE(back.size() == ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        CHECK(back[k].s == ts[k].s);
        CHECK(back[k].s_next == ts[k].s_next);
        CHECK(back[k].a == ts[k].a);
        CHECK(back[k].ret == ts[k].ret);
        CHECK(back[k].steps == ts[k].steps);
        CHECK(back[k].terminal == ts[k].terminal);
        CHECK(back[k].is_demo == ts[k].is_demo);
    }
    // Grid mismatch is an error.
    CHECK_THROWS_AS(load_transitions(path, 5), std::runtime_error);
    std::filesystem::remove(path);
}
