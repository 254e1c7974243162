#include "spartq/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace spartq {

void TrainConfig::validate() const {
    if (g < 2) throw std::invalid_argument("config: g must be >= 2");
    if (m < 2) throw std::invalid_argument("config: m must be >= 2");
    if (eps_r < 0 || eps_s < 0 || eps_r + eps_s > 1.0)
        throw std::invalid_argument("config: need eps_r, eps_s >= 0 and eps_r + eps_s <= 1");
    if (rho < 0 || rho > 1) throw std::invalid_argument("config: rho must be in [0,1]");
    if (batch < 1) throw std::invalid_argument("config: batch must be >= 1");
    if (n_step < 1) throw std::invalid_argument("config: n_step must be >= 1");
    if (gamma <= 0 || gamma > 1) throw std::invalid_argument("config: gamma must be in (0,1]");
    if (cost.prune_factor <= 1.0) throw std::invalid_argument("config: prune_factor must be > 1");
}

std::vector<int> TrainConfig::net_dims() const {
    return {static_cast<int>(state_size(g)), 1200, 600, action_space(g)};
}

namespace {

Eigen::MatrixXf states_to_matrix(const std::vector<const Transition*>& items,
                                 bool next_state) {
    const std::size_t dim = next_state ? items[0]->s_next.size() : items[0]->s.size();
    Eigen::MatrixXf x(dim, items.size());
    for (std::size_t k = 0; k < items.size(); ++k) {
        const StateVector& s = next_state ? items[k]->s_next : items[k]->s;
        for (std::size_t r = 0; r < dim; ++r) x(r, k) = s[r];
    }
    return x;
}

// Masked argmax of a Q column; ties -> lowest index. Returns -1 when no
// action is valid.
int masked_argmax(const Eigen::Ref<const Eigen::VectorXf>& q,
                  const std::vector<std::uint8_t>& mask) {
    int best = -1;
    for (int a = 0; a < q.size(); ++a)
        if (mask[a] && (best < 0 || q(a) > q(best))) best = a;
    return best;
}

}  // namespace

std::pair<LossBreakdown, GradientSet> compute_losses(const SampledBatch& batch, const Mlp& main,
                                                     const Mlp& target, const TrainConfig& cfg) {
    if (batch.items.empty()) throw std::invalid_argument("compute_losses: empty batch");
    const int B = static_cast<int>(batch.items.size());

    const Eigen::MatrixXf x = states_to_matrix(batch.items, false);
    const Eigen::MatrixXf q_main = main.forward(x);

    // Bootstrap targets from the target network, valid actions only.
    std::vector<int> boot(B, -1);
    std::vector<int> nonterm;
    for (int k = 0; k < B; ++k)
        if (!batch.items[k]->terminal) nonterm.push_back(k);
    Eigen::MatrixXf q_next;
    if (!nonterm.empty()) {
        std::vector<const Transition*> nt;
        for (int k : nonterm) nt.push_back(batch.items[k]);
        q_next = target.forward(states_to_matrix(nt, true));
    }

    LossBreakdown loss;
    loss.td_errors.resize(B, 0.0);
    Eigen::MatrixXf upstream = Eigen::MatrixXf::Zero(q_main.rows(), B);

    for (std::size_t nk = 0; nk < nonterm.size(); ++nk) {
        const int k = nonterm[nk];
        const auto mask = valid_mask_from_state(batch.items[k]->s_next, cfg.g);
        boot[k] = masked_argmax(q_next.col(nk), mask);
    }

    for (int k = 0; k < B; ++k) {
        const Transition& tr = *batch.items[k];
        double target_value = tr.ret;
        if (!tr.terminal && boot[k] >= 0) {
            const int nk = static_cast<int>(std::find(nonterm.begin(), nonterm.end(), k) -
                                            nonterm.begin());
            target_value += std::pow(cfg.gamma, tr.steps) * double(q_next(boot[k], nk));
        }
        const double td = target_value - double(q_main(tr.a, k));
        loss.td_errors[k] = td;
        const double w = batch.weights[k];
        loss.l_n += w * td * td;
        upstream(tr.a, k) += static_cast<float>(cfg.lambda1 * (-2.0) * w * td);

        if (tr.is_demo) {
            const auto mask = valid_mask_from_state(tr.s, cfg.g);
            int best = -1;
            double best_val = 0.0;
            for (int a = 0; a < q_main.rows(); ++a) {
                if (!mask[a]) continue;
                const double val = double(q_main(a, k)) + (a == tr.a ? 0.0 : cfg.margin);
                if (best < 0 || val > best_val) {
                    best = a;
                    best_val = val;
                }
            }
            if (best >= 0) {
                loss.l_c += best_val - double(q_main(tr.a, k));
                if (best != tr.a) {
                    upstream(best, k) += static_cast<float>(cfg.lambda2);
                    upstream(tr.a, k) -= static_cast<float>(cfg.lambda2);
                }
            }
        }
    }

    GradientSet grads = backward(main, x, upstream);
    for (std::size_t l = 0; l < main.layer_count(); ++l) {
        loss.l_l2 += double(main.weights[l].squaredNorm());
        grads.d_weights[l] += 2.0f * static_cast<float>(cfg.lambda3) * main.weights[l];
    }
    loss.total = cfg.lambda1 * loss.l_n + cfg.lambda2 * loss.l_c + cfg.lambda3 * loss.l_l2;
    return {std::move(loss), std::move(grads)};
}

CutAction greedy_action(const StateVector& s, const std::vector<std::uint8_t>& mask,
                        const Mlp& main, int g) {
    Eigen::MatrixXf x(s.size(), 1);
    for (std::size_t r = 0; r < s.size(); ++r) x(r, 0) = s[r];
    const Eigen::MatrixXf q = main.forward(x);
    const int idx = masked_argmax(q.col(0), mask);
    if (idx < 0) throw std::logic_error("greedy_action: no valid action");
    return index_to_action(idx, g);
}

CutAction select_action(const StateVector& s, const std::vector<std::uint8_t>& mask,
                        const Mlp& main, const TrainConfig& cfg, std::mt19937_64& rng) {
    std::vector<int> valid;
    for (int a = 0; a < static_cast<int>(mask.size()); ++a)
        if (mask[a]) valid.push_back(a);
    if (valid.empty()) throw std::logic_error("select_action: no valid action");

    // Draw order per run: one branch draw, then at most one index draw.
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double u = uni(rng);
    const double eps_s = cfg.no_grid_shift ? 0.0 : cfg.eps_s;
    if (u < cfg.eps_r) {
        std::uniform_int_distribution<std::size_t> pick(0, valid.size() - 1);
        return index_to_action(valid[pick(rng)], cfg.g);
    }
    const CutAction greedy = greedy_action(s, mask, main, cfg.g);
    if (u < cfg.eps_r + eps_s) {
        const CutAction shifts[4] = {{greedy.i - 1, greedy.j, greedy.dir},
                                     {greedy.i + 1, greedy.j, greedy.dir},
                                     {greedy.i, greedy.j - 1, greedy.dir},
                                     {greedy.i, greedy.j + 1, greedy.dir}};
        std::vector<CutAction> candidates;
        for (const CutAction& c : shifts) {
            if (c.i < 0 || c.i >= cfg.g || c.j < 0 || c.j >= cfg.g) continue;
            if (mask[action_to_index(c, cfg.g)]) candidates.push_back(c);
        }
        if (candidates.empty()) return greedy;
        std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
        return candidates[pick(rng)];
    }
    return greedy;
}

namespace {

// Greedy rollout from the initial state; returns the terminal partitions.
PartitionSet greedy_rollout(const CellHistogram& hist, const TrainConfig& cfg, const Mlp& main) {
    GridSpec grid{{}, cfg.g};
    // bbox is irrelevant for the rollout; encode_state uses counts only.
    EnvState env = make_env(grid, hist);
    for (int t = 0; t < cfg.m - 1; ++t) {
        const StateVector s = encode_state(env);
        const CutAction a = greedy_action(s, valid_mask(env), main, cfg.g);
        env = step(env, a, cfg.m).first;
    }
    return env.ps;
}

double anneal_beta(const TrainConfig& cfg, long step, long total_steps) {
    if (total_steps <= 0) return 1.0;
    const double f = std::min(1.0, double(step) / double(total_steps));
    return cfg.beta_start + (1.0 - cfg.beta_start) * f;
}

}  // namespace

std::vector<Transition> demo_transitions_for(const DemoEpisode& demo, const CellHistogram& hist,
                                             const TrainConfig& cfg) {
    EnvState env = make_env(demo.final.grid, hist);
    std::vector<EpisodeStep> steps;
    for (std::size_t t = 0; t < demo.actions.size(); ++t) {
        EpisodeStep st;
        st.s = encode_state(env);
        st.a = action_to_index(demo.actions[t], cfg.g);
        st.r = (t + 1 == demo.actions.size()) ? 1.0 : 0.0;
        env = step(env, demo.actions[t], static_cast<int>(demo.actions.size()) + 1).first;
        steps.push_back(std::move(st));
    }
    std::vector<Transition> out = build_nstep(steps, encode_state(env), cfg.n_step, cfg.gamma);
    for (Transition& t : out) t.is_demo = true;
    return out;
}

PretrainResult pretrain(const DemoEpisode& demo, const std::vector<Transition>& demo_transitions,
                        const CellHistogram& hist, const TrainConfig& cfg, Mlp& main, Mlp& target,
                        AdamState& opt, PrioritizedMemory& demo_mem, std::mt19937_64& rng) {
    (void)demo_transitions;  // already in demo_mem; kept for the call contract
    PrioritizedMemory empty_agent(1, true, cfg.per);
    PretrainResult res;
    for (int e = 1; e <= cfg.pretrain_episodes; ++e) {
        res.episodes_run = e;
        if (e == 1 || (e - 1) % cfg.rollout_check == 0) {
            if (greedy_rollout(hist, cfg, main).bounds == demo.final.bounds) {
                res.converged = true;
                return res;
            }
        }
        const double beta = anneal_beta(cfg, e, cfg.pretrain_episodes);
        SampledBatch batch = sample_mixed(demo_mem, empty_agent, cfg.batch, cfg.rho, beta, rng);
        auto [loss, grads] = compute_losses(batch, main, target, cfg);
        adam_step(main, grads, opt);
        update_priorities(demo_mem, empty_agent, batch, loss.td_errors);
        if (e % cfg.target_sync == 0) sync_target(main, target);
    }
    res.converged = greedy_rollout(hist, cfg, main).bounds == demo.final.bounds;
    return res;
}

TrainResult train(const Dataset& data, const CellHistogram& hist, const Workload& workload,
                  const TrainConfig& cfg, const DemoEpisode& demo,
                  const std::vector<Transition>& demo_transitions, Mlp& main, AdamState& opt,
                  const TrainHooks& hooks) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed);
    Mlp target = main;

    PrioritizedMemory demo_mem(cfg.demo_capacity, false, cfg.per);
    PrioritizedMemory agent_mem(cfg.agent_capacity, true, cfg.per);
    for (const Transition& t : demo_transitions) demo_mem.push(t);

    TrainResult res;
    if (!cfg.no_pretrain) {
        res.pretrain = pretrain(demo, demo_transitions, hist, cfg, main, target, opt, demo_mem, rng);
        sync_target(main, target);
    }

    BestTracker best{demo.final, workload_cost(data, demo.final, workload, cfg.cost)};
    const GridSpec grid = demo.final.grid;
    const long total_steps = long(cfg.episodes) * (cfg.m - 1);
    long global_step = 0;

    for (int e = 1; e <= cfg.episodes; ++e) {
        EnvState env = make_env(grid, hist);
        std::vector<EpisodeStep> steps;
        EpisodeLog elog;
        elog.episode = e;

        for (int t = 1; t <= cfg.m - 1; ++t) {
            EpisodeStep st;
            st.s = encode_state(env);
            CutAction a{};
            std::optional<CutAction> forced;
            if (hooks.force_action) forced = hooks.force_action(e, t);
            if (forced) {
                a = *forced;
            } else {
                a = select_action(st.s, valid_mask(env), main, cfg, rng);
            }
            if (hooks.on_action) hooks.on_action(e, t, a);
            st.a = action_to_index(a, cfg.g);
            st.r = 0.0;
            auto [next, terminal] = step(env, a, cfg.m);
            env = std::move(next);
            steps.push_back(std::move(st));

            if (terminal) {
                CostReport report = cfg.no_prune
                                        ? workload_cost(data, env.ps, workload, cfg.cost)
                                        : pruned_workload_cost(data, env.ps, workload, cfg.cost,
                                                               best.best_report);
                double reward;
                if (report.pruned) {
                    reward = cfg.cost.prune_reward;
                } else {
                    ++res.full_evaluations;
                    reward = compute_reward(best.best_report, report, workload);
                }
                steps.back().r = reward;
                std::vector<Transition> trans =
                    build_nstep(steps, encode_state(env), cfg.n_step, cfg.gamma);
                if (!report.pruned && reward > 1.0) {
                    for (Transition& tr : trans) {
                        tr.is_demo = true;
                        demo_mem.push(std::move(tr));
                    }
                    best.best = env.ps;
                    best.best_report = report;
                } else {
                    for (Transition& tr : trans) agent_mem.push(std::move(tr));
                }
                elog.reward = reward;
                elog.pruned = report.pruned;
                elog.weighted_cost = report.pruned ? -1.0 : report.weighted_total(workload);
            }

            // One learner update per environment step.
            const double beta = anneal_beta(cfg, global_step, total_steps);
            SampledBatch batch = sample_mixed(demo_mem, agent_mem, cfg.batch, cfg.rho, beta, rng);
            auto [loss, grads] = compute_losses(batch, main, target, cfg);
            adam_step(main, grads, opt);
            update_priorities(demo_mem, agent_mem, batch, loss.td_errors);
            ++global_step;
            if (global_step % cfg.target_sync == 0) sync_target(main, target);
            elog.l_n = loss.l_n;
            elog.l_c = loss.l_c;
            elog.l_l2 = loss.l_l2;
        }

        elog.best_cost = best.best_report.weighted_total(workload);
        res.log.push_back(elog);
        if (hooks.on_episode) hooks.on_episode(elog, main, opt);
    }
    res.best = std::move(best);
    return res;
}

EvalTable evaluate_all(const Dataset& data, const CellHistogram& hist, const Workload& workload,
                       const TrainConfig& cfg, const PartitionSet& learned) {
    const GridSpec grid = learned.grid;
    EvalTable table;
    auto add_row = [&](const std::string& name, const PartitionSet& ps) {
        CostReport rep = workload_cost(data, ps, workload, cfg.cost);
        EvalRow row;
        row.method = name;
        row.per_query = rep.per_query;
        row.weighted_total = rep.weighted_total(workload);
        table.rows.push_back(std::move(row));
    };
    add_row("Uniform", uniform_actions(grid, cfg.m).final);
    add_row("Quad", quadtree_actions(hist, grid, cfg.m).final);
    add_row("KDB", kdb_actions(hist, grid, cfg.m).final);
    add_row("Demo", kdb_actions(hist, grid, cfg.m).final);  // demo source is KDB
    add_row("Learned", learned);

    std::vector<int> order(table.rows.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = static_cast<int>(k);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return table.rows[a].weighted_total < table.rows[b].weighted_total;
    });
    table.best_row = order[0];
    table.second_row = order.size() > 1 ? order[1] : -1;
    return table;
}

std::string eval_table_text(const EvalTable& t, const Workload& w) {
    std::ostringstream out;
    out << "method     ";
    for (std::size_t q = 0; q < w.queries.size(); ++q)
        out << "  eps=" << w.queries[q].epsilon << "(f=" << w.queries[q].frequency << ")";
    out << "  weighted_total\n";
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const EvalRow& row = t.rows[k];
        std::string name = row.method;
        if (static_cast<int>(k) == t.best_row) name += " *best*";
        if (static_cast<int>(k) == t.second_row) name += " *2nd*";
        out << name;
        for (std::size_t pad = name.size(); pad < 16; ++pad) out << ' ';
        for (double c : row.per_query) out << "  " << c;
        out << "  " << row.weighted_total << "\n";
    }
    return out.str();
}

std::string eval_table_csv(const EvalTable& t, const Workload& w) {
    std::ostringstream out;
    out << "method";
    for (std::size_t q = 0; q < w.queries.size(); ++q) out << ",query" << q;
    out << ",weighted_total,rank\n";
    for (std::size_t k = 0; k < t.rows.size(); ++k) {
        const EvalRow& row = t.rows[k];
        out << row.method;
        for (double c : row.per_query) out << ',' << c;
        out << ',' << row.weighted_total << ',';
        if (static_cast<int>(k) == t.best_row)
            out << "best";
        else if (static_cast<int>(k) == t.second_row)
            out << "second";
        out << '\n';
    }
    return out.str();
}

std::string training_log_csv(const std::vector<EpisodeLog>& log) {
    std::ostringstream out;
    out << "episode,reward,weighted_cost,pruned,l_n,l_c,l_l2,best_cost\n";
    for (const EpisodeLog& e : log) {
        out << e.episode << ',' << e.reward << ',' << e.weighted_cost << ',' << (e.pruned ? 1 : 0)
            << ',' << e.l_n << ',' << e.l_c << ',' << e.l_l2 << ',' << e.best_cost << '\n';
    }
    return out.str();
}

}  // namespace spartq
