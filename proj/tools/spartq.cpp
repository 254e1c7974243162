// spartq — learned spatial data partitioning toolkit.
//
// Subcommands: gen | baseline | demo | train | eval | render.
// Every command is deterministic given its flags and input files; outputs
// are written atomically and each run drops a fully resolved config next
// to its main artifact.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "spartq/baselines.hpp"
#include "spartq/config.hpp"
#include "spartq/cost.hpp"
#include "spartq/geometry.hpp"
#include "spartq/io.hpp"
#include "spartq/mlp.hpp"
#include "spartq/render.hpp"
#include "spartq/trainer.hpp"

namespace {

using namespace spartq;

struct CommonArgs {
    std::string data;
    std::string workload;
    std::string config;
    std::string out;
    TrainConfig cfg;
    std::map<std::string, std::string> flag_overrides;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config, "flat key=value config file (flags win)");
    auto track = [&args](const std::string& key) {
        return [&args, key](const std::string& v) { args.flag_overrides[key] = v; };
    };
    cmd->add_option_function<std::string>("--grid", track("grid"), "grid cells per side");
    cmd->add_option_function<std::string>("--m", track("m"), "number of computers / partitions");
    cmd->add_option_function<std::string>("--seed", track("seed"), "RNG seed");
    cmd->add_option_function<std::string>("--episodes", track("episodes"), "training episodes");
}

// Defaults <- config file <- command-line flags.
void resolve_config(CommonArgs& args) {
    if (!args.config.empty()) apply_config_map(args.cfg, parse_kv_file(args.config));
    for (const auto& [k, v] : args.flag_overrides) apply_config_key(args.cfg, k, v);
}

void emit_resolved_config(const CommonArgs& args) {
    if (args.out.empty()) return;
    write_file_atomic(args.out + ".config", serialize_config(args.cfg));
}

GridSpec grid_for(const Dataset& d, int g) { return GridSpec{tight_bbox(d), g}; }

int run_gen(CommonArgs& args, const std::string& kind, std::size_t n, int clusters,
            double sigma) {
    resolve_config(args);
    SyntheticParams params;
    SyntheticKind k;
    if (kind == "uniform") {
        k = SyntheticKind::Uniform;
    } else if (kind == "gaussian") {
        k = SyntheticKind::GaussianMixture;
        // Deterministic cluster layout: centers on a seeded jittered ring.
        std::mt19937_64 rng(args.cfg.seed + 0x9e3779b97f4a7c15ULL);
        std::uniform_real_distribution<double> u(0.25, 0.75);
        for (int c = 0; c < clusters; ++c)
            params.clusters.push_back(GaussianCluster{1.0 / clusters, u(rng), u(rng), sigma});
    } else {
        throw CLI::ValidationError("--kind must be uniform or gaussian");
    }
    Dataset d = gen_synthetic(k, n, args.cfg.seed, params);
    save_points_csv(d, args.out);
    emit_resolved_config(args);
    std::cout << "wrote " << d.count() << " points to " << args.out << "\n";
    return 0;
}

int run_baseline(CommonArgs& args, const std::string& method, bool with_actions) {
    resolve_config(args);
    Dataset d = load_points_csv(args.data);
    GridSpec grid = grid_for(d, args.cfg.g);
    CellHistogram hist = build_histogram(d, grid);
    DemoEpisode ep = baseline_actions(baseline_from_name(method), hist, grid, args.cfg.m);
    write_file_atomic(args.out, with_actions ? demo_to_json(ep) : partition_to_json(ep.final));
    emit_resolved_config(args);
    std::cout << "wrote " << ep.final.rects.size() << " partitions to " << args.out << "\n";
    return 0;
}

int run_demo(CommonArgs& args, const std::string& method) {
    resolve_config(args);
    Dataset d = load_points_csv(args.data);
    Workload w = load_workload(args.workload);  // validated here; used by train
    (void)w;
    GridSpec grid = grid_for(d, args.cfg.g);
    CellHistogram hist = build_histogram(d, grid);
    DemoEpisode ep = baseline_actions(baseline_from_name(method), hist, grid, args.cfg.m);
    std::vector<Transition> trans = demo_transitions_for(ep, hist, args.cfg);
    write_file_atomic(args.out, demo_to_json(ep));
    save_transitions(trans, args.cfg.g, args.out + ".demo.bin");
    emit_resolved_config(args);
    std::cout << "wrote demo partitions to " << args.out << " and " << trans.size()
              << " transitions to " << args.out << ".demo.bin\n";
    return 0;
}

int run_train(CommonArgs& args, const std::string& demo_json, const std::string& demo_bin,
              int snapshot_every) {
    resolve_config(args);
    args.cfg.validate();
    Dataset d = load_points_csv(args.data);
    Workload w = load_workload(args.workload);
    GridSpec grid = grid_for(d, args.cfg.g);
    CellHistogram hist = build_histogram(d, grid);

    DemoEpisode demo;
    std::vector<Transition> demo_trans;
    if (!demo_json.empty()) {
        demo = demo_from_json(read_file(demo_json));
        if (demo.final.grid.g != args.cfg.g)
            throw std::runtime_error("demo partition grid does not match --grid");
        demo_trans = demo_bin.empty() ? demo_transitions_for(demo, hist, args.cfg)
                                      : load_transitions(demo_bin, args.cfg.g);
    } else {
        demo = kdb_actions(hist, grid, args.cfg.m);
        demo_trans = demo_transitions_for(demo, hist, args.cfg);
    }

    Mlp net(args.cfg.net_dims(), args.cfg.seed);
    AdamState opt(net);
    opt.eta = static_cast<float>(args.cfg.eta);

    TrainHooks hooks;
    hooks.on_episode = [&](const EpisodeLog& log, const Mlp& m, const AdamState& o) {
        if (snapshot_every > 0 && log.episode % snapshot_every == 0)
            save_checkpoint(m, o, args.out + ".snapshot.ckpt");
    };

    TrainResult res;
    try {
        res = train(d, hist, w, args.cfg, demo, demo_trans, net, opt, hooks);
    } catch (const std::exception& e) {
        save_checkpoint(net, opt, args.out + ".aborted.ckpt");
        std::cerr << "training aborted (" << e.what() << "); state saved to " << args.out
                  << ".aborted.ckpt\n";
        throw;
    }

    save_checkpoint(net, opt, args.out + ".ckpt");
    write_file_atomic(args.out + ".best.json", partition_to_json(res.best.best));
    write_file_atomic(args.out + ".log.csv", training_log_csv(res.log));
    emit_resolved_config(args);
    std::cout << "pretrain: " << (res.pretrain.converged ? "converged" : "not converged") << " in "
              << res.pretrain.episodes_run << " episodes\n"
              << "full evaluations: " << res.full_evaluations << " / " << args.cfg.episodes << "\n"
              << "best weighted cost: " << res.best.best_report.weighted_total(w) << "\n"
              << "artifacts: " << args.out << ".ckpt, " << args.out << ".best.json, " << args.out
              << ".log.csv\n";
    return 0;
}

int run_eval(CommonArgs& args, const std::string& partition_path) {
    resolve_config(args);
    Dataset d = load_points_csv(args.data);
    Workload w = load_workload(args.workload);
    PartitionSet learned = partition_from_json(read_file(partition_path));
    if (learned.grid.g != args.cfg.g)
        throw std::runtime_error("partition grid " + std::to_string(learned.grid.g) +
                                 " does not match --grid " + std::to_string(args.cfg.g));
    CellHistogram hist = build_histogram(d, learned.grid);
    EvalTable table = evaluate_all(d, hist, w, args.cfg, learned);
    std::cout << eval_table_text(table, w);
    if (!args.out.empty()) {
        write_file_atomic(args.out, eval_table_csv(table, w));
        emit_resolved_config(args);
    }
    return 0;
}

int run_render(CommonArgs& args, const std::string& partition_path) {
    resolve_config(args);
    PartitionSet ps = partition_from_json(read_file(partition_path));
    std::optional<Dataset> d;
    if (!args.data.empty()) d = load_points_csv(args.data);
    write_file_atomic(args.out, render_svg(ps, d ? &*d : nullptr));
    std::cout << "wrote " << args.out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spartq: learned spatial data partitioning"};
    app.require_subcommand(1);

    CommonArgs args;

    auto* gen = app.add_subcommand("gen", "generate a synthetic points CSV");
    std::string gen_kind = "gaussian";
    std::size_t gen_n = 10000;
    int gen_clusters = 3;
    double gen_sigma = 0.06;
    gen->add_option("--kind", gen_kind, "uniform | gaussian");
    gen->add_option("--n", gen_n, "number of points")->check(CLI::PositiveNumber);
    gen->add_option("--clusters", gen_clusters, "gaussian mixture clusters");
    gen->add_option("--sigma", gen_sigma, "cluster stddev in unit coordinates");
    gen->add_option("--out", args.out, "output CSV")->required();
    add_common(gen, args);

    auto* baseline = app.add_subcommand("baseline", "run a baseline partitioner");
    std::string method = "kdb";
    bool with_actions = false;
    baseline->add_option("--method", method, "uniform | quad | kdb");
    baseline->add_flag("--actions", with_actions, "include the action sequence in the JSON");
    baseline->add_option("--data", args.data, "points CSV")->required();
    baseline->add_option("--out", args.out, "partition JSON")->required();
    add_common(baseline, args);

    auto* demo = app.add_subcommand("demo", "generate demo partitions and transitions");
    std::string demo_method = "kdb";
    demo->add_option("--method", demo_method, "uniform | quad | kdb (default kdb)");
    demo->add_option("--data", args.data, "points CSV")->required();
    demo->add_option("--workload", args.workload, "workload file")->required();
    demo->add_option("--out", args.out, "demo JSON (transitions land at <out>.demo.bin)")
        ->required();
    add_common(demo, args);

    auto* train_cmd = app.add_subcommand("train", "pre-train and main-train");
    std::string demo_json, demo_bin;
    int snapshot_every = 100;
    train_cmd->add_option("--data", args.data, "points CSV")->required();
    train_cmd->add_option("--workload", args.workload, "workload file")->required();
    train_cmd->add_option("--demo", demo_json, "demo JSON from the demo command (default: KDB)");
    train_cmd->add_option("--demo-transitions", demo_bin, "demo transitions binary");
    train_cmd->add_option("--snapshot-every", snapshot_every, "checkpoint every N episodes");
    train_cmd->add_option("--out", args.out, "output stem")->required();
    train_cmd->add_flag_function("--no-pretrain",
                                 [&](std::int64_t) { args.flag_overrides["no_pretrain"] = "1"; },
                                 "skip the pre-training phase");
    train_cmd->add_flag_function("--no-grid-shift",
                                 [&](std::int64_t) { args.flag_overrides["no_grid_shift"] = "1"; },
                                 "disable the grid-shift exploration branch");
    train_cmd->add_flag_function("--no-prune",
                                 [&](std::int64_t) { args.flag_overrides["no_prune"] = "1"; },
                                 "always run the full workload evaluation");
    add_common(train_cmd, args);

    auto* eval_cmd = app.add_subcommand("eval", "comparison table over all methods");
    std::string partition_path;
    eval_cmd->add_option("--data", args.data, "points CSV")->required();
    eval_cmd->add_option("--workload", args.workload, "workload file")->required();
    eval_cmd->add_option("--partition", partition_path, "learned partition JSON")->required();
    eval_cmd->add_option("--out", args.out, "CSV output (table prints to stdout)");
    add_common(eval_cmd, args);

    auto* render = app.add_subcommand("render", "SVG of partitions over the data");
    std::string render_partition;
    render->add_option("--partition", render_partition, "partition JSON")->required();
    render->add_option("--data", args.data, "points CSV (optional)");
    render->add_option("--out", args.out, "output SVG")->required();
    add_common(render, args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;  // usage errors exit 2
    }

    try {
        if (gen->parsed()) return run_gen(args, gen_kind, gen_n, gen_clusters, gen_sigma);
        if (baseline->parsed()) return run_baseline(args, method, with_actions);
        if (demo->parsed()) return run_demo(args, demo_method);
        if (train_cmd->parsed()) return run_train(args, demo_json, demo_bin, snapshot_every);
        if (eval_cmd->parsed()) return run_eval(args, partition_path);
        if (render->parsed()) return run_render(args, render_partition);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
