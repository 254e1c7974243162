#include "spartq/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spartq {

std::map<std::string, std::string> parse_kv_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string s = line;
        s.erase(std::remove_if(s.begin(), s.end(), ::isspace), s.end());
        if (s.empty() || s[0] == '#') continue;
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0)
            throw std::runtime_error("config: malformed line " + std::to_string(lineno) + ": '" +
                                     line + "'");
        kv[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return kv;
}

std::map<std::string, std::string> parse_kv_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_kv_text(ss.str());
}

namespace {

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::runtime_error("config: bad boolean value '" + v + "'");
}

}  // namespace

void apply_config_key(TrainConfig& cfg, const std::string& key, const std::string& value) {
    try {
        if (key == "grid") cfg.g = std::stoi(value);
        else if (key == "m") cfg.m = std::stoi(value);
        else if (key == "episodes") cfg.episodes = std::stoi(value);
        else if (key == "pretrain_episodes") cfg.pretrain_episodes = std::stoi(value);
        else if (key == "target_sync") cfg.target_sync = std::stoi(value);
        else if (key == "rollout_check") cfg.rollout_check = std::stoi(value);
        else if (key == "eps_r") cfg.eps_r = std::stod(value);
        else if (key == "eps_s") cfg.eps_s = std::stod(value);
        else if (key == "batch") cfg.batch = std::stoi(value);
        else if (key == "rho") cfg.rho = std::stod(value);
        else if (key == "n_step") cfg.n_step = std::stoi(value);
        else if (key == "gamma") cfg.gamma = std::stod(value);
        else if (key == "lambda1") cfg.lambda1 = std::stod(value);
        else if (key == "lambda2") cfg.lambda2 = std::stod(value);
        else if (key == "lambda3") cfg.lambda3 = std::stod(value);
        else if (key == "margin") cfg.margin = std::stod(value);
        else if (key == "eta") cfg.eta = std::stod(value);
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "agent_capacity") cfg.agent_capacity = std::stoull(value);
        else if (key == "demo_capacity") cfg.demo_capacity = std::stoull(value);
        else if (key == "per_alpha") cfg.per.alpha = std::stod(value);
        else if (key == "per_eps") cfg.per.eps_p = std::stod(value);
        else if (key == "beta_start") cfg.beta_start = std::stod(value);
        else if (key == "c_point") cfg.cost.c_point = std::stod(value);
        else if (key == "c_pair") cfg.cost.c_pair = std::stod(value);
        else if (key == "c_shuffle") cfg.cost.c_shuffle = std::stod(value);
        else if (key == "prune_factor") cfg.cost.prune_factor = std::stod(value);
        else if (key == "prune_reward") cfg.cost.prune_reward = std::stod(value);
        else if (key == "local_index") {
            if (parse_bool(value)) cfg.cost = CostParams::with_local_index();
        }
        else if (key == "no_pretrain") cfg.no_pretrain = parse_bool(value);
        else if (key == "no_grid_shift") cfg.no_grid_shift = parse_bool(value);
        else if (key == "no_prune") cfg.no_prune = parse_bool(value);
        else throw std::runtime_error("config: unknown key '" + key + "'");
    } catch (const std::invalid_argument&) {
        throw std::runtime_error("config: bad value '" + value + "' for key '" + key + "'");
    }
}

void apply_config_map(TrainConfig& cfg, const std::map<std::string, std::string>& kv) {
    for (const auto& [k, v] : kv) apply_config_key(cfg, k, v);
}

std::string serialize_config(const TrainConfig& cfg) {
    std::ostringstream out;
    out.precision(17);
    out << "grid = " << cfg.g << "\n"
        << "m = " << cfg.m << "\n"
        << "episodes = " << cfg.episodes << "\n"
        << "pretrain_episodes = " << cfg.pretrain_episodes << "\n"
        << "target_sync = " << cfg.target_sync << "\n"
        << "rollout_check = " << cfg.rollout_check << "\n"
        << "eps_r = " << cfg.eps_r << "\n"
        << "eps_s = " << cfg.eps_s << "\n"
        << "batch = " << cfg.batch << "\n"
        << "rho = " << cfg.rho << "\n"
        << "n_step = " << cfg.n_step << "\n"
        << "gamma = " << cfg.gamma << "\n"
        << "lambda1 = " << cfg.lambda1 << "\n"
        << "lambda2 = " << cfg.lambda2 << "\n"
        << "lambda3 = " << cfg.lambda3 << "\n"
        << "margin = " << cfg.margin << "\n"
        << "eta = " << cfg.eta << "\n"
        << "seed = " << cfg.seed << "\n"
        << "agent_capacity = " << cfg.agent_capacity << "\n"
        << "demo_capacity = " << cfg.demo_capacity << "\n"
        << "per_alpha = " << cfg.per.alpha << "\n"
        << "per_eps = " << cfg.per.eps_p << "\n"
        << "beta_start = " << cfg.beta_start << "\n"
        << "c_point = " << cfg.cost.c_point << "\n"
        << "c_pair = " << cfg.cost.c_pair << "\n"
        << "c_shuffle = " << cfg.cost.c_shuffle << "\n"
        << "prune_factor = " << cfg.cost.prune_factor << "\n"
        << "prune_reward = " << cfg.cost.prune_reward << "\n"
        << "no_pretrain = " << (cfg.no_pretrain ? 1 : 0) << "\n"
        << "no_grid_shift = " << (cfg.no_grid_shift ? 1 : 0) << "\n"
        << "no_prune = " << (cfg.no_prune ? 1 : 0) << "\n";
    return out.str();
}

}  // namespace spartq
