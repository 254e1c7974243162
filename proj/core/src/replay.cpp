#include "spartq/replay.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>

#include "spartq/io.hpp"

namespace spartq {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace

SumTree::SumTree(std::size_t capacity) : capacity_(next_pow2(std::max<std::size_t>(1, capacity))) {
    tree_.assign(2 * capacity_, 0.0);
}

void SumTree::set(std::size_t idx, double priority) {
    if (idx >= capacity_) throw std::out_of_range("SumTree::set: index out of range");
    used_ = std::max(used_, idx + 1);
    std::size_t node = capacity_ + idx;
    tree_[node] = priority;
    for (node >>= 1; node >= 1; node >>= 1) tree_[node] = tree_[2 * node] + tree_[2 * node + 1];
}

double SumTree::get(std::size_t idx) const {
    if (idx >= capacity_) throw std::out_of_range("SumTree::get: index out of range");
    return tree_[capacity_ + idx];
}

double SumTree::total() const { return tree_[1]; }

std::size_t SumTree::sample(double prefix) const {
    std::size_t node = 1;
    while (node < capacity_) {
        const double left = tree_[2 * node];
        if (prefix < left) {
            node = 2 * node;
        } else {
            prefix -= left;
            node = 2 * node + 1;
        }
    }
    return node - capacity_;
}

void SumTree::grow(std::size_t new_capacity) {
    if (new_capacity <= capacity_) return;
    SumTree bigger(new_capacity);
    for (std::size_t i = 0; i < used_; ++i) bigger.set(i, tree_[capacity_ + i]);
    *this = std::move(bigger);
}

PrioritizedMemory::PrioritizedMemory(std::size_t capacity, bool evicting, PerParams params)
    : capacity_(capacity), evicting_(evicting), params_(params), tree_(capacity) {}

void PrioritizedMemory::push(Transition t) {
    std::size_t slot;
    if (evicting_ && items_.size() >= capacity_) {
        slot = next_slot_;  // overwrite oldest
        items_[slot] = std::move(t);
        next_slot_ = (next_slot_ + 1) % capacity_;
    } else {
        slot = items_.size();
        if (slot >= tree_.capacity()) tree_.grow(2 * tree_.capacity());
        items_.push_back(std::move(t));
        if (evicting_) next_slot_ = items_.size() % capacity_;
    }
    tree_.set(slot, max_leaf_);
}

void PrioritizedMemory::update_priorities(const std::vector<std::size_t>& indices,
                                          const std::vector<double>& td_errors) {
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= items_.size())
            throw std::out_of_range("update_priorities: index out of range");
        const double p = std::pow(std::abs(td_errors[k]) + params_.eps_p, params_.alpha);
        tree_.set(indices[k], p);
        max_leaf_ = std::max(max_leaf_, p);
    }
}

SampledBatch sample_mixed(const PrioritizedMemory& demo, const PrioritizedMemory& agent,
                          int batch, double rho, double beta, std::mt19937_64& rng) {
    if (demo.empty()) throw std::invalid_argument("sample_mixed: demo memory is empty");
    int n_demo = static_cast<int>(std::ceil(rho * batch));
    int n_agent = batch - n_demo;
    if (agent.empty()) {
        n_demo = batch;
        n_agent = 0;
    }

    std::uniform_real_distribution<double> uni(0.0, 1.0);
    SampledBatch out;
    const std::size_t n_total = demo.size() + agent.size();

    auto draw = [&](const PrioritizedMemory& mem, int memory_id, int count) {
        for (int k = 0; k < count; ++k) {
            const double prefix = uni(rng) * mem.total_priority();
            const std::size_t idx = std::min(mem.sample_index(prefix), mem.size() - 1);
            out.items.push_back(&mem.at(idx));
            out.slots.emplace_back(memory_id, idx);
            const double prob = mem.priority(idx) / mem.total_priority();
            out.weights.push_back(static_cast<float>(std::pow(double(n_total) * prob, -beta)));
        }
    };
    draw(demo, 0, n_demo);
    if (n_agent > 0) draw(agent, 1, n_agent);

    const float wmax = *std::max_element(out.weights.begin(), out.weights.end());
    for (float& w : out.weights) w /= wmax;
    return out;
}

void update_priorities(PrioritizedMemory& demo, PrioritizedMemory& agent,
                       const SampledBatch& batch, const std::vector<double>& td_errors) {
    std::vector<std::size_t> demo_idx, agent_idx;
    std::vector<double> demo_td, agent_td;
    for (std::size_t k = 0; k < batch.slots.size(); ++k) {
        if (batch.slots[k].first == 0) {
            demo_idx.push_back(batch.slots[k].second);
            demo_td.push_back(td_errors[k]);
        } else {
            agent_idx.push_back(batch.slots[k].second);
            agent_td.push_back(td_errors[k]);
        }
    }
    demo.update_priorities(demo_idx, demo_td);
    agent.update_priorities(agent_idx, agent_td);
}

std::vector<Transition> build_nstep(const std::vector<EpisodeStep>& episode,
                                    const StateVector& final_state, int n, double gamma) {
    if (episode.empty()) throw std::invalid_argument("build_nstep: empty episode");
    const std::size_t T = episode.size();
    std::vector<Transition> out;
    out.reserve(T);
    for (std::size_t t = 0; t < T; ++t) {
        Transition tr;
        tr.s = episode[t].s;
        tr.a = episode[t].a;
        const std::size_t span = std::min<std::size_t>(n, T - t);
        double discount = 1.0;
        for (std::size_t k = 0; k < span; ++k) {
            tr.ret += discount * episode[t + k].r;
            discount *= gamma;
        }
        tr.steps = static_cast<int>(span);
        tr.terminal = (t + span == T);
        tr.s_next = tr.terminal ? final_state : episode[t + span].s;
        out.push_back(std::move(tr));
    }
    return out;
}

void save_transitions(const std::vector<Transition>& ts, int g, const std::string& path) {
    std::ostringstream header;
    header << "SPARTQ-DEMO v1 " << g << ' ' << ts.size() << '\n';
    std::string out = header.str();
    auto put_u32 = [&out](std::uint32_t v) {
        char b[4];
        std::memcpy(b, &v, 4);
        out.append(b, 4);
    };
    auto put_f32 = [&out](float v) {
        char b[4];
        std::memcpy(b, &v, 4);
        out.append(b, 4);
    };
    auto put_f64 = [&out](double v) {
        char b[8];
        std::memcpy(b, &v, 8);
        out.append(b, 8);
    };
    for (const Transition& t : ts) {
        put_u32(static_cast<std::uint32_t>(t.a));
        put_f64(t.ret);
        put_u32(static_cast<std::uint32_t>(t.steps));
        out.push_back(t.terminal ? 1 : 0);
        out.push_back(t.is_demo ? 1 : 0);
        for (float v : t.s) put_f32(v);
        for (float v : t.s_next) put_f32(v);
    }
    write_file_atomic(path, out);
}

std::vector<Transition> load_transitions(const std::string& path, int expected_g) {
    const std::string data = read_file(path);
    auto nl = data.find('\n');
    if (nl == std::string::npos) throw std::runtime_error("transitions file: missing header");
    std::istringstream header(data.substr(0, nl));
    std::string magic, version;
    int g = 0;
    std::size_t count = 0;
    header >> magic >> version >> g >> count;
    if (!header || magic != "SPARTQ-DEMO" || version != "v1")
        throw std::runtime_error("transitions file: bad header in " + path);
    if (g != expected_g)
        throw std::runtime_error("transitions file: grid size " + std::to_string(g) +
                                 " does not match expected " + std::to_string(expected_g));
    std::size_t pos = nl + 1;
    auto need = [&](std::size_t n) {
        if (pos + n > data.size()) throw std::runtime_error("transitions file truncated: " + path);
    };
    auto get_u32 = [&]() {
        need(4);
        std::uint32_t v;
        std::memcpy(&v, data.data() + pos, 4);
        pos += 4;
        return v;
    };
    auto get_f32 = [&]() {
        need(4);
        float v;
        std::memcpy(&v, data.data() + pos, 4);
        pos += 4;
        return v;
    };
    auto get_f64 = [&]() {
        need(8);
        double v;
        std::memcpy(&v, data.data() + pos, 8);
        pos += 8;
        return v;
    };
    const std::size_t sdim = state_size(g);
    std::vector<Transition> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        Transition t;
        t.a = static_cast<int>(get_u32());
        t.ret = get_f64();
        t.steps = static_cast<int>(get_u32());
        need(2);
        t.terminal = data[pos++] != 0;
        t.is_demo = data[pos++] != 0;
        t.s.resize(sdim);
        for (float& v : t.s) v = get_f32();
        t.s_next.resize(sdim);
        for (float& v : t.s_next) v = get_f32();
        out.push_back(std::move(t));
    }
    if (pos != data.size()) throw std::runtime_error("transitions file: trailing bytes in " + path);
    return out;
}

}  // namespace spartq
