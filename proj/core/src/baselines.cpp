#include "spartq/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

namespace spartq {

const char* baseline_name(BaselineMethod m) {
    switch (m) {
        case BaselineMethod::Uniform: return "uniform";
        case BaselineMethod::Quadtree: return "quadtree";
        case BaselineMethod::Kdbtree: return "kdbtree";
    }
    return "?";
}

BaselineMethod baseline_from_name(const std::string& s) {
    if (s == "uniform") return BaselineMethod::Uniform;
    if (s == "quadtree" || s == "quad") return BaselineMethod::Quadtree;
    if (s == "kdbtree" || s == "kdb") return BaselineMethod::Kdbtree;
    throw std::invalid_argument("unknown baseline method: " + s);
}

namespace {

std::string rect_str(const RectPartition& r) {
    return "[" + std::to_string(r.top) + "," + std::to_string(r.left) + "," +
           std::to_string(r.bottom) + "," + std::to_string(r.right) + ")";
}

std::size_t most_populated(const PartitionSet& ps, const CellHistogram& hist) {
    std::vector<std::int64_t> counts = partition_counts(ps, hist);
    std::size_t best = 0;
    for (std::size_t k = 1; k < counts.size(); ++k)
        if (counts[k] > counts[best]) best = k;
    return best;
}

// Interior line of `r` on the chosen axis minimizing |left - right| mass,
// tie -> lower line index. Returns the corresponding cut action.
CutAction kdb_split_action(const RectPartition& r, const CellHistogram& hist) {
    if (r.rows() <= 1 && r.cols() <= 1)
        throw std::runtime_error("kdb split: no interior grid line in rect " + rect_str(r));
    const bool vertical = r.cols() >= r.rows();  // tie -> vertical cut
    std::int64_t total = 0;
    std::vector<std::int64_t> marginal;
    if (vertical) {
        marginal.assign(r.cols(), 0);
        for (int i = r.top; i < r.bottom; ++i)
            for (int j = r.left; j < r.right; ++j) marginal[j - r.left] += hist.at(i, j);
    } else {
        marginal.assign(r.rows(), 0);
        for (int i = r.top; i < r.bottom; ++i)
            for (int j = r.left; j < r.right; ++j) marginal[i - r.top] += hist.at(i, j);
    }
    for (std::int64_t c : marginal) total += c;

    std::int64_t left = 0, best_score = -1;
    int best_line = -1;
    for (std::size_t k = 0; k + 1 < marginal.size(); ++k) {
        left += marginal[k];
        std::int64_t score = std::abs(2 * left - total);  // |left - (total-left)|
        if (best_line < 0 || score < best_score) {
            best_score = score;
            best_line = static_cast<int>(k) + 1;
        }
    }
    if (vertical) return CutAction{r.top, r.left + best_line, Dir::Down};
    return CutAction{r.top + best_line, r.left, Dir::Right};
}

void emit(DemoEpisode& ep, PartitionSet& ps, const CutAction& a) {
    ps = apply_cut(ps, a);
    ep.actions.push_back(a);
}

}  // namespace

DemoEpisode kdb_actions(const CellHistogram& hist, const GridSpec& grid, int m) {
    if (m < 2 || m > grid.g)
        throw std::invalid_argument("kdb_actions: need 2 <= m <= g, got m=" + std::to_string(m));
    DemoEpisode ep;
    ep.method = BaselineMethod::Kdbtree;
    PartitionSet ps = init_single(grid);
    for (int step = 0; step < m - 1; ++step) {
        std::size_t k = most_populated(ps, hist);
        emit(ep, ps, kdb_split_action(ps.rects[k], hist));
    }
    ep.final = ps;
    return ep;
}

DemoEpisode uniform_actions(const GridSpec& grid, int m) {
    if (m < 1) throw std::invalid_argument("uniform_actions: m must be >= 1");
    if (static_cast<std::int64_t>(m) > std::int64_t(grid.g) * grid.g)
        throw std::invalid_argument("uniform_actions: m exceeds g*g");
    int r = 1;
    for (int d = 1; d * d <= m; ++d)
        if (m % d == 0) r = d;
    int c = m / r;
    if (r > grid.g || c > grid.g)
        throw std::invalid_argument("uniform_actions: not enough grid lines for a " +
                                    std::to_string(r) + "x" + std::to_string(c) + " layout");

    const int g = grid.g;
    auto line = [g](int k, int total) {
        return static_cast<int>(std::llround(double(k) * g / total));
    };
    DemoEpisode ep;
    ep.method = BaselineMethod::Uniform;
    PartitionSet ps = init_single(grid);
    std::vector<int> col_lines{0};
    for (int k = 1; k < c; ++k) {
        emit(ep, ps, CutAction{0, line(k, c), Dir::Down});
        col_lines.push_back(line(k, c));
    }
    for (int s = 0; s < c; ++s)
        for (int k = 1; k < r; ++k) emit(ep, ps, CutAction{line(k, r), col_lines[s], Dir::Right});
    ep.final = ps;
    return ep;
}

DemoEpisode quadtree_actions(const CellHistogram& hist, const GridSpec& grid, int m) {
    if (m < 1) throw std::invalid_argument("quadtree_actions: m must be >= 1");
    DemoEpisode ep;
    ep.method = BaselineMethod::Quadtree;
    PartitionSet ps = init_single(grid);

    while (static_cast<int>(ps.rects.size()) + 3 <= m) {
        std::vector<std::int64_t> counts = partition_counts(ps, hist);
        std::vector<std::size_t> order(counts.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
        std::size_t pick = order.size();
        for (std::size_t k : order) {
            if (ps.rects[k].rows() >= 2 && ps.rects[k].cols() >= 2) {
                pick = k;
                break;
            }
        }
        if (pick == order.size())
            throw std::runtime_error("quadtree_actions: no rect large enough for a quad split");
        const RectPartition r = ps.rects[pick];
        const int midr = (r.top + r.bottom) / 2;
        const int midc = (r.left + r.right) / 2;
        emit(ep, ps, CutAction{r.top, midc, Dir::Down});
        emit(ep, ps, CutAction{midr, r.left, Dir::Right});
        emit(ep, ps, CutAction{midr, midc, Dir::Right});
    }
    // Exact-m fixup with balanced binary splits.
    while (static_cast<int>(ps.rects.size()) < m) {
        std::vector<std::int64_t> counts = partition_counts(ps, hist);
        std::vector<std::size_t> order(counts.size());
        for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return counts[a] > counts[b]; });
        std::size_t pick = order.size();
        for (std::size_t k : order) {
            if (ps.rects[k].rows() >= 2 || ps.rects[k].cols() >= 2) {
                pick = k;
                break;
            }
        }
        if (pick == order.size())
            throw std::runtime_error("quadtree_actions: no rect with an interior grid line left");
        emit(ep, ps, kdb_split_action(ps.rects[pick], hist));
    }
    ep.final = ps;
    return ep;
}

DemoEpisode baseline_actions(BaselineMethod m, const CellHistogram& hist, const GridSpec& grid,
                             int partitions) {
    switch (m) {
        case BaselineMethod::Uniform: return uniform_actions(grid, partitions);
        case BaselineMethod::Quadtree: return quadtree_actions(hist, grid, partitions);
        case BaselineMethod::Kdbtree: return kdb_actions(hist, grid, partitions);
    }
    throw std::logic_error("unreachable");
}

std::string demo_to_json(const DemoEpisode& ep) {
    nlohmann::json j = nlohmann::json::parse(partition_to_json(ep.final));
    j["method"] = baseline_name(ep.method);
    auto acts = nlohmann::json::array();
    for (const CutAction& a : ep.actions)
        acts.push_back(nlohmann::json::array({a.i, a.j, dir_name(a.dir)}));
    j["actions"] = acts;
    return j.dump(2) + "\n";
}

DemoEpisode demo_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    DemoEpisode ep;
    ep.final = partition_from_json(json_text);
    ep.method = baseline_from_name(j.at("method").get<std::string>());
    for (const auto& a : j.at("actions"))
        ep.actions.push_back(
            CutAction{a.at(0).get<int>(), a.at(1).get<int>(), dir_from_name(a.at(2))});
    return ep;
}

}  // namespace spartq
