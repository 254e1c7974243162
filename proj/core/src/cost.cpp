#include "spartq/cost.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace spartq {

namespace {

struct Region {
    double x0, y0, x1, y1;
    bool contains(const Point& p) const {
        return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1;
    }
};

Region expanded_region(const RectPartition& r, const GridSpec& grid, double eps) {
    const BBox& b = grid.bbox;
    Region reg;
    reg.x0 = std::max(b.min_x, b.min_x + r.left * grid.cell_w() - eps);
    reg.x1 = std::min(b.max_x, b.min_x + r.right * grid.cell_w() + eps);
    reg.y0 = std::max(b.min_y, b.min_y + r.top * grid.cell_h() - eps);
    reg.y1 = std::min(b.max_y, b.min_y + r.bottom * grid.cell_h() + eps);
    return reg;
}

// Bucket grid of size eps anchored at (x0, y0). Points within eps of each
// other land in the same or 8-neighboring buckets.
struct BucketGrid {
    double x0, y0, eps;
    int nx, ny;
    std::map<std::pair<int, int>, std::vector<std::uint32_t>> buckets;

    BucketGrid(double x0_, double y0_, double x1, double y1, double eps_)
        : x0(x0_), y0(y0_), eps(eps_) {
        nx = std::max(1, static_cast<int>(std::ceil((x1 - x0) / eps)));
        ny = std::max(1, static_cast<int>(std::ceil((y1 - y0) / eps)));
    }
    std::pair<int, int> key(const Point& p) const {
        int bx = std::clamp(static_cast<int>(std::floor((p.x - x0) / eps)), 0, nx - 1);
        int by = std::clamp(static_cast<int>(std::floor((p.y - y0) / eps)), 0, ny - 1);
        return {bx, by};
    }
    void insert(const Point& p, std::uint32_t idx) { buckets[key(p)].push_back(idx); }
};

// Forward half of the 8-neighborhood so every cross-bucket pair is
// counted exactly once: E, SW, S, SE.
constexpr int kForward[4][2] = {{1, 0}, {-1, 1}, {0, 1}, {1, 1}};

std::int64_t candidate_pairs(const BucketGrid& bg) {
    std::int64_t cand = 0;
    for (const auto& [key, pts] : bg.buckets) {
        const std::int64_t n = static_cast<std::int64_t>(pts.size());
        cand += n * (n - 1) / 2;
        for (const auto& d : kForward) {
            auto it = bg.buckets.find({key.first + d[0], key.second + d[1]});
            if (it != bg.buckets.end()) cand += n * static_cast<std::int64_t>(it->second.size());
        }
    }
    return cand;
}

}  // namespace

Workload make_workload(const std::vector<DistanceJoinQuery>& queries) {
    if (queries.empty()) throw std::invalid_argument("workload: no queries");
    double sum = 0.0;
    for (const auto& q : queries) {
        if (q.epsilon <= 0.0) throw std::invalid_argument("workload: epsilon must be positive");
        if (q.frequency <= 0.0) throw std::invalid_argument("workload: frequency must be positive");
        sum += q.frequency;
    }
    Workload w;
    w.queries = queries;
    for (auto& q : w.queries) q.frequency /= sum;
    return w;
}

Workload load_workload(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open workload file: " + path);
    std::map<int, DistanceJoinQuery> by_index;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string stripped = line;
        stripped.erase(std::remove_if(stripped.begin(), stripped.end(), ::isspace), stripped.end());
        if (stripped.empty() || stripped[0] == '#') continue;
        auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ": malformed line " + std::to_string(lineno));
        std::string key = stripped.substr(0, eq);
        double value = std::stod(stripped.substr(eq + 1));
        if (key.rfind("query.", 0) != 0)
            throw std::runtime_error(path + ": unknown key '" + key + "' at line " +
                                     std::to_string(lineno));
        auto dot = key.find('.', 6);
        if (dot == std::string::npos)
            throw std::runtime_error(path + ": malformed key '" + key + "'");
        int idx = std::stoi(key.substr(6, dot - 6));
        std::string field = key.substr(dot + 1);
        if (field == "epsilon")
            by_index[idx].epsilon = value;
        else if (field == "frequency")
            by_index[idx].frequency = value;
        else
            throw std::runtime_error(path + ": unknown field '" + field + "'");
    }
    std::vector<DistanceJoinQuery> qs;
    for (const auto& [idx, q] : by_index) qs.push_back(q);
    return make_workload(qs);
}

double CostReport::weighted_total(const Workload& w) const {
    if (pruned) throw std::logic_error("weighted_total on a pruned report");
    double t = 0.0;
    for (std::size_t i = 0; i < w.queries.size(); ++i) t += w.queries[i].frequency * per_query[i];
    return t;
}

std::string cost_report_to_json(const CostReport& r) {
    nlohmann::json j;
    j["pruned"] = r.pruned;
    j["per_query"] = r.per_query;
    return j.dump(2) + "\n";
}

LocalJoinStats local_join_stats(const Dataset& d, const RectPartition& r, const GridSpec& grid,
                                double eps) {
    if (eps <= 0.0) throw std::invalid_argument("local_join_stats: eps must be positive");
    const Region reg = expanded_region(r, grid, eps);
    LocalJoinStats st;
    BucketGrid bg(reg.x0, reg.y0, reg.x1, reg.y1, eps);
    std::uint32_t idx = 0;
    for (const Point& p : d.points) {
        if (reg.contains(p)) {
            bg.insert(p, idx);
            ++st.points_in_region;
        }
        ++idx;
    }
    st.candidate_pairs = candidate_pairs(bg);
    return st;
}

double local_join_cost(const Dataset& d, const RectPartition& r, const GridSpec& grid, double eps,
                       const CostParams& p) {
    const LocalJoinStats st = local_join_stats(d, r, grid, eps);
    return p.c_point * static_cast<double>(st.points_in_region) +
           p.c_pair * static_cast<double>(st.candidate_pairs);
}

std::int64_t count_pairs_within(const std::vector<Point>& pts, double eps) {
    if (eps <= 0.0) throw std::invalid_argument("count_pairs_within: eps must be positive");
    if (pts.empty()) return 0;
    double x0 = pts[0].x, y0 = pts[0].y, x1 = pts[0].x, y1 = pts[0].y;
    for (const Point& p : pts) {
        x0 = std::min(x0, p.x);
        y0 = std::min(y0, p.y);
        x1 = std::max(x1, p.x);
        y1 = std::max(y1, p.y);
    }
    BucketGrid bg(x0, y0, x1, y1, eps);
    for (std::uint32_t i = 0; i < pts.size(); ++i) bg.insert(pts[i], i);

    const double eps2 = eps * eps;
    auto close = [&](std::uint32_t a, std::uint32_t b) {
        double dx = pts[a].x - pts[b].x, dy = pts[a].y - pts[b].y;
        return dx * dx + dy * dy <= eps2;
    };
    std::int64_t count = 0;
    for (const auto& [key, ids] : bg.buckets) {
        for (std::size_t a = 0; a < ids.size(); ++a)
            for (std::size_t b = a + 1; b < ids.size(); ++b)
                if (close(ids[a], ids[b])) ++count;
        for (const auto& dnb : kForward) {
            auto it = bg.buckets.find({key.first + dnb[0], key.second + dnb[1]});
            if (it == bg.buckets.end()) continue;
            for (std::uint32_t a : ids)
                for (std::uint32_t b : it->second)
                    if (close(a, b)) ++count;
        }
    }
    return count;
}

namespace {

double query_cost(const Dataset& d, const PartitionSet& ps,
                  const std::vector<std::int64_t>& assigned, double eps, const CostParams& p) {
    double makespan = 0.0;
    std::int64_t replicated = 0;
    for (std::size_t k = 0; k < ps.rects.size(); ++k) {
        const LocalJoinStats st = local_join_stats(d, ps.rects[k], ps.grid, eps);
        makespan = std::max(makespan, p.c_point * static_cast<double>(st.points_in_region) +
                                          p.c_pair * static_cast<double>(st.candidate_pairs));
        replicated += st.points_in_region - assigned[k];
    }
    return makespan + p.c_shuffle * static_cast<double>(replicated);
}

}  // namespace

CostReport workload_cost(const Dataset& d, const PartitionSet& ps, const Workload& w,
                         const CostParams& p) {
    if (ps.rects.empty()) throw std::invalid_argument("workload_cost: empty partition set");
    const CellHistogram hist = build_histogram(d, ps.grid);
    const std::vector<std::int64_t> assigned = partition_counts(ps, hist);
    CostReport rep;
    for (const auto& q : w.queries) rep.per_query.push_back(query_cost(d, ps, assigned, q.epsilon, p));
    return rep;
}

CostReport pruned_workload_cost(const Dataset& d, const PartitionSet& ps, const Workload& w,
                                const CostParams& p, const CostReport& best) {
    if (best.pruned) throw std::invalid_argument("pruned_workload_cost: best report is pruned");
    const CellHistogram hist = build_histogram(d, ps.grid);
    const std::vector<std::int64_t> assigned = partition_counts(ps, hist);
    CostReport rep;
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
        double c = query_cost(d, ps, assigned, w.queries[i].epsilon, p);
        rep.per_query.push_back(c);
        if (c > p.prune_factor * best.per_query[i]) {
            rep.pruned = true;
            return rep;
        }
    }
    return rep;
}

double compute_reward(const CostReport& best, const CostReport& episode, const Workload& w) {
    if (best.pruned || episode.pruned)
        throw std::invalid_argument("compute_reward: reports must not be pruned");
    double sum = 0.0;
    for (std::size_t i = 0; i < w.queries.size(); ++i) {
        if (episode.per_query[i] <= 0.0)
            throw std::invalid_argument("compute_reward: zero episode cost");
        sum += w.queries[i].frequency * best.per_query[i] / episode.per_query[i];
    }
    return sum * sum;
}

}  // namespace spartq
