#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spartq/geometry.hpp"
#include "spartq/partition.hpp"

namespace spartq {

struct DistanceJoinQuery {
    double epsilon = 0.0;   // distance threshold, map units
    double frequency = 0.0; // normalized weight
};

struct Workload {
    std::vector<DistanceJoinQuery> queries;
};

// Line-oriented key=value file: query.N.epsilon, query.N.frequency.
// Frequencies are normalized to sum 1 on load.
Workload load_workload(const std::string& path);
Workload make_workload(const std::vector<DistanceJoinQuery>& queries);  // normalizes

struct CostParams {
    double c_point = 1.0;    // per scanned point
    double c_pair = 1.0;     // per candidate pair
    double c_shuffle = 5.0;  // per replicated point
    double prune_factor = 2.0;
    double prune_reward = 0.2;

    static CostParams with_local_index() {
        CostParams p;
        p.c_pair = 0.25;
        return p;
    }
};

struct CostReport {
    std::vector<double> per_query;  // complete iff !pruned
    bool pruned = false;

    double weighted_total(const Workload& w) const;
};

std::string cost_report_to_json(const CostReport& r);

struct LocalJoinStats {
    std::int64_t points_in_region = 0;  // N_eps: points in the eps-expanded rect
    std::int64_t candidate_pairs = 0;   // bucketed eps-join candidate pairs
};

// Bucketed candidate statistics of an eps-join over the rect geometry
// expanded by eps and clipped to the grid bbox. candidate_pairs is an
// upper bound on the exact pair count inside the region.
LocalJoinStats local_join_stats(const Dataset& d, const RectPartition& r, const GridSpec& grid,
                                double eps);

// c_point * N_eps + c_pair * candidate_pairs.
double local_join_cost(const Dataset& d, const RectPartition& r, const GridSpec& grid, double eps,
                       const CostParams& p);

// Exact eps-join (verification route): number of unordered pairs at
// euclidean distance <= eps, found through the same bucketing.
std::int64_t count_pairs_within(const std::vector<Point>& pts, double eps);

// Per query: makespan over rects + c_shuffle * total replicated points.
CostReport workload_cost(const Dataset& d, const PartitionSet& ps, const Workload& w,
                         const CostParams& p);

// Sequential evaluation that stops as soon as one query exceeds
// prune_factor times the best-known cost for that query.
CostReport pruned_workload_cost(const Dataset& d, const PartitionSet& ps, const Workload& w,
                                const CostParams& p, const CostReport& best);

// r = (sum_i f_i * C(P_b, w_i) / C(P_e, w_i))^2
double compute_reward(const CostReport& best, const CostReport& episode, const Workload& w);

// Pluggable oracle seam: the deterministic model ships; a measurement
// adapter (e.g. repeated wall-clock runs) can be substituted behind it.
class CostOracle {
public:
    virtual ~CostOracle() = default;
    virtual CostReport evaluate(const Dataset& d, const PartitionSet& ps,
                                const Workload& w) const = 0;
    virtual CostReport evaluate_pruned(const Dataset& d, const PartitionSet& ps, const Workload& w,
                                       const CostReport& best) const = 0;
    // Repeat count kept for measurement adapters; the deterministic
    // oracle ignores it (one run is exact).
    virtual int repeats() const { return 1; }
};

class DeterministicCostOracle final : public CostOracle {
public:
    explicit DeterministicCostOracle(CostParams params) : params_(params) {}
    CostReport evaluate(const Dataset& d, const PartitionSet& ps, const Workload& w) const override {
        return workload_cost(d, ps, w, params_);
    }
    CostReport evaluate_pruned(const Dataset& d, const PartitionSet& ps, const Workload& w,
                               const CostReport& best) const override {
        return pruned_workload_cost(d, ps, w, params_, best);
    }
    const CostParams& params() const { return params_; }

private:
    CostParams params_;
};

}  // namespace spartq
