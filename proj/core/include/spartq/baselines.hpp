#pragma once

#include <string>
#include <vector>

#include "spartq/partition.hpp"

namespace spartq {

enum class BaselineMethod { Uniform, Quadtree, Kdbtree };

const char* baseline_name(BaselineMethod m);
BaselineMethod baseline_from_name(const std::string& s);

// A baseline partitioner expressed as cut actions; replaying `actions`
// from init_single reproduces `final`.
struct DemoEpisode {
    std::vector<CutAction> actions;
    PartitionSet final;
    BaselineMethod method = BaselineMethod::Kdbtree;
};

// Median splits: at each step the most-populated rect is split on its
// longer side (tie -> vertical cut) at the interior grid line minimizing
// |left mass - right mass| (tie -> lower line index). Exactly m-1 actions.
DemoEpisode kdb_actions(const CellHistogram& hist, const GridSpec& grid, int m);

// r x c layout with r = largest divisor of m with r <= sqrt(m), c = m/r;
// cut lines are the grid lines nearest to equal spacing.
DemoEpisode uniform_actions(const GridSpec& grid, int m);

// Quad splits of the most-populated rect while |rects|+3 <= m, then
// KDB-style binary splits to reach exactly m.
DemoEpisode quadtree_actions(const CellHistogram& hist, const GridSpec& grid, int m);

DemoEpisode baseline_actions(BaselineMethod m, const CellHistogram& hist, const GridSpec& grid,
                             int partitions);

// Partition JSON plus an "actions" array of [i, j, "right"|"down"].
std::string demo_to_json(const DemoEpisode& ep);
DemoEpisode demo_from_json(const std::string& json_text);

}  // namespace spartq
