#pragma once

#include <string>

#include "spartq/geometry.hpp"
#include "spartq/partition.hpp"

namespace spartq {

struct RenderOptions {
    int width = 800;
    std::size_t max_points = 20000;  // subsample threshold
};

// SVG of the partition rectangles over the (possibly subsampled) points.
std::string render_svg(const PartitionSet& ps, const Dataset* points,
                       const RenderOptions& opts = {});

}  // namespace spartq
