#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace spartq {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

// Axis-aligned bounding box in map units. min < max on both axes.
struct BBox {
    double min_x = 0.0;
    double min_y = 0.0;
    double max_x = 1.0;
    double max_y = 1.0;

    double width() const { return max_x - min_x; }
    double height() const { return max_y - min_y; }
    bool contains(const Point& p) const {
        return p.x >= min_x && p.x <= max_x && p.y >= min_y && p.y <= max_y;
    }
};

// Uniform g x g grid overlay on a bounding box.
struct GridSpec {
    BBox bbox;
    int g = 30;

    double cell_w() const { return bbox.width() / g; }
    double cell_h() const { return bbox.height() / g; }
};

struct Dataset {
    std::vector<Point> points;

    std::size_t count() const { return points.size(); }
};

// Per-cell point counts, row-major (i = row, j = col).
struct CellHistogram {
    int g = 0;
    std::vector<std::int64_t> counts;  // g*g entries
    std::int64_t total = 0;

    std::int64_t at(int i, int j) const { return counts[static_cast<std::size_t>(i) * g + j]; }
    std::int64_t& at(int i, int j) { return counts[static_cast<std::size_t>(i) * g + j]; }
};

struct GaussianCluster {
    double weight = 1.0;
    double cx = 0.5;  // center in unit-square coordinates
    double cy = 0.5;
    double sigma = 0.1;
};

enum class SyntheticKind { Uniform, GaussianMixture };

struct SyntheticParams {
    BBox bbox{0.0, 0.0, 1.0, 1.0};
    std::vector<GaussianCluster> clusters;  // used by GaussianMixture only
};

// Parses "x,y" lines; '#'-prefixed header lines and blank lines are skipped.
// If `inside` is given, any point outside it is an error naming the line.
Dataset load_points_csv(const std::string& path, const std::optional<BBox>& inside = std::nullopt);

void save_points_csv(const Dataset& d, const std::string& path);

// Deterministic per (kind, n, seed, params). Points lie inside params.bbox.
Dataset gen_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed,
                      const SyntheticParams& params);

// Tight box of the points, expanded by a 1e-9 relative margin so that
// max-coordinate points stay strictly interior after cell clamping.
BBox tight_bbox(const Dataset& d);

// Cell index = floor((x - min)/cell), clamped to g-1 on the max edge.
int cell_index_x(const GridSpec& grid, double x);
int cell_index_y(const GridSpec& grid, double y);

CellHistogram build_histogram(const Dataset& d, const GridSpec& grid);

}  // namespace spartq
