#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spartq/geometry.hpp"

namespace spartq {

enum class Dir : std::uint8_t { Right = 0, Down = 1 };

const char* dir_name(Dir d);
Dir dir_from_name(const std::string& s);

// A cut starts at grid point (i, j) and extends rightward or downward
// across exactly one rectangle.
struct CutAction {
    int i = 0;
    int j = 0;
    Dir dir = Dir::Right;

    bool operator==(const CutAction&) const = default;
};

// Boundary bits on grid lines, (g+1)x(g+1) each.
//   h[i][j] = 1  <=>  horizontal boundary on the top side of cell (i, j)
//   v[i][j] = 1  <=>  vertical boundary on the left side of cell (i, j)
// Rows/cols at index g represent the bottom/right map edges; the unused
// padding entries stay 0.
struct BoundaryGrid {
    int g = 0;
    std::vector<std::uint8_t> h;
    std::vector<std::uint8_t> v;

    std::uint8_t h_at(int i, int j) const { return h[static_cast<std::size_t>(i) * (g + 1) + j]; }
    std::uint8_t v_at(int i, int j) const { return v[static_cast<std::size_t>(i) * (g + 1) + j]; }
    void set_h(int i, int j) { h[static_cast<std::size_t>(i) * (g + 1) + j] = 1; }
    void set_v(int i, int j) { v[static_cast<std::size_t>(i) * (g + 1) + j] = 1; }

    bool operator==(const BoundaryGrid&) const = default;
};

// Half-open cell ranges [top, bottom) x [left, right).
struct RectPartition {
    int top = 0;
    int left = 0;
    int bottom = 0;
    int right = 0;

    int rows() const { return bottom - top; }
    int cols() const { return right - left; }
    std::int64_t cells() const { return std::int64_t(rows()) * cols(); }
    bool contains_cell(int i, int j) const {
        return i >= top && i < bottom && j >= left && j < right;
    }
    bool operator==(const RectPartition&) const = default;
};

// Boundary bits and the rectangle list are kept mutually consistent:
// the bits are exactly the union of rect edges.
struct PartitionSet {
    GridSpec grid;
    BoundaryGrid bounds;
    std::vector<RectPartition> rects;

    // Index of the rect containing cell (i, j).
    std::size_t rect_of_cell(int i, int j) const;
};

// One rect covering the whole grid; only border bits set.
PartitionSet init_single(const GridSpec& grid);

// dir=right: h[i][j]=0 and v[i][j]=1; dir=down: h[i][j]=1 and v[i][j]=0.
// Out-of-range actions are simply invalid.
bool is_valid_cut(const PartitionSet& ps, const CutAction& a);

// Splits the single rectangle whose edge contains the start point; the cut
// spans that rectangle and stops at its opposite edge. Throws on invalid
// actions, naming the violated condition.
PartitionSet apply_cut(const PartitionSet& ps, const CutAction& a);

// Row-major order, right before down at each grid point.
std::vector<CutAction> enumerate_valid_actions(const PartitionSet& ps);

// Data count per rect, aligned with ps.rects. Throws on grid-size mismatch.
std::vector<std::int64_t> partition_counts(const PartitionSet& ps, const CellHistogram& hist);

// Rebuilds the boundary bits from rect edges (consistency oracle and
// JSON-load path).
BoundaryGrid bounds_from_rects(int g, const std::vector<RectPartition>& rects);

// {"grid": g, "bbox": [min_x,min_y,max_x,max_y], "rects": [[t,l,b,r],...]}
std::string partition_to_json(const PartitionSet& ps);
PartitionSet partition_from_json(const std::string& json_text);

}  // namespace spartq
