#include "spartq/partition.hpp"

#include <stdexcept>

#include <nlohmann/json.hpp>

namespace spartq {

const char* dir_name(Dir d) { return d == Dir::Right ? "right" : "down"; }

Dir dir_from_name(const std::string& s) {
    if (s == "right") return Dir::Right;
    if (s == "down") return Dir::Down;
    throw std::invalid_argument("unknown direction: " + s);
}

std::size_t PartitionSet::rect_of_cell(int i, int j) const {
    for (std::size_t k = 0; k < rects.size(); ++k)
        if (rects[k].contains_cell(i, j)) return k;
    throw std::logic_error("rect_of_cell: cell not covered");
}

PartitionSet init_single(const GridSpec& grid) {
    PartitionSet ps;
    ps.grid = grid;
    ps.rects = {RectPartition{0, 0, grid.g, grid.g}};
    ps.bounds = bounds_from_rects(grid.g, ps.rects);
    return ps;
}

BoundaryGrid bounds_from_rects(int g, const std::vector<RectPartition>& rects) {
    BoundaryGrid b;
    b.g = g;
    b.h.assign(static_cast<std::size_t>(g + 1) * (g + 1), 0);
    b.v.assign(static_cast<std::size_t>(g + 1) * (g + 1), 0);
    for (const RectPartition& r : rects) {
        for (int j = r.left; j < r.right; ++j) {
            b.set_h(r.top, j);
            b.set_h(r.bottom, j);
        }
        for (int i = r.top; i < r.bottom; ++i) {
            b.set_v(i, r.left);
            b.set_v(i, r.right);
        }
    }
    return b;
}

bool is_valid_cut(const PartitionSet& ps, const CutAction& a) {
    const int g = ps.grid.g;
    if (a.i < 0 || a.i >= g || a.j < 0 || a.j >= g) return false;
    if (a.dir == Dir::Right) return ps.bounds.h_at(a.i, a.j) == 0 && ps.bounds.v_at(a.i, a.j) == 1;
    return ps.bounds.h_at(a.i, a.j) == 1 && ps.bounds.v_at(a.i, a.j) == 0;
}

PartitionSet apply_cut(const PartitionSet& ps, const CutAction& a) {
    const int g = ps.grid.g;
    if (a.i < 0 || a.i >= g || a.j < 0 || a.j >= g)
        throw std::invalid_argument("apply_cut: action start point out of range");
    if (a.dir == Dir::Right) {
        if (ps.bounds.h_at(a.i, a.j) != 0)
            throw std::invalid_argument("apply_cut: right cut needs h(i,j)=0 (no boundary above)");
        if (ps.bounds.v_at(a.i, a.j) != 1)
            throw std::invalid_argument("apply_cut: right cut needs v(i,j)=1 (start on a vertical boundary)");
    } else {
        if (ps.bounds.h_at(a.i, a.j) != 1)
            throw std::invalid_argument("apply_cut: down cut needs h(i,j)=1 (start on a horizontal boundary)");
        if (ps.bounds.v_at(a.i, a.j) != 0)
            throw std::invalid_argument("apply_cut: down cut needs v(i,j)=0 (no boundary left)");
    }

    PartitionSet out = ps;
    std::size_t k = ps.rect_of_cell(a.i, a.j);
    const RectPartition r = ps.rects[k];
    if (a.dir == Dir::Right) {
        // Horizontal cut on row line a.i across rect r (r.left == a.j).
        out.rects[k] = RectPartition{r.top, r.left, a.i, r.right};
        out.rects.push_back(RectPartition{a.i, r.left, r.bottom, r.right});
        for (int j = r.left; j < r.right; ++j) out.bounds.set_h(a.i, j);
    } else {
        // Vertical cut on column line a.j across rect r (r.top == a.i).
        out.rects[k] = RectPartition{r.top, r.left, r.bottom, a.j};
        out.rects.push_back(RectPartition{r.top, a.j, r.bottom, r.right});
        for (int i = r.top; i < r.bottom; ++i) out.bounds.set_v(i, a.j);
    }
    return out;
}

std::vector<CutAction> enumerate_valid_actions(const PartitionSet& ps) {
    std::vector<CutAction> out;
    const int g = ps.grid.g;
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            CutAction r{i, j, Dir::Right};
            if (is_valid_cut(ps, r)) out.push_back(r);
            CutAction d{i, j, Dir::Down};
            if (is_valid_cut(ps, d)) out.push_back(d);
        }
    }
    return out;
}

std::vector<std::int64_t> partition_counts(const PartitionSet& ps, const CellHistogram& hist) {
    if (hist.g != ps.grid.g) throw std::invalid_argument("partition_counts: grid size mismatch");
    std::vector<std::int64_t> out(ps.rects.size(), 0);
    for (std::size_t k = 0; k < ps.rects.size(); ++k) {
        const RectPartition& r = ps.rects[k];
        for (int i = r.top; i < r.bottom; ++i)
            for (int j = r.left; j < r.right; ++j) out[k] += hist.at(i, j);
    }
    return out;
}

std::string partition_to_json(const PartitionSet& ps) {
    nlohmann::json j;
    j["grid"] = ps.grid.g;
    j["bbox"] = {ps.grid.bbox.min_x, ps.grid.bbox.min_y, ps.grid.bbox.max_x, ps.grid.bbox.max_y};
    auto rects = nlohmann::json::array();
    for (const RectPartition& r : ps.rects)
        rects.push_back(nlohmann::json::array({r.top, r.left, r.bottom, r.right}));
    j["rects"] = rects;
    return j.dump(2) + "\n";
}

PartitionSet partition_from_json(const std::string& json_text) {
    nlohmann::json j = nlohmann::json::parse(json_text);
    PartitionSet ps;
    ps.grid.g = j.at("grid").get<int>();
    auto bb = j.at("bbox");
    ps.grid.bbox = BBox{bb.at(0).get<double>(), bb.at(1).get<double>(), bb.at(2).get<double>(),
                        bb.at(3).get<double>()};
    for (const auto& r : j.at("rects"))
        ps.rects.push_back(RectPartition{r.at(0).get<int>(), r.at(1).get<int>(), r.at(2).get<int>(),
                                         r.at(3).get<int>()});
    ps.bounds = bounds_from_rects(ps.grid.g, ps.rects);
    return ps;
}

}  // namespace spartq
