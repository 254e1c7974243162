#include "spartq/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spartq/io.hpp"

namespace spartq {

namespace {

bool parse_point_line(const std::string& line, Point& out) {
    const char* s = line.c_str();
    char* end = nullptr;
    out.x = std::strtod(s, &end);
    if (end == s) return false;
    while (*end == ' ' || *end == '\t') ++end;
    if (*end != ',') return false;
    const char* s2 = end + 1;
    out.y = std::strtod(s2, &end);
    if (end == s2) return false;
    while (*end == ' ' || *end == '\t' || *end == '\r') ++end;
    return *end == '\0' && std::isfinite(out.x) && std::isfinite(out.y);
}

}  // namespace

Dataset load_points_csv(const std::string& path, const std::optional<BBox>& inside) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open points file: " + path);
    Dataset d;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        Point p;
        if (!parse_point_line(line, p)) {
            throw std::runtime_error(path + ": parse error at line " + std::to_string(lineno) +
                                     ": '" + line + "'");
        }
        if (inside && !inside->contains(p)) {
            throw std::runtime_error(path + ": point outside bounding box at line " +
                                     std::to_string(lineno));
        }
        d.points.push_back(p);
    }
    if (d.points.empty()) throw std::runtime_error(path + ": empty dataset");
    return d;
}

void save_points_csv(const Dataset& d, const std::string& path) {
    std::ostringstream out;
    out.precision(17);
    for (const Point& p : d.points) out << p.x << ',' << p.y << '\n';
    write_file_atomic(path, out.str());
}

Dataset gen_synthetic(SyntheticKind kind, std::size_t n, std::uint64_t seed,
                      const SyntheticParams& params) {
    if (n < 1) throw std::invalid_argument("gen_synthetic: n must be >= 1");
    if (!(params.bbox.min_x < params.bbox.max_x && params.bbox.min_y < params.bbox.max_y))
        throw std::invalid_argument("gen_synthetic: degenerate bbox");

    std::vector<GaussianCluster> clusters = params.clusters;
    if (kind == SyntheticKind::GaussianMixture) {
        if (clusters.empty()) throw std::invalid_argument("gen_synthetic: no clusters");
        double wsum = 0.0;
        for (const auto& c : clusters) {
            if (c.sigma <= 0.0) throw std::invalid_argument("gen_synthetic: non-positive sigma");
            if (c.weight <= 0.0) throw std::invalid_argument("gen_synthetic: non-positive weight");
            wsum += c.weight;
        }
        if (std::abs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("gen_synthetic: mixture weights must sum to 1");
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    Dataset d;
    d.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        double ux, uy;
        if (kind == SyntheticKind::Uniform) {
            ux = uni(rng);
            uy = uni(rng);
        } else {
            double pick = uni(rng);
            std::size_t ci = 0;
            double acc = 0.0;
            for (; ci + 1 < clusters.size(); ++ci) {
                acc += clusters[ci].weight;
                if (pick < acc) break;
            }
            const GaussianCluster& c = clusters[ci];
            ux = std::clamp(c.cx + c.sigma * gauss(rng), 0.0, 1.0);
            uy = std::clamp(c.cy + c.sigma * gauss(rng), 0.0, 1.0);
        }
        d.points.push_back(Point{params.bbox.min_x + ux * params.bbox.width(),
                                 params.bbox.min_y + uy * params.bbox.height()});
    }
    return d;
}

BBox tight_bbox(const Dataset& d) {
    if (d.points.empty()) throw std::invalid_argument("tight_bbox: empty dataset");
    BBox b{d.points[0].x, d.points[0].y, d.points[0].x, d.points[0].y};
    for (const Point& p : d.points) {
        b.min_x = std::min(b.min_x, p.x);
        b.min_y = std::min(b.min_y, p.y);
        b.max_x = std::max(b.max_x, p.x);
        b.max_y = std::max(b.max_y, p.y);
    }
    double mx = 1e-9 * std::max(1.0, std::max(std::abs(b.min_x), std::abs(b.max_x)));
    double my = 1e-9 * std::max(1.0, std::max(std::abs(b.min_y), std::abs(b.max_y)));
    double wx = b.width() > 0 ? 1e-9 * b.width() : 0.0;
    double wy = b.height() > 0 ? 1e-9 * b.height() : 0.0;
    b.min_x -= std::max(mx, wx);
    b.max_x += std::max(mx, wx);
    b.min_y -= std::max(my, wy);
    b.max_y += std::max(my, wy);
    return b;
}

int cell_index_x(const GridSpec& grid, double x) {
    int j = static_cast<int>(std::floor((x - grid.bbox.min_x) / grid.cell_w()));
    return std::clamp(j, 0, grid.g - 1);
}

int cell_index_y(const GridSpec& grid, double y) {
    int i = static_cast<int>(std::floor((y - grid.bbox.min_y) / grid.cell_h()));
    return std::clamp(i, 0, grid.g - 1);
}

CellHistogram build_histogram(const Dataset& d, const GridSpec& grid) {
    CellHistogram h;
    h.g = grid.g;
    h.counts.assign(static_cast<std::size_t>(grid.g) * grid.g, 0);
    for (const Point& p : d.points) {
        if (!grid.bbox.contains(p))
            throw std::runtime_error("build_histogram: point outside grid bbox");
        ++h.at(cell_index_y(grid, p.y), cell_index_x(grid, p.x));
        ++h.total;
    }
    return h;
}

}  // namespace spartq
