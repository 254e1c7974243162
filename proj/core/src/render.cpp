#include "spartq/render.hpp"

#include <sstream>

namespace spartq {

std::string render_svg(const PartitionSet& ps, const Dataset* points, const RenderOptions& opts) {
    const BBox& b = ps.grid.bbox;
    const double scale = opts.width / b.width();
    const int height = static_cast<int>(b.height() * scale + 0.5);
    // y is flipped so larger map-y draws higher, matching map orientation.
    auto sx = [&](double x) { return (x - b.min_x) * scale; };
    auto sy = [&](double y) { return (b.max_y - y) * scale; };

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << opts.width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << opts.width << ' ' << height << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    if (points && !points->points.empty()) {
        const std::size_t n = points->points.size();
        const std::size_t stride = n > opts.max_points ? (n + opts.max_points - 1) / opts.max_points : 1;
        out << "<g fill=\"#3366cc\" fill-opacity=\"0.5\">\n";
        for (std::size_t k = 0; k < n; k += stride) {
            const Point& p = points->points[k];
            out << "<circle cx=\"" << sx(p.x) << "\" cy=\"" << sy(p.y) << "\" r=\"1\"/>\n";
        }
        out << "</g>\n";
    }

    out << "<g fill=\"none\" stroke=\"#cc2222\" stroke-width=\"1.5\">\n";
    const double cw = ps.grid.cell_w(), ch = ps.grid.cell_h();
    for (const RectPartition& r : ps.rects) {
        const double x = sx(b.min_x + r.left * cw);
        const double y = sy(b.min_y + r.bottom * ch);
        out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << r.cols() * cw * scale
            << "\" height=\"" << r.rows() * ch * scale << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

}  // namespace spartq
