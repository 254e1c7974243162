#include "spartq/env.hpp"

#include <stdexcept>

namespace spartq {

EnvState make_env(const GridSpec& grid, const CellHistogram& hist) {
    if (hist.total <= 0) throw std::invalid_argument("make_env: empty histogram");
    if (hist.g != grid.g) throw std::invalid_argument("make_env: grid size mismatch");
    return EnvState{init_single(grid), &hist, 0};
}

StateVector encode_state(const EnvState& e) {
    const int g = e.ps.grid.g;
    const CellHistogram& hist = *e.hist;
    const double total2 = static_cast<double>(hist.total) * static_cast<double>(hist.total);

    // Cell -> rect data count lookup.
    std::vector<std::int64_t> rect_count = partition_counts(e.ps, hist);
    std::vector<double> cell_rect_count(std::size_t(g) * g, 0.0);
    for (std::size_t k = 0; k < e.ps.rects.size(); ++k) {
        const RectPartition& r = e.ps.rects[k];
        for (int i = r.top; i < r.bottom; ++i)
            for (int j = r.left; j < r.right; ++j)
                cell_rect_count[std::size_t(i) * g + j] = static_cast<double>(rect_count[k]);
    }

    StateVector s(state_size(g), 0.0f);
    for (int i = 0; i <= g; ++i) {
        for (int j = 0; j <= g; ++j) {
            const std::size_t base = (std::size_t(i) * (g + 1) + j) * 3;
            s[base + 0] = static_cast<float>(e.ps.bounds.h_at(i, j));
            s[base + 1] = static_cast<float>(e.ps.bounds.v_at(i, j));
            if (i < g && j < g) {
                s[base + 2] = static_cast<float>(
                    static_cast<double>(hist.at(i, j)) * cell_rect_count[std::size_t(i) * g + j] /
                    total2);
            }
        }
    }
    return s;
}

std::vector<std::uint8_t> valid_mask(const EnvState& e) {
    const int g = e.ps.grid.g;
    std::vector<std::uint8_t> mask(action_space(g), 0);
    for (int idx = 0; idx < action_space(g); ++idx)
        mask[idx] = is_valid_cut(e.ps, index_to_action(idx, g)) ? 1 : 0;
    return mask;
}

std::vector<std::uint8_t> valid_mask_from_state(const StateVector& s, int g) {
    std::vector<std::uint8_t> mask(action_space(g), 0);
    for (int i = 0; i < g; ++i) {
        for (int j = 0; j < g; ++j) {
            const std::size_t base = (std::size_t(i) * (g + 1) + j) * 3;
            const bool h = s[base] != 0.0f;
            const bool v = s[base + 1] != 0.0f;
            mask[(i * g + j) * 2 + 0] = (!h && v) ? 1 : 0;  // right
            mask[(i * g + j) * 2 + 1] = (h && !v) ? 1 : 0;  // down
        }
    }
    return mask;
}

std::pair<EnvState, bool> step(const EnvState& e, const CutAction& a, int m) {
    if (e.t >= m - 1) throw std::logic_error("step: episode already terminal");
    if (!is_valid_cut(e.ps, a)) throw std::invalid_argument("step: invalid action");
    EnvState next{apply_cut(e.ps, a), e.hist, e.t + 1};
    const bool terminal = next.t == m - 1;
    return {std::move(next), terminal};
}

}  // namespace spartq
