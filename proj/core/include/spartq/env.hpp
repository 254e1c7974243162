#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "spartq/partition.hpp"

namespace spartq {

// Flat (g+1)*(g+1)*3 state encoding, point-major (h, v, p) per grid point.
using StateVector = std::vector<float>;

inline std::size_t state_size(int g) { return std::size_t(g + 1) * (g + 1) * 3; }
inline int action_space(int g) { return 2 * g * g; }

// idx = (i*g + j)*2 + (0 if right else 1)
inline int action_to_index(const CutAction& a, int g) {
    return (a.i * g + a.j) * 2 + (a.dir == Dir::Right ? 0 : 1);
}
inline CutAction index_to_action(int idx, int g) {
    const int point = idx / 2;
    return CutAction{point / g, point % g, (idx % 2 == 0) ? Dir::Right : Dir::Down};
}

struct EnvState {
    PartitionSet ps;
    const CellHistogram* hist = nullptr;
    int t = 0;  // cuts applied so far; |ps.rects| == t + 1
};

EnvState make_env(const GridSpec& grid, const CellHistogram& hist);

// h, v from the boundary bits; p(i,j) = |D_(i,j)| * |P_(i,j)| / |D|^2 for
// i,j < g and 0 at the padded row/column.
StateVector encode_state(const EnvState& e);

// mask[idx] = is_valid_cut for the decoded action.
std::vector<std::uint8_t> valid_mask(const EnvState& e);

// Validity decoded from a stored state vector's h/v channels; used to
// restrict bootstrap maxima to valid actions of the stored next state.
std::vector<std::uint8_t> valid_mask_from_state(const StateVector& s, int g);

// Applies the cut and advances t; terminal when t reaches m-1.
// Intermediate rewards are 0 by contract. Throws on invalid actions and
// on stepping past the terminal state.
std::pair<EnvState, bool> step(const EnvState& e, const CutAction& a, int m);

}  // namespace spartq
