#pragma once

#include <string_view>

#include "isg/qvi.hpp"

namespace isg {

// Brute-force backward induction on small lattices (p <= 2, diagonal
// diffusion) with explicit moment-matched transitions.

/// Pure stopping: V = max(G, f dt + E[V_next]). Requires an empty Z.
ValueField lattice_stopping_value(const ProblemSpec& spec, const Grid& lattice);

/// Pure impulse control with G charged only at T and on the boundary:
/// V = min(M V, f dt + E[V_next]), iterated to a fixed point per slice.
ValueField lattice_impulse_value(const ProblemSpec& spec, const Grid& lattice);

enum class GameOrder { infsup, supinf };
std::string_view to_string(GameOrder order);
GameOrder game_order_from(std::string_view name);

/// infsup: controller resolves first, min(M V, max(G, C)).
/// supinf: stopper resolves first, max(G, min(M V, C)).
ValueField discrete_game_value(const ProblemSpec& spec, const Grid& lattice, GameOrder order);

}  // namespace isg
