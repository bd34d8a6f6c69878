#pragma once

#include "eddp/model.hpp"

#include <cstdint>

namespace eddp {

/// n = 1, N = 1, lambda = 0.5, x in [0, 1], x >= 0.5 x_prev, x0 = 1, h(x) = x. F* = 2/3.
StationaryInstance make_chain_instance();

/**
 * Small random family: n in {1, 2}, N in {1, 2, 3}, lambda in [0.3, 0.6],
 * box [0, 1]^n, rows x_j >= beta x_prev_j + gamma (plus one mixing row
 * when n = 2) and max-of-affine costs with a positive base offset.
 * Every state in the box has a feasible successor.
 */
StationaryInstance gen_random(std::uint64_t seed);

/// Synthetic multi-reservoir hydro-thermal system.
struct ReservoirParams {
    int num_reservoirs = 4;
    int N = 10;
    double lambda = 0.9;
    double capacity = 10.0;    ///< level upper bound per reservoir
    double max_release = 5.0;  ///< turbine bound per reservoir
    double max_inflow = 4.0;   ///< inflows uniform in [0, max_inflow]
    double demand = 0.0;       ///< 0 means 0.6 * num_reservoirs * max_release
    double spill_penalty = 0.01;
    bool zero_inflow = false;
    int T_eff = 12;            ///< suggested planning horizon (not used by the generator)
};

/**
 * State x = (levels l, releases u, spills s, thermal g), dimension 3n + 1.
 * Rows: l + u + s = l_prev + inflow (equality, coupled to l_prev) and
 * sum u + g >= demand. Spill and thermal bounds give complete recourse.
 * Cost: convex piecewise thermal cost plus a small spill penalty.
 */
StationaryInstance gen_reservoir(const ReservoirParams& p, std::uint64_t seed);

/// Economic dispatch with storage and a two-stage pricing lower level.
struct EdParams {
    int generators = 10;
    int regions = 4;
    int N1 = 10; ///< top-level demand scenarios
    int N2 = 10; ///< second-stage demand samples
    double lambda = 0.95;
    double g_max = 50.0;
    double b_max = 40.0; ///< 0 disables storage
    double h_max = 30.0;
    double d_lo = 20.0, d_hi = 60.0;
    double D_lo = 30.0, D_hi = 80.0;
    double penalty = 100.0;
    double c_lo = 1.0, c_hi = 10.0;
    double beta_lo = 0.8, beta_hi = 1.0;
    double alpha_lo = 0.8, alpha_hi = 1.0;
    double eps_lo = 1.0;
    double rho = 0.1;
};

/**
 * Top state x = (g, b, s): generation per generator, storage level and
 * energy passed to the lower level per region. Region k balance:
 *   sum_{i in I_k} g_i - b_k - s_k = d_k - beta_k b_prev_k.
 * Lower first stage z1 = h (one block of r allocations per sample) with
 * (1/N2) sum_l h_k^l = s_k; sample l pays penalty * |D^l - sum_k alpha_k h_k^l|.
 * combined_instance() of the result is the exact LP form.
 */
HierarchicalInstance gen_ed(const EdParams& p, std::uint64_t seed);

} // namespace eddp
