#pragma once

#include <array>
#include <complex>
#include <vector>

#include "mfilu/assembly.hpp"
#include "mfilu/ilu.hpp"

namespace mfilu {

/// Translation-invariant fixed point of the ILU stencil equations.
struct AsymptoticStencils {
    std::array<double, kNumLower> l{};
    double d = 1.0;
    int iterations = 0;

    LowerStencil lower() const;
};

/// Gauss-Seidel iteration of the eight stencil equations with every
/// neighbour replaced by the current iterate, from L = 0, D = A_c.
AsymptoticStencils asymptotic_stencils(const Stencil15& a, double tol = 1e-13, int max_iterations = 10000);

/// Largest residual of the stencil equations at (L, D), relative to |A_c|.
double fixed_point_residual(const Stencil15& a, const AsymptoticStencils& s);

std::complex<double> symbol(const Stencil15& a, const std::array<double, 3>& theta);
/// D |1 + sum_d L_d e^{i d theta}|^2, the symbol of L D L^T.
double factor_symbol(const AsymptoticStencils& s, const std::array<double, 3>& theta);

/// Uniform grid of `samples` midpoints per axis over (-pi, pi) without the
/// points of the low-frequency cube (-pi/2, pi/2)^3.
std::vector<std::array<double, 3>> high_frequencies(int samples = 16);

double smoothing_factor(const Stencil15& a, const AsymptoticStencils& s, int samples = 16);
double smoothing_factor(const Stencil15& a, int samples = 16);

struct LfaReport {
    std::vector<Permutation> permutations;
    std::vector<double> mu;  // +inf where the factorization failed
    std::size_t best = 0;
    long grid_points = 0;  // sampled frequencies over all permutations

    const Permutation& best_permutation() const { return permutations[best]; }
};

/// Evaluates mu for all 24 vertex orders of `tet` with the constant stencil
/// of the coefficient frozen at the centroid.
LfaReport best_permutation(const MacroTet& tet, const CoefficientField& coeff = CoefficientField::constant(1.0),
                           int samples = 16);

}  // namespace mfilu
