#pragma once

#include <cstdint>

#include "gramrig/global.hpp"
#include "gramrig/model.hpp"

namespace gramrig {

/// Central finite differences of P -> (P^T P)_Omega, same layout as jacobian().
Matrix fd_jacobian(const Matrix& P, const OmegaMask& mask, double step = 1e-5);

/// Criterion matrix through the explicit factor route: B_j from columns of
/// P0 on the knowledge side, congruence by the opposite side's corner block
/// R (columns R^T B_j R), then column-stacked.
CriterionMatrix factor_criterion(const Factorization& fact, const OmegaMask& mask);

/// Whether tr(B_j M) = c_j pins down a unique symmetric M, decided by the
/// nullity of the constraint operator on Sym(R^D) in a randomly rotated
/// orthonormal basis. An empty constraint set is never unique.
bool linear_uniqueness_oracle(const Factorization& fact, const OmegaMask& mask, std::uint64_t seed);

/// Optimal orthogonal O minimizing |O P - Q|_F.
Matrix procrustes_rotation(const Matrix& P, const Matrix& Q);

/// min over orthogonal O of |O P - Q|_F.
double orbit_distance(const Matrix& P, const Matrix& Q);

struct PerturbationResult {
    bool found_nontrivial_deformation = false;
    double deformation_norm = 0.0;      // |Q - P|_F
    double constraint_violation = 0.0;  // |G_Omega(Q) - K|_2
    double orbit_distance = 0.0;
    int restarts_used = 0;
};

struct PerturbationOptions {
    int restarts = 10;
    std::uint64_t seed = 0;
    double start_scale = 0.05;  // start perturbation, relative to the rms entry of P
    int max_iterations = 10000;
};

/// Looks for Q within 0.5 |P|_F of P that satisfies the known Gram entries
/// but is not a rotation of P. Corroborates flexibility; finding nothing
/// does not prove completability.
PerturbationResult perturbation_search(const Configuration& P, const GramKnowledge& knowledge,
                                       const PerturbationOptions& options = {});

}  // namespace gramrig
