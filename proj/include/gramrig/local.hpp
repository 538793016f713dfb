#pragma once

#include <cstdint>
#include <utility>

#include "gramrig/model.hpp"
#include "gramrig/rank.hpp"

namespace gramrig {

/// Shared knobs for the randomized completability tests.
struct TestOptions {
    int trials = 3;
    RankBackend backend = RankBackend::SvdTol;
    double rel_tol = kDefaultRelTol;
    std::uint64_t seed = 0;
};

struct LocalVerdict {
    bool completable = false;
    RankReport rank_report;
    long target = 0;
    std::pair<long, long> jacobian_dims{0, 0};
};

/// local_test refuses Jacobians with more entries than this (about 1.6 GB).
inline constexpr double kMaxDenseJacobianEntries = 2e8;

/// D*N - D(D-1)/2: the Jacobian rank that leaves only rotations free.
long local_target(int D, int N);

/// Jacobian of P -> (P^T P) restricted to the mask, |Omega| x D*N.
///
/// Column a + D*j is the derivative with respect to P(a, j). The row for a
/// pair (i, j) holds p_j in block i and p_i in block j; for i == j it holds
/// 2 p_i in block i.
Matrix jacobian(const Matrix& P, const OmegaMask& mask);
Matrix jacobian(const Configuration& P, const OmegaMask& mask);
IntMatrix jacobian(const IntMatrix& P, const OmegaMask& mask);

/// Randomized local completability test. Draws `trials` generic
/// configurations and keeps the largest Jacobian rank observed.
/// Throws std::invalid_argument when N < D.
LocalVerdict local_test(const ProblemShape& shape, const OmegaMask& mask, const TestOptions& options = {});

/// Rank of the Jacobian at one generic sample. Exposed for tests that need
/// per-sample ranks rather than the aggregated verdict.
RankReport local_sample_rank(const OmegaMask& mask, RankBackend backend, double rel_tol, Rng& rng);

}  // namespace gramrig
