#pragma once

#include <string_view>
#include <vector>

#include "gramrig/local.hpp"
#include "gramrig/model.hpp"
#include "gramrig/rank.hpp"

namespace gramrig {

/// Which Gram block carries the a priori knowledge.
enum class Side { States, Measurements };

std::string_view side_name(Side s);

/// Rank-D factorization of a data matrix, stored in a permuted order whose
/// leading D x D corner is invertible.
///
/// Permuted row i is original row row_perm[i] (likewise for columns), and
/// P0_st^T * P0_m equals `data` (the permuted matrix).
struct Factorization {
    int D = 0;
    Matrix data;
    Matrix P0_st;  // D x W
    Matrix P0_m;   // D x V*K
    std::vector<int> row_perm;
    std::vector<int> col_perm;
    double corner_conditioning = 0.0;  // smallest singular value of the corner

    [[nodiscard]] std::vector<int> inverse_row_perm() const;
    [[nodiscard]] std::vector<int> inverse_col_perm() const;
};

/// Truncated-SVD factorization of the data matrix with corner pivoting.
/// Throws NumericalError when rank(data) != D or no invertible corner exists.
Factorization factor_data(const DataMatrix& data, int D, double rel_tol = kDefaultRelTol);

/// Columns are vec(N_j) for the known pairs on one side, column-stacked.
struct CriterionMatrix {
    Matrix entries;  // D^2 x J
    Side block = Side::States;
    int J = 0;
};

/// Side holding the knowledge. Throws std::invalid_argument when both or
/// neither side carries pairs, or the data block is not known.
Side knowledge_side(const OmegaMask& mask);

/// N_j built straight from rows (state side) or columns (measurement side)
/// of the data matrix restricted to the corner.
CriterionMatrix build_criterion(const Factorization& fact, const OmegaMask& mask);

/// Exact-arithmetic counterpart of build_criterion on an integer data
/// matrix; corner rows/cols index the original matrix. Entries are 2 * N_j
/// so they stay integral.
IntMatrix build_criterion_exact(const IntMatrix& data, const std::vector<int>& corner_rows,
                                const std::vector<int>& corner_cols, const OmegaMask& mask);

/// D(D+1)/2.
long global_target(int D);

struct GlobalVerdict {
    bool completable = false;
    RankReport rank_report;
    long target = 0;
    Side block = Side::States;
};

/// Randomized global completability test with max-rank aggregation over
/// trials. Rank-deficient data (W < D or V*K < D) surfaces as NumericalError.
GlobalVerdict global_test(const ProblemShape& shape, const OmegaMask& mask, const TestOptions& options = {});

/// Criterion rank at one generic sample.
RankReport global_sample_rank(const OmegaMask& mask, RankBackend backend, double rel_tol, Rng& rng);

/// Solves tr(B_j M) = G_j for the symmetric unknown M: (A^T A)^{-1} when the
/// knowledge is on the state side, A^T A on the measurement side.
/// Throws NumericalError for not-unique, inconsistent or indefinite results.
Matrix recover_symmetric_unknown(const Factorization& fact, const GramKnowledge& knowledge);

/// Full N x N Gram matrix in the original ordering.
Matrix reconstruct_gram(const Factorization& fact, const Matrix& M, Side side);

}  // namespace gramrig
