#include "gramrig/global.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace gramrig {

std::string_view side_name(Side s) { return s == Side::States ? "states" : "measurements"; }

namespace {

std::vector<int> invert(const std::vector<int>& perm) {
    std::vector<int> inv(perm.size());
    for (std::size_t i = 0; i < perm.size(); ++i) inv[perm[i]] = static_cast<int>(i);
    return inv;
}

// Leading entries come from `lead`, the rest follow in ascending order.
std::vector<int> complete_permutation(const std::vector<int>& lead, int n) {
    std::vector<int> perm = lead;
    std::vector<bool> used(n, false);
    for (int i : lead) used[i] = true;
    for (int i = 0; i < n; ++i) {
        if (!used[i]) perm.push_back(i);
    }
    return perm;
}

std::vector<int> leading_pivots(const Eigen::ColPivHouseholderQR<Matrix>& qr, int count) {
    const auto& idx = qr.colsPermutation().indices();
    return {idx.data(), idx.data() + count};
}

const std::vector<IndexPair>& side_pairs(const OmegaMask& mask, Side side) {
    return side == Side::States ? mask.st_pairs : mask.m_pairs;
}

void vec_symmetric_product(const Vector& a, const Vector& b, Eigen::Ref<Vector> out) {
    const Eigen::Index D = a.size();
    for (Eigen::Index col = 0; col < D; ++col) {
        for (Eigen::Index row = 0; row < D; ++row) {
            out(row + D * col) = 0.5 * (a(row) * b(col) + b(row) * a(col));
        }
    }
}

const char* kRankDeficient = "data matrix rank-deficient: spanning assumption violated";

}  // namespace

std::vector<int> Factorization::inverse_row_perm() const { return invert(row_perm); }
std::vector<int> Factorization::inverse_col_perm() const { return invert(col_perm); }

Factorization factor_data(const DataMatrix& data, int D, double rel_tol) {
    const Matrix& X = data.entries;
    const int W = static_cast<int>(X.rows());
    const int C = static_cast<int>(X.cols());
    if (D < 1) throw std::invalid_argument("factor_data: D must be >= 1");
    if (W < D || C < D) {
        throw NumericalError(std::string(kRankDeficient) + " (data matrix is " + std::to_string(W) + "x" +
                             std::to_string(C) + ", D = " + std::to_string(D) + ")");
    }

    const RankReport rank = svd_rank(X, rel_tol);
    if (rank.computed_rank < D) {
        throw NumericalError(std::string(kRankDeficient) + " (rank " + std::to_string(rank.computed_rank) +
                             " < D = " + std::to_string(D) + ")");
    }
    if (rank.computed_rank > D) {
        throw NumericalError("data matrix rank " + std::to_string(rank.computed_rank) + " exceeds D = " +
                             std::to_string(D));
    }

    // Columns first, then rows within the chosen columns.
    Eigen::ColPivHouseholderQR<Matrix> col_qr(X);
    const std::vector<int> corner_cols = leading_pivots(col_qr, D);
    Matrix selected(W, D);
    for (int k = 0; k < D; ++k) selected.col(k) = X.col(corner_cols[k]);
    Eigen::ColPivHouseholderQR<Matrix> row_qr(selected.transpose());
    const std::vector<int> corner_rows = leading_pivots(row_qr, D);

    Factorization f;
    f.D = D;
    f.row_perm = complete_permutation(corner_rows, W);
    f.col_perm = complete_permutation(corner_cols, C);
    f.data.resize(W, C);
    for (int i = 0; i < W; ++i) {
        for (int j = 0; j < C; ++j) f.data(i, j) = X(f.row_perm[i], f.col_perm[j]);
    }

    Eigen::JacobiSVD<Matrix> corner_svd(f.data.topLeftCorner(D, D));
    f.corner_conditioning = corner_svd.singularValues()(D - 1);
    const double sigma_max = rank.spectrum->front();
    if (!(f.corner_conditioning > rel_tol * sigma_max * std::max(W, C))) {
        throw NumericalError(std::string(kRankDeficient) + " (no invertible D x D corner found)");
    }

    Eigen::BDCSVD<Matrix> svd(f.data, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD of data matrix failed to converge");
    f.P0_st = svd.matrixU().leftCols(D).transpose();
    f.P0_m = svd.singularValues().head(D).asDiagonal() * svd.matrixV().leftCols(D).transpose();
    return f;
}

Side knowledge_side(const OmegaMask& mask) {
    if (!mask.include_data_block) {
        throw std::invalid_argument("global criterion requires the whole data block to be known");
    }
    const bool st = !mask.st_pairs.empty();
    const bool m = !mask.m_pairs.empty();
    if (st && m) {
        throw std::invalid_argument(
            "mixed-side knowledge unsupported (no known criterion): knowledge must cover either "
            "state pairs or measurement pairs, not both");
    }
    if (!st && !m) throw std::invalid_argument("global criterion needs at least one known state or measurement pair");
    return st ? Side::States : Side::Measurements;
}

CriterionMatrix build_criterion(const Factorization& fact, const OmegaMask& mask) {
    const Side side = knowledge_side(mask);
    const int D = fact.D;
    if (fact.data.rows() != mask.shape.W || fact.data.cols() != mask.shape.measurement_columns()) {
        throw std::invalid_argument("build_criterion: factorization does not match mask shape");
    }
    const auto& pairs = side_pairs(mask, side);
    const auto inv = side == Side::States ? fact.inverse_row_perm() : fact.inverse_col_perm();

    CriterionMatrix crit{Matrix(static_cast<Eigen::Index>(D) * D, static_cast<Eigen::Index>(pairs.size())), side,
                         static_cast<int>(pairs.size())};
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const int a = inv[pairs[j].first];
        const int b = inv[pairs[j].second];
        Vector u, v;
        if (side == Side::States) {
            u = fact.data.row(a).head(D).transpose();
            v = fact.data.row(b).head(D).transpose();
        } else {
            u = fact.data.col(a).head(D);
            v = fact.data.col(b).head(D);
        }
        vec_symmetric_product(u, v, crit.entries.col(static_cast<Eigen::Index>(j)));
    }
    return crit;
}

IntMatrix build_criterion_exact(const IntMatrix& data, const std::vector<int>& corner_rows,
                                const std::vector<int>& corner_cols, const OmegaMask& mask) {
    const Side side = knowledge_side(mask);
    const auto D = static_cast<Eigen::Index>(corner_rows.size());
    if (static_cast<Eigen::Index>(corner_cols.size()) != D) throw std::invalid_argument("corner must be square");
    const auto& pairs = side_pairs(mask, side);

    IntMatrix out(D * D, static_cast<Eigen::Index>(pairs.size()));
    std::vector<std::int64_t> u(D), v(D);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        for (Eigen::Index k = 0; k < D; ++k) {
            if (side == Side::States) {
                u[k] = data(pairs[j].first, corner_cols[k]);
                v[k] = data(pairs[j].second, corner_cols[k]);
            } else {
                u[k] = data(corner_rows[k], pairs[j].first);
                v[k] = data(corner_rows[k], pairs[j].second);
            }
        }
        for (Eigen::Index col = 0; col < D; ++col) {
            for (Eigen::Index row = 0; row < D; ++row) {
                out(row + D * col, static_cast<Eigen::Index>(j)) = u[row] * v[col] + v[row] * u[col];
            }
        }
    }
    return out;
}

long global_target(int D) { return static_cast<long>(D) * (D + 1) / 2; }

RankReport global_sample_rank(const OmegaMask& mask, RankBackend backend, double rel_tol, Rng& rng) {
    const ProblemShape& s = mask.shape;
    if (backend == RankBackend::SvdTol) {
        const Configuration Q = random_configuration(s, rng);
        const Factorization fact = factor_data(data_matrix(Q), s.D, rel_tol);
        return svd_rank(build_criterion(fact, mask).entries, rel_tol);
    }

    const IntMatrix Q = random_integer_configuration(s, rng);
    const IntMatrix data = Q.leftCols(s.W).transpose() * Q.rightCols(s.measurement_columns());
    const std::uint64_t prime = random_prime_near_2_61(rng);
    const ModularPivots corner = modular_pivots(data, prime);
    if (static_cast<int>(corner.rows.size()) != s.D) {
        throw NumericalError(std::string(kRankDeficient) + " (rank " + std::to_string(corner.rows.size()) +
                             " over GF(p), D = " + std::to_string(s.D) + ")");
    }
    const IntMatrix crit = build_criterion_exact(data, corner.rows, corner.cols, mask);
    return backend == RankBackend::FiniteField ? finite_field_rank(crit, prime)
                                               : rank_with_consensus(crit, rel_tol, prime);
}

GlobalVerdict global_test(const ProblemShape& shape, const OmegaMask& mask, const TestOptions& options) {
    shape.validate();
    if (!(mask.shape == shape)) throw std::invalid_argument("mask shape does not match the requested shape");
    if (shape.N() < shape.D) {
        throw std::invalid_argument("shape violates spanning assumption: N = " + std::to_string(shape.N()) +
                                    " < D = " + std::to_string(shape.D));
    }
    if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");

    GlobalVerdict verdict;
    verdict.block = knowledge_side(mask);
    verdict.target = global_target(shape.D);

    Rng rng(options.seed);
    bool have = false;
    for (int t = 0; t < options.trials; ++t) {
        RankReport r = global_sample_rank(mask, options.backend, options.rel_tol, rng);
        if (!have || r.computed_rank > verdict.rank_report.computed_rank) {
            verdict.rank_report = std::move(r);
            have = true;
        }
        if (verdict.rank_report.computed_rank >= verdict.target) break;
    }
    verdict.rank_report.target_rank = static_cast<int>(verdict.target);
    verdict.completable = verdict.rank_report.computed_rank == verdict.target;
    return verdict;
}

// ---------------------------------------------------------------------------

Matrix recover_symmetric_unknown(const Factorization& fact, const GramKnowledge& knowledge) {
    const OmegaMask& mask = knowledge.mask;
    const Side side = knowledge_side(mask);
    const int D = fact.D;
    if (mask.shape.D != D || fact.data.rows() != mask.shape.W ||
        fact.data.cols() != mask.shape.measurement_columns()) {
        throw std::invalid_argument("knowledge shape does not match the factorization");
    }
    if (knowledge.values.size() != static_cast<Eigen::Index>(mask.size())) {
        throw std::invalid_argument("knowledge has " + std::to_string(knowledge.values.size()) +
                                    " values but the mask has " + std::to_string(mask.size()) + " entries");
    }

    const auto& pairs = side_pairs(mask, side);
    const Eigen::Index offset = side == Side::States ? 0 : static_cast<Eigen::Index>(mask.st_pairs.size());
    const Vector rhs = knowledge.values.segment(offset, static_cast<Eigen::Index>(pairs.size()));
    const Matrix& P0 = side == Side::States ? fact.P0_st : fact.P0_m;
    const auto inv = side == Side::States ? fact.inverse_row_perm() : fact.inverse_col_perm();

    // Unknowns: upper triangle of M, row-major over (a <= b).
    const long unknowns = global_target(D);
    Matrix A(static_cast<Eigen::Index>(pairs.size()), unknowns);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const Vector x = P0.col(inv[pairs[j].first]);
        const Vector y = P0.col(inv[pairs[j].second]);
        Eigen::Index u = 0;
        for (int a = 0; a < D; ++a) {
            for (int b = a; b < D; ++b) {
                const double B_ab = 0.5 * (x(a) * y(b) + y(a) * x(b));
                A(static_cast<Eigen::Index>(j), u++) = a == b ? B_ab : 2.0 * B_ab;
            }
        }
    }

    const RankReport rank = svd_rank(A);
    if (rank.computed_rank < unknowns) {
        throw NotUniqueError("not uniquely determined: constraint rank " + std::to_string(rank.computed_rank) +
                             " < " + std::to_string(unknowns));
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(A);
    const Vector m = qr.solve(rhs);
    const double residual = (A * m - rhs).norm();
    const double scale = std::max(rhs.norm(), 1e-300);
    if (residual > 1e-8 * scale) {
        throw NumericalError("inconsistent knowledge: least-squares residual " + std::to_string(residual) +
                             " exceeds 1e-8 * |values| = " + std::to_string(1e-8 * scale));
    }

    Matrix M(D, D);
    Eigen::Index u = 0;
    for (int a = 0; a < D; ++a) {
        for (int b = a; b < D; ++b) M(a, b) = M(b, a) = m(u++);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> eig(M, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(hi > 0) || !(lo > 1e-10 * hi)) {
        throw NumericalError("no real configuration explains the data: recovered matrix has eigenvalues in [" +
                             std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    return M;
}

Matrix reconstruct_gram(const Factorization& fact, const Matrix& M, Side side) {
    const int D = fact.D;
    if (M.rows() != D || M.cols() != D) throw std::invalid_argument("M must be D x D");
    Eigen::LLT<Matrix> llt(M);
    if (llt.info() != Eigen::Success) throw NumericalError("reconstruct_gram: M is not positive definite");
    const Matrix M_inv = llt.solve(Matrix::Identity(D, D));
    const Matrix& M_st = side == Side::States ? M : M_inv;
    const Matrix& M_m = side == Side::States ? M_inv : M;

    const Matrix G_st = fact.P0_st.transpose() * M_st * fact.P0_st;
    const Matrix G_m = fact.P0_m.transpose() * M_m * fact.P0_m;
    const int W = static_cast<int>(fact.data.rows());
    const int C = static_cast<int>(fact.data.cols());

    Matrix G(W + C, W + C);
    for (int i = 0; i < W; ++i) {
        for (int j = 0; j < W; ++j) G(fact.row_perm[i], fact.row_perm[j]) = G_st(i, j);
        for (int j = 0; j < C; ++j) {
            G(fact.row_perm[i], W + fact.col_perm[j]) = fact.data(i, j);
            G(W + fact.col_perm[j], fact.row_perm[i]) = fact.data(i, j);
        }
    }
    for (int i = 0; i < C; ++i) {
        for (int j = 0; j < C; ++j) G(W + fact.col_perm[i], W + fact.col_perm[j]) = G_m(i, j);
    }
    return G;
}

}  // namespace gramrig
