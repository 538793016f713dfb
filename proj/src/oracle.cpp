#include "gramrig/oracle.hpp"

#include <cmath>

#include <Eigen/QR>
#include <Eigen/SVD>

#include "gramrig/local.hpp"

namespace gramrig {

namespace {

Vector gram_entries(const Matrix& P, const std::vector<IndexPair>& pairs) {
    Vector g(static_cast<Eigen::Index>(pairs.size()));
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        g(static_cast<Eigen::Index>(n)) = P.col(pairs[n].first).dot(P.col(pairs[n].second));
    }
    return g;
}

Matrix random_orthogonal(Eigen::Index n, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Matrix G(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        for (Eigen::Index i = 0; i < n; ++i) G(i, j) = normal(rng);
    }
    Eigen::HouseholderQR<Matrix> qr(G);
    return qr.householderQ() * Matrix::Identity(n, n);
}

}  // namespace

Matrix fd_jacobian(const Matrix& P, const OmegaMask& mask, double step) {
    if (!(step > 0)) throw std::invalid_argument("finite-difference step must be positive");
    const auto pairs = mask.global_pairs();
    const Eigen::Index D = P.rows();
    Matrix J(static_cast<Eigen::Index>(pairs.size()), P.size());
    Matrix X = P;
    for (Eigen::Index col = 0; col < P.cols(); ++col) {
        for (Eigen::Index a = 0; a < D; ++a) {
            const double saved = X(a, col);
            X(a, col) = saved + step;
            const Vector plus = gram_entries(X, pairs);
            X(a, col) = saved - step;
            const Vector minus = gram_entries(X, pairs);
            X(a, col) = saved;
            J.col(a + D * col) = (plus - minus) / (2.0 * step);
        }
    }
    return J;
}

CriterionMatrix factor_criterion(const Factorization& fact, const OmegaMask& mask) {
    const Side side = knowledge_side(mask);
    const int D = fact.D;
    const auto& pairs = side == Side::States ? mask.st_pairs : mask.m_pairs;
    const Matrix& P0 = side == Side::States ? fact.P0_st : fact.P0_m;
    // Opposite side, restricted to the corner (first D permuted indices).
    const Matrix R = side == Side::States ? fact.P0_m.leftCols(D) : fact.P0_st.leftCols(D);
    const auto inv = side == Side::States ? fact.inverse_row_perm() : fact.inverse_col_perm();

    CriterionMatrix crit{Matrix(static_cast<Eigen::Index>(D) * D, static_cast<Eigen::Index>(pairs.size())), side,
                         static_cast<int>(pairs.size())};
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const Vector x = P0.col(inv[pairs[j].first]);
        const Vector y = P0.col(inv[pairs[j].second]);
        const Matrix B = 0.5 * (x * y.transpose() + y * x.transpose());
        const Matrix conj = R.transpose() * B * R;
        crit.entries.col(static_cast<Eigen::Index>(j)) = Eigen::Map<const Vector>(conj.data(), conj.size());
    }
    return crit;
}

bool linear_uniqueness_oracle(const Factorization& fact, const OmegaMask& mask, std::uint64_t seed) {
    if (mask.st_pairs.empty() && mask.m_pairs.empty()) return false;
    const Side side = knowledge_side(mask);
    const int D = fact.D;
    const auto& pairs = side == Side::States ? mask.st_pairs : mask.m_pairs;
    const Matrix& P0 = side == Side::States ? fact.P0_st : fact.P0_m;
    const auto inv = side == Side::States ? fact.inverse_row_perm() : fact.inverse_col_perm();

    // Frobenius-orthonormal coordinates of B on Sym(R^D): diagonal entries,
    // then sqrt(2) * off-diagonal entries.
    const Eigen::Index dim = global_target(D);
    const double root2 = std::sqrt(2.0);
    Matrix op(static_cast<Eigen::Index>(pairs.size()), dim);
    for (std::size_t j = 0; j < pairs.size(); ++j) {
        const Vector x = P0.col(inv[pairs[j].first]);
        const Vector y = P0.col(inv[pairs[j].second]);
        Eigen::Index k = 0;
        for (int a = 0; a < D; ++a) op(static_cast<Eigen::Index>(j), k++) = x(a) * y(a);
        for (int a = 0; a < D; ++a) {
            for (int b = a + 1; b < D; ++b) {
                op(static_cast<Eigen::Index>(j), k++) = root2 * 0.5 * (x(a) * y(b) + y(a) * x(b));
            }
        }
    }
    Rng rng(seed);
    const Matrix rotated = op * random_orthogonal(dim, rng);

    Eigen::JacobiSVD<Matrix> svd(rotated);
    const Vector& s = svd.singularValues();
    const double threshold =
        kDefaultRelTol * (s.size() > 0 ? s(0) : 0.0) * static_cast<double>(std::max(rotated.rows(), dim));
    Eigen::Index rank = 0;
    while (rank < s.size() && s(rank) > threshold) ++rank;
    const Eigen::Index nullity = dim - rank;
    return nullity == 0;
}

Matrix procrustes_rotation(const Matrix& P, const Matrix& Q) {
    Eigen::JacobiSVD<Matrix> svd(Q * P.transpose(), Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixU() * svd.matrixV().transpose();
}

double orbit_distance(const Matrix& P, const Matrix& Q) { return (procrustes_rotation(P, Q) * P - Q).norm(); }

PerturbationResult perturbation_search(const Configuration& P, const GramKnowledge& knowledge,
                                       const PerturbationOptions& options) {
    P.validate();
    if (!(knowledge.mask.shape == P.shape)) throw std::invalid_argument("knowledge shape does not match configuration");
    const auto pairs = knowledge.mask.global_pairs();
    const Vector& target = knowledge.values;
    const Matrix& P0 = P.entries;

    const double norm_P = P0.norm();
    const double radius = 0.5 * norm_P;
    const double scale = options.start_scale * norm_P / std::sqrt(static_cast<double>(std::max<Eigen::Index>(1, P0.size())));

    auto project = [&](Matrix Q) {
        const double dist = (Q - P0).norm();
        if (dist > radius) Q = P0 + (Q - P0) * (radius / dist);
        return Q;
    };
    auto violation = [&](const Matrix& Q) { return (gram_entries(Q, pairs) - target).norm(); };

    Rng rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    PerturbationResult best;
    bool have_converged = false;

    for (int restart = 0; restart < options.restarts; ++restart) {
        Matrix Q = P0;
        for (Eigen::Index i = 0; i < Q.size(); ++i) Q.data()[i] += scale * normal(rng);
        Q = project(std::move(Q));

        double viol = violation(Q);
        for (int it = 0; it < options.max_iterations && viol > 1e-10; ++it) {
            const Vector residual = gram_entries(Q, pairs) - target;
            const Matrix J = jacobian(Q, knowledge.mask);
            const Vector step_vec = -Eigen::CompleteOrthogonalDecomposition<Matrix>(J).solve(residual);
            const Matrix step = Eigen::Map<const Matrix>(step_vec.data(), Q.rows(), Q.cols());

            double t = 1.0;
            Matrix candidate = project(Q + step);
            double cand_viol = violation(candidate);
            while (cand_viol >= viol && t > 1e-12) {
                t *= 0.5;
                candidate = project(Q + t * step);
                cand_viol = violation(candidate);
            }
            if (cand_viol >= viol) break;  // stalled
            Q = std::move(candidate);
            viol = cand_viol;
        }

        PerturbationResult r;
        r.deformation_norm = (Q - P0).norm();
        r.constraint_violation = viol;
        r.orbit_distance = orbit_distance(P0, Q);
        r.restarts_used = restart + 1;
        const bool converged = viol <= 1e-8;
        if (converged && r.orbit_distance > 1e-4) {
            r.found_nontrivial_deformation = true;
            return r;
        }
        if (!have_converged || (converged && r.orbit_distance > best.orbit_distance)) {
            best = r;
            have_converged = converged;
        }
        best.restarts_used = restart + 1;
    }
    return best;
}

}  // namespace gramrig
