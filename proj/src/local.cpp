#include "gramrig/local.hpp"

#include <string>

namespace gramrig {

long local_target(int D, int N) {
    return static_cast<long>(D) * N - static_cast<long>(D) * (D - 1) / 2;
}

namespace {

template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> jacobian_impl(
    const Eigen::MatrixBase<Derived>& P, const OmegaMask& mask) {
    using Scalar = typename Derived::Scalar;
    const ProblemShape& s = mask.shape;
    if (P.rows() != s.D || P.cols() != s.N()) {
        throw std::invalid_argument("jacobian: configuration is " + std::to_string(P.rows()) + "x" +
                                    std::to_string(P.cols()) + " but mask expects " + std::to_string(s.D) + "x" +
                                    std::to_string(s.N()));
    }
    const auto pairs = mask.global_pairs();
    const Eigen::Index D = s.D;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> J =
        Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>::Zero(static_cast<Eigen::Index>(pairs.size()),
                                                                    D * s.N());
    for (std::size_t row = 0; row < pairs.size(); ++row) {
        const auto r = static_cast<Eigen::Index>(row);
        const int i = pairs[row].first;
        const int j = pairs[row].second;
        if (i == j) {
            J.row(r).segment(D * i, D) = (Scalar(2) * P.col(i)).transpose();
        } else {
            J.row(r).segment(D * i, D) = P.col(j).transpose();
            J.row(r).segment(D * j, D) = P.col(i).transpose();
        }
    }
    return J;
}

}  // namespace

Matrix jacobian(const Matrix& P, const OmegaMask& mask) { return jacobian_impl(P, mask); }

Matrix jacobian(const Configuration& P, const OmegaMask& mask) { return jacobian_impl(P.entries, mask); }

IntMatrix jacobian(const IntMatrix& P, const OmegaMask& mask) { return jacobian_impl(P, mask); }

RankReport local_sample_rank(const OmegaMask& mask, RankBackend backend, double rel_tol, Rng& rng) {
    switch (backend) {
        case RankBackend::SvdTol:
            return svd_rank(jacobian(random_configuration(mask.shape, rng), mask), rel_tol);
        case RankBackend::FiniteField: {
            const IntMatrix Q = random_integer_configuration(mask.shape, rng);
            return finite_field_rank(jacobian(Q, mask), random_prime_near_2_61(rng));
        }
        case RankBackend::Consensus: {
            const IntMatrix Q = random_integer_configuration(mask.shape, rng);
            return rank_with_consensus(jacobian(Q, mask), rel_tol, random_prime_near_2_61(rng));
        }
    }
    throw std::logic_error("unhandled rank backend");
}

LocalVerdict local_test(const ProblemShape& shape, const OmegaMask& mask, const TestOptions& options) {
    shape.validate();
    if (!(mask.shape == shape)) throw std::invalid_argument("mask shape does not match the requested shape");
    if (shape.N() < shape.D) {
        throw std::invalid_argument("shape violates spanning assumption: N = " + std::to_string(shape.N()) +
                                    " < D = " + std::to_string(shape.D));
    }
    if (options.trials < 1) throw std::invalid_argument("trials must be >= 1");

    LocalVerdict verdict;
    verdict.target = local_target(shape.D, shape.N());
    verdict.jacobian_dims = {static_cast<long>(mask.size()), static_cast<long>(shape.D) * shape.N()};
    const double entries = static_cast<double>(verdict.jacobian_dims.first) * verdict.jacobian_dims.second;
    if (entries > kMaxDenseJacobianEntries) {
        throw std::invalid_argument("Jacobian of " + std::to_string(verdict.jacobian_dims.first) + " x " +
                                    std::to_string(verdict.jacobian_dims.second) +
                                    " is too large for dense storage");
    }

    Rng rng(options.seed);
    bool have = false;
    for (int t = 0; t < options.trials; ++t) {
        RankReport r = local_sample_rank(mask, options.backend, options.rel_tol, rng);
        if (!have || r.computed_rank > verdict.rank_report.computed_rank) {
            verdict.rank_report = std::move(r);
            have = true;
        }
        // The generic rank never exceeds the target, so reaching it settles the verdict.
        if (verdict.rank_report.computed_rank >= verdict.target) break;
    }
    verdict.rank_report.target_rank = static_cast<int>(verdict.target);
    verdict.completable = verdict.rank_report.computed_rank == verdict.target;
    return verdict;
}

}  // namespace gramrig
