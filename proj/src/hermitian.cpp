#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>

#include "gramrig/model.hpp"

namespace gramrig {

using cd = std::complex<double>;

std::vector<CMatrix> make_hermitian_basis(int d) {
    if (d < 1) throw std::invalid_argument("Hilbert dimension must be >= 1");
    std::vector<CMatrix> basis;
    basis.reserve(static_cast<std::size_t>(d) * d);
    basis.push_back(CMatrix::Identity(d, d) / std::sqrt(static_cast<double>(d)));

    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int j = 0; j < d; ++j) {
        for (int k = j + 1; k < d; ++k) {
            CMatrix sym = CMatrix::Zero(d, d);
            sym(j, k) = sym(k, j) = inv_sqrt2;
            basis.push_back(std::move(sym));

            CMatrix anti = CMatrix::Zero(d, d);
            anti(j, k) = cd(0.0, -inv_sqrt2);
            anti(k, j) = cd(0.0, inv_sqrt2);
            basis.push_back(std::move(anti));
        }
    }
    for (int l = 1; l < d; ++l) {
        CMatrix diag = CMatrix::Zero(d, d);
        const double scale = 1.0 / std::sqrt(static_cast<double>(l) * (l + 1));
        for (int j = 0; j < l; ++j) diag(j, j) = scale;
        diag(l, l) = -l * scale;
        basis.push_back(std::move(diag));
    }
    return basis;
}

namespace {

// tr(A B) without forming the product.
cd trace_product(const CMatrix& A, const CMatrix& B) { return (A.transpose().cwiseProduct(B)).sum(); }

CMatrix ginibre(int rows, int cols, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    CMatrix G(rows, cols);
    for (int j = 0; j < cols; ++j) {
        for (int i = 0; i < rows; ++i) {
            const double re = normal(rng);
            const double im = normal(rng);
            G(i, j) = cd(re, im);
        }
    }
    return G;
}

CMatrix random_density_matrix(int d, Rng& rng) {
    const CMatrix A = ginibre(d, d, rng);
    CMatrix rho = A * A.adjoint();
    rho /= rho.trace().real();
    return rho;
}

CMatrix random_unitary(int d, Rng& rng) {
    const CMatrix G = ginibre(d, d, rng);
    Eigen::HouseholderQR<CMatrix> qr(G);
    CMatrix Q = qr.householderQ() * CMatrix::Identity(d, d);
    const CMatrix R = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int i = 0; i < d; ++i) {
        const double mag = std::abs(R(i, i));
        if (mag > 0) Q.col(i) *= R(i, i) / mag;
    }
    return Q;
}

std::vector<CMatrix> random_generic_povm(int d, int K, Rng& rng) {
    std::vector<CMatrix> elements;
    elements.reserve(K);
    CMatrix S = CMatrix::Zero(d, d);
    for (int k = 0; k < K; ++k) {
        const CMatrix A = ginibre(d, d, rng);
        elements.push_back(A * A.adjoint());
        S += elements.back();
    }
    Eigen::SelfAdjointEigenSolver<CMatrix> eig(S);
    const CMatrix S_inv_sqrt = eig.operatorInverseSqrt();
    for (auto& E : elements) {
        E = S_inv_sqrt * E * S_inv_sqrt;
        E = 0.5 * (E + E.adjoint()).eval();
    }
    return elements;
}

std::vector<int> default_degeneracies(int d, int K) {
    if (K > d) {
        throw std::invalid_argument("projective measurement with K = " + std::to_string(K) +
                                    " outcomes needs K <= d = " + std::to_string(d));
    }
    std::vector<int> parts(K, d / K);
    for (int k = 0; k < d % K; ++k) ++parts[k];
    return parts;
}

std::vector<CMatrix> random_projective_povm(int d, const std::vector<int>& degeneracies, Rng& rng) {
    const CMatrix U = random_unitary(d, rng);
    std::vector<CMatrix> elements;
    int col = 0;
    for (int deg : degeneracies) {
        const auto block = U.middleCols(col, deg);
        elements.push_back(block * block.adjoint());
        col += deg;
    }
    return elements;
}

}  // namespace

Vector vectorize(const CMatrix& H, const std::vector<CMatrix>& basis) {
    if (basis.empty() || H.rows() != basis.front().rows() || H.cols() != basis.front().cols()) {
        throw std::invalid_argument("matrix and basis dimensions differ");
    }
    Vector v(static_cast<Eigen::Index>(basis.size()));
    for (std::size_t a = 0; a < basis.size(); ++a) {
        const cd c = trace_product(basis[a], H);
        if (std::abs(c.imag()) > 1e-10) {
            throw std::invalid_argument("matrix is not Hermitian: coefficient " + std::to_string(a) +
                                        " has imaginary part " + std::to_string(c.imag()));
        }
        v(static_cast<Eigen::Index>(a)) = c.real();
    }
    return v;
}

ProblemShape QuantumModel::shape() const {
    const int K = povms.empty() ? 1 : static_cast<int>(povms.front().size());
    return ProblemShape::quantum_shape(d, static_cast<int>(states.size()), static_cast<int>(povms.size()), K);
}

Configuration QuantumModel::configuration() const {
    const ProblemShape s = shape();
    Configuration c{s, Matrix(s.D, s.N())};
    int col = 0;
    for (const auto& rho : states) c.entries.col(col++) = vectorize(rho, basis);
    for (const auto& povm : povms) {
        for (const auto& E : povm) c.entries.col(col++) = vectorize(E, basis);
    }
    return c;
}

QuantumModel random_quantum_model(const QuantumModelOptions& o) {
    ProblemShape::quantum_shape(o.d, o.W, o.V, o.K);

    std::vector<int> degeneracies;
    if (o.degeneracies) {
        if (!o.projective) throw std::invalid_argument("degeneracies apply only to projective measurements");
        degeneracies = *o.degeneracies;
        const int total = std::accumulate(degeneracies.begin(), degeneracies.end(), 0);
        const bool positive = std::all_of(degeneracies.begin(), degeneracies.end(), [](int x) { return x > 0; });
        if (static_cast<int>(degeneracies.size()) != o.K || total != o.d || !positive) {
            throw std::invalid_argument("degeneracies must be K = " + std::to_string(o.K) +
                                        " positive parts summing to d = " + std::to_string(o.d));
        }
    } else if (o.projective) {
        degeneracies = default_degeneracies(o.d, o.K);
    }

    Rng rng(o.seed);
    QuantumModel model;
    model.d = o.d;
    model.basis = make_hermitian_basis(o.d);
    for (int w = 0; w < o.W; ++w) model.states.push_back(random_density_matrix(o.d, rng));
    for (int v = 0; v < o.V; ++v) {
        model.povms.push_back(o.projective ? random_projective_povm(o.d, degeneracies, rng)
                                           : random_generic_povm(o.d, o.K, rng));
    }
    return model;
}

DataMatrix born_data(const QuantumModel& model) {
    const int W = static_cast<int>(model.states.size());
    const int K = model.povms.empty() ? 0 : static_cast<int>(model.povms.front().size());
    DataMatrix out{Matrix(W, static_cast<Eigen::Index>(model.povms.size()) * K)};
    for (int w = 0; w < W; ++w) {
        for (std::size_t v = 0; v < model.povms.size(); ++v) {
            for (int k = 0; k < K; ++k) {
                out.entries(w, static_cast<Eigen::Index>(v) * K + k) =
                    trace_product(model.states[w], model.povms[v][k]).real();
            }
        }
    }
    return out;
}

}  // namespace gramrig
