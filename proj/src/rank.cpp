#include "gramrig/rank.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/SVD>

namespace gramrig {

std::string_view backend_name(RankBackend b) {
    switch (b) {
        case RankBackend::SvdTol: return "svd";
        case RankBackend::FiniteField: return "gf";
        case RankBackend::Consensus: return "consensus";
    }
    return "unknown";
}

RankBackend parse_backend(std::string_view name) {
    if (name == "svd") return RankBackend::SvdTol;
    if (name == "gf") return RankBackend::FiniteField;
    if (name == "consensus") return RankBackend::Consensus;
    throw std::invalid_argument("unknown rank backend '" + std::string(name) + "' (valid: svd, gf, consensus)");
}

// ---------------------------------------------------------------------------

RankReport svd_rank(const Matrix& A, double rel_tol) {
    if (!(rel_tol > 0)) throw std::invalid_argument("rel_tol must be positive");
    const auto dims = std::to_string(A.rows()) + "x" + std::to_string(A.cols());
    if (!A.allFinite()) throw NumericalError("svd_rank: non-finite entries in " + dims + " matrix");

    RankReport report;
    report.backend = RankBackend::SvdTol;
    report.spectrum.emplace();
    if (A.size() == 0) {
        report.gap_ratio = std::numeric_limits<double>::infinity();
        return report;
    }

    Eigen::BDCSVD<Matrix> svd(A);
    if (svd.info() != Eigen::Success) throw NumericalError("SVD failed to converge on " + dims + " matrix");
    const Vector& s = svd.singularValues();
    report.spectrum->assign(s.data(), s.data() + s.size());

    const double sigma_max = s.size() > 0 ? s(0) : 0.0;
    const double threshold = rel_tol * sigma_max * static_cast<double>(std::max(A.rows(), A.cols()));
    int r = 0;
    while (r < s.size() && s(r) > threshold) ++r;
    report.computed_rank = r;

    if (r > 0) {
        if (r == s.size() || s(r) == 0.0) {
            report.gap_ratio = std::numeric_limits<double>::infinity();
        } else {
            report.gap_ratio = s(r - 1) / s(r);
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

PrimeField::PrimeField(std::uint64_t p) : p_(p) {
    if (p < 3 || p % 2 == 0 || p >= (std::uint64_t{1} << 62)) {
        throw std::invalid_argument("prime field modulus must be an odd prime below 2^62");
    }
    std::uint64_t inv = p;  // correct to 3 bits for odd p
    for (int i = 0; i < 6; ++i) inv *= 2 - p * inv;
    neg_inv_ = ~inv + 1;
    r_mod_p_ = static_cast<std::uint64_t>((static_cast<unsigned __int128>(1) << 64) % p);
    r2_mod_p_ = static_cast<std::uint64_t>(static_cast<unsigned __int128>(r_mod_p_) * r_mod_p_ % p);
}

std::uint64_t PrimeField::from_int(std::int64_t x) const {
    const auto p = static_cast<std::int64_t>(p_);
    std::int64_t m = x % p;
    if (m < 0) m += p;
    return mul(static_cast<std::uint64_t>(m), r2_mod_p_);
}

std::uint64_t PrimeField::inverse(std::uint64_t a) const {
    if (a == 0) throw std::domain_error("inverse of zero in GF(p)");
    std::uint64_t result = one();
    std::uint64_t base = a;
    for (std::uint64_t e = p_ - 2; e > 0; e >>= 1) {
        if (e & 1) result = mul(result, base);
        base = mul(base, base);
    }
    return result;
}

namespace {

std::uint64_t mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t m) {
    return static_cast<std::uint64_t>(static_cast<unsigned __int128>(a) * b % m);
}

std::uint64_t powmod(std::uint64_t a, std::uint64_t e, std::uint64_t m) {
    std::uint64_t r = 1;
    a %= m;
    for (; e > 0; e >>= 1) {
        if (e & 1) r = mulmod(r, a, m);
        a = mulmod(a, a, m);
    }
    return r;
}

// Row-major dense matrix over GF(p) in Montgomery form.
struct ModMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint64_t> a;

    std::uint64_t* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
};

ModMatrix to_mod(const IntMatrix& A, const PrimeField& F) {
    ModMatrix M{static_cast<int>(A.rows()), static_cast<int>(A.cols()), {}};
    M.a.resize(static_cast<std::size_t>(M.rows) * M.cols);
    for (int i = 0; i < M.rows; ++i) {
        for (int j = 0; j < M.cols; ++j) M.row(i)[j] = F.from_int(A(i, j));
    }
    return M;
}

// Row echelon elimination; returns (original row, column) of each pivot.
ModularPivots eliminate(ModMatrix& M, const PrimeField& F) {
    ModularPivots piv;
    std::vector<int> row_of(M.rows);
    for (int i = 0; i < M.rows; ++i) row_of[i] = i;

    int rank = 0;
    for (int c = 0; c < M.cols && rank < M.rows; ++c) {
        int found = -1;
        for (int i = rank; i < M.rows; ++i) {
            if (M.row(i)[c] != 0) {
                found = i;
                break;
            }
        }
        if (found < 0) continue;
        if (found != rank) {
            std::swap_ranges(M.row(found), M.row(found) + M.cols, M.row(rank));
            std::swap(row_of[found], row_of[rank]);
        }
        const std::uint64_t* pivot_row = M.row(rank);
        const std::uint64_t inv = F.inverse(pivot_row[c]);
        for (int i = rank + 1; i < M.rows; ++i) {
            std::uint64_t* r = M.row(i);
            if (r[c] == 0) continue;
            const std::uint64_t f = F.mul(r[c], inv);
            r[c] = 0;
            for (int j = c + 1; j < M.cols; ++j) {
                if (pivot_row[j] != 0) r[j] = F.sub(r[j], F.mul(f, pivot_row[j]));
            }
        }
        piv.rows.push_back(row_of[rank]);
        piv.cols.push_back(c);
        ++rank;
    }
    return piv;
}

}  // namespace

bool is_prime(std::uint64_t n) {
    if (n < 2) return false;
    for (std::uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        if (n % p == 0) return n == p;
    }
    std::uint64_t d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    // Deterministic witness set for all 64-bit integers.
    for (std::uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull, 23ull, 29ull, 31ull, 37ull}) {
        std::uint64_t x = powmod(a, d, n);
        if (x == 1 || x == n - 1) continue;
        bool composite = true;
        for (int r = 1; r < s; ++r) {
            x = mulmod(x, x, n);
            if (x == n - 1) {
                composite = false;
                break;
            }
        }
        if (composite) return false;
    }
    return true;
}

std::uint64_t random_prime_near_2_61(Rng& rng) {
    const std::uint64_t hi = std::uint64_t{1} << 61;
    std::uniform_int_distribution<std::uint64_t> dist(hi - (std::uint64_t{1} << 40), hi - 1);
    for (;;) {
        const std::uint64_t candidate = dist(rng) | 1;
        if (is_prime(candidate)) return candidate;
    }
}

ModularPivots modular_pivots(const IntMatrix& A, std::uint64_t prime) {
    const PrimeField F(prime);
    ModMatrix M = to_mod(A, F);
    return eliminate(M, F);
}

RankReport finite_field_rank(const IntMatrix& A, std::optional<std::uint64_t> prime) {
    const std::uint64_t p = prime.value_or(kMersenne61);
    if (!is_prime(p)) throw std::invalid_argument("modulus " + std::to_string(p) + " is not prime");
    RankReport report;
    report.backend = RankBackend::FiniteField;
    report.prime = p;
    if (A.size() > 0) report.computed_rank = static_cast<int>(modular_pivots(A, p).rows.size());
    return report;
}

RankReport finite_field_rank(const Matrix& A, std::optional<std::uint64_t> prime) {
    IntMatrix Ai(A.rows(), A.cols());
    for (Eigen::Index j = 0; j < A.cols(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            const double x = A(i, j);
            if (!std::isfinite(x) || x != std::round(x) || std::abs(x) > 9.0e15) {
                throw std::invalid_argument("finite_field_rank: entry (" + std::to_string(i) + "," +
                                            std::to_string(j) + ") = " + std::to_string(x) +
                                            " is not an exact integer");
            }
            Ai(i, j) = static_cast<std::int64_t>(x);
        }
    }
    return finite_field_rank(Ai, prime);
}

RankReport rank_with_consensus(const IntMatrix& A, double rel_tol, std::optional<std::uint64_t> prime) {
    RankReport exact = finite_field_rank(A, prime);
    const RankReport numeric = svd_rank(A.cast<double>(), rel_tol);
    exact.backend = RankBackend::Consensus;
    exact.spectrum = numeric.spectrum;
    exact.gap_ratio = numeric.gap_ratio;
    exact.svd_rank = numeric.computed_rank;
    exact.backends_agree = numeric.computed_rank == exact.computed_rank;
    return exact;
}

}  // namespace gramrig
