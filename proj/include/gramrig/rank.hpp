#pragma once

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "gramrig/model.hpp"

namespace gramrig {

enum class RankBackend { SvdTol, FiniteField, Consensus };

std::string_view backend_name(RankBackend b);
RankBackend parse_backend(std::string_view name);  // "svd", "gf", "consensus"

inline constexpr double kDefaultRelTol = 1e-9;

/// 2^61 - 1, used when no prime is supplied.
inline constexpr std::uint64_t kMersenne61 = (std::uint64_t{1} << 61) - 1;

struct RankReport {
    int computed_rank = 0;
    int target_rank = 0;  // filled in by the caller that compares against it
    RankBackend backend = RankBackend::SvdTol;
    std::optional<std::vector<double>> spectrum;
    std::optional<double> gap_ratio;  // sigma_r / sigma_{r+1}; +inf when sigma_{r+1} is zero or absent
    std::optional<std::uint64_t> prime;
    // Consensus only.
    std::optional<int> svd_rank;
    std::optional<bool> backends_agree;
};

/// Numerical rank: number of singular values above
/// rel_tol * sigma_max * max(rows, cols).
RankReport svd_rank(const Matrix& A, double rel_tol = kDefaultRelTol);

/// Exact rank over GF(p) by Gaussian elimination.
RankReport finite_field_rank(const IntMatrix& A, std::optional<std::uint64_t> prime = std::nullopt);

/// Same, for a real matrix that must hold exact integers (std::invalid_argument otherwise).
RankReport finite_field_rank(const Matrix& A, std::optional<std::uint64_t> prime = std::nullopt);

/// Runs both backends and returns the finite-field result with the
/// agreement flag set.
RankReport rank_with_consensus(const IntMatrix& A, double rel_tol = kDefaultRelTol,
                               std::optional<std::uint64_t> prime = std::nullopt);

bool is_prime(std::uint64_t n);

/// Uniformly chosen prime in [2^61 - 2^40, 2^61).
std::uint64_t random_prime_near_2_61(Rng& rng);

/// Arithmetic modulo an odd prime p < 2^62 in Montgomery form.
class PrimeField {
public:
    explicit PrimeField(std::uint64_t p);

    [[nodiscard]] std::uint64_t prime() const { return p_; }
    [[nodiscard]] std::uint64_t from_int(std::int64_t x) const;
    [[nodiscard]] std::uint64_t to_uint(std::uint64_t a) const { return reduce(a); }
    [[nodiscard]] std::uint64_t add(std::uint64_t a, std::uint64_t b) const {
        std::uint64_t s = a + b;
        return s >= p_ ? s - p_ : s;
    }
    [[nodiscard]] std::uint64_t sub(std::uint64_t a, std::uint64_t b) const { return a >= b ? a - b : a + p_ - b; }
    [[nodiscard]] std::uint64_t mul(std::uint64_t a, std::uint64_t b) const {
        return reduce(static_cast<unsigned __int128>(a) * b);
    }
    [[nodiscard]] std::uint64_t inverse(std::uint64_t a) const;
    [[nodiscard]] std::uint64_t one() const { return r_mod_p_; }

private:
    [[nodiscard]] std::uint64_t reduce(unsigned __int128 t) const {
        const std::uint64_t m = static_cast<std::uint64_t>(t) * neg_inv_;
        const std::uint64_t u = static_cast<std::uint64_t>((t + static_cast<unsigned __int128>(m) * p_) >> 64);
        return u >= p_ ? u - p_ : u;
    }

    std::uint64_t p_;
    std::uint64_t neg_inv_;   // -p^{-1} mod 2^64
    std::uint64_t r_mod_p_;   // 2^64 mod p
    std::uint64_t r2_mod_p_;  // 2^128 mod p
};

/// Pivot positions of GF(p) elimination with full pivoting. The submatrix
/// of the returned rows and columns is invertible mod p.
struct ModularPivots {
    std::vector<int> rows;
    std::vector<int> cols;
};
ModularPivots modular_pivots(const IntMatrix& A, std::uint64_t prime);

}  // namespace gramrig
