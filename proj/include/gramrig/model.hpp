#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace gramrig {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;
using Rng = std::mt19937_64;

/// Raised when a computation cannot produce a trustworthy answer: rank
/// deficiency, inconsistent knowledge, failed factorization.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// The known entries leave the answer underdetermined.
class NotUniqueError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Sizes of a state/measurement problem.
///
/// `d` is the Hilbert-space dimension when the instance is quantum-derived
/// (then D = d*d), and 0 for free-dimension instances.
struct ProblemShape {
    int d = 0;
    int D = 1;
    int W = 0;
    int V = 0;
    int K = 1;

    [[nodiscard]] int N() const { return W + V * K; }
    [[nodiscard]] int measurement_columns() const { return V * K; }
    [[nodiscard]] bool quantum() const { return d > 0; }

    static ProblemShape quantum_shape(int d, int W, int V, int K);
    static ProblemShape free_shape(int D, int W, int V, int K);

    /// Throws std::invalid_argument when sizes are inconsistent.
    void validate() const;

    friend bool operator==(const ProblemShape&, const ProblemShape&) = default;
};

/// Returns s when D == s*s, otherwise nullopt.
std::optional<int> exact_sqrt(int D);

/// Zero-based index pair; canonical form has first <= second.
struct IndexPair {
    int first = 0;
    int second = 0;

    [[nodiscard]] IndexPair canonical() const {
        return first <= second ? *this : IndexPair{second, first};
    }
    friend auto operator<=>(const IndexPair&, const IndexPair&) = default;
};

/// A D x N real matrix; the first W columns are state vectors, the remaining
/// V*K columns are measurement-operator vectors.
struct Configuration {
    ProblemShape shape;
    Matrix entries;

    [[nodiscard]] auto states() const { return entries.leftCols(shape.W); }
    [[nodiscard]] auto measurements() const { return entries.rightCols(shape.measurement_columns()); }

    /// Checks dimensions against the shape.
    void validate() const;
};

/// Set of known Gram entries, split by block. Pairs are zero-based within
/// their block: st_pairs index states, m_pairs index measurement columns.
struct OmegaMask {
    ProblemShape shape;
    std::vector<IndexPair> st_pairs;
    std::vector<IndexPair> m_pairs;
    bool include_data_block = true;

    /// |st_pairs| + |m_pairs| + (data block ? W*V*K : 0).
    [[nodiscard]] std::size_t size() const;

    /// Every known entry as a pair of global column indices, in canonical
    /// enumeration order: st_pairs, then m_pairs, then the data block, each
    /// row-major.
    [[nodiscard]] std::vector<IndexPair> global_pairs() const;

    friend bool operator==(const OmegaMask&, const OmegaMask&) = default;
};

/// Sorts, deduplicates and orients pairs; throws std::invalid_argument on
/// out-of-range indices.
OmegaMask canonicalize(OmegaMask mask);

/// Union of two masks over the same shape.
OmegaMask merge_masks(const OmegaMask& a, const OmegaMask& b);

enum class Scenario {
    PureStates,           // diagonal of the state Gram matrix
    ProjKnownDeg,         // full d x d diagonal blocks of the measurement Gram matrix
    ProjUnknownDeg,       // the same blocks without their diagonals
    PureAndProjKnownDeg,  // union of the first two
    Custom,
};

std::string_view scenario_name(Scenario s);
Scenario parse_scenario(std::string_view name);
const std::vector<std::string>& scenario_names();

/// Known-entry pattern of a built-in scenario; the data block is always known.
OmegaMask scenario_mask(const ProblemShape& shape, Scenario scenario);

struct GramKnowledge {
    OmegaMask mask;
    Vector values;  // aligned with mask.global_pairs()
};

struct DataMatrix {
    Matrix entries;  // W x V*K
};

/// Values of P^T P on the mask's pairs.
GramKnowledge extract_knowledge(const Configuration& P, const OmegaMask& mask);

/// P_st^T P_m.
DataMatrix data_matrix(const Configuration& P);

/// Full Gram matrix P^T P.
Matrix gram(const Configuration& P);

/// I.i.d. standard Gaussian configuration.
Configuration random_configuration(const ProblemShape& shape, Rng& rng);

/// Entries uniform in [lo, hi]; used for exact-arithmetic rank tests.
IntMatrix random_integer_configuration(const ProblemShape& shape, Rng& rng, int lo = -10, int hi = 10);

// ---------------------------------------------------------------------------
// Quantum-structured instances

struct QuantumModel {
    int d = 0;
    std::vector<CMatrix> states;
    std::vector<std::vector<CMatrix>> povms;
    std::vector<CMatrix> basis;

    [[nodiscard]] ProblemShape shape() const;
    /// Vectorized states followed by vectorized POVM elements.
    [[nodiscard]] Configuration configuration() const;
};

/// Generalized Gell-Mann matrices plus I/sqrt(d), orthonormal under
/// tr(A B). For d = 2 this is (I, X, Y, Z)/sqrt(2).
std::vector<CMatrix> make_hermitian_basis(int d);

/// Coordinates tr(sigma_a H). Throws std::invalid_argument if any coordinate
/// has imaginary part above 1e-10.
Vector vectorize(const CMatrix& H, const std::vector<CMatrix>& basis);

struct QuantumModelOptions {
    int d = 2;
    int W = 1;
    int V = 1;
    int K = 2;
    bool projective = false;
    std::optional<std::vector<int>> degeneracies;  // projective only; K parts summing to d
    std::uint64_t seed = 0;
};

QuantumModel random_quantum_model(const QuantumModelOptions& options);

/// Born-rule table: entry (w, v*K + k) = tr(rho_w E_vk).
DataMatrix born_data(const QuantumModel& model);

}  // namespace gramrig
