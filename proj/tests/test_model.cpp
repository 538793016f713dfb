#include <gtest/gtest.h>

#include <complex>
#include <random>

#include "gramrig/model.hpp"
#include "gramrig/rank.hpp"

using namespace gramrig;

namespace {

CMatrix random_hermitian(int d, Rng& rng) {
    std::normal_distribution<double> g;
    CMatrix A(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) A(i, j) = {g(rng), g(rng)};
    }
    return (A + A.adjoint()) / 2.0;
}

// Trace of a product without going through the basis.
double trace_product(const CMatrix& A, const CMatrix& B) { return (A * B).trace().real(); }

}  // namespace

TEST(HermitianBasis, DimensionOneIsScalarOne) {
    const auto basis = make_hermitian_basis(1);
    ASSERT_EQ(basis.size(), 1u);
    EXPECT_NEAR(basis[0](0, 0).real(), 1.0, 1e-15);
}

TEST(HermitianBasis, QubitIsScaledPaulis) {
    const auto basis = make_hermitian_basis(2);
    ASSERT_EQ(basis.size(), 4u);
    const double s = 1.0 / std::sqrt(2.0);
    const std::complex<double> i(0, 1);
    CMatrix I = CMatrix::Identity(2, 2) * s;
    CMatrix X(2, 2), Y(2, 2), Z(2, 2);
    X << 0, 1, 1, 0;
    Y << 0, -i, i, 0;
    Z << 1, 0, 0, -1;
    const std::vector<CMatrix> expected{I, X * s, Y * s, Z * s};
    for (std::size_t k = 0; k < 4; ++k) {
        bool sign_match = (basis[k] - expected[k]).norm() < 1e-14 || (basis[k] + expected[k]).norm() < 1e-14;
        EXPECT_TRUE(sign_match) << "element " << k;
    }
    for (std::size_t a = 0; a < 4; ++a) {
        for (std::size_t b = 0; b < 4; ++b) {
            EXPECT_NEAR(std::abs((basis[a] * basis[b]).trace()), a == b ? 1.0 : 0.0, 1e-14);
        }
    }
}

TEST(HermitianBasis, QutritGramIsIdentity) {
    const auto basis = make_hermitian_basis(3);
    ASSERT_EQ(basis.size(), 9u);
    Eigen::MatrixXcd G(9, 9);
    for (int a = 0; a < 9; ++a) {
        for (int b = 0; b < 9; ++b) G(a, b) = (basis[a] * basis[b]).trace();
    }
    EXPECT_LT((G - Eigen::MatrixXcd::Identity(9, 9)).norm(), 1e-12);
    for (const auto& s : basis) EXPECT_LT((s - s.adjoint()).norm(), 1e-15);
}

TEST(Vectorize, IdentityKeepsOnlyFirstComponent) {
    const auto basis = make_hermitian_basis(2);
    const Vector v = vectorize(CMatrix::Identity(2, 2), basis);
    ASSERT_EQ(v.size(), 4);
    EXPECT_NEAR(v(0), std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(v.tail(3).norm(), 0.0, 1e-15);
}

TEST(Vectorize, ProjectorOverlap) {
    const auto basis = make_hermitian_basis(2);
    CMatrix P0 = CMatrix::Zero(2, 2);
    P0(0, 0) = 1;
    EXPECT_NEAR(vectorize(P0, basis).dot(vectorize(P0, basis)), 1.0, 1e-14);
}

TEST(Vectorize, DotEqualsTraceForRandomPairs) {
    Rng rng(11);
    for (int d = 1; d <= 4; ++d) {
        const auto basis = make_hermitian_basis(d);
        for (int t = 0; t < 25; ++t) {
            const CMatrix A = random_hermitian(d, rng);
            const CMatrix B = random_hermitian(d, rng);
            EXPECT_NEAR(vectorize(A, basis).dot(vectorize(B, basis)), trace_product(A, B), 1e-12);
        }
    }
}

TEST(Vectorize, RejectsNonHermitian) {
    const auto basis = make_hermitian_basis(2);
    CMatrix A = CMatrix::Zero(2, 2);
    A(0, 1) = 1;
    EXPECT_THROW(vectorize(A, basis), std::invalid_argument);
}

TEST(QuantumModel, ProjectiveQubitHasOrthogonalRankOneProjectors) {
    QuantumModelOptions o;
    o.d = 2;
    o.W = 1;
    o.V = 1;
    o.K = 2;
    o.projective = true;
    o.degeneracies = std::vector<int>{1, 1};
    o.seed = 5;
    const QuantumModel m = random_quantum_model(o);
    ASSERT_EQ(m.povms.size(), 1u);
    const auto& E = m.povms[0];
    ASSERT_EQ(E.size(), 2u);
    EXPECT_LT((E[0] + E[1] - CMatrix::Identity(2, 2)).norm(), 1e-12);
    for (const auto& e : E) {
        EXPECT_LT((e * e - e).norm(), 1e-12);
        EXPECT_NEAR(e.trace().real(), 1.0, 1e-12);
    }
    EXPECT_LT((E[0] * E[1]).norm(), 1e-12);
}

TEST(QuantumModel, GenericPovmSumsToIdentityAndIsPositive) {
    for (int d = 2; d <= 4; ++d) {
        QuantumModelOptions o;
        o.d = d;
        o.W = 3;
        o.V = 4;
        o.K = d + 1;
        o.seed = 100 + d;
        const QuantumModel m = random_quantum_model(o);
        for (const auto& povm : m.povms) {
            CMatrix sum = CMatrix::Zero(d, d);
            for (const auto& e : povm) {
                sum += e;
                Eigen::SelfAdjointEigenSolver<CMatrix> eig(e);
                EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
            }
            EXPECT_LT((sum - CMatrix::Identity(d, d)).norm(), 1e-10);
        }
        for (const auto& rho : m.states) {
            EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
            Eigen::SelfAdjointEigenSolver<CMatrix> eig(rho);
            EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
        }
    }
}

TEST(QuantumModel, QutritDataMatrixHasFullRank) {
    QuantumModelOptions o;
    o.d = 3;
    o.W = 9;
    o.V = 5;
    o.K = 3;
    o.seed = 7;
    const DataMatrix data = born_data(random_quantum_model(o));
    EXPECT_EQ(svd_rank(data.entries).computed_rank, 9);
}

TEST(QuantumModel, SeedIsBitReproducible) {
    QuantumModelOptions o;
    o.d = 3;
    o.W = 4;
    o.V = 3;
    o.K = 3;
    o.seed = 42;
    const Configuration a = random_quantum_model(o).configuration();
    const Configuration b = random_quantum_model(o).configuration();
    EXPECT_TRUE(a.entries.cwiseEqual(b.entries).all());
    o.seed = 43;
    EXPECT_FALSE(a.entries.isApprox(random_quantum_model(o).configuration().entries));
}

TEST(QuantumModel, RejectsBadDegeneracies) {
    QuantumModelOptions o;
    o.d = 3;
    o.K = 2;
    o.projective = true;
    o.degeneracies = std::vector<int>{1, 1};
    EXPECT_THROW(random_quantum_model(o), std::invalid_argument);
    o.K = 4;
    o.degeneracies.reset();
    EXPECT_THROW(random_quantum_model(o), std::invalid_argument);
}

TEST(BornData, MaximallyMixedStateGivesHalfTrace) {
    QuantumModelOptions o;
    o.d = 2;
    o.W = 1;
    o.V = 3;
    o.K = 3;
    o.seed = 9;
    QuantumModel m = random_quantum_model(o);
    m.states[0] = CMatrix::Identity(2, 2) / 2.0;
    const DataMatrix data = born_data(m);
    for (int v = 0; v < 3; ++v) {
        for (int k = 0; k < 3; ++k) EXPECT_NEAR(data.entries(0, v * 3 + k), m.povms[v][k].trace().real() / 2, 1e-14);
    }
}

TEST(BornData, EigenstateOfProjectiveMeasurementIsDeterministic) {
    QuantumModelOptions o;
    o.d = 3;
    o.W = 1;
    o.V = 1;
    o.K = 3;
    o.projective = true;
    o.seed = 21;
    QuantumModel m = random_quantum_model(o);
    m.states[0] = m.povms[0][1];
    const DataMatrix data = born_data(m);
    EXPECT_NEAR(data.entries(0, 0), 0.0, 1e-12);
    EXPECT_NEAR(data.entries(0, 1), 1.0, 1e-12);
    EXPECT_NEAR(data.entries(0, 2), 0.0, 1e-12);
}

TEST(BornData, ProbabilitiesNormalized) {
    QuantumModelOptions o;
    o.d = 2;
    o.W = 4;
    o.V = 10;
    o.K = 2;
    o.seed = 3;
    const Matrix X = born_data(random_quantum_model(o)).entries;
    EXPECT_GE(X.minCoeff(), 0.0);
    EXPECT_LE(X.maxCoeff(), 1.0);
    for (int w = 0; w < 4; ++w) {
        EXPECT_NEAR(X.row(w).sum(), 10.0, 1e-12);
        for (int v = 0; v < 10; ++v) EXPECT_NEAR(X.row(w).segment(2 * v, 2).sum(), 1.0, 1e-12);
    }
}

TEST(BornData, MatchesVectorizedProduct) {
    Rng seeds(77);
    for (int t = 0; t < 100; ++t) {
        QuantumModelOptions o;
        o.d = 2 + t % 3;
        o.W = 1 + t % 5;
        o.V = 1 + t % 4;
        o.K = 2 + t % 2;
        o.projective = t % 2 == 0 && o.K <= o.d;
        o.seed = seeds();
        const QuantumModel m = random_quantum_model(o);
        const Matrix via_vectors = data_matrix(m.configuration()).entries;
        EXPECT_LT((born_data(m).entries - via_vectors).cwiseAbs().maxCoeff(), 1e-12) << "instance " << t;
    }
}

TEST(BornData, GenericConfigurationsSpan) {
    Rng seeds(5);
    for (int t = 0; t < 100; ++t) {
        QuantumModelOptions o;
        o.d = 2 + t % 2;
        o.W = o.d * o.d;
        o.V = 1 + t % 3;
        o.K = o.d;
        o.seed = seeds();
        const Configuration P = random_quantum_model(o).configuration();
        EXPECT_EQ(svd_rank(P.entries).computed_rank, o.d * o.d) << "instance " << t;
    }
}

// ---------------------------------------------------------------------------

TEST(ScenarioMask, PureStatesIsStateDiagonal) {
    const auto shape = ProblemShape::quantum_shape(2, 3, 2, 2);
    const OmegaMask m = scenario_mask(shape, Scenario::PureStates);
    EXPECT_EQ(m.st_pairs, (std::vector<IndexPair>{{0, 0}, {1, 1}, {2, 2}}));
    EXPECT_TRUE(m.m_pairs.empty());
    EXPECT_TRUE(m.include_data_block);
}

TEST(ScenarioMask, UnknownDegeneraciesKeepOffDiagonal) {
    const OmegaMask m = scenario_mask(ProblemShape::quantum_shape(2, 1, 1, 2), Scenario::ProjUnknownDeg);
    EXPECT_TRUE(m.st_pairs.empty());
    EXPECT_EQ(m.m_pairs, (std::vector<IndexPair>{{0, 1}}));
}

TEST(ScenarioMask, KnownDegeneraciesFillBlocks) {
    const OmegaMask m = scenario_mask(ProblemShape::quantum_shape(2, 1, 2, 2), Scenario::ProjKnownDeg);
    EXPECT_EQ(m.m_pairs, (std::vector<IndexPair>{{0, 0}, {0, 1}, {1, 1}, {2, 2}, {2, 3}, {3, 3}}));
}

TEST(ScenarioMask, CombinedIsUnion) {
    const auto shape = ProblemShape::quantum_shape(3, 4, 2, 3);
    const OmegaMask both = scenario_mask(shape, Scenario::PureAndProjKnownDeg);
    EXPECT_EQ(both.st_pairs, scenario_mask(shape, Scenario::PureStates).st_pairs);
    EXPECT_EQ(both.m_pairs, scenario_mask(shape, Scenario::ProjKnownDeg).m_pairs);
}

TEST(ScenarioMask, CanonicalAndIdempotent) {
    for (int d = 1; d <= 3; ++d) {
        for (auto s : {Scenario::PureStates, Scenario::ProjKnownDeg, Scenario::ProjUnknownDeg,
                       Scenario::PureAndProjKnownDeg}) {
            const OmegaMask m = scenario_mask(ProblemShape::quantum_shape(d, 5, 3, d + 1), s);
            EXPECT_EQ(canonicalize(m), m);
            for (const auto& p : m.st_pairs) EXPECT_LE(p.first, p.second);
            for (const auto& p : m.m_pairs) EXPECT_LE(p.first, p.second);
        }
    }
}

TEST(ScenarioMask, ProjectiveScenariosNeedSquareD) {
    EXPECT_THROW(scenario_mask(ProblemShape::free_shape(3, 2, 2, 2), Scenario::ProjKnownDeg), std::invalid_argument);
    EXPECT_NO_THROW(scenario_mask(ProblemShape::free_shape(3, 2, 2, 2), Scenario::PureStates));
    EXPECT_THROW(scenario_mask(ProblemShape::free_shape(3, 2, 2, 2), Scenario::Custom), std::invalid_argument);
}

TEST(ScenarioNames, RoundTripAndRejectUnknown) {
    for (const auto& n : scenario_names()) EXPECT_EQ(scenario_name(parse_scenario(n)), n);
    try {
        parse_scenario("mixed");
        FAIL();
    } catch (const std::invalid_argument& e) {
        EXPECT_NE(std::string(e.what()).find("proj-unknown"), std::string::npos);
    }
}

TEST(Canonicalize, SortsOrientsAndDeduplicates) {
    OmegaMask m;
    m.shape = ProblemShape::free_shape(2, 3, 1, 2);
    m.st_pairs = {{2, 0}, {0, 2}, {1, 1}};
    m.m_pairs = {{1, 0}};
    const OmegaMask c = canonicalize(m);
    EXPECT_EQ(c.st_pairs, (std::vector<IndexPair>{{0, 2}, {1, 1}}));
    EXPECT_EQ(c.m_pairs, (std::vector<IndexPair>{{0, 1}}));
    m.st_pairs = {{0, 3}};
    EXPECT_THROW(canonicalize(m), std::invalid_argument);
}

TEST(OmegaMask, GlobalPairOrder) {
    OmegaMask m;
    m.shape = ProblemShape::free_shape(2, 2, 1, 2);
    m.st_pairs = {{0, 1}};
    m.m_pairs = {{0, 0}};
    const auto g = m.global_pairs();
    const std::vector<IndexPair> expected{{0, 1}, {2, 2}, {0, 2}, {0, 3}, {1, 2}, {1, 3}};
    EXPECT_EQ(g, expected);
    EXPECT_EQ(m.size(), 6u);
}

// ---------------------------------------------------------------------------

TEST(ExtractKnowledge, IdentityEntries) {
    Configuration P{ProblemShape::free_shape(2, 2, 0, 1), Matrix::Identity(2, 2)};
    OmegaMask m;
    m.shape = P.shape;
    m.include_data_block = false;
    m.st_pairs = {{0, 1}};
    EXPECT_DOUBLE_EQ(extract_knowledge(P, m).values(0), 0.0);
    m.st_pairs = {{0, 0}};
    EXPECT_DOUBLE_EQ(extract_knowledge(P, m).values(0), 1.0);
}

TEST(ExtractKnowledge, FullMaskReassemblesGram) {
    Rng rng(3);
    const auto shape = ProblemShape::free_shape(3, 4, 2, 2);
    const Configuration P = random_configuration(shape, rng);
    OmegaMask m;
    m.shape = shape;
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) m.st_pairs.push_back({i, j});
    }
    for (int i = 0; i < 4; ++i) {
        for (int j = i; j < 4; ++j) m.m_pairs.push_back({i, j});
    }
    const GramKnowledge k = extract_knowledge(P, m);
    const auto pairs = m.global_pairs();
    ASSERT_EQ(pairs.size(), static_cast<std::size_t>(8 * 9 / 2));
    Matrix G = Matrix::Constant(8, 8, std::nan(""));
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        G(pairs[n].first, pairs[n].second) = G(pairs[n].second, pairs[n].first) = k.values(static_cast<Eigen::Index>(n));
    }
    Matrix direct(8, 8);
    for (int i = 0; i < 8; ++i) {
        for (int j = 0; j < 8; ++j) {
            double s = 0;
            for (int a = 0; a < 3; ++a) s += P.entries(a, i) * P.entries(a, j);
            direct(i, j) = s;
        }
    }
    EXPECT_LT((G - direct).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_LT((gram(P) - direct).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(RandomConfiguration, IntegerRangeAndDeterminism) {
    const auto shape = ProblemShape::free_shape(4, 5, 3, 2);
    Rng a(9), b(9);
    const IntMatrix A = random_integer_configuration(shape, a);
    const IntMatrix B = random_integer_configuration(shape, b);
    EXPECT_EQ(A, B);
    EXPECT_EQ(A.rows(), 4);
    EXPECT_EQ(A.cols(), 11);
    EXPECT_GE(A.minCoeff(), -10);
    EXPECT_LE(A.maxCoeff(), 10);
}

TEST(ProblemShape, Validation) {
    EXPECT_THROW(ProblemShape::quantum_shape(0, 1, 1, 1), std::invalid_argument);
    EXPECT_THROW(ProblemShape::free_shape(2, -1, 1, 1), std::invalid_argument);
    EXPECT_THROW(ProblemShape::free_shape(2, 1, 1, 0), std::invalid_argument);
    const auto s = ProblemShape::quantum_shape(3, 2, 4, 3);
    EXPECT_EQ(s.D, 9);
    EXPECT_EQ(s.N(), 14);
    EXPECT_EQ(exact_sqrt(36), 6);
    EXPECT_FALSE(exact_sqrt(35).has_value());
}
