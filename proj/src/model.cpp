#include "gramrig/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace gramrig {

ProblemShape ProblemShape::quantum_shape(int d, int W, int V, int K) {
    ProblemShape s{d, d * d, W, V, K};
    s.validate();
    return s;
}

ProblemShape ProblemShape::free_shape(int D, int W, int V, int K) {
    ProblemShape s{0, D, W, V, K};
    s.validate();
    return s;
}

void ProblemShape::validate() const {
    if (D < 1) throw std::invalid_argument("ambient dimension D must be >= 1");
    if (W < 0 || V < 0) throw std::invalid_argument("W and V must be non-negative");
    if (K < 1) throw std::invalid_argument("K must be >= 1");
    if (d < 0) throw std::invalid_argument("Hilbert dimension d must be >= 0");
    if (d > 0 && D != d * d) {
        throw std::invalid_argument("quantum-derived shape requires D = d^2");
    }
}

std::optional<int> exact_sqrt(int D) {
    if (D < 0) return std::nullopt;
    int s = static_cast<int>(std::lround(std::sqrt(static_cast<double>(D))));
    for (int c = std::max(0, s - 1); c <= s + 1; ++c) {
        if (c * c == D) return c;
    }
    return std::nullopt;
}

void Configuration::validate() const {
    shape.validate();
    if (entries.rows() != shape.D || entries.cols() != shape.N()) {
        throw std::invalid_argument("configuration must be D x N (" + std::to_string(shape.D) + " x " +
                                    std::to_string(shape.N()) + "), got " + std::to_string(entries.rows()) +
                                    " x " + std::to_string(entries.cols()));
    }
}

// ---------------------------------------------------------------------------

std::size_t OmegaMask::size() const {
    std::size_t n = st_pairs.size() + m_pairs.size();
    if (include_data_block) n += static_cast<std::size_t>(shape.W) * shape.measurement_columns();
    return n;
}

std::vector<IndexPair> OmegaMask::global_pairs() const {
    std::vector<IndexPair> out;
    out.reserve(size());
    for (const auto& p : st_pairs) out.push_back(p);
    for (const auto& p : m_pairs) out.push_back({shape.W + p.first, shape.W + p.second});
    if (include_data_block) {
        for (int i = 0; i < shape.W; ++i) {
            for (int j = 0; j < shape.measurement_columns(); ++j) out.push_back({i, shape.W + j});
        }
    }
    return out;
}

namespace {

void canonicalize_block(std::vector<IndexPair>& pairs, int bound, const char* what) {
    for (auto& p : pairs) {
        if (p.first < 0 || p.second < 0 || p.first >= bound || p.second >= bound) {
            throw std::invalid_argument(std::string(what) + " pair (" + std::to_string(p.first + 1) + "," +
                                        std::to_string(p.second + 1) + ") out of range 1.." +
                                        std::to_string(bound));
        }
        p = p.canonical();
    }
    std::sort(pairs.begin(), pairs.end());
    pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
}

}  // namespace

OmegaMask canonicalize(OmegaMask mask) {
    mask.shape.validate();
    canonicalize_block(mask.st_pairs, mask.shape.W, "state");
    canonicalize_block(mask.m_pairs, mask.shape.measurement_columns(), "measurement");
    return mask;
}

OmegaMask merge_masks(const OmegaMask& a, const OmegaMask& b) {
    if (!(a.shape == b.shape)) throw std::invalid_argument("cannot merge masks of different shapes");
    OmegaMask out = a;
    out.st_pairs.insert(out.st_pairs.end(), b.st_pairs.begin(), b.st_pairs.end());
    out.m_pairs.insert(out.m_pairs.end(), b.m_pairs.begin(), b.m_pairs.end());
    out.include_data_block = a.include_data_block || b.include_data_block;
    return canonicalize(std::move(out));
}

// ---------------------------------------------------------------------------

namespace {

struct ScenarioEntry {
    Scenario scenario;
    std::string_view name;
};

constexpr std::array<ScenarioEntry, 5> kScenarios{{
    {Scenario::PureStates, "pure"},
    {Scenario::ProjKnownDeg, "proj-known"},
    {Scenario::ProjUnknownDeg, "proj-unknown"},
    {Scenario::PureAndProjKnownDeg, "pure+proj-known"},
    {Scenario::Custom, "custom"},
}};

// Measurement columns grouped into consecutive blocks of size d; a trailing
// short block is kept when V*K is not a multiple of d.
std::vector<IndexPair> block_pairs(const ProblemShape& shape, bool with_diagonal) {
    const auto d = exact_sqrt(shape.D);
    if (!d) {
        throw std::invalid_argument("projective-measurement scenarios need D to be a perfect square (D = " +
                                    std::to_string(shape.D) + ")");
    }
    std::vector<IndexPair> pairs;
    const int n = shape.measurement_columns();
    for (int start = 0; start < n; start += *d) {
        const int stop = std::min(n, start + *d);
        for (int i = start; i < stop; ++i) {
            for (int j = with_diagonal ? i : i + 1; j < stop; ++j) pairs.push_back({i, j});
        }
    }
    return pairs;
}

}  // namespace

std::string_view scenario_name(Scenario s) {
    for (const auto& e : kScenarios) {
        if (e.scenario == s) return e.name;
    }
    return "unknown";
}

const std::vector<std::string>& scenario_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& e : kScenarios) v.emplace_back(e.name);
        return v;
    }();
    return names;
}

Scenario parse_scenario(std::string_view name) {
    for (const auto& e : kScenarios) {
        if (e.name == name) return e.scenario;
    }
    std::string valid;
    for (const auto& n : scenario_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown scenario '" + std::string(name) + "' (valid: " + valid + ")");
}

OmegaMask scenario_mask(const ProblemShape& shape, Scenario scenario) {
    shape.validate();
    OmegaMask mask;
    mask.shape = shape;
    mask.include_data_block = true;
    switch (scenario) {
        case Scenario::PureStates:
            for (int i = 0; i < shape.W; ++i) mask.st_pairs.push_back({i, i});
            break;
        case Scenario::ProjKnownDeg:
            mask.m_pairs = block_pairs(shape, true);
            break;
        case Scenario::ProjUnknownDeg:
            mask.m_pairs = block_pairs(shape, false);
            break;
        case Scenario::PureAndProjKnownDeg:
            return merge_masks(scenario_mask(shape, Scenario::PureStates),
                               scenario_mask(shape, Scenario::ProjKnownDeg));
        case Scenario::Custom:
            throw std::invalid_argument("custom scenario requires an explicit mask file");
    }
    return canonicalize(std::move(mask));
}

// ---------------------------------------------------------------------------

GramKnowledge extract_knowledge(const Configuration& P, const OmegaMask& mask) {
    P.validate();
    if (!(P.shape == mask.shape)) throw std::invalid_argument("mask shape does not match configuration");
    const auto pairs = mask.global_pairs();
    GramKnowledge k{mask, Vector(static_cast<Eigen::Index>(pairs.size()))};
    for (std::size_t n = 0; n < pairs.size(); ++n) {
        k.values(static_cast<Eigen::Index>(n)) = P.entries.col(pairs[n].first).dot(P.entries.col(pairs[n].second));
    }
    return k;
}

DataMatrix data_matrix(const Configuration& P) {
    P.validate();
    return {P.states().transpose() * P.measurements()};
}

Matrix gram(const Configuration& P) { return P.entries.transpose() * P.entries; }

Configuration random_configuration(const ProblemShape& shape, Rng& rng) {
    shape.validate();
    std::normal_distribution<double> normal(0.0, 1.0);
    Configuration c{shape, Matrix(shape.D, shape.N())};
    for (Eigen::Index j = 0; j < c.entries.cols(); ++j) {
        for (Eigen::Index i = 0; i < c.entries.rows(); ++i) c.entries(i, j) = normal(rng);
    }
    return c;
}

IntMatrix random_integer_configuration(const ProblemShape& shape, Rng& rng, int lo, int hi) {
    shape.validate();
    std::uniform_int_distribution<int> uniform(lo, hi);
    IntMatrix P(shape.D, shape.N());
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
        for (Eigen::Index i = 0; i < P.rows(); ++i) P(i, j) = uniform(rng);
    }
    return P;
}

}  // namespace gramrig
