#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "gramrig/sweep.hpp"

using namespace gramrig;

namespace {

// Minimal XML well-formedness check: balanced tags, quoted attributes,
// exactly one root element.
bool well_formed_xml(const std::string& s) {
    std::vector<std::string> stack;
    int roots = 0;
    std::size_t i = 0;
    if (s.rfind("<?xml", 0) == 0) {
        i = s.find("?>");
        if (i == std::string::npos) return false;
        i += 2;
    }
    while (i < s.size()) {
        const std::size_t lt = s.find('<', i);
        if (lt == std::string::npos) break;
        const std::size_t gt = s.find('>', lt);
        if (gt == std::string::npos) return false;
        std::string tag = s.substr(lt + 1, gt - lt - 1);
        i = gt + 1;
        if (tag.empty()) return false;
        if (std::count(tag.begin(), tag.end(), '"') % 2 != 0) return false;
        if (tag[0] == '/') {
            if (stack.empty() || stack.back() != tag.substr(1)) return false;
            stack.pop_back();
            continue;
        }
        const bool self_closing = tag.back() == '/';
        const std::string name = tag.substr(0, tag.find_first_of(" \t\n/"));
        if (stack.empty()) ++roots;
        if (!self_closing) stack.push_back(name);
    }
    return stack.empty() && roots == 1;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);) out.push_back(l);
    return out;
}

bool tested(const PhaseCell& c) {
    return c.verdict == CellVerdict::Completable || c.verdict == CellVerdict::Flexible;
}

}  // namespace

TEST(Sweep, TableOneCellIsCompletable) {
    SweepOptions o;
    o.d = 2;
    o.test_kind = TestKind::Global;
    o.w_min = 8;
    o.w_max = 11;
    o.v_min = 3;
    o.v_max = 5;
    const PhaseDiagram d = run_sweep(o);
    const PhaseCell* c = d.find(10, 4);
    ASSERT_NE(c, nullptr);
    EXPECT_EQ(c->verdict, CellVerdict::Completable);
    EXPECT_EQ(c->rank, 10);
    EXPECT_EQ(c->target, 10);
    EXPECT_EQ(d.find(9, 4)->verdict, CellVerdict::Flexible);
}

TEST(Sweep, SmallCellsForcedWithoutTesting) {
    SweepOptions o;
    o.d = 3;
    o.w_min = 0;
    o.w_max = 4;
    o.v_min = 0;
    o.v_max = 3;
    const PhaseDiagram d = run_sweep(o);
    EXPECT_EQ(d.grid.size(), 20u);
    for (const auto& c : d.grid) {
        const bool small = c.W + 3 * c.V < 9;
        EXPECT_EQ(c.verdict == CellVerdict::ForcedByConvention, small) << c.W << "," << c.V;
        if (small) {
            EXPECT_EQ(c.runtime_ms, 0.0);
            EXPECT_EQ(c.rank, 0);
        }
    }
    EXPECT_FALSE(d.convention_note.empty());
}

TEST(Sweep, CombinedScenarioBoundaryIsMonotone) {
    SweepOptions o;
    o.d = 2;
    o.scenario = Scenario::PureAndProjKnownDeg;
    o.w_max = 12;
    o.v_max = 12;
    const PhaseDiagram d = run_sweep(o);
    ASSERT_EQ(d.grid.size(), 144u);
    int completable = 0, flexible = 0;
    for (const auto& c : d.grid) {
        ASSERT_NE(c.verdict, CellVerdict::Undetermined) << c.note;
        if (!tested(c)) continue;
        completable += c.verdict == CellVerdict::Completable;
        flexible += c.verdict == CellVerdict::Flexible;
        if (c.verdict != CellVerdict::Completable) continue;
        for (const auto* next : {d.find(c.W + 1, c.V), d.find(c.W, c.V + 1)}) {
            if (next != nullptr && tested(*next)) {
                EXPECT_EQ(next->verdict, CellVerdict::Completable);
            }
        }
    }
    EXPECT_GT(completable, 0);
    EXPECT_GT(flexible, 0);
}

TEST(Sweep, GlobalMonotoneForPureStates) {
    SweepOptions o;
    o.d = 2;
    o.test_kind = TestKind::Global;
    o.w_max = 12;
    o.v_max = 6;
    const PhaseDiagram d = run_sweep(o);
    for (const auto& c : d.grid) {
        if (c.verdict != CellVerdict::Completable) continue;
        for (const auto* next : {d.find(c.W + 1, c.V), d.find(c.W, c.V + 1)}) {
            if (next != nullptr && tested(*next)) {
                EXPECT_EQ(next->verdict, CellVerdict::Completable);
            }
        }
    }
    // Fewer than D measurement columns leaves the data matrix rank-deficient.
    const PhaseCell* thin = d.find(12, 1);
    ASSERT_NE(thin, nullptr);
    EXPECT_NE(thin->verdict, CellVerdict::Completable);
    EXPECT_FALSE(thin->note.empty());
}

TEST(Sweep, DeterministicAcrossThreadCounts) {
    SweepOptions o;
    o.d = 2;
    o.scenario = Scenario::PureAndProjKnownDeg;
    o.w_max = 8;
    o.v_max = 6;
    o.seed = 99;
    o.record_timing = false;
    std::string reference;
    for (int jobs : {1, 4, 16}) {
        o.jobs = jobs;
        const std::string csv = to_csv(run_sweep(o));
        if (reference.empty()) reference = csv;
        EXPECT_EQ(csv, reference) << "jobs=" << jobs;
    }
}

TEST(Sweep, GridCompleteness) {
    for (auto [w0, w1, v0, v1] : {std::array{1, 1, 1, 1}, std::array{2, 5, 1, 3}, std::array{0, 6, 4, 4}}) {
        SweepOptions o;
        o.d = 2;
        o.w_min = w0;
        o.w_max = w1;
        o.v_min = v0;
        o.v_max = v1;
        const PhaseDiagram d = run_sweep(o);
        EXPECT_EQ(d.grid.size(), static_cast<std::size_t>((w1 - w0 + 1) * (v1 - v0 + 1)));
        for (int W = w0; W <= w1; ++W) {
            for (int V = v0; V <= v1; ++V) EXPECT_NE(d.find(W, V), nullptr);
        }
    }
    SweepOptions bad;
    bad.w_min = 3;
    bad.w_max = 2;
    EXPECT_THROW(run_sweep(bad), std::invalid_argument);
}

TEST(Sweep, CellSeedIsStableAndDistinct) {
    EXPECT_EQ(cell_seed(1, 2, 3), cell_seed(1, 2, 3));
    EXPECT_NE(cell_seed(1, 2, 3), cell_seed(1, 3, 2));
    EXPECT_NE(cell_seed(1, 2, 3), cell_seed(2, 2, 3));
}

TEST(Emit, SingleCellCsv) {
    SweepOptions o;
    o.d = 2;
    o.w_min = o.w_max = 3;
    o.v_min = o.v_max = 2;
    const auto rows = lines(to_csv(run_sweep(o)));
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0], "W,V,verdict,rank,target,runtime_ms");
    EXPECT_TRUE(std::regex_match(rows[1], std::regex(R"(3,2,(completable|flexible),\d+,\d+,\d+\.\d{3})")))
        << rows[1];
}

TEST(Emit, TableTwoPointsExportAsCompletable) {
    for (auto [d, W, V] : {std::array{2, 4, 10}, std::array{3, 9, 15}, std::array{4, 16, 23}, std::array{5, 25, 33},
                           std::array{6, 36, 45}}) {
        SweepOptions o;
        o.d = d;
        o.scenario = Scenario::ProjKnownDeg;
        o.test_kind = TestKind::Global;
        o.w_min = o.w_max = W;
        o.v_min = o.v_max = V;
        const auto rows = lines(to_csv(run_sweep(o)));
        ASSERT_EQ(rows.size(), 2u);
        const std::string prefix = std::to_string(W) + "," + std::to_string(V) + ",completable,";
        EXPECT_EQ(rows[1].rfind(prefix, 0), 0u) << rows[1];
    }
}

TEST(Emit, SvgIsWellFormed) {
    SweepOptions o;
    o.d = 2;
    o.w_min = 0;
    o.w_max = 9;
    o.v_max = 7;
    const PhaseDiagram d = run_sweep(o);
    const std::string svg = to_svg(d);
    EXPECT_TRUE(well_formed_xml(svg));
    EXPECT_NE(svg.find("number of states W"), std::string::npos);
    EXPECT_NE(svg.find("#999999"), std::string::npos);
    EXPECT_FALSE(well_formed_xml("<svg><rect></svg>"));
}

TEST(Emit, JsonCarriesGridAndNote) {
    SweepOptions o;
    o.d = 2;
    o.w_max = 3;
    o.v_max = 2;
    const auto j = to_json(run_sweep(o));
    EXPECT_EQ(j.at("grid").size(), 6u);
    EXPECT_EQ(j.at("scenario"), "pure");
    EXPECT_EQ(j.at("D"), 4);
    EXPECT_TRUE(j.at("convention_note").is_string());
    EXPECT_EQ(j.at("grid")[0].at("verdict"), "forced-completable-by-convention");
}
