#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "gramrig/model.hpp"
#include "gramrig/rank.hpp"

namespace gramrig {

enum class TestKind { Local, Global };

std::string_view test_kind_name(TestKind k);
TestKind parse_test_kind(std::string_view name);

enum class CellVerdict {
    Completable,
    Flexible,
    ForcedByConvention,  // N < D: assigned to the completable phase without testing
    Undetermined,        // the test raised an error; see the cell note
};

std::string_view verdict_name(CellVerdict v);

struct PhaseCell {
    int W = 0;
    int V = 0;
    CellVerdict verdict = CellVerdict::Undetermined;
    int rank = 0;
    long target = 0;
    double runtime_ms = 0.0;
    std::string note;
};

struct PhaseDiagram {
    int d = 0;
    int D = 0;
    int K = 0;
    Scenario scenario = Scenario::PureStates;
    TestKind test_kind = TestKind::Local;
    std::vector<PhaseCell> grid;  // W-major, then V
    std::string convention_note;

    [[nodiscard]] const PhaseCell* find(int W, int V) const;
};

struct SweepOptions {
    int d = 2;
    Scenario scenario = Scenario::PureStates;
    TestKind test_kind = TestKind::Local;
    int w_min = 1;
    int w_max = 12;
    int v_min = 1;
    int v_max = 12;
    int K = 0;  // 0 means K = d
    RankBackend backend = RankBackend::SvdTol;
    double rel_tol = kDefaultRelTol;
    int trials = 3;
    std::uint64_t seed = 0;
    int jobs = 1;
    bool record_timing = true;  // false writes runtime_ms = 0 everywhere
};

/// Stable per-cell seed derived from (seed, W, V).
std::uint64_t cell_seed(std::uint64_t seed, int W, int V);

/// Runs the chosen test at every grid point. Errors are recorded in the
/// affected cell and never abort the sweep.
PhaseDiagram run_sweep(const SweepOptions& options);

enum class EmitFormat { Csv, Json, Svg };

std::string to_csv(const PhaseDiagram& diagram);
nlohmann::json to_json(const PhaseDiagram& diagram);
std::string to_svg(const PhaseDiagram& diagram);

void emit(const PhaseDiagram& diagram, EmitFormat format, const std::filesystem::path& path);

}  // namespace gramrig
