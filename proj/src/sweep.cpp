#include "gramrig/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <chrono>
#include <thread>

#include <fmt/format.h>

#include "gramrig/global.hpp"
#include "gramrig/io.hpp"
#include "gramrig/local.hpp"

namespace gramrig {

std::string_view test_kind_name(TestKind k) { return k == TestKind::Local ? "local" : "global"; }

TestKind parse_test_kind(std::string_view name) {
    if (name == "local") return TestKind::Local;
    if (name == "global") return TestKind::Global;
    throw std::invalid_argument("unknown test kind '" + std::string(name) + "' (valid: local, global)");
}

std::string_view verdict_name(CellVerdict v) {
    switch (v) {
        case CellVerdict::Completable: return "completable";
        case CellVerdict::Flexible: return "flexible";
        case CellVerdict::ForcedByConvention: return "forced-completable-by-convention";
        case CellVerdict::Undetermined: return "undetermined";
    }
    return "undetermined";
}

const PhaseCell* PhaseDiagram::find(int W, int V) const {
    for (const auto& c : grid) {
        if (c.W == W && c.V == V) return &c;
    }
    return nullptr;
}

std::uint64_t cell_seed(std::uint64_t seed, int W, int V) {
    // splitmix64 finalizer over the packed key
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    std::uint64_t h = mix(seed);
    h = mix(h ^ static_cast<std::uint32_t>(W));
    h = mix(h ^ (static_cast<std::uint64_t>(static_cast<std::uint32_t>(V)) << 32));
    return h;
}

namespace {

constexpr const char* kConventionNote =
    "cells with N = W + V*K < D cannot satisfy the spanning assumption and are assigned to the completable phase "
    "without running a test";

void evaluate_cell(const SweepOptions& o, int K, PhaseCell& cell) {
    const ProblemShape shape = ProblemShape::quantum_shape(o.d, cell.W, cell.V, K);
    if (shape.N() < shape.D) {
        cell.verdict = CellVerdict::ForcedByConvention;
        return;
    }
    const TestOptions test{o.trials, o.backend, o.rel_tol, cell_seed(o.seed, cell.W, cell.V)};
    try {
        const OmegaMask mask = scenario_mask(shape, o.scenario);
        if (o.test_kind == TestKind::Local) {
            const LocalVerdict v = local_test(shape, mask, test);
            cell.verdict = v.completable ? CellVerdict::Completable : CellVerdict::Flexible;
            cell.rank = v.rank_report.computed_rank;
            cell.target = v.target;
            if (v.rank_report.backends_agree == false) cell.note = "rank backends disagree";
            return;
        }
        try {
            const GlobalVerdict v = global_test(shape, mask, test);
            cell.verdict = v.completable ? CellVerdict::Completable : CellVerdict::Flexible;
            cell.rank = v.rank_report.computed_rank;
            cell.target = v.target;
            if (v.rank_report.backends_agree == false) cell.note = "rank backends disagree";
        } catch (const NumericalError& e) {
            // The criterion needs rank(data) = D. Global completability implies
            // local completability, so a flexible local verdict still decides.
            const LocalVerdict v = local_test(shape, mask, test);
            cell.target = global_target(shape.D);
            cell.rank = 0;
            if (!v.completable) {
                cell.verdict = CellVerdict::Flexible;
                cell.note = std::string("global criterion inapplicable (") + e.what() +
                            "); locally flexible, hence not globally completable";
            } else {
                cell.verdict = CellVerdict::Undetermined;
                cell.note = std::string("global criterion inapplicable (") + e.what() + "); locally completable";
            }
        }
    } catch (const std::exception& e) {
        cell.verdict = CellVerdict::Undetermined;
        cell.note = e.what();
    }
}

}  // namespace

PhaseDiagram run_sweep(const SweepOptions& o) {
    if (o.w_min > o.w_max || o.v_min > o.v_max) throw std::invalid_argument("sweep ranges must be non-empty");
    if (o.w_min < 0 || o.v_min < 0) throw std::invalid_argument("sweep ranges must be non-negative");
    if (o.d < 1) throw std::invalid_argument("sweep needs d >= 1");
    if (o.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    const int K = o.K > 0 ? o.K : o.d;

    PhaseDiagram diagram;
    diagram.d = o.d;
    diagram.D = o.d * o.d;
    diagram.K = K;
    diagram.scenario = o.scenario;
    diagram.test_kind = o.test_kind;
    diagram.convention_note = kConventionNote;
    for (int W = o.w_min; W <= o.w_max; ++W) {
        for (int V = o.v_min; V <= o.v_max; ++V) {
            PhaseCell cell;
            cell.W = W;
            cell.V = V;
            diagram.grid.push_back(std::move(cell));
        }
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < diagram.grid.size(); i = next++) {
            PhaseCell& cell = diagram.grid[i];
            const auto start = std::chrono::steady_clock::now();
            evaluate_cell(o, K, cell);
            if (o.record_timing && cell.verdict != CellVerdict::ForcedByConvention) {
                cell.runtime_ms =
                    std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
            }
        }
    };
    const int threads = std::min<int>(o.jobs, static_cast<int>(diagram.grid.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    }
    return diagram;
}

// ---------------------------------------------------------------------------

std::string to_csv(const PhaseDiagram& diagram) {
    std::string out = "W,V,verdict,rank,target,runtime_ms\n";
    for (const auto& c : diagram.grid) {
        out += fmt::format("{},{},{},{},{},{:.3f}\n", c.W, c.V, verdict_name(c.verdict), c.rank, c.target,
                           c.runtime_ms);
    }
    return out;
}

nlohmann::json to_json(const PhaseDiagram& diagram) {
    nlohmann::json grid = nlohmann::json::array();
    for (const auto& c : diagram.grid) {
        nlohmann::json row{{"W", c.W},
                           {"V", c.V},
                           {"verdict", std::string(verdict_name(c.verdict))},
                           {"rank", c.rank},
                           {"target", c.target},
                           {"runtime_ms", c.runtime_ms}};
        if (!c.note.empty()) row["note"] = c.note;
        grid.push_back(std::move(row));
    }
    return {{"d", diagram.d},
            {"D", diagram.D},
            {"K", diagram.K},
            {"scenario", std::string(scenario_name(diagram.scenario))},
            {"test_kind", std::string(test_kind_name(diagram.test_kind))},
            {"convention_note", diagram.convention_note},
            {"grid", std::move(grid)}};
}

std::string to_svg(const PhaseDiagram& diagram) {
    int w_lo = 0, w_hi = -1, v_lo = 0, v_hi = -1;
    if (!diagram.grid.empty()) {
        w_lo = w_hi = diagram.grid.front().W;
        v_lo = v_hi = diagram.grid.front().V;
        for (const auto& c : diagram.grid) {
            w_lo = std::min(w_lo, c.W);
            w_hi = std::max(w_hi, c.W);
            v_lo = std::min(v_lo, c.V);
            v_hi = std::max(v_hi, c.V);
        }
    }
    const int cols = w_hi - w_lo + 1;
    const int rows = v_hi - v_lo + 1;
    const double cell = std::clamp(480.0 / std::max(1, std::max(cols, rows)), 4.0, 24.0);
    const double left = 60, top = 50, bottom = 50, right = 20;
    const double width = left + cols * cell + right;
    const double height = top + rows * cell + bottom;
    const int tick_every = std::max(1, static_cast<int>(std::ceil(18.0 / cell)));

    auto x_of = [&](int W) { return left + (W - w_lo) * cell; };
    auto y_of = [&](int V) { return top + (v_hi - V) * cell; };  // V grows upward

    std::string svg = fmt::format(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n"
        "<rect x=\"0\" y=\"0\" width=\"{:.0f}\" height=\"{:.0f}\" fill=\"white\"/>\n"
        "<text x=\"{:.1f}\" y=\"22\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">"
        "{} completability, d = {} (D = {}), K = {}, scenario {}</text>\n",
        width, height, width, height, width, height, width / 2, test_kind_name(diagram.test_kind), diagram.d,
        diagram.D, diagram.K, scenario_name(diagram.scenario));

    svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" "
                       "stroke=\"black\" stroke-width=\"1\"/>\n",
                       left, top, cols * cell, rows * cell);
    for (const auto& c : diagram.grid) {
        const double x = x_of(c.W) + 0.1 * cell;
        const double y = y_of(c.V) + 0.1 * cell;
        const double s = 0.8 * cell;
        switch (c.verdict) {
            case CellVerdict::Completable:
                svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"black\"/>\n",
                                   x, y, s, s);
                break;
            case CellVerdict::ForcedByConvention:
                svg += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"#999999\"/>\n",
                                   x, y, s, s);
                break;
            case CellVerdict::Flexible:
                svg += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"{:.1f}\" fill=\"none\" stroke=\"#777777\"/>\n",
                                   x + s / 2, y + s / 2, std::max(0.5, 0.15 * cell));
                break;
            case CellVerdict::Undetermined:
                svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"{:.1f}\" "
                                   "text-anchor=\"middle\" fill=\"red\">?</text>\n",
                                   x + s / 2, y + s * 0.8, s);
                break;
        }
    }
    for (int W = w_lo; W <= w_hi; ++W) {
        if ((W - w_lo) % tick_every != 0) continue;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"middle\">{}</text>\n",
                           x_of(W) + cell / 2, top + rows * cell + 14, W);
    }
    for (int V = v_lo; V <= v_hi; ++V) {
        if ((V - v_lo) % tick_every != 0) continue;
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
                           "text-anchor=\"end\">{}</text>\n",
                           left - 4, y_of(V) + cell / 2 + 3, V);
    }
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
                       "text-anchor=\"middle\">number of states W</text>\n",
                       left + cols * cell / 2, height - 12);
    svg += fmt::format("<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" "
                       "transform=\"rotate(-90 16 {:.1f})\">number of measurements V</text>\n",
                       top + rows * cell / 2, top + rows * cell / 2);
    svg += "</svg>\n";
    return svg;
}

void emit(const PhaseDiagram& diagram, EmitFormat format, const std::filesystem::path& path) {
    switch (format) {
        case EmitFormat::Csv: io::write_text_file(path, to_csv(diagram)); break;
        case EmitFormat::Json: io::write_text_file(path, to_json(diagram).dump(2) + "\n"); break;
        case EmitFormat::Svg: io::write_text_file(path, to_svg(diagram)); break;
    }
}

}  // namespace gramrig
