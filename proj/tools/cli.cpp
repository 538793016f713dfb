#include "cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "gramrig/global.hpp"
#include "gramrig/io.hpp"
#include "gramrig/local.hpp"
#include "gramrig/model.hpp"
#include "gramrig/oracle.hpp"
#include "gramrig/rank.hpp"
#include "gramrig/sweep.hpp"

namespace gramrig::cli {

namespace {

using json = nlohmann::json;

const std::vector<std::string> kBackends{"svd", "gf", "consensus"};
const std::vector<std::string> kLogLevels{"trace", "debug", "info", "warn", "error", "critical", "off"};

constexpr const char* kSpecialCaveat =
    "note: for a specific non-generic configuration a full-rank Jacobian is sufficient but not necessary for "
    "local completability; a rank deficit there does not prove flexibility";

std::shared_ptr<spdlog::logger> make_logger(const std::string& level) {
    auto logger = spdlog::get("gramrig");
    if (!logger) logger = spdlog::stderr_logger_st("gramrig");
    logger->set_level(spdlog::level::from_str(level));
    return logger;
}

std::string env_log_level() {
    const char* v = std::getenv("GRAMRIG_LOG");
    if (v == nullptr) return "warn";
    std::string s(v);
    return std::find(kLogLevels.begin(), kLogLevels.end(), s) != kLogLevels.end() ? s : "warn";
}

// Merges a JSON config file into the argument list. Keys mirror long flag
// names; anything already given on the command line is left alone.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    auto it = std::find(args.begin(), args.end(), "--config");
    std::string path;
    if (it != args.end()) {
        if (std::next(it) == args.end()) throw CLI::ArgumentMismatch("--config needs a file");
        path = *std::next(it);
        args.erase(it, std::next(it, 2));
    } else {
        for (auto a = args.begin(); a != args.end(); ++a) {
            if (a->rfind("--config=", 0) == 0) {
                path = a->substr(9);
                args.erase(a);
                break;
            }
        }
    }
    if (path.empty()) return args;

    const json cfg = io::read_json_file(path);
    if (!cfg.is_object()) throw std::invalid_argument("config file must hold a JSON object");
    auto given = [&](const std::string& flag) {
        return std::any_of(args.begin(), args.end(),
                           [&](const std::string& a) { return a == flag || a.rfind(flag + "=", 0) == 0; });
    };
    for (const auto& [key, value] : cfg.items()) {
        const std::string flag = "--" + key;
        if (given(flag)) continue;
        auto scalar = [&](const json& v) -> std::string {
            if (v.is_string()) return v.get<std::string>();
            if (v.is_number_integer()) return std::to_string(v.get<long long>());
            if (v.is_number()) {
                std::ostringstream os;
                os.precision(17);
                os << v.get<double>();
                return os.str();
            }
            throw std::invalid_argument("config key '" + key + "' has an unsupported value");
        };
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
        } else if (value.is_array()) {
            args.push_back(flag);
            for (const auto& v : value) args.push_back(scalar(v));
        } else {
            args.push_back(flag);
            args.push_back(scalar(value));
        }
    }
    return args;
}

// ---------------------------------------------------------------------------
// Shared flag groups

struct InstanceArgs {
    int d = 0;
    int D = 0;
    int W = -1;
    int V = -1;
    int K = 0;
    std::string scenario = "pure";
    std::string mask_file;
    CLI::Option* scenario_opt = nullptr;
};

void add_instance_flags(CLI::App* sub, InstanceArgs& a) {
    auto* d = sub->add_option("--d", a.d, "Hilbert-space dimension; sets D = d^2")->check(CLI::PositiveNumber);
    auto* D = sub->add_option("--D", a.D, "vector dimension")->check(CLI::PositiveNumber);
    d->excludes(D);
    sub->add_option("--W", a.W, "number of states")->check(CLI::NonNegativeNumber);
    sub->add_option("--V", a.V, "number of measurements")->check(CLI::NonNegativeNumber);
    sub->add_option("--K", a.K, "outcomes per measurement (default d, or 1 with --D)")->check(CLI::PositiveNumber);
    a.scenario_opt = sub->add_option("--scenario", a.scenario, "known-entry pattern")
                         ->check(CLI::IsMember(scenario_names()))
                         ->capture_default_str();
    sub->add_option("--mask-file", a.mask_file, "JSON mask with 1-based pairs")->check(CLI::ExistingFile);
}

struct Instance {
    ProblemShape shape;
    OmegaMask mask;
};

Instance resolve(const InstanceArgs& a) {
    if (!a.mask_file.empty()) {
        if (a.scenario_opt->count() > 0 && a.scenario != "custom") {
            throw std::invalid_argument("--mask-file conflicts with --scenario " + a.scenario);
        }
        OmegaMask mask = io::mask_from_json(io::read_json_file(a.mask_file));
        const ProblemShape& s = mask.shape;
        auto clash = [](const char* name, int flag, int file) {
            if (flag != file) {
                throw std::invalid_argument(std::string("--") + name + " = " + std::to_string(flag) +
                                            " disagrees with the mask file (" + std::to_string(file) + ")");
            }
        };
        if (a.d > 0) clash("d", a.d * a.d, s.D);
        if (a.D > 0) clash("D", a.D, s.D);
        if (a.W >= 0) clash("W", a.W, s.W);
        if (a.V >= 0) clash("V", a.V, s.V);
        if (a.K > 0) clash("K", a.K, s.K);
        return {s, std::move(mask)};
    }
    if (a.scenario == "custom") throw std::invalid_argument("--scenario custom requires --mask-file");
    if (a.d == 0 && a.D == 0) throw std::invalid_argument("one of --d or --D is required");
    if (a.W < 0 || a.V < 0) throw std::invalid_argument("--W and --V are required");
    const int K = a.K > 0 ? a.K : (a.d > 0 ? a.d : 1);
    const ProblemShape shape =
        a.d > 0 ? ProblemShape::quantum_shape(a.d, a.W, a.V, K) : ProblemShape::free_shape(a.D, a.W, a.V, K);
    shape.validate();
    return {shape, scenario_mask(shape, parse_scenario(a.scenario))};
}

struct TestArgs {
    std::string backend = "svd";
    double tol = kDefaultRelTol;
    int trials = 3;
    std::uint64_t seed = 0;
    bool json = false;
};

void add_test_flags(CLI::App* sub, TestArgs& t) {
    sub->add_option("--backend", t.backend, "rank backend")->check(CLI::IsMember(kBackends))->capture_default_str();
    sub->add_option("--tol", t.tol, "relative SVD rank tolerance")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_option("--trials", t.trials, "random samples; the maximum rank is kept")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", t.seed, "random seed")->capture_default_str();
    sub->add_flag("--json", t.json, "print the verdict as JSON");
}

void add_config_flag(CLI::App* sub) {
    // Consumed by expand_config before parsing; listed here for --help.
    sub->add_option("--config", "JSON file whose keys mirror the long flags; flags win");
}

TestOptions test_options(const TestArgs& t) { return {t.trials, parse_backend(t.backend), t.tol, t.seed}; }

void print_verdict(std::ostream& out, bool as_json, const json& j, bool completable, long rank, long target) {
    if (as_json) {
        out << j.dump(2) << '\n';
    } else {
        out << (completable ? "completable" : "flexible") << " (rank " << rank << " / target " << target << ")\n";
    }
}

// ---------------------------------------------------------------------------
// Subcommands

struct LocalArgs {
    InstanceArgs inst;
    TestArgs test;
    bool exact_special = false;
    std::string point_file;
};

int run_local(const LocalArgs& a, std::ostream& out, std::ostream& err, spdlog::logger& log) {
    const Instance in = resolve(a.inst);
    log.info("local-test D={} W={} V={} K={} |Omega|={}", in.shape.D, in.shape.W, in.shape.V, in.shape.K,
             in.mask.size());

    if (!a.point_file.empty()) {
        Configuration P = io::configuration_from_json(io::read_json_file(a.point_file));
        if (P.shape.D != in.shape.D || P.shape.W != in.shape.W || P.shape.V != in.shape.V || P.shape.K != in.shape.K) {
            throw std::invalid_argument("--point-file shape does not match the instance");
        }
        P.validate();
        RankReport r = svd_rank(jacobian(P.entries, in.mask), a.test.tol);
        const long target = local_target(in.shape.D, in.shape.N());
        r.target_rank = static_cast<int>(target);
        const bool full = r.computed_rank == target;
        json j{{"test", "local-at-point"},
               {"completable", full},
               {"verdict", full ? "completable" : "inconclusive"},
               {"target", target},
               {"rank_report", io::to_json(r)},
               {"caveat", kSpecialCaveat}};
        if (a.test.json) {
            out << j.dump(2) << '\n';
        } else {
            out << (full ? "completable" : "inconclusive") << " at the given point (rank " << r.computed_rank
                << " / target " << target << ")\n";
            err << kSpecialCaveat << '\n';
        }
        return full ? kSuccess : kFlexible;
    }

    const LocalVerdict v = local_test(in.shape, in.mask, test_options(a.test));
    json j = io::to_json(v);
    j["shape"] = io::to_json(in.shape);
    j["seed"] = a.test.seed;
    if (a.exact_special) {
        j["caveat"] = kSpecialCaveat;
        if (!a.test.json) err << kSpecialCaveat << '\n';
    }
    print_verdict(out, a.test.json, j, v.completable, v.rank_report.computed_rank, v.target);
    return v.completable ? kSuccess : kFlexible;
}

struct GlobalArgs {
    InstanceArgs inst;
    TestArgs test;
};

int run_global(const GlobalArgs& a, std::ostream& out, spdlog::logger& log) {
    const Instance in = resolve(a.inst);
    log.info("global-test D={} W={} V={} K={}", in.shape.D, in.shape.W, in.shape.V, in.shape.K);
    const GlobalVerdict v = global_test(in.shape, in.mask, test_options(a.test));
    json j = io::to_json(v);
    j["shape"] = io::to_json(in.shape);
    j["seed"] = a.test.seed;
    print_verdict(out, a.test.json, j, v.completable, v.rank_report.computed_rank, v.target);
    return v.completable ? kSuccess : kFlexible;
}

struct ReconstructArgs {
    std::string data_file;
    std::string knowledge_file;
    std::string out_file;
    double tol = kDefaultRelTol;
    bool json = false;
};

int run_reconstruct(const ReconstructArgs& a, std::ostream& out, spdlog::logger& log) {
    const GramKnowledge k = io::knowledge_from_json(io::read_json_file(a.knowledge_file));
    const DataMatrix data{io::read_csv_matrix(a.data_file)};
    const ProblemShape& s = k.mask.shape;
    if (data.entries.rows() != s.W || data.entries.cols() != s.measurement_columns()) {
        throw std::invalid_argument("data file is " + std::to_string(data.entries.rows()) + "x" +
                                    std::to_string(data.entries.cols()) + " but the knowledge mask expects " +
                                    std::to_string(s.W) + "x" + std::to_string(s.measurement_columns()));
    }
    const Side side = knowledge_side(k.mask);
    log.info("reconstruct D={} W={} VK={} side={}", s.D, s.W, s.measurement_columns(), side_name(side));

    const Factorization fact = factor_data(data, s.D, a.tol);
    const Matrix M = recover_symmetric_unknown(fact, k);
    const Matrix G = reconstruct_gram(fact, M, side);

    // The reconstruction must reproduce every known entry.
    const auto pairs = k.mask.global_pairs();
    double worst = 0.0;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const double diff = std::abs(G(pairs[i].first, pairs[i].second) - k.values(static_cast<Eigen::Index>(i)));
        worst = std::max(worst, diff / std::max(1.0, std::abs(k.values(static_cast<Eigen::Index>(i)))));
    }
    if (worst > 1e-7) {
        throw NumericalError("reconstructed Gram matrix misses known entries by " + std::to_string(worst));
    }

    if (!a.out_file.empty()) io::write_csv_matrix(a.out_file, G);
    if (a.json) {
        json j{{"unique", true},
               {"block", std::string(side_name(side))},
               {"N", G.rows()},
               {"max_known_entry_error", worst},
               {"corner_conditioning", fact.corner_conditioning}};
        if (!a.out_file.empty()) j["out"] = a.out_file;
        out << j.dump(2) << '\n';
    } else if (a.out_file.empty()) {
        out << io::format_csv_matrix(G);
    } else {
        out << "unique Gram matrix written to " << a.out_file << '\n';
    }
    return kSuccess;
}

struct SweepArgs {
    int d = 0;
    std::string scenario;
    std::string test = "local";
    int wmin = 1, wmax = 0, vmin = 1, vmax = 0;
    int k = 0;
    std::string backend = "svd";
    double tol = kDefaultRelTol;
    int trials = 3;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::string out_prefix;
    bool no_timing = false;
    bool json = false;
};

int run_sweep_cmd(const SweepArgs& a, std::ostream& out, spdlog::logger& log) {
    SweepOptions o;
    o.d = a.d;
    o.scenario = parse_scenario(a.scenario);
    if (o.scenario == Scenario::Custom) throw std::invalid_argument("sweep needs a built-in scenario");
    o.test_kind = parse_test_kind(a.test);
    const int D = a.d * a.d;
    o.w_min = a.wmin;
    o.w_max = a.wmax > 0 ? a.wmax : 3 * D;
    o.v_min = a.vmin;
    o.v_max = a.vmax > 0 ? a.vmax : 3 * D;
    o.K = a.k;
    o.backend = parse_backend(a.backend);
    o.rel_tol = a.tol;
    o.trials = a.trials;
    o.seed = a.seed;
    o.jobs = a.jobs;
    o.record_timing = !a.no_timing;
    log.info("sweep d={} scenario={} test={} W=[{},{}] V=[{},{}] jobs={}", o.d, a.scenario, a.test, o.w_min,
             o.w_max, o.v_min, o.v_max, o.jobs);

    const PhaseDiagram diagram = run_sweep(o);
    if (!a.out_prefix.empty()) {
        emit(diagram, EmitFormat::Csv, a.out_prefix + ".csv");
        emit(diagram, EmitFormat::Json, a.out_prefix + ".json");
        emit(diagram, EmitFormat::Svg, a.out_prefix + ".svg");
        log.info("wrote {}.csv, .json, .svg", a.out_prefix);
    }
    if (a.json) {
        out << to_json(diagram).dump(2) << '\n';
    } else if (a.out_prefix.empty()) {
        out << to_csv(diagram);
    }
    return kSuccess;
}

struct OracleArgs {
    InstanceArgs inst;
    std::string check;
    std::string point_file;
    std::uint64_t seed = 0;
    double tol = kDefaultRelTol;
    int restarts = 10;
};

Configuration oracle_point(const OracleArgs& a, const ProblemShape& shape, Rng& rng) {
    if (a.point_file.empty()) return random_configuration(shape, rng);
    Configuration P = io::configuration_from_json(io::read_json_file(a.point_file));
    if (P.shape.D != shape.D || P.shape.W != shape.W || P.shape.V != shape.V || P.shape.K != shape.K) {
        throw std::invalid_argument("--point-file shape does not match the instance");
    }
    P.validate();
    P.shape = shape;
    return P;
}

int run_oracle(const OracleArgs& a, std::ostream& out, spdlog::logger& log) {
    const Instance in = resolve(a.inst);
    Rng rng(a.seed);
    const Configuration P = oracle_point(a, in.shape, rng);
    log.info("oracle {} D={} N={}", a.check, in.shape.D, in.shape.N());
    json j{{"check", a.check}, {"shape", io::to_json(in.shape)}, {"seed", a.seed}};
    int code = kSuccess;

    if (a.check == "jacobian") {
        const Matrix J = jacobian(P.entries, in.mask);
        const Matrix F = fd_jacobian(P.entries, in.mask);
        const double scale = std::max(J.norm(), 1e-300);
        const double rel = (J - F).norm() / scale;
        j["relative_error"] = rel;
        j["pass"] = rel <= 1e-6;
        if (rel > 1e-6) code = kNumerical;
    } else if (a.check == "criterion" || a.check == "uniqueness") {
        const Factorization fact = factor_data(data_matrix(P), in.shape.D, a.tol);
        const CriterionMatrix direct = build_criterion(fact, in.mask);
        const long target = global_target(in.shape.D);
        const RankReport rank = svd_rank(direct.entries, a.tol);
        j["block"] = std::string(side_name(direct.block));
        j["criterion_rank"] = rank.computed_rank;
        j["target"] = target;
        if (a.check == "criterion") {
            const CriterionMatrix via_factor = factor_criterion(fact, in.mask);
            const double scale = std::max(direct.entries.norm(), 1e-300);
            const double rel = (direct.entries - via_factor.entries).norm() / scale;
            const RankReport rank2 = svd_rank(via_factor.entries, a.tol);
            j["relative_difference"] = rel;
            j["factor_route_rank"] = rank2.computed_rank;
            const bool pass = rel <= 1e-9 && rank.computed_rank == rank2.computed_rank;
            j["pass"] = pass;
            if (!pass) code = kNumerical;
        } else {
            const bool unique = linear_uniqueness_oracle(fact, in.mask, a.seed);
            const bool criterion = rank.computed_rank == target;
            j["unique"] = unique;
            j["criterion_completable"] = criterion;
            j["pass"] = unique == criterion;
            code = unique != criterion ? kNumerical : (unique ? kSuccess : kFlexible);
        }
    } else {
        PerturbationOptions po;
        po.seed = a.seed;
        po.restarts = a.restarts;
        const PerturbationResult r = perturbation_search(P, extract_knowledge(P, in.mask), po);
        j["found_nontrivial_deformation"] = r.found_nontrivial_deformation;
        j["deformation_norm"] = r.deformation_norm;
        j["constraint_violation"] = r.constraint_violation;
        j["orbit_distance"] = r.orbit_distance;
        j["restarts_used"] = r.restarts_used;
        code = r.found_nontrivial_deformation ? kFlexible : kSuccess;
    }
    out << j.dump(2) << '\n';
    return code;
}

struct GenModelArgs {
    int d = 0;
    int D = 0;
    int W = 1;
    int V = 1;
    int K = 0;
    bool projective = false;
    std::vector<int> degeneracies;
    std::uint64_t seed = 0;
    std::string scenario;
    std::string mask_file;
    std::string out_file;
    std::string data_out;
    std::string knowledge_out;
    std::string gram_out;
};

int run_gen_model(const GenModelArgs& a, std::ostream& out, spdlog::logger& log) {
    if (a.d == 0 && a.D == 0) throw std::invalid_argument("one of --d or --D is required");
    Configuration P;
    if (a.d > 0) {
        QuantumModelOptions qo;
        qo.d = a.d;
        qo.W = a.W;
        qo.V = a.V;
        qo.K = a.K > 0 ? a.K : a.d;
        qo.projective = a.projective;
        if (!a.degeneracies.empty()) qo.degeneracies = a.degeneracies;
        qo.seed = a.seed;
        P = random_quantum_model(qo).configuration();
    } else {
        if (a.projective || !a.degeneracies.empty()) {
            throw std::invalid_argument("--projective and --degeneracies need --d");
        }
        const ProblemShape shape = ProblemShape::free_shape(a.D, a.W, a.V, a.K > 0 ? a.K : 1);
        shape.validate();
        Rng rng(a.seed);
        P = random_configuration(shape, rng);
    }
    log.info("gen-model D={} W={} V={} K={}", P.shape.D, P.shape.W, P.shape.V, P.shape.K);

    if (!a.data_out.empty()) io::write_csv_matrix(a.data_out, data_matrix(P).entries);
    if (!a.gram_out.empty()) io::write_csv_matrix(a.gram_out, gram(P));
    if (!a.knowledge_out.empty()) {
        OmegaMask mask;
        if (!a.mask_file.empty()) {
            mask = io::mask_from_json(io::read_json_file(a.mask_file));
            if (mask.shape.D != P.shape.D || mask.shape.W != P.shape.W || mask.shape.V != P.shape.V ||
                mask.shape.K != P.shape.K) {
                throw std::invalid_argument("mask file shape does not match the generated model");
            }
            mask.shape = P.shape;
        } else if (!a.scenario.empty()) {
            mask = scenario_mask(P.shape, parse_scenario(a.scenario));
        } else {
            throw std::invalid_argument("--knowledge-out needs --scenario or --mask-file");
        }
        io::write_text_file(a.knowledge_out, io::to_json(extract_knowledge(P, mask)).dump(2) + "\n");
    }
    const std::string text = io::to_json(P).dump(2) + "\n";
    if (a.out_file.empty()) {
        out << text;
    } else {
        io::write_text_file(a.out_file, text);
    }
    return kSuccess;
}

}  // namespace

int dispatch(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Completability tests and reconstruction for partially known Gram matrices", "gramrig"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gramrig 0.1.0");
    std::string log_level = env_log_level();
    app.add_option("--log-level", log_level, "log verbosity (default from GRAMRIG_LOG)")
        ->check(CLI::IsMember(kLogLevels));

    LocalArgs local;
    auto* local_cmd = app.add_subcommand("local-test", "randomized local completability test");
    add_instance_flags(local_cmd, local.inst);
    add_test_flags(local_cmd, local.test);
    local_cmd->add_flag("--exact-special", local.exact_special, "print the caveat for non-generic inputs");
    local_cmd->add_option("--point-file", local.point_file, "evaluate at this configuration (JSON)")
        ->check(CLI::ExistingFile);
    add_config_flag(local_cmd);

    GlobalArgs global;
    auto* global_cmd = app.add_subcommand("global-test", "randomized global completability test");
    add_instance_flags(global_cmd, global.inst);
    add_test_flags(global_cmd, global.test);
    add_config_flag(global_cmd);

    ReconstructArgs recon;
    auto* recon_cmd = app.add_subcommand("reconstruct", "recover the unique Gram matrix from data and knowledge");
    recon_cmd->add_option("--data-file", recon.data_file, "CSV data matrix (W x VK)")
        ->required()
        ->check(CLI::ExistingFile);
    recon_cmd->add_option("--knowledge-file", recon.knowledge_file, "JSON known Gram entries")
        ->required()
        ->check(CLI::ExistingFile);
    recon_cmd->add_option("--out", recon.out_file, "output CSV for the full Gram matrix");
    recon_cmd->add_option("--tol", recon.tol, "relative SVD rank tolerance")->check(CLI::PositiveNumber);
    recon_cmd->add_flag("--json", recon.json, "print a JSON summary");
    add_config_flag(recon_cmd);

    SweepArgs sweep;
    auto* sweep_cmd = app.add_subcommand("sweep", "phase diagram over a (W, V) grid");
    sweep_cmd->add_option("--d", sweep.d, "Hilbert-space dimension")->required()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--scenario", sweep.scenario, "known-entry pattern")
        ->required()
        ->check(CLI::IsMember(scenario_names()));
    sweep_cmd->add_option("--test", sweep.test, "which test")
        ->check(CLI::IsMember({"local", "global"}))
        ->capture_default_str();
    sweep_cmd->add_option("--wmin", sweep.wmin)->check(CLI::NonNegativeNumber)->capture_default_str();
    sweep_cmd->add_option("--wmax", sweep.wmax, "default 3*D")->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--vmin", sweep.vmin)->check(CLI::NonNegativeNumber)->capture_default_str();
    sweep_cmd->add_option("--vmax", sweep.vmax, "default 3*D")->check(CLI::NonNegativeNumber);
    sweep_cmd->add_option("--k", sweep.k, "outcomes per measurement (default d)")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--backend", sweep.backend)->check(CLI::IsMember(kBackends))->capture_default_str();
    sweep_cmd->add_option("--tol", sweep.tol)->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--trials", sweep.trials)->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--seed", sweep.seed)->capture_default_str();
    sweep_cmd->add_option("--jobs", sweep.jobs, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sweep_cmd->add_option("--out-prefix", sweep.out_prefix, "write PREFIX.csv, PREFIX.json, PREFIX.svg");
    sweep_cmd->add_flag("--no-timing", sweep.no_timing, "record runtime_ms = 0 for byte-identical output");
    sweep_cmd->add_flag("--json", sweep.json, "print the diagram as JSON");
    add_config_flag(sweep_cmd);

    OracleArgs oracle;
    auto* oracle_cmd = app.add_subcommand("oracle", "independent cross-checks on one instance");
    add_instance_flags(oracle_cmd, oracle.inst);
    oracle_cmd->add_option("--check", oracle.check, "which oracle")
        ->required()
        ->check(CLI::IsMember({"jacobian", "criterion", "uniqueness", "perturb"}));
    oracle_cmd->add_option("--point-file", oracle.point_file, "configuration JSON (default: random)")
        ->check(CLI::ExistingFile);
    oracle_cmd->add_option("--seed", oracle.seed)->capture_default_str();
    oracle_cmd->add_option("--tol", oracle.tol)->check(CLI::PositiveNumber);
    oracle_cmd->add_option("--restarts", oracle.restarts, "perturbation restarts")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    add_config_flag(oracle_cmd);

    GenModelArgs gen;
    auto* gen_cmd = app.add_subcommand("gen-model", "random quantum or generic configuration");
    auto* gen_d = gen_cmd->add_option("--d", gen.d, "Hilbert-space dimension")->check(CLI::PositiveNumber);
    auto* gen_D = gen_cmd->add_option("--D", gen.D, "generic Gaussian instance of this dimension")
                      ->check(CLI::PositiveNumber);
    gen_d->excludes(gen_D);
    gen_cmd->add_option("--W", gen.W)->check(CLI::NonNegativeNumber)->capture_default_str();
    gen_cmd->add_option("--V", gen.V)->check(CLI::NonNegativeNumber)->capture_default_str();
    gen_cmd->add_option("--K", gen.K, "outcomes per measurement (default d)")->check(CLI::PositiveNumber);
    gen_cmd->add_flag("--projective", gen.projective, "projective measurements");
    gen_cmd->add_option("--degeneracies", gen.degeneracies, "projector ranks, K values summing to d");
    gen_cmd->add_option("--seed", gen.seed)->capture_default_str();
    gen_cmd->add_option("--scenario", gen.scenario, "pattern for --knowledge-out")
        ->check(CLI::IsMember(scenario_names()));
    gen_cmd->add_option("--mask-file", gen.mask_file, "mask for --knowledge-out")->check(CLI::ExistingFile);
    gen_cmd->add_option("--out", gen.out_file, "configuration JSON (default stdout)");
    gen_cmd->add_option("--data-out", gen.data_out, "data matrix CSV");
    gen_cmd->add_option("--knowledge-out", gen.knowledge_out, "known Gram entries JSON");
    gen_cmd->add_option("--gram-out", gen.gram_out, "full Gram matrix CSV");
    add_config_flag(gen_cmd);

    try {
        std::vector<std::string> args = expand_config(raw_args);
        if (args.empty()) args.emplace_back("gramrig");
        std::vector<std::string> rest(args.rbegin(), std::prev(args.rend()));
        app.parse(rest);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kSuccess : kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    }

    auto log = make_logger(log_level);
    try {
        if (*local_cmd) return run_local(local, out, err, *log);
        if (*global_cmd) return run_global(global, out, *log);
        if (*recon_cmd) return run_reconstruct(recon, out, *log);
        if (*sweep_cmd) return run_sweep_cmd(sweep, out, *log);
        if (*oracle_cmd) return run_oracle(oracle, out, *log);
        if (*gen_cmd) return run_gen_model(gen, out, *log);
    } catch (const NotUniqueError& e) {
        err << "not unique: " << e.what() << '\n';
        return kFlexible;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumerical;
    }
    return kUsage;
}

int dispatch(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    return dispatch(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace gramrig::cli
