#include "gramrig/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>

namespace gramrig::io {

namespace {

json pairs_to_json(const std::vector<IndexPair>& pairs) {
    json arr = json::array();
    for (const auto& p : pairs) arr.push_back({p.first + 1, p.second + 1});
    return arr;
}

std::vector<IndexPair> pairs_from_json(const json& arr, const char* key) {
    std::vector<IndexPair> out;
    if (arr.is_null()) return out;
    if (!arr.is_array()) throw std::invalid_argument(std::string(key) + " must be an array of [i, j] pairs");
    for (const auto& p : arr) {
        if (!p.is_array() || p.size() != 2) throw std::invalid_argument(std::string(key) + " entries must be [i, j]");
        const int i = p[0].get<int>();
        const int j = p[1].get<int>();
        if (i < 1 || j < 1) throw std::invalid_argument(std::string(key) + " indices are 1-based");
        out.push_back({i - 1, j - 1});
    }
    return out;
}

json finite_or_string(double x) {
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    return x;
}

double number_or_string(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::invalid_argument("expected number, got '" + s + "'");
    }
    return j.get<double>();
}

ProblemShape shape_from_json(const json& j) {
    ProblemShape s;
    s.D = j.at("D").get<int>();
    s.W = j.at("W").get<int>();
    s.V = j.at("V").get<int>();
    s.K = j.at("K").get<int>();
    s.d = j.value("d", 0);
    s.validate();
    return s;
}

}  // namespace

json to_json(const ProblemShape& s) {
    json j{{"D", s.D}, {"W", s.W}, {"V", s.V}, {"K", s.K}, {"N", s.N()}};
    if (s.quantum()) j["d"] = s.d;
    return j;
}

json to_json(const OmegaMask& mask) {
    json j = to_json(mask.shape);
    j.erase("N");
    j["st_pairs"] = pairs_to_json(mask.st_pairs);
    j["m_pairs"] = pairs_to_json(mask.m_pairs);
    j["data_block"] = mask.include_data_block;
    return j;
}

OmegaMask mask_from_json(const json& j) {
    OmegaMask mask;
    mask.shape = shape_from_json(j);
    mask.st_pairs = pairs_from_json(j.value("st_pairs", json()), "st_pairs");
    mask.m_pairs = pairs_from_json(j.value("m_pairs", json()), "m_pairs");
    mask.include_data_block = j.value("data_block", true);
    return canonicalize(std::move(mask));
}

json to_json(const Configuration& c) {
    json j = to_json(c.shape);
    json entries = json::array();
    for (Eigen::Index i = 0; i < c.entries.rows(); ++i) {
        for (Eigen::Index k = 0; k < c.entries.cols(); ++k) entries.push_back(c.entries(i, k));
    }
    j["entries"] = std::move(entries);
    return j;
}

Configuration configuration_from_json(const json& j) {
    Configuration c{shape_from_json(j), {}};
    const auto& entries = j.at("entries");
    const auto expected = static_cast<std::size_t>(c.shape.D) * c.shape.N();
    if (!entries.is_array() || entries.size() != expected) {
        throw std::invalid_argument("configuration needs " + std::to_string(expected) + " row-major entries");
    }
    c.entries.resize(c.shape.D, c.shape.N());
    std::size_t n = 0;
    for (Eigen::Index i = 0; i < c.entries.rows(); ++i) {
        for (Eigen::Index k = 0; k < c.entries.cols(); ++k) c.entries(i, k) = entries[n++].get<double>();
    }
    return c;
}

json to_json(const GramKnowledge& k) {
    return {{"mask", to_json(k.mask)}, {"values", std::vector<double>(k.values.data(), k.values.data() + k.values.size())}};
}

GramKnowledge knowledge_from_json(const json& j) {
    GramKnowledge k;
    k.mask = mask_from_json(j.at("mask"));
    const auto values = j.at("values").get<std::vector<double>>();
    if (values.size() != k.mask.size()) {
        throw std::invalid_argument("knowledge has " + std::to_string(values.size()) + " values, mask has " +
                                    std::to_string(k.mask.size()) + " entries");
    }
    k.values = Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return k;
}

json to_json(const RankReport& r) {
    json j{{"computed_rank", r.computed_rank}, {"target_rank", r.target_rank},
           {"backend", std::string(backend_name(r.backend))}};
    if (r.spectrum) j["spectrum"] = *r.spectrum;
    if (r.gap_ratio) j["gap_ratio"] = finite_or_string(*r.gap_ratio);
    if (r.prime) j["prime"] = *r.prime;
    if (r.svd_rank) j["svd_rank"] = *r.svd_rank;
    if (r.backends_agree) j["backends_agree"] = *r.backends_agree;
    return j;
}

RankReport rank_report_from_json(const json& j) {
    RankReport r;
    r.computed_rank = j.at("computed_rank").get<int>();
    r.target_rank = j.value("target_rank", 0);
    r.backend = parse_backend(j.at("backend").get<std::string>());
    if (j.contains("spectrum")) r.spectrum = j["spectrum"].get<std::vector<double>>();
    if (j.contains("gap_ratio")) r.gap_ratio = number_or_string(j["gap_ratio"]);
    if (j.contains("prime")) r.prime = j["prime"].get<std::uint64_t>();
    if (j.contains("svd_rank")) r.svd_rank = j["svd_rank"].get<int>();
    if (j.contains("backends_agree")) r.backends_agree = j["backends_agree"].get<bool>();
    return r;
}

json to_json(const LocalVerdict& v) {
    return {{"test", "local"},
            {"completable", v.completable},
            {"target", v.target},
            {"jacobian_dims", {v.jacobian_dims.first, v.jacobian_dims.second}},
            {"rank_report", to_json(v.rank_report)}};
}

json to_json(const GlobalVerdict& v) {
    return {{"test", "global"},
            {"completable", v.completable},
            {"target", v.target},
            {"block", std::string(side_name(v.block))},
            {"rank_report", to_json(v.rank_report)}};
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path.string());
}

Matrix read_csv_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open " + path.string());
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.find_first_not_of(" \t") == std::string::npos) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            try {
                std::size_t used = 0;
                row.push_back(std::stod(cell, &used));
            } catch (const std::exception&) {
                throw std::invalid_argument("non-numeric CSV cell '" + cell + "' in " + path.string());
            }
        }
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw std::invalid_argument("ragged CSV rows in " + path.string());
        }
        rows.push_back(std::move(row));
    }
    const auto cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
    Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (Eigen::Index k = 0; k < cols; ++k) m(static_cast<Eigen::Index>(i), k) = rows[i][k];
    }
    return m;
}

std::string format_csv_matrix(const Matrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            if (k > 0) out += ',';
            out += fmt::format("{:.17g}", m(i, k));
        }
        out += '\n';
    }
    return out;
}

void write_csv_matrix(const std::filesystem::path& path, const Matrix& m) { write_text_file(path, format_csv_matrix(m)); }

}  // namespace gramrig::io
