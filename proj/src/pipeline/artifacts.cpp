#include "toponet/pipeline/artifacts.hpp"

#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "toponet/errors.hpp"

namespace toponet::pipeline {

using nlohmann::json;

namespace {

json load_json(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid JSON (" + e.what() + ")");
    }
    return j;
}

void dump_json(const json& j, const std::string& path) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << j.dump(2) << '\n';
}

const json& require_field(const json& j, const std::string& field, const std::string& path) {
    const auto it = j.find(field);
    if (it == j.end()) throw DataError(path + ": missing field '" + field + "'");
    return *it;
}

std::string timestamp_comment() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    char buf[64];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return std::string("<!-- generated ") + buf + " -->\n";
}

std::string fmt(double v) {
    std::ostringstream ss;
    ss.precision(6);
    ss << v;
    return ss.str();
}

}  // namespace

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    std::uint64_t hash = seed;
    for (std::size_t i = 0; i < size; ++i) {
        hash ^= bytes[i];
        hash *= 1099511628211ULL;
    }
    return hash;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot hash missing file '" + path + "'");
    std::uint64_t hash = 1469598103934665603ULL;
    char buf[8192];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        hash = fnv1a(buf, static_cast<std::size_t>(in.gcount()), hash);
    }
    return hash;
}

std::string hash_hex(std::uint64_t value) {
    std::ostringstream ss;
    ss << std::hex << value;
    return ss.str();
}

// --- manifest ---------------------------------------------------------------

void write_manifest(const std::vector<UnitRecord>& units, const std::string& path) {
    json list = json::array();
    for (const auto& u : units) {
        list.push_back({{"id", u.id},
                        {"session", u.session},
                        {"class", u.class_tag},
                        {"csv", u.csv_path}});
    }
    dump_json(json{{"sessions", list}}, path);
}

std::vector<UnitRecord> load_manifest(const std::string& path) {
    const json j = load_json(path);
    std::vector<UnitRecord> out;
    for (const auto& entry : require_field(j, "sessions", path)) {
        UnitRecord u;
        u.id = require_field(entry, "id", path).get<std::string>();
        u.session = require_field(entry, "session", path).get<int>();
        u.class_tag = require_field(entry, "class", path).get<std::string>();
        u.csv_path = require_field(entry, "csv", path).get<std::string>();
        out.push_back(std::move(u));
    }
    return out;
}

// --- correlation matrices -----------------------------------------------------

void write_correlation_json(const corrnet::CorrelationMatrix& matrix, const std::string& path) {
    json values = json::array();
    for (Eigen::Index i = 0; i < matrix.size(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < matrix.size(); ++j) row.push_back(matrix.values(i, j));
        values.push_back(std::move(row));
    }
    dump_json(json{{"kind", matrix.kind == corrnet::CorrKind::Marginal ? "marginal" : "partial"},
                   {"n", matrix.size()},
                   {"channels", matrix.channel_ids},
                   {"values", values}},
              path);
}

corrnet::CorrelationMatrix load_correlation_json(const std::string& path) {
    const json j = load_json(path);
    corrnet::CorrelationMatrix out;
    const std::string kind = require_field(j, "kind", path).get<std::string>();
    if (kind == "marginal") {
        out.kind = corrnet::CorrKind::Marginal;
    } else if (kind == "partial") {
        out.kind = corrnet::CorrKind::Partial;
    } else {
        throw DataError(path + ": field 'kind' must be marginal or partial");
    }
    const auto n = require_field(j, "n", path).get<Eigen::Index>();
    const auto& values = require_field(j, "values", path);
    if (static_cast<Eigen::Index>(values.size()) != n) {
        throw DataError(path + ": field 'values' has wrong row count");
    }
    out.values.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(values[i].size()) != n) {
            throw DataError(path + ": field 'values' row " + std::to_string(i) +
                            " has wrong length");
        }
        for (Eigen::Index k = 0; k < n; ++k) out.values(i, k) = values[i][k].get<double>();
    }
    if (j.contains("channels")) {
        out.channel_ids = j["channels"].get<std::vector<std::string>>();
    }
    return out;
}

// --- networks -----------------------------------------------------------------

void write_network_json(const corrnet::VisualNetwork& network, const std::string& path) {
    json edges = json::array();
    for (const auto& e : network.edges) edges.push_back({e.i, e.j, e.weight});
    dump_json(json{{"vertices", network.vertices}, {"edges", edges}}, path);
}

corrnet::VisualNetwork load_network_json(const std::string& path) {
    const json j = load_json(path);
    corrnet::VisualNetwork out;
    out.vertices = require_field(j, "vertices", path).get<std::vector<std::string>>();
    std::set<std::pair<int, int>> seen;
    for (const auto& e : require_field(j, "edges", path)) {
        if (!e.is_array() || e.size() != 3) {
            throw DataError(path + ": field 'edges' entries must be [i, j, weight]");
        }
        corrnet::VisualNetwork::Edge edge;
        edge.i = e[0].get<int>();
        edge.j = e[1].get<int>();
        edge.weight = e[2].get<double>();
        const int n = static_cast<int>(out.vertices.size());
        if (edge.i < 0 || edge.j < 0 || edge.i >= n || edge.j >= n || edge.i == edge.j) {
            throw DataError(path + ": field 'edges' has an endpoint out of range");
        }
        if (edge.weight <= 0.0) {
            throw DataError(path + ": field 'edges' has a non-positive weight");
        }
        if (!seen.emplace(std::min(edge.i, edge.j), std::max(edge.i, edge.j)).second) {
            throw DataError(path + ": field 'edges' repeats a vertex pair");
        }
        out.edges.push_back(edge);
    }
    return out;
}

// --- diagrams -------------------------------------------------------------------

void write_diagram_json(const persistence::PersistenceDiagram& diagram, const std::string& path) {
    json dim0 = json::array();
    for (const auto& p : diagram.dim0) {
        if (p.death == persistence::kInfiniteDeath) {
            dim0.push_back({p.birth, nullptr});
        } else {
            dim0.push_back({p.birth, p.death});
        }
    }
    json dim1 = json::array();
    for (const auto& p : diagram.dim1) dim1.push_back({p.birth, p.death});
    dump_json(json{{"dim0", dim0}, {"dim1", dim1}}, path);
}

persistence::PersistenceDiagram load_diagram_json(const std::string& path) {
    const json j = load_json(path);
    persistence::PersistenceDiagram out;
    for (const auto& p : require_field(j, "dim0", path)) {
        if (!p.is_array() || p.size() != 2) {
            throw DataError(path + ": field 'dim0' entries must be [birth, death-or-null]");
        }
        persistence::PersistencePoint point;
        point.dimension = 0;
        point.birth = p[0].get<double>();
        if (p[1].is_null()) {
            point.death = persistence::kInfiniteDeath;
            point.essential = true;
        } else {
            point.death = p[1].get<double>();
        }
        out.dim0.push_back(point);
    }
    for (const auto& p : require_field(j, "dim1", path)) {
        if (!p.is_array() || p.size() != 2 || p[1].is_null()) {
            throw DataError(path + ": field 'dim1' entries must be [birth, death]");
        }
        out.dim1.push_back({p[0].get<double>(), p[1].get<double>(), 1, false});
    }
    return out;
}

// --- features CSV ----------------------------------------------------------------

void write_features_csv(const std::vector<FeatureRow>& rows, const std::string& path) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "network_id,class";
    for (const char* name : tdafeat::TopoFeatureVector::names()) out << ',' << name;
    out << '\n';
    char buf[64];
    for (const auto& row : rows) {
        out << row.id << ',' << row.class_tag;
        for (const double v : row.values) {
            const auto res = std::to_chars(buf, buf + sizeof(buf), v);
            out << ',' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf));
        }
        out << '\n';
    }
}

std::vector<FeatureRow> load_features_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty features file");

    std::vector<FeatureRow> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::stringstream ss(line);
        FeatureRow row;
        std::string cell;
        if (!std::getline(ss, row.id, ',') || !std::getline(ss, row.class_tag, ',')) {
            throw DataError(path + ", row " + std::to_string(line_no) + ": malformed");
        }
        for (auto& value : row.values) {
            if (!std::getline(ss, cell, ',')) {
                throw DataError(path + ", row " + std::to_string(line_no) +
                                ": expected 12 feature values");
            }
            value = std::stod(cell);
        }
        out.push_back(std::move(row));
    }
    return out;
}

// --- SVG -----------------------------------------------------------------------

void write_diagram_svg(const persistence::PersistenceDiagram& diagram, const std::string& path,
                       const SvgOptions& options) {
    double lo = 0.0;
    double hi = 1.0;
    bool any = false;
    auto stretch = [&](double v) {
        if (v == persistence::kInfiniteDeath) return;
        lo = any ? std::min(lo, v) : v;
        hi = any ? std::max(hi, v) : v;
        any = true;
    };
    for (const auto& p : diagram.dim0) {
        stretch(p.birth);
        stretch(p.death);
    }
    for (const auto& p : diagram.dim1) {
        stretch(p.birth);
        stretch(p.death);
    }
    const double pad = (hi - lo) * 0.1 + 1e-6;
    lo -= pad;
    hi += pad;

    const double size = 420.0;
    const double margin = 40.0;
    auto sx = [&](double v) { return margin + (v - lo) / (hi - lo) * size; };
    auto sy = [&](double v) { return margin + size - (v - lo) / (hi - lo) * size; };

    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" "
           "viewBox=\"0 0 500 500\">\n";
    if (options.timestamp_comment) out << timestamp_comment();
    out << "<rect width=\"500\" height=\"500\" fill=\"white\"/>\n";
    out << "<line x1=\"" << fmt(sx(lo)) << "\" y1=\"" << fmt(sy(lo)) << "\" x2=\"" << fmt(sx(hi))
        << "\" y2=\"" << fmt(sy(hi)) << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    out << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(size)
        << "\" height=\"" << fmt(size) << "\" fill=\"none\" stroke=\"#333\"/>\n";

    for (const auto& p : diagram.dim0) {
        const double death = p.death == persistence::kInfiniteDeath ? hi : p.death;
        const char* fill = p.death == persistence::kInfiniteDeath ? "#9c27b0" : "#e91e63";
        out << "<circle cx=\"" << fmt(sx(p.birth)) << "\" cy=\"" << fmt(sy(death))
            << "\" r=\"5\" fill=\"" << fill << "\" fill-opacity=\"0.8\"/>\n";
    }
    for (const auto& p : diagram.dim1) {
        out << "<rect x=\"" << fmt(sx(p.birth) - 4.0) << "\" y=\"" << fmt(sy(p.death) - 4.0)
            << "\" width=\"8\" height=\"8\" fill=\"#2196f3\" fill-opacity=\"0.8\"/>\n";
    }
    out << "<text x=\"" << fmt(margin + size / 2) << "\" y=\"495\" text-anchor=\"middle\" "
           "font-size=\"13\">birth</text>\n";
    out << "<text x=\"12\" y=\"" << fmt(margin + size / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 12 "
        << fmt(margin + size / 2) << ")\">death</text>\n";
    out << "</svg>\n";
}

void write_decision_region_svg(const DecisionRegionView& view, const std::string& path,
                               const SvgOptions& options) {
    const double size = 420.0;
    const double margin = 40.0;
    auto sx = [&](double v) {
        return margin + (v - view.x_min) / (view.x_max - view.x_min) * size;
    };
    auto sy = [&](double v) {
        return margin + size - (v - view.y_min) / (view.y_max - view.y_min) * size;
    };

    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path + "'");
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"500\" height=\"500\" "
           "viewBox=\"0 0 500 500\">\n";
    if (options.timestamp_comment) out << timestamp_comment();
    out << "<rect width=\"500\" height=\"500\" fill=\"white\"/>\n";

    const std::size_t grid = view.probability.size();
    const double cell = size / static_cast<double>(grid);
    for (std::size_t r = 0; r < grid; ++r) {
        for (std::size_t c = 0; c < view.probability[r].size(); ++c) {
            const double p = view.probability[r][c];
            // blue (p=0) to red (p=1) through white
            const int red = static_cast<int>(std::round(255 * std::min(1.0, 2.0 * p)));
            const int blue = static_cast<int>(std::round(255 * std::min(1.0, 2.0 * (1.0 - p))));
            const int green = static_cast<int>(std::round(255 * (1.0 - 2.0 * std::abs(p - 0.5))));
            out << "<rect x=\"" << fmt(margin + static_cast<double>(c) * cell) << "\" y=\""
                << fmt(margin + static_cast<double>(grid - 1 - r) * cell) << "\" width=\""
                << fmt(cell + 0.5) << "\" height=\"" << fmt(cell + 0.5) << "\" fill=\"rgb(" << red
                << ',' << green << ',' << blue << ")\" fill-opacity=\"0.55\"/>\n";
        }
    }
    for (Eigen::Index i = 0; i < view.points.rows(); ++i) {
        const char* fill = view.labels[static_cast<std::size_t>(i)] > 0 ? "#b71c1c" : "#0d47a1";
        out << "<circle cx=\"" << fmt(sx(view.points(i, 0))) << "\" cy=\""
            << fmt(sy(view.points(i, 1))) << "\" r=\"5\" fill=\"" << fill
            << "\" stroke=\"black\"/>\n";
    }
    out << "<rect x=\"" << fmt(margin) << "\" y=\"" << fmt(margin) << "\" width=\"" << fmt(size)
        << "\" height=\"" << fmt(size) << "\" fill=\"none\" stroke=\"#333\"/>\n";
    out << "<text x=\"250\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">" << view.title
        << "</text>\n";
    out << "<text x=\"" << fmt(margin + size / 2)
        << "\" y=\"495\" text-anchor=\"middle\" font-size=\"13\">component 1</text>\n";
    out << "<text x=\"12\" y=\"" << fmt(margin + size / 2)
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 12 "
        << fmt(margin + size / 2) << ")\">component 2</text>\n";
    out << "</svg>\n";
}

// --- stage cache -------------------------------------------------------------------

StageCache::StageCache(std::string output_dir, std::string stage)
    : output_dir_(std::move(output_dir)),
      cache_path_((std::filesystem::path(output_dir_) / ".cache" / (stage + ".json")).string()) {}

namespace {

// Output labels are relative to the run directory so cache files stay
// byte-identical across runs placed at different paths.
std::string outputs_fingerprint(const std::string& output_dir,
                                const std::vector<std::string>& outputs) {
    std::string combined;
    for (const auto& path : outputs) {
        if (!std::filesystem::exists(path)) return "";
        std::error_code ec;
        const auto rel = std::filesystem::relative(path, output_dir, ec);
        combined += ec ? path : rel.string();
        combined += '=';
        combined += hash_hex(hash_file(path));
        combined += ';';
    }
    return hash_hex(fnv1a(combined.data(), combined.size()));
}

}  // namespace

bool StageCache::is_clean(const std::string& input_fingerprint,
                          const std::vector<std::string>& outputs) const {
    if (!std::filesystem::exists(cache_path_)) return false;
    json j;
    try {
        j = load_json(cache_path_);
    } catch (const DataError&) {
        return false;
    }
    if (!j.contains("inputs") || !j.contains("outputs")) return false;
    if (j["inputs"].get<std::string>() !=
        hash_hex(fnv1a(input_fingerprint.data(), input_fingerprint.size()))) {
        return false;
    }
    const std::string current = outputs_fingerprint(output_dir_, outputs);
    return !current.empty() && current == j["outputs"].get<std::string>();
}

void StageCache::record(const std::string& input_fingerprint,
                        const std::vector<std::string>& outputs) const {
    dump_json(json{{"inputs", hash_hex(fnv1a(input_fingerprint.data(), input_fingerprint.size()))},
                   {"outputs", outputs_fingerprint(output_dir_, outputs)}},
              cache_path_);
}

}  // namespace toponet::pipeline
