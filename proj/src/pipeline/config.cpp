#include "toponet/pipeline/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include "toponet/errors.hpp"

namespace toponet::pipeline {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    const auto e = s.find_last_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double out = std::stod(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

long parse_int(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long out = std::stol(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return out;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "on") return true;
    if (value == "false" || value == "0" || value == "off") return false;
    throw ConfigError("config key '" + key + "': expected true/false, got '" + value + "'");
}

std::string format_double(double v) {
    std::ostringstream ss;
    ss.precision(17);
    ss << v;
    return ss.str();
}

}  // namespace

ingest::SyntheticSpec PipelineConfig::synthetic_spec() const {
    ingest::SyntheticSpec spec;
    spec.n_classes = classes;
    spec.channels = channels;
    spec.timepoints_per_class = timepoints;
    spec.precision_seed = precision_seed;
    spec.noise_sigma = noise_sigma;
    if (gaussian_mean != 0.0) {
        spec.gaussian_mean = Eigen::VectorXd::Constant(channels, gaussian_mean);
    }

    // pattern grammar: one entry per class, bands joined with '+':
    //   chain:<stride>:<coupling>[+chain:<stride>:<coupling>...]
    std::stringstream ss(class_patterns);
    std::string entry;
    int index = 0;
    while (std::getline(ss, entry, ',')) {
        entry = trim(entry);
        if (entry.empty()) continue;
        ingest::ClassPattern pattern;
        pattern.tag = std::string("class") + static_cast<char>('A' + index);
        std::stringstream bands(entry);
        std::string band;
        while (std::getline(bands, band, '+')) {
            band = trim(band);
            std::stringstream fields(band);
            std::string kind;
            std::string stride;
            std::string coupling;
            if (!std::getline(fields, kind, ':') || !std::getline(fields, stride, ':') ||
                !std::getline(fields, coupling, ':') || kind != "chain") {
                throw ConfigError("class_patterns band '" + band +
                                  "' is not of the form chain:<stride>:<coupling>");
            }
            pattern.bands.emplace_back(static_cast<int>(parse_int("class_patterns", stride)),
                                       parse_double("class_patterns", coupling));
        }
        spec.class_structure.push_back(pattern);
        ++index;
    }
    // Extra patterns are allowed and ignored, so `classes` can be dialed down
    // without rewriting the pattern list.
    if (static_cast<int>(spec.class_structure.size()) > classes) {
        spec.class_structure.resize(static_cast<std::size_t>(classes));
    }
    return spec;
}

std::vector<double> PipelineConfig::pca_selector_list() const {
    std::vector<double> out;
    std::stringstream ss(pca_selectors);
    std::string entry;
    while (std::getline(ss, entry, ',')) {
        entry = trim(entry);
        if (entry.empty()) continue;
        const double v = parse_double("pca_selectors", entry);
        if (v <= 0.0) throw ConfigError("pca_selectors entries must be positive");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("pca_selectors must name at least one selector");
    return out;
}

void PipelineConfig::validate() const {
    if (input_csv.empty()) {
        if (sessions < 1) throw ConfigError("sessions must be >= 1");
        synthetic_spec().validate();
    } else if (input_labels.empty()) {
        throw ConfigError("input_csv requires input_labels");
    }
    if (pinv_rel_tol <= 0.0) throw ConfigError("pinv_rel_tol must be positive");
    if (kmeans_k < 1) throw ConfigError("kmeans_k must be >= 1");
    if (kfold_k < 2) throw ConfigError("kfold_k must be >= 2");
    if (ae_epochs < 1) throw ConfigError("ae_epochs must be >= 1");
    if (svm_c <= 0.0) throw ConfigError("svm_c must be positive");
    if (svm_tol <= 0.0) throw ConfigError("svm_tol must be positive");
    if (output_dir.empty()) throw ConfigError("output_dir must not be empty");
    pca_selector_list();
}

std::map<std::string, std::string> PipelineConfig::to_map() const {
    return {
        {"input_csv", input_csv},
        {"input_labels", input_labels},
        {"classes", std::to_string(classes)},
        {"sessions", std::to_string(sessions)},
        {"channels", std::to_string(channels)},
        {"timepoints", std::to_string(timepoints)},
        {"noise_sigma", format_double(noise_sigma)},
        {"class_patterns", class_patterns},
        {"gaussian_mean", format_double(gaussian_mean)},
        {"precision_seed", std::to_string(precision_seed)},
        {"seed", std::to_string(seed)},
        {"pinv_rel_tol", format_double(pinv_rel_tol)},
        {"drop_degenerate", drop_degenerate ? "true" : "false"},
        {"keep_diagonal", keep_diagonal ? "true" : "false"},
        {"isolated_vertex_value", format_double(isolated_vertex_value)},
        {"oracle_bound", std::to_string(oracle_bound)},
        {"kmeans_k", std::to_string(kmeans_k)},
        {"ae_learning_rate", format_double(ae_learning_rate)},
        {"ae_momentum", format_double(ae_momentum)},
        {"ae_epochs", std::to_string(ae_epochs)},
        {"svm_c", format_double(svm_c)},
        {"svm_tol", format_double(svm_tol)},
        {"svm_poly_degree", std::to_string(svm_poly_degree)},
        {"svm_poly_coef0", format_double(svm_poly_coef0)},
        {"svm_rbf_gamma", format_double(svm_rbf_gamma)},
        {"pca_selectors", pca_selectors},
        {"kfold_k", std::to_string(kfold_k)},
        {"output_dir", output_dir},
        {"emit_intermediates", emit_intermediates ? "true" : "false"},
        {"reproducible", reproducible ? "true" : "false"},
    };
}

void apply_override(PipelineConfig& c, const std::string& key, const std::string& value) {
    static const std::map<std::string,
                          std::function<void(PipelineConfig&, const std::string&)>>
        setters = {
            {"input_csv", [](PipelineConfig& c, const std::string& v) { c.input_csv = v; }},
            {"input_labels", [](PipelineConfig& c, const std::string& v) { c.input_labels = v; }},
            {"classes",
             [](PipelineConfig& c, const std::string& v) {
                 c.classes = static_cast<int>(parse_int("classes", v));
             }},
            {"sessions",
             [](PipelineConfig& c, const std::string& v) {
                 c.sessions = static_cast<int>(parse_int("sessions", v));
             }},
            {"channels",
             [](PipelineConfig& c, const std::string& v) {
                 c.channels = static_cast<int>(parse_int("channels", v));
             }},
            {"timepoints",
             [](PipelineConfig& c, const std::string& v) {
                 c.timepoints = static_cast<int>(parse_int("timepoints", v));
             }},
            {"noise_sigma",
             [](PipelineConfig& c, const std::string& v) {
                 c.noise_sigma = parse_double("noise_sigma", v);
             }},
            {"class_patterns",
             [](PipelineConfig& c, const std::string& v) { c.class_patterns = v; }},
            {"gaussian_mean",
             [](PipelineConfig& c, const std::string& v) {
                 c.gaussian_mean = parse_double("gaussian_mean", v);
             }},
            {"precision_seed",
             [](PipelineConfig& c, const std::string& v) {
                 c.precision_seed = static_cast<std::uint64_t>(parse_int("precision_seed", v));
             }},
            {"seed",
             [](PipelineConfig& c, const std::string& v) {
                 c.seed = static_cast<std::uint64_t>(parse_int("seed", v));
             }},
            {"pinv_rel_tol",
             [](PipelineConfig& c, const std::string& v) {
                 c.pinv_rel_tol = parse_double("pinv_rel_tol", v);
             }},
            {"drop_degenerate",
             [](PipelineConfig& c, const std::string& v) {
                 c.drop_degenerate = parse_bool("drop_degenerate", v);
             }},
            {"keep_diagonal",
             [](PipelineConfig& c, const std::string& v) {
                 c.keep_diagonal = parse_bool("keep_diagonal", v);
             }},
            {"isolated_vertex_value",
             [](PipelineConfig& c, const std::string& v) {
                 c.isolated_vertex_value = parse_double("isolated_vertex_value", v);
             }},
            {"oracle_bound",
             [](PipelineConfig& c, const std::string& v) {
                 c.oracle_bound = static_cast<std::uint64_t>(parse_int("oracle_bound", v));
             }},
            {"kmeans_k",
             [](PipelineConfig& c, const std::string& v) {
                 c.kmeans_k = static_cast<int>(parse_int("kmeans_k", v));
             }},
            {"ae_learning_rate",
             [](PipelineConfig& c, const std::string& v) {
                 c.ae_learning_rate = parse_double("ae_learning_rate", v);
             }},
            {"ae_momentum",
             [](PipelineConfig& c, const std::string& v) {
                 c.ae_momentum = parse_double("ae_momentum", v);
             }},
            {"ae_epochs",
             [](PipelineConfig& c, const std::string& v) {
                 c.ae_epochs = static_cast<int>(parse_int("ae_epochs", v));
             }},
            {"svm_c",
             [](PipelineConfig& c, const std::string& v) { c.svm_c = parse_double("svm_c", v); }},
            {"svm_tol",
             [](PipelineConfig& c, const std::string& v) {
                 c.svm_tol = parse_double("svm_tol", v);
             }},
            {"svm_poly_degree",
             [](PipelineConfig& c, const std::string& v) {
                 c.svm_poly_degree = static_cast<int>(parse_int("svm_poly_degree", v));
             }},
            {"svm_poly_coef0",
             [](PipelineConfig& c, const std::string& v) {
                 c.svm_poly_coef0 = parse_double("svm_poly_coef0", v);
             }},
            {"svm_rbf_gamma",
             [](PipelineConfig& c, const std::string& v) {
                 c.svm_rbf_gamma = parse_double("svm_rbf_gamma", v);
             }},
            {"pca_selectors",
             [](PipelineConfig& c, const std::string& v) { c.pca_selectors = v; }},
            {"kfold_k",
             [](PipelineConfig& c, const std::string& v) {
                 c.kfold_k = static_cast<int>(parse_int("kfold_k", v));
             }},
            {"output_dir", [](PipelineConfig& c, const std::string& v) { c.output_dir = v; }},
            {"emit_intermediates",
             [](PipelineConfig& c, const std::string& v) {
                 c.emit_intermediates = parse_bool("emit_intermediates", v);
             }},
            {"reproducible",
             [](PipelineConfig& c, const std::string& v) {
                 c.reproducible = parse_bool("reproducible", v);
             }},
        };
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(c, value);
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    PipelineConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(line_no) +
                              ": expected key = value");
        }
        apply_override(config, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return config;
}

void write_config(const PipelineConfig& config, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write config file '" + path + "'");
    for (const auto& [key, value] : config.to_map()) {
        out << key << " = " << value << '\n';
    }
}

std::string config_fingerprint(const PipelineConfig& config,
                               const std::vector<std::string>& keys) {
    const auto map = config.to_map();
    std::string out;
    for (const auto& key : keys) {
        const auto it = map.find(key);
        if (it == map.end()) throw ConfigError("fingerprint key '" + key + "' unknown");
        out += key;
        out += '=';
        out += it->second;
        out += ';';
    }
    return out;
}

}  // namespace toponet::pipeline
