#include "toponet/pipeline/stages.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "toponet/errors.hpp"
#include "toponet/model/autoencoder.hpp"
#include "toponet/model/cv.hpp"
#include "toponet/model/features.hpp"
#include "toponet/model/pca.hpp"
#include "toponet/model/platt.hpp"
#include "toponet/model/svm.hpp"
#include "toponet/rng.hpp"

namespace toponet::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string resolve(const PipelineConfig& config, const std::string& rel) {
    const fs::path p(rel);
    return p.is_absolute() ? rel : (fs::path(config.output_dir) / p).string();
}

// Labels are relative to the output dir so fingerprints (and therefore cache
// files) do not depend on where the tree lives.
std::string files_fingerprint(const PipelineConfig& config,
                              const std::vector<std::string>& paths) {
    const fs::path root = fs::path(config.output_dir);
    std::string out;
    for (const auto& path : paths) {
        std::error_code ec;
        const fs::path rel = fs::relative(path, root, ec);
        const bool under_root = !ec && !rel.empty() && rel.native().rfind("..", 0) != 0;
        out += under_root ? rel.string() : path;
        out += '=';
        out += hash_hex(hash_file(path));
        out += ';';
    }
    return out;
}

std::vector<UnitRecord> require_manifest(const PipelineConfig& config) {
    const std::string path = resolve(config, "manifest.json");
    if (!fs::exists(path)) {
        throw DataError("manifest.json not found in '" + config.output_dir +
                        "'; run the synth (or network, for CSV input) stage first");
    }
    return load_manifest(path);
}

std::string unit_id(int session, const std::string& tag) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "s%02d", session);
    return std::string(buf) + "_" + tag;
}

// detrend -> optional degenerate-channel drop -> z-score
ingest::TimeSeriesMatrix preprocess(const PipelineConfig& config,
                                    const ingest::TimeSeriesMatrix& raw,
                                    const std::string& unit) {
    ingest::TimeSeriesMatrix series = ingest::detrend(raw);
    if (config.drop_degenerate) {
        const auto flat = ingest::degenerate_channels(series);
        if (!flat.empty()) {
            std::string names;
            for (const auto& id : flat) names += (names.empty() ? "" : ", ") + id;
            std::fprintf(stderr, "warning: %s: dropping degenerate channel(s): %s\n",
                         unit.c_str(), names.c_str());
            series = ingest::drop_channels(series, flat);
        }
        if (series.channels() < 2) {
            throw NumericalError(unit + ": fewer than 2 channels left after dropping "
                                        "degenerate ones");
        }
    }
    return ingest::zscore(series);
}

}  // namespace

StageResult cmd_synth(const PipelineConfig& config, bool force) {
    config.validate();
    if (!config.input_csv.empty()) {
        throw ConfigError("synth stage needs a synthetic spec, but input_csv is set");
    }
    const auto spec = config.synthetic_spec();

    const std::string fingerprint =
        "synth|" + config_fingerprint(config, {"classes", "sessions", "channels", "timepoints",
                                               "noise_sigma", "class_patterns", "gaussian_mean",
                                               "precision_seed", "seed"});

    std::vector<UnitRecord> units;
    for (int s = 0; s < config.sessions; ++s) {
        for (const auto& pattern : spec.class_structure) {
            UnitRecord u;
            u.session = s;
            u.class_tag = pattern.tag;
            u.id = unit_id(s, pattern.tag);
            u.csv_path = "sessions/" + u.id + ".csv";
            units.push_back(std::move(u));
        }
    }
    std::vector<std::string> outputs;
    for (const auto& u : units) outputs.push_back(resolve(config, u.csv_path));
    outputs.push_back(resolve(config, "manifest.json"));

    StageResult result{"synth", false, outputs};
    const StageCache cache(config.output_dir, "synth");
    if (!force && cache.is_clean(fingerprint, outputs)) {
        result.cached = true;
        return result;
    }

    fs::create_directories(fs::path(config.output_dir) / "sessions");
    const auto samples = ingest::synth_class_dataset(spec, config.sessions, config.seed);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        ingest::write_time_series_csv(samples[i].series, outputs[i]);
    }
    write_manifest(units, resolve(config, "manifest.json"));
    cache.record(fingerprint, outputs);
    return result;
}

StageResult cmd_network(const PipelineConfig& config, bool force) {
    config.validate();

    struct WorkItem {
        UnitRecord unit;
        ingest::TimeSeriesMatrix series;
    };
    std::vector<WorkItem> work;
    std::vector<std::string> input_files;
    bool write_manifest_here = false;

    if (!config.input_csv.empty()) {
        auto full = ingest::load_time_series(config.input_csv, config.input_labels);
        input_files = {config.input_csv, config.input_labels};
        write_manifest_here = true;
        for (auto& [tag, series] : ingest::split_by_class(full)) {
            WorkItem item;
            item.unit.id = "input_" + tag;
            item.unit.session = 0;
            item.unit.class_tag = tag;
            item.unit.csv_path = config.input_csv;
            item.series = std::move(series);
            work.push_back(std::move(item));
        }
    } else {
        for (auto& unit : require_manifest(config)) {
            WorkItem item;
            item.unit = unit;
            input_files.push_back(resolve(config, unit.csv_path));
            work.push_back(std::move(item));
        }
        input_files.push_back(resolve(config, "manifest.json"));
    }

    const std::string fingerprint =
        "network|" +
        config_fingerprint(config, {"pinv_rel_tol", "drop_degenerate", "emit_intermediates"}) +
        files_fingerprint(config, input_files);

    std::vector<std::string> outputs;
    for (const auto& item : work) {
        outputs.push_back(resolve(config, "networks/" + item.unit.id + ".network.json"));
        if (config.emit_intermediates) {
            outputs.push_back(resolve(config, "networks/" + item.unit.id + ".marginal.json"));
            outputs.push_back(resolve(config, "networks/" + item.unit.id + ".partial.json"));
        }
    }
    if (write_manifest_here) outputs.push_back(resolve(config, "manifest.json"));

    StageResult result{"network", false, outputs};
    const StageCache cache(config.output_dir, "network");
    if (!force && cache.is_clean(fingerprint, outputs)) {
        result.cached = true;
        return result;
    }

    for (auto& item : work) {
        if (item.series.values.size() == 0) {
            item.series = ingest::load_time_series(resolve(config, item.unit.csv_path));
        }
        const auto prepared = preprocess(config, item.series, item.unit.id);
        const auto marginal = corrnet::marginal_correlation(prepared);
        const auto partial = corrnet::partial_correlation(prepared, config.pinv_rel_tol);
        const auto network = corrnet::build_visual_network(marginal, partial);
        if (network.edges.empty()) {
            std::fprintf(stderr, "warning: %s: no edge passed the both-positive rule\n",
                         item.unit.id.c_str());
        }
        write_network_json(network, resolve(config, "networks/" + item.unit.id + ".network.json"));
        if (config.emit_intermediates) {
            write_correlation_json(marginal,
                                   resolve(config, "networks/" + item.unit.id + ".marginal.json"));
            write_correlation_json(partial,
                                   resolve(config, "networks/" + item.unit.id + ".partial.json"));
        }
    }
    if (write_manifest_here) {
        std::vector<UnitRecord> units;
        for (const auto& item : work) units.push_back(item.unit);
        write_manifest(units, resolve(config, "manifest.json"));
    }
    cache.record(fingerprint, outputs);
    return result;
}

StageResult cmd_persistence(const PipelineConfig& config, bool force) {
    config.validate();
    const auto units = require_manifest(config);

    std::vector<std::string> input_files = {resolve(config, "manifest.json")};
    for (const auto& u : units) {
        input_files.push_back(resolve(config, "networks/" + u.id + ".network.json"));
    }
    const std::string fingerprint =
        "persistence|" +
        config_fingerprint(config,
                           {"keep_diagonal", "isolated_vertex_value", "oracle_bound",
                            "reproducible"}) +
        files_fingerprint(config, input_files);

    std::vector<std::string> outputs;
    for (const auto& u : units) {
        outputs.push_back(resolve(config, "diagrams/" + u.id + ".diagram.json"));
        outputs.push_back(resolve(config, "plots/" + u.id + ".diagram.svg"));
    }

    StageResult result{"persistence", false, outputs};
    const StageCache cache(config.output_dir, "persistence");
    if (!force && cache.is_clean(fingerprint, outputs)) {
        result.cached = true;
        return result;
    }

    persistence::FiltrationOptions filtration_options;
    filtration_options.isolated_vertex_value = config.isolated_vertex_value;
    SvgOptions svg_options;
    svg_options.timestamp_comment = !config.reproducible;

    for (const auto& u : units) {
        const auto network =
            load_network_json(resolve(config, "networks/" + u.id + ".network.json"));
        const auto fg = persistence::build_filtration(network, filtration_options);

        persistence::PersistenceDiagram diagram = persistence::compute_dg0(fg);
        try {
            diagram.dim1 =
                persistence::compute_exdg1(fg, static_cast<std::size_t>(config.oracle_bound)).dim1;
        } catch (const OracleBoundError& e) {
            throw OracleBoundError(std::string(e.what()) +
                                   "; raise oracle_bound in the config to proceed");
        }
        persistence::check_cardinalities(fg, diagram);

        persistence::PersistenceDiagram emitted;
        for (const auto& p : diagram.dim0) {
            if (!p.essential && p.birth == p.death && !config.keep_diagonal) continue;
            emitted.dim0.push_back(p);
        }
        emitted.dim1 = diagram.dim1;
        write_diagram_json(emitted, resolve(config, "diagrams/" + u.id + ".diagram.json"));
        write_diagram_svg(emitted, resolve(config, "plots/" + u.id + ".diagram.svg"), svg_options);
    }
    cache.record(fingerprint, outputs);
    return result;
}

StageResult cmd_features(const PipelineConfig& config, bool force) {
    config.validate();
    const auto units = require_manifest(config);

    std::vector<std::string> input_files = {resolve(config, "manifest.json")};
    for (const auto& u : units) {
        input_files.push_back(resolve(config, "diagrams/" + u.id + ".diagram.json"));
    }
    const std::string fingerprint =
        "features|" + config_fingerprint(config, {"seed", "kmeans_k", "keep_diagonal"}) +
        files_fingerprint(config, input_files);

    const std::vector<std::string> outputs = {resolve(config, "features.csv")};
    StageResult result{"features", false, outputs};
    const StageCache cache(config.output_dir, "features");
    if (!force && cache.is_clean(fingerprint, outputs)) {
        result.cached = true;
        return result;
    }

    std::vector<FeatureRow> rows;
    for (std::size_t i = 0; i < units.size(); ++i) {
        const auto& u = units[i];
        const auto diagram =
            load_diagram_json(resolve(config, "diagrams/" + u.id + ".diagram.json"));
        tdafeat::FeatureOptions options;
        options.k = config.kmeans_k;
        options.keep_diagonal = config.keep_diagonal;
        const auto vec = tdafeat::topo_feature_vector(
            diagram, diagram, derive_seed(config.seed, static_cast<std::uint64_t>(i)), options);

        FeatureRow row;
        row.id = u.id;
        row.class_tag = u.class_tag;
        row.values = vec.values;

        bool all_zero = true;
        for (const double v : row.values) all_zero = all_zero && v == 0.0;
        if (all_zero) {
            std::fprintf(stderr, "warning: %s: empty diagrams produced an all-zero feature row\n",
                         u.id.c_str());
        }
        rows.push_back(std::move(row));
    }
    write_features_csv(rows, outputs[0]);
    cache.record(fingerprint, outputs);
    return result;
}

// ---------------------------------------------------------------------------
// train stage
// ---------------------------------------------------------------------------

namespace {

struct TaskData {
    std::string name;
    std::string negative_tag;  // mapped to -1
    std::string positive_tag;  // mapped to +1
    Eigen::MatrixXd x;         // n x 12
    Eigen::VectorXi y;
};

std::vector<TaskData> build_tasks(const std::vector<FeatureRow>& rows) {
    std::set<std::string> tags;
    for (const auto& r : rows) tags.insert(r.class_tag);
    if (tags.size() < 2) {
        throw DataError("train stage needs at least two classes in features.csv");
    }
    const std::vector<std::string> ordered(tags.begin(), tags.end());

    std::vector<TaskData> tasks;
    for (std::size_t a = 0; a < ordered.size(); ++a) {
        for (std::size_t b = a + 1; b < ordered.size(); ++b) {
            TaskData task;
            task.negative_tag = ordered[a];
            task.positive_tag = ordered[b];
            task.name = ordered[a] + "_vs_" + ordered[b];
            std::vector<const FeatureRow*> members;
            for (const auto& r : rows) {
                if (r.class_tag == ordered[a] || r.class_tag == ordered[b]) {
                    members.push_back(&r);
                }
            }
            task.x.resize(static_cast<Eigen::Index>(members.size()), 12);
            task.y.resize(static_cast<Eigen::Index>(members.size()));
            for (std::size_t i = 0; i < members.size(); ++i) {
                for (int c = 0; c < 12; ++c) {
                    task.x(static_cast<Eigen::Index>(i), c) =
                        members[i]->values[static_cast<std::size_t>(c)];
                }
                task.y(static_cast<Eigen::Index>(i)) =
                    members[i]->class_tag == task.positive_tag ? 1 : -1;
            }
            tasks.push_back(std::move(task));
        }
    }
    return tasks;
}

// Autoencoders are memoized by the bytes of their (standardized) training
// matrix, so cells sharing a fold reuse one model. The init seed is fixed per
// task: every fold starts from the same parameter draw, which keeps fold
// predictions free of init-lottery noise and never depends on held-out rows.
class AutoencoderPool {
public:
    AutoencoderPool(const PipelineConfig& config, std::uint64_t task_seed)
        : config_(config), task_seed_(task_seed) {}

    const model::Autoencoder& get(const Eigen::MatrixXd& x) {
        const std::uint64_t key =
            fnv1a(x.data(), static_cast<std::size_t>(x.size()) * sizeof(double));
        auto it = pool_.find(key);
        if (it != pool_.end()) return it->second;

        model::AutoencoderConfig ae;
        ae.learning_rate = config_.ae_learning_rate;
        ae.momentum = config_.ae_momentum;
        ae.max_epochs = config_.ae_epochs;
        ae.seed = task_seed_;
        return pool_.emplace(key, model::train_autoencoder(x, ae)).first->second;
    }

private:
    const PipelineConfig& config_;
    std::uint64_t task_seed_;
    std::map<std::uint64_t, model::Autoencoder> pool_;
};

json cell_to_json(const std::string& features, const std::string& classifier,
                  const std::string& protocol, const TaskData& task,
                  const model::CVReport& report) {
    json per_class = json::array();
    for (const auto& m : report.per_class) {
        per_class.push_back({{"class", m.label > 0 ? task.positive_tag : task.negative_tag},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"f1", m.f1},
                             {"zero_division", m.zero_division}});
    }
    return {{"features", features},
            {"classifier", classifier},
            {"protocol", protocol},
            {"folds", report.folds},
            {"accuracy", report.accuracy},
            {"fold_accuracy_mean", report.fold_accuracy_mean},
            {"fold_accuracy_std", report.fold_accuracy_std},
            {"confusion", {{"tp", report.confusion.tp},
                           {"fp", report.confusion.fp},
                           {"fn", report.confusion.fn},
                           {"tn", report.confusion.tn}}},
            {"per_class", per_class},
            {"warnings", report.warnings}};
}

std::string selector_name(double selector) {
    if (selector >= 1.0) {
        return "pca_" + std::to_string(static_cast<int>(selector)) + "d";
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "pca_v%.2f", selector);
    return buf;
}

}  // namespace

StageResult cmd_train(const PipelineConfig& config, bool force) {
    config.validate();
    const std::string features_path = resolve(config, "features.csv");
    if (!fs::exists(features_path)) {
        throw DataError("features.csv not found; run the features stage first");
    }

    const std::string fingerprint =
        "train|" +
        config_fingerprint(config, {"seed", "svm_c", "svm_tol", "svm_poly_degree",
                                    "svm_poly_coef0", "svm_rbf_gamma", "pca_selectors",
                                    "kfold_k", "ae_learning_rate", "ae_momentum", "ae_epochs",
                                    "reproducible"}) +
        files_fingerprint(config, {features_path});

    const auto rows = load_features_csv(features_path);
    const auto tasks = build_tasks(rows);
    const auto selectors = config.pca_selector_list();

    std::vector<std::string> outputs = {resolve(config, "report.json"),
                                        resolve(config, "scree.csv")};
    for (const auto& task : tasks) {
        outputs.push_back(resolve(config, "plots/decision_" + task.name + ".svg"));
    }

    StageResult result{"train", false, outputs};
    const StageCache cache(config.output_dir, "train");
    if (!force && cache.is_clean(fingerprint, outputs)) {
        result.cached = true;
        return result;
    }

    const auto poly_kernel =
        model::KernelSpec::polynomial(config.svm_poly_degree, config.svm_poly_coef0);
    const auto rbf_kernel = model::KernelSpec::rbf(config.svm_rbf_gamma);

    json report_tasks = json::array();
    std::ostringstream scree;
    scree << "task,components,cumulative_variance,accuracy\n";

    for (std::size_t t = 0; t < tasks.size(); ++t) {
        const auto& task = tasks[t];
        if (task.x.rows() < 3) {
            throw DataError("task " + task.name + " has fewer than 3 instances");
        }
        AutoencoderPool pool(config, derive_seed(config.seed, 900 + t));
        json cells = json::array();

        // raw 12-D K-means features, polynomial SVM, k-fold (the weak baseline)
        {
            model::TrainerFn trainer = [&](const Eigen::MatrixXd& x,
                                           const Eigen::VectorXi& y) -> model::RowPredictor {
                auto [z, scaler] = model::standardize_features(x);
                const auto svm = model::train_svm(z, y, poly_kernel, config.svm_c, config.svm_tol);
                return [svm, scaler = std::move(scaler)](const Eigen::RowVectorXd& row) {
                    return model::decision_value(svm, scaler.apply(row).row(0)) < 0.0 ? -1 : 1;
                };
            };
            const auto report =
                model::kfold_cv(task.x, task.y, config.kfold_k,
                                derive_seed(config.seed, 500 + t), trainer);
            cells.push_back(cell_to_json("kmeans_12d", "svm_polynomial",
                                         std::to_string(report.folds) + "-fold", task, report));
        }

        // 4-D latent features, polynomial SVM, leave-one-out
        {
            model::TrainerFn trainer = [&](const Eigen::MatrixXd& x,
                                           const Eigen::VectorXi& y) -> model::RowPredictor {
                auto [z, scaler] = model::standardize_features(x);
                const model::Autoencoder& ae = pool.get(z);
                const auto svm = model::train_svm(ae.encode(z), y, poly_kernel, config.svm_c,
                                                  config.svm_tol);
                return [&ae, svm, scaler = std::move(scaler)](const Eigen::RowVectorXd& row) {
                    const Eigen::MatrixXd latent = ae.encode(scaler.apply(row));
                    return model::decision_value(svm, latent.row(0)) < 0.0 ? -1 : 1;
                };
            };
            const auto report = model::loocv(task.x, task.y, trainer);
            cells.push_back(cell_to_json("latent_4d", "svm_polynomial", "loocv", task, report));
        }

        // PCA-reduced latent features, RBF SVM, leave-one-out; one cell per selector
        for (const double selector : selectors) {
            std::vector<double> fold_cum_variance;
            std::vector<int> fold_components;
            model::TrainerFn trainer = [&](const Eigen::MatrixXd& x,
                                           const Eigen::VectorXi& y) -> model::RowPredictor {
                auto [z, scaler] = model::standardize_features(x);
                const model::Autoencoder& ae = pool.get(z);
                const Eigen::MatrixXd latent = ae.encode(z);
                const model::PCAModel pca = model::fit_pca(latent);
                const int k = selector >= 1.0
                                  ? static_cast<int>(selector)
                                  : model::components_for_variance(pca, selector);
                double cum = 0.0;
                for (int i = 0; i < k; ++i) cum += pca.explained_variance_ratio(i);
                fold_cum_variance.push_back(cum);
                fold_components.push_back(k);
                const auto svm = model::train_svm(model::transform_pca(pca, latent, k), y,
                                                  rbf_kernel, config.svm_c, config.svm_tol);
                return [&ae, svm, pca, k,
                        scaler = std::move(scaler)](const Eigen::RowVectorXd& row) {
                    const Eigen::MatrixXd latent_row = ae.encode(scaler.apply(row));
                    const Eigen::MatrixXd reduced = model::transform_pca(pca, latent_row, k);
                    return model::decision_value(svm, reduced.row(0)) < 0.0 ? -1 : 1;
                };
            };
            const auto report = model::loocv(task.x, task.y, trainer);
            json cell = cell_to_json(selector_name(selector), "svm_rbf", "loocv", task, report);
            double mean_cum = 0.0;
            for (const double v : fold_cum_variance) mean_cum += v;
            mean_cum /= static_cast<double>(fold_cum_variance.size());
            cell["cumulative_variance_mean"] = mean_cum;
            cells.push_back(cell);

            if (selector >= 1.0) {
                char line[128];
                std::snprintf(line, sizeof(line), "%s,%d,%.6f,%.6f\n", task.name.c_str(),
                              static_cast<int>(selector), mean_cum, report.accuracy);
                scree << line;
            }
        }

        // decision-region visualization: 2-D PCA plane, RBF SVM, Platt shading
        {
            auto [z, scaler] = model::standardize_features(task.x);
            const model::Autoencoder& ae = pool.get(z);
            const Eigen::MatrixXd latent = ae.encode(z);
            const model::PCAModel pca = model::fit_pca(latent);
            const Eigen::MatrixXd plane = model::transform_pca(pca, latent, 2);
            const auto svm =
                model::train_svm(plane, task.y, rbf_kernel, config.svm_c, config.svm_tol);
            const auto calib =
                model::platt_calibrate(model::decision_function(svm, plane), task.y);

            DecisionRegionView view;
            view.points = plane;
            view.title = task.name;
            for (Eigen::Index i = 0; i < task.y.size(); ++i) view.labels.push_back(task.y(i));
            const double pad_x = (plane.col(0).maxCoeff() - plane.col(0).minCoeff()) * 0.15 + 1e-6;
            const double pad_y = (plane.col(1).maxCoeff() - plane.col(1).minCoeff()) * 0.15 + 1e-6;
            view.x_min = plane.col(0).minCoeff() - pad_x;
            view.x_max = plane.col(0).maxCoeff() + pad_x;
            view.y_min = plane.col(1).minCoeff() - pad_y;
            view.y_max = plane.col(1).maxCoeff() + pad_y;
            const int grid = 50;
            view.probability.assign(grid, std::vector<double>(grid, 0.0));
            for (int r = 0; r < grid; ++r) {
                for (int c = 0; c < grid; ++c) {
                    Eigen::RowVectorXd point(2);
                    point(0) = view.x_min + (view.x_max - view.x_min) * (c + 0.5) / grid;
                    point(1) = view.y_min + (view.y_max - view.y_min) * (r + 0.5) / grid;
                    view.probability[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)] =
                        model::platt_probability(calib, model::decision_value(svm, point));
                }
            }
            SvgOptions svg_options;
            svg_options.timestamp_comment = !config.reproducible;
            write_decision_region_svg(view, resolve(config, "plots/decision_" + task.name + ".svg"),
                                      svg_options);
        }

        report_tasks.push_back({{"task", task.name},
                                {"positive", task.positive_tag},
                                {"negative", task.negative_tag},
                                {"instances", task.x.rows()},
                                {"cells", cells}});
    }

    json report{{"tasks", report_tasks},
                {"artifacts",
                 {{"scree", "scree.csv"},
                  {"features", "features.csv"},
                  {"plots_dir", "plots"}}}};
    {
        std::ofstream out(outputs[0], std::ios::binary);
        if (!out) throw DataError("cannot write '" + outputs[0] + "'");
        out << report.dump(2) << '\n';
    }
    {
        std::ofstream out(outputs[1], std::ios::binary);
        if (!out) throw DataError("cannot write '" + outputs[1] + "'");
        out << scree.str();
    }
    cache.record(fingerprint, outputs);
    return result;
}

namespace {

// Rethrows with the failing stage's name prefixed, preserving the error
// category so the CLI exit code stays correct.
StageResult run_stage(const char* name, const std::function<StageResult()>& stage) {
    try {
        return stage();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string(name) + " stage: " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(name) + " stage: " + e.what());
    } catch (const DataError& e) {
        throw DataError(std::string(name) + " stage: " + e.what());
    }
}

}  // namespace

std::vector<StageResult> cmd_run_all(const PipelineConfig& config, bool force) {
    config.validate();
    fs::create_directories(config.output_dir);
    write_config(config, resolve(config, "config.resolved.conf"));
    std::vector<StageResult> results;
    if (config.input_csv.empty()) {
        results.push_back(run_stage("synth", [&] { return cmd_synth(config, force); }));
    }
    results.push_back(run_stage("network", [&] { return cmd_network(config, force); }));
    results.push_back(run_stage("persistence", [&] { return cmd_persistence(config, force); }));
    results.push_back(run_stage("features", [&] { return cmd_features(config, force); }));
    results.push_back(run_stage("train", [&] { return cmd_train(config, force); }));
    return results;
}

// ---------------------------------------------------------------------------
// oracle check
// ---------------------------------------------------------------------------

namespace {

corrnet::VisualNetwork random_oracle_graph(std::uint64_t seed) {
    Rng rng(seed);
    const int n = 2 + static_cast<int>(rng.next_index(11));  // 2..12 vertices
    std::vector<std::pair<int, int>> pairs;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
    for (std::size_t i = pairs.size(); i > 1; --i) std::swap(pairs[i - 1], pairs[rng.next_index(i)]);
    const std::size_t m = rng.next_index(std::min<std::size_t>(pairs.size(), 20) + 1);

    corrnet::VisualNetwork net;
    for (int i = 0; i < n; ++i) net.vertices.push_back("v" + std::to_string(i));
    std::set<double> used;
    for (std::size_t e = 0; e < m; ++e) {
        double w = 0.0;
        do {
            w = 0.05 + rng.next_double();
        } while (!used.insert(w).second);
        net.edges.push_back({pairs[e].first, pairs[e].second, w});
    }
    return net;
}

using PointKey = std::tuple<double, double, bool>;

std::multiset<PointKey> diagram_keys(const std::vector<persistence::PersistencePoint>& pts) {
    std::multiset<PointKey> out;
    for (const auto& p : pts) out.emplace(p.birth, p.death, p.essential);
    return out;
}

}  // namespace

OracleCheckSummary cmd_oracle_check(const PipelineConfig& config, int graph_cases,
                                    int partial_cases) {
    OracleCheckSummary summary;

    for (int i = 0; i < graph_cases; ++i) {
        const auto net = random_oracle_graph(derive_seed(config.seed, 10'000 + i));
        const auto fg = persistence::build_filtration(net);
        bool ok = true;
        try {
            const auto sweep = persistence::compute_dg0(fg);
            const auto oracle = persistence::extended_persistence_oracle(fg);
            ok = diagram_keys(sweep.dim0) == diagram_keys(oracle.dim0);
            persistence::PersistenceDiagram merged;
            merged.dim0 = sweep.dim0;
            merged.dim1 = oracle.dim1;
            persistence::check_cardinalities(fg, merged);
        } catch (const std::exception&) {
            ok = false;
        }
        (ok ? summary.persistence_pass : summary.persistence_fail) += 1;
    }

    for (int i = 0; i < partial_cases; ++i) {
        Rng rng(derive_seed(config.seed, 20'000 + i));
        const int n = 3 + static_cast<int>(rng.next_index(6));  // 3..8 channels
        ingest::TimeSeriesMatrix ts;
        ts.values.resize(n, 200);
        for (int r = 0; r < n; ++r) {
            ts.channel_ids.push_back("ch" + std::to_string(r));
            for (int c = 0; c < 200; ++c) ts.values(r, c) = rng.next_normal();
        }
        bool ok = true;
        try {
            const auto fast = corrnet::partial_correlation(ts, config.pinv_rel_tol);
            const auto slow = corrnet::partial_correlation_regression_oracle(ts);
            ok = (fast.values - slow.values).cwiseAbs().maxCoeff() < 1e-8;
        } catch (const std::exception&) {
            ok = false;
        }
        (ok ? summary.partial_pass : summary.partial_fail) += 1;
    }
    return summary;
}

}  // namespace toponet::pipeline
