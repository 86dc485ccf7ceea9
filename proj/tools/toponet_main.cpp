#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include "toponet/errors.hpp"
#include "toponet/pipeline/config.hpp"
#include "toponet/pipeline/stages.hpp"

namespace {

using toponet::pipeline::PipelineConfig;

struct CommonOptions {
    std::string config_file;
    std::vector<std::string> named;     // key=value pairs from named flags
    std::vector<std::string> overrides; // --set pairs, applied last
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOptions& common) {
    cmd->add_option("-c,--config", common.config_file, "flat key = value config file");
    cmd->add_flag("--force", common.force, "ignore the stage cache and recompute");

    auto forward = [&common](const std::string& key) {
        return [&common, key](const std::string& value) {
            common.named.push_back(key + "=" + value);
        };
    };
    auto forward_flag = [&common](const std::string& key) {
        return [&common, key](std::int64_t count) {
            common.named.push_back(key + "=" + (count > 0 ? "true" : "false"));
        };
    };
    cmd->add_option_function<std::string>("-o,--output-dir", forward("output_dir"),
                                          "artifact directory (default: out)");
    cmd->add_option_function<std::string>("--seed", forward("seed"), "master RNG seed");
    cmd->add_option_function<std::string>("--input-csv", forward("input_csv"),
                                          "time-series CSV instead of the synthetic generator");
    cmd->add_option_function<std::string>("--input-labels", forward("input_labels"),
                                          "per-timepoint class labels for --input-csv");
    cmd->add_flag_function("--emit-intermediates", forward_flag("emit_intermediates"),
                           "also write marginal/partial correlation JSONs");
    cmd->add_flag_function("--keep-diagonal", forward_flag("keep_diagonal"),
                           "retain zero-persistence diagram points");
    cmd->add_flag_function("--drop-degenerate,!--no-drop-degenerate",
                           forward_flag("drop_degenerate"),
                           "drop zero-variance channels instead of failing (default on)");
    cmd->add_flag_function("--reproducible", forward_flag("reproducible"),
                           "suppress timestamps so artifacts are byte-stable");
    cmd->add_option("--set", common.overrides,
                    "override any config key, e.g. --set svm_c=10 (repeatable, wins last)");
}

PipelineConfig assemble(const CommonOptions& common) {
    PipelineConfig config;
    if (!common.config_file.empty()) {
        config = toponet::pipeline::load_config(common.config_file);
    }
    auto apply_pairs = [&config](const std::vector<std::string>& pairs) {
        for (const auto& entry : pairs) {
            const auto eq = entry.find('=');
            if (eq == std::string::npos) {
                throw toponet::ConfigError("--set expects key=value, got '" + entry + "'");
            }
            toponet::pipeline::apply_override(config, entry.substr(0, eq), entry.substr(eq + 1));
        }
    };
    apply_pairs(common.named);
    apply_pairs(common.overrides);
    return config;
}

void print_result(const toponet::pipeline::StageResult& result) {
    if (result.cached) {
        std::printf("[%s] up to date (%zu artifacts)\n", result.stage.c_str(),
                    result.outputs.size());
    } else {
        std::printf("[%s] wrote %zu artifacts\n", result.stage.c_str(), result.outputs.size());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"both-positive correlation networks, persistence diagrams, and the "
                 "autoencoder/PCA/SVM classifier stack"};
    app.require_subcommand(1);

    CommonOptions common;
    std::string current_stage = "cli";

    auto* synth = app.add_subcommand("synth", "generate the synthetic labeled dataset");
    auto* network = app.add_subcommand("network", "build both-positive correlation networks");
    auto* persistence_cmd =
        app.add_subcommand("persistence", "compute persistence diagrams and plots");
    auto* features = app.add_subcommand("features", "extract the 12-D K-means descriptors");
    auto* train = app.add_subcommand("train", "run the classification experiment grid");
    auto* run_all = app.add_subcommand("run-all", "run every stage with content-hash caching");
    auto* oracle = app.add_subcommand("oracle-check",
                                      "run the randomized persistence and partial-correlation "
                                      "equivalence suites");
    for (auto* cmd : {synth, network, persistence_cmd, features, train, run_all, oracle}) {
        add_common(cmd, common);
    }

    CLI11_PARSE(app, argc, argv);

    try {
        const PipelineConfig config = assemble(common);
        using namespace toponet::pipeline;
        if (synth->parsed()) {
            current_stage = "synth";
            print_result(cmd_synth(config, common.force));
        } else if (network->parsed()) {
            current_stage = "network";
            print_result(cmd_network(config, common.force));
        } else if (persistence_cmd->parsed()) {
            current_stage = "persistence";
            print_result(cmd_persistence(config, common.force));
        } else if (features->parsed()) {
            current_stage = "features";
            print_result(cmd_features(config, common.force));
        } else if (train->parsed()) {
            current_stage = "train";
            print_result(cmd_train(config, common.force));
        } else if (run_all->parsed()) {
            current_stage = "run-all";
            for (const auto& result : cmd_run_all(config, common.force)) {
                current_stage = result.stage;
                print_result(result);
            }
        } else if (oracle->parsed()) {
            current_stage = "oracle-check";
            const auto summary = cmd_oracle_check(config);
            std::printf("persistence oracle equivalence: %d pass, %d fail\n",
                        summary.persistence_pass, summary.persistence_fail);
            std::printf("partial correlation equivalence: %d pass, %d fail\n",
                        summary.partial_pass, summary.partial_fail);
            if (summary.persistence_fail > 0 || summary.partial_fail > 0) return 4;
        }
    } catch (const toponet::ConfigError& e) {
        std::fprintf(stderr, "error in %s (config): %s\n", current_stage.c_str(), e.what());
        return 2;
    } catch (const toponet::DataError& e) {
        std::fprintf(stderr, "error in %s (data): %s\n", current_stage.c_str(), e.what());
        return 3;
    } catch (const toponet::NumericalError& e) {
        std::fprintf(stderr, "error in %s (numerical): %s\n", current_stage.c_str(), e.what());
        return 4;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error in %s: %s\n", current_stage.c_str(), e.what());
        return 1;
    }
    return 0;
}
