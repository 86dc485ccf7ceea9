#pragma once

#include <string>
#include <vector>

#include "toponet/pipeline/artifacts.hpp"
#include "toponet/pipeline/config.hpp"

namespace toponet::pipeline {

struct StageResult {
    std::string stage;
    bool cached = false;
    std::vector<std::string> outputs;
};

// Each stage validates its inputs, is deterministic given the config, and is
// skipped when its content-hash cache entry is still valid (unless force).
StageResult cmd_synth(const PipelineConfig& config, bool force = false);
StageResult cmd_network(const PipelineConfig& config, bool force = false);
StageResult cmd_persistence(const PipelineConfig& config, bool force = false);
StageResult cmd_features(const PipelineConfig& config, bool force = false);
StageResult cmd_train(const PipelineConfig& config, bool force = false);

std::vector<StageResult> cmd_run_all(const PipelineConfig& config, bool force = false);

struct OracleCheckSummary {
    int persistence_pass = 0;
    int persistence_fail = 0;
    int partial_pass = 0;
    int partial_fail = 0;
};

// Randomized equivalence suites: union-find vs matrix reduction, and the
// precision-matrix partial correlation vs the regression-residual route.
OracleCheckSummary cmd_oracle_check(const PipelineConfig& config, int graph_cases = 100,
                                    int partial_cases = 50);

}  // namespace toponet::pipeline
