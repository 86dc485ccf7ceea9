#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "toponet/ingest.hpp"

namespace toponet::pipeline {

// Flat key-value experiment configuration. Every field has a documented
// default; unknown keys are rejected so config files stay diffable and typo
// free.
struct PipelineConfig {
    // data source: a CSV + labels pair, or the synthetic generator below
    std::string input_csv;
    std::string input_labels;

    // synthetic dataset: long-stride bands sit well above the sampling noise
    // floor, and the per-class couplings put each class's loop band at its own
    // diagonal distance
    int classes = 3;
    int sessions = 15;
    int channels = 30;
    int timepoints = 300;
    double noise_sigma = 1.0;
    std::string class_patterns = "chain:15:0.9,chain:16:0.6,chain:17:0.3";
    double gaussian_mean = 0.0;
    std::uint64_t precision_seed = 1;

    // numerics
    std::uint64_t seed = 41;
    double pinv_rel_tol = 1e-10;
    bool drop_degenerate = true;
    bool keep_diagonal = false;
    double isolated_vertex_value = 0.0;
    std::uint64_t oracle_bound = 512;
    int kmeans_k = 3;

    // classifier stack
    double ae_learning_rate = 0.01;
    double ae_momentum = 0.9;
    int ae_epochs = 2000;
    double svm_c = 1.0;
    double svm_tol = 1e-3;
    int svm_poly_degree = 3;
    double svm_poly_coef0 = 1.0;
    double svm_rbf_gamma = 0.0;  // 0 = 1/(d * mean feature variance)
    std::string pca_selectors = "1,2,3,4";
    int kfold_k = 10;

    // output
    std::string output_dir = "out";
    bool emit_intermediates = false;
    bool reproducible = false;

    ingest::SyntheticSpec synthetic_spec() const;
    // Entries >= 1 are component counts; entries in (0,1) are variance
    // thresholds.
    std::vector<double> pca_selector_list() const;
    void validate() const;

    // Canonical key-value view, used for config files and stage fingerprints.
    std::map<std::string, std::string> to_map() const;
};

PipelineConfig load_config(const std::string& path);
void apply_override(PipelineConfig& config, const std::string& key, const std::string& value);
void write_config(const PipelineConfig& config, const std::string& path);

// Stable fingerprint of the listed keys (for stage caching).
std::string config_fingerprint(const PipelineConfig& config,
                               const std::vector<std::string>& keys);

}  // namespace toponet::pipeline
