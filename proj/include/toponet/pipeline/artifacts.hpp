#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "toponet/corrnet.hpp"
#include "toponet/persistence.hpp"
#include "toponet/tdafeat.hpp"

namespace toponet::pipeline {

// One labeled network instance flowing through the stages.
struct UnitRecord {
    std::string id;
    int session = 0;
    std::string class_tag;
    std::string csv_path;  // relative to the output dir
};

std::uint64_t fnv1a(const void* data, std::size_t size, std::uint64_t seed = 1469598103934665603ULL);
std::uint64_t hash_file(const std::string& path);
std::string hash_hex(std::uint64_t value);

// --- JSON artifacts (schemas are part of the external interface) -----------

void write_manifest(const std::vector<UnitRecord>& units, const std::string& path);
std::vector<UnitRecord> load_manifest(const std::string& path);

void write_correlation_json(const corrnet::CorrelationMatrix& matrix, const std::string& path);
corrnet::CorrelationMatrix load_correlation_json(const std::string& path);

void write_network_json(const corrnet::VisualNetwork& network, const std::string& path);
corrnet::VisualNetwork load_network_json(const std::string& path);

// {"dim0": [[b, d-or-null], ...], "dim1": [[b, d], ...]}
void write_diagram_json(const persistence::PersistenceDiagram& diagram, const std::string& path);
persistence::PersistenceDiagram load_diagram_json(const std::string& path);

// --- features CSV -----------------------------------------------------------

struct FeatureRow {
    std::string id;
    std::string class_tag;
    std::array<double, 12> values{};
};

void write_features_csv(const std::vector<FeatureRow>& rows, const std::string& path);
std::vector<FeatureRow> load_features_csv(const std::string& path);

// --- SVG emitters ------------------------------------------------------------

struct SvgOptions {
    bool timestamp_comment = true;  // suppressed under --reproducible
};

void write_diagram_svg(const persistence::PersistenceDiagram& diagram, const std::string& path,
                       const SvgOptions& options);

struct DecisionRegionView {
    Eigen::MatrixXd points;             // n x 2, first two PCA components
    std::vector<int> labels;            // +1 / -1 per point
    std::vector<std::vector<double>> probability;  // row-major grid of p(+1)
    double x_min = 0, x_max = 1, y_min = 0, y_max = 1;
    std::string title;
};

void write_decision_region_svg(const DecisionRegionView& view, const std::string& path,
                               const SvgOptions& options);

// --- stage cache --------------------------------------------------------------

// A stage is clean when its recorded input fingerprint matches and every
// output file still hashes to what was recorded.
class StageCache {
public:
    StageCache(std::string output_dir, std::string stage);

    bool is_clean(const std::string& input_fingerprint,
                  const std::vector<std::string>& outputs) const;
    void record(const std::string& input_fingerprint,
                const std::vector<std::string>& outputs) const;

private:
    std::string output_dir_;
    std::string cache_path_;
};

}  // namespace toponet::pipeline
