#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace stylo {

/// Row-major feature matrix with binary labels (1 = generated).
struct Dataset {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<int> labels;
    std::vector<std::string> feature_ids;
    std::vector<std::string> row_ids;
    std::string registry_version;

    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    std::span<const double> row(std::size_t r) const { return {values.data() + r * cols, cols}; }

    std::size_t positives() const;

    /// Shape consistency, finite cells, labels in {0,1}; optionally both
    /// classes present.
    void validate(bool require_both_classes) const;
};

Dataset make_dataset(std::size_t rows, std::size_t cols, std::vector<double> values, std::vector<int> labels,
                     std::vector<std::string> feature_ids = {});

Dataset take_rows(const Dataset& data, std::span<const std::size_t> rows);
Dataset take_columns(const Dataset& data, std::span<const std::size_t> cols);

/// Columns by name, in the order given. Throws when a name is missing.
Dataset select_features(const Dataset& data, std::span<const std::string> ids);

/// Column-wise z-scoring statistics (population std).
struct ScalerStats {
    std::vector<double> mean;
    std::vector<double> std;
    std::vector<bool> constant;
};

ScalerStats standardize_fit(const Dataset& train);
Dataset standardize_apply(const ScalerStats& stats, const Dataset& data);

}  // namespace stylo
