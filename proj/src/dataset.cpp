#include "stylo/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "stylo/error.hpp"

namespace stylo {

std::size_t Dataset::positives() const {
    return static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
}

void Dataset::validate(bool require_both_classes) const {
    if (values.size() != rows * cols) throw ValidationError("dataset: value count does not match shape");
    if (labels.size() != rows) throw ValidationError("dataset: label count does not match rows");
    if (!feature_ids.empty() && feature_ids.size() != cols) {
        throw ValidationError("dataset: feature id count does not match columns");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw ValidationError("dataset: non-finite value at row " + std::to_string(i / std::max<std::size_t>(cols, 1)) +
                                  ", column " + std::to_string(i % std::max<std::size_t>(cols, 1)));
        }
    }
    for (int y : labels) {
        if (y != 0 && y != 1) throw ValidationError("dataset: labels must be 0 or 1");
    }
    if (require_both_classes) {
        const auto pos = positives();
        if (rows < 2 || pos == 0 || pos == rows) throw ValidationError("dataset: training needs both classes");
    }
}

Dataset make_dataset(std::size_t rows, std::size_t cols, std::vector<double> values, std::vector<int> labels,
                     std::vector<std::string> feature_ids) {
    Dataset d;
    d.rows = rows;
    d.cols = cols;
    d.values = std::move(values);
    d.labels = std::move(labels);
    if (feature_ids.empty()) {
        for (std::size_t c = 0; c < cols; ++c) feature_ids.push_back("f" + std::to_string(c));
    }
    d.feature_ids = std::move(feature_ids);
    for (std::size_t r = 0; r < rows; ++r) d.row_ids.push_back("r" + std::to_string(r));
    d.validate(false);
    return d;
}

Dataset take_rows(const Dataset& data, std::span<const std::size_t> rows) {
    Dataset out;
    out.rows = rows.size();
    out.cols = data.cols;
    out.feature_ids = data.feature_ids;
    out.registry_version = data.registry_version;
    out.values.reserve(rows.size() * data.cols);
    for (std::size_t r : rows) {
        const auto src = data.row(r);
        out.values.insert(out.values.end(), src.begin(), src.end());
        out.labels.push_back(data.labels[r]);
        if (!data.row_ids.empty()) out.row_ids.push_back(data.row_ids[r]);
    }
    return out;
}

Dataset take_columns(const Dataset& data, std::span<const std::size_t> cols) {
    Dataset out;
    out.rows = data.rows;
    out.cols = cols.size();
    out.labels = data.labels;
    out.row_ids = data.row_ids;
    out.registry_version = data.registry_version;
    for (std::size_t c : cols) {
        if (c >= data.cols) throw ValidationError("column index out of range");
        out.feature_ids.push_back(data.feature_ids[c]);
    }
    out.values.reserve(data.rows * cols.size());
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c : cols) out.values.push_back(data.at(r, c));
    }
    return out;
}

Dataset select_features(const Dataset& data, std::span<const std::string> ids) {
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < data.cols; ++c) index.emplace(data.feature_ids[c], c);
    std::vector<std::size_t> cols;
    cols.reserve(ids.size());
    for (const auto& id : ids) {
        const auto it = index.find(id);
        if (it == index.end()) throw ValidationError("feature '" + id + "' not present in data");
        cols.push_back(it->second);
    }
    return take_columns(data, cols);
}

ScalerStats standardize_fit(const Dataset& train) {
    if (train.rows == 0) throw ValidationError("standardize: empty training data");
    ScalerStats s;
    s.mean.assign(train.cols, 0.0);
    s.std.assign(train.cols, 0.0);
    s.constant.assign(train.cols, false);
    const double n = static_cast<double>(train.rows);
    for (std::size_t r = 0; r < train.rows; ++r) {
        for (std::size_t c = 0; c < train.cols; ++c) s.mean[c] += train.at(r, c);
    }
    for (double& m : s.mean) m /= n;
    for (std::size_t r = 0; r < train.rows; ++r) {
        for (std::size_t c = 0; c < train.cols; ++c) {
            const double d = train.at(r, c) - s.mean[c];
            s.std[c] += d * d;
        }
    }
    for (std::size_t c = 0; c < train.cols; ++c) {
        s.std[c] = std::sqrt(s.std[c] / n);
        // relative threshold: a column equal up to rounding noise is constant
        if (!(s.std[c] > 1e-12 * std::max(1.0, std::abs(s.mean[c])))) {
            s.constant[c] = true;
            s.std[c] = 0.0;
        }
    }
    return s;
}

Dataset standardize_apply(const ScalerStats& stats, const Dataset& data) {
    if (stats.mean.size() != data.cols) throw ValidationError("standardize: column count mismatch");
    Dataset out = data;
    for (std::size_t r = 0; r < data.rows; ++r) {
        for (std::size_t c = 0; c < data.cols; ++c) {
            out.at(r, c) = stats.constant[c] ? 0.0 : (data.at(r, c) - stats.mean[c]) / stats.std[c];
        }
    }
    return out;
}

}  // namespace stylo
