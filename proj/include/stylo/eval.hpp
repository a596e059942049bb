#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "stylo/corpus.hpp"
#include "stylo/dataset.hpp"
#include "stylo/features.hpp"
#include "stylo/model.hpp"

namespace stylo {

struct Confusion {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Positive class = generated (1).
Confusion confusion(std::span<const int> predicted, std::span<const int> truth);

/// 2TP / (2TP + FP + FN); 0 when the denominator is 0.
double f1_score(std::span<const int> predicted, std::span<const int> truth);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

/// Threshold sweep over distinct scores, highest first; tied scores move in
/// one diagonal step. Starts at (0,0) and ends at (1,1).
std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> truth);

/// Trapezoidal area under roc_curve.
double roc_auc(std::span<const double> scores, std::span<const int> truth);

struct FeatureSelection {
    FeatureSetTag tag;
    // Rank on the whole matrix instead of inside each training fold.
    bool leaky = false;
};

struct CvOptions {
    std::size_t folds = 5;
    std::uint64_t seed = 42;
    FeatureSelection selection;
    Execution execution = Execution::parallel;
};

struct FoldResult {
    std::size_t fold = 0;
    double f1 = 0.0;
    double auc = 0.0;
    Confusion confusion;
    std::uint64_t model_digest = 0;
    std::vector<std::string> features;  // columns the fold model saw
};

struct EvalReport {
    std::string experiment;
    std::string classifier;  // model_kind_name
    std::string feature_set;
    std::size_t top_k = 0;  // 0 when no selection
    bool leaky_selection = false;
    bool standardized = false;
    std::size_t folds = 0;
    std::uint64_t seed = 0;
    std::string provider;
    std::string registry_version;
    std::string dataset;  // test corpus tag for cross-dataset reports

    std::vector<FoldResult> fold_results;
    double mean_f1 = 0.0;
    double mean_auc = 0.0;
    // pooled out-of-fold (or test-set) scores for the ROC export
    std::vector<double> scores;
    std::vector<int> truth;
    std::vector<std::string> row_ids;

    std::string to_json() const;
    std::string to_text() const;
    std::string roc_csv() const;
};

/// Per fold: optional in-fold top-k selection by GBT gain, standardization on
/// the training split (linear kinds), training, scoring of the held-out split.
EvalReport cross_validate(const Dataset& data, const ModelSpec& spec, const CvOptions& options);
EvalReport cross_validate(const Dataset& data, const ModelSpec& spec, const CvOptions& options,
                          const FoldAssignment& folds);

/// Trains once on `train` and scores every test matrix. Selection and scaling
/// come from `train` only.
std::vector<EvalReport> cross_dataset_eval(const Dataset& train, const std::vector<std::pair<std::string, Dataset>>& tests,
                                           const ModelSpec& spec, const FeatureSelection& selection,
                                           std::uint64_t seed, Execution execution = Execution::parallel);

/// Columns chosen for one training split: the tag's base columns, then top-k
/// by GBT gain when the tag asks for it (k >= width keeps every column).
std::vector<std::string> choose_features(const Dataset& train, const FeatureSetTag& tag, std::uint64_t seed,
                                         Execution execution);

struct SweepRow {
    std::string classifier;
    std::vector<EvalReport> cells;  // aligned with SweepTable::columns
};

struct SweepTable {
    std::vector<std::string> columns;  // e.g. SF, LF, all, top-5 .. top-25
    std::vector<SweepRow> rows;

    std::string to_text(bool auc = false) const;
    std::string to_csv() const;
    std::string to_json() const;
};

/// Grid of cross-validated results, one row per classifier. In-fold GBT
/// rankings are computed once per fold and shared by every k.
SweepTable selection_sweep(const Dataset& data, std::span<const ModelKind> classifiers, std::span<const std::size_t> ks,
                           const CvOptions& options);

/// Table shape SF, LF, all, then top-k for each k.
SweepTable ablation_table(const Dataset& data, std::span<const ModelKind> classifiers, std::span<const std::size_t> ks,
                          const CvOptions& options);

/// Cross-dataset table: one row per classifier, F1/AUC pair per test set.
std::string render_cross_dataset(const std::vector<std::vector<EvalReport>>& per_classifier);

}  // namespace stylo
