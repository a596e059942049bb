#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "stylo/dataset.hpp"

namespace stylo {

enum class ModelKind { lda, logreg, linear_svc, gbt, extra_trees };

inline constexpr std::array<ModelKind, 5> kAllModelKinds = {
    ModelKind::lda, ModelKind::logreg, ModelKind::linear_svc, ModelKind::gbt, ModelKind::extra_trees};

/// CLI name: lda, logreg, svc, gbt, etc.
std::string_view model_kind_name(ModelKind kind);
/// Table label: LDA, LR, SVC, XGB, ETC.
std::string_view model_display_name(ModelKind kind);
ModelKind parse_model_kind(std::string_view name);

struct LdaParams {
    double shrinkage = 1e-4;  // toward scaled identity
};

struct LogRegParams {
    double c = 1.0;  // inverse L2 strength
    int max_iter = 500;
    double tol = 1e-6;
};

struct SvcParams {
    double c = 1.0;  // inverse L2 strength; Pegasos lambda = 1 / (c * n)
    int epochs = 200;
};

struct GbtParams {
    int rounds = 100;
    double learning_rate = 0.3;
    int max_depth = 6;
    double lambda = 1.0;
    double min_child_weight = 1.0;
};

struct ExtraTreesParams {
    int trees = 100;
    int min_samples_split = 2;
    int max_features = 0;  // 0 = floor(sqrt(d))
};

struct ModelSpec {
    ModelKind kind = ModelKind::lda;
    LdaParams lda;
    LogRegParams logreg;
    SvcParams svc;
    GbtParams gbt;
    ExtraTreesParams extra_trees;

    static ModelSpec defaults(ModelKind kind);
    /// LDA, logistic regression and the linear SVC see z-scored inputs; tree
    /// models see raw features.
    bool standardizes() const;
    void validate() const;
};

/// Decision function w.x + b over (possibly standardized) inputs. LDA also
/// keeps its class means and the Cholesky factor of the shrunk pooled
/// covariance (row-major lower triangle, d x d).
struct LinearModel {
    std::vector<double> weights;
    double intercept = 0.0;
    std::vector<double> mean_human;
    std::vector<double> mean_generated;
    std::vector<double> covariance_cholesky;

    double decision(std::span<const double> x) const;
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;  // leaf output
    double gain = 0.0;   // split gain (internal nodes)
    double cover = 0.0;  // hessian sum (GBT) or sample count (extra trees)

    bool is_leaf() const { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;

    /// Rows go left when x[feature] < threshold.
    double predict(std::span<const double> row) const;
};

struct TreeEnsemble {
    std::vector<Tree> trees;
    double base_margin = 0.0;
};

struct TrainingMeta {
    std::uint64_t seed = 0;
    int rounds_run = 0;
    double final_loss = 0.0;
    double final_gradient_norm = 0.0;
    std::vector<double> loss_history;  // not persisted
};

struct TrainedModel {
    ModelSpec spec;
    std::vector<std::string> feature_ids;
    std::optional<ScalerStats> scaler;
    std::variant<LinearModel, TreeEnsemble> params;
    TrainingMeta meta;

    const LinearModel& linear() const { return std::get<LinearModel>(params); }
    const TreeEnsemble& ensemble() const { return std::get<TreeEnsemble>(params); }
};

enum class Execution { serial, parallel };

TrainedModel train(const ModelSpec& spec, const Dataset& data, std::uint64_t seed,
                   Execution execution = Execution::parallel);

/// Higher means "generated". Probabilities for LDA, logistic regression and
/// GBT; signed margin for the SVC; mean leaf class fraction (vote share) for
/// extra trees. Columns are matched to the model by feature id.
std::vector<double> predict_scores(const TrainedModel& model, const Dataset& data);

/// 0 for SVC margins, 0.5 otherwise. A row is labelled generated when its
/// score is strictly above the threshold.
double decision_threshold(ModelKind kind);
std::vector<int> predict_labels(ModelKind kind, std::span<const double> scores);

struct ImportanceRanking {
    // descending gain, ties by feature id
    std::vector<std::pair<std::string, double>> entries;

    std::size_t size() const { return entries.size(); }
};

/// Total split gain per feature over every tree of a GBT model; only features
/// with positive gain are listed.
ImportanceRanking feature_importance(const TrainedModel& model);

/// Restricts data to the k highest-ranked features, in ranking order. When k
/// exceeds the ranked features the remaining columns follow with zero gain in
/// feature-id order.
Dataset select_top_k(const ImportanceRanking& ranking, std::size_t k, const Dataset& data);
std::vector<std::string> top_k_ids(const ImportanceRanking& ranking, std::size_t k,
                                   std::span<const std::string> available);

inline constexpr std::string_view kModelFormat = "stylo-model";
inline constexpr int kModelVersion = 1;

std::string serialize_model(const TrainedModel& model);
TrainedModel deserialize_model(std::string_view text);
void save_model(const TrainedModel& model, const std::filesystem::path& path);
TrainedModel load_model(const std::filesystem::path& path);
/// FNV-1a of the serialized form.
std::uint64_t model_digest(const TrainedModel& model);

// ---- trainers (used by train(); exposed for tests and benchmarks) ----------

LinearModel train_lda(const Dataset& z, const LdaParams& params);
LinearModel train_logreg(const Dataset& z, const LogRegParams& params, TrainingMeta* meta);
LinearModel train_linear_svc(const Dataset& z, const SvcParams& params, std::uint64_t seed, TrainingMeta* meta);

/// Logistic loss mean over rows for margins m and labels y.
double mean_logistic_loss(std::span<const double> margins, std::span<const int> labels);

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double gain = 0.0;
    double left_grad = 0.0;
    double left_hess = 0.0;
    double right_grad = 0.0;
    double right_hess = 0.0;

    bool valid() const { return feature >= 0; }
};

/// Per-feature row order sorted by (value, row index).
struct ColumnIndex {
    std::vector<std::vector<std::uint32_t>> order;
};

ColumnIndex build_column_index(const Dataset& data);

/// Second-order split gain GL^2/(HL+l) + GR^2/(HR+l) - G^2/(H+l).
double second_order_gain(double gl, double hl, double gr, double hr, double lambda);

/// Exact greedy split search for every active node at once. node_of_row[r]
/// is the node slot of row r or -1. The best split maximizes gain (> 0) with
/// both children reaching min_child_weight; ties go to the lower feature
/// index, then the lower threshold. Features are scanned in parallel.
std::vector<SplitCandidate> find_best_splits(const Dataset& data, const ColumnIndex& index,
                                             std::span<const double> grad, std::span<const double> hess,
                                             std::span<const int> node_of_row, std::size_t num_nodes,
                                             const GbtParams& params, Execution execution);

/// Serial per-node reference for find_best_splits: sorts the node's rows per
/// feature and scans them. Same tie-breaking.
SplitCandidate find_best_split_reference(const Dataset& data, std::span<const std::size_t> rows,
                                         std::span<const double> grad, std::span<const double> hess,
                                         const GbtParams& params);

TreeEnsemble train_gbt(const Dataset& data, const GbtParams& params, Execution execution, TrainingMeta* meta);

/// Independent trees built from per-tree streams derive_seed(seed, t); trees
/// are built concurrently and the result does not depend on scheduling.
TreeEnsemble train_extra_trees(const Dataset& data, const ExtraTreesParams& params, std::uint64_t seed,
                               Execution execution);

}  // namespace stylo
