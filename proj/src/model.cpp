#include "stylo/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "stylo/embeddings.hpp"
#include "stylo/error.hpp"

namespace stylo {

using nlohmann::json;

std::string_view model_kind_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::lda: return "lda";
        case ModelKind::logreg: return "logreg";
        case ModelKind::linear_svc: return "svc";
        case ModelKind::gbt: return "gbt";
        case ModelKind::extra_trees: return "etc";
    }
    return "unknown";
}

std::string_view model_display_name(ModelKind kind) {
    switch (kind) {
        case ModelKind::lda: return "LDA";
        case ModelKind::logreg: return "LR";
        case ModelKind::linear_svc: return "SVC";
        case ModelKind::gbt: return "XGB";
        case ModelKind::extra_trees: return "ETC";
    }
    return "?";
}

ModelKind parse_model_kind(std::string_view name) {
    for (ModelKind k : kAllModelKinds) {
        if (name == model_kind_name(k)) return k;
    }
    if (name == "linear_svc") return ModelKind::linear_svc;
    if (name == "extra_trees") return ModelKind::extra_trees;
    if (name == "xgb") return ModelKind::gbt;
    throw ValidationError("unknown classifier '" + std::string(name) + "' (expected lda, logreg, svc, gbt or etc)");
}

ModelSpec ModelSpec::defaults(ModelKind kind) {
    ModelSpec s;
    s.kind = kind;
    return s;
}

bool ModelSpec::standardizes() const {
    return kind == ModelKind::lda || kind == ModelKind::logreg || kind == ModelKind::linear_svc;
}

void ModelSpec::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ValidationError(std::string("invalid hyperparameter: ") + what);
    };
    require(lda.shrinkage >= 0.0 && lda.shrinkage <= 1.0, "lda shrinkage must be in [0, 1]");
    require(logreg.c > 0.0, "logreg C must be positive");
    require(logreg.max_iter > 0, "logreg max_iter must be positive");
    require(logreg.tol > 0.0, "logreg tol must be positive");
    require(svc.c > 0.0, "svc C must be positive");
    require(svc.epochs > 0, "svc epochs must be positive");
    require(gbt.rounds >= 0, "gbt rounds must be non-negative");
    require(gbt.learning_rate > 0.0, "gbt learning rate must be positive");
    require(gbt.max_depth > 0, "gbt max depth must be positive");
    require(gbt.lambda >= 0.0, "gbt lambda must be non-negative");
    require(gbt.min_child_weight >= 0.0, "gbt min child weight must be non-negative");
    require(extra_trees.trees > 0, "extra trees count must be positive");
    require(extra_trees.min_samples_split >= 2, "extra trees min samples split must be at least 2");
    require(extra_trees.max_features >= 0, "extra trees max features must be non-negative");
}

TrainedModel train(const ModelSpec& spec, const Dataset& data, std::uint64_t seed, Execution execution) {
    spec.validate();
    data.validate(true);
    TrainedModel model;
    model.spec = spec;
    model.feature_ids = data.feature_ids;
    model.meta.seed = seed;
    if (spec.standardizes()) {
        model.scaler = standardize_fit(data);
        const Dataset z = standardize_apply(*model.scaler, data);
        switch (spec.kind) {
            case ModelKind::lda: model.params = train_lda(z, spec.lda); break;
            case ModelKind::logreg: model.params = train_logreg(z, spec.logreg, &model.meta); break;
            default: model.params = train_linear_svc(z, spec.svc, seed, &model.meta); break;
        }
    } else if (spec.kind == ModelKind::gbt) {
        model.params = train_gbt(data, spec.gbt, execution, &model.meta);
    } else {
        model.params = train_extra_trees(data, spec.extra_trees, seed, execution);
        model.meta.rounds_run = spec.extra_trees.trees;
    }
    return model;
}

namespace {

double sigmoid(double m) { return 1.0 / (1.0 + std::exp(-m)); }

Dataset align_columns(const TrainedModel& model, const Dataset& data) {
    if (data.feature_ids == model.feature_ids) return data;
    if (data.cols < model.feature_ids.size()) {
        throw ValidationError("feature mismatch: model expects " + std::to_string(model.feature_ids.size()) +
                              " columns, data has " + std::to_string(data.cols));
    }
    std::unordered_map<std::string, std::size_t> index;
    for (std::size_t c = 0; c < data.cols; ++c) index.emplace(data.feature_ids[c], c);
    std::vector<std::size_t> cols;
    for (const auto& id : model.feature_ids) {
        const auto it = index.find(id);
        if (it == index.end()) throw ValidationError("feature mismatch: data lacks column '" + id + "'");
        cols.push_back(it->second);
    }
    return take_columns(data, cols);
}

}  // namespace

std::vector<double> predict_scores(const TrainedModel& model, const Dataset& data) {
    const Dataset aligned = align_columns(model, data);
    std::vector<double> scores(aligned.rows);
    if (model.scaler) {
        const Dataset z = standardize_apply(*model.scaler, aligned);
        const auto& lin = model.linear();
        for (std::size_t r = 0; r < z.rows; ++r) {
            const double m = lin.decision(z.row(r));
            scores[r] = model.spec.kind == ModelKind::linear_svc ? m : sigmoid(m);
        }
        return scores;
    }
    const auto& ens = model.ensemble();
    for (std::size_t r = 0; r < aligned.rows; ++r) {
        double s = model.spec.kind == ModelKind::gbt ? ens.base_margin : 0.0;
        for (const auto& tree : ens.trees) s += tree.predict(aligned.row(r));
        if (model.spec.kind == ModelKind::gbt) {
            scores[r] = sigmoid(s);
        } else {
            scores[r] = ens.trees.empty() ? 0.0 : s / static_cast<double>(ens.trees.size());
        }
    }
    return scores;
}

double decision_threshold(ModelKind kind) { return kind == ModelKind::linear_svc ? 0.0 : 0.5; }

std::vector<int> predict_labels(ModelKind kind, std::span<const double> scores) {
    const double t = decision_threshold(kind);
    std::vector<int> out(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out[i] = scores[i] > t ? 1 : 0;
    return out;
}

ImportanceRanking feature_importance(const TrainedModel& model) {
    if (model.spec.kind != ModelKind::gbt) {
        throw ValidationError("feature importance needs a gbt model, got " +
                              std::string(model_kind_name(model.spec.kind)));
    }
    std::map<std::string, double> total;
    for (const auto& tree : model.ensemble().trees) {
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf()) total[model.feature_ids[static_cast<std::size_t>(node.feature)]] += node.gain;
        }
    }
    ImportanceRanking ranking;
    for (const auto& [id, gain] : total) {
        if (gain > 0.0) ranking.entries.emplace_back(id, gain);
    }
    if (ranking.entries.empty()) throw ValidationError("feature importance: model has no splits");
    std::stable_sort(ranking.entries.begin(), ranking.entries.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranking;
}

std::vector<std::string> top_k_ids(const ImportanceRanking& ranking, std::size_t k,
                                   std::span<const std::string> available) {
    if (k == 0) throw ValidationError("top-k: k must be positive");
    if (k > available.size()) {
        throw ValidationError("top-k: k=" + std::to_string(k) + " exceeds " + std::to_string(available.size()) +
                              " available features");
    }
    std::vector<std::string> ids;
    std::set<std::string> chosen;
    for (const auto& [id, gain] : ranking.entries) {
        if (ids.size() == k) break;
        if (std::find(available.begin(), available.end(), id) == available.end()) continue;
        ids.push_back(id);
        chosen.insert(id);
    }
    if (ids.size() < k) {
        std::vector<std::string> rest;
        for (const auto& id : available) {
            if (!chosen.count(id)) rest.push_back(id);
        }
        std::sort(rest.begin(), rest.end());
        for (std::size_t i = 0; ids.size() < k; ++i) ids.push_back(rest[i]);
    }
    return ids;
}

Dataset select_top_k(const ImportanceRanking& ranking, std::size_t k, const Dataset& data) {
    const auto ids = top_k_ids(ranking, k, data.feature_ids);
    return select_features(data, ids);
}

// ---- serialization ---------------------------------------------------------

namespace {

json spec_to_json(const ModelSpec& s) {
    json h;
    switch (s.kind) {
        case ModelKind::lda: h = {{"shrinkage", s.lda.shrinkage}}; break;
        case ModelKind::logreg: h = {{"c", s.logreg.c}, {"max_iter", s.logreg.max_iter}, {"tol", s.logreg.tol}}; break;
        case ModelKind::linear_svc: h = {{"c", s.svc.c}, {"epochs", s.svc.epochs}}; break;
        case ModelKind::gbt:
            h = {{"rounds", s.gbt.rounds},
                 {"learning_rate", s.gbt.learning_rate},
                 {"max_depth", s.gbt.max_depth},
                 {"lambda", s.gbt.lambda},
                 {"min_child_weight", s.gbt.min_child_weight}};
            break;
        case ModelKind::extra_trees:
            h = {{"trees", s.extra_trees.trees},
                 {"min_samples_split", s.extra_trees.min_samples_split},
                 {"max_features", s.extra_trees.max_features}};
            break;
    }
    return h;
}

ModelSpec spec_from_json(ModelKind kind, const json& h) {
    ModelSpec s = ModelSpec::defaults(kind);
    switch (kind) {
        case ModelKind::lda: s.lda.shrinkage = h.at("shrinkage").get<double>(); break;
        case ModelKind::logreg:
            s.logreg.c = h.at("c").get<double>();
            s.logreg.max_iter = h.at("max_iter").get<int>();
            s.logreg.tol = h.at("tol").get<double>();
            break;
        case ModelKind::linear_svc:
            s.svc.c = h.at("c").get<double>();
            s.svc.epochs = h.at("epochs").get<int>();
            break;
        case ModelKind::gbt:
            s.gbt.rounds = h.at("rounds").get<int>();
            s.gbt.learning_rate = h.at("learning_rate").get<double>();
            s.gbt.max_depth = h.at("max_depth").get<int>();
            s.gbt.lambda = h.at("lambda").get<double>();
            s.gbt.min_child_weight = h.at("min_child_weight").get<double>();
            break;
        case ModelKind::extra_trees:
            s.extra_trees.trees = h.at("trees").get<int>();
            s.extra_trees.min_samples_split = h.at("min_samples_split").get<int>();
            s.extra_trees.max_features = h.at("max_features").get<int>();
            break;
    }
    return s;
}

}  // namespace

std::string serialize_model(const TrainedModel& model) {
    json j;
    j["format"] = kModelFormat;
    j["version"] = kModelVersion;
    j["kind"] = model_kind_name(model.spec.kind);
    j["hyperparameters"] = spec_to_json(model.spec);
    j["feature_ids"] = model.feature_ids;
    if (model.scaler) {
        std::vector<int> constant(model.scaler->constant.begin(), model.scaler->constant.end());
        j["scaler"] = {{"mean", model.scaler->mean}, {"std", model.scaler->std}, {"constant", constant}};
    } else {
        j["scaler"] = nullptr;
    }
    if (std::holds_alternative<LinearModel>(model.params)) {
        const auto& lin = model.linear();
        json p = {{"weights", lin.weights}, {"intercept", lin.intercept}};
        if (model.spec.kind == ModelKind::lda) {
            p["mean_human"] = lin.mean_human;
            p["mean_generated"] = lin.mean_generated;
            p["covariance_cholesky"] = lin.covariance_cholesky;
        }
        j["parameters"] = p;
    } else {
        const auto& ens = model.ensemble();
        json trees = json::array();
        for (const auto& tree : ens.trees) {
            json nodes = json::array();
            for (const auto& n : tree.nodes) {
                if (n.is_leaf()) {
                    nodes.push_back({{"leaf", n.value}, {"cover", n.cover}});
                } else {
                    nodes.push_back({{"feature_id", model.feature_ids[static_cast<std::size_t>(n.feature)]},
                                     {"threshold", n.threshold},
                                     {"left", n.left},
                                     {"right", n.right},
                                     {"gain", n.gain},
                                     {"cover", n.cover}});
                }
            }
            trees.push_back(nodes);
        }
        j["parameters"] = {{"base_margin", ens.base_margin}, {"trees", trees}};
    }
    j["training"] = {{"seed", model.meta.seed},
                     {"rounds_run", model.meta.rounds_run},
                     {"final_loss", model.meta.final_loss},
                     {"final_gradient_norm", model.meta.final_gradient_norm}};
    return j.dump(1) + "\n";
}

TrainedModel deserialize_model(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ValidationError("model file: parse error at byte " + std::to_string(e.byte) + ": " + e.what());
    }
    try {
        if (!j.is_object() || j.value("format", std::string{}) != kModelFormat) {
            throw ValidationError("model file: not a stylo model");
        }
        const int version = j.at("version").get<int>();
        if (version != kModelVersion) {
            throw ValidationError("model file: version mismatch (file " + std::to_string(version) + ", supported " +
                                  std::to_string(kModelVersion) + ")");
        }
        TrainedModel model;
        const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
        model.spec = spec_from_json(kind, j.at("hyperparameters"));
        model.feature_ids = j.at("feature_ids").get<std::vector<std::string>>();
        const std::size_t d = model.feature_ids.size();
        if (!j.at("scaler").is_null()) {
            ScalerStats s;
            s.mean = j["scaler"].at("mean").get<std::vector<double>>();
            s.std = j["scaler"].at("std").get<std::vector<double>>();
            for (int c : j["scaler"].at("constant").get<std::vector<int>>()) s.constant.push_back(c != 0);
            if (s.mean.size() != d || s.std.size() != d || s.constant.size() != d) {
                throw ValidationError("model file: scaler shape does not match feature count");
            }
            model.scaler = std::move(s);
        }
        const json& p = j.at("parameters");
        if (model.spec.standardizes()) {
            LinearModel lin;
            lin.weights = p.at("weights").get<std::vector<double>>();
            lin.intercept = p.at("intercept").get<double>();
            if (lin.weights.size() != d) throw ValidationError("model file: weight count does not match features");
            if (kind == ModelKind::lda) {
                lin.mean_human = p.at("mean_human").get<std::vector<double>>();
                lin.mean_generated = p.at("mean_generated").get<std::vector<double>>();
                lin.covariance_cholesky = p.at("covariance_cholesky").get<std::vector<double>>();
            }
            if (!model.scaler) throw ValidationError("model file: linear model without scaler");
            model.params = std::move(lin);
        } else {
            std::unordered_map<std::string, int> col;
            for (std::size_t c = 0; c < d; ++c) col.emplace(model.feature_ids[c], static_cast<int>(c));
            TreeEnsemble ens;
            ens.base_margin = p.at("base_margin").get<double>();
            for (const auto& jt : p.at("trees")) {
                Tree tree;
                for (const auto& jn : jt) {
                    TreeNode n;
                    n.cover = jn.at("cover").get<double>();
                    if (jn.contains("leaf")) {
                        n.value = jn.at("leaf").get<double>();
                    } else {
                        const auto it = col.find(jn.at("feature_id").get<std::string>());
                        if (it == col.end()) throw ValidationError("model file: tree node names unknown feature");
                        n.feature = it->second;
                        n.threshold = jn.at("threshold").get<double>();
                        n.left = jn.at("left").get<int>();
                        n.right = jn.at("right").get<int>();
                        n.gain = jn.at("gain").get<double>();
                    }
                    tree.nodes.push_back(n);
                }
                const int size = static_cast<int>(tree.nodes.size());
                if (size == 0) throw ValidationError("model file: empty tree");
                for (const auto& n : tree.nodes) {
                    if (!n.is_leaf() && (n.left <= 0 || n.left >= size || n.right <= 0 || n.right >= size)) {
                        throw ValidationError("model file: tree child index out of range");
                    }
                }
                ens.trees.push_back(std::move(tree));
            }
            model.params = std::move(ens);
        }
        const json& t = j.at("training");
        model.meta.seed = t.at("seed").get<std::uint64_t>();
        model.meta.rounds_run = t.at("rounds_run").get<int>();
        model.meta.final_loss = t.at("final_loss").get<double>();
        model.meta.final_gradient_norm = t.at("final_gradient_norm").get<double>();
        return model;
    } catch (const json::exception& e) {
        throw ValidationError(std::string("model file: ") + e.what());
    }
}

void save_model(const TrainedModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write model to " + path.string());
    out << serialize_model(model);
    if (!out) throw RuntimeFailure("failed writing model to " + path.string());
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("model file not found: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return deserialize_model(buf.str());
}

std::uint64_t model_digest(const TrainedModel& model) { return fnv1a64(serialize_model(model)); }

}  // namespace stylo
