#include "stylo/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <optional>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/rng.hpp"

namespace stylo {

using nlohmann::json;

Confusion confusion(std::span<const int> predicted, std::span<const int> truth) {
    if (predicted.size() != truth.size()) {
        throw ValidationError("confusion: " + std::to_string(predicted.size()) + " predictions for " +
                              std::to_string(truth.size()) + " labels");
    }
    Confusion c;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1) {
            (predicted[i] == 1 ? c.tp : c.fn) += 1;
        } else {
            (predicted[i] == 1 ? c.fp : c.tn) += 1;
        }
    }
    return c;
}

double f1_score(std::span<const int> predicted, std::span<const int> truth) {
    if (truth.empty()) throw ValidationError("f1: empty input");
    const Confusion c = confusion(predicted, truth);
    const double den = static_cast<double>(2 * c.tp + c.fp + c.fn);
    return den > 0.0 ? 2.0 * static_cast<double>(c.tp) / den : 0.0;
}

std::vector<RocPoint> roc_curve(std::span<const double> scores, std::span<const int> truth) {
    if (scores.size() != truth.size()) throw ValidationError("roc: scores and labels differ in length");
    std::size_t pos = 0;
    for (int y : truth) pos += y == 1 ? 1 : 0;
    const std::size_t neg = truth.size() - pos;
    if (pos == 0 || neg == 0) throw ValidationError("roc: both classes must be present");
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
    std::vector<RocPoint> curve{{0.0, 0.0, std::numeric_limits<double>::infinity()}};
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < order.size();) {
        const double s = scores[order[i]];
        while (i < order.size() && scores[order[i]] == s) {
            (truth[order[i]] == 1 ? tp : fp) += 1;
            ++i;
        }
        curve.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                         static_cast<double>(tp) / static_cast<double>(pos), s});
    }
    return curve;
}

double roc_auc(std::span<const double> scores, std::span<const int> truth) {
    const auto curve = roc_curve(scores, truth);
    double area = 0.0;
    for (std::size_t i = 1; i < curve.size(); ++i) {
        area += (curve[i].fpr - curve[i - 1].fpr) * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
    }
    return area;
}

// ---- feature choice ----------------------------------------------------------

namespace {

std::vector<std::string> base_columns(const Dataset& data, const FeatureSetTag& tag) {
    using Kind = FeatureSetTag::Kind;
    if (tag.kind == Kind::all || tag.kind == Kind::topk) return data.feature_ids;
    auto ids = tag.base_ids();
    for (const auto& id : ids) {
        if (std::find(data.feature_ids.begin(), data.feature_ids.end(), id) == data.feature_ids.end()) {
            throw ValidationError("feature set " + tag.name() + " needs column '" + id + "'");
        }
    }
    return ids;
}

// Gain ranking from a default GBT on the given columns; empty when the
// booster found no useful split.
ImportanceRanking gain_ranking(const Dataset& train, std::span<const std::string> columns, std::uint64_t seed,
                               Execution execution) {
    const Dataset sub = select_features(train, columns);
    const TrainedModel ranker = stylo::train(ModelSpec::defaults(ModelKind::gbt), sub, seed, execution);
    try {
        return feature_importance(ranker);
    } catch (const ValidationError&) {
        return {};
    }
}

std::vector<std::string> apply_top_k(const std::vector<std::string>& base, std::size_t k,
                                     const std::optional<ImportanceRanking>& ranking) {
    if (k == 0 || k >= base.size()) return base;
    return top_k_ids(*ranking, k, base);
}

struct FoldRun {
    FoldResult result;
    std::vector<std::size_t> test_rows;
    std::vector<double> scores;
};

FoldRun run_fold(const Dataset& data, const ModelSpec& spec, std::size_t fold, const std::vector<std::size_t>& train_rows,
                 const std::vector<std::size_t>& test_rows, const std::vector<std::string>& features, std::uint64_t seed,
                 Execution execution) {
    const Dataset train_split = select_features(take_rows(data, train_rows), features);
    const Dataset test_split = select_features(take_rows(data, test_rows), features);
    TrainedModel model;
    try {
        model = stylo::train(spec, train_split, seed, execution);
    } catch (const Error& e) {
        throw Error(e.kind(), "fold " + std::to_string(fold) + ": " + e.what());
    }
    FoldRun run;
    run.test_rows = test_rows;
    run.scores = predict_scores(model, test_split);
    const auto predicted = predict_labels(spec.kind, run.scores);
    run.result.fold = fold;
    run.result.f1 = f1_score(predicted, test_split.labels);
    run.result.auc = roc_auc(run.scores, test_split.labels);
    run.result.confusion = confusion(predicted, test_split.labels);
    run.result.model_digest = model_digest(model);
    run.result.features = features;
    return run;
}

std::vector<std::string> ensure_row_ids(const Dataset& data) {
    if (data.row_ids.size() == data.rows) return data.row_ids;
    std::vector<std::string> ids;
    for (std::size_t r = 0; r < data.rows; ++r) ids.push_back("r" + std::to_string(r));
    return ids;
}

EvalReport assemble(const Dataset& data, const ModelSpec& spec, const CvOptions& options, std::vector<FoldRun> runs) {
    EvalReport report;
    report.experiment = "cv";
    report.classifier = std::string(model_kind_name(spec.kind));
    report.feature_set = options.selection.tag.name();
    report.top_k = options.selection.tag.kind == FeatureSetTag::Kind::topk ? options.selection.tag.k : 0;
    report.leaky_selection = options.selection.leaky && report.top_k > 0;
    report.standardized = spec.standardizes();
    report.folds = runs.size();
    report.seed = options.seed;
    report.registry_version = data.registry_version;
    report.scores.assign(data.rows, 0.0);
    report.truth = data.labels;
    report.row_ids = ensure_row_ids(data);
    for (auto& run : runs) {
        for (std::size_t i = 0; i < run.test_rows.size(); ++i) report.scores[run.test_rows[i]] = run.scores[i];
        report.mean_f1 += run.result.f1;
        report.mean_auc += run.result.auc;
        report.fold_results.push_back(std::move(run.result));
    }
    report.mean_f1 /= static_cast<double>(runs.size());
    report.mean_auc /= static_cast<double>(runs.size());
    return report;
}

}  // namespace

std::vector<std::string> choose_features(const Dataset& train, const FeatureSetTag& tag, std::uint64_t seed,
                                         Execution execution) {
    const auto base = base_columns(train, tag);
    if (tag.kind != FeatureSetTag::Kind::topk || tag.k >= base.size()) return base;
    return apply_top_k(base, tag.k, gain_ranking(train, base, seed, execution));
}

EvalReport cross_validate(const Dataset& data, const ModelSpec& spec, const CvOptions& options) {
    data.validate(true);
    const FoldAssignment folds = split_stratified(ensure_row_ids(data), data.labels, options.folds, options.seed);
    return cross_validate(data, spec, options, folds);
}

EvalReport cross_validate(const Dataset& data, const ModelSpec& spec, const CvOptions& options,
                          const FoldAssignment& folds) {
    data.validate(true);
    spec.validate();
    if (folds.ids.size() != data.rows) throw ValidationError("cross-validation: fold assignment does not match rows");
    const std::size_t k = folds.k;
    std::optional<std::vector<std::string>> global;
    if (options.selection.leaky) global = choose_features(data, options.selection.tag, options.seed, options.execution);

    std::vector<FoldRun> runs(k);
    std::vector<std::string> errors(k);
    std::vector<int> kinds(k, 0);
    const bool parallel = options.execution == Execution::parallel;
    const Execution inner = parallel ? Execution::serial : options.execution;
    const long long nk = static_cast<long long>(k);
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long fi = 0; fi < nk; ++fi) {
        const auto f = static_cast<std::size_t>(fi);
        try {
            const auto train_rows = folds.train_rows(f);
            const auto test_rows = folds.test_rows(f);
            const std::uint64_t fold_seed = derive_seed(options.seed, f);
            std::vector<std::string> features;
            if (global) {
                features = *global;
            } else {
                features = choose_features(take_rows(data, train_rows), options.selection.tag, fold_seed, inner);
            }
            runs[f] = run_fold(data, spec, f, train_rows, test_rows, features, fold_seed, inner);
        } catch (const Error& e) {
            errors[f] = e.what();
            kinds[f] = static_cast<int>(e.kind());
        } catch (const std::exception& e) {
            errors[f] = e.what();
            kinds[f] = static_cast<int>(ErrorKind::runtime);
        }
    }
    for (std::size_t f = 0; f < k; ++f) {
        if (!errors[f].empty()) throw Error(static_cast<ErrorKind>(kinds[f]), errors[f]);
    }
    return assemble(data, spec, options, std::move(runs));
}

std::vector<EvalReport> cross_dataset_eval(const Dataset& train, const std::vector<std::pair<std::string, Dataset>>& tests,
                                           const ModelSpec& spec, const FeatureSelection& selection,
                                           std::uint64_t seed, Execution execution) {
    train.validate(true);
    if (tests.empty()) throw ValidationError("cross-dataset: no test sets given");
    for (const auto& [name, test] : tests) {
        if (test.rows == 0) throw ValidationError("cross-dataset: test set '" + name + "' is empty");
        if (test.registry_version != train.registry_version) {
            throw ValidationError("cross-dataset: registry version of '" + name + "' (" + test.registry_version +
                                  ") differs from the training data (" + train.registry_version + ")");
        }
    }
    const auto features = choose_features(train, selection.tag, seed, execution);
    const TrainedModel model = stylo::train(spec, select_features(train, features), seed, execution);
    const auto digest = model_digest(model);
    std::vector<EvalReport> out;
    for (const auto& [name, test] : tests) {
        EvalReport r;
        r.experiment = "cross-dataset";
        r.classifier = std::string(model_kind_name(spec.kind));
        r.feature_set = selection.tag.name();
        r.top_k = selection.tag.kind == FeatureSetTag::Kind::topk ? selection.tag.k : 0;
        r.standardized = spec.standardizes();
        r.seed = seed;
        r.registry_version = train.registry_version;
        r.dataset = name;
        r.scores = predict_scores(model, test);
        r.truth = test.labels;
        r.row_ids = ensure_row_ids(test);
        const auto predicted = predict_labels(spec.kind, r.scores);
        FoldResult fr;
        fr.f1 = f1_score(predicted, test.labels);
        fr.auc = roc_auc(r.scores, test.labels);
        fr.confusion = confusion(predicted, test.labels);
        fr.model_digest = digest;
        fr.features = features;
        r.mean_f1 = fr.f1;
        r.mean_auc = fr.auc;
        r.fold_results.push_back(std::move(fr));
        out.push_back(std::move(r));
    }
    return out;
}

// ---- sweeps ----------------------------------------------------------------

SweepTable selection_sweep(const Dataset& data, std::span<const ModelKind> classifiers, std::span<const std::size_t> ks,
                           const CvOptions& options) {
    data.validate(true);
    if (ks.empty()) throw ValidationError("selection sweep: no k values");
    for (std::size_t k : ks) {
        if (k == 0 || k > data.cols) {
            throw ValidationError("selection sweep: k=" + std::to_string(k) + " outside [1, " +
                                  std::to_string(data.cols) + "]");
        }
    }
    const FoldAssignment folds = split_stratified(ensure_row_ids(data), data.labels, options.folds, options.seed);
    const std::size_t nf = folds.k;
    const bool need_ranking = std::any_of(ks.begin(), ks.end(), [&](std::size_t k) { return k < data.cols; });

    // One ranking per fold (or one global ranking for the leaky variant).
    std::vector<std::optional<ImportanceRanking>> rankings(nf);
    if (need_ranking) {
        if (options.selection.leaky) {
            const auto r = gain_ranking(data, data.feature_ids, options.seed, options.execution);
            for (auto& slot : rankings) slot = r;
        } else {
            for (std::size_t f = 0; f < nf; ++f) {
                rankings[f] = gain_ranking(take_rows(data, folds.train_rows(f)), data.feature_ids,
                                           derive_seed(options.seed, f), options.execution);
            }
        }
    }

    SweepTable table;
    for (std::size_t k : ks) table.columns.push_back("top-" + std::to_string(k));
    for (ModelKind kind : classifiers) {
        const ModelSpec spec = ModelSpec::defaults(kind);
        SweepRow row;
        row.classifier = std::string(model_display_name(kind));
        for (std::size_t k : ks) {
            std::vector<FoldRun> runs;
            for (std::size_t f = 0; f < nf; ++f) {
                const auto features = apply_top_k(data.feature_ids, k, rankings[f]);
                runs.push_back(run_fold(data, spec, f, folds.train_rows(f), folds.test_rows(f), features,
                                        derive_seed(options.seed, f), options.execution));
            }
            CvOptions cell = options;
            cell.selection.tag.kind = k < data.cols ? FeatureSetTag::Kind::topk : FeatureSetTag::Kind::all;
            cell.selection.tag.k = k < data.cols ? k : 0;
            EvalReport report = assemble(data, spec, cell, std::move(runs));
            report.experiment = "selection-sweep";
            row.cells.push_back(std::move(report));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

SweepTable ablation_table(const Dataset& data, std::span<const ModelKind> classifiers, std::span<const std::size_t> ks,
                          const CvOptions& options) {
    SweepTable table = selection_sweep(data, classifiers, ks, options);
    const std::vector<std::pair<std::string, FeatureSetTag::Kind>> families = {
        {"SF", FeatureSetTag::Kind::sf}, {"LF", FeatureSetTag::Kind::lf}, {"all", FeatureSetTag::Kind::all}};
    for (std::size_t i = 0; i < classifiers.size(); ++i) {
        std::vector<EvalReport> lead;
        for (const auto& [name, kind] : families) {
            CvOptions o = options;
            o.selection.tag = FeatureSetTag{kind, 0};
            o.selection.leaky = false;
            EvalReport report = cross_validate(data, ModelSpec::defaults(classifiers[i]), o);
            report.experiment = "ablation";
            lead.push_back(std::move(report));
        }
        auto& cells = table.rows[i].cells;
        cells.insert(cells.begin(), std::make_move_iterator(lead.begin()), std::make_move_iterator(lead.end()));
    }
    table.columns.insert(table.columns.begin(), {"SF", "LF", "all"});
    return table;
}

// ---- rendering ---------------------------------------------------------------

namespace {

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string hex64(std::uint64_t v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

std::string EvalReport::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["classifier"] = classifier;
    j["feature_set"] = feature_set;
    j["top_k"] = top_k;
    j["leaky_selection"] = leaky_selection;
    j["standardized"] = standardized;
    j["folds"] = folds;
    j["seed"] = seed;
    j["provider"] = provider;
    j["registry_version"] = registry_version;
    j["positive_class"] = "generated";
    if (!dataset.empty()) j["dataset"] = dataset;
    json fr = json::array();
    for (const auto& f : fold_results) {
        fr.push_back({{"fold", f.fold},
                      {"f1", f.f1},
                      {"auc", f.auc},
                      {"confusion", {{"tp", f.confusion.tp}, {"fp", f.confusion.fp}, {"tn", f.confusion.tn},
                                     {"fn", f.confusion.fn}}},
                      {"model_digest", hex64(f.model_digest)},
                      {"feature_count", f.features.size()}});
    }
    j["fold_results"] = fr;
    j["mean_f1"] = mean_f1;
    j["mean_auc"] = mean_auc;
    return j.dump(2) + "\n";
}

std::string EvalReport::to_text() const {
    std::string out;
    out += "experiment: " + experiment + (dataset.empty() ? "" : " (" + dataset + ")") + "\n";
    out += "classifier: " + classifier + "   features: " + feature_set + (leaky_selection ? " (global ranking)" : "") +
           "   standardized: " + (standardized ? "yes" : "no") + "\n";
    out += "seed: " + std::to_string(seed) + "   provider: " + (provider.empty() ? "-" : provider) + "\n";
    out += "positive class = generated\n\n";
    out += "fold  F1      AUC     TP    FP    TN    FN\n";
    for (const auto& f : fold_results) {
        out += pad(std::to_string(f.fold), 6) + pad(fixed(f.f1), 8) + pad(fixed(f.auc), 8) +
               pad(std::to_string(f.confusion.tp), 6) + pad(std::to_string(f.confusion.fp), 6) +
               pad(std::to_string(f.confusion.tn), 6) + std::to_string(f.confusion.fn) + "\n";
    }
    out += "mean  " + pad(fixed(mean_f1), 8) + fixed(mean_auc) + "\n";
    return out;
}

std::string EvalReport::roc_csv() const {
    std::string out = "classifier,fpr,tpr,threshold\n";
    char buf[128];
    for (const auto& p : roc_curve(scores, truth)) {
        std::snprintf(buf, sizeof buf, "%s,%.9g,%.9g,%.9g\n", classifier.c_str(), p.fpr, p.tpr, p.threshold);
        out += buf;
    }
    return out;
}

std::string SweepTable::to_text(bool auc) const {
    std::string out = pad("classifier", 12);
    for (const auto& c : columns) out += pad(c, 10);
    out += "\n";
    for (const auto& row : rows) {
        out += pad(row.classifier, 12);
        for (const auto& cell : row.cells) out += pad(fixed(auc ? cell.mean_auc : cell.mean_f1), 10);
        out += "\n";
    }
    return out;
}

std::string SweepTable::to_csv() const {
    std::string out = "classifier,column,mean_f1,mean_auc\n";
    char buf[64];
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            std::snprintf(buf, sizeof buf, ",%.9g,%.9g\n", row.cells[i].mean_f1, row.cells[i].mean_auc);
            out += row.classifier + "," + columns[i] + buf;
        }
    }
    return out;
}

std::string SweepTable::to_json() const {
    json j;
    j["columns"] = columns;
    j["positive_class"] = "generated";
    json rj = json::array();
    for (const auto& row : rows) {
        json cells = json::array();
        for (std::size_t i = 0; i < row.cells.size(); ++i) {
            json folds = json::array();
            for (const auto& f : row.cells[i].fold_results) folds.push_back({{"f1", f.f1}, {"auc", f.auc}});
            cells.push_back({{"column", columns[i]},
                             {"mean_f1", row.cells[i].mean_f1},
                             {"mean_auc", row.cells[i].mean_auc},
                             {"folds", folds}});
        }
        rj.push_back({{"classifier", row.classifier}, {"cells", cells}});
    }
    j["rows"] = rj;
    return j.dump(2) + "\n";
}

std::string render_cross_dataset(const std::vector<std::vector<EvalReport>>& per_classifier) {
    if (per_classifier.empty() || per_classifier.front().empty()) return {};
    std::string out = pad("classifier", 12);
    for (const auto& r : per_classifier.front()) out += pad(r.dataset + " F1", 14) + pad(r.dataset + " AUC", 14);
    out += "\n";
    for (const auto& reports : per_classifier) {
        out += pad(std::string(model_display_name(parse_model_kind(reports.front().classifier))), 12);
        for (const auto& r : reports) out += pad(fixed(r.mean_f1), 14) + pad(fixed(r.mean_auc), 14);
        out += "\n";
    }
    return out;
}

}  // namespace stylo
