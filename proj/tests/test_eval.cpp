#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "doctest.h"
#include "stylo/error.hpp"
#include "stylo/eval.hpp"
#include "stylo/features.hpp"
#include "stylo/rng.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

using namespace stylo;

namespace {

const Dataset& mini_matrix() {
    static const Dataset d =
        extract_matrix(fixtures::mini_corpus(), FeatureRegistry::instance().ids(), fixtures::extractor()).data;
    return d;
}

}  // namespace

TEST_CASE("F1 examples") {
    const std::vector<int> truth = {1, 1, 1, 0, 0};
    CHECK(f1_score(truth, truth) == 1.0);
    const std::vector<int> pred = {1, 1, 0, 1, 0};  // TP 2, FN 1, FP 1
    CHECK(f1_score(pred, truth) == doctest::Approx(0.6667).epsilon(1e-4));
    const auto c = confusion(pred, truth);
    CHECK(c.tp == 2);
    CHECK(c.fp == 1);
    CHECK(c.fn == 1);
    CHECK(c.tn == 1);
    const std::vector<int> none = {0, 0, 0, 0, 0};
    CHECK(f1_score(none, truth) == 0.0);
    const std::vector<int> short_truth = {1};
    CHECK_THROWS_AS(f1_score(pred, short_truth), ValidationError);
}

TEST_CASE("AUC examples") {
    const std::vector<int> y = {0, 0, 1, 1};
    CHECK(roc_auc(std::vector<double>{0.1, 0.2, 0.3, 0.4}, y) == 1.0);
    CHECK(roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, y) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(roc_auc(std::vector<double>{0.3, 0.3, 0.3, 0.3}, y) == doctest::Approx(0.5));
    CHECK_THROWS_AS(roc_auc(std::vector<double>{0.1, 0.2}, std::vector<int>{1, 1}), ValidationError);

    const auto curve = roc_curve(std::vector<double>{0.1, 0.4, 0.35, 0.8}, y);
    CHECK(curve.front().fpr == 0.0);
    CHECK(curve.front().tpr == 0.0);
    CHECK(std::isinf(curve.front().threshold));
    CHECK(curve.back().fpr == 1.0);
    CHECK(curve.back().tpr == 1.0);
}

TEST_CASE("AUC invariances") {
    Rng rng(3);
    for (int rep = 0; rep < 50; ++rep) {
        const std::size_t n = 4 + rng.below(40);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = std::round(rng.normal() * 4) / 4;
            y[i] = static_cast<int>(i % 2);
        }
        const double base = roc_auc(s, y);
        std::vector<double> e(n);
        for (std::size_t i = 0; i < n; ++i) e[i] = std::exp(s[i]);
        CHECK(roc_auc(e, y) == doctest::Approx(base).epsilon(1e-12));

        std::vector<std::size_t> perm(n);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        std::vector<double> ps(n);
        std::vector<int> py(n), pl(n), labels(n);
        for (std::size_t i = 0; i < n; ++i) labels[i] = s[i] > 0 ? 1 : 0;
        for (std::size_t i = 0; i < n; ++i) {
            ps[i] = s[perm[i]];
            py[i] = y[perm[i]];
            pl[i] = labels[perm[i]];
        }
        CHECK(roc_auc(ps, py) == doctest::Approx(base).epsilon(1e-12));
        CHECK(f1_score(pl, py) == f1_score(labels, y));
    }
}

TEST_CASE("cross-validation on separable data") {
    const auto data = synth::gaussian_pair(100, 6.0, 2);
    for (auto kind : kAllModelKinds) {
        const auto r = cross_validate(data, ModelSpec::defaults(kind), CvOptions{});
        CHECK_MESSAGE(r.mean_f1 >= 0.99, model_kind_name(kind));
        REQUIRE(r.fold_results.size() == 5);
        double f1 = 0, auc = 0;
        for (const auto& f : r.fold_results) {
            f1 += f.f1;
            auc += f.auc;
            CHECK((f.f1 >= 0 && f.f1 <= 1 && f.auc >= 0 && f.auc <= 1));
        }
        CHECK(r.mean_f1 == doctest::Approx(f1 / 5).epsilon(1e-12));
        CHECK(r.mean_auc == doctest::Approx(auc / 5).epsilon(1e-12));
        CHECK(r.scores.size() == data.rows);
        CHECK(r.standardized == ModelSpec::defaults(kind).standardizes());
    }
}

TEST_CASE("label-permuted data scores at chance") {
    for (auto kind : kAllModelKinds) {
        double total = 0;
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            auto data = synth::gaussian_pair(60, 6.0, seed);
            Rng rng(seed + 100);
            rng.shuffle(data.labels);
            CvOptions o;
            o.seed = seed;
            total += cross_validate(data, ModelSpec::defaults(kind), o).mean_auc;
        }
        const double mean = total / 10;
        CHECK_MESSAGE((mean >= 0.40 && mean <= 0.60), model_kind_name(kind), " ", mean);
    }
}

TEST_CASE("cross-validation is identical serial and parallel") {
    const auto& d = mini_matrix();
    CvOptions a, b;
    a.execution = Execution::serial;
    b.execution = Execution::parallel;
    a.selection.tag = b.selection.tag = parse_feature_set("topk:10");
    for (auto kind : kAllModelKinds) {
        CHECK(cross_validate(d, ModelSpec::defaults(kind), a).to_json() ==
              cross_validate(d, ModelSpec::defaults(kind), b).to_json());
    }
}

TEST_CASE("test-fold labels never reach training") {
    const auto& d = mini_matrix();
    const auto folds = split_stratified(d.row_ids, d.labels, 5, 42);
    CvOptions o;
    o.selection.tag = parse_feature_set("topk:10");
    for (auto kind : kAllModelKinds) {
        const auto base = cross_validate(d, ModelSpec::defaults(kind), o, folds);
        for (std::size_t f = 0; f < 5; ++f) {
            Dataset mutated = d;
            for (auto r : folds.test_rows(f)) mutated.labels[r] = 1 - mutated.labels[r];
            const auto again = cross_validate(mutated, ModelSpec::defaults(kind), o, folds);
            CHECK(again.fold_results[f].model_digest == base.fold_results[f].model_digest);
        }
    }
}

TEST_CASE("leaky selection is opt-in and recorded") {
    CvOptions o;
    o.selection.tag = parse_feature_set("topk:5");
    o.selection.leaky = true;
    const auto r = cross_validate(mini_matrix(), ModelSpec::defaults(ModelKind::gbt), o);
    CHECK(r.leaky_selection);
    CHECK(r.top_k == 5);
    CHECK(r.to_json().find("\"leaky_selection\": true") != std::string::npos);
}

TEST_CASE("cross-dataset evaluation") {
    const auto& d = mini_matrix();
    const FeatureSelection all{parse_feature_set("all"), false};
    const auto spec = ModelSpec::defaults(ModelKind::logreg);
    const auto reports = cross_dataset_eval(d, {{"self", d}}, spec, all, 42);
    REQUIRE(reports.size() == 1);
    const auto m = train(spec, d, 42);
    const auto scores = predict_scores(m, d);
    CHECK(reports[0].mean_auc == doctest::Approx(roc_auc(scores, d.labels)).epsilon(1e-12));
    CHECK(reports[0].mean_f1 == doctest::Approx(f1_score(predict_labels(spec.kind, scores), d.labels)).epsilon(1e-12));

    Dataset other = d;
    other.registry_version = "something-else/2";
    CHECK_THROWS_AS(cross_dataset_eval(d, {{"x", other}}, spec, all, 42), ValidationError);
    Dataset empty = take_rows(d, std::vector<std::size_t>{});
    CHECK_THROWS_AS(cross_dataset_eval(d, {{"x", empty}}, spec, all, 42), ValidationError);
}

TEST_CASE("cross-dataset table has F1 and AUC per test set") {
    const auto& d = mini_matrix();
    const auto he_corpus = load_corpus(fixtures::corpus_path("human_eval_sample.jsonl"), CorpusFormat::jsonl);
    const auto he = extract_matrix(he_corpus, FeatureRegistry::instance().ids(), fixtures::extractor()).data;
    std::vector<std::vector<EvalReport>> rows;
    for (auto kind : kAllModelKinds) {
        rows.push_back(cross_dataset_eval(d, {{"HE", he}, {"mini", d}}, ModelSpec::defaults(kind),
                                          FeatureSelection{parse_feature_set("all"), false}, 42));
    }
    const auto text = render_cross_dataset(rows);
    CHECK(text.find("HE F1") != std::string::npos);
    CHECK(text.find("HE AUC") != std::string::npos);
    CHECK(text.find("mini AUC") != std::string::npos);
    CHECK(text.find("XGB") != std::string::npos);
}

TEST_CASE("selection sweep shape and consistency") {
    const auto& d = mini_matrix();
    CvOptions o;
    const std::vector<std::size_t> ks = {5, 10, 15, 20, 25};
    const auto t = selection_sweep(d, kAllModelKinds, ks, o);
    CHECK(t.columns == std::vector<std::string>{"top-5", "top-10", "top-15", "top-20", "top-25"});
    REQUIRE(t.rows.size() == 5);
    for (const auto& row : t.rows) CHECK(row.cells.size() == 5);
    CHECK(t.rows[3].classifier == "XGB");

    const std::vector<std::size_t> full = {115};
    const auto one = selection_sweep(d, std::vector<ModelKind>{ModelKind::logreg}, full, o);
    const auto ref = cross_validate(d, ModelSpec::defaults(ModelKind::logreg), o);
    CHECK(one.rows[0].cells[0].mean_f1 == doctest::Approx(ref.mean_f1).epsilon(1e-12));
    CHECK(one.rows[0].cells[0].mean_auc == doctest::Approx(ref.mean_auc).epsilon(1e-12));

    const auto ab = ablation_table(d, kAllModelKinds, ks, o);
    CHECK(ab.columns ==
          std::vector<std::string>{"SF", "LF", "all", "top-5", "top-10", "top-15", "top-20", "top-25"});
    CHECK(ab.to_csv().find("classifier") == 0);
    CHECK(ab.to_text().find("LDA") != std::string::npos);
}

TEST_CASE("report serializations") {
    const auto r = cross_validate(mini_matrix(), ModelSpec::defaults(ModelKind::linear_svc), CvOptions{});
    const auto json = r.to_json();
    CHECK(json.find("\"positive_class\": \"generated\"") != std::string::npos);
    CHECK(json.find("\"provider\"") != std::string::npos);
    CHECK(r.roc_csv().rfind("classifier,fpr,tpr,threshold\n", 0) == 0);
    CHECK(r.to_text().find("fold  F1") != std::string::npos);
}
