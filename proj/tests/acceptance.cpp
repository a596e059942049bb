// Acceptance run: one PASS/FAIL/SKIP line per criterion. Exit status is
// non-zero when any criterion fails.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "stylo/corpus.hpp"
#include "stylo/eval.hpp"
#include "stylo/features.hpp"
#include "stylo/model.hpp"
#include "stylo/rng.hpp"
#include "support/fixtures.hpp"
#include "support/synthetic.hpp"

namespace fs = std::filesystem;
using namespace stylo;

namespace {

enum class Verdict { pass, fail, skip };

struct Outcome {
    Verdict verdict = Verdict::fail;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

char buf[512];

// ---- 1 ---------------------------------------------------------------------

double concordance(const std::vector<double>& s, const std::vector<int>& y) {
    double num = 0, pairs = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (y[i] != 1) continue;
        for (std::size_t j = 0; j < s.size(); ++j) {
            if (y[j] != 0) continue;
            pairs += 1;
            num += s[i] > s[j] ? 1.0 : s[i] == s[j] ? 0.5 : 0.0;
        }
    }
    return num / pairs;
}

Outcome auc_oracle() {
    const auto t0 = Clock::now();
    Rng rng(2024);
    double worst = 0;
    for (int inst = 0; inst < 200; ++inst) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<double> s(n);
        std::vector<int> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = static_cast<int>(rng.below(2));
            // every third instance draws from a coarse grid to force ties
            s[i] = inst % 3 == 0 ? static_cast<double>(rng.below(5)) : rng.normal();
        }
        y[0] = 0;
        y[1] = 1;
        worst = std::max(worst, std::abs(roc_auc(s, y) - concordance(s, y)));
    }
    const double secs = seconds_since(t0);
    std::snprintf(buf, sizeof buf, "max |trapezoid - concordance| = %.3g (tol 1e-9), %.2f s (limit 5 s)", worst, secs);
    return {worst <= 1e-9 && secs < 5.0 ? Verdict::pass : Verdict::fail, buf};
}

// ---- 2 ---------------------------------------------------------------------

Outcome metric_spots() {
    const double auc = roc_auc(std::vector<double>{0.1, 0.4, 0.35, 0.8}, std::vector<int>{0, 0, 1, 1});
    const std::vector<int> truth = {1, 1, 1, 0, 0}, pred = {1, 1, 0, 1, 0};
    const double f1 = f1_score(pred, truth);
    std::snprintf(buf, sizeof buf, "AUC %.12f (want 0.75, tol 1e-12); F1 %.6f (want 0.6667, tol 1e-4)", auc, f1);
    const bool ok = std::abs(auc - 0.75) <= 1e-12 && std::abs(f1 - 0.6667) <= 1e-4;
    return {ok ? Verdict::pass : Verdict::fail, buf};
}

// ---- 3 ---------------------------------------------------------------------

Outcome classifier_sanity() {
    const auto t0 = Clock::now();
    const auto gauss = synth::gaussian_pair(500, 6.0, 1);
    const auto xr = synth::xor_blobs(250, 1);
    CvOptions opts;
    bool ok = true;
    std::string detail = "gauss F1:";
    for (auto kind : kAllModelKinds) {
        const double f1 = cross_validate(gauss, ModelSpec::defaults(kind), opts).mean_f1;
        ok = ok && f1 >= 0.99;
        std::snprintf(buf, sizeof buf, " %s=%.4f", std::string(model_display_name(kind)).c_str(), f1);
        detail += buf;
    }
    detail += "; xor F1:";
    for (auto kind : {ModelKind::gbt, ModelKind::extra_trees, ModelKind::lda, ModelKind::logreg}) {
        const double f1 = cross_validate(xr, ModelSpec::defaults(kind), opts).mean_f1;
        const bool nonlinear = kind == ModelKind::gbt || kind == ModelKind::extra_trees;
        ok = ok && (nonlinear ? f1 >= 0.95 : f1 <= 0.60);
        std::snprintf(buf, sizeof buf, " %s=%.4f", std::string(model_display_name(kind)).c_str(), f1);
        detail += buf;
    }
    const double secs = seconds_since(t0);
    std::snprintf(buf, sizeof buf, " (gauss >= 0.99; xor trees >= 0.95, linear <= 0.60); %.1f s (limit 60 s)", secs);
    detail += buf;
    return {ok && secs < 60.0 ? Verdict::pass : Verdict::fail, detail};
}

// ---- 4 ---------------------------------------------------------------------

struct Best {
    int feature = -1;
    double threshold = 0;
    double gain = 0;
};

// Enumerates every (feature, midpoint) split from scratch.
Best exhaustive_split(const Dataset& d, const std::vector<double>& g, const std::vector<double>& h,
                      double lambda, double min_child) {
    double G = 0, H = 0;
    for (std::size_t r = 0; r < d.rows; ++r) {
        G += g[r];
        H += h[r];
    }
    Best best;
    for (std::size_t f = 0; f < d.cols; ++f) {
        std::vector<double> vals;
        for (std::size_t r = 0; r < d.rows; ++r) vals.push_back(d.at(r, f));
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
            const double t = vals[i] + (vals[i + 1] - vals[i]) / 2;
            double gl = 0, hl = 0;
            for (std::size_t r = 0; r < d.rows; ++r) {
                if (d.at(r, f) < t) {
                    gl += g[r];
                    hl += h[r];
                }
            }
            const double gr = G - gl, hr = H - hl;
            if (hl < min_child || hr < min_child) continue;
            const double gain = gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - G * G / (H + lambda);
            if (gain > best.gain) best = {static_cast<int>(f), t, gain};
        }
    }
    return best;
}

Outcome split_oracle() {
    Rng rng(77);
    int matched = 0;
    std::string first_miss;
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 8 + rng.below(57), d = 1 + rng.below(8);
        std::vector<double> v(n * d);
        std::vector<int> y(n);
        for (auto& x : v) x = static_cast<double>(rng.below(12));  // integer grid: ties and exact midpoints
        for (std::size_t i = 0; i < n; ++i) y[i] = static_cast<int>(rng.below(2));
        y[0] = 0;
        y[1] = 1;
        const auto data = make_dataset(n, d, v, y);
        // base margin 0: p = 0.5, g = p - y, h = p(1 - p)
        std::vector<double> g(n), h(n, 0.25);
        for (std::size_t i = 0; i < n; ++i) g[i] = 0.5 - y[i];
        GbtParams params;
        params.rounds = 1;
        params.max_depth = 1;
        const auto model = train_gbt(data, params, Execution::parallel, nullptr);
        const auto& root = model.trees.at(0).nodes.at(0);
        const Best want = exhaustive_split(data, g, h, params.lambda, params.min_child_weight);
        const bool same = want.feature < 0 ? root.is_leaf()
                                           : (root.feature == want.feature && root.threshold == want.threshold &&
                                              root.gain == want.gain);
        if (same) {
            ++matched;
        } else if (first_miss.empty()) {
            std::snprintf(buf, sizeof buf, "; first miss rep %d: got f%d@%g gain %.17g, want f%d@%g gain %.17g", rep,
                          root.feature, root.threshold, root.gain, want.feature, want.threshold, want.gain);
            first_miss = buf;
        }
    }
    std::snprintf(buf, sizeof buf, "%d/20 datasets match exactly (feature, threshold, gain)", matched);
    return {matched == 20 ? Verdict::pass : Verdict::fail, buf + first_miss};
}

// ---- 5 ---------------------------------------------------------------------

Outcome importance_recovery() {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto data = synth::injected_signal(200, 20, 0.8, seed);
        const auto r = feature_importance(train(ModelSpec::defaults(ModelKind::gbt), data, seed));
        for (std::size_t i = 0; i < std::min<std::size_t>(3, r.size()); ++i) hits += r.entries[i].first == "signal";
    }
    std::snprintf(buf, sizeof buf, "injected column in gain top-3 for %d/10 seeds (need >= 9; noise sd 0.8)", hits);
    return {hits >= 9 ? Verdict::pass : Verdict::fail, buf};
}

// ---- 6 ---------------------------------------------------------------------

Outcome registry_contract() {
    const auto& reg = FeatureRegistry::instance();
    const auto ids = reg.ids();
    const auto a = extract_matrix(fixtures::mini_corpus(), ids, fixtures::extractor());
    const auto b = extract_matrix(fixtures::mini_corpus(), ids, fixtures::extractor());
    bool finite = true;
    for (double v : a.data.values) finite = finite && std::isfinite(v);
    bool ordered = true;
    for (std::size_t i = 0; i < a.data.cols; ++i) {
        const auto want = i < 10 ? FeatureFamily::sf : i < 112 ? FeatureFamily::lf : FeatureFamily::hbh;
        ordered = ordered && reg.find(a.data.feature_ids[i])->family == want;
    }
    const bool identical = feature_csv(a.data) == feature_csv(b.data);
    const bool ok = a.data.rows == 40 && a.data.cols == 115 && finite && ordered && identical &&
                    reg.ids(FeatureFamily::sf).size() == 10 && reg.ids(FeatureFamily::lf).size() == 102 &&
                    reg.ids(FeatureFamily::hbh).size() == 3;
    std::snprintf(buf, sizeof buf, "%zux%zu, finite=%d, families 10/102/3 in order=%d, byte-identical=%d",
                  a.data.rows, a.data.cols, finite, ordered, identical);
    return {ok ? Verdict::pass : Verdict::fail, buf};
}

// ---- 7 ---------------------------------------------------------------------

Outcome sweep_structure() {
    const auto corpus = synth::cheat_like(150, 7);
    const auto m = extract_matrix(corpus, FeatureRegistry::instance().ids(), fixtures::extractor());
    const std::vector<std::size_t> ks = {5, 10, 15, 20, 25};
    const auto table = ablation_table(m.data, kAllModelKinds, ks, CvOptions{});
    const std::vector<std::string> cols = {"SF", "LF", "all", "top-5", "top-10", "top-15", "top-20", "top-25"};
    bool shape = table.columns == cols && table.rows.size() == 5;
    for (const auto& row : table.rows) shape = shape && row.cells.size() == cols.size();
    bool trend = shape;
    std::string detail = "F1 top-5 -> top-25:";
    if (shape) {
        for (const auto& row : table.rows) {
            const double f5 = row.cells[3].mean_f1, f25 = row.cells[7].mean_f1;
            trend = trend && f25 >= f5;
            std::snprintf(buf, sizeof buf, " %s %.4f->%.4f", row.classifier.c_str(), f5, f25);
            detail += buf;
        }
    }
    std::snprintf(buf, sizeof buf, "; shape 5x8=%d; trend F1(top-25) >= F1(top-5), tol 0", shape);
    return {shape && trend ? Verdict::pass : Verdict::fail, detail + buf};
}

// ---- 8 ---------------------------------------------------------------------

Outcome cheat_direction() {
    const char* path = std::getenv("STYLO_CHEAT_CORPUS");
    if (path == nullptr || *path == '\0') {
        return {Verdict::skip, "set STYLO_CHEAT_CORPUS to the public CHEAT corpus (jsonl or csv) to run"};
    }
    const auto t0 = Clock::now();
    const fs::path p(path);
    const auto format = p.extension() == ".csv" ? CorpusFormat::csv : CorpusFormat::jsonl;
    const auto corpus = load_corpus(p, format);
    const auto m = extract_matrix(corpus, FeatureRegistry::instance().ids(), fixtures::extractor());
    bool ok = true;
    std::string detail;
    for (auto kind : {ModelKind::linear_svc, ModelKind::gbt}) {
        const auto r = cross_validate(m.data, ModelSpec::defaults(kind), CvOptions{});
        ok = ok && r.mean_f1 >= 0.85 && r.mean_auc >= 0.90;
        std::snprintf(buf, sizeof buf, "%s F1 %.4f AUC %.4f; ", std::string(model_display_name(kind)).c_str(),
                      r.mean_f1, r.mean_auc);
        detail += buf;
    }
    const double secs = seconds_since(t0);
    std::snprintf(buf, sizeof buf, "need F1 >= 0.85, AUC >= 0.90; %.0f s (limit 1800 s)", secs);
    return {ok && secs < 1800 ? Verdict::pass : Verdict::fail, detail + buf};
}

// ---- 9 ---------------------------------------------------------------------

Outcome leakage_guard() {
    const auto m = extract_matrix(fixtures::mini_corpus(), FeatureRegistry::instance().ids(), fixtures::extractor());
    const auto& d = m.data;
    const auto folds = split_stratified(d.row_ids, d.labels, 5, 42);
    CvOptions o;
    o.selection.tag = parse_feature_set("topk:10");
    int same = 0, total = 0;
    for (auto kind : kAllModelKinds) {
        const auto base = cross_validate(d, ModelSpec::defaults(kind), o, folds);
        for (std::size_t f = 0; f < 5; ++f) {
            Dataset mutated = d;
            for (auto r : folds.test_rows(f)) mutated.labels[r] = 1 - mutated.labels[r];
            const auto again = cross_validate(mutated, ModelSpec::defaults(kind), o, folds);
            same += again.fold_results[f].model_digest == base.fold_results[f].model_digest;
            ++total;
        }
    }
    std::snprintf(buf, sizeof buf, "%d/%d (classifier, fold) model hashes unchanged after flipping test labels",
                  same, total);
    return {same == total ? Verdict::pass : Verdict::fail, buf};
}

// ---- 10 --------------------------------------------------------------------

int run(const std::string& args, const fs::path& log) {
    const std::string cmd = std::string(STYLO_CLI_PATH) + " " + args + " >>" + log.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome cli_determinism() {
    const auto root = fixtures::scratch_dir("acceptance_cli");
    const std::string corpus = fixtures::corpus_path("mini_corpus.jsonl").string();
    std::vector<std::string> stages = {"ingest", "extract", "train", "eval", "report"};
    int bad_exit = 0;
    for (const char* run_name : {"a", "b"}) {
        const fs::path dir = root / run_name;
        fs::create_directories(dir);
        for (const auto& stage : stages) {
            // outputs live in the same relative place for both runs
            const std::string args = stage + " --corpus " + corpus + " --seed 42 --out " + dir.string();
            const int code = run(args, dir / ("log_" + stage + ".txt"));
            bad_exit += code != 0;
        }
    }
    std::size_t files = 0, differing = 0;
    for (const auto& entry : fs::directory_iterator(root / "a")) {
        const auto name = entry.path().filename();
        if (name.string().rfind("log_", 0) == 0) continue;  // logs echo the output directory
        ++files;
        differing += fixtures::read_file(entry.path()) != fixtures::read_file(root / "b" / name);
    }
    std::snprintf(buf, sizeof buf, "ingest->extract->train->eval->report twice: %zu files, %zu differ, %d non-zero exits",
                  files, differing, bad_exit);
    return {bad_exit == 0 && differing == 0 && files > 0 ? Verdict::pass : Verdict::fail, buf};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"AUC oracle equivalence", auc_oracle},
        {"metric spot values", metric_spots},
        {"classifier sanity", classifier_sanity},
        {"GBT split oracle", split_oracle},
        {"importance recovery", importance_recovery},
        {"registry contract", registry_contract},
        {"selection sweep structure", sweep_structure},
        {"directional CHEAT check", cheat_direction},
        {"leakage guard", leakage_guard},
        {"end-to-end determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {Verdict::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.verdict == Verdict::pass ? "PASS" : o.verdict == Verdict::skip ? "SKIP" : "FAIL";
        failures += o.verdict == Verdict::fail;
        std::printf("[%s] %2zu %s: %s\n", tag, i + 1, criteria[i].first, o.detail.c_str());
        std::fflush(stdout);
    }
    return failures == 0 ? 0 : 1;
}
