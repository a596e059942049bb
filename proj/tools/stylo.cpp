// stylo: command-line driver for the stylometric detection pipeline.
//
// Exit codes: 0 success, 2 invalid input, 3 missing artifact, 4 runtime or
// provider failure. Errors go to stderr as "stylo: error[<code>]: <message>".

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <omp.h>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "stylo/corpus.hpp"
#include "stylo/embeddings.hpp"
#include "stylo/error.hpp"
#include "stylo/eval.hpp"
#include "stylo/features.hpp"
#include "stylo/lexicons.hpp"
#include "stylo/model.hpp"
#include "stylo/plot.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stylo;

namespace {

struct TestSet {
    std::string name;
    fs::path path;
};

struct RunConfig {
    fs::path corpus;
    std::vector<TestSet> tests;
    std::string format = "jsonl";
    fs::path lexicons;
    std::string embedding = "builtin";
    std::uint64_t seed = 42;
    std::size_t folds = 5;
    std::vector<std::string> classifiers = {"lda", "logreg", "svc", "gbt", "etc"};
    std::string features = "all";
    std::vector<std::size_t> top_k = {5, 10, 15, 20, 25};
    fs::path out = "out";
    int jobs = 0;
    bool leaky_selection = false;
    fs::path matrix;  // defaults to <out>/features.csv
    fs::path model;   // predict: defaults to <out>/model_<classifier>.json
    std::vector<std::string> report_features = {"hedge_density", "booster_density", "hype_density",
                                                "sf_entity_distinct", "sf_adj_cos_mean"};

    void validate() const {
        if (folds < 2) throw ValidationError("config: folds must be at least 2");
        for (std::size_t k : top_k) {
            if (k < 1 || k > kFeatureCount) throw ValidationError("config: top-k values must lie in [1, 115]");
        }
        if (classifiers.empty()) throw ValidationError("config: no classifier selected");
        for (const auto& c : classifiers) parse_model_kind(c);
        parse_feature_set(features);
        parse_provider(embedding).validate();
        parse_corpus_format(format);
        if (jobs < 0) throw ValidationError("config: jobs must be non-negative");
    }

    fs::path matrix_path() const { return matrix.empty() ? out / "features.csv" : matrix; }
};

template <typename T>
void read_key(const json& j, const char* key, T& target) {
    if (!j.contains(key)) return;
    try {
        target = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config key '") + key + "': " + e.what());
    }
}

RunConfig load_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("config file not found: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError("config " + path.string() + ": parse error at byte " + std::to_string(e.byte));
    }
    if (!j.is_object()) throw ValidationError("config " + path.string() + ": expected a JSON object");
    RunConfig c;
    std::string s;
    if (j.contains("corpus")) { read_key(j, "corpus", s); c.corpus = s; }
    if (j.contains("lexicons")) { read_key(j, "lexicons", s); c.lexicons = s; }
    if (j.contains("out")) { read_key(j, "out", s); c.out = s; }
    if (j.contains("matrix")) { read_key(j, "matrix", s); c.matrix = s; }
    if (j.contains("model")) { read_key(j, "model", s); c.model = s; }
    read_key(j, "format", c.format);
    read_key(j, "embedding", c.embedding);
    read_key(j, "seed", c.seed);
    read_key(j, "folds", c.folds);
    read_key(j, "classifiers", c.classifiers);
    read_key(j, "features", c.features);
    read_key(j, "top_k", c.top_k);
    read_key(j, "jobs", c.jobs);
    read_key(j, "leaky_selection", c.leaky_selection);
    read_key(j, "report_features", c.report_features);
    if (j.contains("tests")) {
        std::map<std::string, std::string> tests;
        read_key(j, "tests", tests);
        for (const auto& [name, p] : tests) c.tests.push_back({name, p});
    }
    return c;
}

void write_file(const fs::path& path, const std::string& content) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out << content;
    if (!out) throw RuntimeFailure("failed writing " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("expected artifact not found: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void require_artifact(const fs::path& path) {
    if (!fs::exists(path)) throw MissingArtifactError("expected artifact not found: " + path.string());
}

Corpus load_input(const RunConfig& c, bool require_label = true) {
    if (c.corpus.empty()) throw ValidationError("no corpus given (use --corpus or the config key 'corpus')");
    // A missing input corpus is a configuration problem (exit 2); exit 3 is
    // kept for artifacts an earlier stage should have produced.
    if (!fs::exists(c.corpus)) throw ValidationError("corpus file not found: " + c.corpus.string());
    LoadOptions options;
    options.require_label = require_label;
    return load_corpus(c.corpus, parse_corpus_format(c.format), options);
}

fs::path lexicon_dir(const RunConfig& c) { return c.lexicons.empty() ? default_data_dir() / "lexicons" : c.lexicons; }

Execution execution(const RunConfig& c) { return c.jobs == 1 ? Execution::serial : Execution::parallel; }

struct Pipeline {
    LexiconSet lexicons;
    std::unique_ptr<EmbeddingProvider> provider;
    FeatureExtractor extractor;

    explicit Pipeline(const RunConfig& c)
        : lexicons(LexiconSet::load(lexicon_dir(c))),
          provider(make_provider(parse_provider(c.embedding))),
          extractor(lexicons, *provider) {}
};

FeatureMatrix extract_all(const RunConfig& c, const Corpus& corpus) {
    static std::optional<Pipeline> pipeline;
    if (!pipeline) pipeline.emplace(c);
    return extract_matrix(corpus, FeatureRegistry::instance().ids(), pipeline->extractor, execution(c));
}

Dataset load_matrix(const RunConfig& c) {
    const fs::path p = c.matrix_path();
    require_artifact(p);
    return read_feature_csv(p);
}

std::vector<ModelKind> classifier_kinds(const RunConfig& c) {
    std::vector<ModelKind> kinds;
    for (const auto& name : c.classifiers) kinds.push_back(parse_model_kind(name));
    return kinds;
}

std::string meta_json(const FeatureMatrix& m) {
    json j;
    j["registry_version"] = m.data.registry_version;
    j["provider"] = m.provider;
    j["rows"] = m.data.rows;
    j["columns"] = m.data.cols;
    std::size_t degenerate = 0, pseudo = 0, empty = 0;
    json flagged = json::array();
    for (std::size_t r = 0; r < m.meta.size(); ++r) {
        const auto& x = m.meta[r];
        degenerate += x.degenerate;
        pseudo += x.pseudo_title;
        empty += x.empty_embedding;
        if (x.degenerate || x.pseudo_title || x.empty_embedding) {
            flagged.push_back({{"doc_id", m.data.row_ids[r]},
                               {"degenerate", x.degenerate},
                               {"pseudo_title", x.pseudo_title},
                               {"empty_embedding", x.empty_embedding}});
        }
    }
    j["degenerate_documents"] = degenerate;
    j["pseudo_title_documents"] = pseudo;
    j["empty_embedding_documents"] = empty;
    j["flagged"] = flagged;
    json families;
    for (FeatureFamily f : {FeatureFamily::sf, FeatureFamily::lf, FeatureFamily::hbh}) {
        families[std::string(family_name(f))] = FeatureRegistry::instance().ids(f).size();
    }
    j["families"] = families;
    return j.dump(2) + "\n";
}

std::string read_provider(const RunConfig& c) {
    const fs::path meta = c.matrix_path().parent_path() / "features_meta.json";
    if (!fs::exists(meta)) return parse_provider(c.embedding).provenance();
    try {
        return json::parse(read_file(meta)).value("provider", std::string{});
    } catch (const json::exception&) {
        return {};
    }
}

// ---- subcommands -----------------------------------------------------------

int cmd_ingest(const RunConfig& c) {
    const Corpus corpus = load_input(c);
    std::printf("%zu documents (%zu human / %zu generated)\n", corpus.size(), corpus.count(Label::human),
                corpus.count(Label::generated));
    std::map<std::string, std::pair<std::size_t, std::size_t>> by_source;
    for (const auto& d : corpus.documents) {
        auto& slot = by_source[d.source.empty() ? "(none)" : d.source];
        (d.label == Label::human ? slot.first : slot.second) += 1;
    }
    for (const auto& [source, counts] : by_source) {
        std::printf("  source %s: %zu human / %zu generated\n", source.c_str(), counts.first, counts.second);
    }
    return 0;
}

int cmd_stats(const RunConfig& c) {
    const Corpus corpus = load_input(c);
    const LexiconSet lexicons = LexiconSet::load(lexicon_dir(c));
    const TextProcessor processor(lexicons.text_resources());
    const RatioTable table = ratio_report(corpus_stats(corpus, processor));
    write_file(c.out / "ratios.csv", table.render_csv());
    const std::string text = table.render_text(c.corpus.filename().string());
    write_file(c.out / "ratios.txt", text);
    std::fputs(text.c_str(), stdout);
    return 0;
}

int cmd_extract(const RunConfig& c) {
    const Corpus corpus = load_input(c, false);
    FeatureMatrix m = extract_all(c, corpus);
    const FeatureSetTag tag = parse_feature_set(c.features);
    if (tag.kind != FeatureSetTag::Kind::all && tag.kind != FeatureSetTag::Kind::topk) {
        m.data = select_features(m.data, tag.base_ids());
    }
    write_file(c.matrix_path(), feature_csv(m.data));
    write_file(c.matrix_path().parent_path() / "features_meta.json", meta_json(m));
    std::printf("%zu documents x %zu features -> %s\n", m.data.rows, m.data.cols, c.matrix_path().string().c_str());
    return 0;
}

int cmd_train(const RunConfig& c) {
    const Dataset data = load_matrix(c);
    const FeatureSetTag tag = parse_feature_set(c.features);
    for (ModelKind kind : classifier_kinds(c)) {
        const auto features = choose_features(data, tag, c.seed, execution(c));
        const TrainedModel model =
            train(ModelSpec::defaults(kind), select_features(data, features), c.seed, execution(c));
        const fs::path p = c.out / ("model_" + std::string(model_kind_name(kind)) + ".json");
        write_file(p, serialize_model(model));
        std::printf("%s: %zu features -> %s\n", std::string(model_kind_name(kind)).c_str(), features.size(),
                    p.string().c_str());
    }
    return 0;
}

int cmd_eval(const RunConfig& c) {
    const Dataset data = load_matrix(c);
    CvOptions options;
    options.folds = c.folds;
    options.seed = c.seed;
    options.selection = {parse_feature_set(c.features), c.leaky_selection};
    options.execution = execution(c);
    const std::string provider = read_provider(c);

    std::vector<std::pair<std::string, Dataset>> tests;
    for (const auto& t : c.tests) {
        RunConfig tc = c;
        tc.corpus = t.path;
        tests.emplace_back(t.name, extract_all(tc, load_input(tc)).data);
    }

    std::string summary = "classifier  features  mean F1  mean AUC\n";
    std::vector<std::vector<EvalReport>> cross;
    char line[160];
    for (ModelKind kind : classifier_kinds(c)) {
        EvalReport r = cross_validate(data, ModelSpec::defaults(kind), options);
        r.provider = provider;
        const std::string name(model_kind_name(kind));
        write_file(c.out / ("eval_" + name + ".json"), r.to_json());
        write_file(c.out / ("eval_" + name + ".txt"), r.to_text());
        write_file(c.out / ("roc_" + name + ".csv"), r.roc_csv());
        std::snprintf(line, sizeof line, "%-11s %-9s %.4f   %.4f\n", std::string(model_display_name(kind)).c_str(),
                      r.feature_set.c_str(), r.mean_f1, r.mean_auc);
        summary += line;
        if (!tests.empty()) {
            auto reports = cross_dataset_eval(data, tests, ModelSpec::defaults(kind), options.selection, c.seed,
                                              execution(c));
            for (auto& rep : reports) rep.provider = provider;
            cross.push_back(std::move(reports));
        }
    }
    summary = "positive class = generated; " + std::to_string(c.folds) + "-fold stratified CV, seed " +
              std::to_string(c.seed) + "\n" + summary;
    write_file(c.out / "eval_summary.txt", summary);
    std::fputs(summary.c_str(), stdout);
    if (!cross.empty()) {
        const std::string table = render_cross_dataset(cross);
        json j = json::array();
        for (const auto& reports : cross) {
            for (const auto& r : reports) j.push_back(json::parse(r.to_json()));
        }
        write_file(c.out / "cross_dataset.txt", table);
        write_file(c.out / "cross_dataset.json", j.dump(2) + "\n");
        std::fputs(table.c_str(), stdout);
    }
    return 0;
}

int cmd_select(const RunConfig& c) {
    const Dataset data = load_matrix(c);
    CvOptions options;
    options.folds = c.folds;
    options.seed = c.seed;
    options.selection.leaky = c.leaky_selection;
    options.execution = execution(c);
    const auto kinds = classifier_kinds(c);
    bool full_registry = data.cols == kFeatureCount && !data.registry_version.empty();
    const SweepTable table = full_registry ? ablation_table(data, kinds, c.top_k, options)
                                           : selection_sweep(data, kinds, c.top_k, options);
    const std::string text = "mean F1, positive class = generated\n" + table.to_text(false) +
                             "\nmean AUC\n" + table.to_text(true);
    write_file(c.out / "sweep.txt", text);
    write_file(c.out / "sweep.json", table.to_json());
    write_file(c.out / "sweep.csv", table.to_csv());
    std::fputs(text.c_str(), stdout);
    return 0;
}

int cmd_predict(const RunConfig& c) {
    const std::string name(model_kind_name(parse_model_kind(c.classifiers.front())));
    const fs::path model_path = c.model.empty() ? c.out / ("model_" + name + ".json") : c.model;
    require_artifact(model_path);
    const TrainedModel model = load_model(model_path);
    const Corpus corpus = load_input(c, false);
    const FeatureMatrix m = extract_all(c, corpus);
    const auto scores = predict_scores(model, m.data);
    const auto labels = predict_labels(model.spec.kind, scores);
    std::string out = "doc_id,score,label\n";
    char buf[64];
    for (std::size_t r = 0; r < scores.size(); ++r) {
        std::snprintf(buf, sizeof buf, ",%.9g,", scores[r]);
        out += m.data.row_ids[r] + buf + std::string(label_name(static_cast<Label>(labels[r]))) + "\n";
    }
    write_file(c.out / "predictions.csv", out);
    std::fputs(out.c_str(), stdout);
    return 0;
}

int cmd_report(const RunConfig& c) {
    const Dataset data = load_matrix(c);
    for (const auto& feature : c.report_features) {
        const auto it = std::find(data.feature_ids.begin(), data.feature_ids.end(), feature);
        if (it == data.feature_ids.end()) throw ValidationError("report: feature '" + feature + "' not in matrix");
        const auto col = static_cast<std::size_t>(it - data.feature_ids.begin());
        std::vector<double> human, generated;
        for (std::size_t r = 0; r < data.rows; ++r) (data.labels[r] == 1 ? generated : human).push_back(data.at(r, col));
        write_file(c.out / ("hist_" + feature + ".svg"), histogram_svg(feature, human, generated));
    }
    std::vector<std::pair<std::string, std::vector<RocPoint>>> curves;
    for (ModelKind kind : classifier_kinds(c)) {
        const fs::path p = c.out / ("roc_" + std::string(model_kind_name(kind)) + ".csv");
        std::istringstream in(read_file(p));
        std::string row;
        std::getline(in, row);
        std::vector<RocPoint> pts;
        while (std::getline(in, row)) {
            std::istringstream cells(row);
            std::string cls, fpr, tpr, thr;
            std::getline(cells, cls, ',');
            std::getline(cells, fpr, ',');
            std::getline(cells, tpr, ',');
            std::getline(cells, thr, ',');
            pts.push_back({std::stod(fpr), std::stod(tpr), 0.0});
        }
        curves.emplace_back(std::string(model_display_name(kind)), std::move(pts));
    }
    write_file(c.out / "roc.svg", roc_svg(curves, "cross-validated ROC"));
    std::printf("%zu histogram(s) and roc.svg written to %s\n", c.report_features.size(), c.out.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stylometric detection of generated scientific abstracts"};
    app.require_subcommand(1, 1);

    std::string config_path, corpus, format, classifier, features, out, embedding, matrix, model, lexicons;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> folds;
    std::optional<int> jobs;
    std::vector<std::string> tests, report_features;
    std::vector<std::size_t> top_k;
    bool leaky = false;

    app.add_option("--config", config_path, "JSON run configuration; flags override it");
    app.add_option("--corpus", corpus, "corpus file (jsonl or csv)");
    app.add_option("--format", format, "corpus format")->check(CLI::IsMember({"jsonl", "csv"}));
    app.add_option("--seed", seed, "random seed");
    app.add_option("--folds", folds, "cross-validation folds");
    app.add_option("--classifier", classifier, "lda, logreg, svc, gbt or etc")
        ->check(CLI::IsMember({"lda", "logreg", "svc", "gbt", "etc"}));
    app.add_option("--features", features, "sf, lf, hbh, all or topk:N");
    app.add_option("--out", out, "output directory");
    app.add_option("--jobs", jobs, "worker threads (1 = serial)");
    app.add_option("--embedding", embedding, "builtin or remote:URL");
    app.add_option("--matrix", matrix, "feature matrix CSV (default <out>/features.csv)");
    app.add_option("--model", model, "model file for predict");
    app.add_option("--lexicons", lexicons, "lexicon directory");
    app.add_option("--test", tests, "cross-dataset test corpus as NAME=PATH (eval)");
    app.add_option("--top-k", top_k, "k values for the selection sweep");
    app.add_option("--feature", report_features, "feature ids to plot (report)");
    app.add_flag("--leaky-selection", leaky, "rank features on the whole matrix instead of per fold");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const RunConfig&);
    };
    const Sub subs[] = {
        {"ingest", "validate a corpus and print class counts", cmd_ingest},
        {"stats", "write the human/generated ratio table", cmd_stats},
        {"extract", "compute the feature matrix", cmd_extract},
        {"train", "train and save one model per classifier", cmd_train},
        {"eval", "cross-validate (and test on --test corpora)", cmd_eval},
        {"select", "ablation and top-k selection sweep", cmd_select},
        {"predict", "score an unlabeled corpus with a saved model", cmd_predict},
        {"report", "write SVG histograms and ROC curves", cmd_report},
    };
    std::vector<CLI::App*> commands;
    for (const auto& s : subs) commands.push_back(app.add_subcommand(s.name, s.help)->fallthrough());

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "stylo: error[validation]: %s\n", e.what());
        return 2;
    }

    try {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!corpus.empty()) c.corpus = corpus;
        if (!format.empty()) c.format = format;
        if (seed) c.seed = *seed;
        if (folds) c.folds = *folds;
        if (!classifier.empty()) c.classifiers = {classifier};
        if (!features.empty()) c.features = features;
        if (!out.empty()) c.out = out;
        if (jobs) c.jobs = *jobs;
        if (!embedding.empty()) c.embedding = embedding;
        if (!matrix.empty()) c.matrix = matrix;
        if (!model.empty()) c.model = model;
        if (!lexicons.empty()) c.lexicons = lexicons;
        if (!top_k.empty()) c.top_k = top_k;
        if (!report_features.empty()) c.report_features = report_features;
        if (leaky) c.leaky_selection = true;
        for (const auto& t : tests) {
            const auto eq = t.find('=');
            if (eq == std::string::npos || eq == 0) throw ValidationError("--test expects NAME=PATH, got '" + t + "'");
            c.tests.push_back({t.substr(0, eq), t.substr(eq + 1)});
        }
        c.validate();
        if (c.jobs > 0) omp_set_num_threads(c.jobs);

        for (std::size_t i = 0; i < commands.size(); ++i) {
            if (commands[i]->parsed()) return subs[i].run(c);
        }
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "stylo: error[%s]: %s\n", error_kind_name(e.kind()), e.what());
        return static_cast<int>(e.kind());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "stylo: error[runtime]: %s\n", e.what());
        return 4;
    }
}
