#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "doctest.h"
#include "stylo/corpus.hpp"
#include "stylo/error.hpp"
#include "support/fixtures.hpp"

using namespace stylo;

namespace {

Corpus load_text(const std::string& name, const std::string& text, CorpusFormat format = CorpusFormat::jsonl) {
    const auto dir = fixtures::scratch_dir("corpus");
    fixtures::write_file(dir / name, text);
    return load_corpus(dir / name, format);
}

std::string error_of(const std::string& text) {
    try {
        load_text("bad.jsonl", text);
    } catch (const ValidationError& e) {
        return e.what();
    }
    return {};
}

Document doc(const std::string& id, const std::string& text, Label label) {
    Document d;
    d.id = id;
    d.title = "t";
    d.abstract = text;
    d.label = label;
    return d;
}

}  // namespace

TEST_CASE("two-line jsonl loads in order") {
    const auto c = load_text("two.jsonl",
                             R"({"id":"a","title":"T","abstract":"One. Two.","keywords":["x"],"label":"human","source":"S"})"
                             "\n"
                             R"({"id":"b","title":"T","abstract":"Three.","label":"generated"})"
                             "\n");
    REQUIRE(c.size() == 2);
    CHECK(c.documents[0].id == "a");
    CHECK(c.documents[0].keywords == std::vector<std::string>{"x"});
    CHECK(c.documents[0].source == "S");
    CHECK(c.documents[1].label == Label::generated);
    CHECK(c.documents[1].keywords.empty());
    CHECK(c.count(Label::human) == 1);
}

TEST_CASE("labels are case-normalized") {
    const auto c = load_text("case.jsonl", R"({"id":"a","title":"T","abstract":"x.","label":"Human"})" "\n");
    CHECK(c.documents[0].label == Label::human);
}

TEST_CASE("row errors name the row and the problem") {
    const std::string ok = R"({"id":"a","title":"T","abstract":"x.","label":"human"})";
    const auto missing = error_of(ok + "\n" + R"({"id":"b","title":"T","label":"human"})" + "\n");
    CHECK(missing.find("row 2") != std::string::npos);
    CHECK(missing.find("abstract") != std::string::npos);

    const auto dup = error_of(ok + "\n" + ok + "\n");
    CHECK(dup.find("duplicate id 'a'") != std::string::npos);

    const auto label = error_of(R"({"id":"a","title":"T","abstract":"x.","label":"robot"})" "\n");
    CHECK(label.find("unknown label") != std::string::npos);

    const auto blank = error_of(R"({"id":"a","title":"T","abstract":"   ","label":"human"})" "\n");
    CHECK(blank.find("abstract is empty") != std::string::npos);

    CHECK(error_of("{not json\n").find("row 1") != std::string::npos);
}

TEST_CASE("missing corpus file is a missing artifact") {
    CHECK_THROWS_AS(load_corpus("/nonexistent/corpus.jsonl", CorpusFormat::jsonl), MissingArtifactError);
}

TEST_CASE("csv with quoting and keywords") {
    const auto c = load_text("c.csv",
                             "id,title,abstract,keywords,label,source\n"
                             "a,\"Title, with comma\",\"He said \"\"hi\"\".\nNew line.\",k1;k2,generated,CHEAT\n",
                             CorpusFormat::csv);
    REQUIRE(c.size() == 1);
    CHECK(c.documents[0].title == "Title, with comma");
    CHECK(c.documents[0].abstract == "He said \"hi\".\nNew line.");
    CHECK(c.documents[0].keywords == std::vector<std::string>{"k1", "k2"});
    CHECK(c.documents[0].label == Label::generated);
}

TEST_CASE("parse_csv follows RFC 4180") {
    const auto rows = parse_csv("a,b\r\n\"x,\"\"y\"\"\",\n");
    REQUIRE(rows.size() == 2);
    CHECK(rows[1][0] == "x,\"y\"");
    CHECK(rows[1][1].empty());
    CHECK_THROWS_AS(parse_csv("\"open"), ValidationError);
}

TEST_CASE("corpus_stats spot values") {
    Corpus c;
    c.documents.push_back(doc("h", "A b. C d.", Label::human));
    c.documents.push_back(doc("g", "the the cat", Label::generated));
    const auto s = corpus_stats(c, fixtures::processor());
    CHECK(s.human.sentence_count == 2);
    CHECK(s.human.word_count == 4);
    CHECK(s.generated.stopword_count == 2);
    CHECK(s.generated.unique_word_count == 2);
    CHECK(s.generated.word_count == 3);
    CHECK(s.human.mean_sentence_length == doctest::Approx(2.0));
}

TEST_CASE("corpus_stats rejects empty corpus and ignores order") {
    CHECK_THROWS_AS(corpus_stats(Corpus{}, fixtures::processor()), ValidationError);
    Corpus c = fixtures::mini_corpus();
    const auto a = ratio_report(corpus_stats(c, fixtures::processor())).render_csv();
    std::reverse(c.documents.begin(), c.documents.end());
    CHECK(ratio_report(corpus_stats(c, fixtures::processor())).render_csv() == a);
}

TEST_CASE("ratio report: order, arithmetic and mirrored corpus") {
    CorpusStats s;
    s.human.documents = 1;
    s.generated.documents = 1;
    s.human.sentence_count = s.generated.sentence_count = 5;
    s.human.word_count = 100;
    s.generated.word_count = 80;
    s.human.unique_word_count = s.generated.unique_word_count = 50;
    s.human.stopword_count = s.generated.stopword_count = 30;
    s.human.mean_sentence_length = s.generated.mean_sentence_length = 20;
    const auto t = ratio_report(s);
    REQUIRE(t.rows.size() == 5);
    const std::vector<std::string> order = {"# Sentences", "# Words", "# Unique Words", "# Stopwords",
                                            "Sentence Length"};
    for (std::size_t i = 0; i < 5; ++i) CHECK(t.rows[i].metric == order[i]);
    CHECK(t.rows[1].ratio == doctest::Approx(1.25));
    CHECK(t.rows[0].ratio == doctest::Approx(1.0));

    Corpus mirrored;
    for (const auto& d : fixtures::mini_corpus().documents) {
        if (d.label != Label::human) continue;
        mirrored.documents.push_back(d);
        Document copy = d;
        copy.id += "-copy";
        copy.label = Label::generated;
        mirrored.documents.push_back(copy);
    }
    for (const auto& row : ratio_report(corpus_stats(mirrored, fixtures::processor())).rows) {
        CHECK(row.ratio == doctest::Approx(1.0).epsilon(1e-12));
    }

    CorpusStats one_sided;
    one_sided.human.documents = 2;
    CHECK_THROWS_AS(ratio_report(one_sided), ValidationError);
}

TEST_CASE("human-eval sample reports the five metrics in table order") {
    const auto c = load_corpus(fixtures::corpus_path("human_eval_sample.jsonl"), CorpusFormat::jsonl);
    const auto t = ratio_report(corpus_stats(c, fixtures::processor()));
    const auto csv = t.render_csv();
    CHECK(csv.find("# Sentences") < csv.find("# Words"));
    CHECK(csv.find("# Stopwords") < csv.find("Sentence Length"));
    const auto text = t.render_text("HE");
    CHECK(text.find("Ratio") != std::string::npos);
}

namespace {

std::vector<std::string> make_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) ids.push_back("d" + std::to_string(100 + i));
    return ids;
}

}  // namespace

TEST_CASE("stratified split: 5/5 with k=5 puts one of each class in every fold") {
    const auto ids = make_ids(10);
    const std::vector<int> labels = {0, 1, 0, 1, 0, 1, 0, 1, 0, 1};
    const auto a = split_stratified(ids, labels, 5, 42);
    for (std::size_t f = 0; f < 5; ++f) {
        const auto rows = a.test_rows(f);
        REQUIRE(rows.size() == 2);
        CHECK(labels[rows[0]] + labels[rows[1]] == 1);
    }
    const auto b = split_stratified(ids, labels, 5, 42);
    CHECK(a.fold_of == b.fold_of);
}

TEST_CASE("stratified split: 20/10 with k=5 gives 4 human + 2 generated per fold") {
    const auto ids = make_ids(30);
    std::vector<int> labels(30, 0);
    for (std::size_t i = 0; i < 30; i += 3) labels[i] = 1;
    for (std::uint64_t seed : {0ULL, 1ULL, 42ULL, 12345ULL}) {
        const auto a = split_stratified(ids, labels, 5, seed);
        std::size_t total = 0;
        for (std::size_t f = 0; f < 5; ++f) {
            const auto rows = a.test_rows(f);
            std::size_t gen = 0;
            for (auto r : rows) gen += labels[r];
            CHECK(rows.size() == 6);
            CHECK(gen == 2);
            total += rows.size();
            CHECK(a.train_rows(f).size() + rows.size() == 30);
        }
        CHECK(total == 30);
    }
}

TEST_CASE("stratified split keeps per-fold class counts within one of the global share") {
    const auto ids = make_ids(37);
    std::vector<int> labels(37, 0);
    for (std::size_t i = 0; i < 37; i += 4) labels[i] = 1;
    const auto a = split_stratified(ids, labels, 5, 7);
    const double pos_share = 10.0 / 37.0;
    for (std::size_t f = 0; f < 5; ++f) {
        const auto rows = a.test_rows(f);
        double gen = 0;
        for (auto r : rows) gen += labels[r];
        CHECK(std::abs(gen - pos_share * static_cast<double>(rows.size())) <= 1.0);
    }
}

TEST_CASE("stratified split depends on ids, not row order") {
    auto ids = make_ids(20);
    std::vector<int> labels(20);
    for (std::size_t i = 0; i < 20; ++i) labels[i] = static_cast<int>(i % 2);
    const auto a = split_stratified(ids, labels, 4, 9);
    std::reverse(ids.begin(), ids.end());
    std::reverse(labels.begin(), labels.end());
    const auto b = split_stratified(ids, labels, 4, 9);
    for (const auto& id : ids) CHECK(a.fold(id) == b.fold(id));
}

TEST_CASE("stratified split errors") {
    const auto ids = make_ids(6);
    const std::vector<int> labels = {0, 0, 0, 0, 1, 1};
    CHECK_THROWS_AS(split_stratified(ids, labels, 3, 1), ValidationError);
    CHECK_THROWS_AS(split_stratified(ids, labels, 1, 1), ValidationError);
}

TEST_CASE("generation prompt") {
    const std::vector<std::string> kw = {"a", "b"};
    const auto p = render_generation_prompt("X", kw, 200);
    CHECK(p.find("entitled X") != std::string::npos);
    CHECK(p.find("keywords a, b") != std::string::npos);
    CHECK(p.find("200 tokens") != std::string::npos);
    const auto q = render_generation_prompt("X", {}, 150);
    CHECK(q.find("keywords") == std::string::npos);
    CHECK_THROWS_AS(render_generation_prompt("", kw, 10), ValidationError);
}

TEST_CASE("bundled mini-corpus shape") {
    const auto& c = fixtures::mini_corpus();
    CHECK(c.size() == 40);
    CHECK(c.count(Label::human) == 20);
    CHECK(c.count(Label::generated) == 20);
}
