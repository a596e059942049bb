#include "support/fixtures.hpp"

#include <fstream>
#include <sstream>

namespace fixtures {

const stylo::LexiconSet& lexicons() {
    static const stylo::LexiconSet set = stylo::LexiconSet::load(stylo::default_data_dir() / "lexicons");
    return set;
}

const stylo::TextProcessor& processor() {
    static const stylo::TextProcessor p(lexicons().text_resources());
    return p;
}

const stylo::HashedLemmaProvider& builtin_provider() {
    static const stylo::HashedLemmaProvider p;
    return p;
}

const stylo::FeatureExtractor& extractor() {
    static const stylo::FeatureExtractor e(lexicons(), builtin_provider());
    return e;
}

std::filesystem::path corpus_path(const std::string& file) { return stylo::default_data_dir() / "corpus" / file; }

const stylo::Corpus& mini_corpus() {
    static const stylo::Corpus c = stylo::load_corpus(corpus_path("mini_corpus.jsonl"), stylo::CorpusFormat::jsonl);
    return c;
}

std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("stylo_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

}  // namespace fixtures
