#pragma once

#include <filesystem>
#include <string>

#include "stylo/corpus.hpp"
#include "stylo/embeddings.hpp"
#include "stylo/features.hpp"
#include "stylo/lexicons.hpp"

namespace fixtures {

/// Bundled lexicons, loaded once.
const stylo::LexiconSet& lexicons();
const stylo::TextProcessor& processor();
const stylo::HashedLemmaProvider& builtin_provider();
const stylo::FeatureExtractor& extractor();

std::filesystem::path corpus_path(const std::string& file);
const stylo::Corpus& mini_corpus();

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace fixtures
