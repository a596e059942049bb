#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/textproc.hpp"

namespace stylo {

enum class Label : int { human = 0, generated = 1 };

std::string_view label_name(Label label);

struct Document {
    std::string id;
    std::string title;
    std::string abstract;
    std::vector<std::string> keywords;
    Label label = Label::human;
    std::string source;
};

struct Corpus {
    std::vector<Document> documents;
    // False when loaded without labels (scoring input).
    bool labeled = true;

    std::size_t size() const { return documents.size(); }
    bool empty() const { return documents.empty(); }
    std::size_t count(Label label) const;
};

enum class CorpusFormat { jsonl, csv };

CorpusFormat parse_corpus_format(std::string_view name);

struct LoadOptions {
    bool require_label = true;
};

/// Reads JSONL (one object per line) or RFC-4180 CSV with a header row.
/// Required keys: id, title, abstract, label; optional keywords, source.
/// In CSV the keywords cell is split on ';'.
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, LoadOptions options = {});

void validate_document(const Document& doc, std::size_t row);

/// Parses one CSV record set (RFC-4180: quoted fields, doubled quotes,
/// embedded newlines). Exposed for testing.
std::vector<std::vector<std::string>> parse_csv(std::string_view text);

struct ClassAggregate {
    std::size_t documents = 0;
    std::size_t sentence_count = 0;
    std::size_t word_count = 0;
    std::size_t unique_word_count = 0;  // summed per document
    std::size_t stopword_count = 0;
    double mean_sentence_length = 0.0;  // words per sentence over the class

    double per_document(std::size_t total) const {
        return documents == 0 ? 0.0 : static_cast<double>(total) / static_cast<double>(documents);
    }
};

struct CorpusStats {
    ClassAggregate human;
    ClassAggregate generated;

    const ClassAggregate& of(Label label) const { return label == Label::human ? human : generated; }
};

CorpusStats corpus_stats(const Corpus& corpus, const TextProcessor& processor);

struct RatioRow {
    std::string metric;
    double human = 0.0;
    double generated = 0.0;
    double ratio = 0.0;
};

/// Human / generated for the five dataset-comparison metrics, in fixed order:
/// # Sentences, # Words, # Unique Words, # Stopwords, Sentence Length.
/// Count metrics compare per-document means so class sizes do not matter.
struct RatioTable {
    std::vector<RatioRow> rows;

    std::string render_text(std::string_view title = {}) const;
    std::string render_csv() const;
};

RatioTable ratio_report(const CorpusStats& stats);

struct FoldAssignment {
    std::size_t k = 0;
    std::uint64_t seed = 0;
    std::vector<std::string> ids;        // input order
    std::vector<std::size_t> fold_of;    // aligned with ids
    std::map<std::string, std::size_t> by_id;

    std::size_t fold(std::string_view id) const;
    std::vector<std::size_t> test_rows(std::size_t f) const;
    std::vector<std::size_t> train_rows(std::size_t f) const;
};

/// Stratified k-fold assignment. Ids are sorted lexicographically within each
/// class, shuffled with Rng(seed), then dealt round-robin; the dealing position
/// carries over from one class to the next so fold sizes stay balanced.
FoldAssignment split_stratified(std::span<const std::string> ids, std::span<const int> labels, std::size_t k,
                                std::uint64_t seed);
FoldAssignment split_stratified(const Corpus& corpus, std::size_t k, std::uint64_t seed);

/// Prompt used to produce the generated abstracts; the keyword clause is
/// dropped when no keywords are given.
std::string render_generation_prompt(std::string_view title, std::span<const std::string> keywords,
                                     std::size_t n_words);

}  // namespace stylo
