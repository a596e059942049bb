#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace stylo {

class Lexicon;

enum class WordClass { content, function, punct, numeral };

const char* word_class_name(WordClass wc);

struct Token {
    std::string text;     // original casing
    std::string surface;  // lowercased
    std::string lemma;
    WordClass word_class = WordClass::content;
    bool is_stopword = false;
    std::size_t begin = 0;  // byte offsets into the source text
    std::size_t end = 0;

    bool is_word() const { return word_class == WordClass::content || word_class == WordClass::function; }
};

struct Sentence {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::vector<Token> tokens;
};

/// Token range [first, last) inside one sentence.
struct EntitySpan {
    std::size_t sentence = 0;
    std::size_t first = 0;
    std::size_t last = 0;
    std::string text;
};

struct ProcessedDoc {
    std::string text;
    std::vector<Sentence> sentences;
    std::vector<EntitySpan> entities;

    std::string_view sentence_text(std::size_t i) const;
    std::size_t token_count() const;
    std::size_t word_count() const;
    std::string to_json() const;
};

struct TextSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Abbreviations that never end a sentence ("e.g.", "et al.", "Fig.").
/// Entries are stored lowercased and include their trailing period.
class Abbreviations {
public:
    Abbreviations() = default;
    explicit Abbreviations(const std::vector<std::string>& entries);

    /// Plain text, one entry per line, `#` comments.
    static Abbreviations load(const std::filesystem::path& path);

    /// True when the lowercased text ends with an entry on a word boundary.
    bool ends_with_abbreviation(std::string_view lowered) const;

    /// True for a single word that carries its abbreviation period ("al.", "fig.").
    bool is_abbreviated_word(std::string_view lowered_with_period) const;

    std::size_t size() const { return entries_.size(); }
    const std::vector<std::string>& entries() const { return entries_; }

private:
    std::vector<std::string> entries_;
    std::unordered_set<std::string> last_words_;
};

std::vector<TextSpan> segment_sentence_spans(std::string_view text, const Abbreviations& abbreviations);
std::vector<std::string> segment_sentences(std::string_view text, const Abbreviations& abbreviations);

/// Splits on whitespace and punctuation. Hyphenated compounds, internal
/// apostrophes, decimal numbers and dotted abbreviations stay whole. Word
/// classes are content/punct/numeral only; `function` needs a lexicon and is
/// assigned by TextProcessor. `offset` shifts the recorded byte spans.
std::vector<Token> tokenize(std::string_view sentence, const Abbreviations* abbreviations = nullptr,
                            std::size_t offset = 0);

/// Rule-based suffix stripping with an exception table. Idempotent.
std::string lemmatize(std::string_view token);

std::string to_lower_ascii(std::string_view s);

struct TextResources {
    Abbreviations abbreviations;
    std::unordered_set<std::string> stopwords;
    std::unordered_set<std::string> function_words;
    // Capitalized words that commonly start a sentence without naming anything.
    std::unordered_set<std::string> common_words;
};

class TextProcessor {
public:
    explicit TextProcessor(TextResources resources);

    ProcessedDoc process(std::string_view text) const;
    const TextResources& resources() const { return resources_; }

private:
    TextResources resources_;
};

/// Maximal runs of capitalized tokens; a sentence-initial token is skipped when
/// it is a stopword or common word unless it is an acronym.
std::vector<EntitySpan> detect_entities(const ProcessedDoc& doc, const TextResources& resources);

/// Total matches of a connective lexicon.
std::size_t count_conjunctions(const ProcessedDoc& doc, const Lexicon& connectives);

}  // namespace stylo
