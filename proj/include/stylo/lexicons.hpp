#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "stylo/textproc.hpp"

namespace stylo {

enum class LexiconCategory {
    hedge,
    booster,
    hype,
    connective_additive,
    connective_causal,
    connective_adversative,
    connective_temporal,
    connective_exemplifying,
    connective_conclusive,
    connective_conditional,
    connective_purpose,
    stopword,
    pronoun,
    demonstrative,
};

inline constexpr std::array<LexiconCategory, 8> kConnectiveCategories = {
    LexiconCategory::connective_additive,     LexiconCategory::connective_causal,
    LexiconCategory::connective_adversative,  LexiconCategory::connective_temporal,
    LexiconCategory::connective_exemplifying, LexiconCategory::connective_conclusive,
    LexiconCategory::connective_conditional,  LexiconCategory::connective_purpose,
};

std::string_view category_name(LexiconCategory category);
std::optional<LexiconCategory> parse_category(std::string_view name);

enum class MatchMode { surface, lemma };

struct LexiconMatch {
    std::size_t sentence = 0;
    std::size_t first_token = 0;
    std::size_t length = 0;
};

/// A categorized word/phrase list. Entries are lowercase with single interior
/// spaces; multiword entries match consecutive tokens.
class Lexicon {
public:
    Lexicon(LexiconCategory category, MatchMode mode, const std::vector<std::string>& entries);

    /// UTF-8 text, one entry per line, `#` line comments. Throws on an
    /// unreadable file or one without entries.
    static Lexicon load(const std::filesystem::path& path, LexiconCategory category, MatchMode mode);

    LexiconCategory category() const { return category_; }
    MatchMode mode() const { return mode_; }
    const std::set<std::string>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool contains(std::string_view entry) const { return entries_.count(std::string(entry)) > 0; }

    /// Left-to-right scan inside each sentence; at every position the longest
    /// entry wins and matches never overlap.
    std::vector<LexiconMatch> find_matches(const ProcessedDoc& doc) const;

private:
    LexiconCategory category_;
    MatchMode mode_;
    std::set<std::string> entries_;
    // first key -> entry key sequences, longest first
    std::unordered_map<std::string, std::vector<std::vector<std::string>>> index_;
};

struct MatchCount {
    std::size_t count = 0;
    double density = 0.0;  // matches per 100 word tokens
};

MatchCount match_count(const ProcessedDoc& doc, const Lexicon& lexicon);

/// [hedge density, booster density, hype density]
std::array<double, 3> hbh_features(const ProcessedDoc& doc, const Lexicon& hedge, const Lexicon& booster,
                                   const Lexicon& hype);

MatchMode default_match_mode(LexiconCategory category);

/// Every lexicon the pipeline needs plus the text-processing resources, loaded
/// from one directory: `<category>.txt`, `abbreviations.txt`, `common_words.txt`.
class LexiconSet {
public:
    static LexiconSet load(const std::filesystem::path& dir);

    const Lexicon& get(LexiconCategory category) const;
    const TextResources& text_resources() const { return resources_; }
    const std::filesystem::path& directory() const { return dir_; }

private:
    std::filesystem::path dir_;
    std::map<LexiconCategory, Lexicon> lexicons_;
    TextResources resources_;
};

/// Directory holding the bundled lexicons and corpora.
std::filesystem::path default_data_dir();

}  // namespace stylo
