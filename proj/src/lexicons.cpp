#include "stylo/lexicons.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "stylo/error.hpp"

#ifndef STYLO_DATA_DIR
#define STYLO_DATA_DIR "data"
#endif

namespace stylo {

namespace {

constexpr std::array<std::pair<LexiconCategory, std::string_view>, 14> kCategoryNames = {{
    {LexiconCategory::hedge, "hedge"},
    {LexiconCategory::booster, "booster"},
    {LexiconCategory::hype, "hype"},
    {LexiconCategory::connective_additive, "connective_additive"},
    {LexiconCategory::connective_causal, "connective_causal"},
    {LexiconCategory::connective_adversative, "connective_adversative"},
    {LexiconCategory::connective_temporal, "connective_temporal"},
    {LexiconCategory::connective_exemplifying, "connective_exemplifying"},
    {LexiconCategory::connective_conclusive, "connective_conclusive"},
    {LexiconCategory::connective_conditional, "connective_conditional"},
    {LexiconCategory::connective_purpose, "connective_purpose"},
    {LexiconCategory::stopword, "stopword"},
    {LexiconCategory::pronoun, "pronoun"},
    {LexiconCategory::demonstrative, "demonstrative"},
}};

std::string normalize_entry(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    }
    return out;
}

std::vector<std::string> split_words(const std::string& entry) {
    std::vector<std::string> words;
    std::istringstream in(entry);
    std::string w;
    while (in >> w) words.push_back(w);
    return words;
}

std::vector<std::string> read_entry_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot read lexicon file " + path.string());
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        lines.push_back(line);
    }
    return lines;
}

const std::string& token_key(const Token& t, MatchMode mode) {
    return mode == MatchMode::lemma ? t.lemma : t.surface;
}

}  // namespace

std::string_view category_name(LexiconCategory category) {
    for (const auto& [c, name] : kCategoryNames) {
        if (c == category) return name;
    }
    return "unknown";
}

std::optional<LexiconCategory> parse_category(std::string_view name) {
    for (const auto& [c, n] : kCategoryNames) {
        if (n == name) return c;
    }
    return std::nullopt;
}

MatchMode default_match_mode(LexiconCategory category) {
    switch (category) {
        case LexiconCategory::hype:
        case LexiconCategory::connective_additive:
        case LexiconCategory::connective_causal:
        case LexiconCategory::connective_adversative:
        case LexiconCategory::connective_temporal:
        case LexiconCategory::connective_exemplifying:
        case LexiconCategory::connective_conclusive:
        case LexiconCategory::connective_conditional:
        case LexiconCategory::connective_purpose:
            return MatchMode::lemma;
        default:
            return MatchMode::surface;
    }
}

Lexicon::Lexicon(LexiconCategory category, MatchMode mode, const std::vector<std::string>& entries)
    : category_(category), mode_(mode) {
    for (const auto& raw : entries) {
        std::string e = normalize_entry(raw);
        if (!e.empty()) entries_.insert(std::move(e));
    }
    if (entries_.empty()) {
        throw ValidationError("lexicon '" + std::string(category_name(category)) + "' has no entries");
    }
    for (const auto& e : entries_) {
        std::vector<std::string> keys = split_words(e);
        if (mode_ == MatchMode::lemma) {
            for (auto& k : keys) k = lemmatize(k);
        }
        index_[keys.front()].push_back(std::move(keys));
    }
    for (auto& [first, seqs] : index_) {
        std::sort(seqs.begin(), seqs.end());
        seqs.erase(std::unique(seqs.begin(), seqs.end()), seqs.end());
        std::stable_sort(seqs.begin(), seqs.end(),
                         [](const auto& a, const auto& b) { return a.size() > b.size(); });
    }
}

Lexicon Lexicon::load(const std::filesystem::path& path, LexiconCategory category, MatchMode mode) {
    const auto lines = read_entry_lines(path);
    if (lines.empty()) throw ValidationError("lexicon file " + path.string() + " is empty");
    return Lexicon(category, mode, lines);
}

std::vector<LexiconMatch> Lexicon::find_matches(const ProcessedDoc& doc) const {
    std::vector<LexiconMatch> matches;
    for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
        const auto& tokens = doc.sentences[si].tokens;
        std::size_t i = 0;
        while (i < tokens.size()) {
            if (!tokens[i].is_word()) {
                ++i;
                continue;
            }
            const auto it = index_.find(token_key(tokens[i], mode_));
            std::size_t matched = 0;
            if (it != index_.end()) {
                for (const auto& seq : it->second) {
                    if (i + seq.size() > tokens.size()) continue;
                    bool ok = true;
                    for (std::size_t k = 1; k < seq.size() && ok; ++k) {
                        const Token& t = tokens[i + k];
                        ok = t.is_word() && token_key(t, mode_) == seq[k];
                    }
                    if (ok) {
                        matched = seq.size();
                        break;
                    }
                }
            }
            if (matched > 0) {
                matches.push_back({si, i, matched});
                i += matched;
            } else {
                ++i;
            }
        }
    }
    return matches;
}

MatchCount match_count(const ProcessedDoc& doc, const Lexicon& lexicon) {
    MatchCount out;
    out.count = lexicon.find_matches(doc).size();
    const std::size_t words = doc.word_count();
    out.density = words == 0 ? 0.0 : 100.0 * static_cast<double>(out.count) / static_cast<double>(words);
    return out;
}

std::array<double, 3> hbh_features(const ProcessedDoc& doc, const Lexicon& hedge, const Lexicon& booster,
                                   const Lexicon& hype) {
    return {match_count(doc, hedge).density, match_count(doc, booster).density, match_count(doc, hype).density};
}

LexiconSet LexiconSet::load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw MissingArtifactError("lexicon directory not found: " + dir.string());
    }
    LexiconSet set;
    set.dir_ = dir;
    for (const auto& [category, name] : kCategoryNames) {
        const auto path = dir / (std::string(name) + ".txt");
        set.lexicons_.emplace(category, Lexicon::load(path, category, default_match_mode(category)));
    }
    set.resources_.abbreviations = Abbreviations::load(dir / "abbreviations.txt");
    for (const auto& e : set.get(LexiconCategory::stopword).entries()) {
        set.resources_.stopwords.insert(e);
        set.resources_.function_words.insert(e);
    }
    for (auto category : {LexiconCategory::pronoun, LexiconCategory::demonstrative}) {
        for (const auto& e : set.get(category).entries()) set.resources_.function_words.insert(e);
    }
    for (const auto& line : read_entry_lines(dir / "common_words.txt")) {
        set.resources_.common_words.insert(normalize_entry(line));
    }
    return set;
}

const Lexicon& LexiconSet::get(LexiconCategory category) const {
    const auto it = lexicons_.find(category);
    if (it == lexicons_.end()) {
        throw MissingArtifactError("lexicon not loaded: " + std::string(category_name(category)));
    }
    return it->second;
}

std::filesystem::path default_data_dir() {
    if (const char* env = std::getenv("STYLO_DATA_DIR"); env != nullptr && *env != '\0') return env;
    return STYLO_DATA_DIR;
}

}  // namespace stylo
