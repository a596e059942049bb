#include "stylo/textproc.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/lexicons.hpp"

namespace stylo {

namespace {

bool is_space(unsigned char c) { return std::isspace(c) != 0; }
bool is_alpha(unsigned char c) { return std::isalpha(c) != 0; }
bool is_digit(unsigned char c) { return std::isdigit(c) != 0; }
bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }

unsigned char at(std::string_view s, std::size_t i) { return i < s.size() ? static_cast<unsigned char>(s[i]) : 0; }

// Length of a multi-byte punctuation sequence (dashes, curly quotes, ellipsis,
// guillemets) starting at i, or 0.
std::size_t utf8_punct_len(std::string_view s, std::size_t i) {
    const unsigned char c0 = at(s, i);
    if (c0 == 0xE2 && at(s, i + 1) == 0x80) {
        switch (at(s, i + 2)) {
            case 0x90: case 0x91: case 0x92: case 0x93: case 0x94:
            case 0x98: case 0x99: case 0x9C: case 0x9D: case 0xA6:
                return 3;
            default:
                return 0;
        }
    }
    if (c0 == 0xC2 && (at(s, i + 1) == 0xAB || at(s, i + 1) == 0xBB)) return 2;
    return 0;
}

bool is_nbsp(std::string_view s, std::size_t i) { return at(s, i) == 0xC2 && at(s, i + 1) == 0xA0; }

bool is_word_byte(std::string_view s, std::size_t i) {
    const unsigned char c = at(s, i);
    if (i >= s.size()) return false;
    if (std::isalnum(c)) return true;
    return c >= 0x80 && utf8_punct_len(s, i) == 0 && !is_nbsp(s, i);
}

bool is_curly_apostrophe(std::string_view s, std::size_t i) {
    return at(s, i) == 0xE2 && at(s, i + 1) == 0x80 && at(s, i + 2) == 0x99;
}

WordClass classify(std::string_view token) {
    bool letter = false;
    bool alnum = false;
    for (unsigned char c : token) {
        if (is_alpha(c) || c >= 0x80) letter = true;
        if (std::isalnum(c) || c >= 0x80) alnum = true;
    }
    if (!alnum) return WordClass::punct;
    if (!letter) return WordClass::numeral;
    return WordClass::content;
}

bool alphabetic_for_lemma(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) {
        return (c >= 'a' && c <= 'z') || c == '-' || c == '\'';
    });
}

// ---- lemmatizer ------------------------------------------------------------

const std::unordered_map<std::string, std::string>& lemma_exceptions() {
    static const std::unordered_map<std::string, std::string> table = {
        // be / have / do
        {"is", "be"}, {"are", "be"}, {"was", "be"}, {"were", "be"}, {"been", "be"}, {"being", "be"},
        {"am", "be"}, {"has", "have"}, {"had", "have"}, {"having", "have"}, {"does", "do"},
        {"did", "do"}, {"done", "do"}, {"doing", "do"}, {"goes", "go"}, {"went", "go"}, {"gone", "go"},
        // irregular verbs common in abstracts
        {"made", "make"}, {"shown", "show"}, {"found", "find"}, {"led", "lead"}, {"gave", "give"},
        {"given", "give"}, {"took", "take"}, {"taken", "take"}, {"saw", "see"}, {"seen", "see"},
        {"brought", "bring"}, {"thought", "think"}, {"known", "know"}, {"knew", "know"},
        {"began", "begin"}, {"begun", "begin"}, {"wrote", "write"}, {"written", "write"},
        {"held", "hold"}, {"built", "build"}, {"kept", "keep"}, {"left", "leave"}, {"met", "meet"},
        {"ran", "run"}, {"chose", "choose"}, {"chosen", "choose"}, {"grew", "grow"}, {"grown", "grow"},
        {"drew", "draw"}, {"drawn", "draw"}, {"fell", "fall"}, {"fallen", "fall"}, {"lost", "lose"},
        {"sought", "seek"}, {"taught", "teach"}, {"understood", "understand"}, {"arose", "arise"},
        {"arisen", "arise"}, {"became", "become"}, {"spent", "spend"}, {"sent", "send"}, {"paid", "pay"},
        {"said", "say"}, {"told", "tell"}, {"felt", "feel"}, {"stood", "stand"}, {"undertaken", "undertake"},
        {"undertook", "undertake"},
        // -ed / -ing forms the suffix rules get wrong
        {"used", "use"}, {"using", "use"}, {"uses", "use"}, {"focused", "focus"}, {"focusing", "focus"},
        {"focuses", "focus"}, {"biased", "bias"}, {"embedded", "embed"}, {"embedding", "embed"},
        {"agreed", "agree"}, {"caused", "cause"}, {"causing", "cause"}, {"increased", "increase"},
        {"increasing", "increase"}, {"released", "release"}, {"releasing", "release"},
        {"decreased", "decrease"}, {"decreasing", "decrease"}, {"based", "base"}, {"basing", "base"},
        {"appeared", "appear"}, {"cited", "cite"}, {"united", "unite"}, {"invited", "invite"},
        {"created", "create"}, {"creating", "create"}, {"hoped", "hope"}, {"noted", "note"},
        {"aimed", "aim"}, {"aiming", "aim"}, {"refined", "refine"}, {"refining", "refine"},
        {"obtained", "obtain"}, {"obtaining", "obtain"}, {"explained", "explain"},
        {"contained", "contain"}, {"remained", "remain"}, {"gained", "gain"}, {"trained", "train"},
        {"training", "train"}, {"designed", "design"}, {"designing", "design"}, {"assigned", "assign"},
        // fixed words
        {"during", "during"}, {"nothing", "nothing"}, {"something", "something"},
        {"anything", "anything"}, {"everything", "everything"}, {"morning", "morning"},
        {"evening", "evening"}, {"ceiling", "ceiling"}, {"sibling", "sibling"}, {"spring", "spring"},
        {"bring", "bring"}, {"thing", "thing"}, {"string", "string"}, {"king", "king"},
        {"hundred", "hundred"}, {"indeed", "indeed"}, {"need", "need"}, {"speed", "speed"},
        {"seed", "seed"}, {"feed", "feed"}, {"proceed", "proceed"}, {"exceed", "exceed"},
        {"succeed", "succeed"}, {"embed", "embed"}, {"red", "red"}, {"bed", "bed"}, {"shed", "shed"},
        {"wed", "wed"}, {"hybrid", "hybrid"}, {"naked", "naked"}, {"sacred", "sacred"},
        {"wicked", "wicked"}, {"kindred", "kindred"}, {"this", "this"}, {"thus", "thus"},
        {"always", "always"}, {"perhaps", "perhaps"}, {"across", "across"}, {"less", "less"},
        {"unless", "unless"}, {"series", "series"}, {"species", "species"}, {"news", "news"},
        {"mathematics", "mathematics"}, {"physics", "physics"}, {"statistics", "statistics"},
        {"economics", "economics"}, {"linguistics", "linguistics"}, {"ethics", "ethics"},
        {"analytics", "analytics"}, {"robotics", "robotics"}, {"genomics", "genomics"},
        {"whereas", "whereas"}, {"besides", "besides"}, {"sometimes", "sometimes"},
        {"afterwards", "afterwards"}, {"towards", "towards"}, {"nevertheless", "nevertheless"},
        {"regardless", "regardless"}, {"nonetheless", "nonetheless"}, {"various", "various"},
        {"gas", "gas"}, {"lens", "lens"}, {"corpus", "corpus"}, {"status", "status"},
        {"consensus", "consensus"}, {"bonus", "bonus"}, {"virus", "virus"}, {"campus", "campus"},
        {"focus", "focus"}, {"bias", "bias"}, {"canvas", "canvas"}, {"atlas", "atlas"},
        {"alias", "alias"}, {"chaos", "chaos"}, {"ethos", "ethos"},
        // irregular plurals
        {"analyses", "analysis"}, {"hypotheses", "hypothesis"}, {"theses", "thesis"},
        {"syntheses", "synthesis"}, {"bases", "basis"}, {"crises", "crisis"}, {"diagnoses", "diagnosis"},
        {"criteria", "criterion"}, {"phenomena", "phenomenon"}, {"children", "child"}, {"men", "man"},
        {"women", "woman"}, {"people", "people"}, {"feet", "foot"}, {"teeth", "tooth"}, {"mice", "mouse"},
        {"indices", "index"}, {"matrices", "matrix"}, {"vertices", "vertex"}, {"appendices", "appendix"},
        {"data", "data"}, {"media", "media"}, {"strata", "stratum"}, {"spectra", "spectrum"},
        {"lives", "life"}, {"leaves", "leaf"}, {"halves", "half"}, {"selves", "self"},
    };
    return table;
}

bool is_vowel(char c) { return c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u'; }

bool has_vowel(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) { return is_vowel(c) || c == 'y'; });
}

bool is_consonant_at(std::string_view s, std::size_t i) {
    const char c = s[i];
    if (is_vowel(c)) return false;
    if (c == 'y') return i == 0 || !is_consonant_at(s, i - 1);
    return true;
}

// Porter measure: number of VC sequences.
int measure(std::string_view s) {
    int m = 0;
    std::size_t i = 0;
    while (i < s.size() && is_consonant_at(s, i)) ++i;
    while (i < s.size()) {
        while (i < s.size() && !is_consonant_at(s, i)) ++i;
        if (i >= s.size()) break;
        while (i < s.size() && is_consonant_at(s, i)) ++i;
        ++m;
    }
    return m;
}

bool ends_cvc(std::string_view s) {
    const std::size_t n = s.size();
    if (n < 3) return false;
    if (!is_consonant_at(s, n - 1) || is_consonant_at(s, n - 2) || !is_consonant_at(s, n - 3)) return false;
    const char last = s[n - 1];
    return last != 'w' && last != 'x' && last != 'y';
}

bool ends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && s.substr(s.size() - suffix.size()) == suffix;
}

// Restores the stem after removing -ed / -ing.
std::string repair_stem(std::string stem) {
    const std::size_t n = stem.size();
    if (ends_with(stem, "at") || ends_with(stem, "bl") || ends_with(stem, "iz") || ends_with(stem, "yz")) {
        return stem + "e";
    }
    if (n >= 2 && stem[n - 1] == stem[n - 2] && is_consonant_at(stem, n - 1)) {
        const char c = stem[n - 1];
        if (c != 'l' && c != 's' && c != 'z') stem.pop_back();
        return stem;
    }
    const char last = stem[n - 1];
    const char prev = n >= 2 ? stem[n - 2] : '\0';
    const char prev2 = n >= 3 ? stem[n - 3] : '\0';
    if (last == 'v' || last == 'z') return stem + "e";
    if (last == 'c' && (is_vowel(prev) || prev == 'n')) return stem + "e";
    if (last == 'g' && (prev == 'n' || prev == 'r' || is_vowel(prev)) && !ends_with(stem, "ing")) {
        if (prev == 'n' && !is_vowel(prev2)) return stem;  // "design", "long"
        return stem + "e";
    }
    if (n >= 2 && is_vowel(prev) && !is_vowel(prev2)) {
        // single vowel + consonant endings that usually drop a silent e
        switch (last) {
            case 's': case 'r': case 'd': case 't': case 'm':
                if (last == 't' && prev != 'u' && prev != 'o') break;
                if (last == 'r' && prev != 'u' && prev != 'a' && prev != 'i') break;
                return stem + "e";
            case 'n':
                if (prev == 'i') return stem + "e";
                break;
            default:
                break;
        }
    }
    if (measure(stem) == 1 && ends_cvc(stem)) return stem + "e";
    return stem;
}

// One application of the suffix rules.
std::string lemma_step(const std::string& w) {
    const auto& exceptions = lemma_exceptions();
    if (auto it = exceptions.find(w); it != exceptions.end()) return it->second;
    const std::size_t n = w.size();
    if (n <= 3 || !alphabetic_for_lemma(w)) return w;

    if (ends_with(w, "ies") && n > 4) return w.substr(0, n - 3) + "y";
    if (ends_with(w, "sses")) return w.substr(0, n - 2);
    if (ends_with(w, "xes") || ends_with(w, "zes") || ends_with(w, "ches") || ends_with(w, "shes")) {
        return w.substr(0, n - 2);
    }
    if (ends_with(w, "s")) {
        if (ends_with(w, "ss") || ends_with(w, "us") || ends_with(w, "is") || ends_with(w, "'s")) return w;
        return w.substr(0, n - 1);
    }
    if (ends_with(w, "ied") && n > 4) return w.substr(0, n - 3) + "y";
    if (ends_with(w, "eed")) return w;
    if (ends_with(w, "ed")) {
        const std::string stem = w.substr(0, n - 2);
        if (stem.size() < 3 || !has_vowel(stem)) return w;
        return repair_stem(stem);
    }
    if (ends_with(w, "ing")) {
        const std::string stem = w.substr(0, n - 3);
        if (stem.size() < 3 || !has_vowel(stem)) return w;
        return repair_stem(stem);
    }
    return w;
}

}  // namespace

const char* word_class_name(WordClass wc) {
    switch (wc) {
        case WordClass::content: return "content";
        case WordClass::function: return "function";
        case WordClass::punct: return "punct";
        case WordClass::numeral: return "numeral";
    }
    return "content";
}

std::string to_lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

std::string lemmatize(std::string_view token) {
    const std::string word = to_lower_ascii(token);
    const std::string once = lemma_step(word);
    // Only accept a fixed point of the rule step; this makes the result
    // idempotent regardless of how the individual rules interact.
    if (lemma_step(once) == once) return once;
    return word;
}

// ---- abbreviations ---------------------------------------------------------

Abbreviations::Abbreviations(const std::vector<std::string>& entries) {
    for (const auto& raw : entries) {
        std::string e = to_lower_ascii(raw);
        if (e.empty()) continue;
        if (std::find(entries_.begin(), entries_.end(), e) != entries_.end()) continue;
        entries_.push_back(e);
        const auto space = e.rfind(' ');
        last_words_.insert(space == std::string::npos ? e : e.substr(space + 1));
    }
    // Longest first so multiword entries win.
    std::stable_sort(entries_.begin(), entries_.end(),
                     [](const std::string& a, const std::string& b) { return a.size() > b.size(); });
}

Abbreviations Abbreviations::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingArtifactError("cannot open abbreviation list " + path.string());
    std::vector<std::string> entries;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto last = line.find_last_not_of(" \t\r");
        entries.push_back(line.substr(first, last - first + 1));
    }
    return Abbreviations(entries);
}

bool Abbreviations::ends_with_abbreviation(std::string_view lowered) const {
    for (const auto& e : entries_) {
        if (!ends_with(lowered, e)) continue;
        if (lowered.size() == e.size()) return true;
        const unsigned char before = static_cast<unsigned char>(lowered[lowered.size() - e.size() - 1]);
        if (!std::isalnum(before)) return true;
    }
    return false;
}

bool Abbreviations::is_abbreviated_word(std::string_view lowered_with_period) const {
    return last_words_.count(std::string(lowered_with_period)) > 0;
}

// ---- segmentation ----------------------------------------------------------

std::vector<TextSpan> segment_sentence_spans(std::string_view text, const Abbreviations& abbreviations) {
    std::vector<TextSpan> spans;
    const std::size_t n = text.size();
    std::size_t i = 0;
    while (i < n && is_space(at(text, i))) ++i;
    std::size_t start = i;

    auto is_terminal = [](unsigned char c) { return c == '.' || c == '!' || c == '?'; };
    auto is_closer = [](unsigned char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };

    while (i < n) {
        const unsigned char c = at(text, i);
        if (!is_terminal(c)) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && is_terminal(at(text, j))) ++j;
        while (j < n) {
            if (is_closer(at(text, j))) {
                ++j;
            } else if (at(text, j) == 0xE2 && at(text, j + 1) == 0x80 &&
                       (at(text, j + 2) == 0x9D || at(text, j + 2) == 0x99)) {
                j += 3;
            } else {
                break;
            }
        }
        if (j >= n || !is_space(at(text, j))) {
            i = j;
            continue;
        }
        std::size_t k = j;
        while (k < n && is_space(at(text, k))) ++k;
        if (k >= n || !is_upper(at(text, k))) {
            i = j;
            continue;
        }
        bool blocked = false;
        if (c == '.' && j == i + 1) {
            const std::size_t window_begin = i + 1 >= start + 24 ? i + 1 - 24 : start;
            const std::string tail = to_lower_ascii(text.substr(window_begin, i + 1 - window_begin));
            if (abbreviations.ends_with_abbreviation(tail)) blocked = true;
        }
        if (blocked) {
            i = j;
            continue;
        }
        spans.push_back({start, j});
        start = k;
        i = k;
    }
    std::size_t end = n;
    while (end > start && is_space(at(text, end - 1))) --end;
    if (end > start) spans.push_back({start, end});
    return spans;
}

std::vector<std::string> segment_sentences(std::string_view text, const Abbreviations& abbreviations) {
    std::vector<std::string> out;
    for (const auto& span : segment_sentence_spans(text, abbreviations)) {
        out.emplace_back(text.substr(span.begin, span.end - span.begin));
    }
    return out;
}

// ---- tokenization ----------------------------------------------------------

std::vector<Token> tokenize(std::string_view s, const Abbreviations* abbreviations, std::size_t offset) {
    std::vector<Token> tokens;
    const std::size_t n = s.size();
    auto emit = [&](std::size_t b, std::size_t e) {
        Token t;
        t.text = std::string(s.substr(b, e - b));
        t.surface = to_lower_ascii(t.text);
        t.word_class = classify(t.text);
        t.lemma = t.is_word() ? lemmatize(t.surface) : t.surface;
        t.begin = offset + b;
        t.end = offset + e;
        tokens.push_back(std::move(t));
    };

    std::size_t i = 0;
    while (i < n) {
        if (is_space(at(s, i))) {
            ++i;
            continue;
        }
        if (is_nbsp(s, i)) {
            i += 2;
            continue;
        }
        if (const std::size_t plen = utf8_punct_len(s, i); plen > 0) {
            emit(i, i + plen);
            i += plen;
            continue;
        }
        if (!is_word_byte(s, i)) {
            emit(i, i + 1);
            ++i;
            continue;
        }
        std::size_t j = i;
        bool dotted = false;
        for (;;) {
            while (j < n && is_word_byte(s, j)) ++j;
            if (j >= n) break;
            const unsigned char d = at(s, j);
            if ((d == '-' || d == '\'') && is_word_byte(s, j + 1)) {
                ++j;
                continue;
            }
            if (is_curly_apostrophe(s, j) && is_alpha(at(s, j + 3)) && j > i && is_alpha(at(s, j - 1))) {
                j += 3;
                continue;
            }
            if ((d == '.' || d == ',') && j > i && is_digit(at(s, j - 1)) && is_digit(at(s, j + 1))) {
                ++j;
                continue;
            }
            if (d == '.' && j > i && is_alpha(at(s, j - 1)) && is_alpha(at(s, j + 1)) && at(s, j + 2) == '.') {
                j += 2;
                dotted = true;
                continue;
            }
            break;
        }
        if (at(s, j) == '.' && j < n) {
            if (dotted) {
                ++j;
            } else if (abbreviations != nullptr &&
                       abbreviations->is_abbreviated_word(to_lower_ascii(s.substr(i, j - i)) + ".")) {
                ++j;
            }
        }
        emit(i, j);
        i = j;
    }
    return tokens;
}

// ---- processed document ----------------------------------------------------

std::string_view ProcessedDoc::sentence_text(std::size_t i) const {
    const auto& s = sentences.at(i);
    return std::string_view(text).substr(s.begin, s.end - s.begin);
}

std::size_t ProcessedDoc::token_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) n += s.tokens.size();
    return n;
}

std::size_t ProcessedDoc::word_count() const {
    std::size_t n = 0;
    for (const auto& s : sentences) {
        for (const auto& t : s.tokens) n += t.is_word() ? 1 : 0;
    }
    return n;
}

std::string ProcessedDoc::to_json() const {
    nlohmann::json j;
    j["sentences"] = nlohmann::json::array();
    for (const auto& s : sentences) {
        nlohmann::json js{{"begin", s.begin}, {"end", s.end}, {"tokens", nlohmann::json::array()}};
        for (const auto& t : s.tokens) {
            js["tokens"].push_back({{"text", t.text},
                                    {"surface", t.surface},
                                    {"lemma", t.lemma},
                                    {"class", word_class_name(t.word_class)},
                                    {"stopword", t.is_stopword},
                                    {"begin", t.begin},
                                    {"end", t.end}});
        }
        j["sentences"].push_back(std::move(js));
    }
    j["entities"] = nlohmann::json::array();
    for (const auto& e : entities) {
        j["entities"].push_back({{"sentence", e.sentence}, {"first", e.first}, {"last", e.last}, {"text", e.text}});
    }
    return j.dump();
}

TextProcessor::TextProcessor(TextResources resources) : resources_(std::move(resources)) {}

ProcessedDoc TextProcessor::process(std::string_view text) const {
    ProcessedDoc doc;
    doc.text = std::string(text);
    const std::string_view view(doc.text);
    for (const auto& span : segment_sentence_spans(view, resources_.abbreviations)) {
        Sentence sentence;
        sentence.begin = span.begin;
        sentence.end = span.end;
        sentence.tokens = tokenize(view.substr(span.begin, span.end - span.begin), &resources_.abbreviations,
                                   span.begin);
        for (auto& t : sentence.tokens) {
            if (!t.is_word()) continue;
            t.is_stopword = resources_.stopwords.count(t.surface) > 0;
            if (resources_.function_words.count(t.surface) > 0) t.word_class = WordClass::function;
        }
        if (!sentence.tokens.empty()) doc.sentences.push_back(std::move(sentence));
    }
    doc.entities = detect_entities(doc, resources_);
    return doc;
}

std::vector<EntitySpan> detect_entities(const ProcessedDoc& doc, const TextResources& resources) {
    std::vector<EntitySpan> out;
    for (std::size_t si = 0; si < doc.sentences.size(); ++si) {
        const auto& tokens = doc.sentences[si].tokens;
        std::size_t first_word = tokens.size();
        for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
            if (tokens[ti].is_word()) {
                first_word = ti;
                break;
            }
        }
        std::size_t run_start = tokens.size();
        auto close_run = [&](std::size_t end) {
            if (run_start >= end) return;
            EntitySpan span{si, run_start, end, {}};
            for (std::size_t k = run_start; k < end; ++k) {
                if (k > run_start) span.text += ' ';
                span.text += tokens[k].text;
            }
            out.push_back(std::move(span));
        };
        for (std::size_t ti = 0; ti < tokens.size(); ++ti) {
            const Token& t = tokens[ti];
            bool candidate = false;
            if (t.is_word()) {
                const auto uppers = std::count_if(t.text.begin(), t.text.end(),
                                                  [](unsigned char c) { return is_upper(c); });
                const bool acronym = uppers >= 2;
                const bool capital = is_upper(static_cast<unsigned char>(t.text.front()));
                candidate = acronym || capital;
                if (candidate && !acronym && ti == first_word &&
                    (resources.stopwords.count(t.surface) > 0 || resources.common_words.count(t.surface) > 0)) {
                    candidate = false;
                }
            }
            if (candidate) {
                if (run_start == tokens.size()) run_start = ti;
            } else {
                close_run(ti);
                run_start = tokens.size();
            }
        }
        close_run(tokens.size());
    }
    return out;
}

std::size_t count_conjunctions(const ProcessedDoc& doc, const Lexicon& connectives) {
    return connectives.find_matches(doc).size();
}

}  // namespace stylo
