#include "stylo/features.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "stylo/error.hpp"

namespace stylo {

std::string_view family_name(FeatureFamily family) {
    switch (family) {
        case FeatureFamily::sf: return "SF";
        case FeatureFamily::lf: return "LF";
        case FeatureFamily::hbh: return "HBH";
    }
    return "?";
}

namespace {

constexpr std::array<const char*, 4> kOverlapClasses = {"all", "content", "function", "entity"};
constexpr std::array<const char*, 2> kOverlapWindows = {"adj", "win2"};
constexpr std::array<const char*, 6> kOverlapStats = {"jaccard", "fwd", "bwd", "minnorm", "any", "repeat"};

std::string connective_short(LexiconCategory c) {
    std::string name(category_name(c));
    return name.substr(name.find('_') + 1);
}

}  // namespace

FeatureRegistry::FeatureRegistry() {
    auto add = [&](FeatureFamily f, std::string group, std::string id, std::string description) {
        entries_.push_back({std::move(id), f, std::move(group), std::move(description)});
    };
    const auto sf = FeatureFamily::sf;
    add(sf, "similarity", "sf_adj_cos_mean", "mean cosine of adjacent sentence embeddings");
    add(sf, "similarity", "sf_adj_cos_min", "min cosine of adjacent sentence embeddings");
    add(sf, "similarity", "sf_adj_cos_max", "max cosine of adjacent sentence embeddings");
    add(sf, "similarity", "sf_pair_cos_mean", "mean cosine over all sentence pairs");
    add(sf, "similarity", "sf_pair_cos_std", "population std of cosine over all sentence pairs");
    add(sf, "similarity", "sf_first_last_cos", "cosine of first and last sentence");
    add(sf, "similarity", "sf_title_cos_mean", "mean sentence-to-title cosine");
    add(sf, "similarity", "sf_title_cos_max", "max sentence-to-title cosine");
    add(sf, "entity", "sf_entity_distinct", "distinct entity surface forms");
    add(sf, "entity", "sf_entity_density", "entity mentions per 100 words");

    const auto lf = FeatureFamily::lf;
    for (const char* cls : kOverlapClasses) {
        for (const char* win : kOverlapWindows) {
            for (const char* stat : kOverlapStats) {
                add(lf, "overlap", std::string("lf_ovl_") + cls + "_" + win + "_" + stat,
                    std::string(stat) + " overlap of " + cls + " items, " +
                        (std::string(win) == "adj" ? "adjacent sentences" : "sentence vs next two"));
            }
        }
    }
    add(lf, "ttr", "lf_ttr_simple", "word types / word tokens");
    add(lf, "ttr", "lf_ttr_content", "content types / content tokens");
    add(lf, "ttr", "lf_ttr_function", "function types / function tokens");
    add(lf, "ttr", "lf_ttr_lemma", "lemma types / word tokens");
    add(lf, "ttr", "lf_ttr_bigram", "distinct lemma bigrams / bigrams");
    add(lf, "ttr", "lf_ttr_trigram", "distinct lemma trigrams / trigrams");
    add(lf, "ttr", "lf_ttr_root", "word types / sqrt(word tokens)");
    add(lf, "ttr", "lf_ttr_log", "log types / log tokens");
    add(lf, "ttr", "lf_ttr_mattr50", "moving-average TTR, window 50");
    add(lf, "ttr", "lf_ttr_lemma_density", "distinct lemmas per 100 words");
    add(lf, "ttr", "lf_ttr_hapax", "words occurring once / word tokens");
    add(lf, "ttr", "lf_word_length_mean", "mean word length in bytes");
    for (LexiconCategory c : kConnectiveCategories) {
        const std::string s = connective_short(c);
        add(lf, "connective", "lf_conn_" + s + "_count", s + " connective matches");
        add(lf, "connective", "lf_conn_" + s + "_density", s + " connectives per 100 words");
        add(lf, "connective", "lf_conn_" + s + "_initial", s + " connectives opening a sentence");
    }
    add(lf, "givenness", "lf_giv_pronoun_density", "pronouns per 100 words");
    add(lf, "givenness", "lf_giv_the_density", "definite articles per 100 words");
    add(lf, "givenness", "lf_giv_demonstrative_density", "demonstratives per 100 words");
    add(lf, "givenness", "lf_giv_repeat_content", "content tokens whose lemma occurred earlier");
    add(lf, "givenness", "lf_giv_pronoun_content_ratio", "pronouns / content tokens");
    add(lf, "givenness", "lf_giv_first_mention", "sentences introducing a new content lemma");
    add(lf, "givenness", "lf_giv_stopword_density", "stopwords per 100 words");
    add(lf, "givenness", "lf_giv_function_prop", "function tokens / word tokens");
    add(lf, "givenness", "lf_giv_words_per_sentence", "mean words per sentence");
    add(lf, "givenness", "lf_giv_sentence_length_std", "population std of words per sentence");
    add(lf, "cohesion", "lf_coh_centroid_cos_mean", "mean sentence-to-centroid cosine");
    add(lf, "cohesion", "lf_coh_centroid_cos_min", "min sentence-to-centroid cosine");
    add(lf, "cohesion", "lf_coh_centroid_cos_std", "std of sentence-to-centroid cosine");
    add(lf, "cohesion", "lf_coh_adj_tf_cos_mean", "mean adjacent lemma-count cosine");
    add(lf, "cohesion", "lf_coh_centroid_norm", "norm of the mean sentence embedding");
    add(lf, "cohesion", "lf_coh_adj_above_half", "adjacent pairs with embedding cosine above 0.5");
    add(lf, "cohesion", "lf_coh_adj_gap_max", "max of 1 - adjacent embedding cosine");
    add(lf, "cohesion", "lf_coh_pair_tf_cos_mean", "mean lemma-count cosine over all sentence pairs");

    const auto hbh = FeatureFamily::hbh;
    add(hbh, "device", "hedge_density", "hedge matches per 100 words");
    add(hbh, "device", "booster_density", "booster matches per 100 words");
    add(hbh, "device", "hype_density", "hype lemma matches per 100 words");

    std::size_t counts[3] = {0, 0, 0};
    std::set<std::string> seen;
    for (const auto& e : entries_) {
        ++counts[static_cast<int>(e.family)];
        if (!seen.insert(e.id).second) throw RuntimeFailure("feature registry: duplicate id " + e.id);
    }
    if (counts[0] != kSemanticCount || counts[1] != kLinguisticCount || counts[2] != kDeviceCount) {
        throw RuntimeFailure("feature registry: family sizes " + std::to_string(counts[0]) + "/" +
                             std::to_string(counts[1]) + "/" + std::to_string(counts[2]) + " do not match 10/102/3");
    }
}

const FeatureRegistry& FeatureRegistry::instance() {
    static const FeatureRegistry registry;
    return registry;
}

std::vector<std::string> FeatureRegistry::ids() const {
    std::vector<std::string> out;
    for (const auto& e : entries_) out.push_back(e.id);
    return out;
}

std::vector<std::string> FeatureRegistry::ids(FeatureFamily family) const {
    std::vector<std::string> out;
    for (const auto& e : entries_) {
        if (e.family == family) out.push_back(e.id);
    }
    return out;
}

const FeatureInfo* FeatureRegistry::find(std::string_view id) const {
    for (const auto& e : entries_) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

std::string FeatureSetTag::name() const {
    switch (kind) {
        case Kind::sf: return "sf";
        case Kind::lf: return "lf";
        case Kind::hbh: return "hbh";
        case Kind::all: return "all";
        case Kind::topk: return "topk:" + std::to_string(k);
    }
    return "?";
}

std::vector<std::string> FeatureSetTag::base_ids() const {
    const auto& reg = FeatureRegistry::instance();
    switch (kind) {
        case Kind::sf: return reg.ids(FeatureFamily::sf);
        case Kind::lf: return reg.ids(FeatureFamily::lf);
        case Kind::hbh: return reg.ids(FeatureFamily::hbh);
        default: return reg.ids();
    }
}

FeatureSetTag parse_feature_set(std::string_view text) {
    FeatureSetTag tag;
    if (text == "sf") {
        tag.kind = FeatureSetTag::Kind::sf;
    } else if (text == "lf") {
        tag.kind = FeatureSetTag::Kind::lf;
    } else if (text == "hbh") {
        tag.kind = FeatureSetTag::Kind::hbh;
    } else if (text == "all") {
        tag.kind = FeatureSetTag::Kind::all;
    } else if (text.starts_with("topk:")) {
        const std::string n(text.substr(5));
        std::size_t pos = 0;
        long long k = 0;
        try {
            k = std::stoll(n, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos == 0 || pos != n.size() || k < 1 || k > static_cast<long long>(kFeatureCount)) {
            throw ValidationError("feature set '" + std::string(text) + "': N must be an integer in [1, 115]");
        }
        tag.kind = FeatureSetTag::Kind::topk;
        tag.k = static_cast<std::size_t>(k);
    } else {
        throw ValidationError("unknown feature set '" + std::string(text) + "' (expected sf, lf, hbh, all or topk:N)");
    }
    return tag;
}

// ---- per-document computation ----------------------------------------------

namespace {

double ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

struct Moments {
    double mean = 0.0, min = 0.0, max = 0.0, std = 0.0;
};

Moments moments(const std::vector<double>& xs) {
    Moments m;
    if (xs.empty()) return m;
    m.min = *std::min_element(xs.begin(), xs.end());
    m.max = *std::max_element(xs.begin(), xs.end());
    for (double x : xs) m.mean += x;
    m.mean /= static_cast<double>(xs.size());
    for (double x : xs) m.std += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(m.std / static_cast<double>(xs.size()));
    return m;
}

using Counts = std::map<std::string, double>;

double sparse_cosine(const Counts& a, const Counts& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (const auto& [k, v] : a) {
        na += v * v;
        const auto it = b.find(k);
        if (it != b.end()) dot += v * it->second;
    }
    for (const auto& [k, v] : b) nb += v * v;
    if (na == 0.0 || nb == 0.0) return 0.0;
    return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

// Item lists per sentence for one overlap class.
using SentenceItems = std::vector<std::vector<std::string>>;

std::array<double, 6> overlap_stats(const SentenceItems& items, bool window2) {
    std::array<double, 6> sum{};
    const std::size_t n = items.size();
    if (n < 2) return sum;
    std::size_t pairs = 0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::set<std::string> a(items[i].begin(), items[i].end());
        std::vector<std::string> b_tokens = items[i + 1];
        if (window2 && i + 2 < n) b_tokens.insert(b_tokens.end(), items[i + 2].begin(), items[i + 2].end());
        const std::set<std::string> b(b_tokens.begin(), b_tokens.end());
        std::size_t inter = 0;
        for (const auto& x : a) inter += b.count(x);
        const double ni = static_cast<double>(inter);
        const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
        std::size_t repeated = 0;
        for (const auto& x : b_tokens) repeated += a.count(x);
        sum[0] += ratio(ni, na + nb - ni);
        sum[1] += ratio(ni, na);
        sum[2] += ratio(ni, nb);
        sum[3] += ratio(ni, std::min(na, nb));
        sum[4] += inter > 0 ? 1.0 : 0.0;
        sum[5] += ratio(static_cast<double>(repeated), static_cast<double>(b_tokens.size()));
        ++pairs;
    }
    for (double& s : sum) s /= static_cast<double>(pairs);
    return sum;
}

double distinct_ratio(const std::vector<std::string>& xs) {
    const std::set<std::string> types(xs.begin(), xs.end());
    return ratio(static_cast<double>(types.size()), static_cast<double>(xs.size()));
}

bool is_sentence_boundary_punct(const Token& t) { return t.text == "." || t.text == "!" || t.text == "?"; }

}  // namespace

FeatureExtractor::FeatureExtractor(const LexiconSet& lexicons, const EmbeddingProvider& provider)
    : lexicons_(lexicons), provider_(provider), processor_(lexicons.text_resources()) {}

std::vector<EmbeddingVector> FeatureExtractor::sentence_vectors(const ProcessedDoc& doc) const {
    std::vector<std::string> texts;
    for (std::size_t i = 0; i < doc.sentences.size(); ++i) texts.emplace_back(doc.sentence_text(i));
    if (texts.empty()) return {};
    return provider_.embed(texts);
}

std::array<double, kSemanticCount> FeatureExtractor::semantic(const ProcessedDoc& doc, std::string_view title,
                                                              ExtractionMeta* meta,
                                                              const std::vector<EmbeddingVector>* precomputed) const {
    std::array<double, kSemanticCount> f{};
    const auto vecs = precomputed != nullptr ? *precomputed : sentence_vectors(doc);
    const std::size_t n = vecs.size();
    bool empty_embedding = false;
    for (const auto& v : vecs) empty_embedding = empty_embedding || v.empty_input;

    if (n >= 2) {
        std::vector<double> adj, pairs;
        for (std::size_t i = 0; i + 1 < n; ++i) adj.push_back(cosine(vecs[i], vecs[i + 1]));
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) pairs.push_back(cosine(vecs[i], vecs[j]));
        }
        const auto ma = moments(adj);
        const auto mp = moments(pairs);
        f[0] = ma.mean;
        f[1] = ma.min;
        f[2] = ma.max;
        f[3] = mp.mean;
        f[4] = mp.std;
        f[5] = cosine(vecs.front(), vecs.back());
    }

    bool pseudo = false;
    std::string title_text(title);
    if (title_text.find_first_not_of(" \t\r\n") == std::string::npos) {
        pseudo = true;
        title_text = n > 0 ? std::string(doc.sentence_text(0)) : std::string{};
    }
    if (n > 0 && !title_text.empty()) {
        const std::vector<std::string> one{title_text};
        const auto tv = provider_.embed(one);
        std::vector<double> sims;
        for (const auto& v : vecs) sims.push_back(cosine(v, tv.front()));
        const auto ms = moments(sims);
        f[6] = ms.mean;
        f[7] = ms.max;
        empty_embedding = empty_embedding || tv.front().empty_input;
    }

    std::set<std::string> distinct;
    for (const auto& e : doc.entities) distinct.insert(e.text);
    f[8] = static_cast<double>(distinct.size());
    f[9] = ratio(100.0 * static_cast<double>(doc.entities.size()), static_cast<double>(doc.word_count()));

    if (meta != nullptr) {
        meta->degenerate = meta->degenerate || n < 2;
        meta->pseudo_title = pseudo;
        meta->empty_embedding = meta->empty_embedding || empty_embedding;
    }
    return f;
}

std::vector<double> FeatureExtractor::linguistic(const ProcessedDoc& doc, ExtractionMeta* meta,
                                                 const std::vector<EmbeddingVector>* precomputed) const {
    std::vector<double> f;
    f.reserve(kLinguisticCount);
    const std::size_t n = doc.sentences.size();
    const double words = static_cast<double>(doc.word_count());

    // Entity tokens per sentence.
    std::vector<std::vector<char>> in_entity(n);
    for (std::size_t s = 0; s < n; ++s) in_entity[s].assign(doc.sentences[s].tokens.size(), 0);
    for (const auto& e : doc.entities) {
        for (std::size_t t = e.first; t < e.last; ++t) in_entity[e.sentence][t] = 1;
    }

    SentenceItems all(n), content(n), function(n), entity(n);
    std::vector<std::string> surfaces, content_surfaces, function_surfaces, lemmas;
    std::vector<std::vector<std::string>> sentence_lemmas(n);
    std::vector<double> sentence_words(n, 0.0);
    double word_bytes = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const auto& tokens = doc.sentences[s].tokens;
        for (std::size_t t = 0; t < tokens.size(); ++t) {
            const Token& tok = tokens[t];
            if (!tok.is_word()) continue;
            all[s].push_back(tok.lemma);
            sentence_lemmas[s].push_back(tok.lemma);
            surfaces.push_back(tok.surface);
            lemmas.push_back(tok.lemma);
            word_bytes += static_cast<double>(tok.surface.size());
            sentence_words[s] += 1.0;
            if (tok.word_class == WordClass::content) {
                content[s].push_back(tok.lemma);
                content_surfaces.push_back(tok.surface);
            } else {
                function[s].push_back(tok.lemma);
                function_surfaces.push_back(tok.surface);
            }
            if (in_entity[s][t]) entity[s].push_back(tok.surface);
        }
    }

    // (a) lexical overlap, 48
    for (const SentenceItems* items : {&all, &content, &function, &entity}) {
        for (bool window2 : {false, true}) {
            const auto stats = overlap_stats(*items, window2);
            f.insert(f.end(), stats.begin(), stats.end());
        }
    }

    // (b) type-token, 12
    const double tokens = static_cast<double>(surfaces.size());
    const double types = static_cast<double>(std::set<std::string>(surfaces.begin(), surfaces.end()).size());
    std::vector<std::string> bigrams, trigrams;
    for (const auto& sl : sentence_lemmas) {
        for (std::size_t i = 0; i + 1 < sl.size(); ++i) bigrams.push_back(sl[i] + ' ' + sl[i + 1]);
        for (std::size_t i = 0; i + 2 < sl.size(); ++i) trigrams.push_back(sl[i] + ' ' + sl[i + 1] + ' ' + sl[i + 2]);
    }
    double mattr = 0.0;
    constexpr std::size_t kWindow = 50;
    if (surfaces.size() <= kWindow) {
        mattr = distinct_ratio(surfaces);
    } else {
        std::unordered_map<std::string, int> window;
        for (std::size_t i = 0; i < kWindow; ++i) ++window[surfaces[i]];
        double sum = static_cast<double>(window.size());
        for (std::size_t i = kWindow; i < surfaces.size(); ++i) {
            if (--window[surfaces[i - kWindow]] == 0) window.erase(surfaces[i - kWindow]);
            ++window[surfaces[i]];
            sum += static_cast<double>(window.size());
        }
        mattr = sum / (static_cast<double>(surfaces.size() - kWindow + 1) * static_cast<double>(kWindow));
    }
    std::unordered_map<std::string, int> freq;
    for (const auto& s : surfaces) ++freq[s];
    std::size_t hapax = 0;
    for (const auto& [w, c] : freq) hapax += c == 1 ? 1 : 0;
    const double lemma_types = static_cast<double>(std::set<std::string>(lemmas.begin(), lemmas.end()).size());
    f.push_back(ratio(types, tokens));
    f.push_back(distinct_ratio(content_surfaces));
    f.push_back(distinct_ratio(function_surfaces));
    f.push_back(ratio(lemma_types, tokens));
    f.push_back(distinct_ratio(bigrams));
    f.push_back(distinct_ratio(trigrams));
    f.push_back(ratio(types, std::sqrt(tokens)));
    f.push_back(tokens >= 2.0 ? std::log(types) / std::log(tokens) : 0.0);
    f.push_back(mattr);
    f.push_back(ratio(100.0 * lemma_types, tokens));
    f.push_back(ratio(static_cast<double>(hapax), tokens));
    f.push_back(ratio(word_bytes, tokens));

    // (c) connectives, 24
    for (LexiconCategory c : kConnectiveCategories) {
        const auto matches = lexicons_.get(c).find_matches(doc);
        std::size_t initial = 0;
        for (const auto& m : matches) {
            const auto& toks = doc.sentences[m.sentence].tokens;
            // Opening word of the sentence, or the first word after a bare
            // sentence-final mark that the segmenter did not split on.
            bool opens = true;
            for (std::size_t t = m.first_token; t-- > 0;) {
                if (toks[t].is_word()) {
                    opens = false;
                    break;
                }
                if (is_sentence_boundary_punct(toks[t])) break;
            }
            initial += opens ? 1 : 0;
        }
        const double count = static_cast<double>(matches.size());
        f.push_back(count);
        f.push_back(ratio(100.0 * count, words));
        f.push_back(static_cast<double>(initial));
    }

    // (d) givenness, 10
    const double pronouns = static_cast<double>(match_count(doc, lexicons_.get(LexiconCategory::pronoun)).count);
    const double demonstratives =
        static_cast<double>(match_count(doc, lexicons_.get(LexiconCategory::demonstrative)).count);
    double the = 0.0, stop = 0.0, repeated = 0.0, first_mention = 0.0;
    std::unordered_set<std::string> seen_content;
    for (std::size_t s = 0; s < n; ++s) {
        bool introduces = false;
        for (const Token& tok : doc.sentences[s].tokens) {
            if (!tok.is_word()) continue;
            the += tok.surface == "the" ? 1.0 : 0.0;
            stop += tok.is_stopword ? 1.0 : 0.0;
        }
        for (const auto& l : content[s]) {
            if (seen_content.count(l)) {
                repeated += 1.0;
            } else {
                introduces = true;
            }
        }
        seen_content.insert(content[s].begin(), content[s].end());
        first_mention += introduces ? 1.0 : 0.0;
    }
    const double content_tokens = static_cast<double>(content_surfaces.size());
    const auto length = moments(sentence_words);
    f.push_back(ratio(100.0 * pronouns, words));
    f.push_back(ratio(100.0 * the, words));
    f.push_back(ratio(100.0 * demonstratives, words));
    f.push_back(ratio(repeated, content_tokens));
    f.push_back(ratio(pronouns, content_tokens));
    f.push_back(ratio(first_mention, static_cast<double>(n)));
    f.push_back(ratio(100.0 * stop, words));
    f.push_back(ratio(static_cast<double>(function_surfaces.size()), words));
    f.push_back(length.mean);
    f.push_back(length.std);

    // (e) cohesion, 8
    std::array<double, 8> coh{};
    const auto vecs = precomputed != nullptr ? *precomputed : sentence_vectors(doc);
    if (!vecs.empty()) {
        std::vector<double> centroid(vecs.front().dim(), 0.0);
        for (const auto& v : vecs) {
            for (std::size_t i = 0; i < centroid.size(); ++i) centroid[i] += v.values[i];
        }
        double norm = 0.0;
        for (double& c : centroid) {
            c /= static_cast<double>(vecs.size());
            norm += c * c;
        }
        coh[4] = std::sqrt(norm);
        if (n >= 2) {
            std::vector<double> to_centroid, adj;
            for (const auto& v : vecs) to_centroid.push_back(cosine(v.values, centroid));
            for (std::size_t i = 0; i + 1 < n; ++i) adj.push_back(cosine(vecs[i], vecs[i + 1]));
            const auto mc = moments(to_centroid);
            coh[0] = mc.mean;
            coh[1] = mc.min;
            coh[2] = mc.std;
            std::vector<Counts> tf(n);
            for (std::size_t s = 0; s < n; ++s) {
                for (const auto& l : sentence_lemmas[s]) tf[s][l] += 1.0;
            }
            double adj_tf = 0.0, pair_tf = 0.0, above = 0.0, gap = 0.0;
            for (std::size_t i = 0; i + 1 < n; ++i) {
                adj_tf += sparse_cosine(tf[i], tf[i + 1]);
                above += adj[i] > 0.5 ? 1.0 : 0.0;
                gap = std::max(gap, 1.0 - adj[i]);
            }
            std::size_t pairs = 0;
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = i + 1; j < n; ++j, ++pairs) pair_tf += sparse_cosine(tf[i], tf[j]);
            }
            coh[3] = adj_tf / static_cast<double>(n - 1);
            coh[5] = above / static_cast<double>(n - 1);
            coh[6] = gap;
            coh[7] = pair_tf / static_cast<double>(pairs);
        }
    }
    f.insert(f.end(), coh.begin(), coh.end());

    if (meta != nullptr) meta->degenerate = meta->degenerate || n < 2;
    if (f.size() != kLinguisticCount) {
        throw RuntimeFailure("linguistic features: produced " + std::to_string(f.size()) + " values");
    }
    return f;
}

std::array<double, kDeviceCount> FeatureExtractor::devices(const ProcessedDoc& doc) const {
    return hbh_features(doc, lexicons_.get(LexiconCategory::hedge), lexicons_.get(LexiconCategory::booster),
                        lexicons_.get(LexiconCategory::hype));
}

std::vector<double> FeatureExtractor::extract(const Document& doc, ExtractionMeta* meta) const {
    const ProcessedDoc processed = processor_.process(doc.abstract);
    std::vector<double> out;
    out.reserve(kFeatureCount);
    const auto vecs = sentence_vectors(processed);
    const auto sf = semantic(processed, doc.title, meta, &vecs);
    out.insert(out.end(), sf.begin(), sf.end());
    const auto lf = linguistic(processed, meta, &vecs);
    out.insert(out.end(), lf.begin(), lf.end());
    const auto hbh = devices(processed);
    out.insert(out.end(), hbh.begin(), hbh.end());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!std::isfinite(out[i])) {
            throw RuntimeFailure("document " + doc.id + ": non-finite value for " +
                                 FeatureRegistry::instance().entries()[i].id);
        }
    }
    return out;
}

FeatureMatrix extract_matrix(const Corpus& corpus, std::span<const std::string> selection,
                             const FeatureExtractor& extractor, Execution execution) {
    if (corpus.empty()) throw ValidationError("feature extraction: corpus is empty");
    const auto& reg = FeatureRegistry::instance();
    std::vector<std::size_t> columns;
    {
        std::unordered_map<std::string, std::size_t> pos;
        for (std::size_t i = 0; i < reg.size(); ++i) pos.emplace(reg.entries()[i].id, i);
        std::vector<std::size_t> picked;
        for (const auto& id : selection) {
            const auto it = pos.find(id);
            if (it == pos.end()) throw ValidationError("feature '" + id + "' is not in the registry");
            picked.push_back(it->second);
        }
        std::sort(picked.begin(), picked.end());
        picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
        columns = std::move(picked);  // registry order
    }

    const std::size_t rows = corpus.size();
    FeatureMatrix out;
    out.provider = extractor.provider().provenance();
    out.meta.resize(rows);
    auto& data = out.data;
    data.rows = rows;
    data.cols = columns.size();
    data.values.assign(rows * columns.size(), 0.0);
    data.registry_version = std::string(reg.version());
    for (std::size_t c : columns) data.feature_ids.push_back(reg.entries()[c].id);
    for (const auto& d : corpus.documents) {
        data.row_ids.push_back(d.id);
        data.labels.push_back(static_cast<int>(d.label));
    }

    std::vector<std::string> failures(rows);
    const long long n = static_cast<long long>(rows);
    const bool parallel = execution == Execution::parallel;
#pragma omp parallel for schedule(dynamic) if (parallel)
    for (long long i = 0; i < n; ++i) {
        const auto r = static_cast<std::size_t>(i);
        try {
            const auto full = extractor.extract(corpus.documents[r], &out.meta[r]);
            for (std::size_t c = 0; c < columns.size(); ++c) data.values[r * columns.size() + c] = full[columns[c]];
        } catch (const std::exception& e) {
            failures[r] = e.what();
        }
    }
    std::string message;
    std::size_t failed = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        if (failures[r].empty()) continue;
        if (failed < 5) message += "\n  " + corpus.documents[r].id + ": " + failures[r];
        ++failed;
    }
    if (failed > 0) {
        std::string ids;
        for (std::size_t r = 0; r < rows; ++r) {
            if (!failures[r].empty()) ids += (ids.empty() ? "" : ", ") + corpus.documents[r].id;
        }
        throw RuntimeFailure("feature extraction failed for " + std::to_string(failed) + " document(s): " + ids +
                             message);
    }
    return out;
}

std::string feature_csv(const Dataset& data) {
    std::string out = "doc_id,label";
    for (const auto& id : data.feature_ids) out += "," + id;
    out += "\n";
    char buf[64];
    for (std::size_t r = 0; r < data.rows; ++r) {
        std::string id = data.row_ids.empty() ? "r" + std::to_string(r) : data.row_ids[r];
        if (id.find_first_of(",\"\n") != std::string::npos) {
            std::string quoted = "\"";
            for (char ch : id) {
                if (ch == '"') quoted += '"';
                quoted += ch;
            }
            id = quoted + "\"";
        }
        out += id + "," + std::to_string(data.labels[r]);
        for (std::size_t c = 0; c < data.cols; ++c) {
            std::snprintf(buf, sizeof buf, ",%.9g", data.at(r, c));
            out += buf;
        }
        out += "\n";
    }
    return out;
}

void write_feature_csv(const Dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw RuntimeFailure("cannot write " + path.string());
    out << feature_csv(data);
}

Dataset read_feature_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("feature matrix not found: " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    const auto records = parse_csv(buf.str());
    if (records.empty() || records[0].size() < 2 || records[0][0] != "doc_id" || records[0][1] != "label") {
        throw ValidationError(path.string() + ": header must start with doc_id,label");
    }
    Dataset d;
    d.feature_ids.assign(records[0].begin() + 2, records[0].end());
    d.cols = d.feature_ids.size();
    bool all_registered = true;
    for (const auto& id : d.feature_ids) all_registered = all_registered && FeatureRegistry::instance().find(id);
    if (all_registered) d.registry_version = std::string(FeatureRegistry::instance().version());
    for (std::size_t r = 1; r < records.size(); ++r) {
        const auto& rec = records[r];
        if (rec.size() == 1 && rec[0].empty()) continue;
        if (rec.size() != d.cols + 2) {
            throw ValidationError(path.string() + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                                  " cells, expected " + std::to_string(d.cols + 2));
        }
        d.row_ids.push_back(rec[0]);
        if (rec[1] != "0" && rec[1] != "1") {
            throw ValidationError(path.string() + ": row " + std::to_string(r) + " has label '" + rec[1] + "'");
        }
        d.labels.push_back(rec[1] == "1" ? 1 : 0);
        for (std::size_t c = 0; c < d.cols; ++c) {
            const std::string& cell = rec[c + 2];
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (cell.empty() || end != cell.c_str() + cell.size()) {
                throw ValidationError(path.string() + ": row " + std::to_string(r) + ", column '" + d.feature_ids[c] +
                                      "' is not a number");
            }
            d.values.push_back(v);
        }
        ++d.rows;
    }
    d.validate(false);
    return d;
}

}  // namespace stylo
