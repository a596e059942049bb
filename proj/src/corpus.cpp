#include "stylo/corpus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "stylo/error.hpp"
#include "stylo/rng.hpp"

namespace stylo {

namespace {

std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(first, last - first + 1));
}

std::string row_prefix(std::size_t row) { return "row " + std::to_string(row) + ": "; }

Label parse_label(std::string_view raw, std::size_t row) {
    const std::string value = to_lower_ascii(trim(raw));
    if (value == "human") return Label::human;
    if (value == "generated") return Label::generated;
    throw ValidationError(row_prefix(row) + "unknown label '" + std::string(raw) + "'");
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw MissingArtifactError("cannot open corpus file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string json_string(const nlohmann::json& obj, const char* key, std::size_t row, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end() || it->is_null()) {
        if (required) throw ValidationError(row_prefix(row) + "missing key '" + key + "'");
        return {};
    }
    if (it->is_string()) return it->get<std::string>();
    if (it->is_number_integer()) return std::to_string(it->get<long long>());
    throw ValidationError(row_prefix(row) + "key '" + key + "' must be a string");
}

Document parse_json_row(std::string_view line, std::size_t row, const LoadOptions& options) {
    nlohmann::json obj;
    try {
        obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(row_prefix(row) + "malformed JSON (" + e.what() + ")");
    }
    if (!obj.is_object()) throw ValidationError(row_prefix(row) + "expected a JSON object");
    Document doc;
    doc.id = json_string(obj, "id", row, true);
    doc.title = json_string(obj, "title", row, true);
    doc.abstract = json_string(obj, "abstract", row, true);
    const std::string label = json_string(obj, "label", row, options.require_label);
    if (!label.empty() || options.require_label) doc.label = parse_label(label, row);
    doc.source = json_string(obj, "source", row, false);
    if (const auto it = obj.find("keywords"); it != obj.end() && !it->is_null()) {
        if (!it->is_array()) throw ValidationError(row_prefix(row) + "keywords must be an array");
        for (const auto& k : *it) {
            if (!k.is_string()) throw ValidationError(row_prefix(row) + "keywords must be strings");
            doc.keywords.push_back(k.get<std::string>());
        }
    }
    return doc;
}

}  // namespace

std::string_view label_name(Label label) { return label == Label::human ? "human" : "generated"; }

std::size_t Corpus::count(Label label) const {
    return static_cast<std::size_t>(std::count_if(documents.begin(), documents.end(),
                                                  [label](const Document& d) { return d.label == label; }));
}

CorpusFormat parse_corpus_format(std::string_view name) {
    if (name == "jsonl") return CorpusFormat::jsonl;
    if (name == "csv") return CorpusFormat::csv;
    throw ValidationError("unknown corpus format '" + std::string(name) + "' (expected jsonl or csv)");
}

void validate_document(const Document& doc, std::size_t row) {
    if (trim(doc.id).empty()) throw ValidationError(row_prefix(row) + "id is empty");
    if (trim(doc.abstract).empty()) throw ValidationError(row_prefix(row) + "abstract is empty");
}

std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t i = 0;
    if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") i = 3;  // BOM
    auto end_field = [&] {
        record.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_record = [&] {
        end_field();
        const bool blank = record.size() == 1 && record.front().empty();
        if (!blank) records.push_back(std::move(record));
        record.clear();
    };
    for (; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_record();
        } else if (c == '\r') {
            if (i + 1 < text.size() && text[i + 1] == '\n') continue;
            end_record();
        } else {
            field += c;
            field_started = true;
        }
    }
    if (in_quotes) throw ValidationError("unterminated quoted CSV field");
    if (field_started || !record.empty()) end_record();
    return records;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format, LoadOptions options) {
    if (!std::filesystem::exists(path)) throw MissingArtifactError("corpus file not found: " + path.string());
    const std::string content = read_file(path);
    Corpus corpus;
    corpus.labeled = options.require_label;
    std::vector<std::size_t> rows;

    if (format == CorpusFormat::jsonl) {
        std::size_t line_no = 0;
        std::istringstream in(content);
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            if (trim(line).empty()) continue;
            corpus.documents.push_back(parse_json_row(line, line_no, options));
            rows.push_back(line_no);
        }
    } else {
        const auto records = parse_csv(content);
        if (records.empty()) throw ValidationError("CSV corpus has no header row");
        const auto& header = records.front();
        auto column = [&](const char* name, bool required) -> std::ptrdiff_t {
            for (std::size_t c = 0; c < header.size(); ++c) {
                if (trim(header[c]) == name) return static_cast<std::ptrdiff_t>(c);
            }
            if (required) throw ValidationError(std::string("CSV header is missing column '") + name + "'");
            return -1;
        };
        const auto c_id = column("id", true);
        const auto c_title = column("title", true);
        const auto c_abstract = column("abstract", true);
        const auto c_label = column("label", options.require_label);
        const auto c_keywords = column("keywords", false);
        const auto c_source = column("source", false);
        for (std::size_t r = 1; r < records.size(); ++r) {
            const auto& rec = records[r];
            const std::size_t row = r;
            if (rec.size() != header.size()) {
                throw ValidationError(row_prefix(row) + "expected " + std::to_string(header.size()) +
                                      " fields, found " + std::to_string(rec.size()));
            }
            Document doc;
            doc.id = trim(rec[c_id]);
            doc.title = rec[c_title];
            doc.abstract = rec[c_abstract];
            if (c_label >= 0 && !(trim(rec[c_label]).empty() && !options.require_label)) {
                doc.label = parse_label(rec[c_label], row);
            }
            if (c_source >= 0) doc.source = rec[c_source];
            if (c_keywords >= 0) {
                std::istringstream kw(rec[c_keywords]);
                std::string k;
                while (std::getline(kw, k, ';')) {
                    if (!trim(k).empty()) doc.keywords.push_back(trim(k));
                }
            }
            corpus.documents.push_back(std::move(doc));
            rows.push_back(row);
        }
    }

    std::unordered_set<std::string> seen;
    for (std::size_t i = 0; i < corpus.documents.size(); ++i) {
        const auto& doc = corpus.documents[i];
        validate_document(doc, rows[i]);
        if (!seen.insert(doc.id).second) {
            throw ValidationError(row_prefix(rows[i]) + "duplicate id '" + doc.id + "'");
        }
    }
    return corpus;
}

CorpusStats corpus_stats(const Corpus& corpus, const TextProcessor& processor) {
    if (corpus.empty()) throw ValidationError("corpus is empty");
    CorpusStats stats;
    for (const auto& doc : corpus.documents) {
        ClassAggregate& agg = doc.label == Label::human ? stats.human : stats.generated;
        const ProcessedDoc pd = processor.process(doc.abstract);
        std::set<std::string> unique;
        agg.documents += 1;
        agg.sentence_count += pd.sentences.size();
        for (const auto& s : pd.sentences) {
            for (const auto& t : s.tokens) {
                if (!t.is_word()) continue;
                agg.word_count += 1;
                agg.stopword_count += t.is_stopword ? 1 : 0;
                unique.insert(t.surface);
            }
        }
        agg.unique_word_count += unique.size();
    }
    for (ClassAggregate* agg : {&stats.human, &stats.generated}) {
        agg->mean_sentence_length = agg->sentence_count == 0 ? 0.0
                                                             : static_cast<double>(agg->word_count) /
                                                                   static_cast<double>(agg->sentence_count);
    }
    return stats;
}

RatioTable ratio_report(const CorpusStats& stats) {
    if (stats.human.documents == 0) throw ValidationError("ratio report needs human documents");
    if (stats.generated.documents == 0) throw ValidationError("ratio report needs generated documents");
    const auto& h = stats.human;
    const auto& g = stats.generated;
    RatioTable table;
    auto add = [&](const char* metric, double hv, double gv) {
        if (gv == 0.0) throw ValidationError(std::string("zero denominator for metric '") + metric + "'");
        table.rows.push_back({metric, hv, gv, hv / gv});
    };
    add("# Sentences", h.per_document(h.sentence_count), g.per_document(g.sentence_count));
    add("# Words", h.per_document(h.word_count), g.per_document(g.word_count));
    add("# Unique Words", h.per_document(h.unique_word_count), g.per_document(g.unique_word_count));
    add("# Stopwords", h.per_document(h.stopword_count), g.per_document(g.stopword_count));
    add("Sentence Length", h.mean_sentence_length, g.mean_sentence_length);
    return table;
}

std::string RatioTable::render_text(std::string_view title) const {
    std::string out;
    char line[160];
    if (!title.empty()) out += std::string(title) + "\n";
    std::snprintf(line, sizeof line, "%-16s %12s %12s %10s\n", "Metric", "Human", "Generated", "Ratio");
    out += line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-16s %12.4f %12.4f %10.4f\n", r.metric.c_str(), r.human, r.generated,
                      r.ratio);
        out += line;
    }
    return out;
}

std::string RatioTable::render_csv() const {
    std::string out = "metric,human,generated,ratio\n";
    char line[160];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%s,%.6f,%.6f,%.6f\n", r.metric.c_str(), r.human, r.generated, r.ratio);
        out += line;
    }
    return out;
}

std::size_t FoldAssignment::fold(std::string_view id) const {
    const auto it = by_id.find(std::string(id));
    if (it == by_id.end()) throw ValidationError("id not in fold assignment: " + std::string(id));
    return it->second;
}

std::vector<std::size_t> FoldAssignment::test_rows(std::size_t f) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] == f) rows.push_back(i);
    }
    return rows;
}

std::vector<std::size_t> FoldAssignment::train_rows(std::size_t f) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < fold_of.size(); ++i) {
        if (fold_of[i] != f) rows.push_back(i);
    }
    return rows;
}

FoldAssignment split_stratified(std::span<const std::string> ids, std::span<const int> labels, std::size_t k,
                                std::uint64_t seed) {
    if (k < 2) throw ValidationError("fold count must be at least 2");
    if (ids.size() != labels.size()) throw ValidationError("ids and labels differ in length");
    std::array<std::vector<std::size_t>, 2> by_class;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) throw ValidationError("labels must be 0 or 1");
        by_class[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (int c = 0; c < 2; ++c) {
        if (by_class[c].size() < k) {
            throw ValidationError("class " + std::string(label_name(static_cast<Label>(c))) + " has " +
                                  std::to_string(by_class[c].size()) + " documents, fewer than k=" +
                                  std::to_string(k));
        }
    }
    FoldAssignment out;
    out.k = k;
    out.seed = seed;
    out.ids.assign(ids.begin(), ids.end());
    out.fold_of.assign(ids.size(), 0);
    Rng rng(seed);
    std::size_t position = 0;
    for (auto& members : by_class) {
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
        rng.shuffle(members);
        for (std::size_t m : members) {
            out.fold_of[m] = position % k;
            ++position;
        }
    }
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (!out.by_id.emplace(ids[i], out.fold_of[i]).second) {
            throw ValidationError("duplicate id in fold assignment: " + ids[i]);
        }
    }
    return out;
}

FoldAssignment split_stratified(const Corpus& corpus, std::size_t k, std::uint64_t seed) {
    std::vector<std::string> ids;
    std::vector<int> labels;
    for (const auto& d : corpus.documents) {
        ids.push_back(d.id);
        labels.push_back(static_cast<int>(d.label));
    }
    return split_stratified(ids, labels, k, seed);
}

std::string render_generation_prompt(std::string_view title, std::span<const std::string> keywords,
                                     std::size_t n_words) {
    if (trim(title).empty()) throw ValidationError("prompt title must not be empty");
    if (n_words == 0) throw ValidationError("prompt word count must be positive");
    std::string prompt = "Write a scientific abstract for the paper entitled " + trim(title);
    if (!keywords.empty()) {
        prompt += " using the keywords ";
        for (std::size_t i = 0; i < keywords.size(); ++i) {
            if (i > 0) prompt += ", ";
            prompt += keywords[i];
        }
    }
    prompt += ". Response length must contain at least " + std::to_string(n_words) + " tokens.";
    return prompt;
}

}  // namespace stylo
