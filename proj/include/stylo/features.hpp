#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "stylo/corpus.hpp"
#include "stylo/dataset.hpp"
#include "stylo/embeddings.hpp"
#include "stylo/lexicons.hpp"
#include "stylo/model.hpp"

namespace stylo {

enum class FeatureFamily { sf, lf, hbh };

std::string_view family_name(FeatureFamily family);

struct FeatureInfo {
    std::string id;
    FeatureFamily family = FeatureFamily::lf;
    std::string group;  // overlap, ttr, connective, givenness, cohesion, similarity, entity, device
    std::string description;
};

inline constexpr std::size_t kSemanticCount = 10;
inline constexpr std::size_t kLinguisticCount = 102;
inline constexpr std::size_t kDeviceCount = 3;
inline constexpr std::size_t kFeatureCount = kSemanticCount + kLinguisticCount + kDeviceCount;

/// Fixed, ordered manifest of the 115 features: SF first, then LF, then HBH.
class FeatureRegistry {
public:
    static const FeatureRegistry& instance();

    const std::vector<FeatureInfo>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    std::vector<std::string> ids() const;
    std::vector<std::string> ids(FeatureFamily family) const;
    const FeatureInfo* find(std::string_view id) const;
    std::string_view version() const { return "stylo-features/1.0"; }

private:
    FeatureRegistry();
    std::vector<FeatureInfo> entries_;
};

/// sf, lf, hbh, all, or topk:N (top-N by in-fold GBT gain over all 115).
struct FeatureSetTag {
    enum class Kind { sf, lf, hbh, all, topk } kind = Kind::all;
    std::size_t k = 0;

    std::string name() const;
    /// Base columns before any top-k selection.
    std::vector<std::string> base_ids() const;
};

FeatureSetTag parse_feature_set(std::string_view text);

struct ExtractionMeta {
    bool degenerate = false;    // fewer than two sentences: pairwise features are 0
    bool pseudo_title = false;  // no title, first sentence stood in
    bool empty_embedding = false;
};

class FeatureExtractor {
public:
    FeatureExtractor(const LexiconSet& lexicons, const EmbeddingProvider& provider);

    /// All 115 values in registry order.
    std::vector<double> extract(const Document& doc, ExtractionMeta* meta = nullptr) const;

    /// `sentence_vectors` may carry precomputed embeddings of doc's sentences.
    std::array<double, kSemanticCount> semantic(const ProcessedDoc& doc, std::string_view title,
                                                ExtractionMeta* meta = nullptr,
                                                const std::vector<EmbeddingVector>* sentence_vectors = nullptr) const;
    std::vector<double> linguistic(const ProcessedDoc& doc, ExtractionMeta* meta = nullptr,
                                   const std::vector<EmbeddingVector>* sentence_vectors = nullptr) const;
    std::array<double, kDeviceCount> devices(const ProcessedDoc& doc) const;

    const TextProcessor& processor() const { return processor_; }
    const EmbeddingProvider& provider() const { return provider_; }

private:
    std::vector<EmbeddingVector> sentence_vectors(const ProcessedDoc& doc) const;

    const LexiconSet& lexicons_;
    const EmbeddingProvider& provider_;
    TextProcessor processor_;
};

struct FeatureMatrix {
    Dataset data;  // row_ids are document ids; labels 0/1 (0 for unlabeled input)
    std::vector<ExtractionMeta> meta;
    std::string provider;
};

/// Row order follows the corpus, column order follows the registry. Documents
/// are processed concurrently under Execution::parallel; a provider failure is
/// collected and the call throws at the end naming every affected document.
FeatureMatrix extract_matrix(const Corpus& corpus, std::span<const std::string> selection,
                             const FeatureExtractor& extractor, Execution execution = Execution::parallel);

/// doc_id,label,<feature ids...>; values with 9 significant digits.
std::string feature_csv(const Dataset& data);
void write_feature_csv(const Dataset& data, const std::filesystem::path& path);
Dataset read_feature_csv(const std::filesystem::path& path);

}  // namespace stylo
