#pragma once

#include <string>
#include <vector>

#include "dictation_rag/dense_index.hpp"
#include "dictation_rag/memory_bank.hpp"
#include "dictation_rag/ontology.hpp"
#include "dictation_rag/sparse_index.hpp"

namespace dictation_rag {

struct FusionConfig {
    double alpha = 0.5;               // lexical weight
    int candidate_pool_multiplier = 4;  // over-fetch factor per component retriever
};

// (s - min)/(max - min); degenerate lists (max == min) map to all 1.0.
std::vector<RetrievalHit> min_max_normalize(std::vector<RetrievalHit> hits);

// Convex combination of the min-max normalized component scores. A doc
// missing from one list contributes 0 for that component.
std::vector<RetrievalHit> fuse(const std::vector<RetrievalHit>& lexical,
                               const std::vector<RetrievalHit>& dense, double alpha, int k);

// Hybrid retriever over the ontology: TF-IDF + dense over the formatted
// schema strings. Built once, queried per segment.
class SchemaRetriever {
public:
    SchemaRetriever(std::vector<Schema> schemas, EmbeddingProvider& provider,
                    FusionConfig config = {}, EmbeddingCache* cache = nullptr);

    std::vector<Schema> retrieve(const std::string& segment_text, int n = 10) const;
    std::vector<RetrievalHit> retrieve_hits(const std::string& segment_text, int n) const;
    const Schema& schema_by_id(const std::string& id) const;
    const std::vector<Schema>& schemas() const { return schemas_; }
    int pool_size() const { return static_cast<int>(schemas_.size()); }

private:
    std::vector<Schema> schemas_;
    SparseIndex sparse_;
    DenseIndex dense_;
    EmbeddingProvider& provider_;
    FusionConfig config_;
};

// Hybrid retriever over the memory bank: BM25 + dense over entry segments.
class ExampleRetriever {
public:
    ExampleRetriever(std::vector<MemoryEntry> bank, EmbeddingProvider& provider,
                     FusionConfig config = {}, EmbeddingCache* cache = nullptr);

    // Empty bank yields an empty list (zero-shot degradation, no error).
    std::vector<MemoryEntry> retrieve(const std::string& segment_text, int k = 15) const;
    std::vector<RetrievalHit> retrieve_hits(const std::string& segment_text, int k) const;
    int pool_size() const { return static_cast<int>(bank_.size()); }

private:
    std::vector<MemoryEntry> bank_;
    SparseIndex sparse_;
    DenseIndex dense_;
    EmbeddingProvider& provider_;
    FusionConfig config_;
};

}  // namespace dictation_rag
