#pragma once

#include <Eigen/Core>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dictation_rag/sparse_index.hpp"

namespace dictation_rag {

using EmbeddingVector = Eigen::VectorXd;

class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string id() const = 0;
    virtual int dimension() const = 0;
    virtual EmbeddingVector embed(const std::string& text) = 0;
};

// Offline deterministic provider: hashed bag of tokens, L2-normalized.
// bucket = hash1(token) mod D, sign from the parity of hash2(token).
class HashedBagEmbedder final : public EmbeddingProvider {
public:
    explicit HashedBagEmbedder(int dimension = 256);
    std::string id() const override { return id_; }
    int dimension() const override { return dimension_; }
    EmbeddingVector embed(const std::string& text) override;

private:
    int dimension_;
    std::string id_;
};

struct RemoteEmbedderConfig {
    std::string base_url;
    std::string model;
    int dimension = 0;  // discovered from the first response when 0
    int max_retries = 3;
    int timeout_s = 60;
};

// OpenAI-compatible POST {base_url}/embeddings client.
class RemoteEmbedder final : public EmbeddingProvider {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig cfg);
    std::string id() const override;
    int dimension() const override { return cfg_.dimension; }
    EmbeddingVector embed(const std::string& text) override;

private:
    RemoteEmbedderConfig cfg_;
};

// JSONL-backed cache keyed by (provider id, content hash).
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::string path);
    EmbeddingVector get_or_compute(const std::string& text, EmbeddingProvider& provider);
    size_t size() const { return entries_.size(); }

private:
    std::string path_;
    std::map<std::string, EmbeddingVector> entries_;
};

double cosine(const EmbeddingVector& a, const EmbeddingVector& b);

class DenseIndex {
public:
    static DenseIndex build(const std::vector<std::pair<std::string, std::string>>& docs,
                            EmbeddingProvider& provider, EmbeddingCache* cache = nullptr);
    static DenseIndex from_vectors(const std::vector<std::pair<std::string, EmbeddingVector>>& entries);

    int dimension() const { return dimension_; }
    int size() const { return static_cast<int>(doc_ids_.size()); }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    const EmbeddingVector& vector_for(const std::string& doc_id) const;

private:
    std::vector<std::string> doc_ids_;
    std::map<std::string, EmbeddingVector> entries_;
    int dimension_ = 0;
};

std::vector<RetrievalHit> top_k_dense(const DenseIndex& index, const EmbeddingVector& query,
                                      int k);

}  // namespace dictation_rag
