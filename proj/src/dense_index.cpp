#include "dictation_rag/dense_index.hpp"

#include <algorithm>
#include <fstream>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace dictation_rag {

using nlohmann::json;

namespace {
// fixed seeds so fixture embeddings never drift across builds
constexpr std::uint64_t kBucketSeed = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t kSignSeed = 0xc2b2ae3d27d4eb4fULL;
}  // namespace

HashedBagEmbedder::HashedBagEmbedder(int dimension)
    : dimension_(dimension), id_("hashed-bag-d" + std::to_string(dimension)) {}

EmbeddingVector HashedBagEmbedder::embed(const std::string& text) {
    EmbeddingVector v = EmbeddingVector::Zero(dimension_);
    auto tokens = tokenize(text);
    if (tokens.empty()) return v;
    for (const auto& t : tokens) {
        const auto bucket = static_cast<Eigen::Index>(fnv1a64(t, kBucketSeed) % dimension_);
        const double sign = (fnv1a64(t, kSignSeed) % 2 == 0) ? 1.0 : -1.0;
        v[bucket] += sign;
    }
    const double norm = v.norm();
    if (norm > 0.0) v /= norm;
    return v;
}

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig cfg) : cfg_(std::move(cfg)) {}

std::string RemoteEmbedder::id() const { return "remote:" + cfg_.model; }

EmbeddingVector RemoteEmbedder::embed(const std::string& text) {
    httplib::Client client(cfg_.base_url);
    client.set_read_timeout(cfg_.timeout_s, 0);
    json body = {{"model", cfg_.model}, {"input", json::array({text})}};
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
        auto res = client.Post("/embeddings", body.dump(), "application/json");
        if (res && res->status == 200) {
            json resp = json::parse(res->body, nullptr, false);
            if (resp.is_discarded() || !resp.contains("data") || resp["data"].empty())
                throw ProviderUnavailable("embedding response malformed");
            auto values = resp["data"][0]["embedding"].get<std::vector<double>>();
            if (cfg_.dimension == 0) cfg_.dimension = static_cast<int>(values.size());
            return Eigen::Map<EmbeddingVector>(values.data(),
                                               static_cast<Eigen::Index>(values.size()));
        }
        last_error = res ? "HTTP " + std::to_string(res->status) : "transport failure";
    }
    throw ProviderUnavailable("embedding provider failed after retries: " + last_error);
}

EmbeddingCache::EmbeddingCache(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("key") || !rec.contains("vector")) continue;
        auto values = rec["vector"].get<std::vector<double>>();
        entries_[rec["key"].get<std::string>()] =
            Eigen::Map<EmbeddingVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    }
}

EmbeddingVector EmbeddingCache::get_or_compute(const std::string& text,
                                               EmbeddingProvider& provider) {
    char key[64];
    std::snprintf(key, sizeof key, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    const std::string full_key = provider.id() + ":" + key;
    auto it = entries_.find(full_key);
    if (it != entries_.end()) return it->second;

    EmbeddingVector v = provider.embed(text);
    entries_[full_key] = v;
    std::ofstream out(path_, std::ios::app);
    if (out) {
        json rec;
        rec["key"] = full_key;
        rec["vector"] = std::vector<double>(v.data(), v.data() + v.size());
        out << rec.dump() << '\n';
    }
    return v;
}

double cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) throw DimensionMismatch(a.size(), b.size());
    const double na = a.norm(), nb = b.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return a.dot(b) / (na * nb);
}

DenseIndex DenseIndex::build(const std::vector<std::pair<std::string, std::string>>& docs,
                             EmbeddingProvider& provider, EmbeddingCache* cache) {
    std::vector<std::pair<std::string, EmbeddingVector>> entries;
    entries.reserve(docs.size());
    for (const auto& [id, text] : docs)
        entries.emplace_back(id, cache ? cache->get_or_compute(text, provider)
                                       : provider.embed(text));
    return from_vectors(entries);
}

DenseIndex DenseIndex::from_vectors(
    const std::vector<std::pair<std::string, EmbeddingVector>>& entries) {
    DenseIndex idx;
    for (const auto& [id, v] : entries) {
        if (idx.entries_.count(id)) throw DuplicateDocId(id);
        if (idx.dimension_ == 0)
            idx.dimension_ = static_cast<int>(v.size());
        else if (idx.dimension_ != v.size())
            throw DimensionMismatch(idx.dimension_, v.size());
        idx.doc_ids_.push_back(id);
        idx.entries_[id] = v;
    }
    return idx;
}

const EmbeddingVector& DenseIndex::vector_for(const std::string& doc_id) const {
    auto it = entries_.find(doc_id);
    if (it == entries_.end()) throw UnknownDocId(doc_id);
    return it->second;
}

std::vector<RetrievalHit> top_k_dense(const DenseIndex& index, const EmbeddingVector& query,
                                      int k) {
    if (index.size() > 0 && query.size() != index.dimension())
        throw DimensionMismatch(query.size(), index.dimension());
    std::vector<RetrievalHit> hits;
    hits.reserve(index.doc_ids().size());
    for (const auto& id : index.doc_ids())
        hits.push_back({id, cosine(query, index.vector_for(id)), 0});
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (k < static_cast<int>(hits.size())) hits.resize(std::max(k, 0));
    for (size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
    return hits;
}

}  // namespace dictation_rag
