#include "dictation_rag/fusion.hpp"

#include <algorithm>
#include <map>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/text.hpp"

namespace dictation_rag {

std::vector<RetrievalHit> min_max_normalize(std::vector<RetrievalHit> hits) {
    if (hits.empty()) return hits;
    auto [min_it, max_it] =
        std::minmax_element(hits.begin(), hits.end(),
                            [](const RetrievalHit& a, const RetrievalHit& b) {
                                return a.score < b.score;
                            });
    const double lo = min_it->score, hi = max_it->score;
    for (auto& h : hits) h.score = (hi == lo) ? 1.0 : (h.score - lo) / (hi - lo);
    return hits;
}

std::vector<RetrievalHit> fuse(const std::vector<RetrievalHit>& lexical,
                               const std::vector<RetrievalHit>& dense, double alpha, int k) {
    std::map<std::string, double> fused;
    for (const auto& h : min_max_normalize(lexical)) fused[h.doc_id] += alpha * h.score;
    for (const auto& h : min_max_normalize(dense)) fused[h.doc_id] += (1.0 - alpha) * h.score;

    std::vector<RetrievalHit> out;
    out.reserve(fused.size());
    for (const auto& [id, score] : fused) out.push_back({id, score, 0});
    std::sort(out.begin(), out.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (k < static_cast<int>(out.size())) out.resize(std::max(k, 0));
    for (size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
    return out;
}

namespace {

std::vector<std::pair<std::string, std::string>> schema_docs(const std::vector<Schema>& schemas) {
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(schemas.size());
    for (const auto& s : schemas) docs.emplace_back(s.id, format_schema(s));
    return docs;
}

std::vector<std::pair<std::string, std::string>> bank_docs(const std::vector<MemoryEntry>& bank) {
    std::vector<std::pair<std::string, std::string>> docs;
    docs.reserve(bank.size());
    for (const auto& e : bank) docs.emplace_back(e.id, e.segment_text);
    return docs;
}

std::vector<RetrievalHit> hybrid_hits(const SparseIndex& sparse, const DenseIndex& dense,
                                      EmbeddingProvider& provider, SparseScorer scorer,
                                      const std::string& query_text, int n,
                                      const FusionConfig& cfg) {
    const int fetch = n * cfg.candidate_pool_multiplier;
    auto lexical = top_k_sparse(sparse, tokenize(query_text), fetch, scorer);
    auto dense_hits = top_k_dense(dense, provider.embed(query_text), fetch);
    return fuse(lexical, dense_hits, cfg.alpha, n);
}

}  // namespace

SchemaRetriever::SchemaRetriever(std::vector<Schema> schemas, EmbeddingProvider& provider,
                                 FusionConfig config, EmbeddingCache* cache)
    : schemas_(std::move(schemas)),
      sparse_(SparseIndex::build(schema_docs(schemas_))),
      dense_(DenseIndex::build(schema_docs(schemas_), provider, cache)),
      provider_(provider),
      config_(config) {}

std::vector<RetrievalHit> SchemaRetriever::retrieve_hits(const std::string& segment_text,
                                                         int n) const {
    if (schemas_.empty()) throw EmptyPool("schema pool is empty");
    if (trim(segment_text).empty()) throw InvalidQuery("segment text is empty");
    return hybrid_hits(sparse_, dense_, provider_, SparseScorer::tfidf, segment_text, n,
                       config_);
}

std::vector<Schema> SchemaRetriever::retrieve(const std::string& segment_text, int n) const {
    std::vector<Schema> out;
    for (const auto& h : retrieve_hits(segment_text, n)) out.push_back(schema_by_id(h.doc_id));
    return out;
}

const Schema& SchemaRetriever::schema_by_id(const std::string& id) const {
    for (const auto& s : schemas_)
        if (s.id == id) return s;
    throw UnknownDocId(id);
}

ExampleRetriever::ExampleRetriever(std::vector<MemoryEntry> bank, EmbeddingProvider& provider,
                                   FusionConfig config, EmbeddingCache* cache)
    : bank_(std::move(bank)),
      sparse_(SparseIndex::build(bank_docs(bank_))),
      dense_(DenseIndex::build(bank_docs(bank_), provider, cache)),
      provider_(provider),
      config_(config) {}

std::vector<RetrievalHit> ExampleRetriever::retrieve_hits(const std::string& segment_text,
                                                          int k) const {
    if (bank_.empty() || k <= 0) return {};
    return hybrid_hits(sparse_, dense_, provider_, SparseScorer::bm25, segment_text, k, config_);
}

std::vector<MemoryEntry> ExampleRetriever::retrieve(const std::string& segment_text,
                                                    int k) const {
    std::vector<MemoryEntry> out;
    for (const auto& h : retrieve_hits(segment_text, k))
        for (const auto& e : bank_)
            if (e.id == h.doc_id) {
                out.push_back(e);
                break;
            }
    return out;
}

}  // namespace dictation_rag
