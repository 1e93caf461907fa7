#include "dictation_rag/sparse_index.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_set>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/text.hpp"

namespace dictation_rag {

SparseIndex SparseIndex::build(const std::vector<std::pair<std::string, std::string>>& docs) {
    SparseIndex idx;
    std::unordered_set<std::string> seen;
    long total_len = 0;
    for (const auto& [id, text] : docs) {
        if (!seen.insert(id).second) throw DuplicateDocId(id);
        idx.doc_ids_.push_back(id);
        auto tokens = tokenize(text);
        idx.doc_lengths_[id] = static_cast<int>(tokens.size());
        total_len += static_cast<long>(tokens.size());
        std::set<std::string> distinct;
        for (const auto& t : tokens) {
            auto& per_doc = idx.term_freqs_[t];
            if (per_doc[id]++ == 0) ++idx.doc_freqs_[t];
            distinct.insert(t);
        }
        idx.doc_terms_[id].assign(distinct.begin(), distinct.end());
    }
    idx.avg_doc_length_ =
        docs.empty() ? 0.0 : static_cast<double>(total_len) / static_cast<double>(docs.size());
    return idx;
}

bool SparseIndex::contains(const std::string& doc_id) const {
    return doc_lengths_.count(doc_id) != 0;
}

int SparseIndex::term_freq(const std::string& term, const std::string& doc_id) const {
    auto it = term_freqs_.find(term);
    if (it == term_freqs_.end()) return 0;
    auto jt = it->second.find(doc_id);
    return jt == it->second.end() ? 0 : jt->second;
}

int SparseIndex::doc_freq(const std::string& term) const {
    auto it = doc_freqs_.find(term);
    return it == doc_freqs_.end() ? 0 : it->second;
}

int SparseIndex::doc_length(const std::string& doc_id) const {
    auto it = doc_lengths_.find(doc_id);
    if (it == doc_lengths_.end()) throw UnknownDocId(doc_id);
    return it->second;
}

const std::vector<std::string>& SparseIndex::terms_in_doc(const std::string& doc_id) const {
    auto it = doc_terms_.find(doc_id);
    if (it == doc_terms_.end()) throw UnknownDocId(doc_id);
    return it->second;
}

double bm25_score(const SparseIndex& index, const std::vector<std::string>& query,
                  const std::string& doc_id, const Bm25Params& params) {
    const int len = index.doc_length(doc_id);  // throws UnknownDocId
    const double n = index.doc_count();
    const double avgdl = index.avg_doc_length();
    const double len_norm = avgdl > 0.0 ? static_cast<double>(len) / avgdl : 0.0;

    std::set<std::string> terms(query.begin(), query.end());
    double score = 0.0;
    for (const auto& t : terms) {
        const int tf = index.term_freq(t, doc_id);
        if (tf == 0) continue;
        const double df = index.doc_freq(t);
        const double idf = std::log(1.0 + (n - df + 0.5) / (df + 0.5));
        score += idf * tf * (params.k1 + 1.0) /
                 (tf + params.k1 * (1.0 - params.b + params.b * len_norm));
    }
    return score;
}

namespace {
double smooth_idf(double n_docs, double df) {
    return std::log((1.0 + n_docs) / (1.0 + df)) + 1.0;
}
}  // namespace

double tfidf_cosine(const SparseIndex& index, const std::vector<std::string>& query,
                    const std::string& doc_id) {
    index.doc_length(doc_id);  // existence check
    const double n = index.doc_count();

    std::map<std::string, int> query_tf;
    for (const auto& t : query) ++query_tf[t];

    double dot = 0.0, q_norm_sq = 0.0, d_norm_sq = 0.0;
    for (const auto& [t, tf_q] : query_tf) {
        const double idf = smooth_idf(n, index.doc_freq(t));
        const double w_q = tf_q * idf;
        q_norm_sq += w_q * w_q;
        const int tf_d = index.term_freq(t, doc_id);
        if (tf_d > 0) dot += w_q * tf_d * idf;
    }
    for (const auto& t : index.terms_in_doc(doc_id)) {
        const double w_d = index.term_freq(t, doc_id) * smooth_idf(n, index.doc_freq(t));
        d_norm_sq += w_d * w_d;
    }
    if (q_norm_sq == 0.0 || d_norm_sq == 0.0) return 0.0;
    return dot / (std::sqrt(q_norm_sq) * std::sqrt(d_norm_sq));
}

std::vector<RetrievalHit> top_k_sparse(const SparseIndex& index,
                                       const std::vector<std::string>& query, int k,
                                       SparseScorer scorer, const Bm25Params& params) {
    std::vector<RetrievalHit> hits;
    hits.reserve(index.doc_ids().size());
    for (const auto& id : index.doc_ids()) {
        double s = scorer == SparseScorer::bm25 ? bm25_score(index, query, id, params)
                                                : tfidf_cosine(index, query, id);
        hits.push_back({id, s, 0});
    }
    std::sort(hits.begin(), hits.end(), [](const RetrievalHit& a, const RetrievalHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.doc_id < b.doc_id;
    });
    if (k < static_cast<int>(hits.size())) hits.resize(std::max(k, 0));
    for (size_t i = 0; i < hits.size(); ++i) hits[i].rank = static_cast<int>(i) + 1;
    return hits;
}

}  // namespace dictation_rag
