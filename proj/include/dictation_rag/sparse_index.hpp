#pragma once

#include <map>
#include <string>
#include <vector>

namespace dictation_rag {

struct RetrievalHit {
    std::string doc_id;
    double score = 0.0;
    int rank = 0;  // 1-based

    friend bool operator==(const RetrievalHit&, const RetrievalHit&) = default;
};

struct Bm25Params {
    double k1 = 1.2;
    double b = 0.75;
};

// Inverted-index statistics over a fixed document pool. Immutable after build.
class SparseIndex {
public:
    static SparseIndex build(const std::vector<std::pair<std::string, std::string>>& docs);

    int doc_count() const { return static_cast<int>(doc_ids_.size()); }
    double avg_doc_length() const { return avg_doc_length_; }
    const std::vector<std::string>& doc_ids() const { return doc_ids_; }
    bool contains(const std::string& doc_id) const;

    int term_freq(const std::string& term, const std::string& doc_id) const;
    int doc_freq(const std::string& term) const;
    int doc_length(const std::string& doc_id) const;
    // distinct terms of one document, sorted
    const std::vector<std::string>& terms_in_doc(const std::string& doc_id) const;

private:
    std::vector<std::string> doc_ids_;
    std::map<std::string, std::map<std::string, int>> term_freqs_;  // term -> doc -> count
    std::map<std::string, int> doc_freqs_;
    std::map<std::string, int> doc_lengths_;
    std::map<std::string, std::vector<std::string>> doc_terms_;
    double avg_doc_length_ = 0.0;
};

// Lucene-style BM25: idf = ln(1 + (N - df + 0.5)/(df + 0.5)), query terms
// deduplicated. Nonnegative by construction.
double bm25_score(const SparseIndex& index, const std::vector<std::string>& query,
                  const std::string& doc_id, const Bm25Params& params = {});

// Cosine of L2-normalized tf * (ln((1+N)/(1+df)) + 1) vectors. Defined for
// query terms absent from the corpus (df = 0).
double tfidf_cosine(const SparseIndex& index, const std::vector<std::string>& query,
                    const std::string& doc_id);

enum class SparseScorer { bm25, tfidf };

// Full ranking cut to k. Ties broken by doc_id ascending, ranks from 1.
std::vector<RetrievalHit> top_k_sparse(const SparseIndex& index,
                                       const std::vector<std::string>& query, int k,
                                       SparseScorer scorer, const Bm25Params& params = {});

}  // namespace dictation_rag
