#pragma once

#include <map>
#include <string>
#include <vector>

#include "dictation_rag/corpus.hpp"

namespace dictation_rag {

struct MatchCounts {
    long tp = 0;
    long fp = 0;
    long fn = 0;

    MatchCounts& operator+=(const MatchCounts& o) {
        tp += o.tp;
        fp += o.fp;
        fn += o.fn;
        return *this;
    }
    friend bool operator==(const MatchCounts&, const MatchCounts&) = default;
};

struct Prf {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct EvalReport {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::map<std::string, MatchCounts> per_schema;  // keyed by lowercased schema name
    MatchCounts totals;
    int dictation_count = 0;
};

// trim, lowercase, collapse inner whitespace, strip one trailing ".0" from
// pure-numeric strings. No unit conversion or digit repair.
std::string normalize_value(const std::string& v);

// Set semantics over (lowercased schema, normalized value) pairs.
MatchCounts match_counts(const std::vector<Observation>& pred,
                         const std::vector<Observation>& gold);

Prf micro_prf(const MatchCounts& counts);

EvalReport evaluate_corpus(const std::vector<PredictionRecord>& preds,
                           const std::vector<Dictation>& golds);

// Report JSON with 6-decimal floats.
void write_report(const EvalReport& report, const std::string& path);
std::string report_to_json(const EvalReport& report);

}  // namespace dictation_rag
