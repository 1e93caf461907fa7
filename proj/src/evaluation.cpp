#include "dictation_rag/evaluation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <unordered_map>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/text.hpp"
#include "json.hpp"

namespace dictation_rag {

std::string normalize_value(const std::string& v) {
    std::string s = to_lower(collapse_whitespace(trim(v)));
    // "37.0" -> "37", but only for pure-numeric strings
    if (s.size() > 2 && s.compare(s.size() - 2, 2, ".0") == 0 &&
        std::all_of(s.begin(), s.end() - 2,
                    [](unsigned char c) { return std::isdigit(c) != 0; }))
        s.resize(s.size() - 2);
    return s;
}

namespace {

using Pair = std::pair<std::string, std::string>;

std::set<Pair> pair_set(const std::vector<Observation>& obs) {
    std::set<Pair> out;
    for (const auto& o : obs)
        out.insert({to_lower(trim(o.schema_name)), normalize_value(o.value)});
    return out;
}

}  // namespace

MatchCounts match_counts(const std::vector<Observation>& pred,
                         const std::vector<Observation>& gold) {
    const auto p = pair_set(pred);
    const auto g = pair_set(gold);
    MatchCounts c;
    for (const auto& x : p)
        g.count(x) ? ++c.tp : ++c.fp;
    for (const auto& x : g)
        if (!p.count(x)) ++c.fn;
    return c;
}

Prf micro_prf(const MatchCounts& c) {
    Prf r;
    if (c.tp + c.fp > 0) r.precision = static_cast<double>(c.tp) / (c.tp + c.fp);
    if (c.tp + c.fn > 0) r.recall = static_cast<double>(c.tp) / (c.tp + c.fn);
    if (r.precision + r.recall > 0)
        r.f1 = 2.0 * r.precision * r.recall / (r.precision + r.recall);
    return r;
}

EvalReport evaluate_corpus(const std::vector<PredictionRecord>& preds,
                           const std::vector<Dictation>& golds) {
    std::unordered_map<std::string, const Dictation*> gold_by_id;
    for (const auto& d : golds) gold_by_id[d.id] = &d;

    std::unordered_map<std::string, const PredictionRecord*> pred_by_id;
    for (const auto& p : preds) {
        if (!gold_by_id.count(p.dictation_id)) throw UnknownPredictionId(p.dictation_id);
        pred_by_id[p.dictation_id] = &p;
    }

    EvalReport report;
    report.dictation_count = static_cast<int>(golds.size());
    static const std::vector<Observation> kNone;
    for (const auto& d : golds) {
        const auto& gold_obs = d.gold_observations ? *d.gold_observations : kNone;
        auto it = pred_by_id.find(d.id);
        const auto& pred_obs = it != pred_by_id.end() ? it->second->observations : kNone;

        const auto p = pair_set(pred_obs);
        const auto g = pair_set(gold_obs);
        for (const auto& [name, value] : p) {
            auto& per = report.per_schema[name];
            g.count({name, value}) ? ++per.tp : ++per.fp;
        }
        for (const auto& [name, value] : g)
            if (!p.count({name, value})) ++report.per_schema[name].fn;
    }
    for (const auto& [_, c] : report.per_schema) report.totals += c;
    const Prf prf = micro_prf(report.totals);
    report.precision = prf.precision;
    report.recall = prf.recall;
    report.f1 = prf.f1;
    return report;
}

std::string report_to_json(const EvalReport& report) {
    char buf[64];
    auto fmt = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.6f", v);
        return std::string(buf);
    };
    // floats printed with fixed 6 decimals, so the json lib's float
    // formatting never enters the picture
    std::string out = "{\"precision\": " + fmt(report.precision) +
                      ", \"recall\": " + fmt(report.recall) + ", \"f1\": " + fmt(report.f1) +
                      ", \"per_schema\": {";
    bool first = true;
    for (const auto& [name, c] : report.per_schema) {
        if (!first) out += ", ";
        first = false;
        out += nlohmann::json(name).dump() + ": {\"tp\": " + std::to_string(c.tp) +
               ", \"fp\": " + std::to_string(c.fp) + ", \"fn\": " + std::to_string(c.fn) + "}";
    }
    out += "}, \"dictations\": " + std::to_string(report.dictation_count) + "}";
    return out;
}

void write_report(const EvalReport& report, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open report file: " + path);
    out << report_to_json(report) << '\n';
}

}  // namespace dictation_rag
