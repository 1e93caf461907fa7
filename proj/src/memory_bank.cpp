#include "dictation_rag/memory_bank.hpp"

#include <fstream>
#include <set>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/evaluation.hpp"
#include "dictation_rag/llm_gateway.hpp"
#include "dictation_rag/text.hpp"
#include "json.hpp"

namespace dictation_rag {

using nlohmann::json;

std::string render_gold_block(const std::vector<Observation>& gold) {
    json arr = json::array();
    for (const auto& o : gold) arr.push_back({{"schema", o.schema_name}, {"value", o.value}});
    return arr.dump();
}

namespace {

using Pair = std::pair<std::string, std::string>;

Pair norm_pair(const Observation& o) {
    return {to_lower(trim(o.schema_name)), normalize_value(o.value)};
}

std::string strip_fences(const std::string& raw) {
    std::string s = trim(raw);
    if (s.rfind("```", 0) != 0) return s;
    size_t nl = s.find('\n');
    size_t fence = s.rfind("```");
    if (nl == std::string::npos || fence <= nl) return s;
    return trim(s.substr(nl + 1, fence - nl - 1));
}

std::vector<std::pair<std::string, std::vector<Observation>>> parse_pair_response(
    const std::string& raw) {
    json parsed = json::parse(strip_fences(raw), nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array())
        throw PairParseError("expected a JSON array of segment/observation pairs");
    std::vector<std::pair<std::string, std::vector<Observation>>> out;
    for (const auto& item : parsed) {
        if (!item.is_object() || !item.contains("segment") || !item.contains("observations"))
            throw PairParseError("pair entry needs \"segment\" and \"observations\"");
        std::vector<Observation> obs;
        for (const auto& o : item["observations"]) {
            if (!o.is_object() || !o.contains("schema") || !o.contains("value"))
                throw PairParseError("observation needs \"schema\" and \"value\"");
            obs.push_back({o["schema"].get<std::string>(), o["value"].get<std::string>()});
        }
        out.emplace_back(trim(item["segment"].get<std::string>()), std::move(obs));
    }
    return out;
}

}  // namespace

PairExtraction extract_pairs(const Dictation& d, LlmGateway& llm) {
    PairExtraction result;
    if (!d.gold_observations || d.gold_observations->empty()) return result;

    const Bindings bindings = {{"dictation", d.text},
                               {"gold", render_gold_block(*d.gold_observations)}};
    std::vector<std::pair<std::string, std::vector<Observation>>> pairs;
    try {
        pairs = parse_pair_response(llm.run("pair-extract", bindings));
    } catch (const PairParseError&) {
        pairs = parse_pair_response(llm.run("pair-extract", bindings, kPairRepairHint));
    }

    std::set<Pair> gold;
    for (const auto& o : *d.gold_observations) gold.insert(norm_pair(o));

    int ordinal = 0;
    for (auto& [segment, obs] : pairs) {
        if (segment.empty()) continue;
        std::vector<Observation> kept;
        for (const auto& o : obs) {
            if (gold.count(norm_pair(o))) {
                kept.push_back(o);
            } else {
                result.diagnostics.push_back(d.id + ": dropped observation not in gold set: " +
                                             o.schema_name + "=" + o.value);
            }
        }
        if (kept.empty()) continue;  // no exemplar value without observations
        MemoryEntry e;
        e.id = d.id + "#" + std::to_string(ordinal++);
        e.segment_text = segment;
        e.observations = std::move(kept);
        e.source_dictation_id = d.id;
        e.builder_model = llm.profile().model;
        result.entries.push_back(std::move(e));
    }
    return result;
}

BankSummary build_memory_bank(const std::vector<Dictation>& corpus, LlmGateway& llm,
                              const std::string& out_path) {
    BankSummary summary;
    std::vector<MemoryEntry> bank;
    for (const auto& d : corpus) {
        if (d.gold_observations) summary.gold_total += static_cast<int>(d.gold_observations->size());
        try {
            PairExtraction res = extract_pairs(d, llm);
            std::set<Pair> covered;
            for (auto& e : res.entries) {
                for (const auto& o : e.observations) covered.insert(norm_pair(o));
                bank.push_back(std::move(e));
            }
            summary.gold_covered += static_cast<int>(covered.size());
            summary.dropped.insert(summary.dropped.end(), res.diagnostics.begin(),
                                   res.diagnostics.end());
        } catch (const std::exception& e) {
            summary.failed_dictations.push_back(d.id + ": " + e.what());
        }
    }
    summary.entry_count = static_cast<int>(bank.size());
    summary.coverage = summary.gold_total == 0
                           ? 1.0
                           : static_cast<double>(summary.gold_covered) / summary.gold_total;
    save_memory_bank(bank, out_path);
    return summary;
}

void save_memory_bank(const std::vector<MemoryEntry>& bank, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open bank file: " + path);
    for (const auto& e : bank) {
        json obs = json::array();
        for (const auto& o : e.observations)
            obs.push_back({{"schema", o.schema_name}, {"value", o.value}});
        json rec;
        rec["id"] = e.id;
        rec["segment"] = e.segment_text;
        rec["observations"] = obs;
        rec["source"] = e.source_dictation_id;
        rec["builder_model"] = e.builder_model;
        out << rec.dump() << '\n';
    }
}

std::vector<MemoryEntry> load_memory_bank(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open bank file: " + path);
    std::vector<MemoryEntry> bank;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw MalformedEntry(line_no, "not a JSON object");
        for (const char* field : {"id", "segment", "observations", "source"})
            if (!rec.contains(field)) throw MalformedEntry(line_no, std::string("missing \"") +
                                                                         field + "\"");
        MemoryEntry e;
        e.id = rec["id"].get<std::string>();
        e.segment_text = rec["segment"].get<std::string>();
        if (trim(e.segment_text).empty()) throw MalformedEntry(line_no, "empty segment text");
        for (const auto& o : rec["observations"]) {
            if (!o.contains("schema") || !o.contains("value"))
                throw MalformedEntry(line_no, "observation needs \"schema\" and \"value\"");
            e.observations.push_back(
                {o["schema"].get<std::string>(), o["value"].get<std::string>()});
        }
        e.source_dictation_id = rec["source"].get<std::string>();
        if (rec.contains("builder_model"))
            e.builder_model = rec["builder_model"].get<std::string>();
        bank.push_back(std::move(e));
    }
    return bank;
}

}  // namespace dictation_rag
