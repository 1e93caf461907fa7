#include "dictation_rag/corpus.hpp"

#include <fstream>
#include <unordered_set>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/ontology.hpp"
#include "dictation_rag/text.hpp"
#include "json.hpp"

namespace dictation_rag {

using nlohmann::json;

namespace {

std::vector<Observation> parse_observation_array(const json& arr, int line_no) {
    if (!arr.is_array()) throw MalformedRecord(line_no, "\"observations\" must be an array");
    std::vector<Observation> out;
    for (const auto& item : arr) {
        if (!item.is_object() || !item.contains("schema") || !item.contains("value"))
            throw MalformedRecord(line_no, "observation needs \"schema\" and \"value\"");
        out.push_back({item.at("schema").get<std::string>(), item.at("value").get<std::string>()});
    }
    return out;
}

json observations_to_json(const std::vector<Observation>& obs) {
    json arr = json::array();
    for (const auto& o : obs) arr.push_back({{"schema", o.schema_name}, {"value", o.value}});
    return arr;
}

}  // namespace

std::vector<Dictation> load_dictations(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dictation file: " + path);
    std::vector<Dictation> out;
    std::unordered_set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw MalformedRecord(line_no, "not a JSON object");
        if (!rec.contains("id") || !rec.at("id").is_string())
            throw MalformedRecord(line_no, "missing \"id\" field");
        if (!rec.contains("text") || !rec.at("text").is_string())
            throw MalformedRecord(line_no, "missing \"text\" field");
        Dictation d;
        d.id = rec.at("id").get<std::string>();
        if (d.id.empty()) throw MalformedRecord(line_no, "empty \"id\"");
        if (!seen.insert(d.id).second) throw DuplicateId(d.id);
        d.text = rec.at("text").get<std::string>();
        if (rec.contains("observations"))
            d.gold_observations = parse_observation_array(rec.at("observations"), line_no);
        out.push_back(std::move(d));
    }
    return out;
}

void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    for (const auto& r : records) {
        json rec;  // nlohmann objects serialize with sorted keys, which keeps output stable
        rec["id"] = r.dictation_id;
        rec["observations"] = observations_to_json(r.observations);
        rec["diagnostics"] = r.diagnostics;
        out << rec.dump() << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

std::vector<PredictionRecord> load_predictions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open prediction file: " + path);
    std::vector<PredictionRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.is_object())
            throw MalformedRecord(line_no, "not a JSON object");
        if (!rec.contains("id") || !rec.at("id").is_string())
            throw MalformedRecord(line_no, "missing \"id\" field");
        PredictionRecord r;
        r.dictation_id = rec.at("id").get<std::string>();
        if (rec.contains("observations"))
            r.observations = parse_observation_array(rec.at("observations"), line_no);
        if (rec.contains("diagnostics"))
            r.diagnostics = rec.at("diagnostics").get<std::vector<std::string>>();
        out.push_back(std::move(r));
    }
    return out;
}

ValidationSplit validate_against_ontology(const std::vector<Observation>& obs,
                                          const std::vector<Schema>& schemas) {
    std::unordered_set<std::string> names;
    for (const auto& s : schemas) names.insert(to_lower(trim(s.name)));
    ValidationSplit split;
    for (const auto& o : obs) {
        if (names.count(to_lower(trim(o.schema_name))))
            split.valid.push_back(o);
        else
            split.rejected.push_back(o);
    }
    return split;
}

}  // namespace dictation_rag
