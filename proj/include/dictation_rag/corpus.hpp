#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace dictation_rag {

struct Observation {
    std::string schema_name;
    std::string value;

    friend bool operator==(const Observation&, const Observation&) = default;
};

struct Dictation {
    std::string id;
    std::string text;
    std::optional<std::vector<Observation>> gold_observations;
};

struct Segment {
    std::string dictation_id;
    int index = 0;  // ordinal within the dictation
    std::string text;
};

struct PredictionRecord {
    std::string dictation_id;
    std::vector<Observation> observations;
    std::vector<std::string> diagnostics;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct Schema;  // ontology.hpp

std::vector<Dictation> load_dictations(const std::string& path);

// One JSONL line per record, corpus order, byte-deterministic.
void write_predictions(const std::vector<PredictionRecord>& records, const std::string& path);

std::vector<PredictionRecord> load_predictions(const std::string& path);

struct ValidationSplit {
    std::vector<Observation> valid;
    std::vector<Observation> rejected;
};

// Partition by case-insensitive schema-name membership in the ontology.
ValidationSplit validate_against_ontology(const std::vector<Observation>& obs,
                                          const std::vector<Schema>& schemas);

}  // namespace dictation_rag
