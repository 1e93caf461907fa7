#pragma once

#include <string>
#include <vector>

#include "dictation_rag/corpus.hpp"

namespace dictation_rag {

class LlmGateway;

struct MemoryEntry {
    std::string id;  // "{dictation_id}#{ordinal}"
    std::string segment_text;
    std::vector<Observation> observations;
    std::string source_dictation_id;
    std::string builder_model;

    friend bool operator==(const MemoryEntry&, const MemoryEntry&) = default;
};

struct PairExtraction {
    std::vector<MemoryEntry> entries;
    std::vector<std::string> diagnostics;  // dropped hallucinations etc.
};

// Prompt hint used for the one repair retry after a parse failure.
inline constexpr const char* kPairRepairHint =
    "Your previous answer was not valid JSON. Respond with ONLY the JSON array "
    "described above, no prose and no code fences.";

// Renders a gold observation list as the "{{gold}}" prompt binding.
std::string render_gold_block(const std::vector<Observation>& gold);

// Splits a gold-annotated dictation into (segment, observations) pairs via
// the gateway. Emitted observations that do not match a gold observation are
// dropped; segments left with no observations are discarded.
PairExtraction extract_pairs(const Dictation& d, LlmGateway& llm);

struct BankSummary {
    int entry_count = 0;
    int gold_total = 0;
    int gold_covered = 0;
    double coverage = 1.0;  // vacuously 1.0 for an empty corpus
    std::vector<std::string> dropped;  // diagnostics for dropped observations
    std::vector<std::string> failed_dictations;
};

BankSummary build_memory_bank(const std::vector<Dictation>& corpus, LlmGateway& llm,
                              const std::string& out_path);

std::vector<MemoryEntry> load_memory_bank(const std::string& path);
void save_memory_bank(const std::vector<MemoryEntry>& bank, const std::string& path);

}  // namespace dictation_rag
