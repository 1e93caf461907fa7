#pragma once

#include <string>
#include <vector>

#include "dictation_rag/corpus.hpp"
#include "dictation_rag/fusion.hpp"
#include "dictation_rag/llm_gateway.hpp"
#include "dictation_rag/memory_bank.hpp"
#include "dictation_rag/ontology.hpp"

namespace dictation_rag {

struct PipelineConfig {
    int n_schemas = 10;   // N
    int k_examples = 15;  // K
    FusionConfig schema_fusion;
    FusionConfig example_fusion;
    LlmProfile generator;
    LlmProfile segmenter;
    int max_concurrency = 4;
    int embedding_dimension = 256;
};

inline constexpr const char* kSegmentRepairHint =
    "Your previous answer was not in the requested format. Respond with ONLY a JSON "
    "array of segment strings, no prose and no code fences.";
inline constexpr const char* kObserveRepairHint =
    "Your previous answer was not valid JSON. Respond with ONLY a JSON array of "
    "{\"schema\", \"value\"} objects, no prose and no code fences.";

// Prompt-block renderers for the observe template; exposed so scripted mocks
// can be keyed on the exact bindings the pipeline produces.
std::string render_schema_block(const std::vector<Schema>& schemas);
std::string render_example_block(const std::vector<MemoryEntry>& examples);

std::vector<Segment> segment_dictation(const Dictation& d, LlmGateway& segmenter);

struct SegmentExtraction {
    std::vector<Observation> observations;
    std::vector<std::string> diagnostics;
};

SegmentExtraction extract_segment(const Segment& seg, const SchemaRetriever& schemas,
                                  const ExampleRetriever& bank, const PipelineConfig& cfg,
                                  LlmGateway& generator);

struct RunSummary {
    int dictations = 0;
    int segments = 0;
    int calls = 0;
    struct Failure {
        std::string id;
        std::string stage;
        std::string reason;
    };
    std::vector<Failure> failures;
};

std::string summary_to_json(const RunSummary& summary);

RunSummary run_pipeline(const std::vector<Dictation>& corpus, const SchemaRetriever& schemas,
                        const ExampleRetriever& bank, const PipelineConfig& cfg,
                        LlmGateway& generator, LlmGateway& segmenter,
                        const std::string& out_path);

}  // namespace dictation_rag
