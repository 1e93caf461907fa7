#pragma once

#include <map>
#include <optional>
#include <string>

#include "dictation_rag/pipeline.hpp"

namespace dictation_rag {

// Flat view of a TOML file: "section.key" -> raw scalar string. Supports
// [section] headers, quoted strings, numbers, booleans and # comments —
// enough for the config surface below, not a general TOML parser.
std::map<std::string, std::string> parse_toml_file(const std::string& path);
std::map<std::string, std::string> parse_toml(const std::string& text);

// Sections: [pipeline], [fusion.schema], [fusion.example],
// [llm.generator], [llm.segmenter].
PipelineConfig load_pipeline_config(const std::string& path);
PipelineConfig apply_config_values(PipelineConfig base,
                                   const std::map<std::string, std::string>& values);

}  // namespace dictation_rag
