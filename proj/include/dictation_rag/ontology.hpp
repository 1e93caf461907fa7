#pragma once

#include <optional>
#include <string>
#include <vector>

namespace dictation_rag {

class LlmGateway;  // llm_gateway.hpp

struct Schema {
    std::string id;
    std::string name;
    std::optional<std::string> description;
    std::vector<std::string> options;
    std::optional<std::string> unit;
};

std::vector<Schema> load_ontology(const std::string& path);
void save_ontology(const std::vector<Schema>& schemas, const std::string& path);

// "{name}. {description} Options: {opt1}, {opt2}" — clauses that are absent
// are dropped along with their separators. The unit field is not rendered.
std::string format_schema(const Schema& s);

std::string generate_description(const Schema& s, LlmGateway& llm);

// Fills in missing descriptions through the gateway and persists the result.
// Schemas that already carry a description are left alone unless force.
std::vector<Schema> augment_ontology(std::vector<Schema> schemas, LlmGateway& llm,
                                     bool force, const std::string& out_path);

}  // namespace dictation_rag
