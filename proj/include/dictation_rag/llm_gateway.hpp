#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dictation_rag/corpus.hpp"
#include "dictation_rag/ontology.hpp"

namespace dictation_rag {

struct LlmProfile {
    enum class Backend { remote, mock };
    Backend backend = Backend::mock;
    std::string base_url;  // required for remote
    std::string model = "mock";
    double temperature = 0.0;
    int max_tokens = 2048;
    int timeout_s = 60;
    int max_retries = 3;
    int backoff_base_ms = 1000;  // exponential, x2 per attempt, +-20% jitter
};

using Bindings = std::map<std::string, std::string>;

// Replaces every "{{name}}". Strict mode also rejects bindings that the
// template never references.
std::string render_prompt(const std::string& body, const Bindings& bindings, bool strict = true);

// Stable hash over (template_id, sorted bindings); keys scripted mocks.
std::string call_fingerprint(const std::string& template_id, const Bindings& bindings);

class ScriptedMock {
public:
    void script(const std::string& template_id, const Bindings& bindings, std::string response);
    void script_fingerprint(std::string fingerprint, std::string response);
    const std::string& lookup(const std::string& fingerprint) const;  // throws MockMiss

    // JSONL: {"template": str, "bindings": {str: str}, "response": str}
    static ScriptedMock from_file(const std::string& path);

private:
    std::map<std::string, std::string> responses_;
};

struct PromptTemplates {
    std::string segment;
    std::string describe;
    std::string pair_extract;
    std::string observe;

    static PromptTemplates defaults();
    // Reads prompts/{segment,describe,pair-extract,observe}.txt; missing
    // files fall back to the built-in defaults.
    static PromptTemplates from_dir(const std::string& dir);
    const std::string& body(const std::string& template_id) const;
};

struct CallRecord {
    std::string template_id;
    std::string fingerprint;
    int attempts = 0;
    long latency_ms = 0;
};

class LlmGateway {
public:
    explicit LlmGateway(LlmProfile profile, PromptTemplates templates = PromptTemplates::defaults());

    void set_mock(std::shared_ptr<ScriptedMock> mock) { mock_ = std::move(mock); }
    void set_attempt_log(std::string path) { attempt_log_path_ = std::move(path); }

    // Renders the named template and runs one completion. A nonempty
    // repair_hint is appended to the rendered prompt (and folded into the
    // fingerprint under the "__repair__" key) for format-reminder retries.
    std::string run(const std::string& template_id, const Bindings& bindings,
                    const std::string& repair_hint = "");

    // Raw completion with retry/backoff (remote) or scripted lookup (mock).
    std::string complete(const std::string& system, const std::string& user,
                         const std::string& template_id, const std::string& fingerprint);

    const std::vector<CallRecord>& calls() const { return calls_; }
    int call_count() const { return static_cast<int>(calls_.size()); }
    const LlmProfile& profile() const { return profile_; }
    const PromptTemplates& templates() const { return templates_; }

private:
    LlmProfile profile_;
    PromptTemplates templates_;
    std::shared_ptr<ScriptedMock> mock_;
    std::optional<std::string> attempt_log_path_;
    std::vector<CallRecord> calls_;
};

// Strips markdown code fences, then parses a JSON array of strings; falls
// back to "N. text" / "- text" lines. Empty raw yields an empty list.
std::vector<std::string> parse_segment_list(const std::string& raw);

struct ParsedObservations {
    std::vector<Observation> observations;
    std::vector<std::string> diagnostics;
};

// Grounds parsed items against the candidate schemas: unknown schema names
// are dropped with a diagnostic, enumerated values snapped to canonical
// option casing, duplicates collapsed.
ParsedObservations parse_observation_list(const std::string& raw,
                                          const std::vector<Schema>& candidates);

}  // namespace dictation_rag
