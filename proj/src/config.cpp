#include "dictation_rag/config.hpp"

#include <fstream>
#include <sstream>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/text.hpp"

namespace dictation_rag {

namespace {

std::string unquote(const std::string& v, int line_no) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    if (!v.empty() && v.front() == '"')
        throw ConfigError("unterminated string on line " + std::to_string(line_no));
    return v;
}

std::string strip_comment(const std::string& line) {
    bool in_str = false;
    for (size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') in_str = !in_str;
        if (line[i] == '#' && !in_str) return line.substr(0, i);
    }
    return line;
}

}  // namespace

std::map<std::string, std::string> parse_toml(const std::string& text) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string s = trim(strip_comment(line));
        if (s.empty()) continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw ConfigError("bad section header on line " + std::to_string(line_no));
            section = trim(s.substr(1, s.size() - 2));
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw ConfigError("expected key = value on line " + std::to_string(line_no));
        std::string key = trim(s.substr(0, eq));
        std::string value = unquote(trim(s.substr(eq + 1)), line_no);
        if (key.empty())
            throw ConfigError("empty key on line " + std::to_string(line_no));
        out[section.empty() ? key : section + "." + key] = value;
    }
    return out;
}

std::map<std::string, std::string> parse_toml_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_toml(text);
}

namespace {

int to_int(const std::string& v, const std::string& key) {
    try {
        return std::stoi(v);
    } catch (...) {
        throw ConfigError("expected integer for " + key + ", got \"" + v + "\"");
    }
}

double to_double(const std::string& v, const std::string& key) {
    try {
        return std::stod(v);
    } catch (...) {
        throw ConfigError("expected number for " + key + ", got \"" + v + "\"");
    }
}

void apply_profile(LlmProfile& profile, const std::string& prefix,
                   const std::map<std::string, std::string>& values) {
    auto get = [&](const char* key) -> const std::string* {
        auto it = values.find(prefix + "." + key);
        return it == values.end() ? nullptr : &it->second;
    };
    if (auto* v = get("backend")) {
        if (*v == "remote")
            profile.backend = LlmProfile::Backend::remote;
        else if (*v == "mock")
            profile.backend = LlmProfile::Backend::mock;
        else
            throw ConfigError(prefix + ".backend must be \"remote\" or \"mock\"");
    }
    if (auto* v = get("base_url")) profile.base_url = *v;
    if (auto* v = get("model")) profile.model = *v;
    if (auto* v = get("temperature")) profile.temperature = to_double(*v, prefix + ".temperature");
    if (auto* v = get("max_tokens")) profile.max_tokens = to_int(*v, prefix + ".max_tokens");
    if (auto* v = get("timeout_s")) profile.timeout_s = to_int(*v, prefix + ".timeout_s");
    if (auto* v = get("max_retries")) profile.max_retries = to_int(*v, prefix + ".max_retries");
    if (auto* v = get("backoff_base_ms"))
        profile.backoff_base_ms = to_int(*v, prefix + ".backoff_base_ms");
}

void apply_fusion(FusionConfig& fusion, const std::string& prefix,
                  const std::map<std::string, std::string>& values) {
    auto it = values.find(prefix + ".alpha");
    if (it != values.end()) {
        fusion.alpha = to_double(it->second, prefix + ".alpha");
        if (fusion.alpha < 0.0 || fusion.alpha > 1.0)
            throw ConfigError(prefix + ".alpha must lie in [0, 1]");
    }
    it = values.find(prefix + ".candidate_pool_multiplier");
    if (it != values.end()) {
        fusion.candidate_pool_multiplier =
            to_int(it->second, prefix + ".candidate_pool_multiplier");
        if (fusion.candidate_pool_multiplier < 1)
            throw ConfigError(prefix + ".candidate_pool_multiplier must be >= 1");
    }
}

}  // namespace

PipelineConfig apply_config_values(PipelineConfig cfg,
                                   const std::map<std::string, std::string>& values) {
    auto it = values.find("pipeline.n_schemas");
    if (it != values.end()) cfg.n_schemas = to_int(it->second, "pipeline.n_schemas");
    it = values.find("pipeline.k_examples");
    if (it != values.end()) cfg.k_examples = to_int(it->second, "pipeline.k_examples");
    it = values.find("pipeline.max_concurrency");
    if (it != values.end()) cfg.max_concurrency = to_int(it->second, "pipeline.max_concurrency");
    it = values.find("pipeline.embedding_dimension");
    if (it != values.end())
        cfg.embedding_dimension = to_int(it->second, "pipeline.embedding_dimension");
    if (cfg.n_schemas < 1) throw ConfigError("pipeline.n_schemas must be >= 1");
    if (cfg.k_examples < 0) throw ConfigError("pipeline.k_examples must be >= 0");
    if (cfg.max_concurrency < 1) throw ConfigError("pipeline.max_concurrency must be >= 1");

    apply_fusion(cfg.schema_fusion, "fusion.schema", values);
    apply_fusion(cfg.example_fusion, "fusion.example", values);
    apply_profile(cfg.generator, "llm.generator", values);
    apply_profile(cfg.segmenter, "llm.segmenter", values);
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    return apply_config_values(PipelineConfig{}, parse_toml_file(path));
}

}  // namespace dictation_rag
