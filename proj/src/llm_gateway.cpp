#include "dictation_rag/llm_gateway.hpp"

#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <random>
#include <set>
#include <thread>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/text.hpp"
#include "httplib.h"
#include "json.hpp"

namespace dictation_rag {

using nlohmann::json;

std::string render_prompt(const std::string& body, const Bindings& bindings, bool strict) {
    std::string out;
    out.reserve(body.size());
    std::set<std::string> used;
    size_t pos = 0;
    while (pos < body.size()) {
        size_t open = body.find("{{", pos);
        if (open == std::string::npos) {
            out.append(body, pos, std::string::npos);
            break;
        }
        out.append(body, pos, open - pos);
        size_t close = body.find("}}", open + 2);
        if (close == std::string::npos) throw MissingBinding(body.substr(open));
        std::string name = body.substr(open + 2, close - open - 2);
        auto it = bindings.find(name);
        if (it == bindings.end()) throw MissingBinding(name);
        out += it->second;
        used.insert(name);
        pos = close + 2;
    }
    if (strict)
        for (const auto& [name, _] : bindings)
            if (!used.count(name)) throw UnknownPlaceholder(name);
    return out;
}

std::string call_fingerprint(const std::string& template_id, const Bindings& bindings) {
    std::uint64_t h = fnv1a64(template_id);
    for (const auto& [k, v] : bindings) {  // std::map iterates sorted
        h = fnv1a64(k, h);
        h = fnv1a64("\x1f", h);
        h = fnv1a64(v, h);
        h = fnv1a64("\x1e", h);
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

void ScriptedMock::script(const std::string& template_id, const Bindings& bindings,
                          std::string response) {
    responses_[call_fingerprint(template_id, bindings)] = std::move(response);
}

void ScriptedMock::script_fingerprint(std::string fingerprint, std::string response) {
    responses_[std::move(fingerprint)] = std::move(response);
}

const std::string& ScriptedMock::lookup(const std::string& fingerprint) const {
    auto it = responses_.find(fingerprint);
    if (it == responses_.end()) throw MockMiss(fingerprint);
    return it->second;
}

ScriptedMock ScriptedMock::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mock script: " + path);
    ScriptedMock mock;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded() || !rec.contains("template") || !rec.contains("bindings") ||
            !rec.contains("response"))
            throw MalformedRecord(line_no, "mock entry needs template/bindings/response");
        Bindings bindings;
        for (auto& [k, v] : rec["bindings"].items()) bindings[k] = v.get<std::string>();
        mock.script(rec["template"].get<std::string>(), bindings,
                    rec["response"].get<std::string>());
    }
    return mock;
}

PromptTemplates PromptTemplates::defaults() {
    PromptTemplates t;
    t.segment =
        "Split the following nurse dictation into distinct segments, each containing a "
        "coherent set of clinical facts. Preserve the original wording; do not paraphrase.\n"
        "Respond with a strict JSON array of strings and nothing else.\n\n"
        "Dictation:\n{{dictation}}\n";
    t.describe =
        "Write a concise clinical definition (1-3 sentences) of the medical observation "
        "named \"{{name}}\". Its possible values are: {{options}}. Do not enumerate the "
        "values in the definition. Respond with the definition text only.\n";
    t.pair_extract =
        "Split the nurse dictation below into segments, each containing a coherent set of "
        "clinical facts, and assign every gold observation to exactly one segment.\n"
        "Respond with a strict JSON array of objects of the form\n"
        "{\"segment\": \"...\", \"observations\": [{\"schema\": \"...\", \"value\": \"...\"}]}\n"
        "and nothing else.\n\n"
        "Dictation:\n{{dictation}}\n\n"
        "Gold observations:\n{{gold}}\n";
    t.observe =
        "Extract the medical observations stated in the segment below. Only use schemas "
        "from the candidate list, and when a schema enumerates options, pick one of them.\n"
        "Respond with a strict JSON array of objects {\"schema\": \"...\", \"value\": \"...\"} "
        "and nothing else. Respond with [] if no observation applies.\n\n"
        "Candidate schemas:\n{{schemas}}\n\n{{examples}}"
        "Segment:\n{{segment}}\n";
    return t;
}

PromptTemplates PromptTemplates::from_dir(const std::string& dir) {
    PromptTemplates t = defaults();
    auto read_if_present = [&](const char* file, std::string& dst) {
        std::ifstream in(dir + "/" + file);
        if (!in) return;
        std::string body((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (!trim(body).empty()) dst = body;
    };
    read_if_present("segment.txt", t.segment);
    read_if_present("describe.txt", t.describe);
    read_if_present("pair-extract.txt", t.pair_extract);
    read_if_present("observe.txt", t.observe);
    return t;
}

const std::string& PromptTemplates::body(const std::string& template_id) const {
    if (template_id == "segment") return segment;
    if (template_id == "describe") return describe;
    if (template_id == "pair-extract") return pair_extract;
    if (template_id == "observe") return observe;
    throw ConfigError("unknown prompt template: " + template_id);
}

namespace {

constexpr const char* kSystemPrompt =
    "You are a careful clinical information extraction assistant. Follow the output "
    "format instructions exactly.";

std::string remote_complete(const LlmProfile& profile, const std::string& system,
                            const std::string& user, int& attempts) {
    httplib::Client client(profile.base_url);
    client.set_read_timeout(profile.timeout_s, 0);
    client.set_connection_timeout(profile.timeout_s, 0);
    if (const char* key = std::getenv("DICTATION_RAG_API_KEY"))
        client.set_default_headers({{"Authorization", std::string("Bearer ") + key}});

    json body = {{"model", profile.model},
                 {"messages", json::array({json{{"role", "system"}, {"content", system}},
                                           json{{"role", "user"}, {"content", user}}})},
                 {"temperature", profile.temperature},
                 {"max_tokens", profile.max_tokens}};
    const std::string payload = body.dump();

    static thread_local std::mt19937_64 rng(0x5eedULL);
    std::uniform_real_distribution<double> jitter(0.8, 1.2);

    std::string last_error = "no attempt made";
    attempts = 0;
    for (int attempt = 0; attempt <= profile.max_retries; ++attempt) {
        if (attempt > 0) {
            double delay = profile.backoff_base_ms * std::pow(2.0, attempt - 1) * jitter(rng);
            std::this_thread::sleep_for(
                std::chrono::milliseconds(static_cast<long>(delay)));
        }
        ++attempts;
        auto res = client.Post("/chat/completions", payload, "application/json");
        if (!res) {
            last_error = "transport failure";
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP " + std::to_string(res->status);
            continue;
        }
        if (res->status != 200) throw TransportError("HTTP " + std::to_string(res->status));
        json resp = json::parse(res->body, nullptr, false);
        if (resp.is_discarded() || !resp.contains("choices") || resp["choices"].empty())
            throw TransportError("malformed completion response");
        return resp["choices"][0]["message"]["content"].get<std::string>();
    }
    throw TransportError("completion failed after " + std::to_string(attempts) +
                         " attempts: " + last_error);
}

}  // namespace

LlmGateway::LlmGateway(LlmProfile profile, PromptTemplates templates)
    : profile_(std::move(profile)), templates_(std::move(templates)) {
    if (profile_.backend == LlmProfile::Backend::remote && profile_.base_url.empty())
        throw ConfigError("remote backend requires base_url");
}

std::string LlmGateway::run(const std::string& template_id, const Bindings& bindings,
                            const std::string& repair_hint) {
    std::string user = render_prompt(templates_.body(template_id), bindings);
    Bindings keyed = bindings;
    if (!repair_hint.empty()) {
        user += "\n\n" + repair_hint;
        keyed["__repair__"] = repair_hint;
    }
    return complete(kSystemPrompt, user, template_id, call_fingerprint(template_id, keyed));
}

std::string LlmGateway::complete(const std::string& system, const std::string& user,
                                 const std::string& template_id,
                                 const std::string& fingerprint) {
    const auto start = std::chrono::steady_clock::now();
    int attempts = 1;
    std::string result;
    try {
        if (profile_.backend == LlmProfile::Backend::mock) {
            if (!mock_) throw ConfigError("mock backend has no scripted responses attached");
            result = mock_->lookup(fingerprint);
        } else {
            result = remote_complete(profile_, system, user, attempts);
        }
    } catch (...) {
        calls_.push_back({template_id, fingerprint, attempts, 0});
        throw;
    }
    const long latency = std::chrono::duration_cast<std::chrono::milliseconds>(
                             std::chrono::steady_clock::now() - start)
                             .count();
    calls_.push_back({template_id, fingerprint, attempts, latency});
    if (attempt_log_path_) {
        std::ofstream out(*attempt_log_path_, std::ios::app);
        if (out) {
            json rec = {{"template_id", template_id},
                        {"fingerprint", fingerprint},
                        {"attempts", attempts},
                        {"latency_ms", latency}};
            out << rec.dump() << '\n';
        }
    }
    return result;
}

namespace {

std::string strip_code_fences(const std::string& raw) {
    std::string s = trim(raw);
    if (s.rfind("```", 0) != 0) return s;
    size_t first_nl = s.find('\n');
    if (first_nl == std::string::npos) return s;
    size_t last_fence = s.rfind("```");
    if (last_fence <= first_nl) return s;
    return trim(s.substr(first_nl + 1, last_fence - first_nl - 1));
}

std::vector<std::string> numbered_or_bulleted_lines(const std::string& s) {
    std::vector<std::string> out;
    size_t pos = 0;
    while (pos <= s.size()) {
        size_t nl = s.find('\n', pos);
        std::string line = trim(s.substr(pos, nl == std::string::npos ? nl : nl - pos));
        pos = nl == std::string::npos ? s.size() + 1 : nl + 1;
        if (line.empty()) continue;
        if (line[0] == '-') {
            std::string rest = trim(line.substr(1));
            if (!rest.empty()) out.push_back(rest);
            continue;
        }
        size_t i = 0;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i > 0 && i < line.size() && line[i] == '.') {
            std::string rest = trim(line.substr(i + 1));
            if (!rest.empty()) out.push_back(rest);
        }
    }
    return out;
}

}  // namespace

std::vector<std::string> parse_segment_list(const std::string& raw) {
    if (trim(raw).empty()) return {};
    const std::string s = strip_code_fences(raw);

    json parsed = json::parse(s, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_array()) {
        std::vector<std::string> out;
        for (const auto& item : parsed) {
            if (!item.is_string()) {
                out.clear();
                break;
            }
            std::string seg = trim(item.get<std::string>());
            if (!seg.empty()) out.push_back(std::move(seg));
        }
        if (!out.empty()) return out;
        if (parsed.empty()) return {};
    }

    auto lines = numbered_or_bulleted_lines(s);
    if (!lines.empty()) return lines;
    throw SegmentParseError("could not parse segment list from model output");
}

ParsedObservations parse_observation_list(const std::string& raw,
                                          const std::vector<Schema>& candidates) {
    ParsedObservations result;
    if (trim(raw).empty()) {
        result.diagnostics.push_back("empty model output");
        return result;
    }
    const std::string s = strip_code_fences(raw);

    json parsed = json::parse(s, nullptr, false);
    if (parsed.is_discarded() || !parsed.is_array())
        throw ObservationParseError("expected a JSON array of observations");

    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& item : parsed) {
        if (!item.is_object() || !item.contains("schema") || !item.contains("value")) {
            result.diagnostics.push_back("item missing schema/value, dropped");
            continue;
        }
        const std::string raw_name = trim(item["schema"].get<std::string>());
        const std::string lower_name = to_lower(raw_name);

        const Schema* match = nullptr;
        for (const auto& c : candidates)
            if (to_lower(trim(c.name)) == lower_name) {
                match = &c;
                break;
            }
        if (!match) {
            result.diagnostics.push_back("schema not in candidate list: " + raw_name);
            continue;
        }

        std::string value = trim(item["value"].get<std::string>());
        if (!match->options.empty()) {
            bool snapped = false;
            for (const auto& opt : match->options)
                if (to_lower(trim(opt)) == to_lower(value)) {
                    value = opt;
                    snapped = true;
                    break;
                }
            if (!snapped)
                result.diagnostics.push_back("off-enumeration value for " + match->name + ": " +
                                             value);
        }

        auto key = std::make_pair(to_lower(match->name), to_lower(value));
        if (seen.insert(key).second)
            result.observations.push_back({match->name, value});
    }
    return result;
}

}  // namespace dictation_rag
