#include "dictation_rag/ontology.hpp"

#include <fstream>
#include <iostream>
#include <set>
#include <unordered_set>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/llm_gateway.hpp"
#include "dictation_rag/text.hpp"
#include "json.hpp"

namespace dictation_rag {

using nlohmann::json;

std::vector<Schema> load_ontology(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open ontology file: " + path);
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded() || !doc.is_array())
        throw MalformedOntology("ontology must be a JSON array");

    std::vector<Schema> out;
    std::unordered_set<std::string> seen;
    for (const auto& item : doc) {
        if (!item.is_object()) throw MalformedOntology("schema entry must be an object");
        if (!item.contains("id") || !item.at("id").is_string())
            throw MalformedOntology("schema missing \"id\"");
        if (!item.contains("name") || !item.at("name").is_string())
            throw MalformedOntology("schema missing \"name\"");
        Schema s;
        s.id = item.at("id").get<std::string>();
        s.name = item.at("name").get<std::string>();
        if (s.name.empty()) throw MalformedOntology("empty schema name for id " + s.id);
        if (!seen.insert(s.id).second) throw DuplicateSchemaId(s.id);
        if (item.contains("description") && item.at("description").is_string()) {
            std::string d = item.at("description").get<std::string>();
            if (!trim(d).empty()) s.description = std::move(d);
        }
        if (item.contains("options")) {
            std::set<std::string> dedup;
            for (const auto& opt : item.at("options")) {
                std::string o = trim(opt.get<std::string>());
                if (o.empty()) continue;
                if (dedup.insert(o).second)
                    s.options.push_back(std::move(o));
                else
                    std::cerr << "warning: duplicate option \"" << o << "\" in schema " << s.id
                              << " collapsed\n";
            }
        }
        if (item.contains("unit") && item.at("unit").is_string())
            s.unit = item.at("unit").get<std::string>();
        out.push_back(std::move(s));
    }
    return out;
}

void save_ontology(const std::vector<Schema>& schemas, const std::string& path) {
    json doc = json::array();
    for (const auto& s : schemas) {
        json item;
        item["id"] = s.id;
        item["name"] = s.name;
        if (s.description) item["description"] = *s.description;
        item["options"] = s.options;
        if (s.unit) item["unit"] = *s.unit;
        doc.push_back(std::move(item));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open output file: " + path);
    out << doc.dump(2) << '\n';
}

std::string format_schema(const Schema& s) {
    std::string out = s.name + ".";
    if (s.description) out += " " + *s.description;
    if (!s.options.empty()) {
        out += " Options:";
        for (size_t i = 0; i < s.options.size(); ++i)
            out += (i == 0 ? " " : ", ") + s.options[i];
    }
    return out;
}

std::string generate_description(const Schema& s, LlmGateway& llm) {
    std::string options;
    for (size_t i = 0; i < s.options.size(); ++i) options += (i == 0 ? "" : ", ") + s.options[i];
    if (options.empty()) options = "(free text)";
    std::string raw = llm.run("describe", {{"name", s.name}, {"options", options}});
    std::string desc = trim(raw);
    if (desc.empty()) throw DescriptionEmpty(s.id);
    if (desc.size() > 500) desc.resize(500);
    return desc;
}

std::vector<Schema> augment_ontology(std::vector<Schema> schemas, LlmGateway& llm, bool force,
                                     const std::string& out_path) {
    std::vector<std::string> failures;
    for (auto& s : schemas) {
        if (s.description && !force) continue;
        try {
            s.description = generate_description(s, llm);
        } catch (const std::exception& e) {
            failures.push_back(s.id + ": " + e.what());
        }
    }
    if (!failures.empty()) {
        std::string msg = "description generation failed for " +
                          std::to_string(failures.size()) + " schema(s):";
        for (const auto& f : failures) msg += "\n  " + f;
        throw MalformedOntology(msg);
    }
    save_ontology(schemas, out_path);
    return schemas;
}

}  // namespace dictation_rag
