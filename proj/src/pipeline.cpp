#include "dictation_rag/pipeline.hpp"

#include <cstdio>
#include <set>

#include "dictation_rag/errors.hpp"
#include "dictation_rag/evaluation.hpp"
#include "dictation_rag/text.hpp"
#include "json.hpp"

namespace dictation_rag {

using nlohmann::json;

std::string render_schema_block(const std::vector<Schema>& schemas) {
    std::string out;
    for (size_t i = 0; i < schemas.size(); ++i)
        out += std::to_string(i + 1) + ". " + format_schema(schemas[i]) + "\n";
    return out;
}

std::string render_example_block(const std::vector<MemoryEntry>& examples) {
    if (examples.empty()) return "";
    std::string out = "Examples of segments and their observations:\n";
    for (const auto& e : examples) {
        json obs = json::array();
        for (const auto& o : e.observations)
            obs.push_back({{"schema", o.schema_name}, {"value", o.value}});
        out += "Segment: " + e.segment_text + " -> Observations: " + obs.dump() + "\n";
    }
    out += "\n";
    return out;
}

std::vector<Segment> segment_dictation(const Dictation& d, LlmGateway& segmenter) {
    if (trim(d.text).empty()) return {};
    const Bindings bindings = {{"dictation", d.text}};
    std::vector<std::string> texts;
    try {
        texts = parse_segment_list(segmenter.run("segment", bindings));
    } catch (const SegmentParseError&) {
        try {
            texts = parse_segment_list(segmenter.run("segment", bindings, kSegmentRepairHint));
        } catch (const SegmentParseError& e) {
            throw SegmentationError("dictation " + d.id + ": " + e.what());
        }
    }
    std::vector<Segment> segments;
    int index = 0;
    for (auto& t : texts) {
        if (d.text.find(t) == std::string::npos)
            std::fprintf(stderr, "note: segment of %s is not a substring of the dictation\n",
                         d.id.c_str());
        segments.push_back({d.id, index++, std::move(t)});
    }
    return segments;
}

SegmentExtraction extract_segment(const Segment& seg, const SchemaRetriever& schemas,
                                  const ExampleRetriever& bank, const PipelineConfig& cfg,
                                  LlmGateway& generator) {
    SegmentExtraction result;
    auto candidates = schemas.retrieve(seg.text, cfg.n_schemas);
    auto examples = bank.retrieve(seg.text, cfg.k_examples);
    if (bank.pool_size() == 0) result.diagnostics.push_back("zero-shot: memory bank is empty");

    const Bindings bindings = {{"schemas", render_schema_block(candidates)},
                               {"examples", render_example_block(examples)},
                               {"segment", seg.text}};
    ParsedObservations parsed;
    try {
        parsed = parse_observation_list(generator.run("observe", bindings), candidates);
    } catch (const ObservationParseError&) {
        try {
            parsed = parse_observation_list(generator.run("observe", bindings, kObserveRepairHint),
                                            candidates);
        } catch (const ObservationParseError& e) {
            result.diagnostics.push_back("segment " + seg.dictation_id + "#" +
                                         std::to_string(seg.index) +
                                         " extraction failed: " + e.what());
            return result;
        }
    }
    result.observations = std::move(parsed.observations);
    result.diagnostics.insert(result.diagnostics.end(), parsed.diagnostics.begin(),
                              parsed.diagnostics.end());
    return result;
}

std::string summary_to_json(const RunSummary& summary) {
    json fails = json::array();
    for (const auto& f : summary.failures)
        fails.push_back({{"id", f.id}, {"stage", f.stage}, {"reason", f.reason}});
    json doc = {{"dictations", summary.dictations},
                {"segments", summary.segments},
                {"calls", summary.calls},
                {"failures", fails}};
    return doc.dump(2);
}

RunSummary run_pipeline(const std::vector<Dictation>& corpus, const SchemaRetriever& schemas,
                        const ExampleRetriever& bank, const PipelineConfig& cfg,
                        LlmGateway& generator, LlmGateway& segmenter,
                        const std::string& out_path) {
    for (const auto& s : schemas.schemas())
        if (!s.description || trim(*s.description).empty())
            throw ConfigError("schema \"" + s.name +
                              "\" has no description; run the describe command first");

    RunSummary summary;
    summary.dictations = static_cast<int>(corpus.size());
    const int calls_before = generator.call_count() + segmenter.call_count();

    std::vector<PredictionRecord> records;
    records.reserve(corpus.size());
    for (const auto& d : corpus) {
        PredictionRecord rec;
        rec.dictation_id = d.id;
        std::vector<Segment> segments;
        try {
            segments = segment_dictation(d, segmenter);
        } catch (const SegmentationError& e) {
            rec.diagnostics.push_back(std::string("segmentation failed: ") + e.what());
            summary.failures.push_back({d.id, "segment", e.what()});
            records.push_back(std::move(rec));
            continue;
        }
        summary.segments += static_cast<int>(segments.size());

        std::set<std::pair<std::string, std::string>> seen;
        for (const auto& seg : segments) {
            SegmentExtraction ext;
            try {
                ext = extract_segment(seg, schemas, bank, cfg, generator);
            } catch (const std::exception& e) {
                rec.diagnostics.push_back("extraction failed: " + std::string(e.what()));
                summary.failures.push_back({d.id, "extract", e.what()});
                continue;
            }
            for (auto& o : ext.observations) {
                auto key = std::make_pair(to_lower(trim(o.schema_name)),
                                          normalize_value(o.value));
                if (seen.insert(key).second) rec.observations.push_back(std::move(o));
            }
            rec.diagnostics.insert(rec.diagnostics.end(), ext.diagnostics.begin(),
                                   ext.diagnostics.end());
        }
        records.push_back(std::move(rec));
    }
    write_predictions(records, out_path);
    summary.calls = generator.call_count() + segmenter.call_count() - calls_before;
    return summary;
}

}  // namespace dictation_rag
