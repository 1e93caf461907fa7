#include <cstdio>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "dictation_rag/config.hpp"
#include "dictation_rag/corpus.hpp"
#include "dictation_rag/dense_index.hpp"
#include "dictation_rag/errors.hpp"
#include "dictation_rag/evaluation.hpp"
#include "dictation_rag/fusion.hpp"
#include "dictation_rag/llm_gateway.hpp"
#include "dictation_rag/memory_bank.hpp"
#include "dictation_rag/ontology.hpp"
#include "dictation_rag/pipeline.hpp"
#include "dictation_rag/sparse_index.hpp"
#include "dictation_rag/text.hpp"
#include "json.hpp"

using namespace dictation_rag;
using nlohmann::json;

namespace {

struct CommonOpts {
    std::string config_path;
    std::string ontology_path;
    std::string bank_path;
    std::string out_path;
    std::string mock_script;
    std::string backend;
    std::string generator_model;
    std::string segmenter_model;
    std::string prompts_dir = "prompts";
    int shots = -1;
    int schemas = -1;
    double alpha = -1.0;
};

void add_llm_flags(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--backend", opts.backend, "LLM backend: remote or mock");
    cmd->add_option("--mock-script", opts.mock_script, "scripted mock responses (JSONL)");
    cmd->add_option("--generator-model", opts.generator_model, "generator model name");
    cmd->add_option("--segmenter-model", opts.segmenter_model, "segmenter model name");
    cmd->add_option("--prompts", opts.prompts_dir, "prompt template directory");
}

PipelineConfig build_config(const CommonOpts& opts) {
    PipelineConfig cfg;
    if (!opts.config_path.empty()) cfg = load_pipeline_config(opts.config_path);
    if (opts.shots >= 0) cfg.k_examples = opts.shots;
    if (opts.schemas >= 0) cfg.n_schemas = opts.schemas;
    if (opts.alpha >= 0.0) {
        if (opts.alpha > 1.0) throw ConfigError("--alpha must lie in [0, 1]");
        cfg.schema_fusion.alpha = opts.alpha;
        cfg.example_fusion.alpha = opts.alpha;
    }
    auto apply_backend = [&](LlmProfile& p) {
        if (opts.backend == "remote")
            p.backend = LlmProfile::Backend::remote;
        else if (opts.backend == "mock")
            p.backend = LlmProfile::Backend::mock;
        else if (!opts.backend.empty())
            throw ConfigError("--backend must be remote or mock");
    };
    apply_backend(cfg.generator);
    apply_backend(cfg.segmenter);
    if (!opts.generator_model.empty()) cfg.generator.model = opts.generator_model;
    if (!opts.segmenter_model.empty()) cfg.segmenter.model = opts.segmenter_model;
    return cfg;
}

std::shared_ptr<ScriptedMock> load_mock(const CommonOpts& opts) {
    if (opts.mock_script.empty())
        throw ConfigError("mock backend requires --mock-script PATH");
    return std::make_shared<ScriptedMock>(ScriptedMock::from_file(opts.mock_script));
}

LlmGateway make_gateway(const LlmProfile& profile, const CommonOpts& opts,
                        std::shared_ptr<ScriptedMock>& mock_cache) {
    LlmGateway gw(profile, PromptTemplates::from_dir(opts.prompts_dir));
    if (profile.backend == LlmProfile::Backend::mock) {
        if (!mock_cache) mock_cache = load_mock(opts);
        gw.set_mock(mock_cache);
    }
    return gw;
}

int cmd_describe(const CommonOpts& opts, bool force) {
    PipelineConfig cfg = build_config(opts);
    auto schemas = load_ontology(opts.ontology_path);
    std::shared_ptr<ScriptedMock> mock;
    LlmGateway gw = make_gateway(cfg.generator, opts, mock);
    auto out = augment_ontology(std::move(schemas), gw, force,
                                opts.out_path.empty() ? opts.ontology_path : opts.out_path);
    std::cout << "described " << out.size() << " schemas (" << gw.call_count()
              << " gateway calls)\n";
    return 0;
}

int cmd_build_memory(const CommonOpts& opts, const std::string& dictations_path) {
    PipelineConfig cfg = build_config(opts);
    auto corpus = load_dictations(dictations_path);
    std::shared_ptr<ScriptedMock> mock;
    LlmGateway gw = make_gateway(cfg.generator, opts, mock);
    BankSummary s = build_memory_bank(corpus, gw, opts.out_path);
    json doc = {{"entries", s.entry_count},
                {"gold_total", s.gold_total},
                {"gold_covered", s.gold_covered},
                {"coverage", s.coverage},
                {"dropped", s.dropped},
                {"failed_dictations", s.failed_dictations}};
    std::cout << doc.dump(2) << '\n';
    return 0;
}

int cmd_extract(const CommonOpts& opts, const std::string& dictations_path) {
    PipelineConfig cfg = build_config(opts);
    auto corpus = load_dictations(dictations_path);
    auto schemas = load_ontology(opts.ontology_path);
    auto bank = load_memory_bank(opts.bank_path);

    HashedBagEmbedder embedder(cfg.embedding_dimension);
    SchemaRetriever schema_retriever(std::move(schemas), embedder, cfg.schema_fusion);
    ExampleRetriever example_retriever(std::move(bank), embedder, cfg.example_fusion);

    std::shared_ptr<ScriptedMock> mock;
    LlmGateway generator = make_gateway(cfg.generator, opts, mock);
    LlmGateway segmenter = make_gateway(cfg.segmenter, opts, mock);

    RunSummary summary = run_pipeline(corpus, schema_retriever, example_retriever, cfg,
                                      generator, segmenter, opts.out_path);
    std::cout << summary_to_json(summary) << '\n';
    return 0;
}

int cmd_retrieve(const CommonOpts& opts, const std::string& segment_text, bool as_json) {
    PipelineConfig cfg = build_config(opts);
    auto schemas = load_ontology(opts.ontology_path);
    auto bank = load_memory_bank(opts.bank_path);
    HashedBagEmbedder embedder(cfg.embedding_dimension);

    auto query_tokens = tokenize(segment_text);
    auto query_vec = embedder.embed(segment_text);

    struct Row {
        std::string id, text;
        double lexical, dense, fused;
    };
    auto rank = [&](const std::vector<std::pair<std::string, std::string>>& docs,
                    SparseScorer scorer, const FusionConfig& fusion,
                    int n) -> std::vector<Row> {
        auto sparse = SparseIndex::build(docs);
        std::vector<std::pair<std::string, EmbeddingVector>> vecs;
        for (const auto& [id, text] : docs) vecs.emplace_back(id, embedder.embed(text));
        auto dense = DenseIndex::from_vectors(vecs);
        const int fetch = n * fusion.candidate_pool_multiplier;
        auto lex_hits = top_k_sparse(sparse, query_tokens, fetch, scorer);
        auto dense_hits = top_k_dense(dense, query_vec, fetch);
        auto fused = fuse(lex_hits, dense_hits, fusion.alpha, n);
        std::vector<Row> rows;
        for (const auto& f : fused) {
            Row r{f.doc_id, "", 0.0, 0.0, f.score};
            for (const auto& h : lex_hits)
                if (h.doc_id == f.doc_id) r.lexical = h.score;
            for (const auto& h : dense_hits)
                if (h.doc_id == f.doc_id) r.dense = h.score;
            for (const auto& [id, text] : docs)
                if (id == f.doc_id) r.text = text;
            rows.push_back(std::move(r));
        }
        return rows;
    };

    std::vector<std::pair<std::string, std::string>> schema_docs, bank_docs;
    for (const auto& s : schemas) schema_docs.emplace_back(s.id, format_schema(s));
    for (const auto& e : bank) bank_docs.emplace_back(e.id, e.segment_text);

    auto schema_rows = rank(schema_docs, SparseScorer::tfidf, cfg.schema_fusion, cfg.n_schemas);
    std::vector<Row> example_rows;
    if (!bank_docs.empty())
        example_rows = rank(bank_docs, SparseScorer::bm25, cfg.example_fusion, cfg.k_examples);

    if (as_json) {
        auto rows_to_json = [](const std::vector<Row>& rows) {
            json arr = json::array();
            for (const auto& r : rows)
                arr.push_back({{"id", r.id},
                               {"text", r.text},
                               {"lexical", r.lexical},
                               {"dense", r.dense},
                               {"fused", r.fused}});
            return arr;
        };
        json doc = {{"schemas", rows_to_json(schema_rows)},
                    {"examples", rows_to_json(example_rows)}};
        std::cout << doc.dump(2) << '\n';
    } else {
        auto print_rows = [](const char* title, const std::vector<Row>& rows) {
            std::cout << title << '\n';
            int rank_no = 1;
            for (const auto& r : rows)
                std::printf("  %2d. %-24s lexical=%.6f dense=%.6f fused=%.6f\n", rank_no++,
                            r.id.c_str(), r.lexical, r.dense, r.fused);
        };
        print_rows("schemas:", schema_rows);
        print_rows("examples:", example_rows);
    }
    return 0;
}

int cmd_evaluate(const std::string& pred_path, const std::string& gold_path,
                 const std::string& report_path) {
    auto preds = load_predictions(pred_path);
    auto golds = load_dictations(gold_path);
    EvalReport report = evaluate_corpus(preds, golds);
    std::printf("%.6f %.6f %.6f\n", report.precision, report.recall, report.f1);
    write_report(report, report_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Retrieval-augmented extraction of clinical observations from nurse dictations"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string dictations_path, segment_text, pred_path, gold_path;
    std::string report_path = "report.json";
    bool force = false, as_json = false;

    auto* describe = app.add_subcommand("describe", "generate missing schema descriptions");
    describe->add_option("--config", opts.config_path, "TOML config file");
    describe->add_option("--ontology", opts.ontology_path, "ontology JSON")->required();
    describe->add_option("--out", opts.out_path, "output path (defaults to in-place)");
    describe->add_flag("--force", force, "regenerate existing descriptions too");
    add_llm_flags(describe, opts);

    auto* build_memory = app.add_subcommand("build-memory", "build the few-shot memory bank");
    build_memory->add_option("--config", opts.config_path, "TOML config file");
    build_memory->add_option("--dictations", dictations_path, "annotated dictations JSONL")
        ->required();
    build_memory->add_option("--out", opts.out_path, "bank output JSONL")->required();
    add_llm_flags(build_memory, opts);

    auto* extract = app.add_subcommand("extract", "run the extraction pipeline");
    extract->add_option("--config", opts.config_path, "TOML config file");
    extract->add_option("--dictations", dictations_path, "input dictations JSONL")->required();
    extract->add_option("--ontology", opts.ontology_path, "ontology JSON")->required();
    extract->add_option("--bank", opts.bank_path, "memory bank JSONL")->required();
    extract->add_option("--out", opts.out_path, "prediction output JSONL")->required();
    extract->add_option("--shots", opts.shots, "few-shot examples per segment (K)");
    extract->add_option("--schemas", opts.schemas, "retrieved schemas per segment (N)");
    extract->add_option("--alpha", opts.alpha, "lexical weight of the hybrid fusion");
    add_llm_flags(extract, opts);

    auto* retrieve = app.add_subcommand("retrieve", "inspect both retrievers for a query");
    retrieve->add_option("--config", opts.config_path, "TOML config file");
    retrieve->add_option("--segment", segment_text, "query segment text")->required();
    retrieve->add_option("--ontology", opts.ontology_path, "ontology JSON")->required();
    retrieve->add_option("--bank", opts.bank_path, "memory bank JSONL")->required();
    retrieve->add_option("--shots", opts.shots, "examples to show (K)");
    retrieve->add_option("--schemas", opts.schemas, "schemas to show (N)");
    retrieve->add_option("--alpha", opts.alpha, "lexical weight of the hybrid fusion");
    retrieve->add_flag("--json", as_json, "machine-readable output");

    auto* evaluate = app.add_subcommand("evaluate", "score predictions against gold");
    evaluate->add_option("--pred", pred_path, "prediction JSONL")->required();
    evaluate->add_option("--gold", gold_path, "gold dictations JSONL")->required();
    evaluate->add_option("--report", report_path, "report JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (describe->parsed()) return cmd_describe(opts, force);
        if (build_memory->parsed()) return cmd_build_memory(opts, dictations_path);
        if (extract->parsed()) return cmd_extract(opts, dictations_path);
        if (retrieve->parsed()) return cmd_retrieve(opts, segment_text, as_json);
        if (evaluate->parsed()) return cmd_evaluate(pred_path, gold_path, report_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
