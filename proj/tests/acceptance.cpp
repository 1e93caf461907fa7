// Acceptance suite: each test case prints one [criterion N] PASS line when it
// completes; a doctest failure aborts the case before the line is printed.

#include <sys/wait.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <memory>
#include <random>
#include <set>
#include <thread>

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
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_util.hpp"

using namespace dictation_rag;
using nlohmann::json;
using test_util::TempDir;

namespace {

const auto g_suite_start = std::chrono::steady_clock::now();

// ---------------------------------------------------------------------------
// Criterion 1 oracles: independent brute-force evaluation from raw documents.

using Docs = std::vector<std::pair<std::string, std::string>>;

double oracle_bm25(const Docs& docs, const std::vector<std::string>& query,
                   const std::string& doc_id) {
    const double k1 = 1.2, b = 0.75;
    std::map<std::string, std::vector<std::string>> toks;
    for (const auto& [id, text] : docs) toks[id] = tokenize(text);
    const double n = static_cast<double>(docs.size());
    double total = 0;
    for (const auto& [id, ts] : toks) total += static_cast<double>(ts.size());
    const double avgdl = docs.empty() ? 0.0 : total / n;
    const double dl = static_cast<double>(toks.at(doc_id).size());

    std::set<std::string> q(query.begin(), query.end());
    double score = 0.0;
    for (const auto& t : q) {
        double tf = 0, df = 0;
        for (const auto& tok : toks.at(doc_id))
            if (tok == t) ++tf;
        for (const auto& [id, ts] : toks)
            for (const auto& tok : ts)
                if (tok == t) {
                    ++df;
                    break;
                }
        if (tf == 0) continue;
        score += std::log(1.0 + (n - df + 0.5) / (df + 0.5)) * tf * (k1 + 1.0) /
                 (tf + k1 * (1.0 - b + (avgdl > 0 ? b * dl / avgdl : 0.0)));
    }
    return score;
}

double oracle_tfidf(const Docs& docs, const std::vector<std::string>& query,
                    const std::string& doc_id) {
    std::map<std::string, std::vector<std::string>> toks;
    for (const auto& [id, text] : docs) toks[id] = tokenize(text);
    const double n = static_cast<double>(docs.size());
    auto idf = [&](const std::string& t) {
        double df = 0;
        for (const auto& [id, ts] : toks)
            for (const auto& tok : ts)
                if (tok == t) {
                    ++df;
                    break;
                }
        return std::log((1.0 + n) / (1.0 + df)) + 1.0;
    };
    std::map<std::string, double> qv, dv;
    for (const auto& t : query) qv[t] += 1.0;
    for (auto& [t, w] : qv) w *= idf(t);
    for (const auto& t : toks.at(doc_id)) dv[t] += 1.0;
    for (auto& [t, w] : dv) w *= idf(t);
    double dot = 0, qn = 0, dn = 0;
    for (const auto& [t, w] : qv) {
        qn += w * w;
        if (dv.count(t)) dot += w * dv.at(t);
    }
    for (const auto& [t, w] : dv) dn += w * w;
    if (qn == 0 || dn == 0) return 0.0;
    return dot / (std::sqrt(qn) * std::sqrt(dn));
}

Docs random_corpus(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_docs(0, 20), n_toks(0, 8), term(0, 9);
    Docs docs;
    const int count = n_docs(rng);
    for (int i = 0; i < count; ++i) {
        std::string text;
        const int len = n_toks(rng);
        for (int j = 0; j < len; ++j) text += "t" + std::to_string(term(rng)) + " ";
        docs.emplace_back("d" + std::to_string(i), text);
    }
    return docs;
}

std::vector<std::string> random_query(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_toks(0, 6), term(0, 9);
    std::vector<std::string> q;
    const int len = n_toks(rng);
    for (int i = 0; i < len; ++i) q.push_back("t" + std::to_string(term(rng)));
    return q;
}

// ---------------------------------------------------------------------------
// End-to-end fixture: 12 schemas, 5 dictations (3 gold observations each),
// 20 memory-bank entries.

Schema fixture_schema(const std::string& id, const std::string& name,
                      const std::string& description,
                      std::vector<std::string> options = {}) {
    Schema s;
    s.id = id;
    s.name = name;
    s.description = description;
    s.options = std::move(options);
    return s;
}

std::vector<Schema> fixture_schemas() {
    return {
        fixture_schema("s01", "Pulse rate", "Heart rate in beats per minute."),
        fixture_schema("s02", "Blood pressure", "Arterial pressure reading."),
        fixture_schema("s03", "Body temperature", "Core body temperature."),
        fixture_schema("s04", "Respiratory rate", "Breaths per minute."),
        fixture_schema("s05", "Oxygen saturation", "Peripheral oxygen saturation."),
        fixture_schema("s06", "Alertness", "Level of consciousness.",
                       {"Alert", "Drowsy", "Unresponsive"}),
        fixture_schema("s07", "Weight-bearing status", "Degree of weight allowed on a limb.",
                       {"Full", "Partial", "Non-weight-bearing"}),
        fixture_schema("s08", "Pain level", "Reported intensity of pain.",
                       {"None", "Mild", "Moderate", "Severe"}),
        fixture_schema("s09", "Mobility aid", "Assistive device in use.",
                       {"None", "Walker", "Wheelchair"}),
        fixture_schema("s10", "Diet type", "Prescribed diet consistency.",
                       {"Regular", "Soft", "NPO"}),
        fixture_schema("s11", "Wound status", "Appearance of the wound site.",
                       {"Clean", "Red", "Draining"}),
        fixture_schema("s12", "Fall risk", "Assessed risk of falling.", {"Low", "High"}),
    };
}

struct FixtureSentence {
    std::string text;
    Observation gold;
};

struct FixtureDictation {
    std::string id;
    std::vector<FixtureSentence> sentences;
    std::string text() const {
        std::string out;
        for (size_t i = 0; i < sentences.size(); ++i)
            out += (i == 0 ? "" : " ") + sentences[i].text;
        return out;
    }
    std::vector<Observation> gold() const {
        std::vector<Observation> out;
        for (const auto& s : sentences) out.push_back(s.gold);
        return out;
    }
};

std::vector<FixtureDictation> fixture_dictations() {
    return {
        {"d1",
         {{"Pulse is 72 and regular.", {"Pulse rate", "72"}},
          {"Blood pressure 120 over 80.", {"Blood pressure", "120/80"}},
          {"Patient is alert.", {"Alertness", "Alert"}}}},
        {"d2",
         {{"Temperature is 37.2 this morning.", {"Body temperature", "37.2"}},
          {"Respiratory rate 16.", {"Respiratory rate", "16"}},
          {"Oxygen saturation 98 percent.", {"Oxygen saturation", "98"}}}},
        {"d3",
         {{"Ambulating with full weight bearing.", {"Weight-bearing status", "Full"}},
          {"Pain reported as mild.", {"Pain level", "Mild"}},
          {"Uses a walker for mobility.", {"Mobility aid", "Walker"}}}},
        {"d4",
         {{"Diet is soft as tolerated.", {"Diet type", "Soft"}},
          {"Wound edges clean and dry.", {"Wound status", "Clean"}},
          {"Fall risk assessed as high.", {"Fall risk", "High"}}}},
        {"d5",
         {{"Pulse noted at 88 tonight.", {"Pulse rate", "88"}},
          {"Pain level severe after therapy.", {"Pain level", "Severe"}},
          {"Patient drowsy this evening.", {"Alertness", "Drowsy"}}}},
    };
}

std::vector<MemoryEntry> fixture_bank() {
    auto schemas = fixture_schemas();
    std::vector<MemoryEntry> bank;
    for (int i = 0; i < 20; ++i) {
        const auto& s = schemas[i % schemas.size()];
        std::string value = s.options.empty() ? std::to_string(60 + i) : s.options[i % s.options.size()];
        MemoryEntry e;
        e.id = "ex" + std::to_string(i);
        e.segment_text = "training note " + std::to_string(i) + " about " +
                         to_lower(s.name) + " recorded as " + value + ".";
        e.observations = {{s.name, value}};
        e.source_dictation_id = "t" + std::to_string(i);
        e.builder_model = "mock";
        bank.push_back(std::move(e));
    }
    return bank;
}

std::string obs_json(const std::vector<Observation>& obs) {
    json arr = json::array();
    for (const auto& o : obs) arr.push_back({{"schema", o.schema_name}, {"value", o.value}});
    return arr.dump();
}

// Scripts segment + observe responses for the fixture using the same
// retrievers and prompt-block renderers the pipeline uses.
struct E2eHarness {
    HashedBagEmbedder embedder{256};
    PipelineConfig cfg;  // defaults: N = 10, K = 15
    SchemaRetriever schemas{fixture_schemas(), embedder};
    ExampleRetriever bank{fixture_bank(), embedder};

    Bindings observe_bindings(const std::string& seg, int k) const {
        return {{"schemas", render_schema_block(schemas.retrieve(seg, cfg.n_schemas))},
                {"examples", render_example_block(bank.retrieve(seg, k))},
                {"segment", seg}};
    }

    // responses(dictation, sentence) -> observation list the mock should emit
    std::shared_ptr<ScriptedMock> make_mock(
        const std::function<std::vector<Observation>(const FixtureDictation&,
                                                     const FixtureSentence&)>& responses,
        std::vector<int> shots = {}) const {
        if (shots.empty()) shots = {cfg.k_examples};
        auto mock = std::make_shared<ScriptedMock>();
        for (const auto& d : fixture_dictations()) {
            std::vector<std::string> seg_texts;
            for (const auto& s : d.sentences) seg_texts.push_back(s.text);
            mock->script("segment", {{"dictation", d.text()}}, json(seg_texts).dump());
            for (const auto& s : d.sentences)
                for (int k : shots)
                    mock->script("observe", observe_bindings(s.text, k),
                                 obs_json(responses(d, s)));
        }
        return mock;
    }

    RunSummary run(std::shared_ptr<ScriptedMock> mock, const std::string& out_path,
                   int k_examples = -1) {
        PipelineConfig run_cfg = cfg;
        if (k_examples >= 0) run_cfg.k_examples = k_examples;
        LlmGateway generator{LlmProfile{}}, segmenter{LlmProfile{}};
        generator.set_mock(mock);
        segmenter.set_mock(mock);
        std::vector<Dictation> corpus;
        for (const auto& d : fixture_dictations()) {
            Dictation dd;
            dd.id = d.id;
            dd.text = d.text();
            dd.gold_observations = d.gold();
            corpus.push_back(std::move(dd));
        }
        return run_pipeline(corpus, schemas, bank, run_cfg, generator, segmenter, out_path);
    }

    std::vector<Dictation> gold_corpus() const {
        std::vector<Dictation> corpus;
        for (const auto& d : fixture_dictations()) {
            Dictation dd;
            dd.id = d.id;
            dd.text = d.text();
            dd.gold_observations = d.gold();
            corpus.push_back(std::move(dd));
        }
        return corpus;
    }
};

std::string run_cli(const std::string& args, int* exit_code = nullptr) {
    const std::string cmd = std::string(DICTATION_RAG_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[512];
    while (size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int status = ::pclose(pipe);
    if (exit_code) *exit_code = WEXITSTATUS(status);
    return out;
}

}  // namespace

TEST_CASE("criterion 1: sparse scorers match brute-force oracles on 100 random corpora") {
    const auto start = std::chrono::steady_clock::now();
    std::mt19937 rng(112358);
    for (int trial = 0; trial < 100; ++trial) {
        auto docs = random_corpus(rng);
        auto query = random_query(rng);
        auto idx = SparseIndex::build(docs);
        std::vector<std::pair<double, std::string>> bm25_expected, tfidf_expected;
        for (const auto& [id, _] : docs) {
            const double ob = oracle_bm25(docs, query, id);
            const double ot = oracle_tfidf(docs, query, id);
            REQUIRE(std::fabs(bm25_score(idx, query, id) - ob) < 1e-9);
            REQUIRE(std::fabs(tfidf_cosine(idx, query, id) - ot) < 1e-9);
            bm25_expected.emplace_back(ob, id);
            tfidf_expected.emplace_back(ot, id);
        }
        auto by_score = [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        };
        std::sort(bm25_expected.begin(), bm25_expected.end(), by_score);
        std::sort(tfidf_expected.begin(), tfidf_expected.end(), by_score);
        auto bm25_hits = top_k_sparse(idx, query, idx.doc_count(), SparseScorer::bm25);
        auto tfidf_hits = top_k_sparse(idx, query, idx.doc_count(), SparseScorer::tfidf);
        for (size_t i = 0; i < bm25_hits.size(); ++i)
            REQUIRE(bm25_hits[i].doc_id == bm25_expected[i].second);
        for (size_t i = 0; i < tfidf_hits.size(); ++i)
            REQUIRE(tfidf_hits[i].doc_id == tfidf_expected[i].second);
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed < 5.0);
    std::printf("[criterion 1] sparse-scorer oracle equivalence (%.2fs) PASS\n", elapsed);
}

TEST_CASE("criterion 2: fusion boundaries reproduce the component rankings") {
    std::mt19937 rng(271828);
    std::uniform_int_distribution<int> pool_size(1, 15);
    std::uniform_real_distribution<double> score(0.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
        const int pool = pool_size(rng);
        auto make = [&] {
            std::vector<std::pair<std::string, double>> scored;
            for (int i = 0; i < pool; ++i) scored.emplace_back("d" + std::to_string(i), score(rng));
            std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
            });
            std::vector<RetrievalHit> hits;
            for (size_t i = 0; i < scored.size(); ++i)
                hits.push_back({scored[i].first, scored[i].second, static_cast<int>(i) + 1});
            return hits;
        };
        auto lex = make();
        auto dense = make();
        auto only_lex = fuse(lex, dense, 1.0, pool);
        auto only_dense = fuse(lex, dense, 0.0, pool);
        REQUIRE(only_lex.size() == lex.size());
        REQUIRE(only_dense.size() == dense.size());
        for (size_t i = 0; i < lex.size(); ++i) REQUIRE(only_lex[i].doc_id == lex[i].doc_id);
        for (size_t i = 0; i < dense.size(); ++i)
            REQUIRE(only_dense[i].doc_id == dense[i].doc_id);
        for (double alpha : {0.0, 0.25, 0.5, 0.75, 1.0})
            for (const auto& h : fuse(lex, dense, alpha, pool)) {
                REQUIRE(h.score >= 0.0);
                REQUIRE(h.score <= 1.0 + 1e-12);
            }
    }
    std::printf("[criterion 2] fusion boundary behavior PASS\n");
}

TEST_CASE("criterion 3: metric correctness") {
    auto r = micro_prf({1, 1, 1});
    CHECK(r.precision == doctest::Approx(0.5));
    CHECK(r.recall == doctest::Approx(0.5));
    CHECK(r.f1 == doctest::Approx(0.5));

    r = micro_prf({3, 1, 2});
    CHECK(r.precision == doctest::Approx(0.75));
    CHECK(r.recall == doctest::Approx(0.6));
    CHECK(std::fabs(r.f1 - 0.666667) < 1e-6);

    // pred = gold => perfect scores
    std::vector<Observation> obs = {{"Pulse", "72"}, {"Alertness", "Alert"}};
    auto perfect = micro_prf(match_counts(obs, obs));
    CHECK(perfect.precision == 1.0);
    CHECK(perfect.recall == 1.0);
    CHECK(perfect.f1 == 1.0);

    // swap symmetry on 50 random observation sets
    std::mt19937 rng(161803);
    std::uniform_int_distribution<int> count(0, 6), schema(0, 4), value(0, 3);
    auto random_obs = [&] {
        std::vector<Observation> o;
        const int n = count(rng);
        for (int i = 0; i < n; ++i)
            o.push_back({"s" + std::to_string(schema(rng)), "v" + std::to_string(value(rng))});
        return o;
    };
    for (int trial = 0; trial < 50; ++trial) {
        auto a = random_obs();
        auto b = random_obs();
        auto fwd = micro_prf(match_counts(a, b));
        auto rev = micro_prf(match_counts(b, a));
        REQUIRE(fwd.precision == rev.recall);
        REQUIRE(fwd.recall == rev.precision);
    }

    // micro consistency: corpus evaluation equals prf of summed counts
    std::vector<Dictation> golds;
    std::vector<PredictionRecord> preds;
    MatchCounts manual;
    for (int i = 0; i < 10; ++i) {
        Dictation d;
        d.id = "d" + std::to_string(i);
        d.text = "t";
        d.gold_observations = random_obs();
        auto pred_obs = random_obs();
        manual += match_counts(pred_obs, *d.gold_observations);
        preds.push_back({d.id, pred_obs, {}});
        golds.push_back(std::move(d));
    }
    auto report = evaluate_corpus(preds, golds);
    REQUIRE(manual == report.totals);
    auto prf = micro_prf(manual);
    REQUIRE(prf.precision == report.precision);
    REQUIRE(prf.recall == report.recall);
    REQUIRE(prf.f1 == report.f1);

    std::printf("[criterion 3] metric correctness PASS\n");
}

TEST_CASE("criterion 4: end-to-end determinism and scoring with the scripted mock") {
    const auto start = std::chrono::steady_clock::now();
    TempDir dir;
    E2eHarness h;

    // independent checker over the fixture before the run
    auto dictations = fixture_dictations();
    int gold_total = 0;
    for (const auto& d : dictations) gold_total += static_cast<int>(d.sentences.size());
    REQUIRE(gold_total == 15);
    REQUIRE(fixture_schemas().size() == 12);
    REQUIRE(fixture_bank().size() == 20);

    // perfect mock: every segment answers with its gold observation
    auto perfect = h.make_mock(
        [](const FixtureDictation&, const FixtureSentence& s) {
            return std::vector<Observation>{s.gold};
        });
    h.run(perfect, dir.file("run1.jsonl"));
    h.run(perfect, dir.file("run2.jsonl"));
    CHECK(test_util::read_file(dir.file("run1.jsonl")) ==
          test_util::read_file(dir.file("run2.jsonl")));
    CHECK(!test_util::read_file(dir.file("run1.jsonl")).empty());

    auto report = evaluate_corpus(load_predictions(dir.file("run1.jsonl")), h.gold_corpus());
    CHECK(report.precision == 1.0);
    CHECK(report.recall == 1.0);
    CHECK(report.f1 == 1.0);

    // corrupted mock: omit one gold observation, add one spurious one
    const std::string omitted_segment = "Respiratory rate 16.";
    const std::string spurious_segment = "Fall risk assessed as high.";
    auto spurious_candidates = h.schemas.retrieve(spurious_segment, h.cfg.n_schemas);
    const Observation spurious{spurious_candidates[0].name, "zzz-unmatched"};

    // verify the corruption arithmetic independently of the pipeline
    std::set<std::pair<std::string, std::string>> gold_pairs;
    for (const auto& d : dictations)
        for (const auto& s : d.sentences)
            gold_pairs.insert({to_lower(s.gold.schema_name), normalize_value(s.gold.value)});
    REQUIRE(gold_pairs.size() == 15);
    REQUIRE(gold_pairs.count({to_lower(spurious.schema_name),
                              normalize_value(spurious.value)}) == 0);

    auto corrupted = h.make_mock(
        [&](const FixtureDictation&, const FixtureSentence& s) {
            if (s.text == omitted_segment) return std::vector<Observation>{};
            if (s.text == spurious_segment) return std::vector<Observation>{s.gold, spurious};
            return std::vector<Observation>{s.gold};
        });
    h.run(corrupted, dir.file("corrupted.jsonl"));
    auto corrupted_report =
        evaluate_corpus(load_predictions(dir.file("corrupted.jsonl")), h.gold_corpus());
    CHECK(corrupted_report.totals == MatchCounts{14, 1, 1});
    CHECK(std::fabs(corrupted_report.precision - 14.0 / 15.0) < 1e-6);
    CHECK(std::fabs(corrupted_report.recall - 14.0 / 15.0) < 1e-6);
    CHECK(std::fabs(corrupted_report.f1 - 14.0 / 15.0) < 1e-6);

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(elapsed < 10.0);
    std::printf("[criterion 4] end-to-end determinism and scoring (%.2fs) PASS\n", elapsed);
}

TEST_CASE("criterion 5: default operating point N=10/K=15, --shots varies only K") {
    PipelineConfig fresh;
    REQUIRE(fresh.n_schemas == 10);
    REQUIRE(fresh.k_examples == 15);

    TempDir dir;
    E2eHarness h;
    const std::vector<int> shots = {3, 5, 10, 15};

    // one mock script covering every shots setting
    auto mock_for_all = h.make_mock(
        [](const FixtureDictation&, const FixtureSentence& s) {
            return std::vector<Observation>{s.gold};
        },
        shots);

    // persist fixture + mock script for the CLI
    save_ontology(fixture_schemas(), dir.file("ontology.json"));
    save_memory_bank(fixture_bank(), dir.file("bank.jsonl"));
    {
        std::string corpus;
        for (const auto& d : fixture_dictations()) {
            json obs = json::array();
            for (const auto& s : d.sentences)
                obs.push_back({{"schema", s.gold.schema_name}, {"value", s.gold.value}});
            json rec = {{"id", d.id}, {"text", d.text()}, {"observations", obs}};
            corpus += rec.dump() + "\n";
        }
        test_util::write_file(dir.file("dictations.jsonl"), corpus);

        std::string script;
        for (const auto& d : fixture_dictations()) {
            std::vector<std::string> seg_texts;
            for (const auto& s : d.sentences) seg_texts.push_back(s.text);
            json seg = {{"template", "segment"},
                        {"bindings", {{"dictation", d.text()}}},
                        {"response", json(seg_texts).dump()}};
            script += seg.dump() + "\n";
            for (const auto& s : d.sentences)
                for (int k : shots) {
                    json rec = {{"template", "observe"},
                                {"bindings", h.observe_bindings(s.text, k)},
                                {"response", obs_json({s.gold})}};
                    script += rec.dump() + "\n";
                }
        }
        test_util::write_file(dir.file("mock.jsonl"), script);
    }

    std::string first_pred;
    for (int k : shots) {
        int code = -1;
        run_cli("extract --dictations " + dir.file("dictations.jsonl") + " --ontology " +
                    dir.file("ontology.json") + " --bank " + dir.file("bank.jsonl") + " --out " +
                    dir.file("pred" + std::to_string(k) + ".jsonl") + " --shots " +
                    std::to_string(k) + " --backend mock --mock-script " + dir.file("mock.jsonl"),
                &code);
        REQUIRE(code == 0);
        auto pred = test_util::read_file(dir.file("pred" + std::to_string(k) + ".jsonl"));
        REQUIRE(!pred.empty());
        if (first_pred.empty())
            first_pred = pred;
        else
            CHECK(pred == first_pred);  // only K varied; outputs agree on this fixture
    }

    // schema retrieval is independent of K by construction; check it directly
    auto n10_a = h.schemas.retrieve("Pulse is 72 and regular.", 10);
    for (int k : shots) {
        (void)h.bank.retrieve("Pulse is 72 and regular.", k);
        auto n10_b = h.schemas.retrieve("Pulse is 72 and regular.", 10);
        REQUIRE(n10_a.size() == n10_b.size());
        for (size_t i = 0; i < n10_a.size(); ++i) REQUIRE(n10_a[i].id == n10_b[i].id);
    }

    int code = -1;
    auto eval_out = run_cli("evaluate --pred " + dir.file("pred15.jsonl") + " --gold " +
                                dir.file("dictations.jsonl") + " --report " +
                                dir.file("report.json"),
                            &code);
    REQUIRE(code == 0);
    CHECK(eval_out.find("1.000000 1.000000 1.000000") != std::string::npos);

    std::printf("[criterion 5] N=10/K=15 defaults and --shots knob PASS\n");
}

TEST_CASE("criterion 6: memory-bank soundness with a hallucinating builder") {
    TempDir dir;
    std::vector<Dictation> corpus;
    const std::vector<std::pair<std::string, std::vector<Observation>>> fixtures = {
        {"Pulse is 72. Patient alert.", {{"Pulse rate", "72"}, {"Alertness", "Alert"}}},
        {"Pain moderate today.", {{"Pain level", "Moderate"}}},
        {"Diet regular. Fall risk low.", {{"Diet type", "Regular"}, {"Fall risk", "Low"}}},
    };
    for (size_t i = 0; i < fixtures.size(); ++i) {
        Dictation d;
        d.id = "b" + std::to_string(i + 1);
        d.text = fixtures[i].first;
        d.gold_observations = fixtures[i].second;
        corpus.push_back(std::move(d));
    }

    auto mock = std::make_shared<ScriptedMock>();
    auto script = [&](const Dictation& d, const json& pairs) {
        mock->script("pair-extract",
                     {{"dictation", d.text}, {"gold", render_gold_block(*d.gold_observations)}},
                     pairs.dump());
    };
    // dictation 1: perfect split plus one hallucinated observation
    script(corpus[0], json::array({
                          json{{"segment", "Pulse is 72."},
                               {"observations", json::array({json{{"schema", "Pulse rate"},
                                                                  {"value", "72"}},
                                                             json{{"schema", "Body temperature"},
                                                                  {"value", "39"}}})}},
                          json{{"segment", "Patient alert."},
                               {"observations", json::array({json{{"schema", "Alertness"},
                                                                  {"value", "Alert"}}})}},
                      }));
    // dictation 2: one hallucinated observation alongside the gold one
    script(corpus[1], json::array({
                          json{{"segment", "Pain moderate today."},
                               {"observations", json::array({json{{"schema", "Pain level"},
                                                                  {"value", "Moderate"}},
                                                             json{{"schema", "Mobility aid"},
                                                                  {"value", "Walker"}}})}},
                      }));
    // dictation 3: perfect
    script(corpus[2], json::array({
                          json{{"segment", "Diet regular."},
                               {"observations", json::array({json{{"schema", "Diet type"},
                                                                  {"value", "Regular"}}})}},
                          json{{"segment", "Fall risk low."},
                               {"observations", json::array({json{{"schema", "Fall risk"},
                                                                  {"value", "Low"}}})}},
                      }));

    LlmGateway gw{LlmProfile{}};
    gw.set_mock(mock);
    auto summary = build_memory_bank(corpus, gw, dir.file("bank.jsonl"));

    CHECK(summary.dropped.size() == 2);
    CHECK(summary.gold_total == 5);
    CHECK(summary.gold_covered == 5);
    CHECK(summary.coverage == doctest::Approx(1.0));
    CHECK(summary.failed_dictations.empty());

    // soundness: every bank observation appears in its source gold set
    auto bank = load_memory_bank(dir.file("bank.jsonl"));
    std::map<std::string, std::set<std::pair<std::string, std::string>>> gold_by_id;
    for (const auto& d : corpus)
        for (const auto& o : *d.gold_observations)
            gold_by_id[d.id].insert({to_lower(o.schema_name), normalize_value(o.value)});
    for (const auto& e : bank)
        for (const auto& o : e.observations)
            REQUIRE(gold_by_id.at(e.source_dictation_id)
                        .count({to_lower(o.schema_name), normalize_value(o.value)}) == 1);

    std::printf("[criterion 6] memory-bank soundness PASS\n");
}

namespace {

struct StubServer {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    std::atomic<int> hits{0};

    explicit StubServer(int failures_before_success) {
        server.Post("/chat/completions",
                    [this, failures_before_success](const httplib::Request&,
                                                    httplib::Response& res) {
                        if (++hits <= failures_before_success) {
                            res.status = 429;
                            return;
                        }
                        json body = {{"choices", json::array({json{
                                                     {"message", json{{"content", "ok"}}}}})}};
                        res.set_content(body.dump(), "application/json");
                    });
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~StubServer() {
        server.stop();
        thread.join();
    }
};

}  // namespace

TEST_CASE("criterion 7: gateway retry resilience against a flaky local stub") {
    LlmProfile profile;
    profile.backend = LlmProfile::Backend::remote;
    profile.model = "stub";
    profile.max_retries = 3;
    profile.backoff_base_ms = 2;

    {
        StubServer stub(2);  // two 429s, then success
        profile.base_url = "http://127.0.0.1:" + std::to_string(stub.port);
        LlmGateway gw(profile);
        CHECK(gw.run("segment", {{"dictation", "x"}}) == "ok");
        REQUIRE(gw.calls().size() == 1);
        CHECK(gw.calls()[0].attempts == 3);
    }
    {
        StubServer stub(1000000);  // never succeeds
        profile.base_url = "http://127.0.0.1:" + std::to_string(stub.port);
        LlmGateway gw(profile);
        CHECK_THROWS_AS(gw.run("segment", {{"dictation", "x"}}), TransportError);
        CHECK(stub.hits.load() == profile.max_retries + 1);
        REQUIRE(gw.calls().size() == 1);
        CHECK(gw.calls()[0].attempts == profile.max_retries + 1);
    }
    std::printf("[criterion 7] gateway retry resilience PASS\n");
}

TEST_CASE("criterion 8: suite runs offline within the time budget") {
    // Everything above used the scripted mock, the hashed-bag fallback
    // embedder, or a loopback stub; nothing touches the network.
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - g_suite_start).count();
    CHECK(elapsed < 60.0);
    std::printf("[criterion 8] offline acceptance run in %.2fs (< 60s) PASS\n", elapsed);
}
