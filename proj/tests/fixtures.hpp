#pragma once

// Shared scripted fixtures: a 5-chunk toy corpus, 3 QA samples, and a fully
// deterministic backend. The golden trace files under data/golden were
// produced once from this fixture (see golden_gen.cpp) and are compared
// byte-for-byte.

#include <memory>
#include <string>
#include <vector>

#include "rgar/corpus.hpp"
#include "rgar/embedding.hpp"
#include "rgar/llm.hpp"
#include "rgar/pipeline.hpp"
#include "rgar/retriever.hpp"

namespace fixtures {

inline rgar::CorpusStore golden_corpus() {
  std::vector<rgar::Chunk> chunks = {
      {"c1", "Pneumococcus",
       "Streptococcus pneumoniae is a gram positive coccus causing pneumonia and sepsis", 0},
      {"c2", "Neisseria",
       "Neisseria gonorrhoeae produces lipopolysaccharide endotoxin in its outer membrane", 0},
      {"c3", "DIC",
       "Disseminated intravascular coagulation shows low platelets elevated d-dimer and low "
       "fibrinogen",
       0},
      {"c4", "Culture media",
       "MacConkey agar selects lactose fermenting gram negative rods forming pink colonies", 0},
      {"c5", "Beta blockers",
       "Beta blockers reduce heart rate and blood pressure in hypertension management", 0},
  };
  return rgar::CorpusStore(std::move(chunks));
}

inline std::vector<rgar::QASample> golden_samples() {
  std::vector<rgar::QASample> samples(3);
  samples[0].id = "s1";
  samples[0].question =
      "Which culture medium shows lactose fermenting gram negative rods as pink colonies?";
  samples[0].ehr =
      "Patient with fevers chills hypotension and mucopurulent cervical discharge. "
      "Platelet count 14200 and d-dimer 965.";
  samples[0].options = {{"A", "Charcoal blood agar"},
                        {"B", "MacConkey agar"},
                        {"C", "Casein agar"},
                        {"D", "Methicillin agar"}};
  samples[0].gold = "B";

  samples[1].id = "s2";
  samples[1].question =
      "Which organism produces lipopolysaccharide endotoxin in its outer membrane?";
  samples[1].ehr = "Adnexal tenderness and cervical discharge noted on pelvic examination.";
  samples[1].options = {{"A", "Neisseria gonorrhoeae"},
                        {"B", "Streptococcus pyogenes"},
                        {"C", "Candida albicans"},
                        {"D", "Staphylococcus aureus"}};
  samples[1].gold = "A";

  samples[2].id = "s3";
  samples[2].question = "Which drug class reduces heart rate in hypertension?";
  samples[2].ehr = "";  // exercises the zero-extraction path
  samples[2].options = {{"A", "Loop diuretics"},
                        {"B", "ACE inhibitors"},
                        {"C", "Calcium channel blockers"},
                        {"D", "Beta blockers"}};
  samples[2].gold = "D";
  return samples;
}

inline std::shared_ptr<rgar::ScriptedChatBackend> golden_backend() {
  auto backend = std::make_shared<rgar::ScriptedChatBackend>();
  // Per-sample extractor responses, keyed on the extractor instruction plus
  // an EHR fragment unique to the sample.
  backend->add_rule({"extract the key factual information", "Platelet count 14200"},
                    "['Patient with fevers chills and hypotension', "
                    "'low platelet count 14200', 'elevated d-dimer 965']");
  backend->add_rule({"extract the key factual information", "Adnexal tenderness"},
                    "[\"mucopurulent cervical discharge\", \"adnexal tenderness on examination\"]");
  // Per-sample reader responses: one clean JSON, one prose cue, one garbage.
  backend->add_rule({"potential choices", "Which culture medium"},
                    "{\"answer_choice\": \"B\"}");
  backend->add_rule({"potential choices", "Which organism produces"}, "The answer is C.");
  backend->add_rule({"potential choices", "Which drug class"},
                    "I am unable to determine the best option from the given information.");
  // Query generators fall back to a deterministic digest of the request.
  backend->set_echo_fallback(true);
  return backend;
}

inline rgar::RunConfig golden_config() {
  rgar::RunConfig cfg;
  cfg.rounds = 2;
  cfg.n_retrieve = 4;
  return cfg;
}

struct GoldenEnv {
  rgar::CorpusStore corpus = golden_corpus();
  rgar::MockEmbedder embedder{8};
  rgar::EmbeddingMatrix matrix;
  std::shared_ptr<rgar::ScriptedChatBackend> backend = golden_backend();
  std::unique_ptr<rgar::DenseRetriever> retriever;
  std::unique_ptr<rgar::LlmGateway> gateway;

  GoldenEnv() {
    matrix.dim = embedder.dim();
    matrix.provider_tag = embedder.tag();
    for (const auto& c : corpus.chunks()) {
      matrix.chunk_ids.push_back(c.id);
      auto v = embedder.embed_text(c.content);
      matrix.data.insert(matrix.data.end(), v.begin(), v.end());
    }
    retriever = std::make_unique<rgar::DenseRetriever>(corpus, matrix, embedder,
                                                       rgar::RetrieverOptions{});
    gateway = std::make_unique<rgar::LlmGateway>(backend, rgar::PromptRegistry::builtin());
  }
};

}  // namespace fixtures
