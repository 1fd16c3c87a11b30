#include "morphtag/tagger.hpp"

#include <atomic>
#include <stdexcept>

#include "morphtag/decode.hpp"
#include "morphtag/parallel.hpp"

namespace morphtag {

Prediction predict_fcrf(const FcrfModel& model, const Sentence& sentence,
                        const BpConfig& bp) {
  Eigen::MatrixXd scores = emitter_forward(
      model.emitter, sentence.tokens, sentence.language_id, 0.0, nullptr, nullptr);
  EmissionScores emissions = slice_scores(scores, model.schema);
  FactorGraph graph = build_graph(sentence.length(),
                                  model.schema.num_tag_types(), model.topology);
  SentencePotentials pots =
      bind_potentials(model.factor, emissions, sentence.language_id);
  BeliefState beliefs = run_bp(graph, pots, bp);
  return Prediction{mbr_decode(beliefs, model.schema), beliefs.converged,
                    beliefs.iterations};
}

std::vector<std::vector<TagAssignment>> predict_corpus_fcrf(
    const FcrfModel& model, const Corpus& corpus, const BpConfig& bp,
    int workers, int* nonconverged) {
  std::vector<std::vector<TagAssignment>> out(corpus.sentences.size());
  std::atomic<int> failures{0};
  parallel_for(static_cast<int>(corpus.sentences.size()), workers, [&](int i) {
    Prediction p = predict_fcrf(model, corpus.sentences[i], bp);
    if (!p.bp_converged) failures.fetch_add(1);
    out[i] = std::move(p.assignment);
  });
  if (nonconverged) *nonconverged = failures.load();
  return out;
}

std::vector<std::vector<TagAssignment>> predict_corpus_baseline(
    const BaselineModel& model, const Corpus& corpus, int workers) {
  std::vector<std::vector<TagAssignment>> out(corpus.sentences.size());
  parallel_for(static_cast<int>(corpus.sentences.size()), workers, [&](int i) {
    out[i] = baseline_predict(model, corpus.sentences[i]);
  });
  return out;
}

void apply_language_fallback(Corpus* corpus, const std::set<std::string>& known,
                             const std::string& fallback) {
  if (fallback.empty()) return;
  if (!known.count(fallback)) {
    std::string list;
    for (const auto& lang : known) {
      if (!list.empty()) list += ", ";
      list += lang;
    }
    throw std::runtime_error("--lang-fallback '" + fallback +
                             "' is not a trained language (trained: " + list + ")");
  }
  for (auto& sentence : corpus->sentences) {
    if (!known.count(sentence.language_id)) sentence.language_id = fallback;
  }
}

}  // namespace morphtag
