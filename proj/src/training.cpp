#include "morphtag/training.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "morphtag/decode.hpp"
#include "morphtag/parallel.hpp"
#include "morphtag/rng.hpp"
#include "morphtag/tagger.hpp"

namespace morphtag {

namespace {

// Dropout streams live above 2^32 so they never collide with the small
// per-epoch shuffle stream ids.
uint64_t dropout_stream(int epoch, int sentence) {
  return (static_cast<uint64_t>(epoch) << 32) + static_cast<uint64_t>(sentence);
}

struct SentenceWork {
  GradientBuffer grads;
  double loglik = 0.0;
  bool bp_converged = true;
};

std::unique_ptr<SentenceWork> compute_sentence(const FcrfModel& model,
                                               const Sentence& sentence,
                                               const std::vector<TagAssignment>& gold,
                                               const TrainConfig& cfg, int epoch,
                                               int sentence_index) {
  Rng drop_rng = Rng(cfg.seed).derive(dropout_stream(epoch, sentence_index));
  EmitterTrace trace;
  Eigen::MatrixXd score_matrix =
      emitter_forward(model.emitter, sentence.tokens, sentence.language_id,
                      cfg.dropout, &drop_rng, &trace);
  EmissionScores emissions = slice_scores(score_matrix, model.schema);
  FactorGraph graph =
      build_graph(sentence.length(), model.schema.num_tag_types(), model.topology);
  SentencePotentials pots =
      bind_potentials(model.factor, emissions, sentence.language_id);
  BeliefState beliefs = run_bp(graph, pots, cfg.bp);

  auto work = std::make_unique<SentenceWork>();
  work->bp_converged = beliefs.converged;
  work->loglik = -sentence_surrogate_nll(graph, pots, beliefs, gold);
  work->grads.factor = model.factor;
  for_each_table(work->grads.factor,
                 [](const std::string&, Eigen::MatrixXd& t) { t.setZero(); });
  factor_weight_gradient(graph, beliefs, gold, sentence.language_id,
                         &work->grads.factor);
  Eigen::MatrixXd upstream =
      upstream_matrix(neural_score_gradient(beliefs, gold), model.schema);
  work->grads.emitter = emitter_backward(model.emitter, trace, upstream);
  return work;
}

void validate_config(const TrainConfig& cfg) {
  if (cfg.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
  if (cfg.batch_size < 1) {
    throw std::invalid_argument("train: batch size must be >= 1");
  }
  if (cfg.learning_rate <= 0.0) {
    throw std::invalid_argument("train: learning rate must be > 0");
  }
  if (cfg.dropout < 0.0 || cfg.dropout >= 1.0) {
    throw std::invalid_argument("train: dropout must be in [0, 1)");
  }
  if (cfg.workers < 1) throw std::invalid_argument("train: workers must be >= 1");
}

}  // namespace

GradientBuffer zero_gradients(const FcrfModel& model) {
  GradientBuffer g;
  g.factor = model.factor;
  for_each_table(g.factor,
                 [](const std::string&, Eigen::MatrixXd& t) { t.setZero(); });
  g.emitter = zeros_like(model.emitter);
  return g;
}

std::vector<Eigen::Map<Eigen::VectorXd>> parameter_views(FactorWeights* factor,
                                                         EmitterParams* emitter) {
  std::vector<Eigen::Map<Eigen::VectorXd>> views;
  if (factor) {
    for_each_table(*factor, [&](const std::string&, Eigen::MatrixXd& t) {
      views.emplace_back(t.data(), t.size());
    });
  }
  if (emitter) {
    for_each_parameter(*emitter, [&](const std::string&, auto& mat) {
      views.emplace_back(mat.data(), mat.size());
    });
  }
  return views;
}

void factor_weight_gradient(const FactorGraph& graph, const BeliefState& beliefs,
                            const std::vector<TagAssignment>& gold,
                            const std::string& language, FactorWeights* grads) {
  if (beliefs.factor_beliefs.size() != graph.factors().size()) {
    throw std::runtime_error("factor_weight_gradient: belief/factor count mismatch");
  }
  if (static_cast<int>(gold.size()) != graph.T()) {
    throw std::runtime_error("factor_weight_gradient: gold length mismatch");
  }
  bool lang_tables = grads->has_language_tables();
  for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
    const Factor& fac = graph.factor(f);
    if (fac.kind == FactorKind::Neural) continue;
    const Eigen::MatrixXd& belief = beliefs.factor_beliefs[f];
    int a = gold[fac.scope[0].t].labels[fac.scope[0].m];
    int b = gold[fac.scope[1].t].labels[fac.scope[1].m];
    Eigen::MatrixXd* gen;
    Eigen::MatrixXd* lang = nullptr;
    if (fac.kind == FactorKind::Transition) {
      gen = &grads->transition_gen[fac.tag_i];
      if (lang_tables) lang = &grads->transition_lang.at(language)[fac.tag_i];
    } else {
      int p = FactorGraph::pair_index(fac.tag_i, fac.tag_j, graph.M());
      gen = &grads->pairwise_gen[p];
      if (lang_tables) lang = &grads->pairwise_lang.at(language)[p];
    }
    if (gen->rows() != belief.rows() || gen->cols() != belief.cols()) {
      throw std::runtime_error("factor_weight_gradient: table shape mismatch");
    }
    *gen -= belief;
    (*gen)(a, b) += 1.0;
    if (lang) {
      *lang -= belief;
      (*lang)(a, b) += 1.0;
    }
  }
}

std::vector<std::vector<Eigen::VectorXd>> neural_score_gradient(
    const BeliefState& beliefs, const std::vector<TagAssignment>& gold) {
  if (beliefs.var_beliefs.size() != gold.size()) {
    throw std::runtime_error("neural_score_gradient: length mismatch");
  }
  std::vector<std::vector<Eigen::VectorXd>> out(gold.size());
  for (size_t t = 0; t < gold.size(); ++t) {
    out[t].resize(beliefs.var_beliefs[t].size());
    for (size_t m = 0; m < beliefs.var_beliefs[t].size(); ++m) {
      out[t][m] = -beliefs.var_beliefs[t][m];
      out[t][m](gold[t].labels[m]) += 1.0;
    }
  }
  return out;
}

void optimizer_step(std::vector<Eigen::Map<Eigen::VectorXd>>& params,
                    std::vector<Eigen::Map<Eigen::VectorXd>>& grads,
                    OptimizerState* state, Optimizer optimizer,
                    double learning_rate) {
  if (params.size() != grads.size()) {
    throw std::runtime_error("optimizer_step: parameter/gradient view mismatch");
  }
  if (optimizer == Optimizer::Sgd) {
    for (size_t i = 0; i < params.size(); ++i) {
      params[i] += learning_rate * grads[i];
    }
    return;
  }
  Eigen::Index total = 0;
  for (const auto& g : grads) total += g.size();
  if (state->m.size() == 0) {
    state->m = Eigen::VectorXd::Zero(total);
    state->v = Eigen::VectorXd::Zero(total);
  } else if (state->m.size() != total) {
    throw std::runtime_error("optimizer_step: moment size mismatch");
  }
  ++state->step;
  double bc1 = 1.0 - std::pow(state->beta1, state->step);
  double bc2 = 1.0 - std::pow(state->beta2, state->step);
  Eigen::Index offset = 0;
  for (size_t i = 0; i < params.size(); ++i) {
    Eigen::Index n = grads[i].size();
    auto m = state->m.segment(offset, n);
    auto v = state->v.segment(offset, n);
    m = state->beta1 * m + (1.0 - state->beta1) * grads[i];
    v = state->beta2 * v +
        (1.0 - state->beta2) * grads[i].cwiseProduct(grads[i]);
    params[i].array() += learning_rate * (m.array() / bc1) /
                         ((v.array() / bc2).sqrt() + state->epsilon);
    offset += n;
  }
}

double sentence_surrogate_nll(const FactorGraph& graph,
                              const SentencePotentials& potentials,
                              const BeliefState& beliefs,
                              const std::vector<TagAssignment>& gold) {
  return bethe_log_partition(graph, potentials, beliefs) -
         assignment_log_score(graph, potentials, gold);
}

TrainResult train(const Corpus& corpus, const TagSchema& schema,
                  const TrainConfig& cfg, const Corpus* dev,
                  const EpochCallback& callback) {
  validate_config(cfg);
  if (corpus.empty()) throw std::runtime_error("train: empty training corpus");
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    if (!corpus.sentences[i].gold) {
      throw std::runtime_error("train: sentence " + std::to_string(i) +
                               " has no gold annotations");
    }
  }
  std::vector<std::vector<TagAssignment>> gold = complete_corpus(corpus, schema);

  auto lang_set = corpus.languages();
  std::vector<std::string> languages(lang_set.begin(), lang_set.end());
  Rng init_rng(cfg.seed);
  FcrfModel model;
  model.schema = schema;
  model.topology = cfg.topology;
  model.factor = init_factor_weights(schema, languages);
  model.emitter = init_emitter(CharVocab::from_corpus(corpus), languages,
                               schema.total_labels(), cfg.emitter, init_rng);

  auto model_views = parameter_views(&model.factor, &model.emitter);
  OptimizerState opt_state;

  int n = static_cast<int>(corpus.sentences.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  TrainResult result;
  double best_f1 = -1.0;
  FcrfModel best_model;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto epoch_start = std::chrono::steady_clock::now();
    Rng shuffle_rng = Rng(cfg.seed).derive(static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double nll_sum = 0.0;
    int nonconverged = 0;
    for (int batch_start = 0; batch_start < n; batch_start += cfg.batch_size) {
      int batch_n = std::min(cfg.batch_size, n - batch_start);
      GradientBuffer batch = zero_gradients(model);
      auto batch_views = parameter_views(&batch.factor, &batch.emitter);

      // Waves of `workers` sentences: compute in parallel, then merge in
      // sentence order so the reduction is independent of worker count.
      int wave = std::max(1, cfg.workers);
      std::vector<std::unique_ptr<SentenceWork>> slots(
          std::min(wave, batch_n));
      for (int wave_start = 0; wave_start < batch_n; wave_start += wave) {
        int wave_n = std::min(wave, batch_n - wave_start);
        parallel_for(wave_n, cfg.workers, [&](int k) {
          int idx = order[batch_start + wave_start + k];
          slots[k] = compute_sentence(model, corpus.sentences[idx], gold[idx],
                                      cfg, epoch, idx);
        });
        for (int k = 0; k < wave_n; ++k) {
          int idx = order[batch_start + wave_start + k];
          SentenceWork& work = *slots[k];
          if (!std::isfinite(work.loglik)) {
            throw std::runtime_error("train: non-finite loss at sentence " +
                                     std::to_string(idx));
          }
          auto work_views = parameter_views(&work.grads.factor, &work.grads.emitter);
          double sq_norm = 0.0;
          for (size_t i = 0; i < work_views.size(); ++i) {
            sq_norm += work_views[i].squaredNorm();
            batch_views[i] += work_views[i];
          }
          if (!std::isfinite(sq_norm)) {
            throw std::runtime_error("train: non-finite gradient at sentence " +
                                     std::to_string(idx));
          }
          nll_sum += -work.loglik;
          if (!work.bp_converged) ++nonconverged;
          slots[k].reset();
        }
      }

      for (auto& view : batch_views) view /= static_cast<double>(batch_n);
      if (cfg.clip > 0.0) {
        double sq = 0.0;
        for (const auto& view : batch_views) sq += view.squaredNorm();
        double norm = std::sqrt(sq);
        if (norm > cfg.clip) {
          double scale = cfg.clip / norm;
          for (auto& view : batch_views) view *= scale;
        }
      }
      optimizer_step(model_views, batch_views, &opt_state, cfg.optimizer,
                     cfg.learning_rate);
    }

    EpochMetrics metrics;
    metrics.epoch = epoch;
    metrics.surrogate_nll = nll_sum / n;
    metrics.bp_nonconverged = nonconverged;
    if (dev && !dev->sentences.empty()) {
      auto preds = predict_corpus_fcrf(model, *dev, cfg.bp, cfg.workers);
      EvalReport report = evaluate(preds, *dev, schema);
      metrics.has_dev = true;
      metrics.dev_accuracy = report.token_accuracy;
      metrics.dev_f1_micro = report.f1_micro;
      metrics.dev_f1_macro = report.f1_macro;
      if (report.f1_micro > best_f1) {
        best_f1 = report.f1_micro;
        best_model = model;
        result.best_epoch = epoch;
      }
    }
    metrics.seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                      epoch_start)
            .count();
    result.history.push_back(metrics);
    if (callback) callback(metrics);
  }

  result.model = result.best_epoch > 0 ? std::move(best_model) : std::move(model);
  return result;
}

}  // namespace morphtag
