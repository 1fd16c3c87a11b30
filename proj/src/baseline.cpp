#include "morphtag/baseline.hpp"

#include <chrono>
#include <cmath>
#include <memory>
#include <numeric>
#include <stdexcept>

#include "morphtag/bp.hpp"
#include "morphtag/decode.hpp"
#include "morphtag/parallel.hpp"
#include "morphtag/rng.hpp"
#include "morphtag/tagger.hpp"

namespace morphtag {

namespace {

uint64_t dropout_stream(int epoch, int sentence) {
  return (static_cast<uint64_t>(epoch) << 32) + static_cast<uint64_t>(sentence);
}

struct SentenceWork {
  EmitterParams grads;
  double loglik = 0.0;
};

std::unique_ptr<SentenceWork> compute_sentence(const BaselineModel& model,
                                               const Sentence& sentence,
                                               const std::vector<int>& classes,
                                               const TrainConfig& cfg, int epoch,
                                               int sentence_index) {
  Rng drop_rng = Rng(cfg.seed).derive(dropout_stream(epoch, sentence_index));
  EmitterTrace trace;
  Eigen::MatrixXd scores =
      emitter_forward(model.emitter, sentence.tokens, sentence.language_id,
                      cfg.dropout, &drop_rng, &trace);
  auto work = std::make_unique<SentenceWork>();
  Eigen::MatrixXd upstream(scores.rows(), scores.cols());
  for (Eigen::Index t = 0; t < scores.cols(); ++t) {
    Eigen::VectorXd logp = log_normalize(scores.col(t));
    work->loglik += logp(classes[t]);
    upstream.col(t) = -logp.array().exp().matrix();
    upstream(classes[t], t) += 1.0;
  }
  work->grads = emitter_backward(model.emitter, trace, upstream);
  return work;
}

}  // namespace

TagSetVocabulary::TagSetVocabulary(std::vector<TagAssignment> tagsets) {
  for (auto& ts : tagsets) {
    if (index_.emplace(ts, static_cast<int>(tagsets_.size())).second) {
      tagsets_.push_back(std::move(ts));
    }
  }
}

TagSetVocabulary TagSetVocabulary::from_training(
    const std::vector<std::vector<TagAssignment>>& gold) {
  std::vector<TagAssignment> flat;
  for (const auto& sentence : gold) {
    for (const auto& assignment : sentence) flat.push_back(assignment);
  }
  return TagSetVocabulary(std::move(flat));
}

int TagSetVocabulary::index_of(const TagAssignment& assignment) const {
  auto it = index_.find(assignment);
  return it == index_.end() ? -1 : it->second;
}

BaselineTrainResult baseline_train(const Corpus& corpus, const TagSchema& schema,
                                   const TrainConfig& cfg, const Corpus* dev,
                                   const EpochCallback& callback) {
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
  if (corpus.empty()) throw std::runtime_error("train: empty training corpus");
  for (size_t i = 0; i < corpus.sentences.size(); ++i) {
    if (!corpus.sentences[i].gold) {
      throw std::runtime_error("train: sentence " + std::to_string(i) +
                               " has no gold annotations");
    }
  }

  std::vector<std::vector<TagAssignment>> gold = complete_corpus(corpus, schema);
  TagSetVocabulary vocab = TagSetVocabulary::from_training(gold);
  std::vector<std::vector<int>> classes(gold.size());
  for (size_t s = 0; s < gold.size(); ++s) {
    classes[s].reserve(gold[s].size());
    for (const auto& assignment : gold[s]) {
      classes[s].push_back(vocab.index_of(assignment));
    }
  }

  auto lang_set = corpus.languages();
  std::vector<std::string> languages(lang_set.begin(), lang_set.end());
  Rng init_rng(cfg.seed);
  BaselineModel model;
  model.schema = schema;
  model.tagsets = std::move(vocab);
  model.emitter = init_emitter(CharVocab::from_corpus(corpus), languages,
                               model.tagsets.size(), cfg.emitter, init_rng);

  auto model_views = parameter_views(nullptr, &model.emitter);
  OptimizerState opt_state;

  int n = static_cast<int>(corpus.sentences.size());
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);

  BaselineTrainResult result;
  double best_f1 = -1.0;
  BaselineModel best_model;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    auto epoch_start = std::chrono::steady_clock::now();
    Rng shuffle_rng = Rng(cfg.seed).derive(static_cast<uint64_t>(epoch));
    shuffle_rng.shuffle(order);

    double nll_sum = 0.0;
    for (int batch_start = 0; batch_start < n; batch_start += cfg.batch_size) {
      int batch_n = std::min(cfg.batch_size, n - batch_start);
      EmitterParams batch = zeros_like(model.emitter);
      auto batch_views = parameter_views(nullptr, &batch);

      int wave = std::max(1, cfg.workers);
      std::vector<std::unique_ptr<SentenceWork>> slots(std::min(wave, batch_n));
      for (int wave_start = 0; wave_start < batch_n; wave_start += wave) {
        int wave_n = std::min(wave, batch_n - wave_start);
        parallel_for(wave_n, cfg.workers, [&](int k) {
          int idx = order[batch_start + wave_start + k];
          slots[k] = compute_sentence(model, corpus.sentences[idx], classes[idx],
                                      cfg, epoch, idx);
        });
        for (int k = 0; k < wave_n; ++k) {
          int idx = order[batch_start + wave_start + k];
          SentenceWork& work = *slots[k];
          if (!std::isfinite(work.loglik)) {
            throw std::runtime_error("train: non-finite loss at sentence " +
                                     std::to_string(idx));
          }
          auto work_views = parameter_views(nullptr, &work.grads);
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
    if (dev && !dev->sentences.empty()) {
      auto preds = predict_corpus_baseline(model, *dev, cfg.workers);
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

std::vector<TagAssignment> baseline_predict(const BaselineModel& model,
                                            const Sentence& sentence) {
  Eigen::MatrixXd scores = emitter_forward(
      model.emitter, sentence.tokens, sentence.language_id, 0.0, nullptr, nullptr);
  std::vector<TagAssignment> out;
  out.reserve(sentence.tokens.size());
  for (Eigen::Index t = 0; t < scores.cols(); ++t) {
    int best = 0;
    for (Eigen::Index k = 1; k < scores.rows(); ++k) {
      if (scores(k, t) > scores(best, t)) best = static_cast<int>(k);
    }
    out.push_back(model.tagsets.tagset(best));
  }
  return out;
}

}  // namespace morphtag
