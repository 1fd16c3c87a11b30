#pragma once

#include <Eigen/Core>
#include <functional>
#include <string>
#include <vector>

#include "morphtag/bp.hpp"
#include "morphtag/emitter.hpp"
#include "morphtag/factor_graph.hpp"
#include "morphtag/potentials.hpp"
#include "morphtag/schema.hpp"

namespace morphtag {

enum class Optimizer { Sgd, Adam };

struct TrainConfig {
  int epochs = 10;
  int batch_size = 64;
  Optimizer optimizer = Optimizer::Adam;
  double learning_rate = 1e-3;  // SGD convention: 0.1
  uint64_t seed = 1;
  double dropout = 0.2;
  double clip = 0.0;  // global L2 gradient-norm clip; 0 disables
  int workers = 1;
  BpConfig bp;
  EmitterConfig emitter;
  FactorTopology topology;  // both families off = tag-wise model
};

// The trained FCRF: schema, factor tables, emitter, and the topology the
// factor tables were trained under.
struct FcrfModel {
  TagSchema schema;
  FactorTopology topology;
  FactorWeights factor;
  EmitterParams emitter;
};

// Gradient accumulators mirroring the parameter shapes.
struct GradientBuffer {
  FactorWeights factor;
  EmitterParams emitter;
};

GradientBuffer zero_gradients(const FcrfModel& model);

// Flattened views over every parameter of the model, in the canonical
// for_each order; the same collector applied to a GradientBuffer yields
// aligned gradient views.
std::vector<Eigen::Map<Eigen::VectorXd>> parameter_views(FactorWeights* factor,
                                                         EmitterParams* emitter);

// d log-likelihood / d lambda for every transition and pairwise factor:
// one-hot at the gold joint label minus the factor belief, added to both
// the general table and the language table (the potential is their sum).
void factor_weight_gradient(const FactorGraph& graph, const BeliefState& beliefs,
                            const std::vector<TagAssignment>& gold,
                            const std::string& language, FactorWeights* grads);

// d log-likelihood / d f_nn(t, m): one-hot at the gold label minus the
// variable belief; rows sum to zero.
std::vector<std::vector<Eigen::VectorXd>> neural_score_gradient(
    const BeliefState& beliefs, const std::vector<TagAssignment>& gold);

struct OptimizerState {
  int step = 0;
  Eigen::VectorXd m, v;  // Adam moments over the flattened parameters

  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// One ascent step on the log-likelihood: SGD does theta += lr * g; Adam the
// bias-corrected moment update in the ascent direction.
void optimizer_step(std::vector<Eigen::Map<Eigen::VectorXd>>& params,
                    std::vector<Eigen::Map<Eigen::VectorXd>>& grads,
                    OptimizerState* state, Optimizer optimizer,
                    double learning_rate);

struct EpochMetrics {
  int epoch = 0;                 // 1-based
  double surrogate_nll = 0.0;    // mean over training sentences
  int bp_nonconverged = 0;       // sentences whose BP hit max iterations
  bool has_dev = false;
  double dev_accuracy = 0.0;
  double dev_f1_micro = 0.0;
  double dev_f1_macro = 0.0;
  double seconds = 0.0;
};

struct TrainResult {
  FcrfModel model;  // best dev epoch when dev given, else final
  std::vector<EpochMetrics> history;
  int best_epoch = 0;  // 1-based; 0 = no dev selection
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

// Surrogate-likelihood training: per epoch, seeded shuffle; per batch, BP
// per sentence, mean gradient over the batch, one optimizer step. Dev
// metrics per epoch and best-F1-micro selection when dev is given.
// Throws on empty corpus, invalid config, sentences without gold, or
// non-finite loss/gradients (naming the sentence index).
TrainResult train(const Corpus& corpus, const TagSchema& schema,
                  const TrainConfig& cfg, const Corpus* dev = nullptr,
                  const EpochCallback& callback = nullptr);

// Surrogate negative log-likelihood of one sentence: Bethe log-partition
// minus the gold log-score. Equals the exact NLL on acyclic topologies.
double sentence_surrogate_nll(const FactorGraph& graph,
                              const SentencePotentials& potentials,
                              const BeliefState& beliefs,
                              const std::vector<TagAssignment>& gold);

}  // namespace morphtag
