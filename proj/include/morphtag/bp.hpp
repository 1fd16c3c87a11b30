#pragma once

#include <Eigen/Core>
#include <array>
#include <string>
#include <vector>

#include "morphtag/emitter.hpp"
#include "morphtag/factor_graph.hpp"
#include "morphtag/potentials.hpp"
#include "morphtag/schema.hpp"

namespace morphtag {

// Numerically safe log(sum(exp(v))).
double log_sum_exp(const Eigen::VectorXd& v);
double log_sum_exp(const Eigen::MatrixXd& m);

// Shifts a log vector so its log-sum-exp is exactly zero.
Eigen::VectorXd log_normalize(Eigen::VectorXd v);

struct BpConfig {
  double residual_threshold = 0.05;
  int max_iterations = 40;
};

// Log-potential tables bound to one sentence: emission slices per variable
// plus the gen+lang combined transition/pairwise tables (time-homogeneous,
// so one matrix per tag type / tag pair).
struct SentencePotentials {
  EmissionScores emissions;
  std::vector<Eigen::MatrixXd> transition;  // per tag type m
  std::vector<Eigen::MatrixXd> pairwise;    // per canonical pair index
};

SentencePotentials bind_potentials(const FactorWeights& weights,
                                   const EmissionScores& emissions,
                                   const std::string& language);

// The factor's log-potential table: |Y_m| x 1 for neural factors, otherwise
// (|Y_i|, |Y_j|) with rows indexing the first scope variable.
Eigen::MatrixXd factor_log_table(const FactorGraph& graph,
                                 const SentencePotentials& potentials, int f);

// A single directed message in log space, normalized so that
// log-sum-exp(log_values) = 0.
struct Message {
  Eigen::VectorXd log_values;
};

// Mutable factor->variable message store for one sentence. Variable->factor
// messages are derived on demand from the latest stored messages
// (asynchronous updates). last_change tracks, per edge, the L-inf distance
// in probability space of the most recent update.
class BpState {
 public:
  BpState(const FactorGraph& graph, const SentencePotentials& potentials);

  const FactorGraph& graph() const { return *graph_; }
  const Eigen::VectorXd& incoming(int f, int slot) const {
    return messages_[f][slot];
  }
  void store(int f, int slot, const Eigen::VectorXd& normalized_log);
  double max_last_change() const;

 private:
  const FactorGraph* graph_;
  std::vector<std::array<Eigen::VectorXd, 2>> messages_;
  std::vector<std::array<double, 2>> last_change_;
};

// mu_{i->f}: sum of the latest log-messages into i from every other
// incident factor (empty product = uniform), normalized.
Message send_variable_to_factor(const BpState& state, VariableId i, int f);

// mu_{f->i}: log-sum-exp over the other variable's labels of
// (log psi + incoming message); unary factors emit their normalized
// log-potential.
Message send_factor_to_variable(const BpState& state,
                                const SentencePotentials& potentials, int f,
                                VariableId i);

struct BeliefState {
  // var_beliefs[t][m]: probability vector over Y_m.
  std::vector<std::vector<Eigen::VectorXd>> var_beliefs;
  // factor_beliefs[f]: probability table, |Y_m| x 1 for neural factors,
  // (|Y_i|, |Y_j|) otherwise; rows index the first scope variable.
  std::vector<Eigen::MatrixXd> factor_beliefs;
  bool converged = false;
  int iterations = 0;
  double final_residual = 0.0;
};

// Sum-product loopy BP with a forward-backward-style asynchronous schedule:
// the forward half visits t = 0..T-1 updating neural, then pairwise, then
// the transition messages toward t+1; the backward half mirrors this toward
// t-1. After each full sweep the residual (max last_change over messages)
// decides convergence. Non-convergence sets converged=false.
BeliefState run_bp(const FactorGraph& graph,
                   const SentencePotentials& potentials, const BpConfig& cfg);

BeliefState run_bp(const FactorGraph& graph, const FactorWeights& weights,
                   const EmissionScores& emissions, const std::string& language,
                   const BpConfig& cfg);

// Bethe approximation of the log-partition function computed from beliefs;
// exact when the graph is a tree and BP has converged.
double bethe_log_partition(const FactorGraph& graph,
                           const SentencePotentials& potentials,
                           const BeliefState& beliefs);

// Total log-score sum_alpha log psi_alpha(y_alpha) of a full assignment.
double assignment_log_score(const FactorGraph& graph,
                            const SentencePotentials& potentials,
                            const std::vector<TagAssignment>& assignment);

}  // namespace morphtag
