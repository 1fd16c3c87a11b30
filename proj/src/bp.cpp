#include "morphtag/bp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace morphtag {

namespace {

int slot_of(const FactorGraph& graph, int f, VariableId i) {
  const Factor& fac = graph.factor(f);
  if (fac.scope[0] == i) return 0;
  if (fac.scope_size == 2 && fac.scope[1] == i) return 1;
  throw std::runtime_error("bp: variable not in factor scope");
}

double entropy(const Eigen::MatrixXd& probs) {
  double h = 0.0;
  for (Eigen::Index c = 0; c < probs.cols(); ++c) {
    for (Eigen::Index r = 0; r < probs.rows(); ++r) {
      double p = probs(r, c);
      if (p > 0.0) h -= p * std::log(p);
    }
  }
  return h;
}

}  // namespace

double log_sum_exp(const Eigen::VectorXd& v) {
  double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

double log_sum_exp(const Eigen::MatrixXd& m) {
  double mx = m.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((m.array() - mx).exp().sum());
}

Eigen::VectorXd log_normalize(Eigen::VectorXd v) {
  v.array() -= log_sum_exp(v);
  return v;
}

SentencePotentials bind_potentials(const FactorWeights& weights,
                                   const EmissionScores& emissions,
                                   const std::string& language) {
  SentencePotentials pots;
  pots.emissions = emissions;
  pots.transition = combined_transition(weights, language);
  pots.pairwise = combined_pairwise(weights, language);
  return pots;
}

Eigen::MatrixXd factor_log_table(const FactorGraph& graph,
                                 const SentencePotentials& potentials, int f) {
  const Factor& fac = graph.factor(f);
  switch (fac.kind) {
    case FactorKind::Neural:
      return potentials.emissions.scores[fac.scope[0].t][fac.tag_i];
    case FactorKind::Pairwise:
      return potentials.pairwise[FactorGraph::pair_index(fac.tag_i, fac.tag_j,
                                                         graph.M())];
    case FactorKind::Transition:
      return potentials.transition[fac.tag_i];
  }
  throw std::logic_error("factor_log_table: unknown factor kind");
}

BpState::BpState(const FactorGraph& graph, const SentencePotentials& potentials)
    : graph_(&graph) {
  int num_factors = static_cast<int>(graph.factors().size());
  messages_.resize(num_factors);
  last_change_.resize(num_factors, {0.0, 0.0});
  for (int f = 0; f < num_factors; ++f) {
    const Factor& fac = graph.factor(f);
    for (int s = 0; s < fac.scope_size; ++s) {
      VariableId v = fac.scope[s];
      Eigen::Index domain = potentials.emissions.scores[v.t][v.m].size();
      messages_[f][s] =
          Eigen::VectorXd::Constant(domain, -std::log(static_cast<double>(domain)));
    }
  }
}

void BpState::store(int f, int slot, const Eigen::VectorXd& normalized_log) {
  Eigen::VectorXd& old = messages_[f][slot];
  last_change_[f][slot] =
      (normalized_log.array().exp() - old.array().exp()).abs().maxCoeff();
  old = normalized_log;
}

double BpState::max_last_change() const {
  double mx = 0.0;
  for (const auto& pair : last_change_) {
    mx = std::max(mx, std::max(pair[0], pair[1]));
  }
  return mx;
}

Message send_variable_to_factor(const BpState& state, VariableId i, int f) {
  const FactorGraph& graph = state.graph();
  Eigen::VectorXd sum =
      Eigen::VectorXd::Zero(state.incoming(f, slot_of(graph, f, i)).size());
  for (int g : graph.incident(i)) {
    if (g == f) continue;
    sum += state.incoming(g, slot_of(graph, g, i));
  }
  return Message{log_normalize(std::move(sum))};
}

Message send_factor_to_variable(const BpState& state,
                                const SentencePotentials& potentials, int f,
                                VariableId i) {
  const FactorGraph& graph = state.graph();
  Eigen::MatrixXd table = factor_log_table(graph, potentials, f);
  const Factor& fac = graph.factor(f);
  if (fac.scope_size == 1) {
    return Message{log_normalize(table.col(0))};
  }
  int slot = slot_of(graph, f, i);
  Eigen::VectorXd other =
      send_variable_to_factor(state, fac.scope[1 - slot], f).log_values;
  Eigen::VectorXd out;
  if (slot == 0) {
    out.resize(table.rows());
    for (Eigen::Index r = 0; r < table.rows(); ++r) {
      out(r) = log_sum_exp(Eigen::VectorXd(table.row(r).transpose() + other));
    }
  } else {
    out.resize(table.cols());
    for (Eigen::Index c = 0; c < table.cols(); ++c) {
      out(c) = log_sum_exp(Eigen::VectorXd(table.col(c) + other));
    }
  }
  return Message{log_normalize(std::move(out))};
}

BeliefState run_bp(const FactorGraph& graph,
                   const SentencePotentials& potentials, const BpConfig& cfg) {
  if (cfg.residual_threshold <= 0.0) {
    throw std::invalid_argument("run_bp: residual threshold must be > 0");
  }
  if (cfg.max_iterations < 1) {
    throw std::invalid_argument("run_bp: max iterations must be >= 1");
  }

  int t_len = graph.T();
  int num_tags = graph.M();
  BpState state(graph, potentials);

  // Factor indices grouped for the sweep schedule.
  std::vector<std::vector<int>> pairwise_at(t_len);
  std::vector<int> transition_at(t_len > 1 ? (t_len - 1) * num_tags : 0, -1);
  for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
    const Factor& fac = graph.factor(f);
    if (fac.kind == FactorKind::Pairwise) {
      pairwise_at[fac.scope[0].t].push_back(f);
    } else if (fac.kind == FactorKind::Transition) {
      transition_at[fac.scope[0].t * num_tags + fac.tag_i] = f;
    }
  }

  auto update = [&](int f, VariableId i) {
    Message msg = send_factor_to_variable(state, potentials, f, i);
    state.store(f, slot_of(graph, f, i), msg.log_values);
  };
  auto local_updates = [&](int t) {
    for (int m = 0; m < num_tags; ++m) {
      update(graph.neural_factor(t, m), VariableId{t, m});
    }
    for (int f : pairwise_at[t]) {
      update(f, graph.factor(f).scope[0]);
      update(f, graph.factor(f).scope[1]);
    }
  };

  BeliefState out;
  while (out.iterations < cfg.max_iterations) {
    for (int t = 0; t < t_len; ++t) {
      local_updates(t);
      if (t + 1 < t_len && graph.topology().use_transition) {
        for (int m = 0; m < num_tags; ++m) {
          int f = transition_at[t * num_tags + m];
          update(f, VariableId{t + 1, m});
        }
      }
    }
    for (int t = t_len - 1; t >= 0; --t) {
      local_updates(t);
      if (t > 0 && graph.topology().use_transition) {
        for (int m = 0; m < num_tags; ++m) {
          int f = transition_at[(t - 1) * num_tags + m];
          update(f, VariableId{t - 1, m});
        }
      }
    }
    ++out.iterations;
    out.final_residual = state.max_last_change();
    if (out.final_residual < cfg.residual_threshold) {
      out.converged = true;
      break;
    }
  }

  out.var_beliefs.resize(t_len);
  for (int t = 0; t < t_len; ++t) {
    out.var_beliefs[t].resize(num_tags);
    for (int m = 0; m < num_tags; ++m) {
      Eigen::VectorXd sum =
          Eigen::VectorXd::Zero(potentials.emissions.scores[t][m].size());
      for (int f : graph.incident(t, m)) {
        sum += state.incoming(f, slot_of(graph, f, VariableId{t, m}));
      }
      out.var_beliefs[t][m] =
          log_normalize(std::move(sum)).array().exp().matrix();
    }
  }

  out.factor_beliefs.resize(graph.factors().size());
  for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
    const Factor& fac = graph.factor(f);
    Eigen::MatrixXd table = factor_log_table(graph, potentials, f);
    if (fac.scope_size == 1) {
      table.col(0) += send_variable_to_factor(state, fac.scope[0], f).log_values;
    } else {
      table.colwise() +=
          send_variable_to_factor(state, fac.scope[0], f).log_values;
      table.rowwise() += send_variable_to_factor(state, fac.scope[1], f)
                             .log_values.transpose();
    }
    table.array() -= log_sum_exp(table);
    out.factor_beliefs[f] = table.array().exp().matrix();
  }
  return out;
}

BeliefState run_bp(const FactorGraph& graph, const FactorWeights& weights,
                   const EmissionScores& emissions, const std::string& language,
                   const BpConfig& cfg) {
  return run_bp(graph, bind_potentials(weights, emissions, language), cfg);
}

double bethe_log_partition(const FactorGraph& graph,
                           const SentencePotentials& potentials,
                           const BeliefState& beliefs) {
  double log_z = 0.0;
  for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
    const Eigen::MatrixXd& b = beliefs.factor_beliefs[f];
    Eigen::MatrixXd table = factor_log_table(graph, potentials, f);
    log_z += (b.array() * table.array()).sum() + entropy(b);
  }
  for (int t = 0; t < graph.T(); ++t) {
    for (int m = 0; m < graph.M(); ++m) {
      double degree = static_cast<double>(graph.incident(t, m).size());
      log_z -= (degree - 1.0) * entropy(beliefs.var_beliefs[t][m]);
    }
  }
  return log_z;
}

double assignment_log_score(const FactorGraph& graph,
                            const SentencePotentials& potentials,
                            const std::vector<TagAssignment>& assignment) {
  if (static_cast<int>(assignment.size()) != graph.T()) {
    throw std::runtime_error("assignment_log_score: length mismatch");
  }
  double score = 0.0;
  for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
    const Factor& fac = graph.factor(f);
    Eigen::MatrixXd table = factor_log_table(graph, potentials, f);
    int a = assignment[fac.scope[0].t].labels[fac.scope[0].m];
    if (fac.scope_size == 1) {
      score += table(a, 0);
    } else {
      int b = assignment[fac.scope[1].t].labels[fac.scope[1].m];
      score += table(a, b);
    }
  }
  return score;
}

}  // namespace morphtag
