// Brute-force enumeration oracle for exact inference on small instances,
// written independently of the BP code path: it walks assignments directly
// and accumulates unnormalized probabilities, so agreement with run_bp is
// meaningful evidence rather than a tautology.
#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "morphtag/bp.hpp"
#include "morphtag/factor_graph.hpp"
#include "morphtag/rng.hpp"
#include "morphtag/schema.hpp"

namespace morphtag::testing {

struct ExactInference {
  double log_z = 0.0;
  std::vector<std::vector<Eigen::VectorXd>> var_marginals;  // [t][m]
  std::vector<Eigen::MatrixXd> factor_marginals;            // [f]
};

// Log-score of one full assignment summed factor by factor from the raw
// potential tables (not via assignment_log_score).
inline double oracle_score(const FactorGraph& graph,
                           const SentencePotentials& potentials,
                           const std::vector<std::vector<int>>& labels) {
  double score = 0.0;
  for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
    const Factor& factor = graph.factor(f);
    if (factor.kind == FactorKind::Neural) {
      VariableId v = factor.scope[0];
      score += potentials.emissions.scores[v.t][v.m](labels[v.t][v.m]);
    } else if (factor.kind == FactorKind::Pairwise) {
      VariableId a = factor.scope[0], b = factor.scope[1];
      score += potentials.pairwise[FactorGraph::pair_index(
          factor.tag_i, factor.tag_j, graph.M())](labels[a.t][a.m],
                                                  labels[b.t][b.m]);
    } else {
      VariableId a = factor.scope[0], b = factor.scope[1];
      score += potentials.transition[factor.tag_i](labels[a.t][a.m],
                                                   labels[b.t][b.m]);
    }
  }
  return score;
}

// Exact marginals and log-partition by enumerating every assignment.
inline ExactInference enumerate_exact(const FactorGraph& graph,
                                      const SentencePotentials& potentials,
                                      const std::vector<int>& domain_sizes) {
  int T = graph.T(), M = graph.M();
  ExactInference out;
  out.var_marginals.assign(T, {});
  for (int t = 0; t < T; ++t) {
    for (int m = 0; m < M; ++m) {
      out.var_marginals[t].push_back(Eigen::VectorXd::Zero(domain_sizes[m]));
    }
  }
  for (const Factor& factor : graph.factors()) {
    if (factor.kind == FactorKind::Neural) {
      out.factor_marginals.emplace_back(
          Eigen::MatrixXd::Zero(domain_sizes[factor.tag_i], 1));
    } else {
      out.factor_marginals.emplace_back(Eigen::MatrixXd::Zero(
          domain_sizes[factor.scope[0].m], domain_sizes[factor.scope[1].m]));
    }
  }

  std::vector<std::vector<int>> labels(T, std::vector<int>(M, 0));
  std::vector<double> scores;
  std::vector<std::vector<std::vector<int>>> all_labels;
  // Odometer over the T*M variables.
  while (true) {
    scores.push_back(oracle_score(graph, potentials, labels));
    all_labels.push_back(labels);
    int pos = T * M - 1;
    while (pos >= 0) {
      int t = pos / M, m = pos % M;
      if (++labels[t][m] < domain_sizes[m]) break;
      labels[t][m] = 0;
      --pos;
    }
    if (pos < 0) break;
  }

  double max_score = *std::max_element(scores.begin(), scores.end());
  double z = 0.0;
  for (double s : scores) z += std::exp(s - max_score);
  out.log_z = max_score + std::log(z);

  for (size_t k = 0; k < scores.size(); ++k) {
    double p = std::exp(scores[k] - out.log_z);
    const auto& assign = all_labels[k];
    for (int t = 0; t < T; ++t) {
      for (int m = 0; m < M; ++m) out.var_marginals[t][m](assign[t][m]) += p;
    }
    for (int f = 0; f < static_cast<int>(graph.factors().size()); ++f) {
      const Factor& factor = graph.factor(f);
      VariableId a = factor.scope[0];
      if (factor.kind == FactorKind::Neural) {
        out.factor_marginals[f](assign[a.t][a.m], 0) += p;
      } else {
        VariableId b = factor.scope[1];
        out.factor_marginals[f](assign[a.t][a.m], assign[b.t][b.m]) += p;
      }
    }
  }
  return out;
}

// Random potential tables over the given topology; weights uniform in
// [lo, hi].
inline SentencePotentials random_potentials(const FactorGraph& graph,
                                            const std::vector<int>& domain_sizes,
                                            Rng& rng, double lo, double hi) {
  SentencePotentials p;
  p.emissions.scores.resize(graph.T());
  for (int t = 0; t < graph.T(); ++t) {
    for (int m = 0; m < graph.M(); ++m) {
      Eigen::VectorXd v(domain_sizes[m]);
      for (int k = 0; k < v.size(); ++k) v(k) = rng.uniform(lo, hi);
      p.emissions.scores[t].push_back(v);
    }
  }
  for (int m = 0; m < graph.M(); ++m) {
    Eigen::MatrixXd w(domain_sizes[m], domain_sizes[m]);
    for (int r = 0; r < w.rows(); ++r)
      for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(lo, hi);
    p.transition.push_back(w);
  }
  for (int i = 0; i < graph.M(); ++i) {
    for (int j = i + 1; j < graph.M(); ++j) {
      Eigen::MatrixXd w(domain_sizes[i], domain_sizes[j]);
      for (int r = 0; r < w.rows(); ++r)
        for (int c = 0; c < w.cols(); ++c) w(r, c) = rng.uniform(lo, hi);
      p.pairwise.push_back(w);
    }
  }
  return p;
}

// Schema with the requested domain sizes (NULL plus synthetic labels), for
// tests that need a TagSchema consistent with raw domain sizes.
inline TagSchema make_schema(const std::vector<int>& domain_sizes) {
  std::vector<TagType> types;
  for (size_t m = 0; m < domain_sizes.size(); ++m) {
    TagType tt;
    tt.name = "tag" + std::to_string(m);
    tt.labels.push_back("NULL");
    for (int k = 1; k < domain_sizes[m]; ++k) {
      tt.labels.push_back("v" + std::to_string(k));
    }
    types.push_back(tt);
  }
  return TagSchema(types);
}

}  // namespace morphtag::testing
