#include "morphtag/potentials.hpp"

#include <stdexcept>

#include "morphtag/factor_graph.hpp"

namespace morphtag {

namespace {

std::vector<Eigen::MatrixXd> zero_transition_tables(const TagSchema& schema) {
  std::vector<Eigen::MatrixXd> tables;
  tables.reserve(schema.num_tag_types());
  for (int m = 0; m < schema.num_tag_types(); ++m) {
    int n = schema.tag_type(m).size();
    tables.push_back(Eigen::MatrixXd::Zero(n, n));
  }
  return tables;
}

std::vector<Eigen::MatrixXd> zero_pairwise_tables(const TagSchema& schema) {
  std::vector<Eigen::MatrixXd> tables;
  int num_tags = schema.num_tag_types();
  tables.reserve(static_cast<size_t>(num_tags) * (num_tags - 1) / 2);
  for (int i = 0; i < num_tags; ++i) {
    for (int j = i + 1; j < num_tags; ++j) {
      tables.push_back(Eigen::MatrixXd::Zero(schema.tag_type(i).size(),
                                             schema.tag_type(j).size()));
    }
  }
  return tables;
}

const std::vector<Eigen::MatrixXd>& lang_tables(
    const std::map<std::string, std::vector<Eigen::MatrixXd>>& tables,
    const std::string& language) {
  auto it = tables.find(language);
  if (it == tables.end()) {
    throw std::runtime_error("unknown language '" + language +
                             "': no language-specific weight tables");
  }
  return it->second;
}

}  // namespace

FactorWeights init_factor_weights(const TagSchema& schema,
                                  const std::vector<std::string>& languages) {
  FactorWeights weights;
  weights.num_tags = schema.num_tag_types();
  weights.transition_gen = zero_transition_tables(schema);
  weights.pairwise_gen = zero_pairwise_tables(schema);
  if (languages.size() >= 2) {
    for (const auto& lang : languages) {
      weights.transition_lang[lang] = zero_transition_tables(schema);
      weights.pairwise_lang[lang] = zero_pairwise_tables(schema);
    }
  }
  return weights;
}

double transition_log_potential(const FactorWeights& weights, int m,
                                const std::string& language, int a, int b) {
  double value = weights.transition_gen.at(m)(a, b);
  if (weights.has_language_tables()) {
    value += lang_tables(weights.transition_lang, language).at(m)(a, b);
  }
  return value;
}

double pairwise_log_potential(const FactorWeights& weights, int i, int j,
                              const std::string& language, int a, int b) {
  if (i >= j) {
    throw std::invalid_argument("pairwise_log_potential: tag pair must satisfy i < j");
  }
  int p = FactorGraph::pair_index(i, j, weights.num_tags);
  double value = weights.pairwise_gen.at(p)(a, b);
  if (weights.has_language_tables()) {
    value += lang_tables(weights.pairwise_lang, language).at(p)(a, b);
  }
  return value;
}

std::vector<Eigen::MatrixXd> combined_transition(const FactorWeights& weights,
                                                 const std::string& language) {
  std::vector<Eigen::MatrixXd> out = weights.transition_gen;
  if (weights.has_language_tables()) {
    const auto& lang = lang_tables(weights.transition_lang, language);
    for (size_t m = 0; m < out.size(); ++m) out[m] += lang[m];
  }
  return out;
}

std::vector<Eigen::MatrixXd> combined_pairwise(const FactorWeights& weights,
                                               const std::string& language) {
  std::vector<Eigen::MatrixXd> out = weights.pairwise_gen;
  if (weights.has_language_tables()) {
    const auto& lang = lang_tables(weights.pairwise_lang, language);
    for (size_t p = 0; p < out.size(); ++p) out[p] += lang[p];
  }
  return out;
}

}  // namespace morphtag
