#include "morphtag/factor_graph.hpp"

#include <sstream>
#include <stdexcept>

namespace morphtag {

FactorGraph::FactorGraph(int t_len, int num_tags, FactorTopology topology)
    : t_(t_len), m_(num_tags), topology_(topology) {
  if (t_ < 1) throw std::invalid_argument("build_graph: sentence length must be >= 1");
  if (m_ < 1) throw std::invalid_argument("build_graph: schema must have >= 1 tag type");

  incident_.resize(static_cast<size_t>(t_) * m_);
  neural_index_.assign(static_cast<size_t>(t_) * m_, -1);

  auto add = [&](Factor f) {
    int idx = static_cast<int>(factors_.size());
    for (int k = 0; k < f.scope_size; ++k) {
      incident_[var_index(f.scope[k])].push_back(idx);
    }
    factors_.push_back(f);
    return idx;
  };

  for (int t = 0; t < t_; ++t) {
    for (int m = 0; m < m_; ++m) {
      Factor f;
      f.kind = FactorKind::Neural;
      f.scope[0] = {t, m};
      f.scope_size = 1;
      f.tag_i = m;
      neural_index_[var_index(t, m)] = add(f);
    }
    if (topology_.use_pairwise) {
      for (int i = 0; i < m_; ++i) {
        for (int j = i + 1; j < m_; ++j) {
          Factor f;
          f.kind = FactorKind::Pairwise;
          f.scope[0] = {t, i};
          f.scope[1] = {t, j};
          f.scope_size = 2;
          f.tag_i = i;
          f.tag_j = j;
          add(f);
        }
      }
    }
    if (topology_.use_transition && t + 1 < t_) {
      for (int m = 0; m < m_; ++m) {
        Factor f;
        f.kind = FactorKind::Transition;
        f.scope[0] = {t, m};
        f.scope[1] = {t + 1, m};
        f.scope_size = 2;
        f.tag_i = m;
        f.tag_j = m;
        add(f);
      }
    }
  }
}

int FactorGraph::pair_index(int i, int j, int num_tags) {
  if (i >= j) throw std::invalid_argument("pair_index: requires i < j");
  return i * num_tags - i * (i + 1) / 2 + (j - i - 1);
}

std::string FactorGraph::debug_dump() const {
  std::ostringstream out;
  out << "FactorGraph T=" << t_ << " M=" << m_ << " factors=" << factors_.size()
      << "\n";
  for (size_t f = 0; f < factors_.size(); ++f) {
    const Factor& factor = factors_[f];
    out << "  [" << f << "] ";
    switch (factor.kind) {
      case FactorKind::Neural:
        out << "neural (t=" << factor.scope[0].t << ", m=" << factor.tag_i << ")";
        break;
      case FactorKind::Pairwise:
        out << "pairwise t=" << factor.scope[0].t << " tags (" << factor.tag_i
            << ", " << factor.tag_j << ")";
        break;
      case FactorKind::Transition:
        out << "transition m=" << factor.tag_i << " t=(" << factor.scope[0].t
            << ", " << factor.scope[1].t << ")";
        break;
    }
    out << "\n";
  }
  return out.str();
}

FactorGraph build_graph(int t_len, int num_tags, FactorTopology topology) {
  return FactorGraph(t_len, num_tags, topology);
}

}  // namespace morphtag
