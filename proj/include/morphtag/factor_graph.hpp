#pragma once

#include <array>
#include <string>
#include <vector>

namespace morphtag {

// One variable of the factorial CRF: tag type m of token t.
struct VariableId {
  int t = 0;
  int m = 0;

  bool operator==(const VariableId&) const = default;
};

enum class FactorKind { Neural, Pairwise, Transition };

// Topology-only description of one factor. Potentials are looked up
// elsewhere so the same graph shape serves every sentence of equal length.
struct Factor {
  FactorKind kind;
  std::array<VariableId, 2> scope{};  // scope[1] unused for Neural
  int scope_size = 1;

  // Neural/Transition: tag_i is the tag type m. Pairwise: (tag_i, tag_j)
  // with tag_i < tag_j.
  int tag_i = 0;
  int tag_j = 0;
};

// Which factor families to instantiate; both off yields the tag-wise model.
struct FactorTopology {
  bool use_pairwise = true;
  bool use_transition = true;
};

class FactorGraph {
 public:
  FactorGraph(int t_len, int num_tags, FactorTopology topology);

  int T() const { return t_; }
  int M() const { return m_; }
  int num_variables() const { return t_ * m_; }
  int var_index(int t, int m) const { return t * m_ + m; }
  int var_index(VariableId v) const { return var_index(v.t, v.m); }

  const std::vector<Factor>& factors() const { return factors_; }
  const Factor& factor(int f) const { return factors_[f]; }
  // Factor indices incident to variable (t, m).
  const std::vector<int>& incident(int t, int m) const {
    return incident_[var_index(t, m)];
  }
  const std::vector<int>& incident(VariableId v) const {
    return incident_[var_index(v)];
  }

  // The neural factor owning variable (t, m).
  int neural_factor(int t, int m) const { return neural_index_[var_index(t, m)]; }

  FactorTopology topology() const { return topology_; }

  // Index of the canonical unordered tag pair (i, j), i < j, in the
  // lexicographic enumeration over all M(M-1)/2 pairs.
  static int pair_index(int i, int j, int num_tags);

  std::string debug_dump() const;

 private:
  int t_;
  int m_;
  FactorTopology topology_;
  std::vector<Factor> factors_;
  std::vector<std::vector<int>> incident_;
  std::vector<int> neural_index_;
};

// Full topology: T*M neural factors, one pairwise factor per cotemporal
// unordered tag pair, one transition factor per tag type and adjacent
// timestep pair. Throws when T < 1 or M < 1.
FactorGraph build_graph(int t_len, int num_tags,
                        FactorTopology topology = FactorTopology{});

}  // namespace morphtag
