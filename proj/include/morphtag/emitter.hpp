#pragma once

#include <Eigen/Core>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "morphtag/rng.hpp"
#include "morphtag/schema.hpp"

namespace morphtag {

// Character inventory observed in training. Index 0 is reserved for UNK;
// unseen test characters map there.
class CharVocab {
 public:
  CharVocab() = default;
  explicit CharVocab(std::vector<char32_t> chars);

  static CharVocab from_corpus(const Corpus& corpus);

  int size() const { return static_cast<int>(chars_.size()) + 1; }
  int lookup(char32_t c) const;  // 0 (UNK) when unseen
  const std::vector<char32_t>& chars() const { return chars_; }

 private:
  std::vector<char32_t> chars_;  // sorted codepoints, row i+1 of the table
  std::unordered_map<char32_t, int> index_;
};

// Decodes UTF-8 into codepoints; bytes that do not form a valid sequence
// are taken as single latin-1 codepoints rather than rejected.
std::vector<char32_t> decode_utf8(const std::string& text);

// One LSTM direction: gate order [input; forget; cell; output] stacked in
// 4H rows.
struct LstmCellParams {
  Eigen::MatrixXd w_input;   // 4H x D
  Eigen::MatrixXd w_hidden;  // 4H x H
  Eigen::VectorXd bias;      // 4H

  int hidden_dim() const { return static_cast<int>(w_hidden.cols()); }
  int input_dim() const { return static_cast<int>(w_input.cols()); }
};

struct LinearParams {
  Eigen::MatrixXd weight;  // K x (2h)
  Eigen::VectorXd bias;    // K
};

// Character-level biLSTM embedder feeding a stacked word-level biLSTM and
// a per-language linear output layer.
struct EmitterParams {
  CharVocab vocab;
  Eigen::MatrixXd char_embeddings;  // vocab.size() x d_c, row 0 = UNK
  LstmCellParams char_forward;      // hidden d_c
  LstmCellParams char_backward;
  std::vector<LstmCellParams> word_forward;   // one per layer
  std::vector<LstmCellParams> word_backward;  // one per layer
  std::map<std::string, LinearParams> heads;  // language -> output layer

  int char_dim = 0;    // d_c; token embedding v_t has dim 2*d_c
  int hidden_dim = 0;  // h per direction; e_t has dim 2h
  int output_dim = 0;  // K

  int num_layers() const { return static_cast<int>(word_forward.size()); }
};

struct EmitterConfig {
  int char_dim = 64;
  int hidden_dim = 256;
  int num_layers = 2;
  double init_range = 0.1;  // uniform [-r, r]
};

// Fresh parameters for the given languages and output width; all weights
// uniform in [-init_range, init_range].
EmitterParams init_emitter(const CharVocab& vocab,
                           const std::vector<std::string>& languages,
                           int output_dim, const EmitterConfig& cfg, Rng& rng);

// Forward intermediates retained for the backward pass.
struct LstmStepTrace {
  Eigen::VectorXd input;
  Eigen::VectorXd gate_i, gate_f, gate_g, gate_o;
  Eigen::VectorXd cell, cell_prev, tanh_cell, hidden;
};

struct LstmTrace {
  std::vector<LstmStepTrace> steps;
};

struct TokenTrace {
  std::vector<int> char_rows;
  LstmTrace forward, backward;
};

struct EmitterTrace {
  std::string language;
  std::vector<TokenTrace> tokens;
  Eigen::MatrixXd token_embeddings;           // 2d_c x T (pre-dropout)
  std::vector<Eigen::MatrixXd> layer_inputs;  // per layer, post-dropout
  std::vector<Eigen::MatrixXd> dropout_masks; // per layer; empty when off
  std::vector<LstmTrace> word_forward, word_backward;
  Eigen::MatrixXd features;  // e_t columns, 2h x T
  Eigen::MatrixXd scores;    // K x T
};

// Runs one LSTM direction over a sequence; inputs are columns in
// processing order.
void lstm_forward(const LstmCellParams& params, const Eigen::MatrixXd& inputs,
                  LstmTrace* trace);

// Reverse-mode pass. d_hidden holds the gradient on each step's hidden
// state (columns in processing order); d_inputs receives input gradients
// and grads accumulates parameter gradients.
void lstm_backward(const LstmCellParams& params, const LstmTrace& trace,
                   const Eigen::MatrixXd& d_hidden, Eigen::MatrixXd* d_inputs,
                   LstmCellParams* grads);

// [cLSTM(c_1..c_n); cLSTM(c_n..c_1)], the concatenated final hidden states
// of the two character LSTMs. Throws on an empty token.
Eigen::VectorXd embed_token(const EmitterParams& params, const std::string& token);

// Full forward pass: K x T score matrix for the sentence's language head.
// dropout > 0 applies inverted dropout on the word-LSTM inputs and between
// its layers (training only); rng must then be non-null. trace is required
// for emitter_backward.
Eigen::MatrixXd emitter_forward(const EmitterParams& params,
                                const std::vector<std::string>& tokens,
                                const std::string& language,
                                double dropout = 0.0, Rng* rng = nullptr,
                                EmitterTrace* trace = nullptr);

// Per-variable score vectors f_nn(x, t) sliced by tag type.
struct EmissionScores {
  // scores[t][m]: length |Y_m| log-potential vector of the neural factor.
  std::vector<std::vector<Eigen::VectorXd>> scores;

  int T() const { return static_cast<int>(scores.size()); }
};

EmissionScores slice_scores(const Eigen::MatrixXd& score_matrix,
                            const TagSchema& schema);

// upstream[t][m] entries assembled back into a K x T matrix.
Eigen::MatrixXd upstream_matrix(const std::vector<std::vector<Eigen::VectorXd>>& upstream,
                                const TagSchema& schema);

EmissionScores emission_scores(const EmitterParams& params, const Sentence& sentence,
                               const TagSchema& schema, double dropout = 0.0,
                               Rng* rng = nullptr, EmitterTrace* trace = nullptr);

// Gradient holder mirroring EmitterParams shapes (vocab unused).
EmitterParams zeros_like(const EmitterParams& params);

// Exact gradients of sum_t <upstream[:,t], scores[:,t]> with respect to
// every parameter, including the character LSTMs and embedding table.
EmitterParams emitter_backward(const EmitterParams& params, const EmitterTrace& trace,
                               const Eigen::MatrixXd& upstream);

// Applies fn to every parameter matrix (vectors as Nx1 maps) in a fixed
// order shared by optimizers, serialization and gradient checks.
template <typename Fn>
void for_each_parameter(EmitterParams& params, Fn&& fn) {
  auto cell = [&](const std::string& name, LstmCellParams& c) {
    fn(name + ".w_input", c.w_input);
    fn(name + ".w_hidden", c.w_hidden);
    fn(name + ".bias", c.bias);
  };
  fn("char_embeddings", params.char_embeddings);
  cell("char_forward", params.char_forward);
  cell("char_backward", params.char_backward);
  for (size_t l = 0; l < params.word_forward.size(); ++l) {
    cell("word_forward." + std::to_string(l), params.word_forward[l]);
    cell("word_backward." + std::to_string(l), params.word_backward[l]);
  }
  for (auto& [lang, head] : params.heads) {
    fn("head." + lang + ".weight", head.weight);
    fn("head." + lang + ".bias", head.bias);
  }
}

}  // namespace morphtag
