#include "morphtag/emitter.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace morphtag {

namespace {

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  double e = std::exp(x);
  return e / (1.0 + e);
}

LstmCellParams make_cell(int input_dim, int hidden_dim) {
  LstmCellParams cell;
  cell.w_input = Eigen::MatrixXd::Zero(4 * hidden_dim, input_dim);
  cell.w_hidden = Eigen::MatrixXd::Zero(4 * hidden_dim, hidden_dim);
  cell.bias = Eigen::VectorXd::Zero(4 * hidden_dim);
  return cell;
}

// Runs the character biLSTM for one token; v = [fwd final; bwd final].
Eigen::VectorXd token_embedding(const EmitterParams& params,
                                const std::string& token, TokenTrace* trace) {
  auto codepoints = decode_utf8(token);
  if (codepoints.empty()) {
    throw std::runtime_error("embed_token: empty token");
  }
  int n = static_cast<int>(codepoints.size());
  int d = params.char_dim;

  std::vector<int> rows(n);
  for (int k = 0; k < n; ++k) rows[k] = params.vocab.lookup(codepoints[k]);

  Eigen::MatrixXd embeddings(d, n);
  for (int k = 0; k < n; ++k) {
    embeddings.col(k) = params.char_embeddings.row(rows[k]).transpose();
  }
  Eigen::MatrixXd reversed = embeddings.rowwise().reverse();

  LstmTrace fwd, bwd;
  lstm_forward(params.char_forward, embeddings, &fwd);
  lstm_forward(params.char_backward, reversed, &bwd);

  Eigen::VectorXd v(2 * d);
  v.head(d) = fwd.steps.back().hidden;
  v.tail(d) = bwd.steps.back().hidden;

  if (trace) {
    trace->char_rows = std::move(rows);
    trace->forward = std::move(fwd);
    trace->backward = std::move(bwd);
  }
  return v;
}

Eigen::MatrixXd dropout_mask(int rows, int cols, double p, Rng& rng) {
  Eigen::MatrixXd mask(rows, cols);
  double keep_scale = 1.0 / (1.0 - p);
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      mask(r, c) = rng.bernoulli(p) ? 0.0 : keep_scale;
    }
  }
  return mask;
}

// One biLSTM layer over T columns; output column t is [fwd h_t; bwd h_t].
Eigen::MatrixXd bilstm_layer(const LstmCellParams& fwd_params,
                             const LstmCellParams& bwd_params,
                             const Eigen::MatrixXd& inputs, LstmTrace* fwd,
                             LstmTrace* bwd) {
  int t_len = static_cast<int>(inputs.cols());
  int h = fwd_params.hidden_dim();
  Eigen::MatrixXd reversed = inputs.rowwise().reverse();
  lstm_forward(fwd_params, inputs, fwd);
  lstm_forward(bwd_params, reversed, bwd);
  Eigen::MatrixXd out(2 * h, t_len);
  for (int t = 0; t < t_len; ++t) {
    out.col(t).head(h) = fwd->steps[t].hidden;
    out.col(t).tail(h) = bwd->steps[t_len - 1 - t].hidden;
  }
  return out;
}

}  // namespace

CharVocab::CharVocab(std::vector<char32_t> chars) : chars_(std::move(chars)) {
  std::sort(chars_.begin(), chars_.end());
  chars_.erase(std::unique(chars_.begin(), chars_.end()), chars_.end());
  for (size_t i = 0; i < chars_.size(); ++i) {
    index_[chars_[i]] = static_cast<int>(i) + 1;
  }
}

CharVocab CharVocab::from_corpus(const Corpus& corpus) {
  std::set<char32_t> seen;
  for (const auto& sentence : corpus.sentences) {
    for (const auto& token : sentence.tokens) {
      for (char32_t c : decode_utf8(token)) seen.insert(c);
    }
  }
  return CharVocab(std::vector<char32_t>(seen.begin(), seen.end()));
}

int CharVocab::lookup(char32_t c) const {
  auto it = index_.find(c);
  return it == index_.end() ? 0 : it->second;
}

std::vector<char32_t> decode_utf8(const std::string& text) {
  std::vector<char32_t> out;
  size_t i = 0;
  while (i < text.size()) {
    unsigned char b0 = static_cast<unsigned char>(text[i]);
    int len;
    char32_t cp;
    if (b0 < 0x80) {
      len = 1;
      cp = b0;
    } else if ((b0 & 0xE0) == 0xC0) {
      len = 2;
      cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
      len = 3;
      cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
      len = 4;
      cp = b0 & 0x07;
    } else {
      out.push_back(b0);  // stray continuation byte, keep as latin-1
      ++i;
      continue;
    }
    if (i + len > text.size()) {
      out.push_back(b0);
      ++i;
      continue;
    }
    bool valid = true;
    for (int k = 1; k < len; ++k) {
      if ((static_cast<unsigned char>(text[i + k]) & 0xC0) != 0x80) {
        valid = false;
        break;
      }
      cp = (cp << 6) | (static_cast<unsigned char>(text[i + k]) & 0x3F);
    }
    if (!valid) {
      out.push_back(b0);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

EmitterParams init_emitter(const CharVocab& vocab,
                           const std::vector<std::string>& languages,
                           int output_dim, const EmitterConfig& cfg, Rng& rng) {
  if (languages.empty()) {
    throw std::runtime_error("init_emitter: at least one language required");
  }
  EmitterParams params;
  params.vocab = vocab;
  params.char_dim = cfg.char_dim;
  params.hidden_dim = cfg.hidden_dim;
  params.output_dim = output_dim;

  int d = cfg.char_dim;
  int h = cfg.hidden_dim;
  params.char_embeddings = Eigen::MatrixXd::Zero(vocab.size(), d);
  params.char_forward = make_cell(d, d);
  params.char_backward = make_cell(d, d);
  for (int l = 0; l < cfg.num_layers; ++l) {
    int in_dim = (l == 0) ? 2 * d : 2 * h;
    params.word_forward.push_back(make_cell(in_dim, h));
    params.word_backward.push_back(make_cell(in_dim, h));
  }
  for (const auto& lang : languages) {
    LinearParams head;
    head.weight = Eigen::MatrixXd::Zero(output_dim, 2 * h);
    head.bias = Eigen::VectorXd::Zero(output_dim);
    params.heads[lang] = std::move(head);
  }

  double r = cfg.init_range;
  for_each_parameter(params, [&](const std::string&, auto& mat) {
    for (Eigen::Index c = 0; c < mat.cols(); ++c) {
      for (Eigen::Index row = 0; row < mat.rows(); ++row) {
        mat(row, c) = rng.uniform(-r, r);
      }
    }
  });
  return params;
}

void lstm_forward(const LstmCellParams& params, const Eigen::MatrixXd& inputs,
                  LstmTrace* trace) {
  int h = params.hidden_dim();
  int n = static_cast<int>(inputs.cols());
  trace->steps.clear();
  trace->steps.resize(n);
  Eigen::VectorXd h_prev = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd c_prev = Eigen::VectorXd::Zero(h);
  for (int s = 0; s < n; ++s) {
    LstmStepTrace& step = trace->steps[s];
    step.input = inputs.col(s);
    step.cell_prev = c_prev;
    Eigen::VectorXd pre =
        params.w_input * step.input + params.w_hidden * h_prev + params.bias;
    step.gate_i = pre.segment(0, h).unaryExpr([](double x) { return sigmoid(x); });
    step.gate_f = pre.segment(h, h).unaryExpr([](double x) { return sigmoid(x); });
    step.gate_g = pre.segment(2 * h, h).array().tanh().matrix();
    step.gate_o = pre.segment(3 * h, h).unaryExpr([](double x) { return sigmoid(x); });
    step.cell = step.gate_f.cwiseProduct(c_prev) + step.gate_i.cwiseProduct(step.gate_g);
    step.tanh_cell = step.cell.array().tanh().matrix();
    step.hidden = step.gate_o.cwiseProduct(step.tanh_cell);
    h_prev = step.hidden;
    c_prev = step.cell;
  }
}

void lstm_backward(const LstmCellParams& params, const LstmTrace& trace,
                   const Eigen::MatrixXd& d_hidden, Eigen::MatrixXd* d_inputs,
                   LstmCellParams* grads) {
  int h = params.hidden_dim();
  int n = static_cast<int>(trace.steps.size());
  if (d_hidden.cols() != n) {
    throw std::runtime_error("lstm_backward: gradient/trace length mismatch");
  }
  d_inputs->setZero(params.input_dim(), n);
  Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(h);
  Eigen::VectorXd d_pre(4 * h);
  for (int s = n - 1; s >= 0; --s) {
    const LstmStepTrace& step = trace.steps[s];
    Eigen::VectorXd dh = d_hidden.col(s) + dh_next;
    Eigen::VectorXd dc =
        dc_next + dh.cwiseProduct(step.gate_o)
                      .cwiseProduct(Eigen::VectorXd::Ones(h) -
                                    step.tanh_cell.cwiseProduct(step.tanh_cell));
    Eigen::VectorXd d_o = dh.cwiseProduct(step.tanh_cell);
    Eigen::VectorXd d_i = dc.cwiseProduct(step.gate_g);
    Eigen::VectorXd d_f = dc.cwiseProduct(step.cell_prev);
    Eigen::VectorXd d_g = dc.cwiseProduct(step.gate_i);

    d_pre.segment(0, h) =
        d_i.cwiseProduct(step.gate_i)
            .cwiseProduct(Eigen::VectorXd::Ones(h) - step.gate_i);
    d_pre.segment(h, h) =
        d_f.cwiseProduct(step.gate_f)
            .cwiseProduct(Eigen::VectorXd::Ones(h) - step.gate_f);
    d_pre.segment(2 * h, h) = d_g.cwiseProduct(
        Eigen::VectorXd::Ones(h) - step.gate_g.cwiseProduct(step.gate_g));
    d_pre.segment(3 * h, h) =
        d_o.cwiseProduct(step.gate_o)
            .cwiseProduct(Eigen::VectorXd::Ones(h) - step.gate_o);

    grads->w_input.noalias() += d_pre * step.input.transpose();
    if (s > 0) {
      grads->w_hidden.noalias() += d_pre * trace.steps[s - 1].hidden.transpose();
    }
    grads->bias += d_pre;
    d_inputs->col(s) = params.w_input.transpose() * d_pre;
    dh_next = params.w_hidden.transpose() * d_pre;
    dc_next = dc.cwiseProduct(step.gate_f);
  }
}

Eigen::VectorXd embed_token(const EmitterParams& params, const std::string& token) {
  return token_embedding(params, token, nullptr);
}

Eigen::MatrixXd emitter_forward(const EmitterParams& params,
                                const std::vector<std::string>& tokens,
                                const std::string& language, double dropout,
                                Rng* rng, EmitterTrace* trace) {
  if (tokens.empty()) {
    throw std::runtime_error("emitter_forward: empty sentence");
  }
  auto head_it = params.heads.find(language);
  if (head_it == params.heads.end()) {
    std::string known;
    for (const auto& [lang, _] : params.heads) {
      if (!known.empty()) known += ", ";
      known += lang;
    }
    throw std::runtime_error("no linear layer for language '" + language +
                             "' (trained: " + known +
                             "); use --lang-fallback to map it");
  }
  if (dropout > 0.0 && rng == nullptr) {
    throw std::invalid_argument("emitter_forward: dropout requires an RNG");
  }

  int t_len = static_cast<int>(tokens.size());
  EmitterTrace local;
  EmitterTrace& tr = trace ? *trace : local;
  tr = EmitterTrace{};
  tr.language = language;
  tr.tokens.resize(t_len);

  Eigen::MatrixXd v(2 * params.char_dim, t_len);
  for (int t = 0; t < t_len; ++t) {
    v.col(t) = token_embedding(params, tokens[t], &tr.tokens[t]);
  }
  tr.token_embeddings = v;

  int layers = params.num_layers();
  tr.layer_inputs.resize(layers);
  tr.dropout_masks.resize(layers);
  tr.word_forward.resize(layers);
  tr.word_backward.resize(layers);

  Eigen::MatrixXd current = std::move(v);
  for (int l = 0; l < layers; ++l) {
    if (dropout > 0.0) {
      tr.dropout_masks[l] =
          dropout_mask(static_cast<int>(current.rows()), t_len, dropout, *rng);
      current = current.cwiseProduct(tr.dropout_masks[l]);
    }
    tr.layer_inputs[l] = current;
    current = bilstm_layer(params.word_forward[l], params.word_backward[l],
                           current, &tr.word_forward[l], &tr.word_backward[l]);
  }
  tr.features = current;

  const LinearParams& head = head_it->second;
  tr.scores = (head.weight * current).colwise() + head.bias;
  return tr.scores;
}

EmissionScores slice_scores(const Eigen::MatrixXd& score_matrix,
                            const TagSchema& schema) {
  if (score_matrix.rows() != schema.total_labels()) {
    throw std::runtime_error("slice_scores: score rows do not match schema");
  }
  EmissionScores out;
  int t_len = static_cast<int>(score_matrix.cols());
  out.scores.resize(t_len);
  for (int t = 0; t < t_len; ++t) {
    out.scores[t].reserve(schema.num_tag_types());
    for (int m = 0; m < schema.num_tag_types(); ++m) {
      out.scores[t].push_back(score_matrix.col(t).segment(
          schema.segment_offset(m), schema.tag_type(m).size()));
    }
  }
  return out;
}

Eigen::MatrixXd upstream_matrix(const std::vector<std::vector<Eigen::VectorXd>>& upstream,
                                const TagSchema& schema) {
  int t_len = static_cast<int>(upstream.size());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(schema.total_labels(), t_len);
  for (int t = 0; t < t_len; ++t) {
    if (static_cast<int>(upstream[t].size()) != schema.num_tag_types()) {
      throw std::runtime_error("upstream_matrix: tag-type count mismatch");
    }
    for (int m = 0; m < schema.num_tag_types(); ++m) {
      if (upstream[t][m].size() != schema.tag_type(m).size()) {
        throw std::runtime_error("upstream_matrix: label-count mismatch at (" +
                                 std::to_string(t) + ", " + std::to_string(m) + ")");
      }
      out.col(t).segment(schema.segment_offset(m), schema.tag_type(m).size()) =
          upstream[t][m];
    }
  }
  return out;
}

EmissionScores emission_scores(const EmitterParams& params, const Sentence& sentence,
                               const TagSchema& schema, double dropout, Rng* rng,
                               EmitterTrace* trace) {
  Eigen::MatrixXd matrix = emitter_forward(params, sentence.tokens,
                                           sentence.language_id, dropout, rng, trace);
  return slice_scores(matrix, schema);
}

EmitterParams zeros_like(const EmitterParams& params) {
  EmitterParams out = params;
  for_each_parameter(out, [](const std::string&, auto& mat) { mat.setZero(); });
  return out;
}

EmitterParams emitter_backward(const EmitterParams& params, const EmitterTrace& trace,
                               const Eigen::MatrixXd& upstream) {
  if (upstream.rows() != params.output_dim ||
      upstream.cols() != trace.scores.cols()) {
    throw std::invalid_argument("emitter_backward: upstream shape mismatch");
  }
  EmitterParams grads = zeros_like(params);
  int t_len = static_cast<int>(upstream.cols());
  int h = params.hidden_dim;
  int layers = params.num_layers();

  const LinearParams& head = params.heads.at(trace.language);
  LinearParams& head_grad = grads.heads.at(trace.language);
  head_grad.weight.noalias() += upstream * trace.features.transpose();
  head_grad.bias += upstream.rowwise().sum();
  Eigen::MatrixXd d_out = head.weight.transpose() * upstream;

  for (int l = layers - 1; l >= 0; --l) {
    // Split the layer output gradient into the two directions; the backward
    // direction processes columns in reverse time order.
    Eigen::MatrixXd d_h_fwd = d_out.topRows(h);
    Eigen::MatrixXd d_h_bwd(h, t_len);
    for (int t = 0; t < t_len; ++t) {
      d_h_bwd.col(t) = d_out.col(t_len - 1 - t).bottomRows(h);
    }
    Eigen::MatrixXd d_in_fwd, d_in_bwd;
    lstm_backward(params.word_forward[l], trace.word_forward[l], d_h_fwd,
                  &d_in_fwd, &grads.word_forward[l]);
    lstm_backward(params.word_backward[l], trace.word_backward[l], d_h_bwd,
                  &d_in_bwd, &grads.word_backward[l]);
    Eigen::MatrixXd d_input = d_in_fwd;
    for (int t = 0; t < t_len; ++t) {
      d_input.col(t) += d_in_bwd.col(t_len - 1 - t);
    }
    if (!trace.dropout_masks[l].size()) {
      d_out = std::move(d_input);
    } else {
      d_out = d_input.cwiseProduct(trace.dropout_masks[l]);
    }
  }

  int d = params.char_dim;
  for (int t = 0; t < t_len; ++t) {
    const TokenTrace& token = trace.tokens[t];
    int n = static_cast<int>(token.char_rows.size());
    Eigen::MatrixXd d_h_fwd = Eigen::MatrixXd::Zero(d, n);
    Eigen::MatrixXd d_h_bwd = Eigen::MatrixXd::Zero(d, n);
    d_h_fwd.col(n - 1) = d_out.col(t).head(d);
    d_h_bwd.col(n - 1) = d_out.col(t).tail(d);
    Eigen::MatrixXd d_emb_fwd, d_emb_bwd;
    lstm_backward(params.char_forward, token.forward, d_h_fwd, &d_emb_fwd,
                  &grads.char_forward);
    lstm_backward(params.char_backward, token.backward, d_h_bwd, &d_emb_bwd,
                  &grads.char_backward);
    for (int k = 0; k < n; ++k) {
      grads.char_embeddings.row(token.char_rows[k]) +=
          (d_emb_fwd.col(k) + d_emb_bwd.col(n - 1 - k)).transpose();
    }
  }
  return grads;
}

}  // namespace morphtag
