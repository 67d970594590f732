#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "plma/ebm.hpp"
#include "plma/tensor_set.hpp"

namespace plma {

// Architecture of the cross-graph attention network.
//
// clip is the constant C scaling the tanh head. It bounds the logits fed to
// Sinkhorn to [-C, C] and so limits how peaked the sampler can become.
struct NetworkDims {
  int d_in = 16;
  int d = 256;
  int gcn_layers = 10;
  int attention_blocks = 1;
  int heads = 8;
  int sinkhorn_iters = 1;
  double clip = 10.0;

  void validate() const;
  friend bool operator==(const NetworkDims&, const NetworkDims&) = default;
};

class NonFiniteError : public std::runtime_error {
 public:
  NonFiniteError(const std::string& stage, int layer)
      : std::runtime_error("non-finite activation in " + stage + " " + std::to_string(layer)),
        layer_(layer) {}
  int layer() const { return layer_; }

 private:
  int layer_;
};

// Learnable tensors, stored in a fixed order:
//   h_ini (1 x d_in), W_proj (d_in x d),
//   per GCN layer l:        gcn<l>.W_D, gcn<l>.W_F, gcn<l>.ln_gamma, gcn<l>.ln_beta
//   per attention block r:  att<r>.W_Dq, att<r>.W_Dk, att<r>.W_Fq, att<r>.W_Fk, att<r>.W_o,
//                           att<r>.mlp_W1, att<r>.mlp_b1, att<r>.mlp_W2, att<r>.mlp_b2,
//                           att<r>.ln_gamma, att<r>.ln_beta
struct NetworkParams {
  NetworkDims dims;
  TensorSet tensors;

  static constexpr std::size_t kGcnTensors = 4;
  static constexpr std::size_t kAttTensors = 11;

  std::size_t gcn_base(int layer) const { return 2 + kGcnTensors * layer; }
  std::size_t att_base(int block) const {
    return 2 + kGcnTensors * dims.gcn_layers + kAttTensors * block;
  }
};

// Zero-valued parameters with the layout implied by dims.
NetworkParams zero_params(const NetworkDims& dims);

// Weights uniform on [-1/sqrt(fan_in), 1/sqrt(fan_in)], layer-norm scale 1 and
// offset 0, h_ini uniform on [-1, 1]. Deterministic per seed.
NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed);

namespace detail {

struct LayerNormCache {
  Matrix xhat;
  Vector inv_std;
};

Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, LayerNormCache& c);
// Returns dL/dx and accumulates into dgamma/dbeta.
Matrix layer_norm_backward(const Matrix& dy, const Matrix& gamma, const LayerNormCache& c,
                           Matrix& dgamma, Matrix& dbeta);

struct GcnSideTape {
  Matrix h_in;
  Matrix pre;  // centred adjacency times (h_in W)
  LayerNormCache ln;
};

struct GcnTape {
  GcnSideTape dist_side;
  GcnSideTape flow_side;
};

// One mean-centred GCN layer with residual and post-residual layer norm,
// applied to both graphs. hd/hf are updated in place.
void gcn_forward(const TensorSet& p, std::size_t base, const Matrix& dist_c, const Matrix& flow_c,
                 Matrix& hd, Matrix& hf, GcnTape& tape);
// dhd/dhf: gradient w.r.t. layer output on entry, w.r.t. layer input on exit.
void gcn_backward(const TensorSet& p, std::size_t base, const Matrix& dist_c,
                  const Matrix& flow_c, const GcnTape& tape, Matrix& dhd, Matrix& dhf,
                  TensorSet& grads);

struct AttentionSideTape {
  Matrix q, k, v;               // n x d projections
  std::vector<Matrix> weights;  // per head: row-softmax attention (n x n)
  Matrix mixed;                 // concatenated head outputs (n x d)
  Matrix projected;             // mixed * W_o
  Matrix hidden_pre;            // first MLP affine map
  LayerNormCache ln;
};

struct AttentionTape {
  Matrix hd_in, hf_in;
  AttentionSideTape dist_side;
  AttentionSideTape flow_side;
};

void attention_forward(const TensorSet& p, std::size_t base, int heads, Matrix& hd, Matrix& hf,
                       AttentionTape& tape);
void attention_backward(const TensorSet& p, std::size_t base, int heads,
                        const AttentionTape& tape, Matrix& dhd, Matrix& dhf, TensorSet& grads);

struct HeadTape {
  Matrix hd, hf;
  Matrix tanh_out;                   // tanh(hf hd^T / sqrt(d))
  std::vector<Matrix> sinkhorn_out;  // output of each normalisation pass
};

Matrix head_forward(const Matrix& hd, const Matrix& hf, double clip, int sinkhorn_iters,
                    HeadTape& tape);
void head_backward(const HeadTape& tape, double clip, const Matrix& grad_phi, Matrix& dhd,
                   Matrix& dhf);

}  // namespace detail

struct ForwardTape {
  NetworkDims dims;
  int n = 0;
  Matrix dist_c, flow_c;  // normalised, mean-centred inputs
  std::vector<detail::GcnTape> gcn;
  std::vector<detail::AttentionTape> attention;
  detail::HeadTape head;
  Matrix phi;
};

// F and D are mean-centred, then divided by their largest absolute entry.
Heatmap forward(const NetworkParams& params, const QapInstance& inst, ForwardTape& tape);
Heatmap forward(const NetworkParams& params, const QapInstance& inst);

// Gradient of <grad_phi, phi> with respect to every parameter.
TensorSet backward(const ForwardTape& tape, const NetworkParams& params, const Matrix& grad_phi);
// Accumulating variant: grads += d<grad_phi, phi>/dtheta.
void backward_into(const ForwardTape& tape, const NetworkParams& params, const Matrix& grad_phi,
                   TensorSet& grads);

// iters x {row log-normalise, column log-normalise}.
Matrix log_sinkhorn(const Matrix& logits, int iters);
// Keeps the output of every pass for the backward sweep.
Matrix log_sinkhorn(const Matrix& logits, int iters, std::vector<Matrix>& passes);
Matrix log_sinkhorn_backward(const std::vector<Matrix>& passes, const Matrix& grad_out);

// Direct parameterisation: phi = log_sinkhorn(C * theta).
Heatmap direct_heatmap(const Matrix& theta, double clip, int iters);
Matrix direct_heatmap_backward(const Matrix& theta, double clip, int iters,
                               const Matrix& grad_phi);

// Versioned binary checkpoint; layout documented in README.
void save_checkpoint(const std::string& path, const NetworkParams& params);
NetworkParams load_checkpoint(const std::string& path);
std::string encode_checkpoint(const NetworkParams& params);
NetworkParams decode_checkpoint(const std::string& bytes);

}  // namespace plma
