#include "plma/network.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace plma {

namespace {

constexpr double kLayerNormEps = 1e-5;

Matrix relu(const Matrix& x) { return x.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& pre, const Matrix& grad) {
  return (pre.array() > 0.0).select(grad, 0.0);
}

void check_finite(const Matrix& m, const char* stage, int layer) {
  if (!m.allFinite()) throw NonFiniteError(stage, layer);
}

Matrix row_softmax(const Matrix& a) {
  Matrix e(a.rows(), a.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double top = a.row(i).maxCoeff();
    e.row(i) = (a.row(i).array() - top).exp();
    e.row(i) /= e.row(i).sum();
  }
  return e;
}

Matrix row_softmax_backward(const Matrix& e, const Matrix& de) {
  const Vector inner = (de.array() * e.array()).rowwise().sum();
  return (e.array() * (de.array().colwise() - inner.array())).matrix();
}

// Centre first so a constant shift of the input cancels before scaling.
Matrix normalised_centred(const Matrix& m) {
  Matrix out = m.array() - m.mean();
  const double scale = out.cwiseAbs().maxCoeff();
  if (scale > 0.0) out /= scale;
  return out;
}

// Tensor offsets inside an attention block.
enum Att : std::size_t { kDq = 0, kDk, kFq, kFk, kWo, kW1, kB1, kW2, kB2, kGamma, kBeta };

struct SideMap {
  std::size_t q;  // queries from the side being updated
  std::size_t k;  // keys from the other side
  std::size_t v;  // values from the other side
};

// Values reuse the opposite side's key projection, following the block-matrix
// form of the cross-attention update.
constexpr SideMap kDistSide{kDq, kDk, kFk};
constexpr SideMap kFlowSide{kFq, kFk, kDk};

Matrix attention_side_forward(const TensorSet& p, std::size_t base, int heads, const SideMap& m,
                              const Matrix& own, const Matrix& other,
                              detail::AttentionSideTape& t) {
  const int d = static_cast<int>(own.cols());
  const int dh = d / heads;
  t.q = own * p[base + m.q];
  t.k = other * p[base + m.k];
  t.v = other * p[base + m.v];
  t.weights.resize(heads);
  t.mixed.resize(own.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const auto qh = t.q.middleCols(h * dh, dh);
    const auto kh = t.k.middleCols(h * dh, dh);
    t.weights[h] = row_softmax(qh * kh.transpose());
    t.mixed.middleCols(h * dh, dh) = t.weights[h] * t.v.middleCols(h * dh, dh);
  }
  t.projected = t.mixed * p[base + kWo];
  t.hidden_pre = (t.projected * p[base + kW1]).rowwise() + p[base + kB1].row(0);
  Matrix out = (relu(t.hidden_pre) * p[base + kW2]).rowwise() + p[base + kB2].row(0);
  return detail::layer_norm(own + out, p[base + kGamma], p[base + kBeta], t.ln);
}

// dh: gradient w.r.t. this side's block output. Adds input gradients into
// d_own / d_other.
void attention_side_backward(const TensorSet& p, std::size_t base, int heads, const SideMap& m,
                             const Matrix& own, const Matrix& other,
                             const detail::AttentionSideTape& t, const Matrix& dh, Matrix& d_own,
                             Matrix& d_other, TensorSet& g) {
  const int d = static_cast<int>(own.cols());
  const int dh_width = d / heads;
  const Matrix ds = detail::layer_norm_backward(dh, p[base + kGamma], t.ln, g[base + kGamma],
                                                g[base + kBeta]);
  d_own += ds;
  const Matrix hidden = relu(t.hidden_pre);
  g[base + kW2].noalias() += hidden.transpose() * ds;
  g[base + kB2] += ds.colwise().sum();
  const Matrix dhidden = relu_mask(t.hidden_pre, ds * p[base + kW2].transpose());
  g[base + kW1].noalias() += t.projected.transpose() * dhidden;
  g[base + kB1] += dhidden.colwise().sum();
  const Matrix dproj = dhidden * p[base + kW1].transpose();
  g[base + kWo].noalias() += t.mixed.transpose() * dproj;
  const Matrix dmixed = dproj * p[base + kWo].transpose();

  Matrix dq(t.q.rows(), d), dk(t.k.rows(), d), dv(t.v.rows(), d);
  for (int h = 0; h < heads; ++h) {
    const auto dmh = dmixed.middleCols(h * dh_width, dh_width);
    const Matrix de = dmh * t.v.middleCols(h * dh_width, dh_width).transpose();
    dv.middleCols(h * dh_width, dh_width) = t.weights[h].transpose() * dmh;
    const Matrix da = row_softmax_backward(t.weights[h], de);
    dq.middleCols(h * dh_width, dh_width) = da * t.k.middleCols(h * dh_width, dh_width);
    dk.middleCols(h * dh_width, dh_width) = da.transpose() * t.q.middleCols(h * dh_width, dh_width);
  }
  g[base + m.q].noalias() += own.transpose() * dq;
  d_own.noalias() += dq * p[base + m.q].transpose();
  g[base + m.k].noalias() += other.transpose() * dk;
  d_other.noalias() += dk * p[base + m.k].transpose();
  g[base + m.v].noalias() += other.transpose() * dv;
  d_other.noalias() += dv * p[base + m.v].transpose();
}

void gcn_side_forward(const Matrix& adj_c, const Matrix& w, const Matrix& gamma,
                      const Matrix& beta, Matrix& h, detail::GcnSideTape& t) {
  t.h_in = h;
  t.pre = adj_c * (h * w);
  h = detail::layer_norm(t.h_in + relu(t.pre), gamma, beta, t.ln);
}

void gcn_side_backward(const Matrix& adj_c, const Matrix& w, const Matrix& gamma,
                       const detail::GcnSideTape& t, Matrix& dh, Matrix& dw, Matrix& dgamma,
                       Matrix& dbeta) {
  const Matrix ds = detail::layer_norm_backward(dh, gamma, t.ln, dgamma, dbeta);
  const Matrix dp = adj_c.transpose() * relu_mask(t.pre, ds);
  dw.noalias() += t.h_in.transpose() * dp;
  dh = ds + dp * w.transpose();
}

}  // namespace

void NetworkDims::validate() const {
  if (d_in < 1 || d < 1) throw std::invalid_argument("network widths must be positive");
  if (gcn_layers < 0 || attention_blocks < 0 || sinkhorn_iters < 0) {
    throw std::invalid_argument("layer counts must be nonnegative");
  }
  if (heads < 1 || d % heads != 0) {
    throw std::invalid_argument("embedding width must be divisible by the head count");
  }
  if (!(clip > 0.0) || !std::isfinite(clip)) throw std::invalid_argument("clip must be positive");
}

NetworkParams zero_params(const NetworkDims& dims) {
  dims.validate();
  NetworkParams p;
  p.dims = dims;
  const int d = dims.d;
  p.tensors.add("h_ini", Matrix::Zero(1, dims.d_in));
  p.tensors.add("W_proj", Matrix::Zero(dims.d_in, d));
  for (int l = 0; l < dims.gcn_layers; ++l) {
    const std::string pre = "gcn" + std::to_string(l) + ".";
    p.tensors.add(pre + "W_D", Matrix::Zero(d, d));
    p.tensors.add(pre + "W_F", Matrix::Zero(d, d));
    p.tensors.add(pre + "ln_gamma", Matrix::Zero(1, d));
    p.tensors.add(pre + "ln_beta", Matrix::Zero(1, d));
  }
  for (int r = 0; r < dims.attention_blocks; ++r) {
    const std::string pre = "att" + std::to_string(r) + ".";
    for (const char* nm : {"W_Dq", "W_Dk", "W_Fq", "W_Fk", "W_o", "mlp_W1"})
      p.tensors.add(pre + nm, Matrix::Zero(d, d));
    p.tensors.add(pre + "mlp_b1", Matrix::Zero(1, d));
    p.tensors.add(pre + "mlp_W2", Matrix::Zero(d, d));
    p.tensors.add(pre + "mlp_b2", Matrix::Zero(1, d));
    p.tensors.add(pre + "ln_gamma", Matrix::Zero(1, d));
    p.tensors.add(pre + "ln_beta", Matrix::Zero(1, d));
  }
  return p;
}

NetworkParams init_params(const NetworkDims& dims, std::uint64_t seed) {
  NetworkParams p = zero_params(dims);
  const Rng base(seed, Rng::tag("network/init"));
  for (std::size_t i = 0; i < p.tensors.size(); ++i) {
    const std::string& nm = p.tensors.name(i);
    Matrix& t = p.tensors[i];
    if (nm.ends_with("ln_gamma")) {
      t.setOnes();
      continue;
    }
    if (nm.ends_with("ln_beta")) continue;
    double bound = 1.0;
    if (nm == "h_ini") {
      bound = 1.0;
    } else if (t.rows() == 1) {
      bound = 1.0 / std::sqrt(static_cast<double>(dims.d));  // biases
    } else {
      bound = 1.0 / std::sqrt(static_cast<double>(t.rows()));
    }
    Rng rng = base.split(i);
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = (2.0 * rng.uniform() - 1.0) * bound;
  }
  return p;
}

namespace detail {

Matrix layer_norm(const Matrix& x, const Matrix& gamma, const Matrix& beta, LayerNormCache& c) {
  const Vector mu = x.rowwise().mean();
  Matrix xc = x.colwise() - mu;
  const Vector var = xc.array().square().rowwise().mean();
  c.inv_std = (var.array() + kLayerNormEps).rsqrt();
  c.xhat = xc.array().colwise() * c.inv_std.array();
  return ((c.xhat.array().rowwise() * gamma.row(0).array()).rowwise() + beta.row(0).array())
      .matrix();
}

Matrix layer_norm_backward(const Matrix& dy, const Matrix& gamma, const LayerNormCache& c,
                           Matrix& dgamma, Matrix& dbeta) {
  dgamma += (dy.array() * c.xhat.array()).colwise().sum().matrix();
  dbeta += dy.colwise().sum();
  const Matrix dxhat = dy.array().rowwise() * gamma.row(0).array();
  const Vector m1 = dxhat.rowwise().mean();
  const Vector m2 = (dxhat.array() * c.xhat.array()).rowwise().mean();
  Matrix dx = dxhat.array() - c.xhat.array().colwise() * m2.array();
  dx = dx.colwise() - m1;
  return dx.array().colwise() * c.inv_std.array();
}

void gcn_forward(const TensorSet& p, std::size_t base, const Matrix& dist_c, const Matrix& flow_c,
                 Matrix& hd, Matrix& hf, GcnTape& tape) {
  gcn_side_forward(dist_c, p[base], p[base + 2], p[base + 3], hd, tape.dist_side);
  gcn_side_forward(flow_c, p[base + 1], p[base + 2], p[base + 3], hf, tape.flow_side);
}

void gcn_backward(const TensorSet& p, std::size_t base, const Matrix& dist_c,
                  const Matrix& flow_c, const GcnTape& tape, Matrix& dhd, Matrix& dhf,
                  TensorSet& g) {
  gcn_side_backward(dist_c, p[base], p[base + 2], tape.dist_side, dhd, g[base], g[base + 2],
                    g[base + 3]);
  gcn_side_backward(flow_c, p[base + 1], p[base + 2], tape.flow_side, dhf, g[base + 1],
                    g[base + 2], g[base + 3]);
}

void attention_forward(const TensorSet& p, std::size_t base, int heads, Matrix& hd, Matrix& hf,
                       AttentionTape& tape) {
  tape.hd_in = hd;
  tape.hf_in = hf;
  hd = attention_side_forward(p, base, heads, kDistSide, tape.hd_in, tape.hf_in, tape.dist_side);
  hf = attention_side_forward(p, base, heads, kFlowSide, tape.hf_in, tape.hd_in, tape.flow_side);
}

void attention_backward(const TensorSet& p, std::size_t base, int heads,
                        const AttentionTape& tape, Matrix& dhd, Matrix& dhf, TensorSet& g) {
  Matrix d_hd_in = Matrix::Zero(tape.hd_in.rows(), tape.hd_in.cols());
  Matrix d_hf_in = Matrix::Zero(tape.hf_in.rows(), tape.hf_in.cols());
  attention_side_backward(p, base, heads, kDistSide, tape.hd_in, tape.hf_in, tape.dist_side, dhd,
                          d_hd_in, d_hf_in, g);
  attention_side_backward(p, base, heads, kFlowSide, tape.hf_in, tape.hd_in, tape.flow_side, dhf,
                          d_hf_in, d_hd_in, g);
  dhd = std::move(d_hd_in);
  dhf = std::move(d_hf_in);
}

Matrix head_forward(const Matrix& hd, const Matrix& hf, double clip, int sinkhorn_iters,
                    HeadTape& tape) {
  tape.hd = hd;
  tape.hf = hf;
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(hd.cols()));
  tape.tanh_out = ((hf * hd.transpose()) * inv_sqrt_d).array().tanh();
  return log_sinkhorn(clip * tape.tanh_out, sinkhorn_iters, tape.sinkhorn_out);
}

void head_backward(const HeadTape& tape, double clip, const Matrix& grad_phi, Matrix& dhd,
                   Matrix& dhf) {
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(tape.hd.cols()));
  const Matrix dz = log_sinkhorn_backward(tape.sinkhorn_out, grad_phi);
  const Matrix ds =
      (clip * inv_sqrt_d) * (1.0 - tape.tanh_out.array().square()) * dz.array();
  dhf = ds * tape.hd;
  dhd = ds.transpose() * tape.hf;
}

}  // namespace detail

Heatmap forward(const NetworkParams& params, const QapInstance& inst, ForwardTape& tape) {
  const NetworkDims& dims = params.dims;
  if (params.tensors.size() != 2 + NetworkParams::kGcnTensors * dims.gcn_layers +
                                   NetworkParams::kAttTensors * dims.attention_blocks) {
    throw std::invalid_argument("parameter set does not match network dims");
  }
  const int n = inst.n;
  tape.dims = dims;
  tape.n = n;
  tape.dist_c = normalised_centred(inst.dist);
  tape.flow_c = normalised_centred(inst.flow);

  const TensorSet& p = params.tensors;
  const Matrix h0 = p[0] * p[1];
  Matrix hd = h0.replicate(n, 1);
  Matrix hf = hd;

  tape.gcn.resize(dims.gcn_layers);
  for (int l = 0; l < dims.gcn_layers; ++l) {
    detail::gcn_forward(p, params.gcn_base(l), tape.dist_c, tape.flow_c, hd, hf, tape.gcn[l]);
    check_finite(hd, "gcn layer", l);
    check_finite(hf, "gcn layer", l);
  }
  tape.attention.resize(dims.attention_blocks);
  for (int r = 0; r < dims.attention_blocks; ++r) {
    detail::attention_forward(p, params.att_base(r), dims.heads, hd, hf, tape.attention[r]);
    check_finite(hd, "attention block", r);
    check_finite(hf, "attention block", r);
  }
  tape.phi = detail::head_forward(hd, hf, dims.clip, dims.sinkhorn_iters, tape.head);
  check_finite(tape.phi, "head", 0);
  return Heatmap(tape.phi);
}

Heatmap forward(const NetworkParams& params, const QapInstance& inst) {
  ForwardTape tape;
  return forward(params, inst, tape);
}

void backward_into(const ForwardTape& tape, const NetworkParams& params, const Matrix& grad_phi,
                   TensorSet& g) {
  if (!(tape.dims == params.dims) || tape.gcn.size() != static_cast<std::size_t>(params.dims.gcn_layers) ||
      tape.attention.size() != static_cast<std::size_t>(params.dims.attention_blocks)) {
    throw std::invalid_argument("tape was not produced with these parameters");
  }
  if (!g.same_layout(params.tensors)) throw std::invalid_argument("gradient layout mismatch");
  if (grad_phi.rows() != tape.n || grad_phi.cols() != tape.n) {
    throw std::invalid_argument("heatmap gradient has the wrong shape");
  }
  const TensorSet& p = params.tensors;
  Matrix dhd, dhf;
  detail::head_backward(tape.head, params.dims.clip, grad_phi, dhd, dhf);
  for (int r = params.dims.attention_blocks - 1; r >= 0; --r) {
    detail::attention_backward(p, params.att_base(r), params.dims.heads, tape.attention[r], dhd,
                               dhf, g);
  }
  for (int l = params.dims.gcn_layers - 1; l >= 0; --l) {
    detail::gcn_backward(p, params.gcn_base(l), tape.dist_c, tape.flow_c, tape.gcn[l], dhd, dhf,
                         g);
  }
  const Matrix dh0 = dhd.colwise().sum() + dhf.colwise().sum();
  g[1].noalias() += p[0].transpose() * dh0;
  g[0].noalias() += dh0 * p[1].transpose();
}

TensorSet backward(const ForwardTape& tape, const NetworkParams& params, const Matrix& grad_phi) {
  TensorSet g = params.tensors.zeros_like();
  backward_into(tape, params, grad_phi, g);
  return g;
}

Matrix log_sinkhorn(const Matrix& logits, int iters, std::vector<Matrix>& passes) {
  if (iters < 0) throw std::invalid_argument("sinkhorn iterations must be nonnegative");
  passes.clear();
  Matrix x = logits;
  for (int it = 0; it < iters; ++it) {
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double top = x.row(i).maxCoeff();
      const double lse = top + std::log((x.row(i).array() - top).exp().sum());
      x.row(i).array() -= lse;
    }
    passes.push_back(x);
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double top = x.col(j).maxCoeff();
      const double lse = top + std::log((x.col(j).array() - top).exp().sum());
      x.col(j).array() -= lse;
    }
    passes.push_back(x);
  }
  return x;
}

Matrix log_sinkhorn(const Matrix& logits, int iters) {
  std::vector<Matrix> passes;
  return log_sinkhorn(logits, iters, passes);
}

Matrix log_sinkhorn_backward(const std::vector<Matrix>& passes, const Matrix& grad_out) {
  Matrix g = grad_out;
  for (std::size_t k = passes.size(); k-- > 0;) {
    const Matrix prob = passes[k].array().exp();
    if (k % 2 == 0) {
      const Vector rs = g.rowwise().sum();
      g -= (prob.array().colwise() * rs.array()).matrix();
    } else {
      const Eigen::RowVectorXd cs = g.colwise().sum();
      g -= (prob.array().rowwise() * cs.array()).matrix();
    }
  }
  return g;
}

Heatmap direct_heatmap(const Matrix& theta, double clip, int iters) {
  if (!theta.allFinite()) throw std::invalid_argument("theta has non-finite entries");
  return Heatmap(log_sinkhorn(clip * theta, iters));
}

Matrix direct_heatmap_backward(const Matrix& theta, double clip, int iters,
                               const Matrix& grad_phi) {
  std::vector<Matrix> passes;
  log_sinkhorn(clip * theta, iters, passes);
  return clip * log_sinkhorn_backward(passes, grad_phi);
}

// Checkpoint layout (little-endian):
//   "PLMACKPT" | u32 version | i32 d_in, d, gcn_layers, attention_blocks, heads,
//   sinkhorn_iters | f64 clip | u32 tensor count |
//   per tensor: u32 name length, name bytes, u32 rows, u32 cols, f64[rows*cols] row-major |
//   u64 FNV-1a of every preceding byte.
namespace {

constexpr char kMagic[8] = {'P', 'L', 'M', 'A', 'C', 'K', 'P', 'T'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <class T>
void put(std::string& out, T v) {
  char buf[sizeof(T)];
  std::memcpy(buf, &v, sizeof(T));
  out.append(buf, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view s) : s_(s) {}
  template <class T>
  T get() {
    if (pos_ + sizeof(T) > s_.size()) throw std::runtime_error("checkpoint truncated");
    T v;
    std::memcpy(&v, s_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string_view bytes(std::size_t k) {
    if (pos_ + k > s_.size()) throw std::runtime_error("checkpoint truncated");
    auto v = s_.substr(pos_, k);
    pos_ += k;
    return v;
  }
  std::size_t pos() const { return pos_; }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

std::string encode_checkpoint(const NetworkParams& params) {
  std::string out(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kVersion);
  const NetworkDims& d = params.dims;
  for (int v : {d.d_in, d.d, d.gcn_layers, d.attention_blocks, d.heads, d.sinkhorn_iters})
    put<std::int32_t>(out, v);
  put<double>(out, d.clip);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(params.tensors.size()));
  for (std::size_t i = 0; i < params.tensors.size(); ++i) {
    const std::string& nm = params.tensors.name(i);
    const Matrix& t = params.tensors[i];
    put<std::uint32_t>(out, static_cast<std::uint32_t>(nm.size()));
    out += nm;
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.rows()));
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.cols()));
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) put<double>(out, t(r, c));
  }
  put<std::uint64_t>(out, fnv1a(out));
  return out;
}

NetworkParams decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kMagic) + 8 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a checkpoint file");
  }
  const std::string_view body(bytes.data(), bytes.size() - 8);
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + bytes.size() - 8, 8);
  if (stored != fnv1a(body)) throw std::runtime_error("checkpoint checksum mismatch");

  Reader rd(body);
  rd.bytes(sizeof(kMagic));
  const auto version = rd.get<std::uint32_t>();
  if (version != kVersion) {
    throw std::runtime_error("unsupported checkpoint version " + std::to_string(version));
  }
  NetworkDims dims;
  dims.d_in = rd.get<std::int32_t>();
  dims.d = rd.get<std::int32_t>();
  dims.gcn_layers = rd.get<std::int32_t>();
  dims.attention_blocks = rd.get<std::int32_t>();
  dims.heads = rd.get<std::int32_t>();
  dims.sinkhorn_iters = rd.get<std::int32_t>();
  dims.clip = rd.get<double>();
  NetworkParams p = zero_params(dims);
  const auto count = rd.get<std::uint32_t>();
  if (count != p.tensors.size()) throw std::runtime_error("checkpoint tensor count mismatch");
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto len = rd.get<std::uint32_t>();
    const std::string nm(rd.bytes(len));
    const auto rows = rd.get<std::uint32_t>();
    const auto cols = rd.get<std::uint32_t>();
    Matrix& t = p.tensors[i];
    if (nm != p.tensors.name(i) || rows != t.rows() || cols != t.cols()) {
      throw std::runtime_error("checkpoint tensor '" + nm + "' does not match the layout");
    }
    for (Eigen::Index r = 0; r < t.rows(); ++r)
      for (Eigen::Index c = 0; c < t.cols(); ++c) t(r, c) = rd.get<double>();
  }
  if (rd.pos() != body.size()) throw std::runtime_error("trailing bytes in checkpoint");
  return p;
}

void save_checkpoint(const std::string& path, const NetworkParams& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  const std::string bytes = encode_checkpoint(params);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

NetworkParams load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_checkpoint(ss.str());
}

}  // namespace plma
