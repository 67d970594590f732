#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "plma/network.hpp"

using namespace plma;

namespace {

NetworkDims small_dims() {
  NetworkDims d;
  d.d_in = 4;
  d.d = 16;
  d.gcn_layers = 2;
  d.attention_blocks = 1;
  d.heads = 4;
  return d;
}

Matrix random_matrix(int r, int c, Rng& rng, double scale = 1.0) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = scale * (2 * rng.uniform() - 1);
  return m;
}

// Layer-norm scale and offset away from their initial 1/0 so their gradients are exercised.
void perturb_norms(TensorSet& t, Rng& rng) {
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (t.name(i).ends_with("ln_gamma") || t.name(i).ends_with("ln_beta")) {
      t[i].array() += random_matrix(1, static_cast<int>(t[i].cols()), rng, 0.3).array();
    }
  }
}

double inner(const Matrix& a, const Matrix& b) { return (a.array() * b.array()).sum(); }

double central(const std::function<double()>& f, double& x, double h = 1e-4) {
  const double x0 = x;
  x = x0 + h;
  const double fp = f();
  x = x0 - h;
  const double fm = f();
  x = x0;
  return (fp - fm) / (2 * h);
}

void expect_close(double analytic, double numeric, const std::string& what) {
  const double scale = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  EXPECT_LE(std::abs(analytic - numeric) / scale, 1e-4)
      << what << ": analytic " << analytic << " numeric " << numeric;
}

// Checks every entry of `x` (up to `limit` of them) against central differences.
void check_entries(Matrix& x, const Matrix& analytic, const std::function<double()>& loss,
                   const std::string& what, int limit = 1 << 30) {
  int checked = 0;
  for (Eigen::Index i = 0; i < x.rows() && checked < limit; ++i)
    for (Eigen::Index j = 0; j < x.cols() && checked < limit; ++j, ++checked)
      expect_close(analytic(i, j), central(loss, x(i, j)), what);
}

QapInstance random_instance(int n, Rng& rng) {
  Matrix f(n, n), d(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      f(i, j) = std::floor(10 * rng.uniform());
      d(i, j) = std::floor(10 * rng.uniform());
    }
  return QapInstance(f, d);
}

}  // namespace

TEST(NetworkDims, Validation) {
  NetworkDims d;
  EXPECT_NO_THROW(d.validate());
  d.heads = 7;
  EXPECT_THROW(d.validate(), std::invalid_argument);
}

TEST(InitParams, DeterministicAndShaped) {
  const NetworkDims dims = small_dims();
  const NetworkParams a = init_params(dims, 3), b = init_params(dims, 3);
  EXPECT_TRUE(a.tensors == b.tensors);
  EXPECT_FALSE(a.tensors == init_params(dims, 4).tensors);
  EXPECT_EQ(a.tensors.size(), 2 + 4 * dims.gcn_layers + 11 * dims.attention_blocks);
  EXPECT_EQ(a.tensors.at("h_ini").cols(), dims.d_in);
  EXPECT_EQ(a.tensors.at("W_proj").rows(), dims.d_in);
  EXPECT_EQ(a.tensors.at("gcn1.W_F").rows(), dims.d);
  const double bound = 1.0 / std::sqrt(dims.d);
  EXPECT_LE(a.tensors.at("att0.W_Dq").cwiseAbs().maxCoeff(), bound);
  EXPECT_EQ(a.tensors.at("gcn0.ln_gamma"), Matrix::Ones(1, dims.d));
}

TEST(Forward, DefaultDimsFinite) {
  Rng rng(1);
  const Heatmap h = forward(init_params(NetworkDims{}, 1), random_instance(6, rng));
  EXPECT_TRUE(h.phi.allFinite());
  EXPECT_EQ(h.n(), 6);
}

TEST(Forward, ZeroWeightsGiveUniformHeatmap) {
  Rng rng(2);
  const Heatmap h = forward(zero_params(small_dims()), random_instance(2, rng));
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) EXPECT_NEAR(h.phi(i, j), -std::log(2.0), 1e-15);
}

TEST(Forward, ColumnsStochasticAndLogitsBounded) {
  Rng rng(3);
  const NetworkParams p = init_params(small_dims(), 3);
  ForwardTape tape;
  const Heatmap h = forward(p, random_instance(7, rng), tape);
  const Eigen::RowVectorXd cols = h.phi.array().exp().colwise().sum();
  for (int j = 0; j < 7; ++j) EXPECT_NEAR(cols(j), 1.0, 1e-12);
  EXPECT_LE(tape.head.tanh_out.cwiseAbs().maxCoeff(), 1.0);
}

TEST(Forward, Deterministic) {
  Rng rng(4);
  const QapInstance inst = random_instance(8, rng);
  const NetworkParams p = init_params(small_dims(), 4);
  EXPECT_EQ(forward(p, inst).phi, forward(p, inst).phi);
}

TEST(Forward, ConstantShiftOfInputsIsInvisible) {
  Rng rng(5);
  const QapInstance inst = random_instance(4, rng);
  const QapInstance shifted(Matrix(inst.flow.array() + 3.0), Matrix(inst.dist.array() + 12.0));
  const NetworkParams p = init_params(small_dims(), 5);
  EXPECT_EQ(forward(p, inst).phi, forward(p, shifted).phi);
}

TEST(Forward, RelabelingEquivariance) {
  Rng rng(6);
  const int n = 7;
  const QapInstance inst = random_instance(n, rng);
  const Matrix pf = Permutation::random(n, rng).matrix();
  const Matrix qd = Permutation::random(n, rng).matrix();
  const QapInstance relabeled(pf * inst.flow * pf.transpose(), qd * inst.dist * qd.transpose());
  const NetworkParams p = init_params(small_dims(), 6);
  const Matrix expected = pf * forward(p, inst).phi * qd.transpose();
  EXPECT_LE((forward(p, relabeled).phi - expected).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Forward, RejectsMismatchedParams) {
  NetworkParams p = init_params(small_dims(), 1);
  p.dims.gcn_layers = 3;
  Rng rng(7);
  EXPECT_THROW(forward(p, random_instance(3, rng)), std::invalid_argument);
}

TEST(LogSinkhorn, Examples) {
  EXPECT_EQ(log_sinkhorn(Matrix::Constant(3, 3, 2.5), 0), Matrix::Constant(3, 3, 2.5));
  const Matrix c = log_sinkhorn(Matrix::Constant(4, 4, 1.7), 1);
  EXPECT_LE((c.array() + std::log(4.0)).abs().maxCoeff(), 1e-15);
  Rng rng(8);
  const Matrix y = log_sinkhorn(random_matrix(5, 5, rng, 3.0), 50).array().exp();
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(y.row(i).sum(), 1.0, 1e-9);
    EXPECT_NEAR(y.col(i).sum(), 1.0, 1e-9);
  }
}

TEST(LogSinkhorn, BackwardMatchesFiniteDifferences) {
  Rng rng(9);
  Matrix x = random_matrix(5, 5, rng, 2.0);
  const Matrix g = random_matrix(5, 5, rng);
  std::vector<Matrix> passes;
  log_sinkhorn(x, 3, passes);
  const Matrix analytic = log_sinkhorn_backward(passes, g);
  check_entries(x, analytic, [&] { return inner(g, log_sinkhorn(x, 3)); }, "sinkhorn");
}

TEST(DirectHeatmap, Examples) {
  const Heatmap u = direct_heatmap(Matrix::Zero(5, 5), 10.0, 1);
  EXPECT_LE((u.phi.array() + std::log(5.0)).abs().maxCoeff(), 1e-15);
  Rng rng(10);
  const Matrix theta = random_matrix(4, 4, rng);
  EXPECT_EQ(direct_heatmap(theta, 10.0, 2).phi, direct_heatmap(theta / 2, 20.0, 2).phi);
}

TEST(DirectHeatmap, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  Matrix theta = random_matrix(4, 4, rng);
  const Matrix g = random_matrix(4, 4, rng);
  const Matrix analytic = direct_heatmap_backward(theta, 3.0, 2, g);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      const double num =
          central([&] { return inner(g, direct_heatmap(theta, 3.0, 2).phi); }, theta(i, j));
      const double scale = std::max({std::abs(analytic(i, j)), std::abs(num), 1e-8});
      EXPECT_LE(std::abs(analytic(i, j) - num) / scale, 1e-5);
    }
}

TEST(LayerNormBlock, GradientCheck) {
  Rng rng(12);
  Matrix x = random_matrix(5, 8, rng, 2.0);
  Matrix gamma = random_matrix(1, 8, rng), beta = random_matrix(1, 8, rng);
  const Matrix g = random_matrix(5, 8, rng);
  detail::LayerNormCache cache;
  detail::layer_norm(x, gamma, beta, cache);
  Matrix dgamma = Matrix::Zero(1, 8), dbeta = Matrix::Zero(1, 8);
  const Matrix dx = detail::layer_norm_backward(g, gamma, cache, dgamma, dbeta);
  auto loss = [&] {
    detail::LayerNormCache c;
    return inner(g, detail::layer_norm(x, gamma, beta, c));
  };
  check_entries(x, dx, loss, "ln x");
  check_entries(gamma, dgamma, loss, "ln gamma");
  check_entries(beta, dbeta, loss, "ln beta");
}

TEST(GcnBlock, GradientCheck) {
  Rng rng(13);
  const NetworkDims dims = small_dims();
  NetworkParams p = init_params(dims, 13);
  perturb_norms(p.tensors, rng);
  const int n = 5;
  Matrix hd = random_matrix(n, dims.d, rng), hf = random_matrix(n, dims.d, rng);
  const Matrix dc = random_matrix(n, n, rng), fc = random_matrix(n, n, rng);
  const Matrix gd = random_matrix(n, dims.d, rng), gf = random_matrix(n, dims.d, rng);
  const std::size_t base = p.gcn_base(0);

  auto loss = [&] {
    Matrix a = hd, b = hf;
    detail::GcnTape t;
    detail::gcn_forward(p.tensors, base, dc, fc, a, b, t);
    return inner(gd, a) + inner(gf, b);
  };
  Matrix a = hd, b = hf;
  detail::GcnTape tape;
  detail::gcn_forward(p.tensors, base, dc, fc, a, b, tape);
  TensorSet grads = p.tensors.zeros_like();
  Matrix dhd = gd, dhf = gf;
  detail::gcn_backward(p.tensors, base, dc, fc, tape, dhd, dhf, grads);

  check_entries(hd, dhd, loss, "gcn hd", 40);
  check_entries(hf, dhf, loss, "gcn hf", 40);
  for (std::size_t k = base; k < base + 4; ++k)
    check_entries(p.tensors[k], grads[k], loss, p.tensors.name(k), 40);
}

TEST(AttentionBlock, GradientCheck) {
  Rng rng(14);
  const NetworkDims dims = small_dims();
  NetworkParams p = init_params(dims, 14);
  perturb_norms(p.tensors, rng);
  const int n = 5;
  Matrix hd = random_matrix(n, dims.d, rng), hf = random_matrix(n, dims.d, rng);
  const Matrix gd = random_matrix(n, dims.d, rng), gf = random_matrix(n, dims.d, rng);
  const std::size_t base = p.att_base(0);

  auto loss = [&] {
    Matrix a = hd, b = hf;
    detail::AttentionTape t;
    detail::attention_forward(p.tensors, base, dims.heads, a, b, t);
    return inner(gd, a) + inner(gf, b);
  };
  Matrix a = hd, b = hf;
  detail::AttentionTape tape;
  detail::attention_forward(p.tensors, base, dims.heads, a, b, tape);
  TensorSet grads = p.tensors.zeros_like();
  Matrix dhd = gd, dhf = gf;
  detail::attention_backward(p.tensors, base, dims.heads, tape, dhd, dhf, grads);

  check_entries(hd, dhd, loss, "att hd", 40);
  check_entries(hf, dhf, loss, "att hf", 40);
  for (std::size_t k = base; k < base + NetworkParams::kAttTensors; ++k)
    check_entries(p.tensors[k], grads[k], loss, p.tensors.name(k), 40);
}

TEST(HeadBlock, GradientCheck) {
  Rng rng(15);
  const int n = 5, d = 16;
  Matrix hd = random_matrix(n, d, rng), hf = random_matrix(n, d, rng);
  const Matrix g = random_matrix(n, n, rng);
  auto loss = [&] {
    detail::HeadTape t;
    return inner(g, detail::head_forward(hd, hf, 10.0, 2, t));
  };
  detail::HeadTape tape;
  detail::head_forward(hd, hf, 10.0, 2, tape);
  Matrix dhd, dhf;
  detail::head_backward(tape, 10.0, g, dhd, dhf);
  check_entries(hd, dhd, loss, "head hd");
  check_entries(hf, dhf, loss, "head hf");
}

TEST(Backward, EndToEndGradientCheck) {
  Rng rng(16);
  const NetworkDims dims = small_dims();
  NetworkParams p = init_params(dims, 16);
  perturb_norms(p.tensors, rng);
  const QapInstance inst = random_instance(6, rng);
  const Matrix g = random_matrix(6, 6, rng);
  ForwardTape tape;
  forward(p, inst, tape);
  const TensorSet grads = backward(tape, p, g);
  auto loss = [&] { return inner(g, forward(p, inst).phi); };
  for (int t = 0; t < 100; ++t) {
    const std::size_t k = rng.below(p.tensors.size());
    Matrix& m = p.tensors[k];
    const Eigen::Index r = static_cast<Eigen::Index>(rng.below(m.rows()));
    const Eigen::Index c = static_cast<Eigen::Index>(rng.below(m.cols()));
    expect_close(grads[k](r, c), central(loss, m(r, c)), p.tensors.name(k));
  }
}

TEST(Backward, Linearity) {
  Rng rng(17);
  const NetworkParams p = init_params(small_dims(), 17);
  const QapInstance inst = random_instance(5, rng);
  ForwardTape tape;
  forward(p, inst, tape);
  const TensorSet zero = backward(tape, p, Matrix::Zero(5, 5));
  for (std::size_t k = 0; k < zero.size(); ++k) EXPECT_EQ(zero[k].cwiseAbs().maxCoeff(), 0.0);
  const Matrix g = random_matrix(5, 5, rng);
  const TensorSet g1 = backward(tape, p, g);
  const TensorSet g3 = backward(tape, p, 3.0 * g);
  for (std::size_t k = 0; k < g1.size(); ++k) {
    const double scale = std::max(g1[k].cwiseAbs().maxCoeff(), 1e-300);
    EXPECT_LE((g3[k] - 3.0 * g1[k]).cwiseAbs().maxCoeff() / scale, 1e-12) << g1.name(k);
  }
}

TEST(Checkpoint, RoundTripAndCorruption) {
  const NetworkParams p = init_params(small_dims(), 18);
  const std::string bytes = encode_checkpoint(p);
  const NetworkParams q = decode_checkpoint(bytes);
  EXPECT_EQ(q.dims, p.dims);
  EXPECT_TRUE(q.tensors == p.tensors);
  std::string bad = bytes;
  bad[bad.size() / 2] ^= 0x01;
  EXPECT_THROW(decode_checkpoint(bad), std::runtime_error);
  EXPECT_THROW(decode_checkpoint(bytes.substr(0, bytes.size() - 3)), std::runtime_error);
  EXPECT_THROW(decode_checkpoint("not a checkpoint"), std::runtime_error);
}
