#include "plma/model.hpp"

#include <stdexcept>

namespace plma {

namespace {

struct NetworkTape final : ModelTape {
  ForwardTape tape;
};

}  // namespace

std::unique_ptr<ModelTape> NetworkModel::forward(const QapInstance& inst) const {
  auto t = std::make_unique<NetworkTape>();
  t->heatmap = plma::forward(params_, inst, t->tape);
  return t;
}

void NetworkModel::backward(const ModelTape& tape, const Matrix& grad_phi,
                            TensorSet& grads) const {
  const auto* t = dynamic_cast<const NetworkTape*>(&tape);
  if (!t) throw std::invalid_argument("tape was not produced by a network model");
  backward_into(t->tape, params_, grad_phi, grads);
}

DirectModel::DirectModel(int n, double clip, int sinkhorn_iters)
    : clip_(clip), iters_(sinkhorn_iters) {
  if (n < 1) throw std::invalid_argument("direct model needs n >= 1");
  if (!(clip > 0.0)) throw std::invalid_argument("clip must be positive");
  theta_.add("theta", Matrix::Zero(n, n));
}

std::unique_ptr<ModelTape> DirectModel::forward(const QapInstance& inst) const {
  if (inst.n != theta_[0].rows()) throw std::invalid_argument("direct model size mismatch");
  auto t = std::make_unique<ModelTape>();
  t->heatmap = direct_heatmap(theta_[0], clip_, iters_);
  return t;
}

void DirectModel::backward(const ModelTape&, const Matrix& grad_phi, TensorSet& grads) const {
  grads[0] += direct_heatmap_backward(theta_[0], clip_, iters_, grad_phi);
}

std::unique_ptr<ModelTape> FixedModel::forward(const QapInstance& inst) const {
  if (inst.n != heatmap_.n()) throw std::invalid_argument("fixed heatmap size mismatch");
  auto t = std::make_unique<ModelTape>();
  t->heatmap = heatmap_;
  return t;
}

}  // namespace plma
