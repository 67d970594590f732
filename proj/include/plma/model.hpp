#pragma once

#include <memory>

#include "plma/network.hpp"

namespace plma {

// Everything a model needs to back-propagate from its heatmap.
struct ModelTape {
  virtual ~ModelTape() = default;
  Heatmap heatmap;
};

// A learnable map from an instance to a heatmap. The training loops only see
// this interface, so the network, the direct n x n parameterisation and a
// frozen heatmap all run through the same finetuning code.
class HeatmapModel {
 public:
  virtual ~HeatmapModel() = default;

  virtual std::unique_ptr<ModelTape> forward(const QapInstance& inst) const = 0;
  // grads += d<grad_phi, phi>/dtheta
  virtual void backward(const ModelTape& tape, const Matrix& grad_phi, TensorSet& grads) const = 0;

  virtual TensorSet& params() = 0;
  virtual const TensorSet& params() const = 0;
};

class NetworkModel final : public HeatmapModel {
 public:
  explicit NetworkModel(NetworkParams p) : params_(std::move(p)) {}

  std::unique_ptr<ModelTape> forward(const QapInstance& inst) const override;
  void backward(const ModelTape& tape, const Matrix& grad_phi, TensorSet& grads) const override;

  TensorSet& params() override { return params_.tensors; }
  const TensorSet& params() const override { return params_.tensors; }
  const NetworkParams& network() const { return params_; }

 private:
  NetworkParams params_;
};

// phi = log_sinkhorn(clip * theta); theta starts at zero (uniform heatmap).
class DirectModel final : public HeatmapModel {
 public:
  DirectModel(int n, double clip, int sinkhorn_iters);

  std::unique_ptr<ModelTape> forward(const QapInstance& inst) const override;
  void backward(const ModelTape& tape, const Matrix& grad_phi, TensorSet& grads) const override;

  TensorSet& params() override { return theta_; }
  const TensorSet& params() const override { return theta_; }
  const Matrix& theta() const { return theta_[0]; }
  double clip() const { return clip_; }
  int sinkhorn_iters() const { return iters_; }

 private:
  TensorSet theta_;
  double clip_;
  int iters_;
};

// A frozen heatmap with no parameters.
class FixedModel final : public HeatmapModel {
 public:
  explicit FixedModel(Heatmap h) : heatmap_(std::move(h)) {}

  std::unique_ptr<ModelTape> forward(const QapInstance& inst) const override;
  void backward(const ModelTape&, const Matrix&, TensorSet&) const override {}

  TensorSet& params() override { return empty_; }
  const TensorSet& params() const override { return empty_; }

 private:
  Heatmap heatmap_;
  TensorSet empty_;
};

}  // namespace plma
