#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "synthattr/nn/tensor.hpp"

namespace synthattr::nn {

enum class OptimizerKind { adam, sgd_momentum };

enum class Precision { float32, float64 };

struct TrainConfig {
  int batch_size = 128;
  int epochs = 200;
  double lr0 = 1e-3;
  double gamma = 0.95;  // exponential decay per epoch, in (0, 1]
  std::uint64_t seed = 0;
  OptimizerKind optimizer = OptimizerKind::adam;
  Precision precision = Precision::float32;

  void validate() const {
    if (batch_size < 1) throw ConfigInvalid("batch_size must be >= 1");
    if (epochs < 1) throw ConfigInvalid("epochs must be >= 1");
    if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigInvalid("gamma must be in (0, 1]");
    if (!(lr0 > 0.0)) throw ConfigInvalid("lr0 must be positive");
  }
};

// Exponential schedule: lr(epoch) = lr0 * gamma^epoch.
inline double lr_at(double lr0, double gamma, int epoch) {
  return lr0 * std::pow(gamma, static_cast<double>(epoch));
}

inline double lr_at(const TrainConfig& cfg, int epoch) {
  return lr_at(cfg.lr0, cfg.gamma, epoch);
}

// Adam (beta1 0.9, beta2 0.999, eps 1e-8) or SGD with momentum 0.9 over a
// fixed parameter list. Any non-finite gradient aborts the step before any
// parameter is touched.
template <class T>
class Optimizer {
 public:
  Optimizer(std::vector<Param<T>*> params, OptimizerKind kind)
      : params_(std::move(params)), kind_(kind) {
    state1_.resize(params_.size());
    state2_.resize(params_.size());
    for (std::size_t i = 0; i < params_.size(); ++i) {
      params_[i]->value.require_grad();
      state1_[i].assign(params_[i]->value.values.size(), T(0));
      if (kind_ == OptimizerKind::adam)
        state2_[i].assign(params_[i]->value.values.size(), T(0));
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->value.zero_grad();
  }

  void step(double lr) {
    for (const auto* p : params_)
      for (const T g : *p->value.grad)
        if (!std::isfinite(static_cast<double>(g)))
          throw NonFiniteGradient("non-finite gradient in " + p->name);
    ++t_;
    if (kind_ == OptimizerKind::adam) {
      const double bc1 = 1.0 - std::pow(0.9, static_cast<double>(t_));
      const double bc2 = 1.0 - std::pow(0.999, static_cast<double>(t_));
      for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& value = params_[i]->value.values;
        const auto& grad = *params_[i]->value.grad;
        auto& m = state1_[i];
        auto& v = state2_[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
          const double g = grad[j];
          m[j] = static_cast<T>(0.9 * m[j] + 0.1 * g);
          v[j] = static_cast<T>(0.999 * v[j] + 0.001 * g * g);
          const double mhat = m[j] / bc1;
          const double vhat = v[j] / bc2;
          value[j] -= static_cast<T>(lr * mhat / (std::sqrt(vhat) + 1e-8));
        }
      }
    } else {
      for (std::size_t i = 0; i < params_.size(); ++i) {
        auto& value = params_[i]->value.values;
        const auto& grad = *params_[i]->value.grad;
        auto& vel = state1_[i];
        for (std::size_t j = 0; j < value.size(); ++j) {
          vel[j] = static_cast<T>(0.9 * vel[j] + grad[j]);
          value[j] -= static_cast<T>(lr * vel[j]);
        }
      }
    }
  }

  // Plain (momentum-free) SGD step, used by descent sanity checks.
  void sgd_plain_step(double lr) {
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& value = params_[i]->value.values;
      const auto& grad = *params_[i]->value.grad;
      for (std::size_t j = 0; j < value.size(); ++j)
        value[j] -= static_cast<T>(lr * grad[j]);
    }
  }

 private:
  std::vector<Param<T>*> params_;
  OptimizerKind kind_;
  std::int64_t t_ = 0;
  std::vector<std::vector<T>> state1_, state2_;
};

}  // namespace synthattr::nn
