#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vinpaint/tensor.hpp"
#include "vinpaint/unet.hpp"

namespace vinpaint {

/// Adam with bias correction. Moments are kept per parameter block in the
/// order of the parameter list, which is stable for a given model.
template <typename Scalar>
class Adam {
 public:
  Adam() = default;
  explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  void step(std::vector<ParamRef<Scalar>>& params) {
    if (m_.empty()) {
      m_.resize(params.size());
      v_.resize(params.size());
      for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i].setZero(params[i].size);
        v_[i].setZero(params[i].size);
      }
    }
    if (m_.size() != params.size()) throw std::logic_error("Adam: parameter list changed");

    ++steps_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      ArrMap<Scalar> p(params[i].value, params[i].size);
      ConstArrMap<Scalar> g(params[i].grad, params[i].size);
      m_[i] = static_cast<Scalar>(beta1_) * m_[i] + static_cast<Scalar>(1.0 - beta1_) * g;
      v_[i] = static_cast<Scalar>(beta2_) * v_[i] + static_cast<Scalar>(1.0 - beta2_) * g.square();
      p -= static_cast<Scalar>(lr_ / bc1) * m_[i] /
           ((v_[i] / static_cast<Scalar>(bc2)).sqrt() + static_cast<Scalar>(eps_));
    }
  }

  long step_count() const { return steps_; }
  double learning_rate() const { return lr_; }

  std::vector<Arr<Scalar>>& first_moments() { return m_; }
  std::vector<Arr<Scalar>>& second_moments() { return v_; }
  const std::vector<Arr<Scalar>>& first_moments() const { return m_; }
  const std::vector<Arr<Scalar>>& second_moments() const { return v_; }
  void restore(std::vector<Arr<Scalar>> m, std::vector<Arr<Scalar>> v, long steps) {
    m_ = std::move(m);
    v_ = std::move(v);
    steps_ = steps;
  }

 private:
  double lr_ = 1e-4, beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  long steps_ = 0;
  std::vector<Arr<Scalar>> m_, v_;
};

}  // namespace vinpaint
