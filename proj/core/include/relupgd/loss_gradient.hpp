#pragma once

#include "relupgd/planted_model.hpp"
#include "relupgd/vector.hpp"

namespace relupgd {

struct LossValue {
  double value = 0.0;
};

/// Gradient-shaped vector; same dimension as the weight vector it was evaluated at.
struct GradientVector {
  WeightVector entries;
};

/// L(w) = (1/n) sum_i (max(0, <w, x_i>) - y_i)^2.
LossValue loss(const WeightVector& w, const Dataset& data);

/// The generalized gradient exactly as stated for the ReLU loss:
///
///   (2/n) sum_i (max(0, <w, x_i>) - y_i) (1 + sgn <w, x_i>) x_i,   sgn(0) = 0.
///
/// Where no <w, x_i> vanishes this is twice the derivative of `loss`. The sum over i is
/// accumulated in index order and scaled by 2/n afterwards, so at w = 0 the result is bit-equal
/// to -(2/n) sum_i y_i x_i.
GradientVector generalized_gradient(const WeightVector& w, const Dataset& data);

/// Step direction used by the solver by default:
///
///   (1/n) sum_i (max(0, <w, x_i>) - y_i) (1 + sgn+ <w, x_i>) x_i,   sgn+(0) = +1,
///
/// which is the derivative of `loss` with ReLU'(0) taken as 1. It agrees with
/// `generalized_gradient` at w = 0, so the first step from zero is P_K((2/n) sum y_i x_i) under
/// either rule, and at every later iterate it is half of it. With unit step size this is the
/// scaling under which w - grad L(w) contracts towards w*.
GradientVector calibrated_gradient(const WeightVector& w, const Dataset& data);

/// Realizable-case rewriting of the loss through ReLU(z) = (z + |z|)/2:
///
///   (1/4n) sum (|<x,w>| - |<x,w*>|)^2 + (1/4n) sum <x, w - w*>^2
///     + (1/2n) sum (|<x,w>| - |<x,w*>|) <x, w - w*>.
///
/// Throws kNotRealizable unless the labels regenerate bit-exactly from w_star.
LossValue loss_decomposed(const WeightVector& w, const Dataset& data, const WeightVector& w_star);

}  // namespace relupgd
