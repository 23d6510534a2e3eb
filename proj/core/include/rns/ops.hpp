#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rns/tensor.hpp"

namespace rns {

// Forward + backward primitives for the recommender graph. Every op accepts
// a nullable tape: with a tape it records a backward rule whenever an input
// is tracked; with nullptr it is a plain forward evaluation (used during
// ranking, where parameters are read-only). There is no broadcasting; any
// shape disagreement throws ShapeError. Results are checked finite.

/// [m x k] * [k x n] -> [m x n]
Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b);

/// Elementwise sum of two tensors with identical shapes.
Tensor add(Tape* tape, const Tensor& a, const Tensor& b);

/// Elementwise (Hadamard) product of two tensors with identical shapes.
Tensor mul(Tape* tape, const Tensor& a, const Tensor& b);

Tensor relu(Tape* tape, const Tensor& x);

/// Numerically stable logistic function; outputs lie in (0, 1).
Tensor sigmoid(Tape* tape, const Tensor& x);

/// Natural log with the argument floored at kLogFloor, keeping -log(s)
/// finite when a score underflows. The floored region propagates zero
/// gradient.
inline constexpr double kLogFloor = 1e-12;
Tensor log_floored(Tape* tape, const Tensor& x);

/// factor * x (factor is a plain constant, not a tape node).
Tensor scale(Tape* tape, const Tensor& x, double factor);

/// x + constant, elementwise.
Tensor add_const(Tape* tape, const Tensor& x, double constant);

/// Sum over all elements of a ⊙ b (shapes must match) -> scalar.
Tensor dot(Tape* tape, const Tensor& a, const Tensor& b);

/// Sum of all elements -> scalar.
Tensor sum(Tape* tape, const Tensor& x);

/// Gather rows of a [V x d] table -> [len x d]. The gradient scatter-adds
/// into the gathered rows; rows never gathered keep a zero gradient.
Tensor rows(Tape* tape, const Tensor& table, std::span<const std::int32_t> indices);

/// Same data, new shape (element count must match). Gradient passes through.
Tensor reshape(Tape* tape, const Tensor& x, std::vector<int> shape);

/// Stack k matrices of identical shape [l x d] along a new last axis
/// -> [l x d x k].
Tensor stack_last(Tape* tape, std::span<const Tensor> mats);

/// Concatenate scalars into a vector [count].
Tensor concat_scalars(Tape* tape, std::span<const Tensor> scalars);

/// Extract element `index` of a vector as a scalar.
Tensor element(Tape* tape, const Tensor& vec, int index);

/// s * x where s is a (possibly tracked) scalar tensor.
Tensor mul_scalar(Tape* tape, const Tensor& s, const Tensor& x);

/// Softmax over a vector, stabilized by max subtraction. The output is
/// nonnegative, sums to one, and is invariant to adding a constant to all
/// logits.
Tensor softmax(Tape* tape, const Tensor& logits);

struct MaxResult {
    Tensor value;  // scalar
    int index;     // 0-based winning slot
};

/// Max over a vector. Ties resolve to the lowest index; the gradient flows
/// only into the winning slot.
MaxResult max1d(Tape* tape, const Tensor& x);

/// ReLU(sum(window ⊙ filter) + bias) for the window of `filter`'s height
/// starting at row `start` (0-based). `input` is [l x d x K], `filter`
/// [h x d x K], `bias` scalar: a full-depth multi-channel correlation.
Tensor conv_window(Tape* tape, const Tensor& input, const Tensor& filter,
                   const Tensor& bias, int start);

/// Max of conv_window over every valid start, as a single tape node whose
/// gradient flows only through the winning window (ties to the lowest
/// start). Equivalent to composing conv_window over all starts with max1d.
MaxResult conv_max(Tape* tape, const Tensor& input, const Tensor& filter,
                   const Tensor& bias);

}  // namespace rns
