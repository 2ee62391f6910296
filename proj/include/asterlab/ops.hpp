#pragma once

#include "asterlab/value.hpp"

namespace asterlab::num {

// All operations compute eagerly and append a node to the active tape when a
// recording scope is open. Binary elementwise operands must have equal shapes
// or one side must be scalar (size 1).

enum class Elementwise { tanh_fn, sigmoid_fn, relu_fn, add_fn, mul_fn, scale_fn };

Value matmul(const Value& a, const Value& b);       // [m×k]·[k×n] -> [m×n]
Value transpose(const Value& a);                    // [m×n] -> [n×m]

Value add(const Value& a, const Value& b);
Value sub(const Value& a, const Value& b);
Value mul(const Value& a, const Value& b);
Value scale(const Value& a, double c);
Value vtanh(const Value& x);
Value vsigmoid(const Value& x);
Value vrelu(const Value& x);
Value vabs(const Value& x);

Value elementwise(const Value& x, Elementwise kind);                   // unary kinds
Value elementwise(const Value& a, const Value& b, Elementwise kind);   // add/mul
Value elementwise(const Value& x, Elementwise kind, double c);         // scale

// y[r][c] = x[r][c] + b[c]
Value add_bias(const Value& x, const Value& b);

Value sum(const Value& x);                          // -> scalar
Value mean(const Value& x);                         // -> scalar

// Causal dilated 1-d convolution without padding.
//   x [N×C×L], kernel [C_out×C×w]  ->  [N×C_out×L_out], L_out = L-(w-1)*d
//   out[n,o,t] = sum_{c,j} kernel[o,c,j] * x[n,c,t+j*d]
// Output position t corresponds to input position t+(w-1)*d, so no output
// ever depends on later inputs.
Value dilated_causal_conv1d(const Value& x, const Value& kernel, int dilation);

// Row-wise standardization over the last axis of a 2-d value, epsilon 1e-5,
// then y*gain + bias. gain/bias have the row length.
Value layer_norm(const Value& x, const Value& gain, const Value& bias);

// Numerically stable softmax along rows (axis=1) or columns (axis=0) of a
// 2-d value.
Value softmax(const Value& x, int axis);

// y[i][j] = x[i][j] / sum_j x[i][j]; rows must have positive sums.
Value normalize_rows(const Value& x);

Value slice_cols(const Value& x, int c0, int c1);   // [r×c] -> [r×(c1-c0)]
Value concat_cols(const std::vector<Value>& parts);

// 3-d time-axis helpers, layout [N×C×L].
Value slice_time_last(const Value& x);              // -> [N×C]
Value truncate_front_time(const Value& x, int keep);

// y[:,:,t] = adj · x[:,:,t] with x viewed as [N×C] per timestep.
Value graph_propagate(const Value& adj, const Value& x);

// y[n,c2,t] = sum_c x[n,c,t] * w[c][c2]
Value channel_matmul(const Value& x, const Value& w);
// y[n,c,t] = x[n,c,t] + b[c]
Value channel_bias(const Value& x, const Value& b);

}  // namespace asterlab::num
