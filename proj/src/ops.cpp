#include "asterlab/ops.hpp"

#include <cmath>
#include <stdexcept>

namespace asterlab::num {

namespace {

void require(bool cond, const std::string& msg) {
    if (!cond) throw std::invalid_argument(msg);
}

void require_2d(const Value& v, const char* what) {
    require(v.ndim() == 2, std::string(what) + ": expected 2-d value, got " + shape_str(v.shape()));
}

void require_3d(const Value& v, const char* what) {
    require(v.ndim() == 3, std::string(what) + ": expected 3-d value, got " + shape_str(v.shape()));
}

bool maybe_record(Value& out, const std::vector<const Value*>& parents, Tape::BackwardFn fn) {
    Tape* t = active_tape();
    if (!t) return false;
    t->record(out, parents, std::move(fn));
    return true;
}

}  // namespace

Value matmul(const Value& a, const Value& b) {
    require_2d(a, "matmul");
    require_2d(b, "matmul");
    const int m = a.dim(0), k = a.dim(1), k2 = b.dim(0), n = b.dim(1);
    require(k == k2, "matmul: inner dimensions disagree, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));

    Value out = Value::zeros({m, n});
    {
        const double* ad = a.data().data();
        const double* bd = b.data().data();
        double* od = out.data().data();
        for (int i = 0; i < m; ++i) {
            const double* arow = ad + static_cast<std::size_t>(i) * k;
            double* orow = od + static_cast<std::size_t>(i) * n;
            for (int p = 0; p < k; ++p) {
                const double av = arow[p];
                if (av == 0.0) continue;
                const double* brow = bd + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) orow[j] += av * brow[j];
            }
        }
    }

    auto ai = a.impl_;
    auto bi = b.impl_;
    maybe_record(out, {&a, &b}, [ai, bi, m, k, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        // dA = g·Bᵀ, dB = Aᵀ·g
        const double* bd = bi->data.data();
        const double* ad = ai->data.data();
        std::vector<double>& ga = *pg[0];
        std::vector<double>& gb = *pg[1];
        for (int i = 0; i < m; ++i) {
            for (int p = 0; p < k; ++p) {
                double acc = 0.0;
                const double* grow = g.data() + static_cast<std::size_t>(i) * n;
                const double* brow = bd + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) acc += grow[j] * brow[j];
                ga[static_cast<std::size_t>(i) * k + p] += acc;
            }
        }
        for (int p = 0; p < k; ++p) {
            for (int i = 0; i < m; ++i) {
                const double av = ad[static_cast<std::size_t>(i) * k + p];
                if (av == 0.0) continue;
                const double* grow = g.data() + static_cast<std::size_t>(i) * n;
                double* gbrow = gb.data() + static_cast<std::size_t>(p) * n;
                for (int j = 0; j < n; ++j) gbrow[j] += av * grow[j];
            }
        }
    });
    return out;
}

Value transpose(const Value& a) {
    require_2d(a, "transpose");
    const int m = a.dim(0), n = a.dim(1);
    Value out = Value::zeros({n, m});
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out.data()[static_cast<std::size_t>(j) * m + i] = a.data()[static_cast<std::size_t>(i) * n + j];
    maybe_record(out, {&a}, [m, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& ga = *pg[0];
        for (int j = 0; j < n; ++j)
            for (int i = 0; i < m; ++i)
                ga[static_cast<std::size_t>(i) * n + j] += g[static_cast<std::size_t>(j) * m + i];
    });
    return out;
}

namespace {

// add/mul allow equal shapes or a scalar on either side.
enum class BinKind { add, sub, mul };

Value binary_op(const Value& a, const Value& b, BinKind kind, const char* name) {
    const bool a_scalar = a.is_scalar();
    const bool b_scalar = b.is_scalar();
    require(a.shape() == b.shape() || a_scalar || b_scalar,
            std::string(name) + ": shape mismatch " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));

    const Value& big = (a_scalar && !b_scalar) ? b : a;
    Value out = Value::zeros(big.shape());
    const std::size_t n = out.size();
    const double* ad = a.data().data();
    const double* bd = b.data().data();
    double* od = out.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        const double av = ad[a_scalar ? 0 : i];
        const double bv = bd[b_scalar ? 0 : i];
        switch (kind) {
            case BinKind::add: od[i] = av + bv; break;
            case BinKind::sub: od[i] = av - bv; break;
            case BinKind::mul: od[i] = av * bv; break;
        }
    }

    auto ai = a.impl_;
    auto bi = b.impl_;
    maybe_record(out, {&a, &b},
                 [ai, bi, kind, a_scalar, b_scalar, n](const std::vector<double>& g,
                                                       const std::vector<std::vector<double>*>& pg) {
                     std::vector<double>& ga = *pg[0];
                     std::vector<double>& gb = *pg[1];
                     const double* ad = ai->data.data();
                     const double* bd = bi->data.data();
                     for (std::size_t i = 0; i < n; ++i) {
                         double da = 0.0, db = 0.0;
                         switch (kind) {
                             case BinKind::add: da = g[i]; db = g[i]; break;
                             case BinKind::sub: da = g[i]; db = -g[i]; break;
                             case BinKind::mul:
                                 da = g[i] * bd[b_scalar ? 0 : i];
                                 db = g[i] * ad[a_scalar ? 0 : i];
                                 break;
                         }
                         ga[a_scalar ? 0 : i] += da;
                         gb[b_scalar ? 0 : i] += db;
                     }
                 });
    return out;
}

Value unary_op(const Value& x, Elementwise kind) {
    Value out = Value::zeros(x.shape());
    const std::size_t n = x.size();
    const double* xd = x.data().data();
    double* od = out.data().data();
    for (std::size_t i = 0; i < n; ++i) {
        switch (kind) {
            case Elementwise::tanh_fn: od[i] = std::tanh(xd[i]); break;
            case Elementwise::sigmoid_fn: od[i] = 1.0 / (1.0 + std::exp(-xd[i])); break;
            case Elementwise::relu_fn: od[i] = xd[i] > 0.0 ? xd[i] : 0.0; break;
            default: throw std::invalid_argument("unary elementwise: unsupported kind");
        }
    }
    auto xi = x.impl_;
    auto oi = out.impl_;
    maybe_record(out, {&x}, [xi, oi, kind, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        const double* xd = xi->data.data();
        const double* yd = oi->data.data();
        for (std::size_t i = 0; i < n; ++i) {
            switch (kind) {
                case Elementwise::tanh_fn: gx[i] += g[i] * (1.0 - yd[i] * yd[i]); break;
                case Elementwise::sigmoid_fn: gx[i] += g[i] * yd[i] * (1.0 - yd[i]); break;
                case Elementwise::relu_fn: gx[i] += xd[i] > 0.0 ? g[i] : 0.0; break;
                default: break;
            }
        }
    });
    return out;
}

}  // namespace

Value add(const Value& a, const Value& b) { return binary_op(a, b, BinKind::add, "add"); }
Value sub(const Value& a, const Value& b) { return binary_op(a, b, BinKind::sub, "sub"); }
Value mul(const Value& a, const Value& b) { return binary_op(a, b, BinKind::mul, "mul"); }

Value scale(const Value& a, double c) {
    Value out = Value::zeros(a.shape());
    const std::size_t n = a.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = a.data()[i] * c;
    maybe_record(out, {&a}, [c, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& ga = *pg[0];
        for (std::size_t i = 0; i < n; ++i) ga[i] += c * g[i];
    });
    return out;
}

Value vtanh(const Value& x) { return unary_op(x, Elementwise::tanh_fn); }
Value vsigmoid(const Value& x) { return unary_op(x, Elementwise::sigmoid_fn); }
Value vrelu(const Value& x) { return unary_op(x, Elementwise::relu_fn); }

Value vabs(const Value& x) {
    Value out = Value::zeros(x.shape());
    const std::size_t n = x.size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i] = std::fabs(x.data()[i]);
    auto xi = x.impl_;
    maybe_record(out, {&x}, [xi, n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        const double* xd = xi->data.data();
        for (std::size_t i = 0; i < n; ++i) {
            if (xd[i] > 0.0) gx[i] += g[i];
            else if (xd[i] < 0.0) gx[i] -= g[i];
        }
    });
    return out;
}

Value elementwise(const Value& x, Elementwise kind) {
    require(kind == Elementwise::tanh_fn || kind == Elementwise::sigmoid_fn || kind == Elementwise::relu_fn,
            "elementwise: kind requires two operands or a scale factor");
    return unary_op(x, kind);
}

Value elementwise(const Value& a, const Value& b, Elementwise kind) {
    switch (kind) {
        case Elementwise::add_fn: return add(a, b);
        case Elementwise::mul_fn: return mul(a, b);
        default: throw std::invalid_argument("elementwise: binary form supports add and mul only");
    }
}

Value elementwise(const Value& x, Elementwise kind, double c) {
    require(kind == Elementwise::scale_fn, "elementwise: scalar form supports scale only");
    return scale(x, c);
}

Value add_bias(const Value& x, const Value& b) {
    require_2d(x, "add_bias");
    const int r = x.dim(0), c = x.dim(1);
    require(static_cast<int>(b.size()) == c,
            "add_bias: bias length " + shape_str(b.shape()) + " does not match row width " + shape_str(x.shape()));
    Value out = Value::zeros(x.shape());
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j)
            out.data()[static_cast<std::size_t>(i) * c + j] = x.data()[static_cast<std::size_t>(i) * c + j] + b.data()[static_cast<std::size_t>(j)];
    maybe_record(out, {&x, &b}, [r, c](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        std::vector<double>& gb = *pg[1];
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < c; ++j) {
                gx[static_cast<std::size_t>(i) * c + j] += g[static_cast<std::size_t>(i) * c + j];
                gb[static_cast<std::size_t>(j)] += g[static_cast<std::size_t>(i) * c + j];
            }
    });
    return out;
}

Value sum(const Value& x) {
    double s = 0.0;
    for (double v : x.data()) s += v;
    Value out(s);
    const std::size_t n = x.size();
    maybe_record(out, {&x}, [n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        for (std::size_t i = 0; i < n; ++i) gx[i] += g[0];
    });
    return out;
}

Value mean(const Value& x) {
    const std::size_t n = x.size();
    double s = 0.0;
    for (double v : x.data()) s += v;
    Value out(s / static_cast<double>(n));
    maybe_record(out, {&x}, [n](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        const double inv = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) gx[i] += g[0] * inv;
    });
    return out;
}

Value dilated_causal_conv1d(const Value& x, const Value& kernel, int dilation) {
    require_3d(x, "dilated_causal_conv1d");
    require_3d(kernel, "dilated_causal_conv1d");
    require(dilation >= 1, "dilated_causal_conv1d: dilation must be >= 1");
    const int N = x.dim(0), C = x.dim(1), L = x.dim(2);
    const int Co = kernel.dim(0), Ck = kernel.dim(1), w = kernel.dim(2);
    require(C == Ck, "dilated_causal_conv1d: channel mismatch, input " + shape_str(x.shape()) + " kernel " +
                         shape_str(kernel.shape()));
    const int Lout = L - (w - 1) * dilation;
    require(Lout >= 1, "dilated_causal_conv1d: sequence length " + std::to_string(L) +
                           " shorter than receptive field " + std::to_string((w - 1) * dilation + 1));

    Value out = Value::zeros({N, Co, Lout});
    {
        const double* xd = x.data().data();
        const double* kd = kernel.data().data();
        double* od = out.data().data();
        for (int n = 0; n < N; ++n) {
            for (int o = 0; o < Co; ++o) {
                double* orow = od + (static_cast<std::size_t>(n) * Co + o) * Lout;
                for (int c = 0; c < C; ++c) {
                    const double* xrow = xd + (static_cast<std::size_t>(n) * C + c) * L;
                    const double* krow = kd + (static_cast<std::size_t>(o) * C + c) * w;
                    for (int j = 0; j < w; ++j) {
                        const double kv = krow[j];
                        if (kv == 0.0) continue;
                        const double* xs = xrow + j * dilation;
                        for (int t = 0; t < Lout; ++t) orow[t] += kv * xs[t];
                    }
                }
            }
        }
    }

    auto xi = x.impl_;
    auto ki = kernel.impl_;
    maybe_record(out, {&x, &kernel},
                 [xi, ki, N, C, L, Co, w, Lout, dilation](const std::vector<double>& g,
                                                          const std::vector<std::vector<double>*>& pg) {
                     std::vector<double>& gx = *pg[0];
                     std::vector<double>& gk = *pg[1];
                     const double* xd = xi->data.data();
                     const double* kd = ki->data.data();
                     for (int n = 0; n < N; ++n) {
                         for (int o = 0; o < Co; ++o) {
                             const double* grow = g.data() + (static_cast<std::size_t>(n) * Co + o) * Lout;
                             for (int c = 0; c < C; ++c) {
                                 const double* xrow = xd + (static_cast<std::size_t>(n) * C + c) * L;
                                 const double* krow = kd + (static_cast<std::size_t>(o) * C + c) * w;
                                 double* gxrow = gx.data() + (static_cast<std::size_t>(n) * C + c) * L;
                                 double* gkrow = gk.data() + (static_cast<std::size_t>(o) * C + c) * w;
                                 for (int j = 0; j < w; ++j) {
                                     const double kv = krow[j];
                                     double acc = 0.0;
                                     const int off = j * dilation;
                                     for (int t = 0; t < Lout; ++t) {
                                         acc += grow[t] * xrow[off + t];
                                         if (kv != 0.0) gxrow[off + t] += kv * grow[t];
                                     }
                                     gkrow[j] += acc;
                                 }
                             }
                         }
                     }
                 });
    return out;
}

Value layer_norm(const Value& x, const Value& gain, const Value& bias) {
    require_2d(x, "layer_norm");
    const int r = x.dim(0), c = x.dim(1);
    require(c >= 1, "layer_norm: zero-length axis");
    require(static_cast<int>(gain.size()) == c && static_cast<int>(bias.size()) == c,
            "layer_norm: gain/bias length must equal last-axis extent " + std::to_string(c));

    constexpr double kEps = 1e-5;
    Value out = Value::zeros(x.shape());
    std::vector<double> xhat(static_cast<std::size_t>(r) * c);
    std::vector<double> inv_std(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        const double* xr = x.data().data() + static_cast<std::size_t>(i) * c;
        double mu = 0.0;
        for (int j = 0; j < c; ++j) mu += xr[j];
        mu /= c;
        double var = 0.0;
        for (int j = 0; j < c; ++j) var += (xr[j] - mu) * (xr[j] - mu);
        var /= c;
        const double istd = 1.0 / std::sqrt(var + kEps);
        inv_std[static_cast<std::size_t>(i)] = istd;
        for (int j = 0; j < c; ++j) {
            const double xh = (xr[j] - mu) * istd;
            xhat[static_cast<std::size_t>(i) * c + j] = xh;
            out.data()[static_cast<std::size_t>(i) * c + j] = xh * gain.data()[static_cast<std::size_t>(j)] + bias.data()[static_cast<std::size_t>(j)];
        }
    }

    auto gi = gain.impl_;
    maybe_record(out, {&x, &gain, &bias},
                 [gi, xhat = std::move(xhat), inv_std = std::move(inv_std), r, c](
                     const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
                     std::vector<double>& gx = *pg[0];
                     std::vector<double>& ggain = *pg[1];
                     std::vector<double>& gbias = *pg[2];
                     const double* gd = gi->data.data();
                     for (int i = 0; i < r; ++i) {
                         const double* grow = g.data() + static_cast<std::size_t>(i) * c;
                         const double* xh = xhat.data() + static_cast<std::size_t>(i) * c;
                         double mean_dxh = 0.0, mean_dxh_xh = 0.0;
                         for (int j = 0; j < c; ++j) {
                             const double dxh = grow[j] * gd[j];
                             mean_dxh += dxh;
                             mean_dxh_xh += dxh * xh[j];
                             ggain[static_cast<std::size_t>(j)] += grow[j] * xh[j];
                             gbias[static_cast<std::size_t>(j)] += grow[j];
                         }
                         mean_dxh /= c;
                         mean_dxh_xh /= c;
                         const double istd = inv_std[static_cast<std::size_t>(i)];
                         for (int j = 0; j < c; ++j) {
                             const double dxh = grow[j] * gd[j];
                             gx[static_cast<std::size_t>(i) * c + j] += istd * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
                         }
                     }
                 });
    return out;
}

Value softmax(const Value& x, int axis) {
    require_2d(x, "softmax");
    require(axis == 0 || axis == 1, "softmax: axis must be 0 or 1");
    const int r = x.dim(0), c = x.dim(1);
    Value out = Value::zeros(x.shape());

    const int outer = axis == 1 ? r : c;
    const int inner = axis == 1 ? c : r;
    auto idx = [&](int o, int i) {
        return axis == 1 ? static_cast<std::size_t>(o) * c + i : static_cast<std::size_t>(i) * c + o;
    };
    for (int o = 0; o < outer; ++o) {
        double mx = x.data()[idx(o, 0)];
        for (int i = 1; i < inner; ++i) mx = std::max(mx, x.data()[idx(o, i)]);
        double z = 0.0;
        for (int i = 0; i < inner; ++i) {
            const double e = std::exp(x.data()[idx(o, i)] - mx);
            out.data()[idx(o, i)] = e;
            z += e;
        }
        for (int i = 0; i < inner; ++i) out.data()[idx(o, i)] /= z;
    }

    auto oi = out.impl_;
    maybe_record(out, {&x}, [oi, r, c, axis](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        const double* yd = oi->data.data();
        const int outer = axis == 1 ? r : c;
        const int inner = axis == 1 ? c : r;
        auto idx = [&](int o, int i) {
            return axis == 1 ? static_cast<std::size_t>(o) * c + i : static_cast<std::size_t>(i) * c + o;
        };
        for (int o = 0; o < outer; ++o) {
            double dot = 0.0;
            for (int i = 0; i < inner; ++i) dot += g[idx(o, i)] * yd[idx(o, i)];
            for (int i = 0; i < inner; ++i) gx[idx(o, i)] += yd[idx(o, i)] * (g[idx(o, i)] - dot);
        }
    });
    return out;
}

Value normalize_rows(const Value& x) {
    require_2d(x, "normalize_rows");
    const int r = x.dim(0), c = x.dim(1);
    Value out = Value::zeros(x.shape());
    std::vector<double> sums(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) {
        double s = 0.0;
        for (int j = 0; j < c; ++j) s += x.data()[static_cast<std::size_t>(i) * c + j];
        require(s > 0.0, "normalize_rows: row " + std::to_string(i) + " has non-positive sum");
        sums[static_cast<std::size_t>(i)] = s;
        for (int j = 0; j < c; ++j)
            out.data()[static_cast<std::size_t>(i) * c + j] = x.data()[static_cast<std::size_t>(i) * c + j] / s;
    }
    auto oi = out.impl_;
    maybe_record(out, {&x},
                 [oi, sums = std::move(sums), r, c](const std::vector<double>& g,
                                                    const std::vector<std::vector<double>*>& pg) {
                     std::vector<double>& gx = *pg[0];
                     const double* yd = oi->data.data();
                     for (int i = 0; i < r; ++i) {
                         double dot = 0.0;
                         for (int j = 0; j < c; ++j) dot += g[static_cast<std::size_t>(i) * c + j] * yd[static_cast<std::size_t>(i) * c + j];
                         const double inv = 1.0 / sums[static_cast<std::size_t>(i)];
                         for (int j = 0; j < c; ++j)
                             gx[static_cast<std::size_t>(i) * c + j] += (g[static_cast<std::size_t>(i) * c + j] - dot) * inv;
                     }
                 });
    return out;
}

Value slice_cols(const Value& x, int c0, int c1) {
    require_2d(x, "slice_cols");
    const int r = x.dim(0), c = x.dim(1);
    require(0 <= c0 && c0 < c1 && c1 <= c, "slice_cols: bad range [" + std::to_string(c0) + "," + std::to_string(c1) +
                                               ") for " + shape_str(x.shape()));
    const int w = c1 - c0;
    Value out = Value::zeros({r, w});
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < w; ++j)
            out.data()[static_cast<std::size_t>(i) * w + j] = x.data()[static_cast<std::size_t>(i) * c + c0 + j];
    maybe_record(out, {&x}, [r, c, c0, w](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < w; ++j)
                gx[static_cast<std::size_t>(i) * c + c0 + j] += g[static_cast<std::size_t>(i) * w + j];
    });
    return out;
}

Value concat_cols(const std::vector<Value>& parts) {
    require(!parts.empty(), "concat_cols: empty input");
    const int r = parts[0].dim(0);
    int total = 0;
    for (const Value& p : parts) {
        require(p.ndim() == 2 && p.dim(0) == r, "concat_cols: row mismatch");
        total += p.dim(1);
    }
    Value out = Value::zeros({r, total});
    std::vector<int> widths;
    int off = 0;
    for (const Value& p : parts) {
        const int w = p.dim(1);
        widths.push_back(w);
        for (int i = 0; i < r; ++i)
            for (int j = 0; j < w; ++j)
                out.data()[static_cast<std::size_t>(i) * total + off + j] = p.data()[static_cast<std::size_t>(i) * w + j];
        off += w;
    }
    std::vector<const Value*> ptrs;
    for (const Value& p : parts) ptrs.push_back(&p);
    maybe_record(out, ptrs,
                 [r, total, widths = std::move(widths)](const std::vector<double>& g,
                                                        const std::vector<std::vector<double>*>& pg) {
                     int off = 0;
                     for (std::size_t k = 0; k < widths.size(); ++k) {
                         const int w = widths[k];
                         std::vector<double>& gp = *pg[k];
                         for (int i = 0; i < r; ++i)
                             for (int j = 0; j < w; ++j)
                                 gp[static_cast<std::size_t>(i) * w + j] += g[static_cast<std::size_t>(i) * total + off + j];
                         off += w;
                     }
                 });
    return out;
}

Value slice_time_last(const Value& x) {
    require_3d(x, "slice_time_last");
    const int N = x.dim(0), C = x.dim(1), L = x.dim(2);
    Value out = Value::zeros({N, C});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            out.data()[static_cast<std::size_t>(n) * C + c] = x.data()[(static_cast<std::size_t>(n) * C + c) * L + L - 1];
    maybe_record(out, {&x}, [N, C, L](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                gx[(static_cast<std::size_t>(n) * C + c) * L + L - 1] += g[static_cast<std::size_t>(n) * C + c];
    });
    return out;
}

Value truncate_front_time(const Value& x, int keep) {
    require_3d(x, "truncate_front_time");
    const int N = x.dim(0), C = x.dim(1), L = x.dim(2);
    require(keep >= 1 && keep <= L, "truncate_front_time: keep " + std::to_string(keep) + " out of range for length " +
                                        std::to_string(L));
    if (keep == L) {
        // Identity; still record so gradients flow.
        Value out(x.shape(), x.data());
        maybe_record(out, {&x}, [](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
            std::vector<double>& gx = *pg[0];
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        });
        return out;
    }
    const int drop = L - keep;
    Value out = Value::zeros({N, C, keep});
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < keep; ++t)
                out.data()[(static_cast<std::size_t>(n) * C + c) * keep + t] =
                    x.data()[(static_cast<std::size_t>(n) * C + c) * L + drop + t];
    maybe_record(out, {&x}, [N, C, L, keep, drop](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int t = 0; t < keep; ++t)
                    gx[(static_cast<std::size_t>(n) * C + c) * L + drop + t] +=
                        g[(static_cast<std::size_t>(n) * C + c) * keep + t];
    });
    return out;
}

Value graph_propagate(const Value& adj, const Value& x) {
    require_2d(adj, "graph_propagate");
    require_3d(x, "graph_propagate");
    const int N = x.dim(0), C = x.dim(1), L = x.dim(2);
    require(adj.dim(0) == N && adj.dim(1) == N,
            "graph_propagate: adjacency " + shape_str(adj.shape()) + " does not match node count " + std::to_string(N));
    Value out = Value::zeros({N, C, L});
    {
        const double* ad = adj.data().data();
        const double* xd = x.data().data();
        double* od = out.data().data();
        for (int n = 0; n < N; ++n) {
            for (int m = 0; m < N; ++m) {
                const double a = ad[static_cast<std::size_t>(n) * N + m];
                if (a == 0.0) continue;
                const double* xrow = xd + static_cast<std::size_t>(m) * C * L;
                double* orow = od + static_cast<std::size_t>(n) * C * L;
                for (int i = 0; i < C * L; ++i) orow[i] += a * xrow[i];
            }
        }
    }
    auto ai = adj.impl_;
    auto xi = x.impl_;
    maybe_record(out, {&adj, &x},
                 [ai, xi, N, C, L](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
                     std::vector<double>& gadj = *pg[0];
                     std::vector<double>& gx = *pg[1];
                     const double* ad = ai->data.data();
                     const double* xd = xi->data.data();
                     const int cl = C * L;
                     for (int n = 0; n < N; ++n) {
                         const double* grow = g.data() + static_cast<std::size_t>(n) * cl;
                         for (int m = 0; m < N; ++m) {
                             const double* xrow = xd + static_cast<std::size_t>(m) * cl;
                             double acc = 0.0;
                             for (int i = 0; i < cl; ++i) acc += grow[i] * xrow[i];
                             gadj[static_cast<std::size_t>(n) * N + m] += acc;
                             const double a = ad[static_cast<std::size_t>(n) * N + m];
                             if (a != 0.0) {
                                 double* gxrow = gx.data() + static_cast<std::size_t>(m) * cl;
                                 for (int i = 0; i < cl; ++i) gxrow[i] += a * grow[i];
                             }
                         }
                     }
                 });
    return out;
}

Value channel_matmul(const Value& x, const Value& w) {
    require_3d(x, "channel_matmul");
    require_2d(w, "channel_matmul");
    const int N = x.dim(0), C = x.dim(1), L = x.dim(2);
    require(w.dim(0) == C, "channel_matmul: weight " + shape_str(w.shape()) + " does not match channels " +
                               std::to_string(C));
    const int C2 = w.dim(1);
    Value out = Value::zeros({N, C2, L});
    {
        const double* xd = x.data().data();
        const double* wd = w.data().data();
        double* od = out.data().data();
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c) {
                const double* xrow = xd + (static_cast<std::size_t>(n) * C + c) * L;
                for (int c2 = 0; c2 < C2; ++c2) {
                    const double wv = wd[static_cast<std::size_t>(c) * C2 + c2];
                    if (wv == 0.0) continue;
                    double* orow = od + (static_cast<std::size_t>(n) * C2 + c2) * L;
                    for (int t = 0; t < L; ++t) orow[t] += wv * xrow[t];
                }
            }
    }
    auto xi = x.impl_;
    auto wi = w.impl_;
    maybe_record(out, {&x, &w},
                 [xi, wi, N, C, C2, L](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
                     std::vector<double>& gx = *pg[0];
                     std::vector<double>& gw = *pg[1];
                     const double* xd = xi->data.data();
                     const double* wd = wi->data.data();
                     for (int n = 0; n < N; ++n)
                         for (int c = 0; c < C; ++c) {
                             const double* xrow = xd + (static_cast<std::size_t>(n) * C + c) * L;
                             double* gxrow = gx.data() + (static_cast<std::size_t>(n) * C + c) * L;
                             for (int c2 = 0; c2 < C2; ++c2) {
                                 const double wv = wd[static_cast<std::size_t>(c) * C2 + c2];
                                 const double* grow = g.data() + (static_cast<std::size_t>(n) * C2 + c2) * L;
                                 double acc = 0.0;
                                 for (int t = 0; t < L; ++t) {
                                     acc += grow[t] * xrow[t];
                                     if (wv != 0.0) gxrow[t] += wv * grow[t];
                                 }
                                 gw[static_cast<std::size_t>(c) * C2 + c2] += acc;
                             }
                         }
                 });
    return out;
}

Value channel_bias(const Value& x, const Value& b) {
    require_3d(x, "channel_bias");
    const int N = x.dim(0), C = x.dim(1), L = x.dim(2);
    require(static_cast<int>(b.size()) == C,
            "channel_bias: bias " + shape_str(b.shape()) + " does not match channels " + std::to_string(C));
    Value out = Value::zeros(x.shape());
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int t = 0; t < L; ++t)
                out.data()[(static_cast<std::size_t>(n) * C + c) * L + t] =
                    x.data()[(static_cast<std::size_t>(n) * C + c) * L + t] + b.data()[static_cast<std::size_t>(c)];
    maybe_record(out, {&x, &b}, [N, C, L](const std::vector<double>& g, const std::vector<std::vector<double>*>& pg) {
        std::vector<double>& gx = *pg[0];
        std::vector<double>& gb = *pg[1];
        for (int n = 0; n < N; ++n)
            for (int c = 0; c < C; ++c)
                for (int t = 0; t < L; ++t) {
                    gx[(static_cast<std::size_t>(n) * C + c) * L + t] += g[(static_cast<std::size_t>(n) * C + c) * L + t];
                    gb[static_cast<std::size_t>(c)] += g[(static_cast<std::size_t>(n) * C + c) * L + t];
                }
    });
    return out;
}

}  // namespace asterlab::num
