#include "rns/ops.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "rns/error.hpp"

namespace rns {
namespace {

void require_defined(const Tensor& t, const char* op) {
    if (!t.defined()) throw ContractError(std::string(op) + ": undefined tensor argument");
}

void check_finite(const Tensor& t, const char* op) {
    for (double v : t.data())
        if (!std::isfinite(v))
            throw NumericError(std::string(op) + ": non-finite value in result");
}

// Marks the output tracked and allocates gradient buffers when this op will
// be recorded. Returns true iff the caller should push a node.
bool prepare(Tape* tape, std::initializer_list<const Tensor*> inputs, Tensor& out) {
    if (!tape) return false;
    bool any = false;
    for (const Tensor* t : inputs) any = any || t->requires_grad();
    if (!any) return false;
    out.set_requires_grad(true);
    out.ensure_grad();
    for (const Tensor* t : inputs)
        if (t->requires_grad()) const_cast<Tensor*>(t)->ensure_grad();
    return true;
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}

void require_scalar(const Tensor& t, const char* op) {
    if (t.size() != 1)
        throw ShapeError(std::string(op) + ": expected scalar, got " + shape_str(t.shape()));
}

void require_vector(const Tensor& t, const char* op) {
    if (t.rank() != 1)
        throw ShapeError(std::string(op) + ": expected vector, got " + shape_str(t.shape()));
}

}  // namespace

Tensor matmul(Tape* tape, const Tensor& a, const Tensor& b) {
    require_defined(a, "matmul");
    require_defined(b, "matmul");
    if (a.rank() != 2 || b.rank() != 2 || a.dim(1) != b.dim(0))
        throw ShapeError("matmul: incompatible shapes " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
    const int m = a.dim(0), k = a.dim(1), n = b.dim(1);
    Tensor out({m, n});
    {
        auto A = a.data();
        auto B = b.data();
        auto O = out.data();
        for (int i = 0; i < m; ++i)
            for (int kk = 0; kk < k; ++kk) {
                const double aik = A[static_cast<std::size_t>(i) * k + kk];
                if (aik == 0.0) continue;
                for (int j = 0; j < n; ++j)
                    O[static_cast<std::size_t>(i) * n + j] +=
                        aik * B[static_cast<std::size_t>(kk) * n + j];
            }
    }
    check_finite(out, "matmul");
    if (prepare(tape, {&a, &b}, out)) {
        tape->record({a.id(), b.id()}, out.id(), [a = a, b = b, out, m, k, n]() mutable {
            auto g = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                auto B = b.data();
                for (int i = 0; i < m; ++i)
                    for (int kk = 0; kk < k; ++kk) {
                        double acc = 0.0;
                        for (int j = 0; j < n; ++j)
                            acc += g[static_cast<std::size_t>(i) * n + j] *
                                   B[static_cast<std::size_t>(kk) * n + j];
                        ga[static_cast<std::size_t>(i) * k + kk] += acc;
                    }
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                auto A = a.data();
                for (int kk = 0; kk < k; ++kk)
                    for (int i = 0; i < m; ++i) {
                        const double aik = A[static_cast<std::size_t>(i) * k + kk];
                        if (aik == 0.0) continue;
                        for (int j = 0; j < n; ++j)
                            gb[static_cast<std::size_t>(kk) * n + j] +=
                                aik * g[static_cast<std::size_t>(i) * n + j];
                    }
            }
        });
    }
    return out;
}

Tensor add(Tape* tape, const Tensor& a, const Tensor& b) {
    require_defined(a, "add");
    require_defined(b, "add");
    require_same_shape(a, b, "add");
    Tensor out(a.shape());
    auto A = a.data(), B = b.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = A[i] + B[i];
    check_finite(out, "add");
    if (prepare(tape, {&a, &b}, out)) {
        tape->record({a.id(), b.id()}, out.id(), [a = a, b = b, out]() mutable {
            auto g = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
            }
        });
    }
    return out;
}

Tensor mul(Tape* tape, const Tensor& a, const Tensor& b) {
    require_defined(a, "mul");
    require_defined(b, "mul");
    require_same_shape(a, b, "mul");
    Tensor out(a.shape());
    auto A = a.data(), B = b.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = A[i] * B[i];
    check_finite(out, "mul");
    if (prepare(tape, {&a, &b}, out)) {
        tape->record({a.id(), b.id()}, out.id(), [a = a, b = b, out]() mutable {
            auto g = out.grad();
            if (a.requires_grad()) {
                auto ga = a.grad();
                auto B = b.data();
                for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * B[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                auto A = a.data();
                for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * A[i];
            }
        });
    }
    return out;
}

Tensor relu(Tape* tape, const Tensor& x) {
    require_defined(x, "relu");
    Tensor out(x.shape());
    auto X = x.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = X[i] > 0.0 ? X[i] : 0.0;
    check_finite(out, "relu");
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            auto X = x.data();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (X[i] > 0.0) gx[i] += g[i];
        });
    }
    return out;
}

Tensor sigmoid(Tape* tape, const Tensor& x) {
    require_defined(x, "sigmoid");
    Tensor out(x.shape());
    auto X = x.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) {
        const double v = X[i];
        if (v >= 0.0) {
            O[i] = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            O[i] = e / (1.0 + e);
        }
        // keep the output strictly inside (0,1) even where f64 saturates
        if (O[i] >= 1.0) O[i] = std::nextafter(1.0, 0.0);
        if (O[i] <= 0.0) O[i] = std::nextafter(0.0, 1.0);
    }
    check_finite(out, "sigmoid");
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            auto Y = out.data();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * Y[i] * (1.0 - Y[i]);
        });
    }
    return out;
}

Tensor log_floored(Tape* tape, const Tensor& x) {
    require_defined(x, "log");
    Tensor out(x.shape());
    auto X = x.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = std::log(std::max(X[i], kLogFloor));
    check_finite(out, "log");
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            auto X = x.data();
            for (std::size_t i = 0; i < g.size(); ++i)
                if (X[i] >= kLogFloor) gx[i] += g[i] / X[i];
        });
    }
    return out;
}

Tensor scale(Tape* tape, const Tensor& x, double factor) {
    require_defined(x, "scale");
    Tensor out(x.shape());
    auto X = x.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = factor * X[i];
    check_finite(out, "scale");
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out, factor]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += factor * g[i];
        });
    }
    return out;
}

Tensor add_const(Tape* tape, const Tensor& x, double constant) {
    require_defined(x, "add_const");
    Tensor out(x.shape());
    auto X = x.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = X[i] + constant;
    check_finite(out, "add_const");
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        });
    }
    return out;
}

Tensor dot(Tape* tape, const Tensor& a, const Tensor& b) {
    require_defined(a, "dot");
    require_defined(b, "dot");
    require_same_shape(a, b, "dot");
    double acc = 0.0;
    auto A = a.data(), B = b.data();
    for (std::size_t i = 0; i < A.size(); ++i) acc += A[i] * B[i];
    Tensor out = Tensor::scalar(acc);
    check_finite(out, "dot");
    if (prepare(tape, {&a, &b}, out)) {
        tape->record({a.id(), b.id()}, out.id(), [a = a, b = b, out]() mutable {
            const double g = out.grad()[0];
            if (a.requires_grad()) {
                auto ga = a.grad();
                auto B = b.data();
                for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * B[i];
            }
            if (b.requires_grad()) {
                auto gb = b.grad();
                auto A = a.data();
                for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * A[i];
            }
        });
    }
    return out;
}

Tensor sum(Tape* tape, const Tensor& x) {
    require_defined(x, "sum");
    double acc = 0.0;
    for (double v : x.data()) acc += v;
    Tensor out = Tensor::scalar(acc);
    check_finite(out, "sum");
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out]() mutable {
            const double g = out.grad()[0];
            auto gx = x.grad();
            for (std::size_t i = 0; i < gx.size(); ++i) gx[i] += g;
        });
    }
    return out;
}

Tensor rows(Tape* tape, const Tensor& table, std::span<const std::int32_t> indices) {
    require_defined(table, "rows");
    if (table.rank() != 2)
        throw ShapeError("rows: table must be 2-D, got " + shape_str(table.shape()));
    if (indices.empty()) throw ShapeError("rows: empty index list");
    const int v = table.dim(0), d = table.dim(1);
    for (std::int32_t idx : indices)
        if (idx < 0 || idx >= v)
            throw IndexError("rows: index " + std::to_string(idx) + " outside table of " +
                             std::to_string(v) + " rows");
    const int len = static_cast<int>(indices.size());
    Tensor out({len, d});
    {
        auto T = table.data();
        auto O = out.data();
        for (int p = 0; p < len; ++p)
            std::copy_n(T.data() + static_cast<std::size_t>(indices[p]) * d, d,
                        O.data() + static_cast<std::size_t>(p) * d);
    }
    check_finite(out, "rows");
    if (prepare(tape, {&table}, out)) {
        std::vector<std::int32_t> idx(indices.begin(), indices.end());
        tape->record({table.id()}, out.id(), [table = table, out, idx = std::move(idx), d]() mutable {
            auto g = out.grad();
            auto gt = table.grad();
            for (std::size_t p = 0; p < idx.size(); ++p) {
                double* dst = gt.data() + static_cast<std::size_t>(idx[p]) * d;
                const double* src = g.data() + p * static_cast<std::size_t>(d);
                for (int c = 0; c < d; ++c) dst[c] += src[c];
            }
        });
    }
    return out;
}

Tensor reshape(Tape* tape, const Tensor& x, std::vector<int> shape) {
    require_defined(x, "reshape");
    if (shape_numel(shape) != x.size())
        throw ShapeError("reshape: cannot view " + shape_str(x.shape()) + " as " +
                         shape_str(shape));
    Tensor out(std::move(shape), std::vector<double>(x.data().begin(), x.data().end()));
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out]() mutable {
            auto g = out.grad();
            auto gx = x.grad();
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
        });
    }
    return out;
}

Tensor stack_last(Tape* tape, std::span<const Tensor> mats) {
    if (mats.empty()) throw ShapeError("stack_last: no tensors to stack");
    const Tensor& first = mats[0];
    require_defined(first, "stack_last");
    if (first.rank() != 2)
        throw ShapeError("stack_last: expected 2-D inputs, got " + shape_str(first.shape()));
    for (const Tensor& m : mats) require_same_shape(first, m, "stack_last");
    const int l = first.dim(0), d = first.dim(1), k = static_cast<int>(mats.size());
    Tensor out({l, d, k});
    {
        auto O = out.data();
        for (int s = 0; s < k; ++s) {
            auto M = mats[s].data();
            for (int i = 0; i < l; ++i)
                for (int j = 0; j < d; ++j)
                    O[(static_cast<std::size_t>(i) * d + j) * k + s] =
                        M[static_cast<std::size_t>(i) * d + j];
        }
    }
    check_finite(out, "stack_last");
    bool any = false;
    for (const Tensor& m : mats) any = any || m.requires_grad();
    if (tape && any) {
        out.set_requires_grad(true);
        out.ensure_grad();
        std::vector<Tensor> kept(mats.begin(), mats.end());
        std::vector<const void*> ids;
        for (Tensor& m : kept) {
            ids.push_back(m.id());
            if (m.requires_grad()) m.ensure_grad();
        }
        tape->record(std::move(ids), out.id(), [kept = std::move(kept), out, l, d, k]() mutable {
            auto g = out.grad();
            for (int s = 0; s < k; ++s) {
                if (!kept[static_cast<std::size_t>(s)].requires_grad()) continue;
                auto gm = kept[static_cast<std::size_t>(s)].grad();
                for (int i = 0; i < l; ++i)
                    for (int j = 0; j < d; ++j)
                        gm[static_cast<std::size_t>(i) * d + j] +=
                            g[(static_cast<std::size_t>(i) * d + j) * k + s];
            }
        });
    }
    return out;
}

Tensor concat_scalars(Tape* tape, std::span<const Tensor> scalars) {
    if (scalars.empty()) throw ShapeError("concat_scalars: empty input");
    for (const Tensor& s : scalars) {
        require_defined(s, "concat_scalars");
        require_scalar(s, "concat_scalars");
    }
    const int n = static_cast<int>(scalars.size());
    Tensor out({n});
    for (int i = 0; i < n; ++i) out.data()[static_cast<std::size_t>(i)] = scalars[i].item();
    check_finite(out, "concat_scalars");
    bool any = false;
    for (const Tensor& s : scalars) any = any || s.requires_grad();
    if (tape && any) {
        out.set_requires_grad(true);
        out.ensure_grad();
        std::vector<Tensor> kept(scalars.begin(), scalars.end());
        std::vector<const void*> ids;
        for (Tensor& s : kept) {
            ids.push_back(s.id());
            if (s.requires_grad()) s.ensure_grad();
        }
        tape->record(std::move(ids), out.id(), [kept = std::move(kept), out]() mutable {
            auto g = out.grad();
            for (std::size_t i = 0; i < kept.size(); ++i)
                if (kept[i].requires_grad()) kept[i].grad()[0] += g[i];
        });
    }
    return out;
}

Tensor element(Tape* tape, const Tensor& vec, int index) {
    require_defined(vec, "element");
    require_vector(vec, "element");
    if (index < 0 || index >= vec.dim(0))
        throw IndexError("element: index " + std::to_string(index) + " outside " +
                         shape_str(vec.shape()));
    Tensor out = Tensor::scalar(vec.data()[static_cast<std::size_t>(index)]);
    if (prepare(tape, {&vec}, out)) {
        tape->record({vec.id()}, out.id(), [vec = vec, out, index]() mutable {
            vec.grad()[static_cast<std::size_t>(index)] += out.grad()[0];
        });
    }
    return out;
}

Tensor mul_scalar(Tape* tape, const Tensor& s, const Tensor& x) {
    require_defined(s, "mul_scalar");
    require_defined(x, "mul_scalar");
    require_scalar(s, "mul_scalar");
    const double sv = s.item();
    Tensor out(x.shape());
    auto X = x.data();
    auto O = out.data();
    for (std::size_t i = 0; i < O.size(); ++i) O[i] = sv * X[i];
    check_finite(out, "mul_scalar");
    if (prepare(tape, {&s, &x}, out)) {
        tape->record({s.id(), x.id()}, out.id(), [s = s, x = x, out]() mutable {
            auto g = out.grad();
            if (s.requires_grad()) {
                double acc = 0.0;
                auto X = x.data();
                for (std::size_t i = 0; i < g.size(); ++i) acc += g[i] * X[i];
                s.grad()[0] += acc;
            }
            if (x.requires_grad()) {
                auto gx = x.grad();
                const double sv = s.data()[0];
                for (std::size_t i = 0; i < g.size(); ++i) gx[i] += sv * g[i];
            }
        });
    }
    return out;
}

Tensor softmax(Tape* tape, const Tensor& logits) {
    require_defined(logits, "softmax");
    if (logits.rank() != 1 || logits.dim(0) < 1)
        throw ShapeError("softmax: expected a non-empty vector, got " + shape_str(logits.shape()));
    const int n = logits.dim(0);
    Tensor out({n});
    {
        auto X = logits.data();
        auto O = out.data();
        double m = X[0];
        for (int i = 1; i < n; ++i) m = std::max(m, X[static_cast<std::size_t>(i)]);
        double z = 0.0;
        for (int i = 0; i < n; ++i) {
            O[static_cast<std::size_t>(i)] = std::exp(X[static_cast<std::size_t>(i)] - m);
            z += O[static_cast<std::size_t>(i)];
        }
        for (int i = 0; i < n; ++i) O[static_cast<std::size_t>(i)] /= z;
    }
    check_finite(out, "softmax");
    if (prepare(tape, {&logits}, out)) {
        tape->record({logits.id()}, out.id(), [logits = logits, out]() mutable {
            auto g = out.grad();
            auto gx = logits.grad();
            auto Y = out.data();
            double inner = 0.0;
            for (std::size_t i = 0; i < g.size(); ++i) inner += g[i] * Y[i];
            for (std::size_t i = 0; i < g.size(); ++i) gx[i] += Y[i] * (g[i] - inner);
        });
    }
    return out;
}

MaxResult max1d(Tape* tape, const Tensor& x) {
    require_defined(x, "max1d");
    require_vector(x, "max1d");
    const int n = x.dim(0);
    auto X = x.data();
    int idx;
    if (tape && tape->replaying()) {
        idx = tape->next_pinned();
        if (idx < 0 || idx >= n) throw ContractError("max1d: pinned selection out of range");
    } else {
        idx = 0;
        for (int i = 1; i < n; ++i)
            if (X[static_cast<std::size_t>(i)] > X[static_cast<std::size_t>(idx)]) idx = i;
        if (tape) tape->note_selection(idx);
    }
    Tensor out = Tensor::scalar(X[static_cast<std::size_t>(idx)]);
    if (prepare(tape, {&x}, out)) {
        tape->record({x.id()}, out.id(), [x = x, out, idx]() mutable {
            x.grad()[static_cast<std::size_t>(idx)] += out.grad()[0];
        });
    }
    return {out, idx};
}

namespace {

void require_conv_shapes(const Tensor& input, const Tensor& filter, const Tensor& bias,
                         const char* op) {
    if (input.rank() != 3 || filter.rank() != 3)
        throw ShapeError(std::string(op) + ": expected 3-D input/filter, got " +
                         shape_str(input.shape()) + " and " + shape_str(filter.shape()));
    if (input.dim(1) != filter.dim(1) || input.dim(2) != filter.dim(2))
        throw ShapeError(std::string(op) + ": depth/channel mismatch " +
                         shape_str(input.shape()) + " vs " + shape_str(filter.shape()));
    if (filter.dim(0) > input.dim(0))
        throw ShapeError(std::string(op) + ": filter taller than input, " +
                         shape_str(filter.shape()) + " vs " + shape_str(input.shape()));
    require_scalar(bias, op);
}

double window_response(const Tensor& input, const Tensor& filter, const Tensor& bias,
                       int start) {
    const int h = filter.dim(0), d = filter.dim(1), k = filter.dim(2);
    const std::size_t plane = static_cast<std::size_t>(d) * k;
    auto I = input.data();
    auto F = filter.data();
    double acc = bias.item();
    const double* in = I.data() + static_cast<std::size_t>(start) * plane;
    const double* fw = F.data();
    const std::size_t count = static_cast<std::size_t>(h) * plane;
    for (std::size_t i = 0; i < count; ++i) acc += in[i] * fw[i];
    return acc;
}

// shared backward rule for one convolution window, active only when the
// pre-activation was positive (ReLU gate)
void conv_backward(const Tensor& input, const Tensor& filter, const Tensor& bias,
                   const Tensor& out, int start, double response) {
    if (response <= 0.0) return;
    const double g = out.grad()[0];
    if (g == 0.0) return;
    const int h = filter.dim(0), d = filter.dim(1), k = filter.dim(2);
    const std::size_t plane = static_cast<std::size_t>(d) * k;
    const std::size_t count = static_cast<std::size_t>(h) * plane;
    const std::size_t off = static_cast<std::size_t>(start) * plane;
    if (input.requires_grad()) {
        auto gi = const_cast<Tensor&>(input).grad();
        auto F = filter.data();
        for (std::size_t i = 0; i < count; ++i) gi[off + i] += g * F[i];
    }
    if (filter.requires_grad()) {
        auto gf = const_cast<Tensor&>(filter).grad();
        auto I = input.data();
        for (std::size_t i = 0; i < count; ++i) gf[i] += g * I[off + i];
    }
    if (bias.requires_grad()) const_cast<Tensor&>(bias).grad()[0] += g;
}

}  // namespace

Tensor conv_window(Tape* tape, const Tensor& input, const Tensor& filter, const Tensor& bias,
                   int start) {
    require_defined(input, "conv_window");
    require_defined(filter, "conv_window");
    require_defined(bias, "conv_window");
    require_conv_shapes(input, filter, bias, "conv_window");
    const int l = input.dim(0), h = filter.dim(0);
    if (start < 0 || start > l - h)
        throw IndexError("conv_window: window [" + std::to_string(start) + ", " +
                         std::to_string(start + h) + ") outside input of length " +
                         std::to_string(l));
    const double r = window_response(input, filter, bias, start);
    Tensor out = Tensor::scalar(r > 0.0 ? r : 0.0);
    check_finite(out, "conv_window");
    if (prepare(tape, {&input, &filter, &bias}, out)) {
        tape->record({input.id(), filter.id(), bias.id()}, out.id(),
                     [input = input, filter = filter, bias = bias, out, start, r]() {
                         conv_backward(input, filter, bias, out, start, r);
                     });
    }
    return out;
}

MaxResult conv_max(Tape* tape, const Tensor& input, const Tensor& filter, const Tensor& bias) {
    require_defined(input, "conv_max");
    require_defined(filter, "conv_max");
    require_defined(bias, "conv_max");
    require_conv_shapes(input, filter, bias, "conv_max");
    const int l = input.dim(0), h = filter.dim(0);
    const int positions = l - h + 1;
    int best;
    double best_r;
    if (tape && tape->replaying()) {
        best = tape->next_pinned();
        if (best < 0 || best >= positions)
            throw ContractError("conv_max: pinned selection out of range");
        best_r = window_response(input, filter, bias, best);
    } else {
        best = 0;
        best_r = window_response(input, filter, bias, 0);
        double best_z = best_r > 0.0 ? best_r : 0.0;
        for (int s = 1; s < positions; ++s) {
            const double r = window_response(input, filter, bias, s);
            const double z = r > 0.0 ? r : 0.0;
            if (z > best_z) {
                best_z = z;
                best_r = r;
                best = s;
            }
        }
        if (tape) tape->note_selection(best);
    }
    Tensor out = Tensor::scalar(best_r > 0.0 ? best_r : 0.0);
    check_finite(out, "conv_max");
    if (prepare(tape, {&input, &filter, &bias}, out)) {
        tape->record({input.id(), filter.id(), bias.id()}, out.id(),
                     [input = input, filter = filter, bias = bias, out, best, best_r]() {
                         conv_backward(input, filter, bias, out, best, best_r);
                     });
    }
    return {out, best};
}

}  // namespace rns
