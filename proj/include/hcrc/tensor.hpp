#pragma once

// Minimal dense-matrix reverse-mode autodiff. A Tensor is a shared handle to
// a matrix payload; a Tape records every op applied through it and replays
// the adjoints in reverse. Gradient buffers live on the tape, keyed by
// tensor id, so parameters can be reused across many tapes.

#include <cmath>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hcrc/common.hpp"
#include "hcrc/matrix.hpp"

namespace hcrc {

namespace detail {
inline int64_t next_tensor_id() {
    static int64_t counter = 0;
    return ++counter;
}
}  // namespace detail

class Tensor {
    struct Payload {
        Matrix value;
        bool requires_grad = false;
        int64_t id = 0;
    };
    std::shared_ptr<Payload> p_;

    Tensor(Matrix m, bool rg) : p_(std::make_shared<Payload>()) {
        p_->value = std::move(m);
        p_->requires_grad = rg;
        p_->id = detail::next_tensor_id();
    }

public:
    Tensor() = default;

    static Tensor param(Matrix m) { return Tensor(std::move(m), true); }
    static Tensor constant(Matrix m) { return Tensor(std::move(m), false); }
    static Tensor scalar(double v, bool requires_grad = false) {
        Matrix m(1, 1);
        m.a[0] = v;
        return Tensor(std::move(m), requires_grad);
    }

    bool defined() const { return static_cast<bool>(p_); }
    const Matrix& value() const { return p_->value; }
    Matrix& value() { return p_->value; }
    double item() const {
        if (p_->value.size() != 1) throw Error("item: tensor is not 1x1");
        return p_->value.a[0];
    }
    size_t rows() const { return p_->value.rows; }
    size_t cols() const { return p_->value.cols; }
    bool requires_grad() const { return p_->requires_grad; }
    int64_t id() const { return p_->id; }

    Tensor clone_detached() const { return constant(p_->value); }
};

// Records op nodes in execution order (a valid topological order) and walks
// them once in reverse on backward().
class Tape {
public:
    Tensor matmul(Tensor a, Tensor b) {
        require(a.cols() == b.rows(), "matmul", a, b);
        Matrix out(a.rows(), b.cols());
        mm_nn(a.value(), b.value(), out);
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) mm_nt_acc(g, b.value(), t.grad_buf(a));   // dA += g * B^T
            if (b.requires_grad()) mm_tn_acc(a.value(), g, t.grad_buf(b));   // dB += A^T * g
        });
    }

    // a^T * b  (a: n x k, b: n x m -> k x m)
    Tensor matmul_tn(Tensor a, Tensor b) {
        require(a.rows() == b.rows(), "matmul_tn", a, b);
        Matrix out(a.cols(), b.cols());
        mm_tn_acc(a.value(), b.value(), out);
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) mm_nt_acc(b.value(), g, t.grad_buf(a));  // dA += B * g^T
            if (b.requires_grad()) mm_nn_acc(a.value(), g, t.grad_buf(b));  // dB += A * g
        });
    }

    // a * b^T  (a: n x d, b: m x d -> n x m)
    Tensor matmul_nt(Tensor a, Tensor b) {
        require(a.cols() == b.cols(), "matmul_nt", a, b);
        Matrix out(a.rows(), b.rows());
        mm_nt_acc(a.value(), b.value(), out);
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) mm_nn_acc(g, b.value(), t.grad_buf(a));
            if (b.requires_grad()) mm_tn_acc(g, a.value(), t.grad_buf(b));
        });
    }

    Tensor add(Tensor a, Tensor b) {
        require(a.value().same_shape(b.value()), "add", a, b);
        Matrix out = a.value();
        for (size_t i = 0; i < out.size(); ++i) out.a[i] += b.value().a[i];
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) acc(t.grad_buf(a), g);
            if (b.requires_grad()) acc(t.grad_buf(b), g);
        });
    }

    Tensor sub(Tensor a, Tensor b) { return add(a, scale(b, -1.0)); }

    // a (n x c) + bias (1 x c) broadcast over rows; the only broadcast form
    Tensor add_rowvec(Tensor a, Tensor bias) {
        require(bias.rows() == 1 && bias.cols() == a.cols(), "add_rowvec", a, bias);
        Matrix out = a.value();
        for (size_t i = 0; i < out.rows; ++i)
            for (size_t j = 0; j < out.cols; ++j) out.at(i, j) += bias.value().a[j];
        return emit(std::move(out), {a, bias}, [a, bias](Tape& t, const Matrix& g) {
            if (a.requires_grad()) acc(t.grad_buf(a), g);
            if (bias.requires_grad()) {
                Matrix& gb = t.grad_buf(bias);
                for (size_t i = 0; i < g.rows; ++i)
                    for (size_t j = 0; j < g.cols; ++j) gb.a[j] += g.at(i, j);
            }
        });
    }

    Tensor mul(Tensor a, Tensor b) {
        require(a.value().same_shape(b.value()), "mul", a, b);
        Matrix out = a.value();
        for (size_t i = 0; i < out.size(); ++i) out.a[i] *= b.value().a[i];
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) {
                Matrix& ga = t.grad_buf(a);
                for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * b.value().a[i];
            }
            if (b.requires_grad()) {
                Matrix& gb = t.grad_buf(b);
                for (size_t i = 0; i < g.size(); ++i) gb.a[i] += g.a[i] * a.value().a[i];
            }
        });
    }

    Tensor div(Tensor a, Tensor b) {
        require(a.value().same_shape(b.value()), "div", a, b);
        Matrix out = a.value();
        for (size_t i = 0; i < out.size(); ++i) out.a[i] /= b.value().a[i];
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) {
                Matrix& ga = t.grad_buf(a);
                for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] / b.value().a[i];
            }
            if (b.requires_grad()) {
                Matrix& gb = t.grad_buf(b);
                for (size_t i = 0; i < g.size(); ++i) {
                    double bv = b.value().a[i];
                    gb.a[i] -= g.a[i] * a.value().a[i] / (bv * bv);
                }
            }
        });
    }

    Tensor scale(Tensor a, double c) {
        Matrix out = a.value();
        for (auto& x : out.a) x *= c;
        return emit(std::move(out), {a}, [a, c](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            for (size_t i = 0; i < g.size(); ++i) ga.a[i] += c * g.a[i];
        });
    }

    Tensor add_scalar(Tensor a, double c) {
        Matrix out = a.value();
        for (auto& x : out.a) x += c;
        return emit(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
            if (a.requires_grad()) acc(t.grad_buf(a), g);
        });
    }

    Tensor relu(Tensor a) {
        Matrix out = a.value();
        for (auto& x : out.a) x = x > 0.0 ? x : 0.0;
        return unary(a, std::move(out), [](double x, double y) { (void)y; return x > 0.0 ? 1.0 : 0.0; });
    }

    Tensor tanh(Tensor a) {
        Matrix out = a.value();
        for (auto& x : out.a) x = std::tanh(x);
        return unary(a, std::move(out), [](double, double y) { return 1.0 - y * y; });
    }

    Tensor sigmoid(Tensor a) {
        Matrix out = a.value();
        for (auto& x : out.a) x = stable_sigmoid(x);
        return unary(a, std::move(out), [](double, double y) { return y * (1.0 - y); });
    }

    Tensor exp(Tensor a) {
        Matrix out = a.value();
        for (auto& x : out.a) x = std::exp(x);
        return unary(a, std::move(out), [](double, double y) { return y; });
    }

    Tensor log(Tensor a) {
        Matrix out = a.value();
        for (auto& x : out.a) x = std::log(x);
        return unary(a, std::move(out), [](double x, double) { return 1.0 / x; });
    }

    Tensor square(Tensor a) {
        Matrix out = a.value();
        for (auto& x : out.a) x = x * x;
        return unary(a, std::move(out), [](double x, double) { return 2.0 * x; });
    }

    // Elementwise min; at ties the gradient routes to the first argument.
    Tensor minimum(Tensor a, Tensor b) {
        require(a.value().same_shape(b.value()), "minimum", a, b);
        Matrix out(a.rows(), a.cols());
        for (size_t i = 0; i < out.size(); ++i)
            out.a[i] = std::min(a.value().a[i], b.value().a[i]);
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            Matrix* ga = a.requires_grad() ? &t.grad_buf(a) : nullptr;
            Matrix* gb = b.requires_grad() ? &t.grad_buf(b) : nullptr;
            for (size_t i = 0; i < g.size(); ++i) {
                bool first = a.value().a[i] <= b.value().a[i];
                if (first && ga) ga->a[i] += g.a[i];
                if (!first && gb) gb->a[i] += g.a[i];
            }
        });
    }

    // Gradient is zero outside (lo, hi) and at the exact boundary.
    Tensor clamp(Tensor a, double lo, double hi) {
        Matrix out = a.value();
        for (auto& x : out.a) x = std::min(std::max(x, lo), hi);
        return emit(std::move(out), {a}, [a, lo, hi](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            for (size_t i = 0; i < g.size(); ++i) {
                double x = a.value().a[i];
                if (x > lo && x < hi) ga.a[i] += g.a[i];
            }
        });
    }

    Tensor concat_cols(Tensor a, Tensor b) {
        require(a.rows() == b.rows(), "concat_cols", a, b);
        Matrix out(a.rows(), a.cols() + b.cols());
        for (size_t i = 0; i < out.rows; ++i) {
            for (size_t j = 0; j < a.cols(); ++j) out.at(i, j) = a.value().at(i, j);
            for (size_t j = 0; j < b.cols(); ++j) out.at(i, a.cols() + j) = b.value().at(i, j);
        }
        return emit(std::move(out), {a, b}, [a, b](Tape& t, const Matrix& g) {
            if (a.requires_grad()) {
                Matrix& ga = t.grad_buf(a);
                for (size_t i = 0; i < ga.rows; ++i)
                    for (size_t j = 0; j < ga.cols; ++j) ga.at(i, j) += g.at(i, j);
            }
            if (b.requires_grad()) {
                Matrix& gb = t.grad_buf(b);
                for (size_t i = 0; i < gb.rows; ++i)
                    for (size_t j = 0; j < gb.cols; ++j) gb.at(i, j) += g.at(i, a.cols() + j);
            }
        });
    }

    // Stack 1 x c rows into n x c.
    Tensor stack_rows(const std::vector<Tensor>& rows) {
        if (rows.empty()) throw Error("stack_rows: empty input");
        size_t c = rows[0].cols();
        Matrix out(rows.size(), c);
        for (size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].rows() != 1 || rows[i].cols() != c)
                throw Error("stack_rows: row " + std::to_string(i) + " has wrong shape");
            for (size_t j = 0; j < c; ++j) out.at(i, j) = rows[i].value().at(0, j);
        }
        return emit(std::move(out), rows, [rows](Tape& t, const Matrix& g) {
            for (size_t i = 0; i < rows.size(); ++i) {
                if (!rows[i].requires_grad()) continue;
                Matrix& gr = t.grad_buf(rows[i]);
                for (size_t j = 0; j < g.cols; ++j) gr.a[j] += g.at(i, j);
            }
        });
    }

    // Concatenate n_i x c blocks vertically.
    Tensor concat_rows(const std::vector<Tensor>& blocks) {
        if (blocks.empty()) throw Error("concat_rows: empty input");
        size_t c = blocks[0].cols(), n = 0;
        for (auto& b : blocks) {
            if (b.cols() != c) throw Error("concat_rows: column mismatch");
            n += b.rows();
        }
        Matrix out(n, c);
        size_t r = 0;
        for (auto& b : blocks) {
            for (size_t i = 0; i < b.rows(); ++i, ++r)
                for (size_t j = 0; j < c; ++j) out.at(r, j) = b.value().at(i, j);
        }
        return emit(std::move(out), blocks, [blocks](Tape& t, const Matrix& g) {
            size_t r = 0;
            for (auto& b : blocks) {
                if (b.requires_grad()) {
                    Matrix& gb = t.grad_buf(b);
                    for (size_t i = 0; i < b.rows(); ++i)
                        for (size_t j = 0; j < g.cols; ++j) gb.at(i, j) += g.at(r + i, j);
                }
                r += b.rows();
            }
        });
    }

    // Mean over rows: n x c -> 1 x c.
    Tensor row_mean(Tensor a) {
        Matrix out(1, a.cols());
        const double inv = 1.0 / static_cast<double>(a.rows());
        for (size_t i = 0; i < a.rows(); ++i)
            for (size_t j = 0; j < a.cols(); ++j) out.a[j] += a.value().at(i, j) * inv;
        return emit(std::move(out), {a}, [a, inv](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            for (size_t i = 0; i < ga.rows; ++i)
                for (size_t j = 0; j < ga.cols; ++j) ga.at(i, j) += g.a[j] * inv;
        });
    }

    // Sum of each row: n x c -> n x 1.
    Tensor sum_rows(Tensor a) {
        Matrix out(a.rows(), 1);
        for (size_t i = 0; i < a.rows(); ++i) {
            double s = 0.0;
            for (size_t j = 0; j < a.cols(); ++j) s += a.value().at(i, j);
            out.a[i] = s;
        }
        return emit(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            for (size_t i = 0; i < ga.rows; ++i)
                for (size_t j = 0; j < ga.cols; ++j) ga.at(i, j) += g.a[i];
        });
    }

    Tensor sum_all(Tensor a) {
        Matrix out(1, 1);
        for (double x : a.value().a) out.a[0] += x;
        return emit(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            for (auto& x : ga.a) x += g.a[0];
        });
    }

    Tensor mean_all(Tensor a) { return scale(sum_all(a), 1.0 / static_cast<double>(a.value().size())); }

    Tensor softmax_rows(Tensor a) {
        Matrix out = a.value();
        for (size_t i = 0; i < out.rows; ++i) {
            double mx = out.at(i, 0);
            for (size_t j = 1; j < out.cols; ++j) mx = std::max(mx, out.at(i, j));
            double s = 0.0;
            for (size_t j = 0; j < out.cols; ++j) {
                out.at(i, j) = std::exp(out.at(i, j) - mx);
                s += out.at(i, j);
            }
            for (size_t j = 0; j < out.cols; ++j) out.at(i, j) /= s;
        }
        Tensor result = emit_value(std::move(out), {a});
        attach(result, [a, result](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            const Matrix& y = result.value();
            for (size_t i = 0; i < y.rows; ++i) {
                double dotgy = 0.0;
                for (size_t j = 0; j < y.cols; ++j) dotgy += g.at(i, j) * y.at(i, j);
                for (size_t j = 0; j < y.cols; ++j)
                    ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dotgy);
            }
        });
        return result;
    }

    // Rows scaled to unit L2 norm, with a 1e-12 floor on the norm.
    Tensor l2_normalize_rows(Tensor a) {
        constexpr double kEps = 1e-12;
        Matrix out = a.value();
        std::vector<double> norms(out.rows);
        for (size_t i = 0; i < out.rows; ++i) {
            double n = std::max(l2_norm(out.row(i), out.cols), kEps);
            norms[i] = n;
            for (size_t j = 0; j < out.cols; ++j) out.at(i, j) /= n;
        }
        return emit(std::move(out), {a}, [a, norms](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            const Matrix& x = a.value();
            for (size_t i = 0; i < x.rows; ++i) {
                double n = norms[i];
                bool clamped = l2_norm(x.row(i), x.cols) < kEps;
                double gx = 0.0;
                for (size_t j = 0; j < x.cols; ++j) gx += g.at(i, j) * x.at(i, j);
                for (size_t j = 0; j < x.cols; ++j) {
                    double d = g.at(i, j) / n;
                    if (!clamped) d -= x.at(i, j) * gx / (n * n * n);
                    ga.at(i, j) += d;
                }
            }
        });
    }

    // Pairwise cosine: (n x d, m x d) -> n x m with S[i][j] = cos(u_i, v_j).
    Tensor cosine_similarity_matrix(Tensor u, Tensor v) {
        require(u.cols() == v.cols(), "cosine_similarity_matrix", u, v);
        return matmul_nt(l2_normalize_rows(u), l2_normalize_rows(v));
    }

    // Diagonal of a square matrix as n x 1.
    Tensor diag_part(Tensor a) {
        require(a.rows() == a.cols(), "diag_part", a, a);
        Matrix out(a.rows(), 1);
        for (size_t i = 0; i < a.rows(); ++i) out.a[i] = a.value().at(i, i);
        return emit(std::move(out), {a}, [a](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            for (size_t i = 0; i < g.rows; ++i) ga.at(i, i) += g.a[i];
        });
    }

    // y = S * x with S constant (no gradient into S).
    Tensor spmm(std::shared_ptr<const SparseMatrix> s, Tensor x) {
        if (!s) throw Error("spmm: null sparse matrix");
        Matrix out = s->multiply(x.value());
        return emit(std::move(out), {x}, [s, x](Tape& t, const Matrix& g) {
            if (!x.requires_grad()) return;
            // dX += S^T * g, scattered row by row
            Matrix& gx = t.grad_buf(x);
            for (size_t i = 0; i < s->rows; ++i)
                for (size_t p = s->indptr[i]; p < s->indptr[i + 1]; ++p) {
                    const double w = s->values[p];
                    double* dst = gx.row(s->indices[p]);
                    const double* src = g.row(i);
                    for (size_t c = 0; c < g.cols; ++c) dst[c] += w * src[c];
                }
        });
    }

    // Seeds d(loss)/d(loss) = 1 and runs all recorded adjoints in reverse.
    void backward(Tensor loss) {
        if (loss.value().size() != 1) throw Error("backward: loss must be 1x1");
        if (backward_done_) throw Error("backward: tape already differentiated; reset() first");
        backward_done_ = true;
        grads_[loss.id()] = Matrix(1, 1, 1.0);
        for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it) {
            auto g = grads_.find(it->out_id);
            if (g == grads_.end()) continue;  // branch does not influence the loss
            it->backprop(*this, g->second);
        }
    }

    // Gradient of the loss w.r.t. t; zeros if t never influenced the loss.
    Matrix grad(const Tensor& t) const {
        auto it = grads_.find(t.id());
        if (it == grads_.end()) return Matrix(t.rows(), t.cols());
        return it->second;
    }

    bool has_grad(const Tensor& t) const { return grads_.contains(t.id()); }

    void reset() {
        nodes_.clear();
        grads_.clear();
        backward_done_ = false;
    }

    size_t num_nodes() const { return nodes_.size(); }

    Matrix& grad_buf(const Tensor& t) {
        auto [it, inserted] = grads_.try_emplace(t.id());
        if (inserted) it->second = Matrix(t.rows(), t.cols());
        return it->second;
    }

private:
    struct Node {
        int64_t out_id;
        std::function<void(Tape&, const Matrix&)> backprop;
    };
    std::vector<Node> nodes_;
    std::unordered_map<int64_t, Matrix> grads_;
    bool backward_done_ = false;

    static double stable_sigmoid(double x) {
        if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
        double e = std::exp(x);
        return e / (1.0 + e);
    }

    static void require(bool ok, const char* op, const Tensor& a, const Tensor& b) {
        if (ok) return;
        throw Error(std::string(op) + ": shape mismatch (" + std::to_string(a.rows()) + "x" +
                    std::to_string(a.cols()) + ", " + std::to_string(b.rows()) + "x" +
                    std::to_string(b.cols()) + ")");
    }

    static void check_healthy(const Matrix& m) {
#ifndef NDEBUG
        for (double x : m.a)
            if (!std::isfinite(x)) throw Error("tensor op produced a non-finite value");
#else
        (void)m;
#endif
    }

    Tensor emit_value(Matrix out, const std::vector<Tensor>& inputs) {
        check_healthy(out);
        bool rg = false;
        for (auto& t : inputs) rg = rg || t.requires_grad();
        return rg ? Tensor::param(std::move(out)) : Tensor::constant(std::move(out));
    }

    void attach(const Tensor& out, std::function<void(Tape&, const Matrix&)> fn) {
        if (out.requires_grad()) nodes_.push_back({out.id(), std::move(fn)});
    }

    Tensor emit(Matrix out, const std::vector<Tensor>& inputs,
                std::function<void(Tape&, const Matrix&)> fn) {
        check_healthy(out);
        bool rg = false;
        for (auto& t : inputs) rg = rg || t.requires_grad();
        Tensor result = rg ? Tensor::param(std::move(out)) : Tensor::constant(std::move(out));
        if (rg) nodes_.push_back({result.id(), std::move(fn)});
        return result;
    }

    template <typename DFn>
    Tensor unary(Tensor a, Matrix out, DFn dfn) {
        Tensor result = emit_value(std::move(out), {a});
        attach(result, [a, result, dfn](Tape& t, const Matrix& g) {
            if (!a.requires_grad()) return;
            Matrix& ga = t.grad_buf(a);
            const Matrix& x = a.value();
            const Matrix& y = result.value();
            for (size_t i = 0; i < g.size(); ++i) ga.a[i] += g.a[i] * dfn(x.a[i], y.a[i]);
        });
        return result;
    }

    // out += a * b
    static void mm_nn(const Matrix& a, const Matrix& b, Matrix& out) { mm_nn_acc(a, b, out); }

    static void mm_nn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
        for (size_t i = 0; i < a.rows; ++i) {
            const double* ai = a.row(i);
            double* oi = out.row(i);
            for (size_t k = 0; k < a.cols; ++k) {
                const double v = ai[k];
                if (v == 0.0) continue;
                const double* bk = b.row(k);
                for (size_t j = 0; j < b.cols; ++j) oi[j] += v * bk[j];
            }
        }
    }

    // out += a^T * b
    static void mm_tn_acc(const Matrix& a, const Matrix& b, Matrix& out) {
        for (size_t k = 0; k < a.rows; ++k) {
            const double* ak = a.row(k);
            const double* bk = b.row(k);
            for (size_t i = 0; i < a.cols; ++i) {
                const double v = ak[i];
                if (v == 0.0) continue;
                double* oi = out.row(i);
                for (size_t j = 0; j < b.cols; ++j) oi[j] += v * bk[j];
            }
        }
    }

    // out += a * b^T
    static void mm_nt_acc(const Matrix& a, const Matrix& b, Matrix& out) {
        for (size_t i = 0; i < a.rows; ++i) {
            const double* ai = a.row(i);
            for (size_t j = 0; j < b.rows; ++j) out.at(i, j) += dot(ai, b.row(j), a.cols);
        }
    }
};

enum class OptKind { Sgd, Adam };

// SGD or Adam over a parameter list, gradients read from a differentiated
// tape. Adam keeps per-tensor moment buffers and applies bias correction.
class Optimizer {
public:
    static Optimizer sgd(double lr) { return Optimizer(OptKind::Sgd, lr); }
    static Optimizer adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8) {
        Optimizer o(OptKind::Adam, lr);
        o.beta1_ = beta1;
        o.beta2_ = beta2;
        o.eps_ = eps;
        return o;
    }

    void step(std::span<Tensor> params, const Tape& tape) {
        ++step_count_;
        for (auto& p : params) {
            if (!tape.has_grad(p)) continue;
            Matrix g = tape.grad(p);
            if (kind_ == OptKind::Sgd) {
                for (size_t i = 0; i < g.size(); ++i) p.value().a[i] -= lr_ * g.a[i];
                continue;
            }
            Matrix& m = moment(m_, p);
            Matrix& v = moment(v_, p);
            const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(step_count_));
            const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(step_count_));
            for (size_t i = 0; i < g.size(); ++i) {
                m.a[i] = beta1_ * m.a[i] + (1.0 - beta1_) * g.a[i];
                v.a[i] = beta2_ * v.a[i] + (1.0 - beta2_) * g.a[i] * g.a[i];
                double mhat = m.a[i] / bc1;
                double vhat = v.a[i] / bc2;
                p.value().a[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
            }
        }
    }

    void step(std::vector<Tensor>& params, const Tape& tape) {
        step(std::span<Tensor>(params), tape);
    }

    long steps() const { return step_count_; }
    double learning_rate() const { return lr_; }
    OptKind kind() const { return kind_; }

private:
    Optimizer(OptKind k, double lr) : kind_(k), lr_(lr) {}

    Matrix& moment(std::unordered_map<int64_t, Matrix>& store, const Tensor& p) {
        auto [it, inserted] = store.try_emplace(p.id());
        if (inserted) it->second = Matrix(p.rows(), p.cols());
        return it->second;
    }

    OptKind kind_;
    double lr_;
    double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
    long step_count_ = 0;
    std::unordered_map<int64_t, Matrix> m_, v_;
};

}  // namespace hcrc
