// Copyright (C) 2026 The nnaqat Authors
// SPDX-License-Identifier: Apache-2.0

#include "nnaqat/autodiff.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "nnaqat/error.hpp"

namespace nnaqat {

const Tensor& Var::value() const { return tape_->value(id_); }
const Tensor& Var::grad() const { return tape_->grad(id_); }

Var Tape::leaf(Tensor value) { return record(std::move(value), nullptr); }

Var Tape::record(Tensor value, BackwardFn backward) {
  Tensor grad(value.rows(), value.cols());
  nodes_.push_back(Node{std::move(value), std::move(grad), std::move(backward)});
  return Var(this, nodes_.size() - 1);
}

void Tape::backward(const Var& loss) {
  if (loss.tape() != this) {
    throw Error(ErrorCode::kInvalidArgument, "loss belongs to a different tape");
  }
  const Tensor& lv = nodes_[loss.id()].value;
  if (lv.rows() != 1 || lv.cols() != 1) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("backward needs a scalar loss, got {}", lv.shape_string()));
  }
  for (Node& n : nodes_) n.grad.fill(0.0);
  nodes_[loss.id()].grad[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    if (nodes_[i].backward) nodes_[i].backward(*this, i);
  }
}

double clipped_cosine(double v) {
  const double r = std::abs(v - std::nearbyint(v));
  if (r >= 0.25) return 0.0;
  constexpr long double kTwoPi = 2.0L * std::numbers::pi_v<long double>;
  // cos near the zero crossing is evaluated as sin of the (exact) distance to
  // the quarter point, which keeps the result accurate to an ulp.
  if (r <= 0.125) return static_cast<double>(std::cos(kTwoPi * static_cast<long double>(r)));
  return static_cast<double>(std::sin(kTwoPi * (0.25L - static_cast<long double>(r))));
}

double ste_factor(const SteConfig& ste, double x, double bin_width) {
  if (ste.kind == SteConfig::Kind::kIdentity) return 1.0;
  const double u = ste.unit == SteConfig::CosineUnit::kPerBin ? x / bin_width : x;
  return clipped_cosine(ste.frequency * u);
}

namespace ad {

namespace {

Tape& tape_of(const Var& a) {
  if (!a.valid()) throw Error(ErrorCode::kInvalidArgument, "operation on an empty Var");
  return *a.tape();
}

Tape& tape_of(const Var& a, const Var& b) {
  Tape& t = tape_of(a);
  if (b.tape() != &t) throw Error(ErrorCode::kInvalidArgument, "operands on different tapes");
  return t;
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
  throw Error(ErrorCode::kShapeMismatch,
              fmt::format("{}: incompatible shapes {} and {}", op, a.shape_string(),
                          b.shape_string()));
}

template <typename F, typename D>
Var unary(const Var& a, F f, D dfdx_from_input_and_output) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = f(av[i]);
  const std::size_t ia = a.id();
  return t.record(std::move(out), [ia, dfdx_from_input_and_output](Tape& tp, std::size_t self) {
    const Tensor& x = tp.value(ia);
    const Tensor& y = tp.value(self);
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfdx_from_input_and_output(x[i], y[i]);
  });
}

}  // namespace

Var matmul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.rows()) shape_error("matmul", av, bv);
  Tensor out(av.rows(), bv.cols());
  gemm_nn_acc(av, bv, out);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(std::move(out), [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    gemm_nt_acc(g, tp.value(ib), tp.grad_mut(ia));
    gemm_tn_acc(tp.value(ia), g, tp.grad_mut(ib));
  });
}

Var matmul_nt(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (av.cols() != bv.cols()) shape_error("matmul_nt", av, bv);
  Tensor out(av.rows(), bv.rows());
  gemm_nt_acc(av, bv, out);
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(std::move(out), [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    gemm_nn_acc(g, tp.value(ib), tp.grad_mut(ia));
    gemm_tn_acc(g, tp.value(ia), tp.grad_mut(ib));
  });
}

namespace {

// sign = +1 for add, -1 for sub.
Var add_like(const Var& a, const Var& b, double sign, const char* name) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  const bool broadcast = !av.same_shape(bv);
  if (broadcast && !(bv.rows() == 1 && bv.cols() == av.cols())) shape_error(name, av, bv);
  Tensor out = av;
  const std::size_t cols = av.cols();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * bv[broadcast ? i % cols : i];
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(std::move(out), [ia, ib, sign, broadcast, cols](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    Tensor& gb = tp.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gb[broadcast ? i % cols : i] += sign * g[i];
  });
}

}  // namespace

Var add(const Var& a, const Var& b) { return add_like(a, b, 1.0, "add"); }
Var sub(const Var& a, const Var& b) { return add_like(a, b, -1.0, "sub"); }

Var mul(const Var& a, const Var& b) {
  Tape& t = tape_of(a, b);
  const Tensor& av = a.value();
  const Tensor& bv = b.value();
  if (!av.same_shape(bv)) shape_error("mul", av, bv);
  Tensor out(av.rows(), av.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = av[i] * bv[i];
  const std::size_t ia = a.id();
  const std::size_t ib = b.id();
  return t.record(std::move(out), [ia, ib](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& x = tp.value(ia);
    const Tensor& y = tp.value(ib);
    Tensor& gx = tp.grad_mut(ia);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i] * y[i];
    Tensor& gy = tp.grad_mut(ib);
    for (std::size_t i = 0; i < g.size(); ++i) gy[i] += g[i] * x[i];
  });
}

Var scale(const Var& a, double s) {
  return unary(a, [s](double x) { return s * x; }, [s](double, double) { return s; });
}

Var add_scalar(const Var& a, double s) {
  return unary(a, [s](double x) { return x + s; }, [](double, double) { return 1.0; });
}

Var square(const Var& a) {
  return unary(a, [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sigmoid(const Var& a) {
  return unary(
      a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& a) {
  return unary(a, [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var relu(const Var& a) {
  return unary(
      a, [](double x) { return x > 0.0 ? x : 0.0; },
      [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw Error(ErrorCode::kInvalidArgument, "concat of zero tensors");
  Tape& t = tape_of(parts.front());
  const std::size_t rows = parts.front().value().rows();
  std::size_t cols = 0;
  std::vector<std::size_t> ids;
  std::vector<std::size_t> widths;
  for (const Var& p : parts) {
    if (p.tape() != &t) throw Error(ErrorCode::kInvalidArgument, "operands on different tapes");
    if (p.value().rows() != rows) shape_error("concat_cols", parts.front().value(), p.value());
    ids.push_back(p.id());
    widths.push_back(p.value().cols());
    cols += p.value().cols();
  }
  Tensor out(rows, cols);
  std::size_t offset = 0;
  for (const Var& p : parts) {
    const Tensor& v = p.value();
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < v.cols(); ++c) out(r, offset + c) = v(r, c);
    }
    offset += v.cols();
  }
  return t.record(std::move(out), [ids, widths](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    std::size_t off = 0;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      Tensor& gk = tp.grad_mut(ids[k]);
      for (std::size_t r = 0; r < g.rows(); ++r) {
        for (std::size_t c = 0; c < widths[k]; ++c) gk(r, c) += g(r, off + c);
      }
      off += widths[k];
    }
  });
}

Var slice_cols(const Var& a, std::size_t start, std::size_t count) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  if (start + count > av.cols()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("slice_cols [{}, {}) out of {}", start, start + count,
                            av.shape_string()));
  }
  Tensor out(av.rows(), count);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < count; ++c) out(r, c) = av(r, start + c);
  }
  const std::size_t ia = a.id();
  return t.record(std::move(out), [ia, start, count](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      for (std::size_t c = 0; c < count; ++c) ga(r, start + c) += g(r, c);
    }
  });
}

Var gather_rows(const Var& a, const std::vector<int>& ids) {
  Tape& t = tape_of(a);
  const Tensor& av = a.value();
  Tensor out(ids.size(), av.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] < 0 || static_cast<std::size_t>(ids[r]) >= av.rows()) {
      throw Error(ErrorCode::kInvalidArgument,
                  fmt::format("row id {} outside table of {} rows", ids[r], av.rows()));
    }
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) = av(ids[r], c);
  }
  const std::size_t ia = a.id();
  return t.record(std::move(out), [ia, ids](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& ga = tp.grad_mut(ia);
    for (std::size_t r = 0; r < ids.size(); ++r) {
      for (std::size_t c = 0; c < g.cols(); ++c) ga(ids[r], c) += g(r, c);
    }
  });
}

Var sum(const Var& a) {
  Tape& t = tape_of(a);
  double s = 0.0;
  for (double v : a.value().data()) s += v;
  const std::size_t ia = a.id();
  return t.record(Tensor::scalar(s), [ia](Tape& tp, std::size_t self) {
    const double g = tp.grad(self)[0];
    for (double& v : tp.grad_mut(ia).data()) v += g;
  });
}

Var mean(const Var& a) {
  const std::size_t n = a.value().size();
  if (n == 0) throw Error(ErrorCode::kShapeMismatch, "mean of an empty tensor");
  return scale(sum(a), 1.0 / static_cast<double>(n));
}

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
  Tape& t = tape_of(logits);
  const Tensor& z = logits.value();
  if (labels.size() != z.rows()) {
    throw Error(ErrorCode::kShapeMismatch,
                fmt::format("{} labels for logits {}", labels.size(), z.shape_string()));
  }
  Tensor probs(z.rows(), z.cols());
  double loss = 0.0;
  for (std::size_t r = 0; r < z.rows(); ++r) {
    if (labels[r] < 0 || static_cast<std::size_t>(labels[r]) >= z.cols()) {
      throw Error(ErrorCode::kInvalidArgument, fmt::format("label {} out of range", labels[r]));
    }
    double mx = z(r, 0);
    for (std::size_t c = 1; c < z.cols(); ++c) mx = std::max(mx, z(r, c));
    double denom = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) denom += std::exp(z(r, c) - mx);
    for (std::size_t c = 0; c < z.cols(); ++c) probs(r, c) = std::exp(z(r, c) - mx) / denom;
    loss -= (z(r, labels[r]) - mx) - std::log(denom);
  }
  const double inv_rows = 1.0 / static_cast<double>(z.rows());
  loss *= inv_rows;
  const std::size_t il = logits.id();
  return t.record(Tensor::scalar(loss),
                  [il, probs = std::move(probs), labels, inv_rows](Tape& tp, std::size_t self) {
                    const double g = tp.grad(self)[0] * inv_rows;
                    Tensor& gl = tp.grad_mut(il);
                    for (std::size_t r = 0; r < probs.rows(); ++r) {
                      for (std::size_t c = 0; c < probs.cols(); ++c) {
                        const double target = static_cast<int>(c) == labels[r] ? 1.0 : 0.0;
                        gl(r, c) += g * (probs(r, c) - target);
                      }
                    }
                  });
}

Var quantize(const Var& x, const QuantizeSpec& spec, std::vector<double>* row_scales) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out(xv.rows(), xv.cols());
  std::vector<double> scales(xv.rows(), 1.0);
  for (std::size_t r = 0; r < xv.rows(); ++r) {
    const auto row = xv.row_span(r);
    if (spec.dynamic) {
      const DynamicResult q = quantize_dynamic(row, spec.format, *spec.dynamic);
      scales[r] = q.scale;
      for (std::size_t c = 0; c < row.size(); ++c) out(r, c) = q.values[c];
    } else {
      for (std::size_t c = 0; c < row.size(); ++c) {
        out(r, c) = quantize_static(row[c], spec.format, spec.mode);
      }
    }
  }
  if (row_scales) *row_scales = scales;
  const std::size_t ix = x.id();
  const SteConfig ste = spec.ste;
  const double resolution = spec.format.resolution();
  return t.record(std::move(out), [ix, ste, resolution, scales = std::move(scales)](
                                      Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& in = tp.value(ix);
    Tensor& gx = tp.grad_mut(ix);
    for (std::size_t r = 0; r < g.rows(); ++r) {
      const double bin = resolution * scales[r];
      for (std::size_t c = 0; c < g.cols(); ++c) {
        gx(r, c) += g(r, c) * ste_factor(ste, in(r, c), bin);
      }
    }
  });
}

Var activation(const Var& x, const PwlTable& table) {
  Tape& t = tape_of(x);
  const Tensor& xv = x.value();
  Tensor out(xv.rows(), xv.cols());
  for (std::size_t i = 0; i < xv.size(); ++i) out[i] = table.eval(xv[i]);
  const std::size_t ix = x.id();
  const ActivationKind kind = table.kind();
  return t.record(std::move(out), [ix, kind](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    const Tensor& in = tp.value(ix);
    Tensor& gx = tp.grad_mut(ix);
    for (std::size_t i = 0; i < g.size(); ++i) {
      double d;
      if (kind == ActivationKind::kTanh) {
        const double th = std::tanh(in[i]);
        d = 1.0 - th * th;
      } else {
        const double s = 1.0 / (1.0 + std::exp(-in[i]));
        d = s * (1.0 - s);
      }
      gx[i] += g[i] * d;
    }
  });
}

Var straight_through(const Var& x, Tensor forward_value) {
  Tape& t = tape_of(x);
  if (!forward_value.same_shape(x.value())) {
    shape_error("straight_through", x.value(), forward_value);
  }
  const std::size_t ix = x.id();
  return t.record(std::move(forward_value), [ix](Tape& tp, std::size_t self) {
    const Tensor& g = tp.grad(self);
    Tensor& gx = tp.grad_mut(ix);
    for (std::size_t i = 0; i < g.size(); ++i) gx[i] += g[i];
  });
}

}  // namespace ad
}  // namespace nnaqat
