#include "dcat/ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dcat {

namespace {

template <typename S>
using RowMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename S>
using ConstMap = Eigen::Map<const RowMat<S>>;
template <typename S>
using MutMap = Eigen::Map<RowMat<S>>;

template <typename S>
using NodePtr = std::shared_ptr<detail::Node<S>>;
template <typename S>
using Array = typename detail::Node<S>::Array;

void require_rank(const Shape& shape, int rank, const char* op) {
  if (static_cast<int>(shape.size()) != rank) {
    throw DimensionError(std::string(op) + ": expected rank " + std::to_string(rank) +
                         ", got " + shape_string(shape));
  }
}

// Maps every flat index of `out` to the flat index of `in` it reads from.
std::vector<Index> broadcast_map(const Shape& in, const Shape& out) {
  const int r = static_cast<int>(out.size());
  std::vector<Index> strides(static_cast<std::size_t>(r));
  Index s = 1;
  for (int d = r - 1; d >= 0; --d) {
    strides[d] = in[d] == 1 ? 0 : s;
    s *= in[d];
  }
  const Index n = shape_size(out);
  std::vector<Index> map(static_cast<std::size_t>(n));
  std::vector<Index> counter(static_cast<std::size_t>(r), 0);
  Index pos = 0;
  for (Index o = 0; o < n; ++o) {
    map[o] = pos;
    for (int d = r - 1; d >= 0; --d) {
      ++counter[d];
      pos += strides[d];
      if (counter[d] < out[d]) break;
      pos -= strides[d] * out[d];
      counter[d] = 0;
    }
  }
  return map;
}

Shape broadcast_shape(const Shape& a, const Shape& b, const char* op) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(op) + ": rank mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
  }
  Shape out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i] && a[i] != 1 && b[i] != 1) {
      throw DimensionError(std::string(op) + ": cannot broadcast " + shape_string(a) + " with " +
                           shape_string(b));
    }
    out[i] = std::max(a[i], b[i]);
  }
  return out;
}

enum class BinaryKind { kAdd, kSub, kMul };

template <typename S>
BasicTensor<S> binary(const BasicTensor<S>& a, const BasicTensor<S>& b, BinaryKind kind,
                      const char* op) {
  Shape out_shape = broadcast_shape(a.shape(), b.shape(), op);
  const Index n = shape_size(out_shape);
  Array<S> out(n);
  const bool same = a.shape() == b.shape();
  std::vector<Index> ia, ib;
  if (same) {
    switch (kind) {
      case BinaryKind::kAdd: out = a.data() + b.data(); break;
      case BinaryKind::kSub: out = a.data() - b.data(); break;
      case BinaryKind::kMul: out = a.data() * b.data(); break;
    }
  } else {
    ia = broadcast_map(a.shape(), out_shape);
    ib = broadcast_map(b.shape(), out_shape);
    const auto& av = a.data();
    const auto& bv = b.data();
    for (Index o = 0; o < n; ++o) {
      const S x = av[ia[o]];
      const S y = bv[ib[o]];
      out[o] = kind == BinaryKind::kAdd ? x + y : kind == BinaryKind::kSub ? x - y : x * y;
    }
  }
  auto bw = [kind, ia = std::move(ia), ib = std::move(ib)](detail::Node<S>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    const auto& g = self.grad;
    const bool same = ia.empty();
    if (na.requires_grad) {
      auto& ga = na.grad_buffer();
      if (same) {
        ga += kind == BinaryKind::kMul ? Array<S>(g * nb.value) : g;
      } else {
        for (Index o = 0; o < g.size(); ++o) {
          ga[ia[o]] += kind == BinaryKind::kMul ? g[o] * nb.value[ib[o]] : g[o];
        }
      }
    }
    if (nb.requires_grad) {
      auto& gb = nb.grad_buffer();
      if (same) {
        switch (kind) {
          case BinaryKind::kAdd: gb += g; break;
          case BinaryKind::kSub: gb -= g; break;
          case BinaryKind::kMul: gb += g * na.value; break;
        }
      } else {
        for (Index o = 0; o < g.size(); ++o) {
          const S d = kind == BinaryKind::kAdd   ? g[o]
                      : kind == BinaryKind::kSub ? -g[o]
                                                 : g[o] * na.value[ia[o]];
          gb[ib[o]] += d;
        }
      }
    }
  };
  return detail::make_result<S>(std::move(out_shape), std::move(out), {a.node(), b.node()},
                                std::move(bw), op);
}

}  // namespace

template <typename S>
BasicTensor<S> add(const BasicTensor<S>& a, const BasicTensor<S>& b) {
  return binary(a, b, BinaryKind::kAdd, "add");
}

template <typename S>
BasicTensor<S> sub(const BasicTensor<S>& a, const BasicTensor<S>& b) {
  return binary(a, b, BinaryKind::kSub, "sub");
}

template <typename S>
BasicTensor<S> mul(const BasicTensor<S>& a, const BasicTensor<S>& b) {
  return binary(a, b, BinaryKind::kMul, "mul");
}

template <typename S>
BasicTensor<S> scale(const BasicTensor<S>& a, S factor) {
  Array<S> out = a.data() * factor;
  auto bw = [factor](detail::Node<S>& self) {
    self.inputs[0]->grad_buffer() += self.grad * factor;
  };
  return detail::make_result<S>(a.shape(), std::move(out), {a.node()}, std::move(bw), "scale");
}

template <typename S>
BasicTensor<S> add_scalar(const BasicTensor<S>& a, S offset) {
  Array<S> out = a.data() + offset;
  auto bw = [](detail::Node<S>& self) { self.inputs[0]->grad_buffer() += self.grad; };
  return detail::make_result<S>(a.shape(), std::move(out), {a.node()}, std::move(bw),
                                "add_scalar");
}

template <typename S>
BasicTensor<S> relu(const BasicTensor<S>& x) {
  Array<S> out = x.data().max(S(0));
  auto bw = [](detail::Node<S>& self) {
    auto& in = *self.inputs[0];
    in.grad_buffer() += (in.value > S(0)).select(self.grad, S(0));
  };
  return detail::make_result<S>(x.shape(), std::move(out), {x.node()}, std::move(bw), "relu");
}

template <typename S>
BasicTensor<S> sigmoid(const BasicTensor<S>& x) {
  Array<S> out = (S(1) + (-x.data()).exp()).inverse();
  auto bw = [](detail::Node<S>& self) {
    const auto& y = self.value;
    self.inputs[0]->grad_buffer() += self.grad * y * (S(1) - y);
  };
  return detail::make_result<S>(x.shape(), std::move(out), {x.node()}, std::move(bw), "sigmoid");
}

template <typename S>
BasicTensor<S> sum(const BasicTensor<S>& x) {
  Array<S> out(1);
  out[0] = static_cast<S>(x.data().template cast<double>().sum());
  auto bw = [](detail::Node<S>& self) { self.inputs[0]->grad_buffer() += self.grad[0]; };
  return detail::make_result<S>(Shape{}, std::move(out), {x.node()}, std::move(bw), "sum");
}

template <typename S>
BasicTensor<S> mean(const BasicTensor<S>& x) {
  return scale(sum(x), S(1) / static_cast<S>(x.size()));
}

template <typename S>
BasicTensor<S> matmul(const BasicTensor<S>& a, const BasicTensor<S>& b) {
  require_rank(a.shape(), 2, "matmul");
  require_rank(b.shape(), 2, "matmul");
  const Index m = a.dim(0), k = a.dim(1), n = b.dim(1);
  if (b.dim(0) != k) {
    throw DimensionError("matmul: inner dimensions differ for " + shape_string(a.shape()) +
                         " x " + shape_string(b.shape()));
  }
  Array<S> out(m * n);
  MutMap<S>(out.data(), m, n).noalias() =
      ConstMap<S>(a.data().data(), m, k) * ConstMap<S>(b.data().data(), k, n);
  auto bw = [m, k, n](detail::Node<S>& self) {
    auto& na = *self.inputs[0];
    auto& nb = *self.inputs[1];
    ConstMap<S> g(self.grad.data(), m, n);
    if (na.requires_grad) {
      MutMap<S>(na.grad_buffer().data(), m, k).noalias() +=
          g * ConstMap<S>(nb.value.data(), k, n).transpose();
    }
    if (nb.requires_grad) {
      MutMap<S>(nb.grad_buffer().data(), k, n).noalias() +=
          ConstMap<S>(na.value.data(), m, k).transpose() * g;
    }
  };
  return detail::make_result<S>(Shape{m, n}, std::move(out), {a.node(), b.node()},
                                std::move(bw), "matmul");
}

template <typename S>
BasicTensor<S> transpose(const BasicTensor<S>& a) {
  require_rank(a.shape(), 2, "transpose");
  const Index m = a.dim(0), n = a.dim(1);
  Array<S> out(m * n);
  MutMap<S>(out.data(), n, m) = ConstMap<S>(a.data().data(), m, n).transpose();
  auto bw = [m, n](detail::Node<S>& self) {
    MutMap<S>(self.inputs[0]->grad_buffer().data(), m, n) +=
        ConstMap<S>(self.grad.data(), n, m).transpose();
  };
  return detail::make_result<S>(Shape{n, m}, std::move(out), {a.node()}, std::move(bw),
                                "transpose");
}

template <typename S>
BasicTensor<S> reshape(const BasicTensor<S>& a, Shape shape) {
  if (shape_size(shape) != a.size()) {
    throw DimensionError("reshape: cannot view " + shape_string(a.shape()) + " as " +
                         shape_string(shape));
  }
  auto bw = [](detail::Node<S>& self) { self.inputs[0]->grad_buffer() += self.grad; };
  return detail::make_result<S>(std::move(shape), a.data(), {a.node()}, std::move(bw),
                                "reshape");
}

template <typename S>
BasicTensor<S> concat(const std::vector<BasicTensor<S>>& parts, int axis) {
  if (parts.empty()) throw DimensionError("concat: no inputs");
  const Shape& first = parts.front().shape();
  const int r = static_cast<int>(first.size());
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw DimensionError("concat: axis out of range");
  Shape out_shape = first;
  out_shape[axis] = 0;
  for (const auto& p : parts) {
    const Shape& s = p.shape();
    bool ok = static_cast<int>(s.size()) == r;
    for (int d = 0; ok && d < r; ++d) ok = d == axis || s[d] == first[d];
    if (!ok) {
      throw DimensionError("concat: incompatible shapes " + shape_string(first) + " and " +
                           shape_string(s));
    }
    out_shape[axis] += s[axis];
  }
  Index outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= first[d];
  for (int d = axis + 1; d < r; ++d) inner *= first[d];
  std::vector<Index> chunk;
  for (const auto& p : parts) chunk.push_back(p.dim(axis) * inner);
  const Index row = out_shape[axis] * inner;
  Array<S> out(shape_size(out_shape));
  Index offset = 0;
  std::vector<NodePtr<S>> inputs;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    const auto& v = parts[i].data();
    for (Index o = 0; o < outer; ++o) {
      out.segment(o * row + offset, chunk[i]) = v.segment(o * chunk[i], chunk[i]);
    }
    offset += chunk[i];
    inputs.push_back(parts[i].node());
  }
  auto bw = [outer, row, chunk](detail::Node<S>& self) {
    Index offset = 0;
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      auto& in = *self.inputs[i];
      if (in.requires_grad) {
        auto& g = in.grad_buffer();
        for (Index o = 0; o < outer; ++o) {
          g.segment(o * chunk[i], chunk[i]) += self.grad.segment(o * row + offset, chunk[i]);
        }
      }
      offset += chunk[i];
    }
  };
  return detail::make_result<S>(std::move(out_shape), std::move(out), std::move(inputs),
                                std::move(bw), "concat");
}

template <typename S>
BasicTensor<S> softmax(const BasicTensor<S>& x, int axis) {
  const int r = x.rank();
  if (r == 0) throw DimensionError("softmax: scalar input has no axis");
  if (axis < 0) axis += r;
  if (axis < 0 || axis >= r) throw DimensionError("softmax: axis out of range");
  const Index len = x.dim(axis);
  Index outer = 1, inner = 1;
  for (int d = 0; d < axis; ++d) outer *= x.dim(d);
  for (int d = axis + 1; d < r; ++d) inner *= x.dim(d);
  const auto& v = x.data();
  Array<S> out(v.size());
  for (Index o = 0; o < outer; ++o) {
    for (Index i = 0; i < inner; ++i) {
      const Index base = o * len * inner + i;
      S mx = v[base];
      for (Index j = 1; j < len; ++j) mx = std::max(mx, v[base + j * inner]);
      double total = 0.0;
      for (Index j = 0; j < len; ++j) {
        const S e = std::exp(v[base + j * inner] - mx);
        out[base + j * inner] = e;
        total += e;
      }
      const S inv = static_cast<S>(1.0 / total);
      for (Index j = 0; j < len; ++j) out[base + j * inner] *= inv;
    }
  }
  auto bw = [outer, inner, len](detail::Node<S>& self) {
    const auto& y = self.value;
    const auto& g = self.grad;
    auto& gx = self.inputs[0]->grad_buffer();
    for (Index o = 0; o < outer; ++o) {
      for (Index i = 0; i < inner; ++i) {
        const Index base = o * len * inner + i;
        double dot = 0.0;
        for (Index j = 0; j < len; ++j) dot += g[base + j * inner] * y[base + j * inner];
        for (Index j = 0; j < len; ++j) {
          const Index k = base + j * inner;
          gx[k] += y[k] * (g[k] - static_cast<S>(dot));
        }
      }
    }
  };
  return detail::make_result<S>(x.shape(), std::move(out), {x.node()}, std::move(bw),
                                "softmax");
}

template <typename S>
BasicTensor<S> cross_entropy(const BasicTensor<S>& probs, Index label) {
  if (label < 0 || label >= probs.size()) {
    throw DimensionError("cross_entropy: label " + std::to_string(label) + " outside " +
                         shape_string(probs.shape()));
  }
  constexpr S kFloor = S(1e-30);
  const S p = std::max(probs.data()[label], kFloor);
  Array<S> out(1);
  out[0] = -std::log(p);
  auto bw = [label, p](detail::Node<S>& self) {
    self.inputs[0]->grad_buffer()[label] -= self.grad[0] / p;
  };
  return detail::make_result<S>(Shape{}, std::move(out), {probs.node()}, std::move(bw),
                                "cross_entropy");
}

template <typename S>
BasicTensor<S> conv2d(const BasicTensor<S>& x, const BasicTensor<S>& w, Index stride,
                      Index padding) {
  require_rank(x.shape(), 3, "conv2d input");
  require_rank(w.shape(), 4, "conv2d weight");
  if (stride < 1 || padding < 0) throw DimensionError("conv2d: invalid stride or padding");
  const Index ci = x.dim(0), h = x.dim(1), wd = x.dim(2);
  const Index co = w.dim(0), kh = w.dim(2), kw = w.dim(3);
  if (w.dim(1) != ci) {
    throw DimensionError("conv2d: weight " + shape_string(w.shape()) + " does not match input " +
                         shape_string(x.shape()));
  }
  const Index span_h = h + 2 * padding - kh;
  const Index span_w = wd + 2 * padding - kw;
  if (span_h < 0 || span_w < 0 || span_h % stride != 0 || span_w % stride != 0) {
    throw DimensionError("conv2d: non-integral output size for input " + shape_string(x.shape()) +
                         ", kernel " + shape_string(w.shape()) + ", stride " +
                         std::to_string(stride) + ", padding " + std::to_string(padding));
  }
  const Index ho = span_h / stride + 1;
  const Index wo = span_w / stride + 1;
  const Index rows = ci * kh * kw;
  const Index cols_n = ho * wo;

  auto cols = std::make_shared<RowMat<S>>(rows, cols_n);
  const auto& xv = x.data();
  for (Index c = 0; c < ci; ++c) {
    for (Index ky = 0; ky < kh; ++ky) {
      for (Index kx = 0; kx < kw; ++kx) {
        S* dst = cols->row((c * kh + ky) * kw + kx).data();
        for (Index oy = 0; oy < ho; ++oy) {
          const Index iy = oy * stride - padding + ky;
          S* line = dst + oy * wo;
          if (iy < 0 || iy >= h) {
            std::fill(line, line + wo, S(0));
            continue;
          }
          const S* src = xv.data() + (c * h + iy) * wd;
          for (Index ox = 0; ox < wo; ++ox) {
            const Index ix = ox * stride - padding + kx;
            line[ox] = (ix >= 0 && ix < wd) ? src[ix] : S(0);
          }
        }
      }
    }
  }
  Array<S> out(co * cols_n);
  MutMap<S>(out.data(), co, cols_n).noalias() = ConstMap<S>(w.data().data(), co, rows) * *cols;

  auto bw = [=](detail::Node<S>& self) {
    auto& nx = *self.inputs[0];
    auto& nw = *self.inputs[1];
    ConstMap<S> g(self.grad.data(), co, cols_n);
    if (nw.requires_grad) {
      MutMap<S>(nw.grad_buffer().data(), co, rows).noalias() += g * cols->transpose();
    }
    if (nx.requires_grad) {
      RowMat<S> gcols = ConstMap<S>(nw.value.data(), co, rows).transpose() * g;
      auto& gx = nx.grad_buffer();
      for (Index c = 0; c < ci; ++c) {
        for (Index ky = 0; ky < kh; ++ky) {
          for (Index kx = 0; kx < kw; ++kx) {
            const S* src = gcols.row((c * kh + ky) * kw + kx).data();
            for (Index oy = 0; oy < ho; ++oy) {
              const Index iy = oy * stride - padding + ky;
              if (iy < 0 || iy >= h) continue;
              S* dst = gx.data() + (c * h + iy) * wd;
              for (Index ox = 0; ox < wo; ++ox) {
                const Index ix = ox * stride - padding + kx;
                if (ix >= 0 && ix < wd) dst[ix] += src[oy * wo + ox];
              }
            }
          }
        }
      }
    }
  };
  return detail::make_result<S>(Shape{co, ho, wo}, std::move(out), {x.node(), w.node()},
                                std::move(bw), "conv2d");
}

template <typename S>
BasicTensor<S> avg_pool_spatial(const BasicTensor<S>& f) {
  require_rank(f.shape(), 3, "avg_pool_spatial");
  return adaptive_avg_pool(f, 1, 1);
}

template <typename S>
BasicTensor<S> max_pool_spatial(const BasicTensor<S>& f) {
  require_rank(f.shape(), 3, "max_pool_spatial");
  const Index c = f.dim(0), hw = f.dim(1) * f.dim(2);
  const auto& v = f.data();
  Array<S> out(c);
  std::vector<Index> arg(static_cast<std::size_t>(c));
  for (Index ch = 0; ch < c; ++ch) {
    Index best = ch * hw;
    for (Index i = 1; i < hw; ++i) {
      if (v[ch * hw + i] > v[best]) best = ch * hw + i;
    }
    arg[ch] = best;
    out[ch] = v[best];
  }
  auto bw = [arg = std::move(arg)](detail::Node<S>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (std::size_t ch = 0; ch < arg.size(); ++ch) g[arg[ch]] += self.grad[ch];
  };
  return detail::make_result<S>(Shape{c, 1, 1}, std::move(out), {f.node()}, std::move(bw),
                                "max_pool_spatial");
}

template <typename S>
BasicTensor<S> channel_pool(const BasicTensor<S>& f, PoolMode mode) {
  require_rank(f.shape(), 3, "channel_pool");
  const Index c = f.dim(0), hw = f.dim(1) * f.dim(2);
  ConstMap<S> m(f.data().data(), c, hw);
  Array<S> out(hw);
  std::vector<Index> arg;
  if (mode == PoolMode::kAvg) {
    out = m.template cast<double>().colwise().sum().transpose().array().template cast<S>() /
          static_cast<S>(c);
  } else {
    arg.resize(static_cast<std::size_t>(hw));
    for (Index p = 0; p < hw; ++p) {
      Index best = 0;
      for (Index ch = 1; ch < c; ++ch) {
        if (m(ch, p) > m(best, p)) best = ch;
      }
      arg[p] = best;
      out[p] = m(best, p);
    }
  }
  auto bw = [c, hw, mode, arg = std::move(arg)](detail::Node<S>& self) {
    MutMap<S> g(self.inputs[0]->grad_buffer().data(), c, hw);
    if (mode == PoolMode::kAvg) {
      g.rowwise() += (self.grad / static_cast<S>(c)).matrix().transpose();
    } else {
      for (Index p = 0; p < hw; ++p) g(arg[p], p) += self.grad[p];
    }
  };
  return detail::make_result<S>(Shape{1, f.dim(1), f.dim(2)}, std::move(out), {f.node()},
                                std::move(bw), "channel_pool");
}

template <typename S>
BasicTensor<S> adaptive_avg_pool(const BasicTensor<S>& f, Index out_h, Index out_w) {
  require_rank(f.shape(), 3, "adaptive_avg_pool");
  const Index c = f.dim(0), h = f.dim(1), w = f.dim(2);
  if (out_h < 1 || out_w < 1 || out_h > h || out_w > w) {
    throw DimensionError("adaptive_avg_pool: output " + std::to_string(out_h) + "x" +
                         std::to_string(out_w) + " not within input " + shape_string(f.shape()));
  }
  auto bins = [](Index in, Index out) {
    std::vector<std::pair<Index, Index>> b(static_cast<std::size_t>(out));
    for (Index i = 0; i < out; ++i) b[i] = {(i * in) / out, ((i + 1) * in + out - 1) / out};
    return b;
  };
  auto ybins = bins(h, out_h);
  auto xbins = bins(w, out_w);
  const auto& v = f.data();
  Array<S> out(c * out_h * out_w);
  for (Index ch = 0; ch < c; ++ch) {
    for (Index oy = 0; oy < out_h; ++oy) {
      for (Index ox = 0; ox < out_w; ++ox) {
        double acc = 0.0;
        const auto [y0, y1] = ybins[oy];
        const auto [x0, x1] = xbins[ox];
        for (Index y = y0; y < y1; ++y) {
          for (Index x = x0; x < x1; ++x) acc += v[(ch * h + y) * w + x];
        }
        out[(ch * out_h + oy) * out_w + ox] = static_cast<S>(acc / double((y1 - y0) * (x1 - x0)));
      }
    }
  }
  auto bw = [=](detail::Node<S>& self) {
    auto& g = self.inputs[0]->grad_buffer();
    for (Index ch = 0; ch < c; ++ch) {
      for (Index oy = 0; oy < out_h; ++oy) {
        for (Index ox = 0; ox < out_w; ++ox) {
          const auto [y0, y1] = ybins[oy];
          const auto [x0, x1] = xbins[ox];
          const S share = self.grad[(ch * out_h + oy) * out_w + ox] /
                          static_cast<S>((y1 - y0) * (x1 - x0));
          for (Index y = y0; y < y1; ++y) {
            for (Index x = x0; x < x1; ++x) g[(ch * h + y) * w + x] += share;
          }
        }
      }
    }
  };
  return detail::make_result<S>(Shape{c, out_h, out_w}, std::move(out), {f.node()},
                                std::move(bw), "adaptive_avg_pool");
}

template <typename S>
BasicTensor<S> dropout(const BasicTensor<S>& x, double rate, std::mt19937_64& rng) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw ParameterError("dropout rate must lie in [0, 1), got " + std::to_string(rate));
  }
  if (rate == 0.0) return x;
  std::bernoulli_distribution keep(1.0 - rate);
  const S survivor = static_cast<S>(1.0 / (1.0 - rate));
  Array<S> mask(x.size());
  for (Index i = 0; i < mask.size(); ++i) mask[i] = keep(rng) ? survivor : S(0);
  Array<S> out = x.data() * mask;
  auto bw = [mask = std::move(mask)](detail::Node<S>& self) {
    self.inputs[0]->grad_buffer() += self.grad * mask;
  };
  return detail::make_result<S>(x.shape(), std::move(out), {x.node()}, std::move(bw), "dropout");
}

#define DCAT_INSTANTIATE_OPS(S)                                                              \
  template BasicTensor<S> add(const BasicTensor<S>&, const BasicTensor<S>&);                 \
  template BasicTensor<S> sub(const BasicTensor<S>&, const BasicTensor<S>&);                 \
  template BasicTensor<S> mul(const BasicTensor<S>&, const BasicTensor<S>&);                 \
  template BasicTensor<S> scale(const BasicTensor<S>&, S);                                   \
  template BasicTensor<S> add_scalar(const BasicTensor<S>&, S);                              \
  template BasicTensor<S> relu(const BasicTensor<S>&);                                       \
  template BasicTensor<S> sigmoid(const BasicTensor<S>&);                                    \
  template BasicTensor<S> sum(const BasicTensor<S>&);                                        \
  template BasicTensor<S> mean(const BasicTensor<S>&);                                       \
  template BasicTensor<S> matmul(const BasicTensor<S>&, const BasicTensor<S>&);              \
  template BasicTensor<S> transpose(const BasicTensor<S>&);                                  \
  template BasicTensor<S> reshape(const BasicTensor<S>&, Shape);                             \
  template BasicTensor<S> concat(const std::vector<BasicTensor<S>>&, int);                   \
  template BasicTensor<S> softmax(const BasicTensor<S>&, int);                               \
  template BasicTensor<S> cross_entropy(const BasicTensor<S>&, Index);                       \
  template BasicTensor<S> conv2d(const BasicTensor<S>&, const BasicTensor<S>&, Index, Index); \
  template BasicTensor<S> avg_pool_spatial(const BasicTensor<S>&);                           \
  template BasicTensor<S> max_pool_spatial(const BasicTensor<S>&);                           \
  template BasicTensor<S> channel_pool(const BasicTensor<S>&, PoolMode);                     \
  template BasicTensor<S> adaptive_avg_pool(const BasicTensor<S>&, Index, Index);            \
  template BasicTensor<S> dropout(const BasicTensor<S>&, double, std::mt19937_64&);

DCAT_INSTANTIATE_OPS(float)
DCAT_INSTANTIATE_OPS(double)

}  // namespace dcat
