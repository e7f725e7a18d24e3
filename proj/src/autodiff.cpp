#include "faithful/autodiff.hpp"

#include "faithful/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace faithful::ad {

namespace {

thread_local bool g_grad_enabled = true;

using NodePtr = std::shared_ptr<Node>;

Var make_result(Array value, Shape shape, std::vector<NodePtr> parents,
                std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->value = std::move(value);
  node->shape = std::move(shape);
  const bool needs =
      g_grad_enabled && std::any_of(parents.begin(), parents.end(),
                                    [](const NodePtr& p) { return p->requires_grad; });
  if (needs) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward_fn);
  }
  return Var(std::move(node));
}

void require_same_shape(const Var& a, const Var& b, const char* op) {
  if (a.shape() != b.shape())
    throw ShapeError(std::string(op) + ": shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
}

void require_rank(const Var& x, int rank, const char* op) {
  if (x.rank() != rank)
    throw ShapeError(std::string(op) + ": expected rank " + std::to_string(rank) + ", got " +
                     to_string(x.shape()));
}

// Applies f elementwise with derivative df(x, y) evaluated lazily on backward.
template <class F, class DF>
Var unary(const Var& x, F f, DF df) {
  Array y = x.value().unaryExpr(f);
  return make_result(y, x.shape(), {x.node()}, [df](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    for (Eigen::Index i = 0; i < self.value.size(); ++i)
      in.grad[i] += self.grad[i] * df(in.value[i], self.value[i]);
  });
}

}  // namespace

int element_count(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), 1, std::multiplies<>());
}

std::string to_string(const Shape& shape) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ')';
  return os.str();
}

const Array& Var::grad() const {
  node_->ensure_grad();
  return node_->grad;
}

double Var::item() const {
  if (node_->value.size() != 1)
    throw ShapeError("item() on tensor of shape " + to_string(node_->shape));
  return node_->value[0];
}

NoGradGuard::NoGradGuard() : previous_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = previous_; }

bool grad_enabled() { return g_grad_enabled; }

Var constant(Array values, Shape shape) {
  if (values.size() != element_count(shape))
    throw ShapeError("constant: " + std::to_string(values.size()) + " values for shape " +
                     to_string(shape));
  auto node = std::make_shared<Node>();
  node->value = std::move(values);
  node->shape = std::move(shape);
  return Var(std::move(node));
}

Var zeros(Shape shape) {
  const int n = element_count(shape);
  return constant(Array::Zero(n), std::move(shape));
}

Var parameter(Array values, Shape shape) {
  Var v = constant(std::move(values), std::move(shape));
  v.node()->requires_grad = true;
  return v;
}

void backward(const Var& root) {
  if (root.size() != 1) throw ShapeError("backward: root must be a single element");
  if (!root.requires_grad()) return;

  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack{{root.node().get(), 0}};
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* parent = node->parents[next++].get();
      if (parent->requires_grad && visited.insert(parent).second) stack.push_back({parent, 0});
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }

  Node& r = *root.node();
  r.ensure_grad();
  r.grad[0] += 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    (*it)->ensure_grad();
    if ((*it)->backward) (*it)->backward(**it);
  }
}

// --- elementwise ------------------------------------------------------------

Var add(const Var& a, const Var& b) {
  require_same_shape(a, b, "add");
  return make_result(a.value() + b.value(), a.shape(), {a.node(), b.node()}, [](Node& self) {
    for (auto& p : self.parents) {
      if (!p->requires_grad) continue;
      p->ensure_grad();
      p->grad += self.grad;
    }
  });
}

Var sub(const Var& a, const Var& b) {
  require_same_shape(a, b, "sub");
  return make_result(a.value() - b.value(), a.shape(), {a.node(), b.node()}, [](Node& self) {
    Node& l = *self.parents[0];
    Node& r = *self.parents[1];
    if (l.requires_grad) {
      l.ensure_grad();
      l.grad += self.grad;
    }
    if (r.requires_grad) {
      r.ensure_grad();
      r.grad -= self.grad;
    }
  });
}

Var mul(const Var& a, const Var& b) {
  require_same_shape(a, b, "mul");
  return make_result(a.value() * b.value(), a.shape(), {a.node(), b.node()}, [](Node& self) {
    Node& l = *self.parents[0];
    Node& r = *self.parents[1];
    if (l.requires_grad) {
      l.ensure_grad();
      l.grad += self.grad * r.value;
    }
    if (r.requires_grad) {
      r.ensure_grad();
      r.grad += self.grad * l.value;
    }
  });
}

Var scale(const Var& a, double s) {
  return make_result(a.value() * s, a.shape(), {a.node()}, [s](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    in.grad += self.grad * s;
  });
}

Var relu(const Var& x) {
  return unary(
      x, [](double v) { return v > 0.0 ? v : 0.0; },
      [](double in, double) { return in > 0.0 ? 1.0 : 0.0; });
}

Var sigmoid(const Var& x) {
  return unary(
      x, [](double v) { return 1.0 / (1.0 + std::exp(-v)); },
      [](double, double y) { return y * (1.0 - y); });
}

Var tanh(const Var& x) {
  return unary(
      x, [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Var softplus(const Var& x) {
  return unary(
      x,
      [](double v) { return v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v)); },
      [](double in, double) { return 1.0 / (1.0 + std::exp(-in)); });
}

// --- shape ------------------------------------------------------------------

Var reshape(const Var& x, Shape shape) {
  if (element_count(shape) != x.size())
    throw ShapeError("reshape: " + to_string(x.shape()) + " -> " + to_string(shape));
  return make_result(x.value(), std::move(shape), {x.node()}, [](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    in.grad += self.grad;
  });
}

Var concat(const Var& a, const Var& b) {
  if (a.rank() != b.rank() || a.rank() == 0 ||
      !std::equal(a.shape().begin() + 1, a.shape().end(), b.shape().begin() + 1))
    throw ShapeError("concat: incompatible shapes " + to_string(a.shape()) + " and " +
                     to_string(b.shape()));
  Array v(a.size() + b.size());
  v << a.value(), b.value();
  Shape shape = a.shape();
  shape[0] += b.dim(0);
  const Eigen::Index na = a.size();
  return make_result(std::move(v), std::move(shape), {a.node(), b.node()}, [na](Node& self) {
    Node& l = *self.parents[0];
    Node& r = *self.parents[1];
    if (l.requires_grad) {
      l.ensure_grad();
      l.grad += self.grad.head(na);
    }
    if (r.requires_grad) {
      r.ensure_grad();
      r.grad += self.grad.tail(self.grad.size() - na);
    }
  });
}

Var slice(const Var& x, int begin, int count) {
  if (x.rank() == 0 || begin < 0 || count < 0 || begin + count > x.dim(0))
    throw ShapeError("slice: [" + std::to_string(begin) + ", +" + std::to_string(count) +
                     ") out of range for " + to_string(x.shape()));
  const int stride = x.size() / x.dim(0);
  Shape shape = x.shape();
  shape[0] = count;
  const Eigen::Index offset = static_cast<Eigen::Index>(begin) * stride;
  const Eigen::Index n = static_cast<Eigen::Index>(count) * stride;
  return make_result(x.value().segment(offset, n), std::move(shape), {x.node()},
                     [offset, n](Node& self) {
                       Node& in = *self.parents[0];
                       in.ensure_grad();
                       in.grad.segment(offset, n) += self.grad;
                     });
}

Var stack_scalars(std::span<const Var> scalars) {
  Array v(scalars.size());
  std::vector<NodePtr> parents;
  parents.reserve(scalars.size());
  for (std::size_t i = 0; i < scalars.size(); ++i) {
    v[i] = scalars[i].item();
    parents.push_back(scalars[i].node());
  }
  return make_result(std::move(v), {static_cast<int>(scalars.size())}, std::move(parents),
                     [](Node& self) {
                       for (std::size_t i = 0; i < self.parents.size(); ++i) {
                         Node& p = *self.parents[i];
                         if (!p.requires_grad) continue;
                         p.ensure_grad();
                         p.grad[0] += self.grad[i];
                       }
                     });
}

// --- reductions -------------------------------------------------------------

Var mean(const Var& x) {
  const double n = x.size();
  return make_result(Array::Constant(1, x.value().mean()), {1}, {x.node()}, [n](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    in.grad += self.grad[0] / n;
  });
}

Var sum(const Var& x) {
  return make_result(Array::Constant(1, x.value().sum()), {1}, {x.node()}, [](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    in.grad += self.grad[0];
  });
}

Var global_avg_pool(const Var& x) {
  require_rank(x, 3, "global_avg_pool");
  const int c = x.dim(0);
  const int hw = x.dim(1) * x.dim(2);
  Eigen::Map<const RowMatrix> m(x.value().data(), c, hw);
  Array out = m.rowwise().mean().array();
  return make_result(std::move(out), {c}, {x.node()}, [c, hw](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    Eigen::Map<RowMatrix> g(in.grad.data(), c, hw);
    g.colwise() += (self.grad / hw).matrix();
  });
}

Var adaptive_avg_pool(const Var& x, int out_h, int out_w) {
  require_rank(x, 3, "adaptive_avg_pool");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  if (out_h <= 0 || out_w <= 0 || out_h > h || out_w > w)
    throw ShapeError("adaptive_avg_pool: cannot pool " + to_string(x.shape()) + " to " +
                     std::to_string(out_h) + "x" + std::to_string(out_w));
  auto bounds = [](int i, int in, int out) {
    return std::pair{(i * in) / out, ((i + 1) * in + out - 1) / out};
  };
  Array out(c * out_h * out_w);
  for (int ch = 0; ch < c; ++ch)
    for (int oy = 0; oy < out_h; ++oy)
      for (int ox = 0; ox < out_w; ++ox) {
        auto [y0, y1] = bounds(oy, h, out_h);
        auto [x0, x1] = bounds(ox, w, out_w);
        double acc = 0.0;
        for (int y = y0; y < y1; ++y)
          for (int xx = x0; xx < x1; ++xx) acc += x.value()[(ch * h + y) * w + xx];
        out[(ch * out_h + oy) * out_w + ox] = acc / ((y1 - y0) * (x1 - x0));
      }
  return make_result(std::move(out), {c, out_h, out_w}, {x.node()},
                     [=](Node& self) {
                       Node& in = *self.parents[0];
                       in.ensure_grad();
                       for (int ch = 0; ch < c; ++ch)
                         for (int oy = 0; oy < out_h; ++oy)
                           for (int ox = 0; ox < out_w; ++ox) {
                             auto [y0, y1] = bounds(oy, h, out_h);
                             auto [x0, x1] = bounds(ox, w, out_w);
                             const double g = self.grad[(ch * out_h + oy) * out_w + ox] /
                                              ((y1 - y0) * (x1 - x0));
                             for (int y = y0; y < y1; ++y)
                               for (int xx = x0; xx < x1; ++xx)
                                 in.grad[(ch * h + y) * w + xx] += g;
                           }
                     });
}

// --- layers -----------------------------------------------------------------

Var conv2d(const Var& x, const Var& weight, const Var& bias, int stride, int padding) {
  require_rank(x, 3, "conv2d");
  require_rank(weight, 4, "conv2d weight");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const int o = weight.dim(0), k = weight.dim(2);
  if (weight.dim(1) != c || weight.dim(3) != k)
    throw ShapeError("conv2d: weight " + to_string(weight.shape()) + " incompatible with input " +
                     to_string(x.shape()));
  if (bias.size() != o) throw ShapeError("conv2d: bias size mismatch");
  const int ho = (h + 2 * padding - k) / stride + 1;
  const int wo = (w + 2 * padding - k) / stride + 1;
  if (ho <= 0 || wo <= 0) throw ShapeError("conv2d: input " + to_string(x.shape()) + " too small");
  const int p = ho * wo;
  const int ckk = c * k * k;

  auto col = std::make_shared<RowMatrix>(RowMatrix::Zero(ckk, p));
  const double* xv = x.value().data();
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* row = col->row((ch * k + ky) * k + kx).data();
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride - padding + ky;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride - padding + kx;
            if (ix < 0 || ix >= w) continue;
            row[oy * wo + ox] = xv[(ch * h + iy) * w + ix];
          }
        }
      }

  Eigen::Map<const RowMatrix> wm(weight.value().data(), o, ckk);
  RowMatrix out = wm * (*col);
  out.colwise() += bias.value().matrix();
  Array value = Eigen::Map<const Array>(out.data(), out.size());

  return make_result(
      std::move(value), {o, ho, wo}, {x.node(), weight.node(), bias.node()},
      [=](Node& self) {
        Node& in = *self.parents[0];
        Node& wn = *self.parents[1];
        Node& bn = *self.parents[2];
        Eigen::Map<const RowMatrix> g(self.grad.data(), o, p);
        if (wn.requires_grad) {
          wn.ensure_grad();
          Eigen::Map<RowMatrix>(wn.grad.data(), o, ckk).noalias() += g * col->transpose();
        }
        if (bn.requires_grad) {
          bn.ensure_grad();
          bn.grad += g.rowwise().sum().array();
        }
        if (in.requires_grad) {
          in.ensure_grad();
          Eigen::Map<const RowMatrix> wmat(wn.value.data(), o, ckk);
          RowMatrix dcol = wmat.transpose() * g;
          double* dx = in.grad.data();
          for (int ch = 0; ch < c; ++ch)
            for (int ky = 0; ky < k; ++ky)
              for (int kx = 0; kx < k; ++kx) {
                const double* row = dcol.row((ch * k + ky) * k + kx).data();
                for (int oy = 0; oy < ho; ++oy) {
                  const int iy = oy * stride - padding + ky;
                  if (iy < 0 || iy >= h) continue;
                  for (int ox = 0; ox < wo; ++ox) {
                    const int ix = ox * stride - padding + kx;
                    if (ix < 0 || ix >= w) continue;
                    dx[(ch * h + iy) * w + ix] += row[oy * wo + ox];
                  }
                }
              }
        }
      });
}

Var batch_norm(const Var& x, const Var& gamma, const Var& beta, double eps) {
  require_rank(x, 3, "batch_norm");
  const int c = x.dim(0);
  const int n = x.dim(1) * x.dim(2);
  if (gamma.size() != c || beta.size() != c) throw ShapeError("batch_norm: affine size mismatch");
  Eigen::Map<const RowMatrix> xm(x.value().data(), c, n);
  Eigen::VectorXd mu = xm.rowwise().mean();
  RowMatrix centered = xm.colwise() - mu;
  Eigen::ArrayXd inv_std =
      ((centered.array().square().rowwise().sum() / n) + eps).rsqrt();
  RowMatrix xhat = (centered.array().colwise() * inv_std).matrix();
  RowMatrix y = (xhat.array().colwise() * gamma.value()).matrix();
  y.colwise() += beta.value().matrix();
  Array value = Eigen::Map<const Array>(y.data(), y.size());
  auto saved = std::make_shared<std::pair<RowMatrix, Eigen::ArrayXd>>(std::move(xhat), inv_std);

  return make_result(
      std::move(value), x.shape(), {x.node(), gamma.node(), beta.node()},
      [c, n, saved](Node& self) {
        Node& in = *self.parents[0];
        Node& gn = *self.parents[1];
        Node& bn = *self.parents[2];
        const RowMatrix& xh = saved->first;
        const Eigen::ArrayXd& istd = saved->second;
        Eigen::Map<const RowMatrix> g(self.grad.data(), c, n);
        if (gn.requires_grad) {
          gn.ensure_grad();
          gn.grad += (g.array() * xh.array()).rowwise().sum();
        }
        if (bn.requires_grad) {
          bn.ensure_grad();
          bn.grad += g.array().rowwise().sum();
        }
        if (in.requires_grad) {
          in.ensure_grad();
          Eigen::Map<RowMatrix> dx(in.grad.data(), c, n);
          for (int ch = 0; ch < c; ++ch) {
            Eigen::ArrayXd dxhat = g.row(ch).array().transpose() * gn.value[ch];
            const double s1 = dxhat.sum();
            const double s2 = (dxhat * xh.row(ch).array().transpose()).sum();
            dx.row(ch).array() +=
                (istd[ch] / n) * (n * dxhat - s1 - xh.row(ch).array().transpose() * s2).transpose();
          }
        }
      });
}

Var linear(const Var& x, const Var& weight, const Var& bias) {
  require_rank(weight, 2, "linear weight");
  const int m = weight.dim(0), n = weight.dim(1);
  if (x.size() != n || bias.size() != m)
    throw ShapeError("linear: input " + to_string(x.shape()) + " vs weight " +
                     to_string(weight.shape()));
  Eigen::Map<const RowMatrix> wm(weight.value().data(), m, n);
  Array y = (wm * x.value().matrix() + bias.value().matrix()).array();
  return make_result(std::move(y), {m}, {x.node(), weight.node(), bias.node()},
                     [m, n](Node& self) {
                       Node& in = *self.parents[0];
                       Node& wn = *self.parents[1];
                       Node& bn = *self.parents[2];
                       const Eigen::VectorXd g = self.grad.matrix();
                       if (wn.requires_grad) {
                         wn.ensure_grad();
                         Eigen::Map<RowMatrix>(wn.grad.data(), m, n).noalias() +=
                             g * in.value.matrix().transpose();
                       }
                       if (bn.requires_grad) {
                         bn.ensure_grad();
                         bn.grad += self.grad;
                       }
                       if (in.requires_grad) {
                         in.ensure_grad();
                         Eigen::Map<const RowMatrix> wmat(wn.value.data(), m, n);
                         in.grad += (wmat.transpose() * g).array();
                       }
                     });
}

Var softmax(const Var& x) {
  Array e = (x.value() - x.value().maxCoeff()).exp();
  Array y = e / e.sum();
  return make_result(std::move(y), x.shape(), {x.node()}, [](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    const double dot = (self.grad * self.value).sum();
    in.grad += self.value * (self.grad - dot);
  });
}

Var normalize_sum(const Var& x) {
  const double s = x.value().sum();
  if (!(s > 0.0)) throw NumericError("normalize_sum", "non-positive sum");
  return make_result(x.value() / s, x.shape(), {x.node()}, [s](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    const double dot = (self.grad * self.value).sum();
    in.grad += (self.grad - dot) / s;
  });
}

Var normalize_max(const Var& x) {
  Eigen::Index arg;
  const double m = x.value().maxCoeff(&arg);
  if (!(m > 0.0)) throw NumericError("normalize_max", "non-positive maximum");
  return make_result(x.value() / m, x.shape(), {x.node()}, [m, arg](Node& self) {
    Node& in = *self.parents[0];
    in.ensure_grad();
    in.grad += self.grad / m;
    in.grad[arg] -= (self.grad * self.value).sum() / m;
  });
}

// --- broadcasting -----------------------------------------------------------

Var mul_channels(const Var& x, const Var& mask) {
  require_rank(x, 3, "mul_channels");
  const int c = x.dim(0), h = x.dim(1), w = x.dim(2);
  const bool ok = (mask.rank() == 3 && mask.dim(0) == 1 && mask.dim(1) == h && mask.dim(2) == w) ||
                  (mask.rank() == 2 && mask.dim(0) == h && mask.dim(1) == w);
  if (!ok)
    throw ShapeError("mask " + to_string(mask.shape()) + " does not match feature map " +
                     to_string(x.shape()));
  const int n = h * w;
  Eigen::Map<const RowMatrix> xm(x.value().data(), c, n);
  RowMatrix y = xm.array().rowwise() * mask.value().transpose();
  Array value = Eigen::Map<const Array>(y.data(), y.size());
  return make_result(std::move(value), x.shape(), {x.node(), mask.node()}, [c, n](Node& self) {
    Node& in = *self.parents[0];
    Node& mn = *self.parents[1];
    Eigen::Map<const RowMatrix> g(self.grad.data(), c, n);
    if (in.requires_grad) {
      in.ensure_grad();
      Eigen::Map<RowMatrix>(in.grad.data(), c, n).array() +=
          g.array().rowwise() * mn.value.transpose();
    }
    if (mn.requires_grad) {
      mn.ensure_grad();
      Eigen::Map<const RowMatrix> xin(in.value.data(), c, n);
      mn.grad += (g.array() * xin.array()).colwise().sum().transpose();
    }
  });
}

Var weighted_sum(std::span<const Var> xs, const Var& w) {
  if (xs.empty()) throw InputError("weighted_sum: empty sequence");
  if (w.size() != static_cast<int>(xs.size()))
    throw ShapeError("weighted_sum: " + std::to_string(w.size()) + " weights for " +
                     std::to_string(xs.size()) + " tensors");
  Array acc = Array::Zero(xs[0].size());
  std::vector<NodePtr> parents;
  for (std::size_t t = 0; t < xs.size(); ++t) {
    if (xs[t].shape() != xs[0].shape()) throw ShapeError("weighted_sum: ragged sequence");
    acc += w.value()[t] * xs[t].value();
    parents.push_back(xs[t].node());
  }
  parents.push_back(w.node());
  return make_result(std::move(acc), xs[0].shape(), std::move(parents), [](Node& self) {
    const std::size_t n = self.parents.size() - 1;
    Node& wn = *self.parents[n];
    if (wn.requires_grad) wn.ensure_grad();
    for (std::size_t t = 0; t < n; ++t) {
      Node& xt = *self.parents[t];
      if (xt.requires_grad) {
        xt.ensure_grad();
        xt.grad += wn.value[t] * self.grad;
      }
      if (wn.requires_grad) wn.grad[t] += (self.grad * xt.value).sum();
    }
  });
}

// --- losses -----------------------------------------------------------------

Var angular_error_deg(const Var& prediction, const Eigen::Vector3d& target) {
  if (prediction.size() != 3) throw ShapeError("angular_error_deg: prediction must have 3 entries");
  const Eigen::Vector3d p = prediction.value().matrix();
  const double np = p.norm();
  const double nt = target.norm();
  if (np == 0.0 || nt == 0.0) throw NumericError("angular_loss", "zero-length illuminant");
  constexpr double kLimit = 1.0 - 1e-7;
  const double raw_cos = p.dot(target) / (np * nt);
  const double cosv = std::clamp(raw_cos, -kLimit, kLimit);
  const double deg = std::acos(cosv) * 180.0 / M_PI;
  const bool clamped = raw_cos != cosv;
  return make_result(Array::Constant(1, deg), {1}, {prediction.node()},
                     [=](Node& self) {
                       if (clamped) return;
                       Node& in = *self.parents[0];
                       in.ensure_grad();
                       const double dtheta = -180.0 / M_PI / std::sqrt(1.0 - cosv * cosv);
                       const Eigen::Vector3d dcos = target / (np * nt) - cosv * p / (np * np);
                       in.grad += (self.grad[0] * dtheta * dcos).array();
                     });
}

}  // namespace faithful::ad
