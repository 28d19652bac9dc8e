// Copyright 2026 The UniMatte Authors.
// Licensed under the Apache License, Version 2.0.

#include "unimatte/autograd.hpp"

#include <algorithm>
#include <cmath>

#include "unimatte/error.hpp"
#include "unimatte/kernels.hpp"

namespace unimatte::nn {

std::string to_string(const Shape& s) {
  return "[" + std::to_string(s.n) + "," + std::to_string(s.c) + "," + std::to_string(s.h) + "," +
         std::to_string(s.w) + "]";
}

Parameter& ParamStore::add(const std::string& name, Shape shape) {
  if (index_.count(name)) throw InvalidInput("duplicate parameter " + name);
  index_[name] = params_.size();
  params_.push_back({name, shape, std::vector<double>(shape.size(), 0.0), {}});
  return params_.back();
}

Parameter& ParamStore::get(const std::string& name) {
  const auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("unknown parameter " + name);
  return params_[it->second];
}

const Parameter& ParamStore::get(const std::string& name) const {
  const auto it = index_.find(name);
  if (it == index_.end()) throw InvalidInput("unknown parameter " + name);
  return params_[it->second];
}

std::size_t ParamStore::scalar_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& p : params_) p.grad.assign(p.value.size(), 0.0);
}

// ---------------------------------------------------------------------------

namespace {

double sigm(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Bilinear corner-aligned sampling coordinates for one axis.
struct Tap {
  int i0, i1;
  double w1;
};

std::vector<Tap> taps(int in, int out) {
  std::vector<Tap> t(out);
  const double s = out > 1 ? double(in - 1) / double(out - 1) : 0.0;
  for (int o = 0; o < out; ++o) {
    const double f = o * s;
    const int i0 = std::min(static_cast<int>(f), in - 1);
    t[o] = {i0, std::min(i0 + 1, in - 1), f - i0};
  }
  return t;
}

void im2col(const double* x, int c, int h, int w, int k, int stride, int ho, int wo,
            double* cols) {
  const int pad = k / 2;
  const std::size_t hw = static_cast<std::size_t>(ho) * wo;
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        double* row = cols + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * hw;
        const double* src = x + static_cast<std::size_t>(ch) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - pad;
          double* dst = row + static_cast<std::size_t>(oy) * wo;
          if (iy < 0 || iy >= h) {
            std::fill(dst, dst + wo, 0.0);
            continue;
          }
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - pad;
            dst[ox] = (ix < 0 || ix >= w) ? 0.0 : src[static_cast<std::size_t>(iy) * w + ix];
          }
        }
      }
}

void col2im(const double* cols, int c, int h, int w, int k, int stride, int ho, int wo,
            double* x) {
  const int pad = k / 2;
  const std::size_t hw = static_cast<std::size_t>(ho) * wo;
  for (int ch = 0; ch < c; ++ch)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const double* row = cols + ((static_cast<std::size_t>(ch) * k + ky) * k + kx) * hw;
        double* dst = x + static_cast<std::size_t>(ch) * h * w;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy * stride + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox * stride + kx - pad;
            if (ix >= 0 && ix < w) dst[static_cast<std::size_t>(iy) * w + ix] += row[oy * wo + ox];
          }
        }
      }
}

void require_scalar(const Shape& s, const char* what) {
  if (s.size() != 1) throw ShapeError(std::string(what) + ": expected a scalar");
}

}  // namespace

void softmax(const double* logits, std::size_t n, double* out) {
  double mx = logits[0];
  for (std::size_t i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += (out[i] = std::exp(logits[i] - mx));
  for (std::size_t i = 0; i < n; ++i) out[i] /= s;
}

double js_divergence(std::span<const double> p, std::span<const double> q) {
  if (p.size() != q.size()) throw ShapeError("js_divergence: size mismatch");
  double js = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double m = 0.5 * (p[i] + q[i]);
    if (p[i] > 0) js += 0.5 * p[i] * std::log(p[i] / m);
    if (q[i] > 0) js += 0.5 * q[i] * std::log(q[i] / m);
  }
  return js;
}

NodeId Graph::push(Tensor value, bool needs_grad) {
  nodes_.push_back({std::move(value), {}, needs_grad, {}});
  return static_cast<NodeId>(nodes_.size() - 1);
}

Tensor& Graph::g(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.data.size() != n.value.data.size()) n.grad = Tensor(n.value.shape);
  return n.grad;
}

NodeId Graph::input(Tensor t) { return push(std::move(t), false); }

NodeId Graph::param(Parameter& p) {
  Tensor t(p.shape);
  t.data = p.value;
  const NodeId id = push(std::move(t), true);
  Parameter* pp = &p;
  nodes_[id].back = [this, id, pp] {
    const Tensor& gr = g(id);
    if (pp->grad.size() != pp->value.size()) pp->grad.assign(pp->value.size(), 0.0);
    for (std::size_t i = 0; i < gr.data.size(); ++i) pp->grad[i] += gr.data[i];
  };
  return id;
}

NodeId Graph::conv2d(NodeId x, Parameter& weight, Parameter& bias, int stride) {
  const Shape xs = shape(x);
  const Shape ws = weight.shape;
  if (ws.c != xs.c)
    throw ShapeError("conv2d " + weight.name + ": input has " + std::to_string(xs.c) +
                     " channels, weight expects " + std::to_string(ws.c));
  if (ws.h != ws.w || ws.h % 2 == 0) throw ShapeError("conv2d: odd square kernels only");
  if (bias.shape.c != ws.n) throw ShapeError("conv2d: bias size mismatch");
  const int k = ws.h, pad = k / 2;
  const int ho = (xs.h + 2 * pad - k) / stride + 1, wo = (xs.w + 2 * pad - k) / stride + 1;
  if (ho < 1 || wo < 1) throw ShapeError("conv2d: input too small");
  const NodeId wid = param(weight), bid = param(bias);
  const std::size_t ck = static_cast<std::size_t>(xs.c) * k * k, hw = static_cast<std::size_t>(ho) * wo;

  Tensor out(Shape{xs.n, ws.n, ho, wo});
  std::vector<double> cols(ck * hw);
  const auto& kt = kernels::active();
  for (int n = 0; n < xs.n; ++n) {
    im2col(value(x).plane(n, 0), xs.c, xs.h, xs.w, k, stride, ho, wo, cols.data());
    double* o = out.plane(n, 0);
    for (int oc = 0; oc < ws.n; ++oc) std::fill(o + oc * hw, o + (oc + 1) * hw, bias.value[oc]);
    kt.gemm_nn(ws.n, hw, ck, weight.value.data(), ck, cols.data(), hw, o, hw, true);
  }
  const NodeId id = push(std::move(out), true);
  nodes_[id].back = [this, id, x, wid, bid, xs, ws, k, stride, ho, wo, ck, hw] {
    const auto& kt = kernels::active();
    const Tensor& go = g(id);
    Tensor& gw = g(wid);
    Tensor& gb = g(bid);
    const bool dx = needs(x);
    std::vector<double> cols(ck * hw), dcols(dx ? ck * hw : 0);
    for (int n = 0; n < xs.n; ++n) {
      const double* gon = go.plane(n, 0);
      im2col(value(x).plane(n, 0), xs.c, xs.h, xs.w, k, stride, ho, wo, cols.data());
      kt.gemm_nt(ws.n, ck, hw, gon, hw, cols.data(), hw, gw.data.data(), ck, true);
      for (int oc = 0; oc < ws.n; ++oc) {
        double s = 0.0;
        for (std::size_t i = 0; i < hw; ++i) s += gon[oc * hw + i];
        gb.data[oc] += s;
      }
      if (dx) {
        kt.gemm_tn(ck, hw, ws.n, value(wid).data.data(), ck, gon, hw, dcols.data(), hw, false);
        col2im(dcols.data(), xs.c, xs.h, xs.w, k, stride, ho, wo, g(x).plane(n, 0));
      }
    }
  };
  return id;
}

NodeId Graph::silu(NodeId x) {
  Tensor out(shape(x));
  const auto& xv = value(x).data;
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = xv[i] * sigm(xv[i]);
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x] {
      const auto& xv = value(x).data;
      const auto& go = g(id).data;
      auto& gx = g(x).data;
      for (std::size_t i = 0; i < xv.size(); ++i) {
        const double s = sigm(xv[i]);
        gx[i] += go[i] * s * (1.0 + xv[i] * (1.0 - s));
      }
    };
  return id;
}

NodeId Graph::sigmoid(NodeId x) {
  Tensor out(shape(x));
  const auto& xv = value(x).data;
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = sigm(xv[i]);
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x] {
      const auto& y = value(id).data;
      const auto& go = g(id).data;
      auto& gx = g(x).data;
      for (std::size_t i = 0; i < y.size(); ++i) gx[i] += go[i] * y[i] * (1.0 - y[i]);
    };
  return id;
}

NodeId Graph::clamp01(NodeId x) {
  Tensor out(shape(x));
  const auto& xv = value(x).data;
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = std::clamp(xv[i], 0.0, 1.0);
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x] {
      const auto& xv = value(x).data;
      const auto& go = g(id).data;
      auto& gx = g(x).data;
      for (std::size_t i = 0; i < xv.size(); ++i)
        if (xv[i] >= 0.0 && xv[i] <= 1.0) gx[i] += go[i];
    };
  return id;
}

NodeId Graph::clamp01_recoverable(NodeId x) {
  Tensor out(shape(x));
  const auto& xv = value(x).data;
  for (std::size_t i = 0; i < xv.size(); ++i) out.data[i] = std::clamp(xv[i], 0.0, 1.0);
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x] {
      const auto& xv = value(x).data;
      const auto& go = g(id).data;
      auto& gx = g(x).data;
      for (std::size_t i = 0; i < xv.size(); ++i)
        if ((xv[i] >= 0.0 && xv[i] <= 1.0) || (xv[i] < 0.0 && go[i] < 0.0) || (xv[i] > 1.0 && go[i] > 0.0))
          gx[i] += go[i];
    };
  return id;
}

NodeId Graph::add(NodeId a, NodeId b) {
  if (!(shape(a) == shape(b)))
    throw ShapeError("add: " + to_string(shape(a)) + " vs " + to_string(shape(b)));
  Tensor out(shape(a));
  for (std::size_t i = 0; i < out.data.size(); ++i)
    out.data[i] = value(a).data[i] + value(b).data[i];
  const bool ng = needs(a) || needs(b);
  const NodeId id = push(std::move(out), ng);
  if (ng)
    nodes_[id].back = [this, id, a, b] {
      const auto& go = g(id).data;
      for (NodeId t : {a, b})
        if (needs(t)) {
          auto& gt = g(t).data;
          for (std::size_t i = 0; i < go.size(); ++i) gt[i] += go[i];
        }
    };
  return id;
}

NodeId Graph::concat(std::span<const NodeId> xs) {
  if (xs.empty()) throw ShapeError("concat: no inputs");
  Shape s = shape(xs[0]);
  s.c = 0;
  bool ng = false;
  for (NodeId x : xs) {
    const Shape& t = shape(x);
    if (t.n != s.n || t.h != s.h || t.w != s.w)
      throw ShapeError("concat: " + to_string(t) + " does not match " + to_string(shape(xs[0])));
    s.c += t.c;
    ng = ng || needs(x);
  }
  Tensor out(s);
  const std::size_t hw = s.plane();
  for (int n = 0; n < s.n; ++n) {
    int c0 = 0;
    for (NodeId x : xs) {
      const Tensor& v = value(x);
      std::copy(v.plane(n, 0), v.plane(n, 0) + v.shape.c * hw, out.plane(n, c0));
      c0 += v.shape.c;
    }
  }
  const NodeId id = push(std::move(out), ng);
  if (ng) {
    std::vector<NodeId> ins(xs.begin(), xs.end());
    nodes_[id].back = [this, id, ins, hw] {
      const Tensor& go = g(id);
      for (int n = 0; n < go.shape.n; ++n) {
        int c0 = 0;
        for (NodeId x : ins) {
          const int c = shape(x).c;
          if (needs(x)) {
            double* gx = g(x).plane(n, 0);
            const double* src = go.plane(n, c0);
            for (std::size_t i = 0; i < c * hw; ++i) gx[i] += src[i];
          }
          c0 += c;
        }
      }
    };
  }
  return id;
}

NodeId Graph::avgpool(NodeId x, int k) {
  if (k < 1) throw ShapeError("avgpool: kernel must be >= 1");
  const Shape s = shape(x);
  const int ho = (s.h + k - 1) / k, wo = (s.w + k - 1) / k;
  Tensor out(Shape{s.n, s.c, ho, wo});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const double* src = value(x).plane(n, c);
      double* dst = out.plane(n, c);
      for (int oy = 0; oy < ho; ++oy)
        for (int ox = 0; ox < wo; ++ox) {
          const int y1 = std::min(s.h, (oy + 1) * k), x1 = std::min(s.w, (ox + 1) * k);
          double acc = 0.0;
          for (int y = oy * k; y < y1; ++y)
            for (int xx = ox * k; xx < x1; ++xx) acc += src[y * s.w + xx];
          dst[oy * wo + ox] = acc / ((y1 - oy * k) * (x1 - ox * k));
        }
    }
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x, k, s, ho, wo] {
      const Tensor& go = g(id);
      for (int n = 0; n < s.n; ++n)
        for (int c = 0; c < s.c; ++c) {
          const double* gs = go.plane(n, c);
          double* gx = g(x).plane(n, c);
          for (int oy = 0; oy < ho; ++oy)
            for (int ox = 0; ox < wo; ++ox) {
              const int y1 = std::min(s.h, (oy + 1) * k), x1 = std::min(s.w, (ox + 1) * k);
              const double v = gs[oy * wo + ox] / ((y1 - oy * k) * (x1 - ox * k));
              for (int y = oy * k; y < y1; ++y)
                for (int xx = ox * k; xx < x1; ++xx) gx[y * s.w + xx] += v;
            }
        }
    };
  return id;
}

NodeId Graph::resize(NodeId x, int out_h, int out_w) {
  const Shape s = shape(x);
  if (out_h < 1 || out_w < 1) throw ShapeError("resize: output size must be >= 1");
  if (s.h == out_h && s.w == out_w) return x;
  const auto ty = taps(s.h, out_h), tx = taps(s.w, out_w);
  Tensor out(Shape{s.n, s.c, out_h, out_w});
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) {
      const double* in = value(x).plane(n, c);
      double* o = out.plane(n, c);
      for (int r = 0; r < out_h; ++r)
        for (int col = 0; col < out_w; ++col) {
          const Tap& a = ty[r];
          const Tap& b = tx[col];
          const double top = in[a.i0 * s.w + b.i0] * (1.0 - b.w1) + in[a.i0 * s.w + b.i1] * b.w1;
          const double bot = in[a.i1 * s.w + b.i0] * (1.0 - b.w1) + in[a.i1 * s.w + b.i1] * b.w1;
          o[r * out_w + col] = top * (1.0 - a.w1) + bot * a.w1;
        }
    }
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x, s, out_h, out_w, ty, tx] {
      const Tensor& go = g(id);
      for (int n = 0; n < s.n; ++n)
        for (int c = 0; c < s.c; ++c) {
          const double* gs = go.plane(n, c);
          double* gx = g(x).plane(n, c);
          for (int r = 0; r < out_h; ++r)
            for (int col = 0; col < out_w; ++col) {
              const Tap& a = ty[r];
              const Tap& b = tx[col];
              const double v = gs[r * out_w + col];
              gx[a.i0 * s.w + b.i0] += v * (1.0 - a.w1) * (1.0 - b.w1);
              gx[a.i0 * s.w + b.i1] += v * (1.0 - a.w1) * b.w1;
              gx[a.i1 * s.w + b.i0] += v * a.w1 * (1.0 - b.w1);
              gx[a.i1 * s.w + b.i1] += v * a.w1 * b.w1;
            }
        }
    };
  return id;
}

NodeId Graph::softmax_channels(NodeId x) {
  const Shape s = shape(x);
  const std::size_t hw = s.plane();
  Tensor out(s);
  std::vector<double> in(s.c), o(s.c);
  for (int n = 0; n < s.n; ++n)
    for (std::size_t i = 0; i < hw; ++i) {
      for (int c = 0; c < s.c; ++c) in[c] = value(x).plane(n, c)[i];
      softmax(in.data(), s.c, o.data());
      for (int c = 0; c < s.c; ++c) out.plane(n, c)[i] = o[c];
    }
  const NodeId id = push(std::move(out), needs(x));
  if (needs(x))
    nodes_[id].back = [this, id, x, s, hw] {
      const Tensor& y = value(id);
      const Tensor& go = g(id);
      Tensor& gx = g(x);
      for (int n = 0; n < s.n; ++n)
        for (std::size_t i = 0; i < hw; ++i) {
          double dotp = 0.0;
          for (int c = 0; c < s.c; ++c) dotp += y.plane(n, c)[i] * go.plane(n, c)[i];
          for (int c = 0; c < s.c; ++c)
            gx.plane(n, c)[i] += y.plane(n, c)[i] * (go.plane(n, c)[i] - dotp);
        }
    };
  return id;
}

NodeId Graph::weighted_sum(std::span<const NodeId> branches, NodeId weights) {
  const Shape ws = shape(weights);
  if (branches.empty() || ws.c != static_cast<int>(branches.size()))
    throw ShapeError("weighted_sum: one weight channel per branch required");
  const Shape s = shape(branches[0]);
  bool ng = needs(weights);
  for (NodeId b : branches) {
    if (!(shape(b) == s)) throw ShapeError("weighted_sum: branch shapes differ");
    ng = ng || needs(b);
  }
  if (ws.n != s.n || ws.h != s.h || ws.w != s.w)
    throw ShapeError("weighted_sum: weight map does not match branches");
  const std::size_t hw = s.plane();
  Tensor out(s);
  for (int n = 0; n < s.n; ++n)
    for (std::size_t bi = 0; bi < branches.size(); ++bi) {
      const double* wv = value(weights).plane(n, static_cast<int>(bi));
      for (int c = 0; c < s.c; ++c) {
        const double* bv = value(branches[bi]).plane(n, c);
        double* o = out.plane(n, c);
        for (std::size_t i = 0; i < hw; ++i) o[i] += wv[i] * bv[i];
      }
    }
  const NodeId id = push(std::move(out), ng);
  if (ng) {
    std::vector<NodeId> bs(branches.begin(), branches.end());
    nodes_[id].back = [this, id, bs, weights, s, hw] {
      const Tensor& go = g(id);
      for (int n = 0; n < s.n; ++n)
        for (std::size_t bi = 0; bi < bs.size(); ++bi) {
          const double* wv = value(weights).plane(n, static_cast<int>(bi));
          double* gw = needs(weights) ? g(weights).plane(n, static_cast<int>(bi)) : nullptr;
          for (int c = 0; c < s.c; ++c) {
            const double* gov = go.plane(n, c);
            const double* bv = value(bs[bi]).plane(n, c);
            double* gb = needs(bs[bi]) ? g(bs[bi]).plane(n, c) : nullptr;
            for (std::size_t i = 0; i < hw; ++i) {
              if (gb) gb[i] += wv[i] * gov[i];
              if (gw) gw[i] += bv[i] * gov[i];
            }
          }
        }
    };
  }
  return id;
}

NodeId Graph::bce(NodeId prob, const Tensor& target, double eps) {
  if (!(shape(prob) == target.shape)) throw ShapeError("bce: shape mismatch");
  const auto& p = value(prob).data;
  const double inv = 1.0 / static_cast<double>(p.size());
  double s = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double q = std::clamp(p[i], eps, 1.0 - eps), t = target.data[i];
    s -= t * std::log(q) + (1.0 - t) * std::log(1.0 - q);
  }
  const NodeId id = push(Tensor(Shape{}, s * inv), needs(prob));
  if (needs(prob))
    nodes_[id].back = [this, id, prob, target, eps, inv] {
      const double go = g(id).data[0] * inv;
      const auto& p = value(prob).data;
      auto& gp = g(prob).data;
      for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] < eps || p[i] > 1.0 - eps) continue;
        const double t = target.data[i];
        gp[i] += go * (-t / p[i] + (1.0 - t) / (1.0 - p[i]));
      }
    };
  return id;
}

NodeId Graph::l1(NodeId pred, const Tensor& target) {
  if (!(shape(pred) == target.shape)) throw ShapeError("l1: shape mismatch");
  const auto& p = value(pred).data;
  const double inv = 1.0 / static_cast<double>(p.size());
  const double s = kernels::active().abs_diff_sum(p.size(), p.data(), target.data.data());
  const NodeId id = push(Tensor(Shape{}, s * inv), needs(pred));
  if (needs(pred))
    nodes_[id].back = [this, id, pred, target, inv] {
      const double go = g(id).data[0] * inv;
      const auto& p = value(pred).data;
      auto& gp = g(pred).data;
      for (std::size_t i = 0; i < p.size(); ++i) {
        const double d = p[i] - target.data[i];
        gp[i] += d > 0 ? go : (d < 0 ? -go : 0.0);
      }
    };
  return id;
}

NodeId Graph::combine(NodeId x, double a, NodeId y, double b) {
  require_scalar(shape(x), "combine");
  require_scalar(shape(y), "combine");
  const bool ng = needs(x) || needs(y);
  const NodeId id = push(Tensor(Shape{}, a * value(x).data[0] + b * value(y).data[0]), ng);
  if (ng)
    nodes_[id].back = [this, id, x, a, y, b] {
      const double go = g(id).data[0];
      if (needs(x)) g(x).data[0] += a * go;
      if (needs(y)) g(y).data[0] += b * go;
    };
  return id;
}

NodeId Graph::consistency(NodeId features, const std::vector<std::vector<int>>& groups) {
  const Shape s = shape(features);
  if (groups.empty()) throw InvalidInput("consistency: no groups");
  for (const auto& gr : groups) {
    if (gr.size() < 2) throw InvalidInput("consistency: groups need at least two members");
    for (int i : gr)
      if (i < 0 || i >= s.n) throw InvalidInput("consistency: sample index out of range");
  }
  const std::size_t hw = s.plane();
  // Per (sample, channel) spatial softmax.
  Tensor prob(s);
  for (int n = 0; n < s.n; ++n)
    for (int c = 0; c < s.c; ++c) softmax(value(features).plane(n, c), hw, prob.plane(n, c));

  double total = 0.0;
  for (const auto& gr : groups) {
    double acc = 0.0;
    const std::size_t pairs = gr.size() * (gr.size() - 1) / 2;
    for (std::size_t a = 0; a < gr.size(); ++a)
      for (std::size_t b = a + 1; b < gr.size(); ++b)
        for (int c = 0; c < s.c; ++c)
          acc += js_divergence({prob.plane(gr[a], c), hw}, {prob.plane(gr[b], c), hw});
    total += acc / (static_cast<double>(pairs) * s.c);
  }
  const double value_out = total / static_cast<double>(groups.size());
  const NodeId id = push(Tensor(Shape{}, value_out), needs(features));
  if (needs(features))
    nodes_[id].back = [this, id, features, groups, s, hw, prob] {
      const double go = g(id).data[0];
      Tensor dp(s);
      for (const auto& gr : groups) {
        const std::size_t pairs = gr.size() * (gr.size() - 1) / 2;
        const double scale = go / (static_cast<double>(groups.size()) * pairs * s.c);
        for (std::size_t a = 0; a < gr.size(); ++a)
          for (std::size_t b = a + 1; b < gr.size(); ++b)
            for (int c = 0; c < s.c; ++c) {
              const double* p = prob.plane(gr[a], c);
              const double* q = prob.plane(gr[b], c);
              double* dpa = dp.plane(gr[a], c);
              double* dqb = dp.plane(gr[b], c);
              for (std::size_t i = 0; i < hw; ++i) {
                const double m = 0.5 * (p[i] + q[i]);
                if (p[i] > 0) dpa[i] += scale * 0.5 * std::log(p[i] / m);
                if (q[i] > 0) dqb[i] += scale * 0.5 * std::log(q[i] / m);
              }
            }
      }
      Tensor& gx = g(features);
      for (int n = 0; n < s.n; ++n)
        for (int c = 0; c < s.c; ++c) {
          const double* p = prob.plane(n, c);
          const double* d = dp.plane(n, c);
          double dotp = 0.0;
          for (std::size_t i = 0; i < hw; ++i) dotp += p[i] * d[i];
          double* gxp = gx.plane(n, c);
          for (std::size_t i = 0; i < hw; ++i) gxp[i] += p[i] * (d[i] - dotp);
        }
    };
  return id;
}

void Graph::backward(NodeId root) {
  require_scalar(shape(root), "backward");
  if (!needs(root)) return;
  g(root).data[0] += 1.0;
  for (NodeId id = root; id >= 0; --id) {
    Node& n = nodes_[id];
    if (n.needs_grad && n.back && n.grad.data.size() == n.value.data.size()) n.back();
  }
}

}  // namespace unimatte::nn
