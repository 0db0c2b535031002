#include "fovholo/autodiff.hpp"

#include <cmath>

#include "fovholo/errors.hpp"
#include "fovholo/fft.hpp"

namespace fovholo::ad {

namespace {

int reflect101(int i, int n) {
  if (n == 1) return 0;
  while (i < 0 || i >= n) {
    if (i < 0) i = -i;
    if (i >= n) i = 2 * (n - 1) - i;
  }
  return i;
}

}  // namespace

Var Tape::make(Grid value, bool requires_grad, std::function<void(Tape&, int)> backprop) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

Grid& Tape::grad_buffer(int id) {
  Node& n = nodes_[id];
  if (n.grad.data.empty()) n.grad = Grid(n.value.width, n.value.height, 0.0);
  return n.grad;
}

const Grid* Tape::grad_ptr(int id) const {
  const Grid& g = nodes_[id].grad;
  return g.data.empty() ? nullptr : &g;
}

Var Tape::input(Grid v) { return make(std::move(v), true, nullptr); }
Var Tape::constant(Grid v) { return make(std::move(v), false, nullptr); }
Var Tape::constant_scalar(double v) { return constant(Grid(1, 1, v)); }

const Grid& Tape::value(Var v) const { return nodes_[v.id].value; }

const Grid& Tape::grad(Var v) const {
  const Node& n = nodes_[v.id];
  if (n.grad.data.empty())
    const_cast<Node&>(n).grad = Grid(n.value.width, n.value.height, 0.0);
  return n.grad;
}

double Tape::scalar_value(Var v) const {
  const Grid& g = value(v);
  if (g.size() != 1) throw InvalidInput("scalar_value: node is not 1x1");
  return g.data[0];
}

void Tape::backward(Var target) {
  if (value(target).size() != 1)
    throw InvalidInput("backward: target must be a 1x1 scalar node");
  grad_buffer(target.id).data[0] = 1.0;
  for (int i = target.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (n.requires_grad && n.backprop) n.backprop(*this, i);
  }
}

// ---------------------------------------------------------------------------
// elementwise

Var Tape::add(Var a, Var b) {
  const Grid& av = value(a);
  const Grid& bv = value(b);
  if (!av.same_shape(bv)) throw InvalidInput("add: shape mismatch");
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] + bv.data[i];
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return make(std::move(out), rg, [ia, ib](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    if (t.nodes_[ia].requires_grad) {
      Grid& ga = t.grad_buffer(ia);
      for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += g->data[i];
    }
    if (t.nodes_[ib].requires_grad) {
      Grid& gb = t.grad_buffer(ib);
      for (size_t i = 0; i < gb.size(); ++i) gb.data[i] += g->data[i];
    }
  });
}

Var Tape::sub(Var a, Var b) {
  const Grid& av = value(a);
  const Grid& bv = value(b);
  if (!av.same_shape(bv)) throw InvalidInput("sub: shape mismatch");
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] - bv.data[i];
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return make(std::move(out), rg, [ia, ib](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    if (t.nodes_[ia].requires_grad) {
      Grid& ga = t.grad_buffer(ia);
      for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += g->data[i];
    }
    if (t.nodes_[ib].requires_grad) {
      Grid& gb = t.grad_buffer(ib);
      for (size_t i = 0; i < gb.size(); ++i) gb.data[i] -= g->data[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Grid& av = value(a);
  const Grid& bv = value(b);
  if (!av.same_shape(bv)) throw InvalidInput("mul: shape mismatch");
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] * bv.data[i];
  const bool rg = needs_grad(a) || needs_grad(b);
  const int ia = a.id, ib = b.id;
  return make(std::move(out), rg, [ia, ib](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    const Grid& av2 = t.nodes_[ia].value;
    const Grid& bv2 = t.nodes_[ib].value;
    if (t.nodes_[ia].requires_grad) {
      Grid& ga = t.grad_buffer(ia);
      for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += bv2.data[i] * g->data[i];
    }
    if (t.nodes_[ib].requires_grad) {
      Grid& gb = t.grad_buffer(ib);
      for (size_t i = 0; i < gb.size(); ++i) gb.data[i] += av2.data[i] * g->data[i];
    }
  });
}

Var Tape::mul_grid(Var a, const Grid* k) {
  const Grid& av = value(a);
  if (!av.same_shape(*k)) throw InvalidInput("mul_grid: shape mismatch");
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] * k->data[i];
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, k](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += k->data[i] * g->data[i];
  });
}

Var Tape::scale(Var a, double s) {
  const Grid& av = value(a);
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] * s;
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, s](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += s * g->data[i];
  });
}

Var Tape::square(Var a) {
  const Grid& av = value(a);
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = av.data[i] * av.data[i];
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    const Grid& av2 = t.nodes_[ia].value;
    Grid& ga = t.grad_buffer(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += 2.0 * av2.data[i] * g->data[i];
  });
}

Var Tape::abs_val(Var a) {
  const Grid& av = value(a);
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) out.data[i] = std::fabs(av.data[i]);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    const Grid& av2 = t.nodes_[ia].value;
    Grid& ga = t.grad_buffer(ia);
    for (size_t i = 0; i < ga.size(); ++i) {
      const double v = av2.data[i];
      const double s = v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0);
      ga.data[i] += s * g->data[i];
    }
  });
}

Var Tape::sqrt_shift(Var a, double eps) {
  const Grid& av = value(a);
  const double base = std::sqrt(eps);
  Grid out(av.width, av.height);
  for (size_t i = 0; i < out.size(); ++i) {
    const double v = av.data[i] > 0.0 ? av.data[i] : 0.0;
    out.data[i] = std::sqrt(v + eps) - base;
  }
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, eps](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    const Grid& av2 = t.nodes_[ia].value;
    Grid& ga = t.grad_buffer(ia);
    for (size_t i = 0; i < ga.size(); ++i) {
      const double v = av2.data[i];
      if (v > 0.0) ga.data[i] += 0.5 / std::sqrt(v + eps) * g->data[i];
    }
  });
}

Var Tape::lincomb(const std::vector<Var>& xs, const std::vector<double>& coeffs, double bias) {
  if (xs.empty() || xs.size() != coeffs.size()) throw InvalidInput("lincomb: arity mismatch");
  const Grid& first = value(xs[0]);
  Grid out(first.width, first.height, bias);
  bool rg = false;
  std::vector<int> ids(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) {
    const Grid& xv = value(xs[k]);
    if (!xv.same_shape(first)) throw InvalidInput("lincomb: shape mismatch");
    for (size_t i = 0; i < out.size(); ++i) out.data[i] += coeffs[k] * xv.data[i];
    rg = rg || needs_grad(xs[k]);
    ids[k] = xs[k].id;
  }
  std::vector<double> cs = coeffs;
  return make(std::move(out), rg, [ids, cs](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (!t.nodes_[ids[k]].requires_grad) continue;
      Grid& gx = t.grad_buffer(ids[k]);
      for (size_t i = 0; i < gx.size(); ++i) gx.data[i] += cs[k] * g->data[i];
    }
  });
}

// ---------------------------------------------------------------------------
// reductions

Var Tape::sum(Var a) {
  const Grid& av = value(a);
  double s = 0.0;
  for (double v : av.data) s += v;
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(Grid(1, 1, s), rg, [ia](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    const double gv = g->data[0];
    Grid& ga = t.grad_buffer(ia);
    for (size_t i = 0; i < ga.size(); ++i) ga.data[i] += gv;
  });
}

Var Tape::add_scalars(const std::vector<Var>& xs) {
  if (xs.empty()) throw InvalidInput("add_scalars: empty");
  double s = 0.0;
  bool rg = false;
  std::vector<int> ids(xs.size());
  for (size_t k = 0; k < xs.size(); ++k) {
    s += scalar_value(xs[k]);
    rg = rg || needs_grad(xs[k]);
    ids[k] = xs[k].id;
  }
  return make(Grid(1, 1, s), rg, [ids](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    for (int id : ids)
      if (t.nodes_[id].requires_grad) t.grad_buffer(id).data[0] += g->data[0];
  });
}

// ---------------------------------------------------------------------------
// filtering / resampling

namespace {

Grid conv_pass_x(const Grid& in, const std::array<double, 5>& taps) {
  Grid out(in.width, in.height);
  const int w = in.width;
  for (int y = 0; y < in.height; ++y) {
    const double* row = &in.data[static_cast<size_t>(y) * w];
    double* orow = &out.data[static_cast<size_t>(y) * w];
    if (w >= 5) {
      for (int x = 0; x < 2; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += taps[t + 2] * row[reflect101(x + t, w)];
        orow[x] = s;
      }
      for (int x = 2; x < w - 2; ++x)
        orow[x] = taps[0] * row[x - 2] + taps[1] * row[x - 1] + taps[2] * row[x] +
                  taps[3] * row[x + 1] + taps[4] * row[x + 2];
      for (int x = w - 2; x < w; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += taps[t + 2] * row[reflect101(x + t, w)];
        orow[x] = s;
      }
    } else {
      for (int x = 0; x < w; ++x) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += taps[t + 2] * row[reflect101(x + t, w)];
        orow[x] = s;
      }
    }
  }
  return out;
}

void conv_scatter_x(Grid& ga, const Grid& g, const std::array<double, 5>& taps) {
  const int w = g.width;
  for (int y = 0; y < g.height; ++y) {
    const double* grow = &g.data[static_cast<size_t>(y) * w];
    double* arow = &ga.data[static_cast<size_t>(y) * w];
    for (int x = 0; x < w; ++x) {
      const double gv = grow[x];
      if (gv == 0.0) continue;
      for (int t = -2; t <= 2; ++t) arow[reflect101(x + t, w)] += taps[t + 2] * gv;
    }
  }
}

Grid conv_pass_y(const Grid& in, const std::array<double, 5>& taps) {
  Grid out(in.width, in.height);
  const int w = in.width, h = in.height;
  for (int y = 0; y < h; ++y) {
    const int y0 = reflect101(y - 2, h), y1 = reflect101(y - 1, h);
    const int y3 = reflect101(y + 1, h), y4 = reflect101(y + 2, h);
    const double* r0 = &in.data[static_cast<size_t>(y0) * w];
    const double* r1 = &in.data[static_cast<size_t>(y1) * w];
    const double* r2 = &in.data[static_cast<size_t>(y) * w];
    const double* r3 = &in.data[static_cast<size_t>(y3) * w];
    const double* r4 = &in.data[static_cast<size_t>(y4) * w];
    double* orow = &out.data[static_cast<size_t>(y) * w];
    for (int x = 0; x < w; ++x)
      orow[x] = taps[0] * r0[x] + taps[1] * r1[x] + taps[2] * r2[x] +
                taps[3] * r3[x] + taps[4] * r4[x];
  }
  return out;
}

void conv_scatter_y(Grid& ga, const Grid& g, const std::array<double, 5>& taps) {
  const int w = g.width, h = g.height;
  for (int y = 0; y < h; ++y) {
    const int ys[5] = {reflect101(y - 2, h), reflect101(y - 1, h), y,
                       reflect101(y + 1, h), reflect101(y + 2, h)};
    const double* grow = &g.data[static_cast<size_t>(y) * w];
    for (int t = 0; t < 5; ++t) {
      double* arow = &ga.data[static_cast<size_t>(ys[t]) * w];
      const double tap = taps[t];
      for (int x = 0; x < w; ++x) arow[x] += tap * grow[x];
    }
  }
}

}  // namespace

Var Tape::conv_x(Var a, const std::array<double, 5>& taps) {
  Grid out = conv_pass_x(value(a), taps);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, taps](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    conv_scatter_x(t.grad_buffer(ia), *g, taps);
  });
}

Var Tape::conv_y(Var a, const std::array<double, 5>& taps) {
  Grid out = conv_pass_y(value(a), taps);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, taps](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    conv_scatter_y(t.grad_buffer(ia), *g, taps);
  });
}

Var Tape::downsample2(Var a) {
  const Grid& av = value(a);
  const int ow = (av.width + 1) / 2, oh = (av.height + 1) / 2;
  Grid out(ow, oh);
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) out.at(x, y) = av.at(2 * x, 2 * y);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (int y = 0; y < g->height; ++y)
      for (int x = 0; x < g->width; ++x) ga.at(2 * x, 2 * y) += g->at(x, y);
  });
}

Var Tape::zero_upsample(Var a, int tw, int th) {
  const Grid& av = value(a);
  if ((tw + 1) / 2 != av.width || (th + 1) / 2 != av.height)
    throw InvalidInput("zero_upsample: target dims inconsistent with source");
  Grid out(tw, th, 0.0);
  for (int y = 0; y < av.height; ++y)
    for (int x = 0; x < av.width; ++x) out.at(2 * x, 2 * y) = av.at(x, y);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (int y = 0; y < ga.height; ++y)
      for (int x = 0; x < ga.width; ++x) ga.at(x, y) += g->at(2 * x, 2 * y);
  });
}

Var Tape::avgpool2(Var a) {
  const Grid& av = value(a);
  const int ow = (av.width + 1) / 2, oh = (av.height + 1) / 2;
  Grid out(ow, oh);
  for (int y = 0; y < oh; ++y) {
    const int y0 = 2 * y, y1 = std::min(2 * y + 1, av.height - 1);
    for (int x = 0; x < ow; ++x) {
      const int x0 = 2 * x, x1 = std::min(2 * x + 1, av.width - 1);
      out.at(x, y) = 0.25 * (av.at(x0, y0) + av.at(x1, y0) + av.at(x0, y1) + av.at(x1, y1));
    }
  }
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (int y = 0; y < g->height; ++y) {
      const int y0 = 2 * y, y1 = std::min(2 * y + 1, ga.height - 1);
      for (int x = 0; x < g->width; ++x) {
        const int x0 = 2 * x, x1 = std::min(2 * x + 1, ga.width - 1);
        const double q = 0.25 * g->at(x, y);
        ga.at(x0, y0) += q;
        ga.at(x1, y0) += q;
        ga.at(x0, y1) += q;
        ga.at(x1, y1) += q;
      }
    }
  });
}

Var Tape::gather(const std::vector<Var>& sources, const GatherPlan* plan) {
  const int tpp = plan->taps_per_pixel;
  Grid out(plan->out_width, plan->out_height);
  bool rg = false;
  std::vector<int> ids(sources.size());
  std::vector<const double*> vals(sources.size());
  for (size_t k = 0; k < sources.size(); ++k) {
    ids[k] = sources[k].id;
    vals[k] = value(sources[k]).data.data();
    rg = rg || needs_grad(sources[k]);
  }
  const size_t npx = plan->pixel_count();
  const int* src = plan->source.data();
  const int* idx = plan->index.data();
  const double* wgt = plan->weight.data();
  const double** vp = vals.data();
  for (size_t p = 0; p < npx; ++p) {
    const size_t base = p * tpp;
    double s = 0.0;
    for (int k = 0; k < tpp; ++k) s += wgt[base + k] * vp[src[base + k]][idx[base + k]];
    out.data[p] = s;
  }
  return make(std::move(out), rg, [ids, plan, tpp](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    // resolve grad buffers once; sources that are constants get nullptr
    std::vector<double*> bufs(ids.size(), nullptr);
    bool all = true;
    for (size_t k = 0; k < ids.size(); ++k) {
      if (t.nodes_[ids[k]].requires_grad) bufs[k] = t.grad_buffer(ids[k]).data.data();
      else all = false;
    }
    const size_t npx2 = plan->pixel_count();
    const int* src = plan->source.data();
    const int* idx = plan->index.data();
    const double* wgt = plan->weight.data();
    double** bp = bufs.data();
    if (all) {
      for (size_t p = 0; p < npx2; ++p) {
        const double gv = g->data[p];
        const size_t base = p * tpp;
        for (int k = 0; k < tpp; ++k) bp[src[base + k]][idx[base + k]] += wgt[base + k] * gv;
      }
    } else {
      for (size_t p = 0; p < npx2; ++p) {
        const double gv = g->data[p];
        if (gv == 0.0) continue;
        const size_t base = p * tpp;
        for (int k = 0; k < tpp; ++k) {
          double* buf = bp[src[base + k]];
          if (buf) buf[idx[base + k]] += wgt[base + k] * gv;
        }
      }
    }
  });
}

Var Tape::embed_center(Var a, int tw, int th) {
  const Grid& av = value(a);
  if (tw < av.width || th < av.height) throw InvalidInput("embed_center: target too small");
  Grid out(tw, th, 0.0);
  const int ox = (tw - av.width) / 2, oy = (th - av.height) / 2;
  for (int y = 0; y < av.height; ++y)
    for (int x = 0; x < av.width; ++x) out.at(x + ox, y + oy) = av.at(x, y);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, ox, oy](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (int y = 0; y < ga.height; ++y)
      for (int x = 0; x < ga.width; ++x) ga.at(x, y) += g->at(x + ox, y + oy);
  });
}

Var Tape::crop_center(Var a, int w, int h) {
  const Grid& av = value(a);
  if (w > av.width || h > av.height) throw InvalidInput("crop_center: crop too large");
  const int ox = (av.width - w) / 2, oy = (av.height - h) / 2;
  Grid out(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) out.at(x, y) = av.at(x + ox, y + oy);
  const bool rg = needs_grad(a);
  const int ia = a.id;
  return make(std::move(out), rg, [ia, ox, oy](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    Grid& ga = t.grad_buffer(ia);
    for (int y = 0; y < g->height; ++y)
      for (int x = 0; x < g->width; ++x) ga.at(x + ox, y + oy) += g->at(x, y);
  });
}

// ---------------------------------------------------------------------------
// complex pairs

CVar Tape::expj(Var phase) {
  const Grid& pv = value(phase);
  Grid cre(pv.width, pv.height), cim(pv.width, pv.height);
  for (size_t i = 0; i < pv.size(); ++i) {
    cre.data[i] = std::cos(pv.data[i]);
    cim.data[i] = std::sin(pv.data[i]);
  }
  const bool rg = needs_grad(phase);
  const int ip = phase.id;
  const int self_re = static_cast<int>(nodes_.size());
  const int self_im = self_re + 1;
  // joint adjoint lives on the re node; by the time backward() reaches it,
  // both output grads are fully accumulated (consumers come later in the tape)
  Var re = make(std::move(cre), rg, [ip, self_re, self_im](Tape& t, int) {
    const Grid* gre = t.grad_ptr(self_re);
    const Grid* gim = t.grad_ptr(self_im);
    if (!gre && !gim) return;
    const Grid& c = t.nodes_[self_re].value;
    const Grid& s = t.nodes_[self_im].value;
    Grid& gp = t.grad_buffer(ip);
    for (size_t i = 0; i < gp.size(); ++i) {
      double acc = 0.0;
      if (gre) acc -= s.data[i] * gre->data[i];
      if (gim) acc += c.data[i] * gim->data[i];
      gp.data[i] += acc;
    }
  });
  Var im = make(std::move(cim), rg, nullptr);
  return {re, im};
}

namespace {

CGrid to_cgrid(const Grid& re, const Grid& im) {
  CGrid z(re.width, re.height);
  for (size_t i = 0; i < z.size(); ++i) z.data[i] = Complex(re.data[i], im.data[i]);
  return z;
}

}  // namespace

CVar Tape::fft2(CVar z) {
  const Grid& re = value(z.re);
  const Grid& im = value(z.im);
  if (!re.same_shape(im)) throw InvalidInput("fft2: re/im shape mismatch");
  CGrid out = fovholo::fft2(to_cgrid(re, im));
  Grid ore(re.width, re.height), oim(re.width, re.height);
  for (size_t i = 0; i < out.size(); ++i) {
    ore.data[i] = out.data[i].real();
    oim.data[i] = out.data[i].imag();
  }
  const bool rg = needs_grad(z.re) || needs_grad(z.im);
  const int ire = z.re.id, iim = z.im.id;
  const int self_re = static_cast<int>(nodes_.size());
  const int self_im = self_re + 1;
  Var vre = make(std::move(ore), rg, [ire, iim, self_re, self_im](Tape& t, int) {
    const Grid* gre = t.grad_ptr(self_re);
    const Grid* gim = t.grad_ptr(self_im);
    if (!gre && !gim) return;
    const Grid& shape = t.nodes_[self_re].value;
    Grid zero;
    if (!gre || !gim) zero = Grid(shape.width, shape.height, 0.0);
    // adjoint of the unitary FFT is the unitary inverse FFT
    CGrid gz = fovholo::ifft2(to_cgrid(gre ? *gre : zero, gim ? *gim : zero));
    if (t.nodes_[ire].requires_grad) {
      Grid& g = t.grad_buffer(ire);
      for (size_t i = 0; i < g.size(); ++i) g.data[i] += gz.data[i].real();
    }
    if (t.nodes_[iim].requires_grad) {
      Grid& g = t.grad_buffer(iim);
      for (size_t i = 0; i < g.size(); ++i) g.data[i] += gz.data[i].imag();
    }
  });
  Var vim = make(std::move(oim), rg, nullptr);
  return {vre, vim};
}

CVar Tape::ifft2(CVar z) {
  const Grid& re = value(z.re);
  const Grid& im = value(z.im);
  if (!re.same_shape(im)) throw InvalidInput("ifft2: re/im shape mismatch");
  CGrid out = fovholo::ifft2(to_cgrid(re, im));
  Grid ore(re.width, re.height), oim(re.width, re.height);
  for (size_t i = 0; i < out.size(); ++i) {
    ore.data[i] = out.data[i].real();
    oim.data[i] = out.data[i].imag();
  }
  const bool rg = needs_grad(z.re) || needs_grad(z.im);
  const int ire = z.re.id, iim = z.im.id;
  const int self_re = static_cast<int>(nodes_.size());
  const int self_im = self_re + 1;
  Var vre = make(std::move(ore), rg, [ire, iim, self_re, self_im](Tape& t, int) {
    const Grid* gre = t.grad_ptr(self_re);
    const Grid* gim = t.grad_ptr(self_im);
    if (!gre && !gim) return;
    const Grid& shape = t.nodes_[self_re].value;
    Grid zero;
    if (!gre || !gim) zero = Grid(shape.width, shape.height, 0.0);
    CGrid gz = fovholo::fft2(to_cgrid(gre ? *gre : zero, gim ? *gim : zero));
    if (t.nodes_[ire].requires_grad) {
      Grid& g = t.grad_buffer(ire);
      for (size_t i = 0; i < g.size(); ++i) g.data[i] += gz.data[i].real();
    }
    if (t.nodes_[iim].requires_grad) {
      Grid& g = t.grad_buffer(iim);
      for (size_t i = 0; i < g.size(); ++i) g.data[i] += gz.data[i].imag();
    }
  });
  Var vim = make(std::move(oim), rg, nullptr);
  return {vre, vim};
}

CVar Tape::cmul_grid(CVar z, const CGrid* kernel) {
  const Grid& re = value(z.re);
  const Grid& im = value(z.im);
  if (re.width != kernel->width || re.height != kernel->height)
    throw InvalidInput("cmul_grid: kernel shape mismatch");
  Grid ore(re.width, re.height), oim(re.width, re.height);
  for (size_t i = 0; i < ore.size(); ++i) {
    const Complex k = kernel->data[i];
    ore.data[i] = re.data[i] * k.real() - im.data[i] * k.imag();
    oim.data[i] = re.data[i] * k.imag() + im.data[i] * k.real();
  }
  const bool rg = needs_grad(z.re) || needs_grad(z.im);
  const int ire = z.re.id, iim = z.im.id;
  const int self_re = static_cast<int>(nodes_.size());
  const int self_im = self_re + 1;
  Var vre = make(std::move(ore), rg, [ire, iim, kernel, self_re, self_im](Tape& t, int) {
    const Grid* gre = t.grad_ptr(self_re);
    const Grid* gim = t.grad_ptr(self_im);
    if (!gre && !gim) return;
    const bool wre = t.nodes_[ire].requires_grad;
    const bool wim = t.nodes_[iim].requires_grad;
    Grid* gr = wre ? &t.grad_buffer(ire) : nullptr;
    Grid* gi = wim ? &t.grad_buffer(iim) : nullptr;
    const size_t n = kernel->size();
    for (size_t i = 0; i < n; ++i) {
      const Complex k = kernel->data[i];
      const double a = gre ? gre->data[i] : 0.0;
      const double b = gim ? gim->data[i] : 0.0;
      if (gr) gr->data[i] += k.real() * a + k.imag() * b;
      if (gi) gi->data[i] += -k.imag() * a + k.real() * b;
    }
  });
  Var vim = make(std::move(oim), rg, nullptr);
  return {vre, vim};
}

Var Tape::abs2(CVar z) {
  const Grid& re = value(z.re);
  const Grid& im = value(z.im);
  if (!re.same_shape(im)) throw InvalidInput("abs2: re/im shape mismatch");
  Grid out(re.width, re.height);
  for (size_t i = 0; i < out.size(); ++i)
    out.data[i] = re.data[i] * re.data[i] + im.data[i] * im.data[i];
  const bool rg = needs_grad(z.re) || needs_grad(z.im);
  const int ire = z.re.id, iim = z.im.id;
  return make(std::move(out), rg, [ire, iim](Tape& t, int self) {
    const Grid* g = t.grad_ptr(self);
    if (!g) return;
    const Grid& re2 = t.nodes_[ire].value;
    const Grid& im2 = t.nodes_[iim].value;
    if (t.nodes_[ire].requires_grad) {
      Grid& gr = t.grad_buffer(ire);
      for (size_t i = 0; i < gr.size(); ++i) gr.data[i] += 2.0 * re2.data[i] * g->data[i];
    }
    if (t.nodes_[iim].requires_grad) {
      Grid& gi = t.grad_buffer(iim);
      for (size_t i = 0; i < gi.size(); ++i) gi.data[i] += 2.0 * im2.data[i] * g->data[i];
    }
  });
}

CVar Tape::cembed_center(CVar z, int tw, int th) {
  return {embed_center(z.re, tw, th), embed_center(z.im, tw, th)};
}

CVar Tape::ccrop_center(CVar z, int w, int h) {
  return {crop_center(z.re, w, h), crop_center(z.im, w, h)};
}

}  // namespace fovholo::ad
