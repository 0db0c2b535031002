#pragma once

#include <array>
#include <functional>
#include <vector>

#include "fovholo/grid.hpp"

namespace fovholo::ad {

/// Handle to a node on a Tape.
struct Var {
  int id = -1;
  bool valid() const { return id >= 0; }
};

/// Complex-valued variable as a (re, im) pair of real nodes.
struct CVar {
  Var re, im;
};

/// Weighted-gather plan: each output pixel reads up to 8 taps, each tap
/// addressing one source grid by flat index. Built once per geometry and
/// reused across tape evaluations (trilinear mip sampling compiles to this).
struct GatherPlan {
  int out_width = 0;
  int out_height = 0;
  int taps_per_pixel = 8;
  std::vector<int> source;   // taps_per_pixel per output pixel
  std::vector<int> index;
  std::vector<double> weight;

  size_t pixel_count() const { return static_cast<size_t>(out_width) * out_height; }
};

/// Reverse-mode tape over real 2D grids. Each op records the values it needs
/// for its adjoint; backward() runs the adjoints in reverse creation order.
/// Single-threaded by design: evaluation order (and therefore every floating
/// point reduction) is identical on every run.
class Tape {
 public:
  Var input(Grid v);               // leaf that receives a gradient
  Var constant(Grid v);            // leaf without a gradient
  Var constant_scalar(double v);

  const Grid& value(Var v) const;
  /// Gradient of the last backward() target with respect to v (zeros if
  /// the node was never reached).
  const Grid& grad(Var v) const;
  double scalar_value(Var v) const;

  /// Seeds d(target)/d(target) = 1 and accumulates gradients into every
  /// node with requires_grad. target must be a 1x1 node.
  void backward(Var target);

  // -- elementwise --
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var mul_grid(Var a, const Grid* k);   // k must outlive the tape
  Var scale(Var a, double s);
  Var square(Var a);
  Var abs_val(Var a);
  /// sqrt(max(a,0)+eps) - sqrt(eps); gradient 0 on the clamped side.
  Var sqrt_shift(Var a, double eps);
  /// sum_k coeffs[k]*xs[k] + bias, elementwise over same-shape grids.
  Var lincomb(const std::vector<Var>& xs, const std::vector<double>& coeffs, double bias);

  // -- reductions --
  Var sum(Var a);                          // -> 1x1
  Var add_scalars(const std::vector<Var>& xs);  // -> 1x1

  // -- filtering / resampling (reflect-101 borders for convolutions) --
  Var conv_x(Var a, const std::array<double, 5>& taps);
  Var conv_y(Var a, const std::array<double, 5>& taps);
  Var downsample2(Var a);                  // keep even indices; ceil dims
  Var zero_upsample(Var a, int tw, int th);
  Var avgpool2(Var a);                     // 2x2 mean, edge-replicated odd sizes
  Var gather(const std::vector<Var>& sources, const GatherPlan* plan);  // plan outlives tape
  Var embed_center(Var a, int tw, int th);
  Var crop_center(Var a, int w, int h);

  // -- complex pairs --
  CVar expj(Var phase);
  CVar fft2(CVar z);
  CVar ifft2(CVar z);
  CVar cmul_grid(CVar z, const CGrid* kernel);  // kernel must outlive the tape
  Var abs2(CVar z);
  CVar cembed_center(CVar z, int tw, int th);
  CVar ccrop_center(CVar z, int w, int h);

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Grid value;
    Grid grad;  // lazily sized
    bool requires_grad = false;
    std::function<void(Tape&, int)> backprop;  // (tape, own id); may be empty
  };

  std::vector<Node> nodes_;

  Var make(Grid value, bool requires_grad, std::function<void(Tape&, int)> backprop);
  Grid& grad_buffer(int id);
  const Grid* grad_ptr(int id) const;  // nullptr when never touched
  bool needs_grad(Var v) const { return nodes_[v.id].requires_grad; }
};

}  // namespace fovholo::ad
