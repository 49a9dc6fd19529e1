#ifndef PHOTOCARI_TPS_WARP_HPP
#define PHOTOCARI_TPS_WARP_HPP

#include <vector>

#include <torch/torch.h>

#include "photocari/image.hpp"

namespace photocari {

// Thin-plate-spline warping.
//
// Coordinates are normalised to [-1, 1]^2 as (x, y) with x along the width,
// the same convention as grid sampling with aligned corners. The spline is
//   f(q) = a0 + a1 qx + a2 qy + sum_i w_i U(|q - c_i|),   U(r) = r^2 log r^2
// subject to sum_i w_i = 0 and sum_i w_i c_i = 0. All solves run in double.

struct ControlPointSet {
  torch::Tensor points;      // [n, 2] float64
  std::vector<bool> pinned;  // pinned points never move

  int64_t size() const { return points.size(0); }
  int64_t n_free() const;
  torch::Tensor free_indices() const;  // int64 indices of unpinned points
};

// k x k interior lattice of free points plus the 12 perimeter points of the
// 4 x 4 lattice over [-1, 1]^2, which are pinned.
ControlPointSet make_control_points(int64_t k);

// Throws DegenerateConfiguration for fewer than 3 points, duplicates closer
// than 1e-6, or all points collinear.
void validate(const ControlPointSet& cps);

struct DisplacementField {
  torch::Tensor vectors;  // [B, n_free, 2]
  double bound = 0.0;     // elementwise magnitude bound d_max
};

struct TpsParams {
  torch::Tensor centers;      // [B, n, 2] kernel centres
  torch::Tensor rbf_weights;  // [B, n, 2]
  torch::Tensor affine;       // [B, 3, 2], rows: constant, x, y
  double reg = 0.0;
};

// Full per-point displacements [B, n, 2] with zeros at pinned points.
torch::Tensor scatter_displacements(const ControlPointSet& cps, const torch::Tensor& free_vectors);

// Solves the spline through `centers` -> `targets` (both [B, n, 2]); `reg`
// is added to the kernel diagonal. Differentiable in both arguments.
// Throws DegenerateConfiguration when the system is singular.
TpsParams fit_tps(const torch::Tensor& centers, const torch::Tensor& targets, double reg);

// Forward warp f(p_i) = p_i + v_i on the control points.
TpsParams solve_tps(const ControlPointSet& cps, const DisplacementField& disp, double reg = 0.0);

// Evaluates the spline at `query` ([m, 2] or [B, m, 2]) -> [B, m, 2].
torch::Tensor evaluate_tps(const TpsParams& params, const torch::Tensor& query);

// Regular [h, w, 2] lattice in normalised (x, y) coordinates, aligned corners.
torch::Tensor regular_grid(int64_t h, int64_t w, torch::ScalarType dtype = torch::kFloat64);

// Backward sampling grid [B, h, w, 2] for the forward warp in `params`: the
// spline from the displaced points f(c_i) back to c_i, evaluated on the
// output lattice. Each entry is the source coordinate to sample.
torch::Tensor make_grid(const TpsParams& params, int64_t out_h, int64_t out_w);

// Bilinear resampling with border clamping of image at make_grid
// coordinates. Differentiable w.r.t. the image and the displacements.
ImageTensor warp_image(const ImageTensor& image, const ControlPointSet& cps,
                       const DisplacementField& disp, double reg = 1e-6);

// Samples `image` at the given [B, h, w, 2] grid (bilinear, border clamp).
torch::Tensor sample_bilinear(const torch::Tensor& image, const torch::Tensor& grid);

}  // namespace photocari

#endif  // PHOTOCARI_TPS_WARP_HPP
