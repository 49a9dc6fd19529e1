#include "photocari/tps_warp.hpp"

#include <sstream>

#include "photocari/errors.hpp"

namespace photocari {

namespace {

const auto kF64 = torch::TensorOptions().dtype(torch::kFloat64);

// U(r) = r^2 log r^2 written in terms of r^2, with U(0) = 0. The inner where
// keeps log away from zero so the masked branch has a finite gradient.
torch::Tensor tps_kernel(const torch::Tensor& r2) {
  auto positive = r2 > 0;
  auto safe = torch::where(positive, r2, torch::ones_like(r2));
  return torch::where(positive, r2 * torch::log(safe), torch::zeros_like(r2));
}

// Squared distances between rows of a [B, m, 2] and b [B, n, 2] -> [B, m, n].
torch::Tensor squared_distances(const torch::Tensor& a, const torch::Tensor& b) {
  return (a.unsqueeze(2) - b.unsqueeze(1)).pow(2).sum(-1);
}

// [B, m, 3] rows (1, x, y).
torch::Tensor affine_basis(const torch::Tensor& pts) {
  return torch::cat({torch::ones_like(pts.narrow(-1, 0, 1)), pts}, -1);
}

torch::Tensor as_batched(const torch::Tensor& pts, int64_t batch) {
  auto p = pts.to(torch::kFloat64);
  if (p.dim() == 2) {
    p = p.unsqueeze(0).expand({batch, p.size(0), 2});
  }
  return p;
}

}  // namespace

int64_t ControlPointSet::n_free() const {
  int64_t n = 0;
  for (bool p : pinned) {
    n += p ? 0 : 1;
  }
  return n;
}

torch::Tensor ControlPointSet::free_indices() const {
  std::vector<int64_t> idx;
  for (std::size_t i = 0; i < pinned.size(); ++i) {
    if (!pinned[i]) {
      idx.push_back(static_cast<int64_t>(i));
    }
  }
  return torch::tensor(idx, torch::kInt64);
}

ControlPointSet make_control_points(int64_t k) {
  if (k < 1) {
    throw DegenerateConfiguration("control grid k must be >= 1");
  }
  std::vector<double> coords;
  std::vector<bool> pinned;
  for (int64_t r = 0; r < k; ++r) {
    for (int64_t c = 0; c < k; ++c) {
      coords.push_back(-1.0 + 2.0 * static_cast<double>(c + 1) / static_cast<double>(k + 1));
      coords.push_back(-1.0 + 2.0 * static_cast<double>(r + 1) / static_cast<double>(k + 1));
      pinned.push_back(false);
    }
  }
  const double border[] = {-1.0, -1.0 / 3.0, 1.0 / 3.0, 1.0};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      if (r == 0 || r == 3 || c == 0 || c == 3) {
        coords.push_back(border[c]);
        coords.push_back(border[r]);
        pinned.push_back(true);
      }
    }
  }
  const auto n = static_cast<int64_t>(pinned.size());
  ControlPointSet cps{torch::tensor(coords, kF64).view({n, 2}), std::move(pinned)};
  validate(cps);
  return cps;
}

void validate(const ControlPointSet& cps) {
  const auto& p = cps.points;
  if (!p.defined() || p.dim() != 2 || p.size(1) != 2) {
    throw DegenerateConfiguration("control points must be an [n, 2] tensor");
  }
  if (p.size(0) < 3) {
    throw DegenerateConfiguration("need at least 3 control points");
  }
  if (static_cast<int64_t>(cps.pinned.size()) != p.size(0)) {
    throw DegenerateConfiguration("pinned mask length differs from point count");
  }
  auto pts = p.to(torch::kFloat64);
  auto d2 = squared_distances(pts.unsqueeze(0), pts.unsqueeze(0))[0];
  d2 = d2 + torch::eye(p.size(0), kF64) * 1.0;  // ignore self-distances
  if (d2.min().item<double>() <= 1e-12) {
    throw DegenerateConfiguration("duplicate control points (distance <= 1e-6)");
  }
  auto centered = pts - pts.mean(0, true);
  auto sv = torch::linalg_svdvals(centered);
  if (sv.min().item<double>() <= 1e-9 * std::max(1.0, sv.max().item<double>())) {
    throw DegenerateConfiguration("control points are collinear");
  }
}

torch::Tensor scatter_displacements(const ControlPointSet& cps, const torch::Tensor& free_vectors) {
  const int64_t n_free = cps.n_free();
  if (free_vectors.dim() != 3 || free_vectors.size(1) != n_free || free_vectors.size(2) != 2) {
    std::ostringstream msg;
    msg << "displacements must be [B, " << n_free << ", 2], got " << free_vectors.sizes();
    throw ShapeMismatch(msg.str());
  }
  auto v = free_vectors.to(torch::kFloat64);
  auto full = torch::zeros({v.size(0), cps.size(), 2}, v.options());
  return full.index_copy(1, cps.free_indices(), v);
}

TpsParams fit_tps(const torch::Tensor& centers, const torch::Tensor& targets, double reg) {
  auto c = centers.to(torch::kFloat64);
  auto t = targets.to(torch::kFloat64);
  if (c.dim() == 2) {
    c = c.unsqueeze(0).expand({t.size(0), c.size(0), 2});
  }
  check_same_shape(c, t, "fit_tps");
  const int64_t batch = c.size(0);
  const int64_t n = c.size(1);

  auto kernel = tps_kernel(squared_distances(c, c));
  if (reg > 0.0) {
    kernel = kernel + reg * torch::eye(n, kF64);
  }
  auto basis = affine_basis(c);
  auto top = torch::cat({kernel, basis}, 2);
  auto bottom = torch::cat({basis.transpose(1, 2), torch::zeros({batch, 3, 3}, kF64)}, 2);
  auto system = torch::cat({top, bottom}, 1);
  auto rhs = torch::cat({t, torch::zeros({batch, 3, 2}, kF64)}, 1);

  torch::Tensor solution;
  try {
    solution = torch::linalg_solve(system, rhs);
  } catch (const c10::Error&) {
    throw DegenerateConfiguration("thin-plate-spline system is singular");
  }
  if (!torch::isfinite(solution).all().item<bool>()) {
    throw DegenerateConfiguration("thin-plate-spline solve produced non-finite values");
  }
  return {c, solution.narrow(1, 0, n), solution.narrow(1, n, 3), reg};
}

TpsParams solve_tps(const ControlPointSet& cps, const DisplacementField& disp, double reg) {
  validate(cps);
  auto full = scatter_displacements(cps, disp.vectors);
  auto centers = as_batched(cps.points, full.size(0));
  return fit_tps(centers, centers + full, reg);
}

torch::Tensor evaluate_tps(const TpsParams& params, const torch::Tensor& query) {
  const int64_t batch = params.centers.size(0);
  auto q = as_batched(query, batch);
  auto u = tps_kernel(squared_distances(q, params.centers));
  return torch::bmm(u, params.rbf_weights) + torch::bmm(affine_basis(q), params.affine);
}

torch::Tensor regular_grid(int64_t h, int64_t w, torch::ScalarType dtype) {
  auto xs = torch::linspace(-1.0, 1.0, w, torch::TensorOptions().dtype(dtype));
  auto ys = torch::linspace(-1.0, 1.0, h, torch::TensorOptions().dtype(dtype));
  auto mesh = torch::meshgrid({ys, xs}, "ij");
  return torch::stack({mesh[1], mesh[0]}, -1);
}

torch::Tensor make_grid(const TpsParams& params, int64_t out_h, int64_t out_w) {
  if (out_h < 2 || out_w < 2) {
    throw ShapeMismatch("grid must be at least 2 x 2");
  }
  auto displaced = evaluate_tps(params, params.centers);
  auto backward = fit_tps(displaced, params.centers, params.reg);
  const int64_t batch = params.centers.size(0);
  auto lattice = regular_grid(out_h, out_w).view({out_h * out_w, 2});
  return evaluate_tps(backward, lattice).view({batch, out_h, out_w, 2});
}

torch::Tensor sample_bilinear(const torch::Tensor& image, const torch::Tensor& grid) {
  // interpolation 0 = bilinear, padding 1 = border. Sampling runs in double
  // so an identity grid reproduces single-precision images exactly.
  auto out = torch::grid_sampler(image.to(torch::kFloat64), grid.to(torch::kFloat64), 0, 1, true);
  return out.to(image.scalar_type());
}

ImageTensor warp_image(const ImageTensor& image, const ControlPointSet& cps, const DisplacementField& disp,
                       double reg) {
  check_image(image, "warp_image");
  if (disp.vectors.size(0) != image.batch()) {
    throw ShapeMismatch("warp_image: displacement batch differs from image batch");
  }
  auto grid = make_grid(solve_tps(cps, disp, reg), image.height(), image.width());
  return {sample_bilinear(image.data, grid), image.domain};
}

}  // namespace photocari
