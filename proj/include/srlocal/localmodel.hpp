#pragma once

#include "srlocal/projection.hpp"

#include <vector>

namespace srlocal {

// Bivariate polynomial fitted at one HR grid site. Coefficients are stored in
// the fixed basis order
//   [1, dx, dy, dx^2, dx*dy, dy^2, dx^3, dx^2*dy, dx*dy^2, dy^3]
// truncated to the order (3, 6 or 10 coefficients), with (dx,dy) the offset
// from the site, so the model value at the site itself is coeffs[0].
struct PolyModel {
    int order = 2;
    std::vector<double> coeffs;
    int gx = 0;
    int gy = 0;
    int n_support = 0;
    bool condition_flag = false; // SVD truncated, or support below min_support
};

struct FitConfig {
    double support_radius = 2.5;    // HR pixels
    double svd_rel_threshold = 1e-6; // singular values below this * sigma_max are zeroed
    int min_support = 0;             // 0 -> number of coefficients for the order
};

// 3, 6 or 10 for orders 1..3.
int poly_coeff_count(int order);

// Evaluates the basis at (dx,dy) into `row` (length poly_coeff_count(order)).
void poly_basis(int order, double dx, double dy, double* row);

// Minimum-norm least-squares fit of the basis to the support values via SVD,
// with relative-threshold truncation of small singular values. Throws
// InvalidModelError on empty support.
PolyModel fit_poly(const std::vector<SupportPixel>& support, int gx, int gy, int order,
                   const FitConfig& cfg);

double eval_poly(const PolyModel& model, double dx, double dy);

// Nearest projected pixel (the support list is distance-then-frame sorted).
double interp_nn(const std::vector<SupportPixel>& support);

// Inverse-distance weighting, w = 1/max(d, 1e-9); pixels coincident with the
// site (d < 1e-9) short-circuit to their mean.
double interp_idw(const std::vector<SupportPixel>& support);

// fit_poly at the site evaluated at (0,0); falls back to nearest-neighbor over
// 2x support_radius when the fit is invalid, and throws if that is empty too.
double interp_poly(const ProjectedCloud& cloud, int gx, int gy, int order,
                   const FitConfig& cfg);

} // namespace srlocal
