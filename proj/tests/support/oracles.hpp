#pragma once

#include "srlocal/image.hpp"
#include "srlocal/localmodel.hpp"
#include "srlocal/neural.hpp"
#include "srlocal/projection.hpp"
#include "srlocal/registration.hpp"

#include <vector>

// Independent reference implementations used only by the test suite. They are
// written against the documented contracts, not the library internals, so a
// shared bug would have to be made twice.
namespace srlocal::testing {

// Minimum-norm least-squares solution of the rows x cols system A x = b,
// computed in long double via a one-sided Jacobi SVD. Singular values at or
// below rel_threshold * sigma_max are treated as zero.
std::vector<double> pinv_solve(const std::vector<double>& A, int rows, int cols,
                               const std::vector<double>& b, double rel_threshold);

// fit_poly recomputed through pinv_solve.
std::vector<double> fit_poly_oracle(const std::vector<SupportPixel>& support, int gx, int gy,
                                    int order, double rel_threshold);

// Exhaustive search for the shift aligning shift_image(reference, t) with
// frame: a full grid over [lo, hi]^2 at `step`, then two refinement passes
// at step/5 and step/25 around the best cell. SSD is summed over the interior
// excluding `border` pixels on each side.
Transform ssd_grid_search(const GrayImage& reference, const GrayImage& frame, double lo,
                          double hi, double step, int border);

// query_support recomputed by a linear scan over every projected pixel, with
// the same (distance, frame, row, col) ordering.
std::vector<SupportPixel> support_scan(const ProjectedCloud& cloud, int gx, int gy,
                                       double radius);

// mlp_forward recomputed in long double arithmetic.
double mlp_forward_oracle(const MlpParams& params, const std::vector<double>& x);

// Central finite differences of the training mse, component by component.
std::vector<double> fd_gradient(const MlpParams& params,
                                const std::vector<TrainingSample>& samples, double h);

// Flat parameter vector in gradient order (W1 row-major, b1, w2, b2).
std::vector<double> flatten_params(const MlpParams& params);
MlpParams unflatten_params(int k_in, const std::vector<double>& flat);

} // namespace srlocal::testing
