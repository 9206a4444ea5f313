#pragma once

#include "srlocal/image.hpp"

#include <vector>

namespace srlocal {

// Translation in LR pixels, +x rightward (columns), +y downward (rows).
struct Transform {
    double tx = 0.0;
    double ty = 0.0;
};

struct RegistrationConfig {
    int pyramid_levels = 3;
    int max_iters_per_level = 50;
    double convergence_eps = 1e-4; // stop when the update step falls below this
    double search_limit = 8.0;     // LR pixels; estimates beyond this diverge
};

// Estimates the translation relating `frame` to `reference` by coarse-to-fine
// Gauss-Newton on the SSD objective. The returned (tx,ty) satisfies
// shift_image(reference, tx, ty) ~= frame, i.e. the generating shift of the
// synthetic sequence model.
//
// Throws DegenerateInputError for a constant reference and NonConvergenceError
// (carrying the last estimate) when the estimate leaves the search limit.
Transform register_pair(const GrayImage& reference, const GrayImage& frame,
                        const RegistrationConfig& cfg);

// Element 0 is exactly (0,0); element k = register_pair(frames[0], frames[k]).
// Per-frame failures are reported with the frame index attached.
std::vector<Transform> register_sequence(const std::vector<GrayImage>& frames,
                                         const RegistrationConfig& cfg);

} // namespace srlocal
