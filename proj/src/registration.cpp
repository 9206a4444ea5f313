#include "srlocal/registration.hpp"

#include "srlocal/errors.hpp"
#include "srlocal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <omp.h>

namespace srlocal {

namespace {

// Crops to even dimensions (if needed) and box-averages 2x2 blocks.
GrayImage halve(const GrayImage& img) {
    int w = img.width - (img.width % 2);
    int h = img.height - (img.height % 2);
    GrayImage out(w / 2, h / 2);
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(y, x) = 0.25 * (img.at(2 * y, 2 * x) + img.at(2 * y, 2 * x + 1) +
                                   img.at(2 * y + 1, 2 * x) + img.at(2 * y + 1, 2 * x + 1));
    return out;
}

// Separable 3x3 binomial blur with clamped borders. Applied symmetrically to
// both inputs it leaves the translation optimum in place (filtering commutes
// with shifting) while attenuating pixel noise, which otherwise dominates the
// normal equations at high sigma.
GrayImage smooth3(const GrayImage& img) {
    GrayImage tmp(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int xl = std::max(x - 1, 0), xr = std::min(x + 1, img.width - 1);
            tmp.at(y, x) = 0.25 * (img.at(y, xl) + 2.0 * img.at(y, x) + img.at(y, xr));
        }
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y) {
        const int yu = std::max(y - 1, 0), yd = std::min(y + 1, img.height - 1);
        for (int x = 0; x < img.width; ++x)
            out.at(y, x) = 0.25 * (tmp.at(yu, x) + 2.0 * tmp.at(y, x) + tmp.at(yd, x));
    }
    return out;
}

std::vector<GrayImage> build_pyramid(const GrayImage& img, int levels) {
    std::vector<GrayImage> pyr{smooth3(img)};
    for (int l = 1; l < levels; ++l) {
        const GrayImage& prev = pyr.back();
        if (std::min(prev.width, prev.height) < 32) break; // coarsest stays >= 16 px
        pyr.push_back(smooth3(halve(prev)));
    }
    return pyr;
}

// One Gauss-Newton pass at a single pyramid level. Returns false when the
// normal matrix was singular on every iteration attempted.
bool gauss_newton_level(const GrayImage& ref, const GrayImage& frame, Transform& t,
                        double level_scale, const RegistrationConfig& cfg) {
    bool solved = false;
    for (int iter = 0; iter < cfg.max_iters_per_level; ++iter) {
        // Warp the reference by the current estimate; residual against frame.
        GrayImage warped = shift_image(ref, t.tx, t.ty);

        // Pixels whose warp samples may touch the clamped border are excluded.
        int band = static_cast<int>(std::ceil(std::max(std::abs(t.tx), std::abs(t.ty)))) + 1;
        band = std::max(band, 1);
        if (frame.width - 2 * band < 2 || frame.height - 2 * band < 2) break;

        double sxx = 0.0, sxy = 0.0, syy = 0.0, sxe = 0.0, sye = 0.0;
        for (int y = band; y < frame.height - band; ++y) {
            for (int x = band; x < frame.width - band; ++x) {
                double gx = 0.5 * (warped.at(y, x + 1) - warped.at(y, x - 1));
                double gy = 0.5 * (warped.at(y + 1, x) - warped.at(y - 1, x));
                double e = frame.at(y, x) - warped.at(y, x);
                sxx += gx * gx;
                sxy += gx * gy;
                syy += gy * gy;
                sxe += gx * e;
                sye += gy * e;
            }
        }

        // d(warped)/dt = -grad(warped), so the GN right-hand side is negated.
        double det = sxx * syy - sxy * sxy;
        double trace = sxx + syy;
        if (!(det > 1e-12 * std::max(trace * trace, 1e-30))) return solved;
        solved = true;

        double dx = (-syy * sxe + sxy * sye) / det;
        double dy = (sxy * sxe - sxx * sye) / det;
        t.tx += dx;
        t.ty += dy;

        if (std::abs(t.tx) * level_scale > cfg.search_limit ||
            std::abs(t.ty) * level_scale > cfg.search_limit) {
            throw NonConvergenceError("registration: estimate left search limit", t.tx * level_scale,
                                      t.ty * level_scale);
        }
        if (std::max(std::abs(dx), std::abs(dy)) < cfg.convergence_eps) break;
    }
    return solved;
}

} // namespace

Transform register_pair(const GrayImage& reference, const GrayImage& frame,
                        const RegistrationConfig& cfg) {
    if (reference.width != frame.width || reference.height != frame.height)
        throw Error("register_pair: dimension mismatch");

    std::vector<GrayImage> ref_pyr = build_pyramid(reference, cfg.pyramid_levels);
    std::vector<GrayImage> frm_pyr = build_pyramid(frame, cfg.pyramid_levels);
    const int levels = static_cast<int>(std::min(ref_pyr.size(), frm_pyr.size()));

    Transform t{0.0, 0.0};
    bool any_solved = false;
    for (int l = levels - 1; l >= 0; --l) {
        double level_scale = static_cast<double>(1 << l); // level px -> LR px
        any_solved |= gauss_newton_level(ref_pyr[l], frm_pyr[l], t, level_scale, cfg);
        if (l > 0) {
            t.tx *= 2.0;
            t.ty *= 2.0;
        }
    }
    if (!any_solved)
        throw DegenerateInputError("registration: singular normal matrix (constant reference?)");
    return t;
}

std::vector<Transform> register_sequence(const std::vector<GrayImage>& frames,
                                         const RegistrationConfig& cfg) {
    if (frames.empty()) throw Error("register_sequence: no frames");
    std::vector<Transform> out(frames.size());
    out[0] = Transform{0.0, 0.0};

    std::vector<std::exception_ptr> errors(frames.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 1; k < static_cast<int>(frames.size()); ++k) {
        try {
            out[k] = register_pair(frames[0], frames[k], cfg);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    }
    for (std::size_t k = 1; k < frames.size(); ++k) {
        if (!errors[k]) continue;
        try {
            std::rethrow_exception(errors[k]);
        } catch (const std::exception& e) {
            throw Error("frame " + std::to_string(k) + ": " + e.what());
        }
    }
    return out;
}

} // namespace srlocal
