#pragma once

#include "srlocal/image.hpp"
#include "srlocal/registration.hpp"

#include <cstdint>
#include <vector>

namespace srlocal {

// Parameters of the synthetic low-resolution sequence generator. Shifts are
// expressed in LR pixel units and drawn uniformly from [shift_lo, shift_hi)
// per axis; frame 0 is always unshifted.
struct SequenceSpec {
    int n_frames = 25;
    int scale = 2;
    double sigma = 0.0; // noise std in gray levels
    std::uint64_t seed = 0;
    double shift_lo = 0.0;
    double shift_hi = 1.0;
};

struct SyntheticSequence {
    std::vector<GrayImage> frames;
    std::vector<Transform> true_shifts; // LR pixel units, element 0 = (0,0)
    SequenceSpec spec;
    GrayImage ground_truth;
};

// Moves image content by (+tx,+ty): output(i,j) = bilinear_sample(img, j-tx, i-ty).
GrayImage shift_image(const GrayImage& img, double tx, double ty);

// Box decimation: each output pixel is the mean of its scale x scale block.
// Dimensions must be divisible by scale.
GrayImage downsample_box(const GrayImage& img, int scale);

// Adds i.i.d. zero-mean Gaussian noise. The result is not clamped to [0,255].
GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed);

// frame k = add_gaussian_noise(downsample_box(shift_image(hr, s*tx_k, s*ty_k), s), sigma).
// Pure function of (hr, spec): per-frame noise seeds and the shift stream are
// derived from spec.seed.
SyntheticSequence generate_sequence(const GrayImage& hr, const SequenceSpec& spec);

// Procedural grayscale test scene: a tilted base plane, low-frequency waves,
// soft-edged disks, one soft diagonal step and mild fine texture, clamped to
// [10, 245]. Deterministic in (width, height, seed).
GrayImage make_scene(int width, int height, std::uint64_t seed);

} // namespace srlocal
