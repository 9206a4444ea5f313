#include "srlocal/synth.hpp"

#include "srlocal/errors.hpp"
#include "srlocal/rng.hpp"

#include <algorithm>
#include <cmath>

namespace srlocal {

namespace {
// Stream tags for deriving independent RNG streams from the sequence seed.
constexpr std::uint64_t kShiftStream = 1;
constexpr std::uint64_t kNoiseStream = 2;
} // namespace

GrayImage shift_image(const GrayImage& img, double tx, double ty) {
    GrayImage out(img.width, img.height);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.at(y, x) = bilinear_sample(img, x - tx, y - ty);
    return out;
}

GrayImage downsample_box(const GrayImage& img, int scale) {
    if (scale < 1) throw Error("downsample_box: scale must be >= 1");
    if (img.width % scale != 0 || img.height % scale != 0)
        throw Error("downsample_box: dimensions " + std::to_string(img.width) + "x" +
                    std::to_string(img.height) + " not divisible by scale " +
                    std::to_string(scale));
    GrayImage out(img.width / scale, img.height / scale);
    const double inv = 1.0 / (static_cast<double>(scale) * scale);
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            double acc = 0.0;
            for (int v = 0; v < scale; ++v)
                for (int u = 0; u < scale; ++u)
                    acc += img.at(y * scale + v, x * scale + u);
            out.at(y, x) = acc * inv;
        }
    }
    return out;
}

GrayImage add_gaussian_noise(const GrayImage& img, double sigma, std::uint64_t seed) {
    if (sigma < 0.0) throw Error("add_gaussian_noise: sigma must be >= 0");
    GrayImage out = img;
    if (sigma == 0.0) return out;
    Rng rng(seed);
    for (double& p : out.pixels) p += sigma * rng.gaussian();
    return out;
}

SyntheticSequence generate_sequence(const GrayImage& hr, const SequenceSpec& spec) {
    if (spec.n_frames < 1) throw Error("generate_sequence: n_frames must be >= 1");
    SyntheticSequence seq;
    seq.spec = spec;
    seq.ground_truth = hr;
    seq.true_shifts.resize(spec.n_frames);
    seq.true_shifts[0] = Transform{0.0, 0.0};

    Rng shift_rng(derive_seed(spec.seed, kShiftStream));
    for (int k = 1; k < spec.n_frames; ++k) {
        seq.true_shifts[k].tx = shift_rng.uniform(spec.shift_lo, spec.shift_hi);
        seq.true_shifts[k].ty = shift_rng.uniform(spec.shift_lo, spec.shift_hi);
    }

    const double s = static_cast<double>(spec.scale);
    seq.frames.reserve(spec.n_frames);
    for (int k = 0; k < spec.n_frames; ++k) {
        const Transform& t = seq.true_shifts[k];
        GrayImage shifted = (k == 0) ? hr : shift_image(hr, s * t.tx, s * t.ty);
        GrayImage lr = downsample_box(shifted, spec.scale);
        std::uint64_t frame_seed = derive_seed(derive_seed(spec.seed, kNoiseStream), k);
        seq.frames.push_back(add_gaussian_noise(lr, spec.sigma, frame_seed));
    }
    return seq;
}

GrayImage make_scene(int width, int height, std::uint64_t seed) {
    if (width < 1 || height < 1) throw Error("make_scene: dimensions must be positive");
    Rng rng(seed);
    const double pi = 3.14159265358979323846;
    const double pi2 = 2.0 * pi;
    const double dim = std::min(width, height);

    const double base = rng.uniform(105.0, 150.0);
    const double slope_x = rng.uniform(-0.10, 0.10);
    const double slope_y = rng.uniform(-0.10, 0.10);

    // Oriented sinusoid bands in octave steps with amplitudes growing with
    // wavelength, giving roughly natural 1/f-like large-scale structure.
    struct Band {
        double amp, kx, ky, phase;
    };
    std::vector<Band> bands;
    double wavelength = 22.0;
    double band_amp = 2.08;
    while (wavelength <= std::max(width, height)) {
        for (int c = 0; c < 2; ++c) {
            const double theta = rng.uniform(0.0, pi);
            Band b;
            b.kx = std::cos(theta) / wavelength;
            b.ky = std::sin(theta) / wavelength;
            b.amp = band_amp * rng.uniform(0.75, 1.25);
            b.phase = rng.uniform(0.0, 1.0);
            bands.push_back(b);
        }
        wavelength *= 1.6;
        band_amp *= 1.75;
    }

    // Two weak fine-detail octaves below the coarse cascade. Content at these
    // wavelengths is lost by single-frame upsampling at scale 2 but is still
    // recoverable from a registered multi-frame sample cloud, which is what
    // separates the reconstruction methods on otherwise smooth scenes.
    const double fine_wavelength[2] = {8.5, 5.5};
    const double fine_amp[2] = {0.5, 0.2};
    for (int f = 0; f < 2; ++f) {
        for (int c = 0; c < 2; ++c) {
            const double theta = rng.uniform(0.0, pi);
            const double w = fine_wavelength[f] * rng.uniform(0.92, 1.08);
            Band b;
            b.kx = std::cos(theta) / w;
            b.ky = std::sin(theta) / w;
            b.amp = fine_amp[f] * rng.uniform(0.75, 1.25);
            b.phase = rng.uniform(0.0, 1.0);
            bands.push_back(b);
        }
    }

    struct Disk {
        double cx, cy, r, amp, edge;
    };
    Disk disks[3];
    for (Disk& d : disks) {
        d.cx = rng.uniform(0.15, 0.85) * width;
        d.cy = rng.uniform(0.15, 0.85) * height;
        d.r = rng.uniform(0.07, 0.14) * dim;
        d.amp = (rng.uniform(0.0, 1.0) < 0.5 ? -1.0 : 1.0) * rng.uniform(20.0, 32.0);
        d.edge = rng.uniform(2.5, 4.0);
    }

    const double step_theta = rng.uniform(0.0, pi);
    const double step_cx = width / 2.0 + rng.uniform(-0.2, 0.2) * width;
    const double step_cy = height / 2.0 + rng.uniform(-0.2, 0.2) * height;
    const double step_amp = rng.uniform(16.0, 26.0);
    const double step_edge = rng.uniform(2.5, 3.5);

    // Faint fine texture, the only content near the LR Nyquist limit.
    const double tex_amp = rng.uniform(0.15, 0.3);
    const double tex_fx = 1.0 / rng.uniform(10.0, 13.0);
    const double tex_fy = 1.0 / rng.uniform(10.0, 13.0);
    const double tex_px = rng.uniform(0.0, 1.0);
    const double tex_py = rng.uniform(0.0, 1.0);

    const auto logistic = [](double t) { return 1.0 / (1.0 + std::exp(-t)); };

    GrayImage img(width, height);
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            double v = base + slope_x * (x - width / 2.0) + slope_y * (y - height / 2.0);
            for (const Band& b : bands)
                v += b.amp * std::sin(pi2 * (b.kx * x + b.ky * y + b.phase));
            for (const Disk& d : disks) {
                const double r = std::hypot(x - d.cx, y - d.cy);
                v += d.amp * logistic((d.r - r) / d.edge);
            }
            const double sd = (x - step_cx) * std::cos(step_theta) +
                              (y - step_cy) * std::sin(step_theta);
            v += step_amp * logistic(sd / step_edge);
            v += tex_amp * std::sin(pi2 * (tex_fx * x + tex_px)) *
                 std::sin(pi2 * (tex_fy * y + tex_py));
            img.at(y, x) = std::clamp(v, 10.0, 245.0);
        }
    }
    return img;
}

} // namespace srlocal
