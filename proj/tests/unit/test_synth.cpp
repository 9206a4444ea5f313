#include "srlocal/errors.hpp"
#include "srlocal/synth.hpp"

#include "doctest.h"

#include <cmath>

using namespace srlocal;

TEST_SUITE("synth") {

TEST_CASE("shift_image moves a column ramp by the shift") {
    GrayImage img(8, 6);
    for (int i = 0; i < img.height; ++i)
        for (int j = 0; j < img.width; ++j) img.at(i, j) = j;

    GrayImage out = shift_image(img, 0.5, 0.0);
    for (int i = 0; i < out.height; ++i)
        for (int j = 1; j < out.width; ++j)
            CHECK(out.at(i, j) == doctest::Approx(j - 0.5));
}

TEST_CASE("shift_image by zero is the identity") {
    GrayImage img(5, 4);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = 10.0 + 3.0 * i;
    GrayImage out = shift_image(img, 0.0, 0.0);
    CHECK(out.pixels == img.pixels);
}

TEST_CASE("downsample_box averages each block") {
    GrayImage img(2, 2);
    img.at(0, 0) = 0.0;
    img.at(0, 1) = 0.0;
    img.at(1, 0) = 0.0;
    img.at(1, 1) = 4.0;
    GrayImage out = downsample_box(img, 2);
    REQUIRE(out.width == 1);
    REQUIRE(out.height == 1);
    CHECK(out.at(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("downsample_box rejects indivisible dimensions") {
    GrayImage img(5, 4, 0.0);
    CHECK_THROWS_AS(downsample_box(img, 2), Error);
}

TEST_CASE("add_gaussian_noise matches the requested moments") {
    GrayImage img(1000, 1000, 100.0);
    GrayImage noisy = add_gaussian_noise(img, 20.0, 99);

    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        const double d = noisy.pixels[i] - img.pixels[i];
        sum += d;
        sum2 += d * d;
    }
    const double n = static_cast<double>(img.pixels.size());
    const double mean = sum / n;
    const double std = std::sqrt(sum2 / n - mean * mean);
    CHECK(std::fabs(mean) < 0.1);
    CHECK(std::fabs(std - 20.0) < 0.2);
}

TEST_CASE("add_gaussian_noise is seed-deterministic") {
    GrayImage img(32, 32, 50.0);
    GrayImage a = add_gaussian_noise(img, 5.0, 1234);
    GrayImage b = add_gaussian_noise(img, 5.0, 1234);
    GrayImage c = add_gaussian_noise(img, 5.0, 1235);
    CHECK(a.pixels == b.pixels);
    CHECK(a.pixels != c.pixels);
}

TEST_CASE("generate_sequence honors the spec") {
    GrayImage hr = make_scene(64, 64, 5);
    SequenceSpec sp;
    sp.n_frames = 7;
    sp.scale = 2;
    sp.sigma = 0.0;
    sp.seed = 21;
    SyntheticSequence seq = generate_sequence(hr, sp);

    REQUIRE(static_cast<int>(seq.frames.size()) == sp.n_frames);
    REQUIRE(static_cast<int>(seq.true_shifts.size()) == sp.n_frames);
    CHECK(seq.true_shifts[0].tx == 0.0);
    CHECK(seq.true_shifts[0].ty == 0.0);
    for (const GrayImage& f : seq.frames) {
        CHECK(f.width == hr.width / sp.scale);
        CHECK(f.height == hr.height / sp.scale);
    }
    for (const Transform& t : seq.true_shifts) {
        CHECK(t.tx >= sp.shift_lo);
        CHECK(t.tx < sp.shift_hi);
        CHECK(t.ty >= sp.shift_lo);
        CHECK(t.ty < sp.shift_hi);
    }

    // Frame 0 is unshifted, so at sigma 0 it is exactly the decimated truth.
    GrayImage ref = downsample_box(hr, sp.scale);
    CHECK(seq.frames[0].pixels == ref.pixels);
    CHECK(seq.ground_truth.pixels == hr.pixels);
}

TEST_CASE("generate_sequence composes shift, decimation and noise") {
    GrayImage hr = make_scene(48, 48, 6);
    SequenceSpec sp;
    sp.n_frames = 4;
    sp.scale = 2;
    sp.sigma = 0.0;
    sp.seed = 77;
    SyntheticSequence seq = generate_sequence(hr, sp);

    for (int k = 1; k < sp.n_frames; ++k) {
        const Transform& t = seq.true_shifts[k];
        GrayImage expect =
            downsample_box(shift_image(hr, sp.scale * t.tx, sp.scale * t.ty), sp.scale);
        CHECK(seq.frames[k].pixels == expect.pixels);
    }
}

TEST_CASE("generate_sequence is deterministic in the spec") {
    GrayImage hr = make_scene(32, 32, 9);
    SequenceSpec sp;
    sp.n_frames = 5;
    sp.sigma = 10.0;
    sp.seed = 3;
    SyntheticSequence a = generate_sequence(hr, sp);
    SyntheticSequence b = generate_sequence(hr, sp);
    for (int k = 0; k < sp.n_frames; ++k) CHECK(a.frames[k].pixels == b.frames[k].pixels);
    for (int k = 0; k < sp.n_frames; ++k) {
        CHECK(a.true_shifts[k].tx == b.true_shifts[k].tx);
        CHECK(a.true_shifts[k].ty == b.true_shifts[k].ty);
    }
}

TEST_CASE("make_scene is deterministic and in range") {
    GrayImage a = make_scene(96, 80, 42);
    GrayImage b = make_scene(96, 80, 42);
    GrayImage c = make_scene(96, 80, 43);
    CHECK(a.width == 96);
    CHECK(a.height == 80);
    CHECK(a.pixels == b.pixels);
    CHECK(a.pixels != c.pixels);
    for (double v : a.pixels) {
        CHECK(v >= 10.0);
        CHECK(v <= 245.0);
    }
}

} // TEST_SUITE
