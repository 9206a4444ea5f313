#include "srlocal/errors.hpp"
#include "srlocal/registration.hpp"
#include "srlocal/synth.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <string>

using namespace srlocal;
using namespace srlocal::testing;

TEST_SUITE("registration") {

TEST_CASE("registering an image against itself gives zero shift") {
    GrayImage img = make_scene(96, 96, 11);
    RegistrationConfig cfg;
    Transform t = register_pair(img, img, cfg);
    CHECK(std::fabs(t.tx) < 1e-6);
    CHECK(std::fabs(t.ty) < 1e-6);
}

TEST_CASE("recovers a clean sub-pixel shift") {
    GrayImage ref = make_scene(128, 128, 12);
    GrayImage frame = shift_image(ref, 0.5, -0.25);
    RegistrationConfig cfg;
    Transform t = register_pair(ref, frame, cfg);
    CHECK(std::fabs(t.tx - 0.5) < 0.05);
    CHECK(std::fabs(t.ty + 0.25) < 0.05);
}

TEST_CASE("matches the exhaustive SSD search on a clean pair") {
    GrayImage ref = make_scene(96, 96, 13);
    GrayImage frame = shift_image(ref, 0.37, 0.81);
    RegistrationConfig cfg;
    Transform gn = register_pair(ref, frame, cfg);
    Transform grid = ssd_grid_search(ref, frame, -0.2, 1.2, 0.05, 2);
    CHECK(std::fabs(gn.tx - grid.tx) <= 0.01);
    CHECK(std::fabs(gn.ty - grid.ty) <= 0.01);
}

TEST_CASE("stays within tolerance under heavy noise") {
    // Deployment-shaped input: LR frames from the sequence generator, noise
    // added after decimation.
    GrayImage scene = make_scene(256, 256, 14);
    SequenceSpec sp;
    sp.n_frames = 2;
    sp.sigma = 20.0;
    sp.seed = 140;
    SyntheticSequence seq = generate_sequence(scene, sp);
    RegistrationConfig cfg;
    Transform t = register_pair(seq.frames[0], seq.frames[1], cfg);
    CHECK(std::fabs(t.tx - seq.true_shifts[1].tx) < 0.2);
    CHECK(std::fabs(t.ty - seq.true_shifts[1].ty) < 0.2);
}

TEST_CASE("identical frames register to zero across a sequence") {
    GrayImage img = make_scene(64, 64, 15);
    std::vector<GrayImage> frames(6, img);
    RegistrationConfig cfg;
    std::vector<Transform> shifts = register_sequence(frames, cfg);
    REQUIRE(shifts.size() == frames.size());
    for (const Transform& t : shifts) {
        CHECK(std::fabs(t.tx) < 1e-6);
        CHECK(std::fabs(t.ty) < 1e-6);
    }
}

TEST_CASE("sequence estimates track the generating shifts") {
    GrayImage hr = make_scene(128, 128, 16);
    SequenceSpec sp;
    sp.n_frames = 8;
    sp.scale = 2;
    sp.seed = 4;
    SyntheticSequence seq = generate_sequence(hr, sp);
    RegistrationConfig cfg;
    std::vector<Transform> est = register_sequence(seq.frames, cfg);
    for (int k = 0; k < sp.n_frames; ++k) {
        CHECK(std::fabs(est[k].tx - seq.true_shifts[k].tx) < 0.05);
        CHECK(std::fabs(est[k].ty - seq.true_shifts[k].ty) < 0.05);
    }
}

TEST_CASE("constant reference is rejected as degenerate") {
    GrayImage flat(64, 64, 60.0);
    RegistrationConfig cfg;
    CHECK_THROWS_AS(register_pair(flat, flat, cfg), DegenerateInputError);
}

TEST_CASE("estimates beyond the search limit raise non-convergence") {
    GrayImage ref = make_scene(96, 96, 17);
    GrayImage frame = shift_image(ref, 1.5, 1.5);
    RegistrationConfig cfg;
    cfg.search_limit = 0.2;
    CHECK_THROWS_AS(register_pair(ref, frame, cfg), NonConvergenceError);
}

TEST_CASE("sequence failures carry the frame index") {
    std::vector<GrayImage> frames(3, GrayImage(48, 48, 9.0));
    RegistrationConfig cfg;
    try {
        register_sequence(frames, cfg);
        FAIL("expected a registration error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("frame") != std::string::npos);
    }
}

TEST_CASE("mismatched dimensions are rejected") {
    GrayImage a(32, 32, 0.0);
    GrayImage b(32, 16, 0.0);
    RegistrationConfig cfg;
    CHECK_THROWS_AS(register_pair(a, b, cfg), Error);
}

} // TEST_SUITE
