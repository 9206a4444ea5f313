#include "srlocal/errors.hpp"
#include "srlocal/projection.hpp"
#include "srlocal/synth.hpp"

#include "helpers.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>

using namespace srlocal;
using namespace srlocal::testing;

namespace {

// The projected pixel originating from LR (row, col) of frame k.
const ProjectedPixel& find_pixel(const ProjectedCloud& cloud, int frame, int row, int col) {
    for (const ProjectedPixel& p : cloud.pixels())
        if (p.frame == frame && p.lr_row == row && p.lr_col == col) return p;
    throw Error("test: pixel not found in cloud");
}

} // namespace

TEST_SUITE("projection") {

TEST_CASE("reference pixels land on block centroids") {
    GrayImage lr(2, 2);
    lr.at(0, 0) = 5.0;
    ProjectedCloud cloud = project_sequence({lr}, {Transform{0.0, 0.0}}, 2);
    const ProjectedPixel& p = find_pixel(cloud, 0, 0, 0);
    CHECK(p.x == doctest::Approx(0.5));
    CHECK(p.y == doctest::Approx(0.5));
    CHECK(p.value == doctest::Approx(5.0));
}

TEST_CASE("the transform moves samples into the reference frame") {
    GrayImage lr(4, 4, 0.0);
    ProjectedCloud cloud = project_sequence({lr, lr}, {Transform{}, Transform{0.25, 0.0}}, 2);
    const ProjectedPixel& p = find_pixel(cloud, 1, 0, 1);
    CHECK(p.x == doctest::Approx(2.0));
    CHECK(p.y == doctest::Approx(0.5));
}

TEST_CASE("scale 1 with identity transform reproduces the image") {
    GrayImage img = make_scene(16, 12, 3);
    ProjectedCloud cloud = project_sequence({img}, {Transform{}}, 1);
    REQUIRE(cloud.pixels().size() == img.pixels.size());
    CHECK(cloud.dropped() == 0);
    for (const ProjectedPixel& p : cloud.pixels()) {
        CHECK(p.x == doctest::Approx(p.lr_col));
        CHECK(p.y == doctest::Approx(p.lr_row));
        CHECK(p.value == img.at(p.lr_row, p.lr_col));
    }
}

TEST_CASE("out-of-bounds pixels are dropped and counted") {
    GrayImage lr(4, 4, 1.0);
    // x = 2*(j - 2.6) + 0.5 puts columns 0..2 below -0.5 for the second frame.
    ProjectedCloud cloud = project_sequence({lr, lr}, {Transform{}, Transform{2.6, 0.0}}, 2);
    CHECK(cloud.dropped() == 3 * 4);
    CHECK(cloud.pixels().size() == 16 + 4);
}

TEST_CASE("bins cover [k-0.5, k+0.5) on both axes") {
    std::vector<ProjectedPixel> pts;
    pts.push_back(ProjectedPixel{0.49, 0.0, 1.0, 0, 0, 0});
    pts.push_back(ProjectedPixel{0.5, 0.0, 2.0, 0, 0, 1});
    pts.push_back(ProjectedPixel{-0.49, 1.2, 3.0, 0, 1, 0});
    ProjectedCloud cloud(pts, 4, 4, 0);

    REQUIRE(cloud.bin(0, 0).size() == 1);
    CHECK(cloud.pixels()[cloud.bin(0, 0)[0]].value == 1.0);
    REQUIRE(cloud.bin(1, 0).size() == 1);
    CHECK(cloud.pixels()[cloud.bin(1, 0)[0]].value == 2.0);
    REQUIRE(cloud.bin(0, 1).size() == 1);
    CHECK(cloud.pixels()[cloud.bin(0, 1)[0]].value == 3.0);
    CHECK(cloud.bin(-1, 0).empty());
    CHECK(cloud.bin(0, 4).empty());
}

TEST_CASE("query_support returns pixels sorted by distance") {
    ProjectedCloud cloud = random_cloud(12, 12, 400, 5, 77);
    std::vector<SupportPixel> sup = query_support(cloud, 6, 6, 2.5);
    REQUIRE(!sup.empty());
    for (std::size_t i = 1; i < sup.size(); ++i) CHECK(sup[i - 1].dist <= sup[i].dist);
    for (const SupportPixel& s : sup) {
        CHECK(s.dist <= 2.5);
        const double dx = s.px.x - 6, dy = s.px.y - 6;
        CHECK(s.dist == doctest::Approx(std::sqrt(dx * dx + dy * dy)));
    }
}

TEST_CASE("equal distances break ties toward the lower frame") {
    std::vector<ProjectedPixel> pts;
    pts.push_back(ProjectedPixel{6.0, 5.0, 1.0, 3, 0, 0});
    pts.push_back(ProjectedPixel{4.0, 5.0, 2.0, 1, 0, 0});
    ProjectedCloud cloud(pts, 10, 10, 0);
    std::vector<SupportPixel> sup = query_support(cloud, 5, 5, 1.0);
    REQUIRE(sup.size() == 2);
    CHECK(sup[0].px.frame == 1);
    CHECK(sup[1].px.frame == 3);
    CHECK(sup[0].dist == doctest::Approx(1.0));
}

TEST_CASE("a pixel exactly at the radius is included") {
    std::vector<ProjectedPixel> pts{ProjectedPixel{5.0, 3.0, 9.0, 0, 0, 0}};
    ProjectedCloud cloud(pts, 10, 10, 0);
    CHECK(query_support(cloud, 5, 5, 2.0).size() == 1);
    CHECK(query_support(cloud, 5, 5, 1.9).empty());
}

TEST_CASE("query_support agrees with a linear scan") {
    ProjectedCloud cloud = random_cloud(20, 16, 1500, 8, 123);
    for (int gy : {0, 3, 8, 15}) {
        for (int gx : {0, 5, 12, 19}) {
            std::vector<SupportPixel> fast = query_support(cloud, gx, gy, 2.5);
            std::vector<SupportPixel> slow = support_scan(cloud, gx, gy, 2.5);
            REQUIRE(fast.size() == slow.size());
            for (std::size_t i = 0; i < fast.size(); ++i) {
                CHECK(fast[i].px.x == slow[i].px.x);
                CHECK(fast[i].px.y == slow[i].px.y);
                CHECK(fast[i].px.value == slow[i].px.value);
                CHECK(fast[i].px.frame == slow[i].px.frame);
                CHECK(fast[i].dist == slow[i].dist);
            }
        }
    }
}

TEST_CASE("ground-truth projection at sigma 0 lands on centroids") {
    GrayImage hr = make_scene(32, 32, 8);
    SequenceSpec sp;
    sp.n_frames = 5;
    sp.scale = 2;
    sp.seed = 19;
    SyntheticSequence seq = generate_sequence(hr, sp);
    ProjectedCloud cloud = project_sequence(seq.frames, seq.true_shifts, sp.scale);
    for (const ProjectedPixel& p : cloud.pixels()) {
        if (p.frame != 0) continue;
        CHECK(p.x == doctest::Approx(2.0 * p.lr_col + 0.5));
        CHECK(p.y == doctest::Approx(2.0 * p.lr_row + 0.5));
    }
}

TEST_CASE("frame and transform counts must match") {
    GrayImage lr(4, 4, 0.0);
    CHECK_THROWS_AS(project_sequence({lr, lr}, {Transform{}}, 2), Error);
}

} // TEST_SUITE
