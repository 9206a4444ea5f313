#pragma once

#include "srlocal/image.hpp"
#include "srlocal/registration.hpp"

#include <cstddef>
#include <vector>

namespace srlocal {

// One LR sequence pixel placed at real-valued HR coordinates.
struct ProjectedPixel {
    double x = 0.0; // HR column coordinate
    double y = 0.0; // HR row coordinate
    double value = 0.0;
    int frame = 0;
    int lr_row = 0;
    int lr_col = 0;
};

// A support pixel paired with its Euclidean distance from the queried site.
struct SupportPixel {
    ProjectedPixel px;
    double dist = 0.0;
};

// All projected sequence pixels, spatially binned on the HR lattice (one bin
// per HR pixel, cell k covers [k-0.5, k+0.5)). Immutable after construction.
class ProjectedCloud {
public:
    ProjectedCloud(std::vector<ProjectedPixel> pixels, int hr_width, int hr_height,
                   std::size_t dropped);

    const std::vector<ProjectedPixel>& pixels() const { return pixels_; }
    int hr_width() const { return hr_width_; }
    int hr_height() const { return hr_height_; }
    std::size_t dropped() const { return dropped_; } // out-of-bounds pixels discarded

    // Indices (into pixels()) of the pixels binned at cell (bx,by).
    const std::vector<int>& bin(int bx, int by) const;

private:
    std::vector<ProjectedPixel> pixels_;
    std::vector<std::vector<int>> bins_;
    int hr_width_ = 0;
    int hr_height_ = 0;
    std::size_t dropped_ = 0;
};

// Places LR pixel (i,j) of frame k with transform (tx,ty) at HR coordinates
//   x = scale*(j - tx) + (scale-1)/2,  y = scale*(i - ty) + (scale-1)/2,
// aligning LR pixel centers with the centroid of their scale x scale HR block
// and undoing the content motion so all frames land in the reference frame.
// Pixels outside [-0.5, dim-0.5) are dropped and counted.
ProjectedCloud project_sequence(const std::vector<GrayImage>& frames,
                                const std::vector<Transform>& transforms, int scale);

// All pixels within `radius` of the site, sorted by (distance, frame, lr row,
// lr col) — a total deterministic order. An empty result is valid.
std::vector<SupportPixel> query_support(const ProjectedCloud& cloud, int gx, int gy,
                                        double radius);

} // namespace srlocal
