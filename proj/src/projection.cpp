#include "srlocal/projection.hpp"

#include "srlocal/errors.hpp"

#include <algorithm>
#include <cmath>

namespace srlocal {

namespace {

// Bin of a coordinate: floor-rounded, so cell k covers [k-0.5, k+0.5).
inline int bin_of(double c) { return static_cast<int>(std::floor(c + 0.5)); }

inline bool support_order(const SupportPixel& a, const SupportPixel& b) {
    if (a.dist != b.dist) return a.dist < b.dist;
    if (a.px.frame != b.px.frame) return a.px.frame < b.px.frame;
    if (a.px.lr_row != b.px.lr_row) return a.px.lr_row < b.px.lr_row;
    return a.px.lr_col < b.px.lr_col;
}

} // namespace

ProjectedCloud::ProjectedCloud(std::vector<ProjectedPixel> pixels, int hr_width, int hr_height,
                               std::size_t dropped)
    : pixels_(std::move(pixels)), hr_width_(hr_width), hr_height_(hr_height), dropped_(dropped) {
    bins_.resize(static_cast<std::size_t>(hr_width_) * hr_height_);
    for (int i = 0; i < static_cast<int>(pixels_.size()); ++i) {
        int bx = bin_of(pixels_[i].x);
        int by = bin_of(pixels_[i].y);
        bins_[static_cast<std::size_t>(by) * hr_width_ + bx].push_back(i);
    }
}

const std::vector<int>& ProjectedCloud::bin(int bx, int by) const {
    static const std::vector<int> empty;
    if (bx < 0 || bx >= hr_width_ || by < 0 || by >= hr_height_) return empty;
    return bins_[static_cast<std::size_t>(by) * hr_width_ + bx];
}

ProjectedCloud project_sequence(const std::vector<GrayImage>& frames,
                                const std::vector<Transform>& transforms, int scale) {
    if (frames.size() != transforms.size())
        throw Error("project_sequence: frames/transforms length mismatch");
    if (frames.empty()) throw Error("project_sequence: no frames");
    if (scale < 1) throw Error("project_sequence: scale must be >= 1");

    const int lr_w = frames[0].width;
    const int lr_h = frames[0].height;
    for (const GrayImage& f : frames)
        if (f.width != lr_w || f.height != lr_h)
            throw Error("project_sequence: frames have unequal dimensions");

    const int hr_w = lr_w * scale;
    const int hr_h = lr_h * scale;
    const double off = (scale - 1) / 2.0;

    std::vector<ProjectedPixel> pixels;
    pixels.reserve(frames.size() * static_cast<std::size_t>(lr_w) * lr_h);
    std::size_t dropped = 0;
    for (int k = 0; k < static_cast<int>(frames.size()); ++k) {
        const Transform& t = transforms[k];
        for (int i = 0; i < lr_h; ++i) {
            for (int j = 0; j < lr_w; ++j) {
                double x = scale * (j - t.tx) + off;
                double y = scale * (i - t.ty) + off;
                if (x < -0.5 || x >= hr_w - 0.5 || y < -0.5 || y >= hr_h - 0.5) {
                    ++dropped;
                    continue;
                }
                pixels.push_back(ProjectedPixel{x, y, frames[k].at(i, j), k, i, j});
            }
        }
    }
    return ProjectedCloud(std::move(pixels), hr_w, hr_h, dropped);
}

std::vector<SupportPixel> query_support(const ProjectedCloud& cloud, int gx, int gy,
                                        double radius) {
    if (radius <= 0.0) throw Error("query_support: radius must be > 0");
    std::vector<SupportPixel> out;
    const int r = static_cast<int>(std::ceil(radius));
    const double r2 = radius * radius;
    const std::vector<ProjectedPixel>& pixels = cloud.pixels();
    for (int by = gy - r; by <= gy + r; ++by) {
        for (int bx = gx - r; bx <= gx + r; ++bx) {
            for (int idx : cloud.bin(bx, by)) {
                const ProjectedPixel& p = pixels[idx];
                double dx = p.x - gx;
                double dy = p.y - gy;
                double d2 = dx * dx + dy * dy;
                if (d2 <= r2) out.push_back(SupportPixel{p, std::sqrt(d2)});
            }
        }
    }
    std::sort(out.begin(), out.end(), support_order);
    return out;
}

} // namespace srlocal
