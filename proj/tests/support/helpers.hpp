#pragma once

#include "srlocal/projection.hpp"
#include "srlocal/rng.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace srlocal::testing {

// Support pixel at HR coordinates (x,y) with its distance from site (gx,gy)
// filled in; frame/row/col default to zero unless the test cares about them.
inline SupportPixel support_at(double x, double y, double value, int gx, int gy,
                               int frame = 0, int lr_row = 0, int lr_col = 0) {
    SupportPixel s;
    s.px = ProjectedPixel{x, y, value, frame, lr_row, lr_col};
    const double dx = x - gx, dy = y - gy;
    s.dist = std::sqrt(dx * dx + dy * dy);
    return s;
}

// Fresh empty directory under the system temp root, unique per (name, counter).
inline std::string temp_dir(const std::string& name) {
    static int counter = 0;
    std::filesystem::path p = std::filesystem::temp_directory_path() /
                              ("srlocal_test_" + name + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p.string();
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& data) {
    std::ofstream out(path, std::ios::binary);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

// Cloud of n pixels scattered uniformly over an HR lattice, values in
// [0,255), frame indices cycling over n_frames.
inline ProjectedCloud random_cloud(int hr_w, int hr_h, int n, int n_frames,
                                   std::uint64_t seed) {
    Rng rng(seed);
    std::vector<ProjectedPixel> pixels;
    pixels.reserve(n);
    for (int i = 0; i < n; ++i) {
        ProjectedPixel p;
        p.x = rng.uniform(-0.49, hr_w - 0.51);
        p.y = rng.uniform(-0.49, hr_h - 0.51);
        p.value = rng.uniform(0.0, 255.0);
        p.frame = i % n_frames;
        p.lr_row = i / 17;
        p.lr_col = i % 17;
        pixels.push_back(p);
    }
    return ProjectedCloud(std::move(pixels), hr_w, hr_h, 0);
}

} // namespace srlocal::testing
