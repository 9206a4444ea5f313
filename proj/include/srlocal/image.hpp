#pragma once

#include <cassert>
#include <string>
#include <vector>

namespace srlocal {

// Dense grayscale raster. Values are nominally gray levels in [0,255] but
// intermediate stages (noise addition, model fitting) may leave that range;
// clamping and rounding happen only on file write.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<double> pixels; // row-major, size = width * height

    GrayImage() = default;
    GrayImage(int w, int h, double fill = 0.0)
        : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

    double& at(int y, int x) {
        assert(y >= 0 && y < height && x >= 0 && x < width);
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
    double at(int y, int x) const {
        assert(y >= 0 && y < height && x >= 0 && x < width);
        return pixels[static_cast<std::size_t>(y) * width + x];
    }
};

// PGM I/O. Reads P5 (binary) and P2 (ASCII) with maxval 255; writes P5.
// Header comment lines are tolerated on read and never emitted on write.
GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

// Byte a pixel value maps to on write: round half away from zero, clamp to [0,255].
unsigned char quantize_gray(double v);

// Bilinear interpolation with pixel centers at integer coordinates; x is the
// column coordinate, y the row. Coordinates outside the image are clamped to
// the border before interpolation.
double bilinear_sample(const GrayImage& img, double x, double y);

// Root mean squared difference over the interior, excluding `border` pixels
// on all four sides. Throws on dimension mismatch or an empty interior.
double rms_error(const GrayImage& a, const GrayImage& b, int border);

} // namespace srlocal
