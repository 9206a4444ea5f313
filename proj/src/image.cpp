#include "srlocal/image.hpp"

#include "srlocal/errors.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace srlocal {

namespace {

// Next header token, skipping whitespace and '#' comment lines.
std::string next_token(std::istream& in) {
    std::string tok;
    int c;
    while ((c = in.get()) != EOF) {
        if (c == '#') {
            while ((c = in.get()) != EOF && c != '\n') {
            }
            continue;
        }
        if (std::isspace(c)) continue;
        tok.push_back(static_cast<char>(c));
        while ((c = in.peek()) != EOF && !std::isspace(c) && c != '#') {
            tok.push_back(static_cast<char>(in.get()));
        }
        return tok;
    }
    return tok;
}

int parse_header_int(std::istream& in, const std::string& field, const std::string& path) {
    std::string tok = next_token(in);
    if (tok.empty()) throw FormatError("pgm: truncated header, missing " + field + ": " + path);
    try {
        std::size_t pos = 0;
        long v = std::stol(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
        return static_cast<int>(v);
    } catch (const std::exception&) {
        throw FormatError("pgm: bad " + field + " '" + tok + "': " + path);
    }
}

} // namespace

GrayImage load_pgm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path);

    std::string magic = next_token(in);
    if (magic != "P5" && magic != "P2")
        throw FormatError("pgm: bad magic '" + magic + "' (want P5 or P2): " + path);

    int w = parse_header_int(in, "width", path);
    int h = parse_header_int(in, "height", path);
    int maxval = parse_header_int(in, "maxval", path);
    if (w < 1 || h < 1) throw FormatError("pgm: non-positive dimensions: " + path);
    if (maxval != 255)
        throw FormatError("pgm: maxval " + std::to_string(maxval) + " unsupported (want 255): " + path);

    GrayImage img(w, h);
    const std::size_t n = img.pixels.size();
    if (magic == "P5") {
        int c = in.get(); // single whitespace separator after maxval
        if (c == EOF || !std::isspace(c)) throw FormatError("pgm: missing payload separator: " + path);
        std::vector<unsigned char> raw(n);
        in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
        if (static_cast<std::size_t>(in.gcount()) != n)
            throw FormatError("pgm: truncated payload: " + path);
        for (std::size_t k = 0; k < n; ++k) img.pixels[k] = static_cast<double>(raw[k]);
    } else {
        for (std::size_t k = 0; k < n; ++k) {
            int v = parse_header_int(in, "sample", path);
            if (v < 0 || v > maxval)
                throw FormatError("pgm: sample " + std::to_string(v) + " out of range: " + path);
            img.pixels[k] = static_cast<double>(v);
        }
    }
    return img;
}

unsigned char quantize_gray(double v) {
    double r = v >= 0.0 ? std::floor(v + 0.5) : std::ceil(v - 0.5);
    r = std::clamp(r, 0.0, 255.0);
    return static_cast<unsigned char>(r);
}

void save_pgm(const GrayImage& img, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.pixels.size());
    for (std::size_t k = 0; k < raw.size(); ++k) raw[k] = quantize_gray(img.pixels[k]);
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!out) throw Error("write failed: " + path);
}

double bilinear_sample(const GrayImage& img, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height - 1));
    int x0 = static_cast<int>(std::floor(x));
    int y0 = static_cast<int>(std::floor(y));
    int x1 = std::min(x0 + 1, img.width - 1);
    int y1 = std::min(y0 + 1, img.height - 1);
    double fx = x - x0;
    double fy = y - y0;
    double top = img.at(y0, x0) * (1.0 - fx) + img.at(y0, x1) * fx;
    double bot = img.at(y1, x0) * (1.0 - fx) + img.at(y1, x1) * fx;
    return top * (1.0 - fy) + bot * fy;
}

double rms_error(const GrayImage& a, const GrayImage& b, int border) {
    if (a.width != b.width || a.height != b.height)
        throw Error("rms_error: dimension mismatch " + std::to_string(a.width) + "x" +
                    std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
                    std::to_string(b.height));
    if (border < 0) throw Error("rms_error: negative border");
    const int x0 = border, x1 = a.width - border;
    const int y0 = border, y1 = a.height - border;
    if (x0 >= x1 || y0 >= y1)
        throw Error("rms_error: empty interior after excluding border " + std::to_string(border));
    double acc = 0.0;
    for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
            double d = a.at(y, x) - b.at(y, x);
            acc += d * d;
        }
    }
    return std::sqrt(acc / (static_cast<double>(x1 - x0) * (y1 - y0)));
}

} // namespace srlocal
