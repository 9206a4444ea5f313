#include "srlocal/pca.hpp"

#include "srlocal/errors.hpp"
#include "srlocal/image.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace srlocal {

namespace {

void normalize_sign(Eigen::Ref<Eigen::VectorXd> col) {
    int best = 0;
    double best_mag = std::abs(col(0));
    for (int i = 1; i < col.size(); ++i) {
        if (std::abs(col(i)) > best_mag) {
            best_mag = std::abs(col(i));
            best = i;
        }
    }
    if (col(best) < 0.0) col = -col;
}

void print_doubles(std::ostream& out, const double* v, int n) {
    char buf[32];
    for (int i = 0; i < n; ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
        out << (i ? " " : "") << buf;
    }
    out << "\n";
}

} // namespace

EigenBasis fit_pca(const std::vector<CoeffPatch>& samples) {
    if (samples.size() < 2) throw Error("fit_pca: need at least 2 samples");
    const int d = static_cast<int>(samples[0].size());
    for (const CoeffPatch& s : samples)
        if (static_cast<int>(s.size()) != d) throw Error("fit_pca: inconsistent sample lengths");

    const long n = static_cast<long>(samples.size());
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const CoeffPatch& s : samples)
        mean += Eigen::Map<const Eigen::VectorXd>(s.data(), d);
    mean /= static_cast<double>(n);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    Eigen::VectorXd centered(d);
    for (const CoeffPatch& s : samples) {
        centered = Eigen::Map<const Eigen::VectorXd>(s.data(), d) - mean;
        cov.selfadjointView<Eigen::Lower>().rankUpdate(centered, 1.0);
    }
    cov = cov.selfadjointView<Eigen::Lower>();
    cov /= static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw Error("fit_pca: eigendecomposition failed");

    EigenBasis basis;
    basis.dim = d;
    basis.n_samples = n;
    basis.mean.assign(mean.data(), mean.data() + d);
    basis.eigenvalues.resize(d);
    basis.eigenvectors.resize(static_cast<std::size_t>(d) * d);

    // Eigen returns ascending eigenvalues; store them non-increasing.
    Eigen::MatrixXd vecs = solver.eigenvectors();
    for (int k = 0; k < d; ++k) {
        int src = d - 1 - k;
        double lambda = solver.eigenvalues()(src);
        basis.eigenvalues[k] = lambda < 0.0 ? 0.0 : lambda;
        Eigen::VectorXd col = vecs.col(src);
        normalize_sign(col);
        for (int i = 0; i < d; ++i)
            basis.eigenvectors[static_cast<std::size_t>(k) * d + i] = col(i);
    }
    return basis;
}

std::vector<double> pca_project(const EigenBasis& basis, const CoeffPatch& patch, int k) {
    if (static_cast<int>(patch.size()) != basis.dim)
        throw Error("pca_project: patch length " + std::to_string(patch.size()) +
                    " != basis dim " + std::to_string(basis.dim));
    if (k < 1 || k > basis.dim) throw Error("pca_project: k out of range");
    std::vector<double> coords(k);
    for (int j = 0; j < k; ++j) {
        double acc = 0.0;
        const double* col = &basis.eigenvectors[static_cast<std::size_t>(j) * basis.dim];
        for (int i = 0; i < basis.dim; ++i) acc += (patch[i] - basis.mean[i]) * col[i];
        coords[j] = acc;
    }
    return coords;
}

CoeffPatch pca_reconstruct(const EigenBasis& basis, const std::vector<double>& coords) {
    const int k = static_cast<int>(coords.size());
    if (k > basis.dim) throw Error("pca_reconstruct: k out of range");
    CoeffPatch patch(basis.mean);
    for (int j = 0; j < k; ++j) {
        const double* col = &basis.eigenvectors[static_cast<std::size_t>(j) * basis.dim];
        for (int i = 0; i < basis.dim; ++i) patch[i] += coords[j] * col[i];
    }
    return patch;
}

double explained_variance(const EigenBasis& basis, int k) {
    if (k < 1 || k > basis.dim) throw Error("explained_variance: k out of range");
    double total = 0.0, head = 0.0;
    for (int j = 0; j < basis.dim; ++j) {
        total += basis.eigenvalues[j];
        if (j < k) head += basis.eigenvalues[j];
    }
    if (total == 0.0) return 1.0;
    return head / total;
}

void export_eigenimages(const EigenBasis& basis, int m, int w, const std::string& path) {
    if (m < 1 || m > basis.dim) throw Error("export_eigenimages: m out of range");
    if (basis.dim != 6 * w * w)
        throw Error("export_eigenimages: basis dim " + std::to_string(basis.dim) +
                    " != 6*w*w for w=" + std::to_string(w));

    GrayImage tile(6 * w, m * w);
    for (int e = 0; e < m; ++e) {
        const double* col = &basis.eigenvectors[static_cast<std::size_t>(e) * basis.dim];
        double lo = col[0], hi = col[0];
        for (int i = 1; i < basis.dim; ++i) {
            lo = std::min(lo, col[i]);
            hi = std::max(hi, col[i]);
        }
        for (int c = 0; c < 6; ++c) {
            for (int sy = 0; sy < w; ++sy) {
                for (int sx = 0; sx < w; ++sx) {
                    double v = col[(sy * w + sx) * 6 + c];
                    double g = (hi > lo) ? (v - lo) / (hi - lo) * 255.0 : 128.0;
                    tile.at(e * w + sy, c * w + sx) = g;
                }
            }
        }
    }
    save_pgm(tile, path);
}

void save_basis(const EigenBasis& basis, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path);
    out << "SRPCA 1\n" << basis.dim << "\n" << basis.n_samples << "\n";
    print_doubles(out, basis.mean.data(), basis.dim);
    for (int k = 0; k < basis.dim; ++k) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.17g", basis.eigenvalues[k]);
        out << buf << " ";
        print_doubles(out, &basis.eigenvectors[static_cast<std::size_t>(k) * basis.dim],
                      basis.dim);
    }
    if (!out) throw Error("write failed: " + path);
}

EigenBasis load_basis(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "SRPCA" || version != "1") throw FormatError("not an SRPCA 1 file: " + path);
    EigenBasis basis;
    in >> basis.dim >> basis.n_samples;
    if (!in || basis.dim < 1) throw FormatError("bad SRPCA header: " + path);
    basis.mean.resize(basis.dim);
    for (double& v : basis.mean) in >> v;
    basis.eigenvalues.resize(basis.dim);
    basis.eigenvectors.resize(static_cast<std::size_t>(basis.dim) * basis.dim);
    for (int k = 0; k < basis.dim; ++k) {
        in >> basis.eigenvalues[k];
        for (int i = 0; i < basis.dim; ++i)
            in >> basis.eigenvectors[static_cast<std::size_t>(k) * basis.dim + i];
    }
    if (!in) throw FormatError("truncated SRPCA file: " + path);
    return basis;
}

} // namespace srlocal
