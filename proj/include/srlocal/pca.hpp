#pragma once

#include <string>
#include <vector>

namespace srlocal {

// Flattened neighborhood coefficient patch: w*w sites scanned row-major, six
// order-2 coefficients per site in basis order, so length = 6*w*w.
using CoeffPatch = std::vector<double>;

// PCA basis over coefficient patches. Eigen-pairs are sorted by non-increasing
// eigenvalue (tiny negatives clipped to 0); column k of `eigenvectors` is the
// k-th eigenvector. Sign convention: the largest-magnitude entry of each
// column is positive, ties resolved toward the lowest index.
struct EigenBasis {
    int dim = 0;
    std::vector<double> mean;
    std::vector<double> eigenvalues;
    std::vector<double> eigenvectors; // column-major dim x dim
    long n_samples = 0;

    double vec(int row, int col) const {
        return eigenvectors[static_cast<std::size_t>(col) * dim + row];
    }
};

// Sample mean + eigendecomposition of the sample covariance (divisor n-1).
// Requires at least 2 samples of equal length.
EigenBasis fit_pca(const std::vector<CoeffPatch>& samples);

// First k components of <patch - mean, eigenvector_j>.
std::vector<double> pca_project(const EigenBasis& basis, const CoeffPatch& patch, int k);

// mean + sum_j coords[j] * eigenvector_j.
CoeffPatch pca_reconstruct(const EigenBasis& basis, const std::vector<double>& coords);

// Fraction of total variance captured by the first k eigenvalues; 1.0 for a
// degenerate all-zero spectrum.
double explained_variance(const EigenBasis& basis, int k);

// Writes the first m eigenvectors as a tiled PGM: one row of six w x w channel
// images per eigenvector (channel = coefficient index), each eigenvector
// affinely mapped to [0,255] over its own value range (constant -> 128).
// Output dimensions: (m*w) rows x (6*w) columns.
void export_eigenimages(const EigenBasis& basis, int m, int w, const std::string& path);

// Text serialization, header "SRPCA 1", full decimal round-trip precision.
void save_basis(const EigenBasis& basis, const std::string& path);
EigenBasis load_basis(const std::string& path);

} // namespace srlocal
