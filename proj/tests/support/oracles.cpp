#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>

namespace srlocal::testing {

namespace {

// One-sided Jacobi SVD of a tall column-major matrix (m >= n): rotates column
// pairs until they are mutually orthogonal. On return a's columns are
// sigma_j * u_j and v holds the right singular vectors, also column-major.
void jacobi_orthogonalize(std::vector<long double>& a, std::vector<long double>& v, int m,
                          int n) {
    v.assign(static_cast<std::size_t>(n) * n, 0.0L);
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i) * n + i] = 1.0L;

    bool changed = true;
    for (int sweep = 0; sweep < 60 && changed; ++sweep) {
        changed = false;
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                long double* cp = &a[static_cast<std::size_t>(p) * m];
                long double* cq = &a[static_cast<std::size_t>(q) * m];
                long double app = 0, aqq = 0, apq = 0;
                for (int i = 0; i < m; ++i) {
                    app += cp[i] * cp[i];
                    aqq += cq[i] * cq[i];
                    apq += cp[i] * cq[i];
                }
                if (app == 0.0L || aqq == 0.0L) continue;
                if (std::abs(apq) <= 1e-22L * std::sqrt(app * aqq)) continue;
                changed = true;
                long double tau = (aqq - app) / (2.0L * apq);
                long double t = (tau >= 0 ? 1.0L : -1.0L) /
                                (std::abs(tau) + std::sqrt(1.0L + tau * tau));
                long double c = 1.0L / std::sqrt(1.0L + t * t);
                long double s = c * t;
                for (int i = 0; i < m; ++i) {
                    long double xp = cp[i], xq = cq[i];
                    cp[i] = c * xp - s * xq;
                    cq[i] = s * xp + c * xq;
                }
                long double* vp = &v[static_cast<std::size_t>(p) * n];
                long double* vq = &v[static_cast<std::size_t>(q) * n];
                for (int i = 0; i < n; ++i) {
                    long double xp = vp[i], xq = vq[i];
                    vp[i] = c * xp - s * xq;
                    vq[i] = s * xp + c * xq;
                }
            }
        }
    }
}

} // namespace

std::vector<double> pinv_solve(const std::vector<double>& A, int rows, int cols,
                               const std::vector<double>& b, double rel_threshold) {
    if (rows < 1 || cols < 1 || A.size() != static_cast<std::size_t>(rows) * cols ||
        b.size() != static_cast<std::size_t>(rows))
        throw std::invalid_argument("pinv_solve: bad dimensions");

    // Factor the tall orientation; for a wide system factor A^T instead and
    // read the roles of U and V back in reverse.
    const bool wide = rows < cols;
    const int m = wide ? cols : rows, n = wide ? rows : cols;
    std::vector<long double> mat(static_cast<std::size_t>(m) * n);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            long double e = A[static_cast<std::size_t>(r) * cols + c];
            if (wide)
                mat[static_cast<std::size_t>(r) * m + c] = e; // column r of A^T
            else
                mat[static_cast<std::size_t>(c) * m + r] = e;
        }

    std::vector<long double> v;
    jacobi_orthogonalize(mat, v, m, n);

    std::vector<long double> sigma(n);
    long double smax = 0.0L;
    for (int j = 0; j < n; ++j) {
        long double ss = 0.0L;
        const long double* col = &mat[static_cast<std::size_t>(j) * m];
        for (int i = 0; i < m; ++i) ss += col[i] * col[i];
        sigma[j] = std::sqrt(ss);
        smax = std::max(smax, sigma[j]);
    }

    const long double cutoff = static_cast<long double>(rel_threshold) * smax;
    std::vector<long double> x(cols, 0.0L);
    for (int j = 0; j < n; ++j) {
        if (sigma[j] <= cutoff || sigma[j] == 0.0L) continue;
        const long double* uj = &mat[static_cast<std::size_t>(j) * m]; // sigma_j * u_j
        const long double* vj = &v[static_cast<std::size_t>(j) * n];
        if (!wide) {
            // x += v_j (u_j . b) / sigma_j
            long double dot = 0.0L;
            for (int i = 0; i < m; ++i) dot += uj[i] * b[i];
            dot /= sigma[j] * sigma[j];
            for (int i = 0; i < n; ++i) x[i] += vj[i] * dot;
        } else {
            // A = V Sigma U^T here, so x += u_j (v_j . b) / sigma_j
            long double dot = 0.0L;
            for (int i = 0; i < n; ++i) dot += vj[i] * b[i];
            dot /= sigma[j] * sigma[j];
            for (int i = 0; i < m; ++i) x[i] += uj[i] * dot;
        }
    }

    std::vector<double> out(cols);
    for (int i = 0; i < cols; ++i) out[i] = static_cast<double>(x[i]);
    return out;
}

std::vector<double> fit_poly_oracle(const std::vector<SupportPixel>& support, int gx, int gy,
                                    int order, double rel_threshold) {
    const int m = poly_coeff_count(order);
    const int n = static_cast<int>(support.size());
    std::vector<double> A(static_cast<std::size_t>(n) * m);
    std::vector<double> b(n);
    double row[10];
    for (int p = 0; p < n; ++p) {
        poly_basis(order, support[p].px.x - gx, support[p].px.y - gy, row);
        for (int c = 0; c < m; ++c) A[static_cast<std::size_t>(p) * m + c] = row[c];
        b[p] = support[p].px.value;
    }
    return pinv_solve(A, n, m, b, rel_threshold);
}

namespace {

double ssd_at(const GrayImage& reference, const GrayImage& frame, double tx, double ty,
              int border) {
    double ssd = 0.0;
    for (int i = border; i < frame.height - border; ++i)
        for (int j = border; j < frame.width - border; ++j) {
            double d = bilinear_sample(reference, j - tx, i - ty) - frame.at(i, j);
            ssd += d * d;
        }
    return ssd;
}

Transform grid_argmin(const GrayImage& reference, const GrayImage& frame, double x_lo,
                      double x_hi, double y_lo, double y_hi, double step, int border) {
    Transform best;
    double best_ssd = std::numeric_limits<double>::infinity();
    const int nx = static_cast<int>(std::floor((x_hi - x_lo) / step + 0.5));
    const int ny = static_cast<int>(std::floor((y_hi - y_lo) / step + 0.5));
    for (int iy = 0; iy <= ny; ++iy)
        for (int ix = 0; ix <= nx; ++ix) {
            const double tx = x_lo + ix * step;
            const double ty = y_lo + iy * step;
            const double ssd = ssd_at(reference, frame, tx, ty, border);
            if (ssd < best_ssd) {
                best_ssd = ssd;
                best = Transform{tx, ty};
            }
        }
    return best;
}

} // namespace

Transform ssd_grid_search(const GrayImage& reference, const GrayImage& frame, double lo,
                          double hi, double step, int border) {
    Transform best = grid_argmin(reference, frame, lo, hi, lo, hi, step, border);
    for (int pass = 0; pass < 2; ++pass) {
        const double fine = step / 5.0;
        best = grid_argmin(reference, frame, best.tx - step, best.tx + step, best.ty - step,
                           best.ty + step, fine, border);
        step = fine;
    }
    return best;
}

std::vector<SupportPixel> support_scan(const ProjectedCloud& cloud, int gx, int gy,
                                       double radius) {
    std::vector<SupportPixel> out;
    const double r2 = radius * radius;
    for (const ProjectedPixel& p : cloud.pixels()) {
        const double dx = p.x - gx, dy = p.y - gy;
        const double d2 = dx * dx + dy * dy;
        if (d2 <= r2) out.push_back(SupportPixel{p, std::sqrt(d2)});
    }
    std::sort(out.begin(), out.end(), [](const SupportPixel& a, const SupportPixel& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.px.frame != b.px.frame) return a.px.frame < b.px.frame;
        if (a.px.lr_row != b.px.lr_row) return a.px.lr_row < b.px.lr_row;
        return a.px.lr_col < b.px.lr_col;
    });
    return out;
}

double mlp_forward_oracle(const MlpParams& params, const std::vector<double>& x) {
    long double out = params.b2;
    for (int j = 0; j < 10; ++j) {
        long double pre = params.b1[j];
        for (int i = 0; i < params.k_in; ++i)
            pre += static_cast<long double>(params.W1[static_cast<std::size_t>(j) * params.k_in + i]) *
                   x[i];
        out += static_cast<long double>(params.w2[j]) * std::tanh(pre);
    }
    return static_cast<double>(out);
}

std::vector<double> flatten_params(const MlpParams& params) {
    std::vector<double> flat;
    flat.reserve(params.param_count());
    flat.insert(flat.end(), params.W1.begin(), params.W1.end());
    flat.insert(flat.end(), params.b1.begin(), params.b1.end());
    flat.insert(flat.end(), params.w2.begin(), params.w2.end());
    flat.push_back(params.b2);
    return flat;
}

MlpParams unflatten_params(int k_in, const std::vector<double>& flat) {
    MlpParams p;
    p.k_in = k_in;
    auto it = flat.begin();
    p.W1.assign(it, it + 10 * k_in);
    it += 10 * k_in;
    p.b1.assign(it, it + 10);
    it += 10;
    p.w2.assign(it, it + 10);
    it += 10;
    p.b2 = *it;
    return p;
}

std::vector<double> fd_gradient(const MlpParams& params,
                                const std::vector<TrainingSample>& samples, double h) {
    std::vector<double> flat = flatten_params(params);
    std::vector<double> grad(flat.size());
    for (std::size_t i = 0; i < flat.size(); ++i) {
        const double saved = flat[i];
        flat[i] = saved + h;
        const double fp = mlp_loss(unflatten_params(params.k_in, flat), samples);
        flat[i] = saved - h;
        const double fm = mlp_loss(unflatten_params(params.k_in, flat), samples);
        flat[i] = saved;
        grad[i] = (fp - fm) / (2.0 * h);
    }
    return grad;
}

} // namespace srlocal::testing
