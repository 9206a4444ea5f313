#include "srlocal/localmodel.hpp"

#include "srlocal/errors.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <cmath>

namespace srlocal {

int poly_coeff_count(int order) {
    switch (order) {
        case 1: return 3;
        case 2: return 6;
        case 3: return 10;
        default: throw Error("poly order must be in {1,2,3}, got " + std::to_string(order));
    }
}

void poly_basis(int order, double dx, double dy, double* row) {
    row[0] = 1.0;
    row[1] = dx;
    row[2] = dy;
    if (order >= 2) {
        row[3] = dx * dx;
        row[4] = dx * dy;
        row[5] = dy * dy;
    }
    if (order >= 3) {
        row[6] = dx * dx * dx;
        row[7] = dx * dx * dy;
        row[8] = dx * dy * dy;
        row[9] = dy * dy * dy;
    }
}

PolyModel fit_poly(const std::vector<SupportPixel>& support, int gx, int gy, int order,
                   const FitConfig& cfg) {
    const int m = poly_coeff_count(order);
    const int n = static_cast<int>(support.size());
    if (n == 0)
        throw InvalidModelError("fit_poly: empty support at site (" + std::to_string(gx) + "," +
                                std::to_string(gy) + ")");

    Eigen::MatrixXd A(n, m);
    Eigen::VectorXd v(n);
    double row[10];
    for (int p = 0; p < n; ++p) {
        poly_basis(order, support[p].px.x - gx, support[p].px.y - gy, row);
        for (int c = 0; c < m; ++c) A(p, c) = row[c];
        v(p) = support[p].px.value;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double cutoff = cfg.svd_rel_threshold * sv(0);

    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(m);
    bool truncated = false;
    for (int k = 0; k < sv.size(); ++k) {
        if (sv(k) <= cutoff || sv(k) == 0.0) {
            truncated = true;
            continue;
        }
        coeffs += svd.matrixV().col(k) * (svd.matrixU().col(k).dot(v) / sv(k));
    }

    PolyModel model;
    model.order = order;
    model.coeffs.assign(coeffs.data(), coeffs.data() + m);
    model.gx = gx;
    model.gy = gy;
    model.n_support = n;
    const int min_support = cfg.min_support > 0 ? cfg.min_support : m;
    model.condition_flag = truncated || n < min_support;
    return model;
}

double eval_poly(const PolyModel& model, double dx, double dy) {
    double row[10];
    poly_basis(model.order, dx, dy, row);
    double acc = 0.0;
    for (std::size_t c = 0; c < model.coeffs.size(); ++c) acc += model.coeffs[c] * row[c];
    return acc;
}

double interp_nn(const std::vector<SupportPixel>& support) {
    if (support.empty()) throw InvalidModelError("interp_nn: empty support");
    return support.front().px.value;
}

double interp_idw(const std::vector<SupportPixel>& support) {
    if (support.empty()) throw InvalidModelError("interp_idw: empty support");
    constexpr double eps = 1e-9;
    double coincident_sum = 0.0;
    int coincident = 0;
    for (const SupportPixel& s : support) {
        if (s.dist < eps) {
            coincident_sum += s.px.value;
            ++coincident;
        }
    }
    if (coincident > 0) return coincident_sum / coincident;

    double wsum = 0.0, vsum = 0.0;
    for (const SupportPixel& s : support) {
        double w = 1.0 / std::max(s.dist, eps);
        wsum += w;
        vsum += w * s.px.value;
    }
    return vsum / wsum;
}

double interp_poly(const ProjectedCloud& cloud, int gx, int gy, int order,
                   const FitConfig& cfg) {
    std::vector<SupportPixel> support = query_support(cloud, gx, gy, cfg.support_radius);
    if (!support.empty()) return fit_poly(support, gx, gy, order, cfg).coeffs[0];

    std::vector<SupportPixel> wider = query_support(cloud, gx, gy, 2.0 * cfg.support_radius);
    if (wider.empty())
        throw InvalidModelError("interp_poly: no projected pixels within 2x radius of site (" +
                                std::to_string(gx) + "," + std::to_string(gy) + ")");
    return interp_nn(wider);
}

} // namespace srlocal
