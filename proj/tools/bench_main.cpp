#include "srlocal/pipeline.hpp"
#include "srlocal/rng.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <cstring>
#include <string>
#include <vector>

using namespace srlocal;

namespace {

double now_s() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

template <class Fn>
double time_best(Fn&& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const double t0 = now_s();
        fn();
        best = std::min(best, now_s() - t0);
    }
    return best;
}

bool same_image(const GrayImage& a, const GrayImage& b) {
    return a.width == b.width && a.height == b.height &&
           std::memcmp(a.pixels.data(), b.pixels.data(),
                       a.pixels.size() * sizeof(double)) == 0;
}

bool same_grid(const ModelGrid& a, const ModelGrid& b) {
    if (a.width != b.width || a.height != b.height || a.fallback != b.fallback) return false;
    for (std::size_t i = 0; i < a.models.size(); ++i)
        if (a.models[i].coeffs != b.models[i].coeffs) return false;
    return true;
}

void report(const char* name, double serial_s, double parallel_s, bool equal, bool& ok) {
    std::printf("%-18s %9.3f s %9.3f s   x%.2f   %s\n", name, serial_s, parallel_s,
                parallel_s > 0 ? serial_s / parallel_s : 0.0,
                equal ? "bitwise equal" : "MISMATCH");
    if (!equal) ok = false;
}

} // namespace

int main(int argc, char** argv) {
    int reps = 3;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--reps" && i + 1 < argc) reps = std::atoi(argv[++i]);
        else if (arg == "--threads" && i + 1 < argc) omp_set_num_threads(std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: srbench [--reps N] [--threads N]\n");
            return 2;
        }
    }
    std::printf("srbench: %d OpenMP threads, best of %d reps\n\n", omp_get_max_threads(), reps);

    const GrayImage hr = make_scene(192, 192, 42);
    SequenceSpec sp;
    sp.n_frames = 12;
    sp.sigma = 5.0;
    sp.seed = 7;
    const SyntheticSequence seq = generate_sequence(hr, sp);
    const ProjectedCloud cloud = project_sequence(seq.frames, seq.true_shifts, sp.scale);
    const FitConfig fit;

    bool ok = true;
    std::printf("%-18s %11s %11s\n", "kernel", "serial", "parallel");

    ModelGrid grid_s, grid_p;
    const double t_gs = time_best([&] { grid_s = fit_grid_models_serial(cloud, fit); }, reps);
    const double t_gp = time_best([&] { grid_p = fit_grid_models(cloud, fit); }, reps);
    report("fit_grid_models", t_gs, t_gp, same_grid(grid_s, grid_p), ok);

    GrayImage pi_s, pi_p;
    const double t_is = time_best(
        [&] { pi_s = reconstruct_interp_serial(cloud, InterpMethod::kPoly2, fit); }, reps);
    const double t_ip =
        time_best([&] { pi_p = reconstruct_interp(cloud, InterpMethod::kPoly2, fit); }, reps);
    report("reconstruct_poly2", t_is, t_ip, same_image(pi_s, pi_p), ok);

    // Synthetic bundle: identity basis over the raw patch space plus a randomly
    // initialized network. Enough to exercise the full neural site kernel.
    ModelBundle bundle;
    bundle.cfg.window = 3;
    bundle.cfg.eigvecs = 40;
    bundle.basis.dim = 54;
    bundle.basis.mean.assign(54, 0.0);
    bundle.basis.eigenvalues.assign(54, 1.0);
    bundle.basis.eigenvectors.assign(54 * 54, 0.0);
    for (int i = 0; i < 54; ++i) bundle.basis.eigenvectors[i * 54 + i] = 1.0;
    bundle.basis.n_samples = 54;
    bundle.mlp = init_weights(40, 11);

    GrayImage mlp_s, mlp_p;
    const double t_ms =
        time_best([&] { mlp_s = reconstruct_mlp_serial(cloud, bundle, nullptr); }, reps);
    const double t_mp =
        time_best([&] { mlp_p = reconstruct_mlp(cloud, bundle, nullptr); }, reps);
    report("reconstruct_mlp", t_ms, t_mp, same_image(mlp_s, mlp_p), ok);

    Rng rng(3);
    std::vector<TrainingSample> samples(20000);
    for (TrainingSample& s : samples) {
        s.input.resize(40);
        for (double& v : s.input) v = rng.uniform(-1.0, 1.0);
        s.target = rng.uniform(-1.0, 1.0);
    }
    const MlpParams net = init_weights(40, 5);
    LossGrad lg_s, lg_p;
    const double t_ls = time_best([&] { lg_s = loss_and_grad_serial(net, samples); }, reps);
    const double t_lp = time_best([&] { lg_p = loss_and_grad(net, samples); }, reps);
    report("loss_and_grad", t_ls, t_lp, lg_s.mse == lg_p.mse && lg_s.grad == lg_p.grad, ok);

    std::printf("\n%s\n", ok ? "all kernels agree" : "kernel mismatch detected");
    return ok ? 0 : 1;
}
