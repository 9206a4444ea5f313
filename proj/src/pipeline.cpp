#include "srlocal/pipeline.hpp"

#include "srlocal/errors.hpp"
#include "srlocal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>

namespace srlocal {

namespace {

// Seed stream tags so the corpus generator, the two benchmark harnesses and
// the trainer never share a random stream even under the same base seed.
constexpr std::uint64_t kSeedTrainCorpus = 11;
constexpr std::uint64_t kSeedBenchInterp = 12;
constexpr std::uint64_t kSeedBenchMethods = 13;

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt10(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

// Runs fn(gx, gy) over every HR site, optionally with OpenMP. Per-site work
// writes only its own output slot, so the parallel and serial drivers produce
// identical results. The first exception thrown by any site is rethrown.
template <class Fn>
void for_each_site(int width, int height, bool parallel, Fn&& fn) {
    std::exception_ptr err = nullptr;
    const long total = static_cast<long>(width) * height;
#pragma omp parallel for schedule(dynamic, 64) if (parallel)
    for (long idx = 0; idx < total; ++idx) {
        try {
            fn(static_cast<int>(idx % width), static_cast<int>(idx / width));
        } catch (...) {
#pragma omp critical
            if (!err) err = std::current_exception();
        }
    }
    if (err) std::rethrow_exception(err);
}

// Nearest-neighbor value found by repeatedly doubling the search radius.
// Only reachable on clouds that are non-empty, so the loop terminates once the
// radius covers the image diagonal.
double expanding_nn(const ProjectedCloud& cloud, int gx, int gy, double radius) {
    const double rmax = std::hypot(cloud.hr_width(), cloud.hr_height()) + 1.0;
    double r = radius;
    while (true) {
        std::vector<SupportPixel> s = query_support(cloud, gx, gy, r);
        if (!s.empty()) return interp_nn(s);
        if (r > rmax)
            throw DegenerateInputError("expanding_nn: no projected pixels near site");
        r *= 2.0;
    }
}

// Local model for one site: a proper least-squares fit when the support is
// non-empty, otherwise a constant model from the nearest neighbor at twice the
// radius; sites empty even there get the expanding search and are flagged.
PolyModel fit_site_model(const ProjectedCloud& cloud, int gx, int gy, int order,
                         const FitConfig& cfg, bool* fallback) {
    if (fallback) *fallback = false;
    std::vector<SupportPixel> support = query_support(cloud, gx, gy, cfg.support_radius);
    if (!support.empty()) return fit_poly(support, gx, gy, order, cfg);

    PolyModel m;
    m.order = order;
    m.coeffs.assign(static_cast<std::size_t>(poly_coeff_count(order)), 0.0);
    m.gx = gx;
    m.gy = gy;
    m.n_support = 0;
    m.condition_flag = true;
    std::vector<SupportPixel> wider = query_support(cloud, gx, gy, 2.0 * cfg.support_radius);
    if (!wider.empty()) {
        m.coeffs[0] = interp_nn(wider);
        return m;
    }
    if (fallback) *fallback = true;
    m.coeffs[0] = expanding_nn(cloud, gx, gy, 4.0 * cfg.support_radius);
    return m;
}

// Values feeding the normalization spread: the central site's support, widened
// once if the nominal radius is empty (matching the constant-model source).
std::vector<double> central_support_values(const ProjectedCloud& cloud, int gx, int gy,
                                           const FitConfig& cfg) {
    std::vector<SupportPixel> s = query_support(cloud, gx, gy, cfg.support_radius);
    if (s.empty()) s = query_support(cloud, gx, gy, 2.0 * cfg.support_radius);
    std::vector<double> values(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) values[i] = s[i].px.value;
    return values;
}

void check_window(int w) {
    if (w < 1 || w % 2 == 0) throw Error("neighborhood window must be odd and positive");
}

ModelGrid fit_grid_impl(const ProjectedCloud& cloud, const FitConfig& cfg, bool parallel) {
    if (cloud.pixels().empty())
        throw DegenerateInputError("fit_grid_models: projected cloud is empty");
    ModelGrid grid;
    grid.width = cloud.hr_width();
    grid.height = cloud.hr_height();
    const std::size_t total = static_cast<std::size_t>(grid.width) * grid.height;
    grid.models.resize(total);
    grid.fallback.assign(total, 0);
    for_each_site(grid.width, grid.height, parallel, [&](int gx, int gy) {
        bool fb = false;
        const std::size_t idx = static_cast<std::size_t>(gy) * grid.width + gx;
        grid.models[idx] = fit_site_model(cloud, gx, gy, 2, cfg, &fb);
        grid.fallback[idx] = fb ? 1 : 0;
    });
    return grid;
}

void gather_patch(const ModelGrid& grid, int gx, int gy, int w, CoeffPatch& out) {
    const int half = w / 2;
    out.resize(static_cast<std::size_t>(6) * w * w);
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            const int ny = std::clamp(gy + dy, 0, grid.height - 1);
            const int nx = std::clamp(gx + dx, 0, grid.width - 1);
            const PolyModel& m = grid.at(ny, nx);
            const std::size_t site = static_cast<std::size_t>(dy + half) * w + (dx + half);
            for (int c = 0; c < 6; ++c) out[site * 6 + c] = m.coeffs[c];
        }
    }
}

GrayImage reconstruct_interp_impl(const ProjectedCloud& cloud, InterpMethod method,
                                  const FitConfig& cfg, bool parallel) {
    if (cloud.pixels().empty())
        throw DegenerateInputError("reconstruct_interp: projected cloud is empty");
    GrayImage out(cloud.hr_width(), cloud.hr_height());
    for_each_site(out.width, out.height, parallel, [&](int gx, int gy) {
        double v = 0.0;
        switch (method) {
        case InterpMethod::kSeqNN:
        case InterpMethod::kIdw: {
            std::vector<SupportPixel> s = query_support(cloud, gx, gy, cfg.support_radius);
            if (s.empty())
                v = expanding_nn(cloud, gx, gy, 2.0 * cfg.support_radius);
            else
                v = method == InterpMethod::kSeqNN ? interp_nn(s) : interp_idw(s);
            break;
        }
        case InterpMethod::kPoly1:
        case InterpMethod::kPoly2:
        case InterpMethod::kPoly3: {
            const int order = method == InterpMethod::kPoly1   ? 1
                              : method == InterpMethod::kPoly2 ? 2
                                                               : 3;
            PolyModel m = fit_site_model(cloud, gx, gy, order, cfg, nullptr);
            v = eval_poly(m, 0.0, 0.0);
            break;
        }
        }
        out.at(gy, gx) = v;
    });
    return out;
}

void check_bundle(const ModelBundle& bundle) {
    check_window(bundle.cfg.window);
    const int dim = 6 * bundle.cfg.window * bundle.cfg.window;
    if (bundle.basis.dim != dim)
        throw InvalidModelError("bundle basis dim " + std::to_string(bundle.basis.dim) +
                                " does not match window " + std::to_string(bundle.cfg.window));
    if (bundle.mlp.k_in < 1 || bundle.mlp.k_in > bundle.basis.dim)
        throw InvalidModelError("bundle MLP input size out of range");
}

GrayImage reconstruct_mlp_impl(const ProjectedCloud& cloud, const ModelBundle& bundle,
                               ReconstructionStats* stats, bool parallel) {
    check_bundle(bundle);
    const ModelGrid grid = fit_grid_impl(cloud, bundle.cfg.fit, parallel);
    GrayImage out(grid.width, grid.height);
    const int w = bundle.cfg.window;
    for_each_site(grid.width, grid.height, parallel, [&](int gx, int gy) {
        if (grid.is_fallback(gy, gx)) {
            out.at(gy, gx) = grid.at(gy, gx).coeffs[0];
            return;
        }
        CoeffPatch patch;
        gather_patch(grid, gx, gy, w, patch);
        std::vector<double> support = central_support_values(cloud, gx, gy, bundle.cfg.fit);
        NormalizedPatch np = normalize(patch, support, std::nullopt);
        std::vector<double> x = pca_project(bundle.basis, np.patch, bundle.mlp.k_in);
        out.at(gy, gx) = denormalize(mlp_forward(bundle.mlp, x), np.ctx);
    });
    if (stats) {
        stats->fallback_sites = 0;
        for (std::uint8_t f : grid.fallback) stats->fallback_sites += f;
    }
    return out;
}

std::string sigma_tag(double sigma) {
    std::string s = fmt10(sigma);
    for (char& c : s)
        if (c == '.') c = 'p';
    return s;
}

} // namespace

int effective_rms_border(const PipelineConfig& cfg) {
    return cfg.rms_border >= 0 ? cfg.rms_border : 2 * cfg.scale;
}

void validate_config(const PipelineConfig& cfg) {
    if (cfg.scale < 1) throw Error("config: scale must be >= 1");
    check_window(cfg.window);
    const int dim = 6 * cfg.window * cfg.window;
    if (cfg.eigvecs < 1 || cfg.eigvecs > dim)
        throw Error("config: eigvecs must be in [1, " + std::to_string(dim) + "]");
    if (cfg.n_frames < 1) throw Error("config: need at least one frame");
    if (cfg.noise_levels.empty()) throw Error("config: noise_levels is empty");
    for (double s : cfg.noise_levels)
        if (!(s >= 0.0)) throw Error("config: noise levels must be >= 0");
    if (cfg.sample_budget < 1) throw Error("config: sample budget must be positive");
    if (!(cfg.val_fraction >= 0.0 && cfg.val_fraction < 1.0))
        throw Error("config: val_fraction must be in [0, 1)");
    if (!(cfg.fit.support_radius > 0.0)) throw Error("config: support radius must be > 0");
}

ModelGrid fit_grid_models(const ProjectedCloud& cloud, const FitConfig& cfg) {
    return fit_grid_impl(cloud, cfg, true);
}

ModelGrid fit_grid_models_serial(const ProjectedCloud& cloud, const FitConfig& cfg) {
    return fit_grid_impl(cloud, cfg, false);
}

PatchResult build_patch(const ProjectedCloud& cloud, int gx, int gy, int w,
                        const FitConfig& cfg) {
    check_window(w);
    if (cloud.pixels().empty())
        throw DegenerateInputError("build_patch: projected cloud is empty");
    if (gx < 0 || gx >= cloud.hr_width() || gy < 0 || gy >= cloud.hr_height())
        throw Error("build_patch: site outside the HR grid");
    PatchResult r;
    r.patch.resize(static_cast<std::size_t>(6) * w * w);
    const int half = w / 2;
    for (int dy = -half; dy <= half; ++dy) {
        for (int dx = -half; dx <= half; ++dx) {
            const int ny = std::clamp(gy + dy, 0, cloud.hr_height() - 1);
            const int nx = std::clamp(gx + dx, 0, cloud.hr_width() - 1);
            bool fb = false;
            PolyModel m = fit_site_model(cloud, nx, ny, 2, cfg, &fb);
            if (dx == 0 && dy == 0) r.fallback = fb;
            const std::size_t site = static_cast<std::size_t>(dy + half) * w + (dx + half);
            for (int c = 0; c < 6; ++c) r.patch[site * 6 + c] = m.coeffs[c];
        }
    }
    r.support_values = central_support_values(cloud, gx, gy, cfg);
    return r;
}

PatchResult build_patch(const ProjectedCloud& cloud, const ModelGrid& grid, int gx, int gy,
                        int w, const FitConfig& cfg) {
    check_window(w);
    if (grid.width != cloud.hr_width() || grid.height != cloud.hr_height())
        throw Error("build_patch: model grid does not match the cloud dimensions");
    if (gx < 0 || gx >= grid.width || gy < 0 || gy >= grid.height)
        throw Error("build_patch: site outside the HR grid");
    PatchResult r;
    r.fallback = grid.is_fallback(gy, gx);
    gather_patch(grid, gx, gy, w, r.patch);
    r.support_values = central_support_values(cloud, gx, gy, cfg);
    return r;
}

const char* interp_method_name(InterpMethod m) {
    switch (m) {
    case InterpMethod::kSeqNN: return "SEQ-NN";
    case InterpMethod::kIdw: return "IDW";
    case InterpMethod::kPoly1: return "poly1";
    case InterpMethod::kPoly2: return "poly2";
    case InterpMethod::kPoly3: return "poly3";
    }
    return "?";
}

GrayImage reconstruct_interp(const ProjectedCloud& cloud, InterpMethod method,
                             const FitConfig& cfg) {
    return reconstruct_interp_impl(cloud, method, cfg, true);
}

GrayImage reconstruct_interp_serial(const ProjectedCloud& cloud, InterpMethod method,
                                    const FitConfig& cfg) {
    return reconstruct_interp_impl(cloud, method, cfg, false);
}

GrayImage reconstruct_mlp(const ProjectedCloud& cloud, const ModelBundle& bundle,
                          ReconstructionStats* stats) {
    return reconstruct_mlp_impl(cloud, bundle, stats, true);
}

GrayImage reconstruct_mlp_serial(const ProjectedCloud& cloud, const ModelBundle& bundle,
                                 ReconstructionStats* stats) {
    return reconstruct_mlp_impl(cloud, bundle, stats, false);
}

GrayImage superresolve(const std::vector<GrayImage>& frames, const ModelBundle& bundle,
                       ReconstructionStats* stats) {
    if (frames.empty()) throw DegenerateInputError("superresolve: no frames");
    const std::vector<Transform> shifts = register_sequence(frames, bundle.cfg.reg);
    return superresolve(frames, shifts, bundle, stats);
}

GrayImage superresolve(const std::vector<GrayImage>& frames,
                       const std::vector<Transform>& shifts, const ModelBundle& bundle,
                       ReconstructionStats* stats) {
    if (frames.empty()) throw DegenerateInputError("superresolve: no frames");
    if (shifts.size() != frames.size())
        throw Error("superresolve: shift count does not match frame count");
    const ProjectedCloud cloud = project_sequence(frames, shifts, bundle.cfg.scale);
    return reconstruct_mlp(cloud, bundle, stats);
}

GrayImage baseline_zoom(const std::vector<GrayImage>& frames, int scale) {
    if (frames.empty()) throw DegenerateInputError("baseline_zoom: no frames");
    if (scale < 1) throw Error("baseline_zoom: scale must be >= 1");
    const GrayImage& f0 = frames[0];
    GrayImage out(f0.width * scale, f0.height * scale);
    const double off = (scale - 1) / 2.0;
    for (int gy = 0; gy < out.height; ++gy)
        for (int gx = 0; gx < out.width; ++gx)
            out.at(gy, gx) = bilinear_sample(f0, (gx - off) / scale, (gy - off) / scale);
    return out;
}

TrainingSetResult build_training_set(const std::vector<GrayImage>& corpus,
                                     const PipelineConfig& cfg) {
    validate_config(cfg);
    if (corpus.empty()) throw DegenerateInputError("build_training_set: empty corpus");

    TrainingSetResult res;
    const int dim = 6 * cfg.window * cfg.window;
    res.train.k_raw = dim;
    res.val.k_raw = dim;

    const int margin = std::max(cfg.window / 2, effective_rms_border(cfg));
    const long n_passes = static_cast<long>(corpus.size()) * cfg.noise_levels.size();
    const long per_pass = std::max<long>(1, (cfg.sample_budget + n_passes - 1) / n_passes);
    const long val_per_mille = std::clamp<long>(std::lround(cfg.val_fraction * 1000.0), 0, 1000);

    std::vector<CoeffPatch> train_patches; // normalized, PCA input
    long g = 0;                            // global collected index, drives the split

    for (std::size_t a = 0; a < corpus.size(); ++a) {
        const GrayImage& hr = corpus[a];
        res.corpus_hashes.push_back(image_hash(hr));
        const std::uint64_t image_seed =
            derive_seed(derive_seed(cfg.seed, kSeedTrainCorpus), static_cast<std::uint64_t>(a));
        for (std::size_t b = 0; b < cfg.noise_levels.size(); ++b) {
            SequenceSpec sp;
            sp.n_frames = cfg.n_frames;
            sp.scale = cfg.scale;
            sp.sigma = cfg.noise_levels[b];
            sp.seed = derive_seed(image_seed, static_cast<std::uint64_t>(b));
            SyntheticSequence seq = generate_sequence(hr, sp);
            const std::vector<Transform> shifts =
                cfg.use_truth_shifts ? seq.true_shifts : register_sequence(seq.frames, cfg.reg);
            const ProjectedCloud cloud = project_sequence(seq.frames, shifts, cfg.scale);
            const ModelGrid grid = fit_grid_models(cloud, cfg.fit);

            const int usable_w = grid.width - 2 * margin;
            const int usable_h = grid.height - 2 * margin;
            if (usable_w < 1 || usable_h < 1)
                throw Error("build_training_set: image too small for the sampling margin");
            const double usable = static_cast<double>(usable_w) * usable_h;
            const int stride =
                std::max(1, static_cast<int>(std::floor(std::sqrt(usable / per_pass))));

            long pass_sites = 0;
            long pass_collected = 0;
            for (int gy = margin; gy < grid.height - margin; gy += stride) {
                for (int gx = margin; gx < grid.width - margin; gx += stride) {
                    ++pass_sites;
                    if (grid.is_fallback(gy, gx)) {
                        ++res.skipped_fallback;
                        continue;
                    }
                    PatchResult pr = build_patch(cloud, grid, gx, gy, cfg.window, cfg.fit);
                    NormalizedPatch np = normalize(pr.patch, pr.support_values, std::nullopt);
                    RawSample rs;
                    rs.patch = std::move(pr.patch);
                    rs.target = hr.at(gy, gx);
                    rs.ctx = np.ctx;
                    const bool is_val = (g % 1000) < val_per_mille;
                    if (is_val) {
                        res.val.samples.push_back(std::move(rs));
                    } else {
                        res.train.samples.push_back(std::move(rs));
                        train_patches.push_back(std::move(np.patch));
                    }
                    ++g;
                    ++pass_collected;
                }
            }
            res.pass_grid_sites.push_back(pass_sites);
            res.pass_collected.push_back(pass_collected);
        }
    }
    if (train_patches.empty())
        throw DegenerateInputError("build_training_set: no training samples collected");
    res.basis = fit_pca(train_patches);
    return res;
}

double BenchmarkReport::value(const std::string& row, double sigma) const {
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        if (row_labels[r] != row) continue;
        for (std::size_t c = 0; c < sigmas.size(); ++c)
            if (std::fabs(sigmas[c] - sigma) < 1e-9) return rms[r][c];
    }
    throw Error("report: no entry for " + row + " at sigma " + fmt10(sigma));
}

std::string BenchmarkReport::to_csv() const {
    std::ostringstream out;
    out << "method";
    for (double s : sigmas) out << ",sigma=" << fmt10(s);
    out << "\n";
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        out << row_labels[r];
        for (double v : rms[r]) out << "," << fmt10(v);
        out << "\n";
    }
    for (const std::string& line : footer) out << "# " << line << "\n";
    return out.str();
}

BenchmarkReport benchmark_interpolators(const GrayImage& hr, const PipelineConfig& cfg) {
    validate_config(cfg);
    if (hr.width % cfg.scale != 0 || hr.height % cfg.scale != 0)
        throw Error("benchmark: image dimensions must be divisible by the scale");

    const InterpMethod methods[] = {InterpMethod::kSeqNN, InterpMethod::kIdw,
                                    InterpMethod::kPoly1, InterpMethod::kPoly2,
                                    InterpMethod::kPoly3};
    BenchmarkReport rep;
    rep.sigmas = cfg.noise_levels;
    for (InterpMethod m : methods) rep.row_labels.emplace_back(interp_method_name(m));
    rep.rms.assign(rep.row_labels.size(), std::vector<double>(rep.sigmas.size(), 0.0));

    const int border = effective_rms_border(cfg);
    for (std::size_t b = 0; b < cfg.noise_levels.size(); ++b) {
        SequenceSpec sp;
        sp.n_frames = cfg.n_frames;
        sp.scale = cfg.scale;
        sp.sigma = cfg.noise_levels[b];
        sp.seed = derive_seed(derive_seed(cfg.seed, kSeedBenchInterp),
                              static_cast<std::uint64_t>(b));
        SyntheticSequence seq = generate_sequence(hr, sp);
        const std::vector<Transform> shifts =
            cfg.use_truth_shifts ? seq.true_shifts : register_sequence(seq.frames, cfg.reg);
        const ProjectedCloud cloud = project_sequence(seq.frames, shifts, cfg.scale);
        for (std::size_t r = 0; r < std::size(methods); ++r) {
            const GrayImage rec = reconstruct_interp(cloud, methods[r], cfg.fit);
            rep.rms[r][b] = rms_error(rec, hr, border);
        }
    }
    rep.footer.push_back(std::string("shifts: ") +
                         (cfg.use_truth_shifts ? "ground truth" : "estimated"));
    rep.footer.push_back("frames: " + std::to_string(cfg.n_frames) +
                         ", scale: " + std::to_string(cfg.scale) +
                         ", support radius: " + fmt10(cfg.fit.support_radius));
    rep.footer.push_back("rms border: " + std::to_string(border) +
                         ", seed: " + std::to_string(cfg.seed));
    return rep;
}

BenchmarkReport benchmark_methods(const GrayImage& hr, const ModelBundle& bundle,
                                  const std::string& out_dir) {
    check_bundle(bundle);
    const PipelineConfig& cfg = bundle.cfg;
    if (hr.width % cfg.scale != 0 || hr.height % cfg.scale != 0)
        throw Error("benchmark: image dimensions must be divisible by the scale");
    const std::uint64_t hash = image_hash(hr);
    for (std::uint64_t h : bundle.corpus_hashes)
        if (h == hash)
            throw Error("benchmark: refusing image that appears in the training manifest");

    if (!out_dir.empty()) std::filesystem::create_directories(out_dir);

    BenchmarkReport rep;
    rep.sigmas = {0.0, 20.0};
    rep.row_labels = {"ZOOM", "SEQ-NN", "MLP"};
    rep.rms.assign(rep.row_labels.size(), std::vector<double>(rep.sigmas.size(), 0.0));

    const int border = effective_rms_border(cfg);
    long fallback_total = 0;
    for (std::size_t b = 0; b < rep.sigmas.size(); ++b) {
        SequenceSpec sp;
        sp.n_frames = cfg.n_frames;
        sp.scale = cfg.scale;
        sp.sigma = rep.sigmas[b];
        sp.seed = derive_seed(derive_seed(cfg.seed, kSeedBenchMethods),
                              static_cast<std::uint64_t>(b));
        SyntheticSequence seq = generate_sequence(hr, sp);
        const std::vector<Transform> shifts =
            cfg.use_truth_shifts ? seq.true_shifts : register_sequence(seq.frames, cfg.reg);
        const ProjectedCloud cloud = project_sequence(seq.frames, shifts, cfg.scale);

        const GrayImage zoom = baseline_zoom(seq.frames, cfg.scale);
        const GrayImage nn = reconstruct_interp(cloud, InterpMethod::kSeqNN, cfg.fit);
        ReconstructionStats stats;
        const GrayImage mlp = reconstruct_mlp(cloud, bundle, &stats);
        fallback_total += stats.fallback_sites;

        rep.rms[0][b] = rms_error(zoom, hr, border);
        rep.rms[1][b] = rms_error(nn, hr, border);
        rep.rms[2][b] = rms_error(mlp, hr, border);

        if (!out_dir.empty()) {
            const std::string tag = sigma_tag(rep.sigmas[b]);
            save_pgm(zoom, out_dir + "/zoom_sigma" + tag + ".pgm");
            save_pgm(nn, out_dir + "/seqnn_sigma" + tag + ".pgm");
            save_pgm(mlp, out_dir + "/mlp_sigma" + tag + ".pgm");
        }
    }
    rep.footer.push_back(std::string("shifts: ") +
                         (cfg.use_truth_shifts ? "ground truth" : "estimated"));
    rep.footer.push_back("zoom: bilinear upsampling of frame 0 on the projection lattice");
    rep.footer.push_back("frames: " + std::to_string(cfg.n_frames) +
                         ", scale: " + std::to_string(cfg.scale) +
                         ", rms border: " + std::to_string(border));
    rep.footer.push_back("fallback sites: " + std::to_string(fallback_total) +
                         ", seed: " + std::to_string(cfg.seed));
    char hex[32];
    std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(hash));
    rep.footer.push_back(std::string("test image hash: ") + hex);
    return rep;
}

std::vector<SweepPoint> dimension_sweep(const SampleSet& train, const SampleSet& val,
                                        const EigenBasis& basis, const PipelineConfig& cfg,
                                        const std::vector<int>& k_values) {
    if (k_values.empty()) throw Error("dimension_sweep: no k values");
    int kmax = 0;
    for (int k : k_values) {
        if (k < 1 || k > basis.dim) throw Error("dimension_sweep: k out of range");
        kmax = std::max(kmax, k);
    }
    if (train.samples.empty() || val.samples.empty())
        throw Error("dimension_sweep: need non-empty train and validation sets");

    // Project once at the widest k; the first k coordinates of a wider
    // projection equal the k-dimensional projection.
    const std::vector<TrainingSample> train_max = make_training_samples(train, basis, kmax);
    const std::vector<TrainingSample> val_max = make_training_samples(val, basis, kmax);

    const auto truncate = [](const std::vector<TrainingSample>& in, int k) {
        std::vector<TrainingSample> out = in;
        for (TrainingSample& s : out) s.input.resize(static_cast<std::size_t>(k));
        return out;
    };

    std::vector<SweepPoint> curve;
    curve.reserve(k_values.size());
    for (int k : k_values) {
        const std::vector<TrainingSample> tr = truncate(train_max, k);
        const std::vector<TrainingSample> va = truncate(val_max, k);
        const MlpParams init = init_weights(k, cfg.train.seed);
        const TrainResult res = train_cg(init, tr, cfg.train);
        curve.push_back({k, validation_rms(res.params, va)});
    }
    return curve;
}

std::string sweep_to_csv(const std::vector<SweepPoint>& curve) {
    std::ostringstream out;
    out << "k,val_rms\n";
    for (const SweepPoint& p : curve) out << p.k << "," << fmt10(p.val_rms) << "\n";
    return out.str();
}

double validation_rms(const MlpParams& params, const std::vector<TrainingSample>& samples) {
    if (samples.empty()) throw Error("validation_rms: empty sample set");
    double acc = 0.0;
    for (const TrainingSample& s : samples) {
        const double e = (mlp_forward(params, s.input) - s.target) * s.ctx.s;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(samples.size()));
}

std::uint64_t image_hash(const GrayImage& img) {
    std::uint64_t h = 1469598103934665603ull;
    const auto mix = [&h](unsigned char byte) {
        h ^= byte;
        h *= 1099511628211ull;
    };
    const auto mix32 = [&mix](std::uint32_t v) {
        for (int i = 0; i < 4; ++i) mix(static_cast<unsigned char>((v >> (8 * i)) & 0xff));
    };
    mix32(static_cast<std::uint32_t>(img.width));
    mix32(static_cast<std::uint32_t>(img.height));
    for (double v : img.pixels) mix(quantize_gray(v));
    return h;
}

namespace {

void write_manifest(const ModelBundle& bundle, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    const PipelineConfig& c = bundle.cfg;
    out << "SRMANIFEST 1\n";
    out << "scale = " << c.scale << "\n";
    out << "window = " << c.window << "\n";
    out << "eigvecs = " << c.eigvecs << "\n";
    out << "n_frames = " << c.n_frames << "\n";
    out << "noise_levels = ";
    for (std::size_t i = 0; i < c.noise_levels.size(); ++i)
        out << (i ? "," : "") << fmt17(c.noise_levels[i]);
    out << "\n";
    out << "use_truth_shifts = " << (c.use_truth_shifts ? 1 : 0) << "\n";
    out << "rms_border = " << c.rms_border << "\n";
    out << "sample_budget = " << c.sample_budget << "\n";
    out << "val_fraction = " << fmt17(c.val_fraction) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "fit.support_radius = " << fmt17(c.fit.support_radius) << "\n";
    out << "fit.svd_rel_threshold = " << fmt17(c.fit.svd_rel_threshold) << "\n";
    out << "fit.min_support = " << c.fit.min_support << "\n";
    out << "reg.pyramid_levels = " << c.reg.pyramid_levels << "\n";
    out << "reg.max_iters_per_level = " << c.reg.max_iters_per_level << "\n";
    out << "reg.convergence_eps = " << fmt17(c.reg.convergence_eps) << "\n";
    out << "reg.search_limit = " << fmt17(c.reg.search_limit) << "\n";
    out << "train.max_iters = " << c.train.max_iters << "\n";
    out << "train.grad_tol = " << fmt17(c.train.grad_tol) << "\n";
    out << "train.seed = " << c.train.seed << "\n";
    out << "train.restart_interval = " << c.train.restart_interval << "\n";
    out << "train.armijo_c = " << fmt17(c.train.armijo_c) << "\n";
    out << "train.backtrack = " << fmt17(c.train.backtrack) << "\n";
    out << "train.max_halvings = " << c.train.max_halvings << "\n";
    out << "samples_total = " << bundle.samples_total << "\n";
    out << "samples_train = " << bundle.samples_train << "\n";
    out << "samples_val = " << bundle.samples_val << "\n";
    out << "corpus_hashes = ";
    for (std::size_t i = 0; i < bundle.corpus_hashes.size(); ++i) {
        char hex[32];
        std::snprintf(hex, sizeof hex, "%016llx",
                      static_cast<unsigned long long>(bundle.corpus_hashes[i]));
        out << (i ? "," : "") << hex;
    }
    out << "\n";
    if (!out) throw Error("write failed: " + path);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : s) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) parts.push_back(cur);
    return parts;
}

void read_manifest(ModelBundle& bundle, const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::string header;
    if (!std::getline(in, header) || header != "SRMANIFEST 1")
        throw FormatError(path + ": bad manifest header");
    PipelineConfig& c = bundle.cfg;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::size_t sep = line.find(" = ");
        if (sep == std::string::npos) throw FormatError(path + ": bad manifest line: " + line);
        const std::string key = line.substr(0, sep);
        const std::string value = line.substr(sep + 3);
        try {
            if (key == "scale") c.scale = std::stoi(value);
            else if (key == "window") c.window = std::stoi(value);
            else if (key == "eigvecs") c.eigvecs = std::stoi(value);
            else if (key == "n_frames") c.n_frames = std::stoi(value);
            else if (key == "noise_levels") {
                c.noise_levels.clear();
                for (const std::string& p : split_list(value))
                    c.noise_levels.push_back(std::stod(p));
            } else if (key == "use_truth_shifts") c.use_truth_shifts = std::stoi(value) != 0;
            else if (key == "rms_border") c.rms_border = std::stoi(value);
            else if (key == "sample_budget") c.sample_budget = std::stol(value);
            else if (key == "val_fraction") c.val_fraction = std::stod(value);
            else if (key == "seed") c.seed = std::stoull(value);
            else if (key == "fit.support_radius") c.fit.support_radius = std::stod(value);
            else if (key == "fit.svd_rel_threshold") c.fit.svd_rel_threshold = std::stod(value);
            else if (key == "fit.min_support") c.fit.min_support = std::stoi(value);
            else if (key == "reg.pyramid_levels") c.reg.pyramid_levels = std::stoi(value);
            else if (key == "reg.max_iters_per_level")
                c.reg.max_iters_per_level = std::stoi(value);
            else if (key == "reg.convergence_eps") c.reg.convergence_eps = std::stod(value);
            else if (key == "reg.search_limit") c.reg.search_limit = std::stod(value);
            else if (key == "train.max_iters") c.train.max_iters = std::stoi(value);
            else if (key == "train.grad_tol") c.train.grad_tol = std::stod(value);
            else if (key == "train.seed") c.train.seed = std::stoull(value);
            else if (key == "train.restart_interval") c.train.restart_interval = std::stoi(value);
            else if (key == "train.armijo_c") c.train.armijo_c = std::stod(value);
            else if (key == "train.backtrack") c.train.backtrack = std::stod(value);
            else if (key == "train.max_halvings") c.train.max_halvings = std::stoi(value);
            else if (key == "samples_total") bundle.samples_total = std::stol(value);
            else if (key == "samples_train") bundle.samples_train = std::stol(value);
            else if (key == "samples_val") bundle.samples_val = std::stol(value);
            else if (key == "corpus_hashes") {
                bundle.corpus_hashes.clear();
                for (const std::string& p : split_list(value))
                    bundle.corpus_hashes.push_back(std::stoull(p, nullptr, 16));
            }
            // Unknown keys are ignored so newer manifests still load.
        } catch (const std::invalid_argument&) {
            throw FormatError(path + ": bad value for " + key);
        } catch (const std::out_of_range&) {
            throw FormatError(path + ": value out of range for " + key);
        }
    }
}

} // namespace

void save_bundle(const ModelBundle& bundle, const std::string& dir) {
    check_bundle(bundle);
    std::filesystem::create_directories(dir);
    save_basis(bundle.basis, dir + "/basis.srpca");
    save_mlp(bundle.mlp, dir + "/model.srmlp");
    write_manifest(bundle, dir + "/manifest.txt");
}

ModelBundle load_bundle(const std::string& dir) {
    ModelBundle bundle;
    bundle.basis = load_basis(dir + "/basis.srpca");
    bundle.mlp = load_mlp(dir + "/model.srmlp");
    read_manifest(bundle, dir + "/manifest.txt");
    check_bundle(bundle);
    return bundle;
}

void save_shifts_csv(const std::vector<Transform>& shifts, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << "frame,tx,ty\n";
    for (std::size_t i = 0; i < shifts.size(); ++i)
        out << i << "," << fmt17(shifts[i].tx) << "," << fmt17(shifts[i].ty) << "\n";
    if (!out) throw Error("write failed: " + path);
}

std::vector<Transform> load_shifts_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != "frame,tx,ty")
        throw FormatError(path + ": expected header frame,tx,ty");
    std::vector<Transform> shifts;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const std::vector<std::string> parts = split_list(line);
        if (parts.size() != 3) throw FormatError(path + ": malformed row: " + line);
        try {
            if (std::stoul(parts[0]) != row)
                throw FormatError(path + ": frame indices must be consecutive from 0");
            shifts.push_back({std::stod(parts[1]), std::stod(parts[2])});
        } catch (const std::invalid_argument&) {
            throw FormatError(path + ": malformed row: " + line);
        } catch (const std::out_of_range&) {
            throw FormatError(path + ": value out of range: " + line);
        }
        ++row;
    }
    if (shifts.empty()) throw FormatError(path + ": no shift rows");
    return shifts;
}

} // namespace srlocal
