#include "srlocal/errors.hpp"
#include "srlocal/pipeline.hpp"
#include "srlocal/rng.hpp"

#include "CLI11.hpp"

#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace srlocal;

namespace {

std::vector<GrayImage> load_frames(const std::string& dir) {
    std::vector<std::string> paths;
    for (const fs::directory_entry& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".pgm" &&
            e.path().filename().string().rfind("frame_", 0) == 0)
            paths.push_back(e.path().string());
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw Error("no frame_*.pgm files in " + dir);
    std::vector<GrayImage> frames;
    frames.reserve(paths.size());
    for (const std::string& p : paths) frames.push_back(load_pgm(p));
    return frames;
}

std::string frame_name(int k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frame_%03d.pgm", k);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out << text;
    if (!out) throw Error("write failed: " + path);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"srlocal: multi-frame superresolution from local polynomial "
                 "representations with a neural readout"};
    app.set_config("--config");
    app.require_subcommand(1);

    int threads = 0;
    bool verbose = false;
    app.add_option("--threads", threads, "OpenMP thread count (0 keeps the default)");
    app.add_flag("-v,--verbose", verbose, "chattier progress output");
    // Runs after parsing but before any subcommand callback.
    app.parse_complete_callback([&] {
        if (threads > 0) omp_set_num_threads(threads);
    });

    // synth -------------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic LR sequence");
    std::string sy_image, sy_out;
    int sy_width = 256, sy_height = 256, sy_frames = 25, sy_scale = 2;
    double sy_sigma = 0.0;
    std::uint64_t sy_seed = 0, sy_scene_seed = 1;
    synth->add_option("--image", sy_image, "HR source image (PGM); omit to use a procedural scene");
    synth->add_option("--width", sy_width, "procedural scene width");
    synth->add_option("--height", sy_height, "procedural scene height");
    synth->add_option("--scene-seed", sy_scene_seed, "procedural scene seed");
    synth->add_option("--out", sy_out, "output directory")->required();
    synth->add_option("--frames", sy_frames, "number of LR frames");
    synth->add_option("--scale", sy_scale, "decimation factor");
    synth->add_option("--sigma", sy_sigma, "noise std in gray levels");
    synth->add_option("--seed", sy_seed, "sequence seed (shifts and noise)");
    synth->callback([&] {
        const GrayImage hr =
            sy_image.empty() ? make_scene(sy_width, sy_height, sy_scene_seed) : load_pgm(sy_image);
        SequenceSpec sp;
        sp.n_frames = sy_frames;
        sp.scale = sy_scale;
        sp.sigma = sy_sigma;
        sp.seed = sy_seed;
        const SyntheticSequence seq = generate_sequence(hr, sp);
        fs::create_directories(sy_out);
        save_pgm(hr, sy_out + "/ground_truth.pgm");
        for (int k = 0; k < sy_frames; ++k)
            save_pgm(seq.frames[k], sy_out + "/" + frame_name(k));
        save_shifts_csv(seq.true_shifts, sy_out + "/shifts.csv");
        std::cout << "wrote " << sy_frames << " frames (" << seq.frames[0].width << "x"
                  << seq.frames[0].height << ", sigma " << sy_sigma << ") to " << sy_out
                  << "\n";
    });

    // register ----------------------------------------------------------
    auto* reg = app.add_subcommand("register", "estimate frame shifts against frame 0");
    std::string rg_frames, rg_out;
    RegistrationConfig rg_cfg;
    reg->add_option("--frames", rg_frames, "directory with frame_*.pgm")->required();
    reg->add_option("--out", rg_out, "output shifts CSV")->required();
    reg->add_option("--levels", rg_cfg.pyramid_levels, "pyramid levels");
    reg->add_option("--iters", rg_cfg.max_iters_per_level, "Gauss-Newton iterations per level");
    reg->add_option("--eps", rg_cfg.convergence_eps, "convergence threshold");
    reg->add_option("--limit", rg_cfg.search_limit, "divergence limit in LR pixels");
    reg->callback([&] {
        const std::vector<GrayImage> frames = load_frames(rg_frames);
        const std::vector<Transform> shifts = register_sequence(frames, rg_cfg);
        save_shifts_csv(shifts, rg_out);
        if (verbose)
            for (std::size_t k = 0; k < shifts.size(); ++k)
                std::printf("frame %zu: tx=%.4f ty=%.4f\n", k, shifts[k].tx, shifts[k].ty);
        std::cout << "registered " << frames.size() << " frames -> " << rg_out << "\n";
    });

    // interp --------------------------------------------------------------
    auto* interp = app.add_subcommand("interp", "reconstruct with a baseline interpolator");
    std::string ip_frames, ip_shifts, ip_out;
    InterpMethod ip_method = InterpMethod::kPoly2;
    int ip_scale = 2;
    FitConfig ip_fit;
    const std::map<std::string, InterpMethod> method_names{
        {"seqnn", InterpMethod::kSeqNN}, {"idw", InterpMethod::kIdw},
        {"poly1", InterpMethod::kPoly1}, {"poly2", InterpMethod::kPoly2},
        {"poly3", InterpMethod::kPoly3}};
    interp->add_option("--frames", ip_frames, "directory with frame_*.pgm")->required();
    interp->add_option("--shifts", ip_shifts, "shifts CSV; omit to register first");
    interp->add_option("--method", ip_method, "interpolator")
        ->transform(CLI::CheckedTransformer(method_names, CLI::ignore_case));
    interp->add_option("--scale", ip_scale, "upsampling factor");
    interp->add_option("--radius", ip_fit.support_radius, "support radius in HR pixels");
    interp->add_option("--out", ip_out, "output PGM")->required();
    interp->callback([&] {
        const std::vector<GrayImage> frames = load_frames(ip_frames);
        const std::vector<Transform> shifts = ip_shifts.empty()
                                                  ? register_sequence(frames, RegistrationConfig{})
                                                  : load_shifts_csv(ip_shifts);
        const ProjectedCloud cloud = project_sequence(frames, shifts, ip_scale);
        const GrayImage out = reconstruct_interp(cloud, ip_method, ip_fit);
        save_pgm(out, ip_out);
        std::cout << interp_method_name(ip_method) << " reconstruction " << out.width << "x"
                  << out.height << " -> " << ip_out << "\n";
    });

    // train ---------------------------------------------------------------
    auto* train = app.add_subcommand("train", "build a training set and train the model");
    std::vector<std::string> tr_images;
    int tr_procedural = 0, tr_width = 256, tr_height = 256;
    std::string tr_out, tr_dump, tr_eigviz;
    int tr_eigviz_count = 8;
    PipelineConfig tr_cfg;
    train->add_option("--images", tr_images, "HR training images (PGM)");
    train->add_option("--procedural", tr_procedural, "generate this many procedural scenes instead");
    train->add_option("--width", tr_width, "procedural scene width");
    train->add_option("--height", tr_height, "procedural scene height");
    train->add_option("--out", tr_out, "output bundle directory")->required();
    train->add_option("--dump-samples", tr_dump, "also write raw train/val sample sets here");
    train->add_option("--eigviz", tr_eigviz, "write leading eigenvector images to this PGM");
    train->add_option("--eigviz-count", tr_eigviz_count, "eigenvectors in the visualization");
    train->add_option("--scale", tr_cfg.scale, "decimation/upsampling factor");
    train->add_option("--window", tr_cfg.window, "neighborhood width (odd)");
    train->add_option("--eigvecs", tr_cfg.eigvecs, "retained PCA dimension");
    train->add_option("--frames", tr_cfg.n_frames, "frames per synthetic sequence");
    train->add_option("--sigmas", tr_cfg.noise_levels, "noise levels")->delimiter(',');
    train->add_option("--budget", tr_cfg.sample_budget, "total sample budget");
    train->add_option("--val-fraction", tr_cfg.val_fraction, "validation split fraction");
    train->add_option("--seed", tr_cfg.seed, "corpus/sequence seed");
    train->add_option("--radius", tr_cfg.fit.support_radius, "support radius in HR pixels");
    train->add_flag("--truth-shifts", tr_cfg.use_truth_shifts,
                    "use generator shifts instead of registering");
    train->add_option("--train-iters", tr_cfg.train.max_iters, "CG iteration cap");
    train->add_option("--train-seed", tr_cfg.train.seed, "weight initialization seed");
    train->callback([&] {
        const auto t0 = std::chrono::steady_clock::now();
        std::vector<GrayImage> corpus;
        for (const std::string& p : tr_images) corpus.push_back(load_pgm(p));
        for (int i = 0; i < tr_procedural; ++i)
            corpus.push_back(make_scene(tr_width, tr_height, derive_seed(tr_cfg.seed, 1000 + i)));
        if (corpus.empty())
            throw Error("train: provide --images and/or --procedural");

        TrainingSetResult set = build_training_set(corpus, tr_cfg);
        std::cout << "samples: " << set.train.samples.size() << " train, "
                  << set.val.samples.size() << " val";
        if (set.skipped_fallback) std::cout << " (" << set.skipped_fallback << " skipped)";
        std::cout << "  [" << seconds_since(t0) << " s]\n";
        std::cout << "pca: dim " << set.basis.dim << ", explained variance at k="
                  << tr_cfg.eigvecs << ": " << explained_variance(set.basis, tr_cfg.eigvecs)
                  << "\n";

        const std::vector<TrainingSample> train_samples =
            make_training_samples(set.train, set.basis, tr_cfg.eigvecs);
        const MlpParams init = init_weights(tr_cfg.eigvecs, tr_cfg.train.seed);
        const TrainResult res = train_cg(init, train_samples, tr_cfg.train);
        std::cout << "cg: " << res.history.size() - 1 << " steps, mse "
                  << res.history.front() << " -> " << res.history.back();
        if (res.line_search_failed) std::cout << " (line search stalled)";
        std::cout << "\n";
        if (!set.val.samples.empty()) {
            const std::vector<TrainingSample> val_samples =
                make_training_samples(set.val, set.basis, tr_cfg.eigvecs);
            std::cout << "validation rms: " << validation_rms(res.params, val_samples)
                      << " gray levels\n";
        }

        ModelBundle bundle;
        bundle.basis = std::move(set.basis);
        bundle.mlp = res.params;
        bundle.cfg = tr_cfg;
        bundle.corpus_hashes = set.corpus_hashes;
        bundle.samples_train = static_cast<long>(set.train.samples.size());
        bundle.samples_val = static_cast<long>(set.val.samples.size());
        bundle.samples_total = bundle.samples_train + bundle.samples_val;
        save_bundle(bundle, tr_out);
        if (!tr_dump.empty()) {
            fs::create_directories(tr_dump);
            save_samples(set.train, tr_dump + "/train.srsamp");
            save_samples(set.val, tr_dump + "/val.srsamp");
        }
        if (!tr_eigviz.empty())
            export_eigenimages(bundle.basis, tr_eigviz_count, tr_cfg.window, tr_eigviz);
        std::cout << "bundle -> " << tr_out << "  [" << seconds_since(t0) << " s total]\n";
    });

    // superres ------------------------------------------------------------
    auto* super = app.add_subcommand("superres", "reconstruct an HR image with the model");
    std::string sr_frames, sr_shifts, sr_bundle, sr_out;
    super->add_option("--frames", sr_frames, "directory with frame_*.pgm")->required();
    super->add_option("--shifts", sr_shifts, "shifts CSV; omit to register first");
    super->add_option("--bundle", sr_bundle, "trained bundle directory")->required();
    super->add_option("--out", sr_out, "output PGM")->required();
    super->callback([&] {
        const std::vector<GrayImage> frames = load_frames(sr_frames);
        const ModelBundle bundle = load_bundle(sr_bundle);
        ReconstructionStats stats;
        const GrayImage out =
            sr_shifts.empty() ? superresolve(frames, bundle, &stats)
                              : superresolve(frames, load_shifts_csv(sr_shifts), bundle, &stats);
        save_pgm(out, sr_out);
        std::cout << "superresolved " << out.width << "x" << out.height << " -> " << sr_out;
        if (stats.fallback_sites) std::cout << " (" << stats.fallback_sites << " fallback sites)";
        std::cout << "\n";
    });

    // bench-interp ----------------------------------------------------------
    auto* bi = app.add_subcommand("bench-interp", "compare baseline interpolators");
    std::string bi_image, bi_out;
    PipelineConfig bi_cfg;
    bi->add_option("--image", bi_image, "HR reference image (PGM)")->required();
    bi->add_option("--out", bi_out, "report CSV path");
    bi->add_option("--scale", bi_cfg.scale, "decimation/upsampling factor");
    bi->add_option("--frames", bi_cfg.n_frames, "frames per sequence");
    bi->add_option("--sigmas", bi_cfg.noise_levels, "noise levels")->delimiter(',');
    bi->add_option("--radius", bi_cfg.fit.support_radius, "support radius in HR pixels");
    bi->add_option("--border", bi_cfg.rms_border, "RMS border in HR pixels");
    bi->add_option("--seed", bi_cfg.seed, "sequence seed");
    bi->add_flag("--truth-shifts", bi_cfg.use_truth_shifts,
                 "use generator shifts instead of registering");
    bi->callback([&] {
        const GrayImage hr = load_pgm(bi_image);
        const BenchmarkReport rep = benchmark_interpolators(hr, bi_cfg);
        const std::string csv = rep.to_csv();
        std::cout << csv;
        if (!bi_out.empty()) write_text(bi_out, csv);
    });

    // bench-methods ---------------------------------------------------------
    auto* bm = app.add_subcommand("bench-methods", "compare ZOOM, SEQ-NN and the model");
    std::string bm_image, bm_bundle, bm_out, bm_images;
    bm->add_option("--image", bm_image, "held-out HR reference image (PGM)")->required();
    bm->add_option("--bundle", bm_bundle, "trained bundle directory")->required();
    bm->add_option("--out", bm_out, "report CSV path");
    bm->add_option("--save-images", bm_images, "write reconstructions to this directory");
    bm->callback([&] {
        const GrayImage hr = load_pgm(bm_image);
        const ModelBundle bundle = load_bundle(bm_bundle);
        const BenchmarkReport rep = benchmark_methods(hr, bundle, bm_images);
        const std::string csv = rep.to_csv();
        std::cout << csv;
        if (!bm_out.empty()) write_text(bm_out, csv);
    });

    // sweep -------------------------------------------------------------------
    auto* sweep = app.add_subcommand("sweep", "validation RMS as a function of PCA dimension");
    std::string sw_samples, sw_basis, sw_out;
    std::vector<int> sw_ks{5, 10, 20, 40, 54};
    PipelineConfig sw_cfg;
    sweep->add_option("--samples", sw_samples, "directory with train.srsamp and val.srsamp")
        ->required();
    sweep->add_option("--basis", sw_basis, "PCA basis file")->required();
    sweep->add_option("--ks", sw_ks, "PCA dimensions to evaluate")->delimiter(',');
    sweep->add_option("--train-iters", sw_cfg.train.max_iters, "CG iteration cap");
    sweep->add_option("--train-seed", sw_cfg.train.seed, "weight initialization seed");
    sweep->add_option("--out", sw_out, "sweep CSV path");
    sweep->callback([&] {
        const SampleSet train_set = load_samples(sw_samples + "/train.srsamp");
        const SampleSet val_set = load_samples(sw_samples + "/val.srsamp");
        const EigenBasis basis = load_basis(sw_basis);
        const std::vector<SweepPoint> curve =
            dimension_sweep(train_set, val_set, basis, sw_cfg, sw_ks);
        const std::string csv = sweep_to_csv(curve);
        std::cout << csv;
        if (!sw_out.empty()) write_text(sw_out, csv);
    });

    // eigviz ---------------------------------------------------------------
    auto* ev = app.add_subcommand("eigviz", "render leading eigenvectors as an image sheet");
    std::string ev_basis, ev_out;
    int ev_count = 8, ev_window = 3;
    ev->add_option("--basis", ev_basis, "PCA basis file")->required();
    ev->add_option("--count", ev_count, "eigenvectors to render");
    ev->add_option("--window", ev_window, "neighborhood width the basis was built with");
    ev->add_option("--out", ev_out, "output PGM")->required();
    ev->callback([&] {
        export_eigenimages(load_basis(ev_basis), ev_count, ev_window, ev_out);
        std::cout << "eigenvector sheet -> " << ev_out << "\n";
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
