#pragma once

#include "srlocal/localmodel.hpp"
#include "srlocal/neural.hpp"
#include "srlocal/pca.hpp"
#include "srlocal/projection.hpp"
#include "srlocal/registration.hpp"
#include "srlocal/synth.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace srlocal {

struct PipelineConfig {
    int scale = 2;
    int window = 3;  // neighborhood width w, odd, in {3,5}
    int eigvecs = 40; // retained PCA dimension k <= 6*w*w
    int n_frames = 25;
    FitConfig fit;
    RegistrationConfig reg;
    TrainConfig train;
    std::vector<double> noise_levels{0.0, 5.0, 10.0, 20.0};
    bool use_truth_shifts = false; // ablation mode; deployment registers frames
    int rms_border = -1;           // -1 -> 2*scale
    long sample_budget = 200000;
    double val_fraction = 0.1;
    std::uint64_t seed = 0;
};

int effective_rms_border(const PipelineConfig& cfg);
void validate_config(const PipelineConfig& cfg);

// Trained model plus everything needed to reproduce and audit it.
struct ModelBundle {
    EigenBasis basis;
    MlpParams mlp;
    PipelineConfig cfg;
    std::vector<std::uint64_t> corpus_hashes; // leakage guard for benchmarks
    long samples_total = 0;
    long samples_train = 0;
    long samples_val = 0;
};

// Order-2 polynomial model at every HR site. Sites whose support is empty even
// at twice the fit radius are flagged fallback and carry a nearest-neighbor
// constant model found by doubling the search radius.
struct ModelGrid {
    int width = 0;
    int height = 0;
    std::vector<PolyModel> models;
    std::vector<std::uint8_t> fallback;

    const PolyModel& at(int gy, int gx) const {
        return models[static_cast<std::size_t>(gy) * width + gx];
    }
    bool is_fallback(int gy, int gx) const {
        return fallback[static_cast<std::size_t>(gy) * width + gx] != 0;
    }
};

ModelGrid fit_grid_models(const ProjectedCloud& cloud, const FitConfig& cfg);
ModelGrid fit_grid_models_serial(const ProjectedCloud& cloud, const FitConfig& cfg);

struct PatchResult {
    CoeffPatch patch;                   // 6*w*w coefficients, sites row-major
    std::vector<double> support_values; // projected pixel values at the central site
    bool fallback = false;              // central support empty within 2x radius
};

// Fits the w*w neighborhood models directly from the cloud (edge sites clamp
// their neighbors to the grid). The ModelGrid overload gathers pre-fitted
// models instead and produces identical patches.
PatchResult build_patch(const ProjectedCloud& cloud, int gx, int gy, int w,
                        const FitConfig& cfg);
PatchResult build_patch(const ProjectedCloud& cloud, const ModelGrid& grid, int gx, int gy,
                        int w, const FitConfig& cfg);

struct ReconstructionStats {
    long fallback_sites = 0;
};

// Baseline reconstruction methods over a projected cloud.
enum class InterpMethod { kSeqNN, kIdw, kPoly1, kPoly2, kPoly3 };
const char* interp_method_name(InterpMethod m);

GrayImage reconstruct_interp(const ProjectedCloud& cloud, InterpMethod method,
                             const FitConfig& cfg);
GrayImage reconstruct_interp_serial(const ProjectedCloud& cloud, InterpMethod method,
                                    const FitConfig& cfg);

// Neural reconstruction: per site, neighborhood coefficient patch ->
// normalization -> PCA projection -> MLP -> denormalization.
GrayImage reconstruct_mlp(const ProjectedCloud& cloud, const ModelBundle& bundle,
                          ReconstructionStats* stats = nullptr);
GrayImage reconstruct_mlp_serial(const ProjectedCloud& cloud, const ModelBundle& bundle,
                                 ReconstructionStats* stats = nullptr);

// End-to-end: registration (unless explicit shifts are given) -> projection ->
// neural reconstruction. Output dimensions are LR dims * scale.
GrayImage superresolve(const std::vector<GrayImage>& frames, const ModelBundle& bundle,
                       ReconstructionStats* stats = nullptr);
GrayImage superresolve(const std::vector<GrayImage>& frames,
                       const std::vector<Transform>& shifts, const ModelBundle& bundle,
                       ReconstructionStats* stats = nullptr);

// Single-frame bilinear upsampling of frame 0 through the projection
// coordinate convention (the ZOOM comparison baseline).
GrayImage baseline_zoom(const std::vector<GrayImage>& frames, int scale);

// Synthetic training corpus -> raw samples (train/val split) + PCA basis.
struct TrainingSetResult {
    SampleSet train;
    SampleSet val;
    EigenBasis basis;
    std::vector<std::uint64_t> corpus_hashes;
    std::vector<long> pass_grid_sites;  // stride-grid sites per (image, sigma) pass
    std::vector<long> pass_collected;   // samples actually collected per pass
    long skipped_fallback = 0;
};
TrainingSetResult build_training_set(const std::vector<GrayImage>& corpus,
                                     const PipelineConfig& cfg);

// Tabular RMS report: one row per method, one column per noise level.
struct BenchmarkReport {
    std::vector<std::string> row_labels;
    std::vector<double> sigmas;
    std::vector<std::vector<double>> rms; // [row][sigma]
    std::vector<std::string> footer;

    double value(const std::string& row, double sigma) const;
    std::string to_csv() const;
};

// Table-1 style comparison: SEQ-NN, IDW and polynomial orders 1..3 at every
// configured noise level.
BenchmarkReport benchmark_interpolators(const GrayImage& hr, const PipelineConfig& cfg);

// Table-2 style comparison on a held-out image: ZOOM, SEQ-NN and the neural
// method at sigma 0 and 20. Refuses images whose hash appears in the bundle's
// training manifest. When out_dir is non-empty the reconstructions are written
// there as PGMs.
BenchmarkReport benchmark_methods(const GrayImage& hr, const ModelBundle& bundle,
                                  const std::string& out_dir = "");

struct SweepPoint {
    int k = 0;
    double val_rms = 0.0; // denormalized, gray levels
};
// Trains one MLP per k (same seed) on inputs truncated to the first k PCA
// coordinates and reports denormalized validation RMS.
std::vector<SweepPoint> dimension_sweep(const SampleSet& train, const SampleSet& val,
                                        const EigenBasis& basis, const PipelineConfig& cfg,
                                        const std::vector<int>& k_values);
std::string sweep_to_csv(const std::vector<SweepPoint>& curve);

// RMS prediction error in gray levels (errors scaled back by each sample's s).
double validation_rms(const MlpParams& params, const std::vector<TrainingSample>& samples);

// FNV-1a over dimensions and quantized pixel bytes; the identity used by the
// training manifest and the benchmark leakage guard.
std::uint64_t image_hash(const GrayImage& img);

// Bundle directory I/O: basis.srpca + model.srmlp + manifest.txt.
void save_bundle(const ModelBundle& bundle, const std::string& dir);
ModelBundle load_bundle(const std::string& dir);

// Shift CSV (frame,tx,ty), shared by synth ground truth and registration output.
void save_shifts_csv(const std::vector<Transform>& shifts, const std::string& path);
std::vector<Transform> load_shifts_csv(const std::string& path);

} // namespace srlocal
