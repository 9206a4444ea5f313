#include "srlocal/neural.hpp"

#include "srlocal/errors.hpp"
#include "srlocal/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace srlocal {

namespace {

constexpr int kHidden = 10;
constexpr std::size_t kBlock = 1024; // reduction block size, fixed for determinism

std::vector<double> params_to_vec(const MlpParams& p) {
    std::vector<double> v;
    v.reserve(p.param_count());
    v.insert(v.end(), p.W1.begin(), p.W1.end());
    v.insert(v.end(), p.b1.begin(), p.b1.end());
    v.insert(v.end(), p.w2.begin(), p.w2.end());
    v.push_back(p.b2);
    return v;
}

MlpParams vec_to_params(const std::vector<double>& v, int k_in) {
    MlpParams p;
    p.k_in = k_in;
    p.W1.assign(v.begin(), v.begin() + kHidden * k_in);
    p.b1.assign(v.begin() + kHidden * k_in, v.begin() + kHidden * k_in + kHidden);
    p.w2.assign(v.begin() + kHidden * k_in + kHidden, v.begin() + kHidden * k_in + 2 * kHidden);
    p.b2 = v.back();
    return p;
}

// Accumulates sum of squared errors and (optionally) the unnormalized gradient
// over samples [begin, end) into acc: [grad (param_count), sq_err].
void accumulate_block(const MlpParams& p, const std::vector<TrainingSample>& samples,
                      std::size_t begin, std::size_t end, bool with_grad, double* acc) {
    const int k = p.k_in;
    const int n_params = p.param_count();
    double h[kHidden];
    for (std::size_t idx = begin; idx < end; ++idx) {
        const TrainingSample& smp = samples[idx];
        const double* x = smp.input.data();
        double y = p.b2;
        for (int j = 0; j < kHidden; ++j) {
            double z = p.b1[j];
            const double* wrow = &p.W1[static_cast<std::size_t>(j) * k];
            for (int i = 0; i < k; ++i) z += wrow[i] * x[i];
            h[j] = std::tanh(z);
            y += p.w2[j] * h[j];
        }
        double e = y - smp.target;
        acc[n_params] += e * e;
        if (!with_grad) continue;

        double g = 2.0 * e;
        acc[n_params - 1] += g; // b2
        for (int j = 0; j < kHidden; ++j) {
            acc[kHidden * k + kHidden + j] += g * h[j]; // w2
            double dz = g * p.w2[j] * (1.0 - h[j] * h[j]);
            acc[kHidden * k + j] += dz; // b1
            double* gw = &acc[static_cast<std::size_t>(j) * k];
            for (int i = 0; i < k; ++i) gw[i] += dz * x[i];
        }
    }
}

// Blocked reduction shared by the serial and OpenMP paths: per-block partials
// are always merged in block index order.
LossGrad reduce_blocks(const MlpParams& p, const std::vector<TrainingSample>& samples,
                       bool with_grad, bool parallel) {
    if (samples.empty()) throw Error("loss_and_grad: empty sample set");
    const int n_params = p.param_count();
    const std::size_t n = samples.size();
    const std::size_t n_blocks = (n + kBlock - 1) / kBlock;

    std::vector<double> partials(n_blocks * (n_params + 1), 0.0);
    if (parallel) {
#pragma omp parallel for schedule(static)
        for (long b = 0; b < static_cast<long>(n_blocks); ++b) {
            std::size_t begin = static_cast<std::size_t>(b) * kBlock;
            accumulate_block(p, samples, begin, std::min(begin + kBlock, n), with_grad,
                             &partials[static_cast<std::size_t>(b) * (n_params + 1)]);
        }
    } else {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            std::size_t begin = b * kBlock;
            accumulate_block(p, samples, begin, std::min(begin + kBlock, n), with_grad,
                             &partials[b * (n_params + 1)]);
        }
    }

    LossGrad out;
    out.grad.assign(with_grad ? n_params : 0, 0.0);
    double sq = 0.0;
    for (std::size_t b = 0; b < n_blocks; ++b) {
        const double* part = &partials[b * (n_params + 1)];
        for (int i = 0; i < (with_grad ? n_params : 0); ++i) out.grad[i] += part[i];
        sq += part[n_params];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    out.mse = sq * inv_n;
    for (double& g : out.grad) g *= inv_n;
    return out;
}

} // namespace

NormalizedPatch normalize(const CoeffPatch& patch, const std::vector<double>& support_values,
                          std::optional<double> target) {
    if (support_values.empty()) throw Error("normalize: empty support values");
    if (patch.empty() || patch.size() % 6 != 0)
        throw Error("normalize: patch length must be a positive multiple of 6");

    const std::size_t n_sites = patch.size() / 6;
    double mu = 0.0;
    for (std::size_t site = 0; site < n_sites; ++site) mu += patch[site * 6];
    mu /= static_cast<double>(n_sites);

    double vmean = 0.0;
    for (double v : support_values) vmean += v;
    vmean /= static_cast<double>(support_values.size());
    double var = 0.0;
    for (double v : support_values) var += (v - vmean) * (v - vmean);
    var /= static_cast<double>(support_values.size());
    double s = std::max(std::sqrt(var), 1.0);

    NormalizedPatch out;
    out.ctx = NormContext{mu, s};
    out.patch = patch;
    for (std::size_t site = 0; site < n_sites; ++site) out.patch[site * 6] -= mu;
    for (double& c : out.patch) c /= s;
    if (target) out.target = (*target - mu) / s;
    return out;
}

double denormalize(double yhat, const NormContext& ctx) { return yhat * ctx.s + ctx.mu; }

double mlp_forward(const MlpParams& params, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != params.k_in)
        throw Error("mlp_forward: input length " + std::to_string(x.size()) + " != k_in " +
                    std::to_string(params.k_in));
    double y = params.b2;
    for (int j = 0; j < kHidden; ++j) {
        double z = params.b1[j];
        const double* wrow = &params.W1[static_cast<std::size_t>(j) * params.k_in];
        for (int i = 0; i < params.k_in; ++i) z += wrow[i] * x[i];
        y += params.w2[j] * std::tanh(z);
    }
    return y;
}

LossGrad loss_and_grad(const MlpParams& params, const std::vector<TrainingSample>& samples) {
    return reduce_blocks(params, samples, true, true);
}

LossGrad loss_and_grad_serial(const MlpParams& params,
                              const std::vector<TrainingSample>& samples) {
    return reduce_blocks(params, samples, true, false);
}

double mlp_loss(const MlpParams& params, const std::vector<TrainingSample>& samples) {
    return reduce_blocks(params, samples, false, true).mse;
}

TrainResult train_cg(const MlpParams& init, const std::vector<TrainingSample>& samples,
                     const TrainConfig& cfg) {
    if (samples.empty()) throw Error("train_cg: empty sample set");
    const int k_in = init.k_in;
    const int n_params = init.param_count();
    const int restart_every = cfg.restart_interval > 0 ? cfg.restart_interval : n_params;

    std::vector<double> x = params_to_vec(init);
    MlpParams cur = init;
    LossGrad lg = loss_and_grad(cur, samples);

    TrainResult result;
    result.history.push_back(lg.mse);

    std::vector<double> dir(n_params);
    for (int i = 0; i < n_params; ++i) dir[i] = -lg.grad[i];
    double alpha_prev = 0.5; // first trial step = 1.0

    auto inf_norm = [](const std::vector<double>& v) {
        double m = 0.0;
        for (double e : v) m = std::max(m, std::abs(e));
        return m;
    };

    for (int iter = 0; iter < cfg.max_iters; ++iter) {
        if (inf_norm(lg.grad) < cfg.grad_tol) break;

        double gd = 0.0;
        for (int i = 0; i < n_params; ++i) gd += lg.grad[i] * dir[i];
        bool steepest = false;
        if (gd >= 0.0) { // not a descent direction: fall back to steepest descent
            for (int i = 0; i < n_params; ++i) dir[i] = -lg.grad[i];
            gd = 0.0;
            for (int i = 0; i < n_params; ++i) gd += lg.grad[i] * dir[i];
            steepest = true;
        }

        // Armijo backtracking from a warm-started trial step.
        std::vector<double> trial(n_params);
        auto line_search = [&](double& alpha_out) {
            double alpha = 2.0 * alpha_prev;
            for (int h = 0; h <= cfg.max_halvings; ++h) {
                for (int i = 0; i < n_params; ++i) trial[i] = x[i] + alpha * dir[i];
                double f = mlp_loss(vec_to_params(trial, k_in), samples);
                if (f <= lg.mse + cfg.armijo_c * alpha * gd) {
                    alpha_out = alpha;
                    return f;
                }
                alpha *= cfg.backtrack;
            }
            return -1.0;
        };

        double alpha = 0.0;
        double f_new = line_search(alpha);
        if (f_new < 0.0 && !steepest) {
            // Retry once along steepest descent before giving up.
            for (int i = 0; i < n_params; ++i) dir[i] = -lg.grad[i];
            gd = 0.0;
            for (int i = 0; i < n_params; ++i) gd += lg.grad[i] * dir[i];
            steepest = true;
            f_new = line_search(alpha);
        }
        if (f_new < 0.0) {
            result.line_search_failed = true;
            break;
        }

        x = trial;
        alpha_prev = alpha;
        cur = vec_to_params(x, k_in);
        LossGrad lg_new = loss_and_grad(cur, samples);
        result.history.push_back(lg_new.mse);

        // Polak-Ribiere update with periodic and negative-beta restarts.
        double num = 0.0, den = 0.0;
        for (int i = 0; i < n_params; ++i) {
            num += lg_new.grad[i] * (lg_new.grad[i] - lg.grad[i]);
            den += lg.grad[i] * lg.grad[i];
        }
        double beta = (den > 0.0) ? num / den : 0.0;
        if (beta < 0.0 || (iter + 1) % restart_every == 0) beta = 0.0;
        for (int i = 0; i < n_params; ++i) dir[i] = -lg_new.grad[i] + beta * dir[i];
        lg = lg_new;
    }

    result.params = cur;
    return result;
}

MlpParams init_weights(int k_in, std::uint64_t seed) {
    if (k_in < 1) throw Error("init_weights: k_in must be >= 1");
    MlpParams p;
    p.k_in = k_in;
    p.W1.resize(static_cast<std::size_t>(kHidden) * k_in);
    p.b1.assign(kHidden, 0.0);
    p.w2.resize(kHidden);
    p.b2 = 0.0;
    Rng rng(seed);
    const double a1 = 1.0 / std::sqrt(static_cast<double>(k_in));
    for (double& w : p.W1) w = rng.uniform(-a1, a1);
    const double a2 = 1.0 / std::sqrt(static_cast<double>(kHidden));
    for (double& w : p.w2) w = rng.uniform(-a2, a2);
    return p;
}

void save_mlp(const MlpParams& params, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path);
    char buf[32];
    out << "SRMLP 1\n" << params.k_in << "\n";
    for (int j = 0; j < kHidden; ++j) {
        for (int i = 0; i < params.k_in; ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g",
                          params.W1[static_cast<std::size_t>(j) * params.k_in + i]);
            out << (i ? " " : "") << buf;
        }
        out << "\n";
    }
    auto print_vec = [&](const std::vector<double>& v) {
        for (std::size_t i = 0; i < v.size(); ++i) {
            std::snprintf(buf, sizeof(buf), "%.17g", v[i]);
            out << (i ? " " : "") << buf;
        }
        out << "\n";
    };
    print_vec(params.b1);
    print_vec(params.w2);
    std::snprintf(buf, sizeof(buf), "%.17g", params.b2);
    out << buf << "\n";
    if (!out) throw Error("write failed: " + path);
}

MlpParams load_mlp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open for reading: " + path);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "SRMLP" || version != "1") throw FormatError("not an SRMLP 1 file: " + path);
    MlpParams p;
    in >> p.k_in;
    if (!in || p.k_in < 1) throw FormatError("bad SRMLP header: " + path);
    p.W1.resize(static_cast<std::size_t>(kHidden) * p.k_in);
    p.b1.resize(kHidden);
    p.w2.resize(kHidden);
    for (double& v : p.W1) in >> v;
    for (double& v : p.b1) in >> v;
    for (double& v : p.w2) in >> v;
    in >> p.b2;
    if (!in) throw FormatError("truncated SRMLP file: " + path);
    return p;
}

void save_samples(const SampleSet& set, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open for writing: " + path);
    auto put_u32 = [&](std::uint32_t v) {
        unsigned char b[4] = {static_cast<unsigned char>(v), static_cast<unsigned char>(v >> 8),
                              static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 24)};
        out.write(reinterpret_cast<const char*>(b), 4);
    };
    auto put_f64 = [&](double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, 8);
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
        out.write(reinterpret_cast<const char*>(b), 8);
    };
    put_u32(static_cast<std::uint32_t>(set.samples.size()));
    put_u32(static_cast<std::uint32_t>(set.k_raw));
    for (const RawSample& s : set.samples) {
        if (static_cast<int>(s.patch.size()) != set.k_raw)
            throw Error("save_samples: patch length mismatch");
        for (double v : s.patch) put_f64(v);
        put_f64(s.target);
        put_f64(s.ctx.mu);
        put_f64(s.ctx.s);
    }
    if (!out) throw Error("write failed: " + path);
}

SampleSet load_samples(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open for reading: " + path);
    auto get_u32 = [&]() {
        unsigned char b[4];
        in.read(reinterpret_cast<char*>(b), 4);
        return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
               (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
    };
    auto get_f64 = [&]() {
        unsigned char b[8];
        in.read(reinterpret_cast<char*>(b), 8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    };
    SampleSet set;
    std::uint32_t count = get_u32();
    set.k_raw = static_cast<int>(get_u32());
    if (!in || set.k_raw < 1) throw FormatError("bad samples header: " + path);
    set.samples.resize(count);
    for (RawSample& s : set.samples) {
        s.patch.resize(set.k_raw);
        for (double& v : s.patch) v = get_f64();
        s.target = get_f64();
        s.ctx.mu = get_f64();
        s.ctx.s = get_f64();
    }
    if (!in) throw FormatError("truncated samples file: " + path);
    return set;
}

std::vector<TrainingSample> make_training_samples(const SampleSet& set, const EigenBasis& basis,
                                                  int k) {
    if (set.k_raw != basis.dim)
        throw Error("make_training_samples: samples k_raw " + std::to_string(set.k_raw) +
                    " != basis dim " + std::to_string(basis.dim));
    if (k < 1 || k > basis.dim) throw Error("make_training_samples: k out of range");
    std::vector<TrainingSample> out(set.samples.size());
#pragma omp parallel for schedule(static)
    for (long i = 0; i < static_cast<long>(set.samples.size()); ++i) {
        const RawSample& raw = set.samples[i];
        CoeffPatch norm = raw.patch;
        const std::size_t n_sites = norm.size() / 6;
        for (std::size_t site = 0; site < n_sites; ++site) norm[site * 6] -= raw.ctx.mu;
        for (double& c : norm) c /= raw.ctx.s;
        out[i].input = pca_project(basis, norm, k);
        out[i].target = (raw.target - raw.ctx.mu) / raw.ctx.s;
        out[i].ctx = raw.ctx;
    }
    return out;
}

} // namespace srlocal
