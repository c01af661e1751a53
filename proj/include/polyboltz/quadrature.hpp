#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <random>
#include <vector>

#include "polyboltz/kinematics.hpp"

namespace polyboltz {

enum class Scheme { MonteCarlo, Tensor };

/// Deterministic description of an integration: identical spec, identical bits.
struct QuadratureSpec {
    Scheme scheme = Scheme::MonteCarlo;
    std::uint64_t samples = 200000;
    /// Nodes per dimension for the tensor Gauss rules.
    int nodes = 24;
    double v_max = 8.0;
    double i_max = 40.0;
    std::optional<std::uint64_t> seed;
    /// Boundary margin ε: (r, R) are restricted to [ε, 1-ε].
    double margin = 0.0;

    void validate() const;
    /// The seed, or ConfigError when the spec is not reproducible.
    std::uint64_t require_seed() const;
    void require_monte_carlo(const char* what) const;
};

struct Estimate {
    double value = 0.0;
    double std_err = 0.0;
    std::uint64_t samples = 0;
};

/// (a - b) in units of the combined standard error.
double z_score(const Estimate& a, const Estimate& b);
/// |e| within k standard errors of zero, with an absolute floor for
/// estimators that cancel sample by sample.
bool within_se(const Estimate& e, double k, double floor = 1e-12);

void set_num_threads(int n);
int num_threads();

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk);

/// Random variates for one chunk of a Monte Carlo run.
class Sampler {
public:
    Sampler(std::uint64_t seed, std::uint64_t stream, std::uint64_t chunk);

    /// Uniform on the open interval (0, 1).
    double uniform();
    double normal();
    Vec3 normal3();
    /// Uniform on S².
    Vec3 sphere();
    /// Gamma(shape, 1).
    double gamma(double shape);

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_;
};

/// r or R drawn on [ε, 1-ε] with density 1/(2L x(1-x)), L = log((1-ε)/ε).
struct LogisticDraw {
    double x;
    /// 1/density.
    double inv_density;
};
LogisticDraw logistic_draw(Sampler& s, double eps);
LogisticDraw logistic_from_uniform(double u, double eps);

inline constexpr std::uint64_t kChunkSize = 4096;

/// Welford accumulator over a fixed number of outputs.
struct RunningStats {
    std::uint64_t count = 0;
    std::vector<double> mean;
    std::vector<double> m2;

    explicit RunningStats(std::size_t n = 0) : mean(n, 0.0), m2(n, 0.0) {}
    void add(const double* x);
    void merge(const RunningStats& other);
    std::vector<Estimate> estimates() const;
};

/// Collects the exception of the lowest failing chunk so that parallel
/// failures are reported deterministically.
class ChunkErrors {
public:
    void record(std::uint64_t chunk, std::exception_ptr e);
    void rethrow() const;

private:
    std::mutex mutex_;
    std::uint64_t first_ = UINT64_MAX;
    std::exception_ptr error_;
};

RunningStats pairwise_reduce(std::vector<RunningStats>& parts);

/// Monte Carlo mean of `n_out` simultaneous integrands. `fn(Sampler&, double* out)`
/// fills one sample of every integrand. Samples are split into fixed chunks with
/// their own RNG streams and reduced pairwise, so the result does not depend on
/// the thread count.
template <class Fn>
std::vector<Estimate> mc_estimate(std::size_t n_out, std::uint64_t samples, std::uint64_t seed,
                                  std::uint64_t stream, Fn&& fn) {
    const std::uint64_t n_chunks = (samples + kChunkSize - 1) / kChunkSize;
    std::vector<RunningStats> parts(n_chunks, RunningStats(n_out));
    ChunkErrors errors;
#pragma omp parallel for schedule(dynamic)
    for (std::int64_t c = 0; c < static_cast<std::int64_t>(n_chunks); ++c) {
        try {
            const auto chunk = static_cast<std::uint64_t>(c);
            Sampler sampler(seed, stream, chunk);
            const std::uint64_t begin = chunk * kChunkSize;
            const std::uint64_t end = std::min(samples, begin + kChunkSize);
            std::vector<double> out(n_out);
            for (std::uint64_t i = begin; i < end; ++i) {
                fn(sampler, out.data());
                parts[chunk].add(out.data());
            }
        } catch (...) {
            errors.record(static_cast<std::uint64_t>(c), std::current_exception());
        }
    }
    errors.rethrow();
    return pairwise_reduce(parts).estimates();
}

template <class Fn>
Estimate mc_estimate_scalar(std::uint64_t samples, std::uint64_t seed, std::uint64_t stream, Fn&& fn) {
    return mc_estimate(1, samples, seed, stream,
                       [&](Sampler& s, double* out) { out[0] = fn(s); })[0];
}

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Nodes and weights for ∫ f(x) e^{-x²/2}/√(2π) dx (weights sum to 1).
GaussRule gauss_hermite(int n);

/// Nodes and weights for ∫ f(x) x^α e^{-x}/Γ(α+1) dx on (0,∞) (weights sum to 1).
GaussRule gauss_laguerre(int n, double alpha);

/// Nodes and weights for ∫ f(x) x^p (1-x)^q dx / B(p+1, q+1) on (0,1) (weights sum to 1).
GaussRule gauss_jacobi(int n, double p, double q);

/// Calls fn(v, I, w) over the tensor rule for the normalized Maxwellian weight.
template <class Fn>
void for_each_maxwell_node(int n, double alpha, Fn&& fn) {
    const GaussRule h = gauss_hermite(n);
    const GaussRule l = gauss_laguerre(n, alpha);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const Vec3 v(h.nodes[a], h.nodes[b], h.nodes[c]);
                const double wv = h.weights[a] * h.weights[b] * h.weights[c];
                for (int k = 0; k < n; ++k) fn(v, l.nodes[k], wv * l.weights[k]);
            }
}

}  // namespace polyboltz
