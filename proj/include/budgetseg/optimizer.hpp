#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "budgetseg/architecture.hpp"
#include "budgetseg/scenario.hpp"

namespace budgetseg {

// Algorithm constants for the surrogate search.
inline constexpr double kUcbBeta = 2.0;        // exploration weight
inline constexpr double kGpLengthScale = 0.5;  // in normalized encoding space
inline constexpr double kGpVarianceFloor = 1e-12;
inline constexpr double kGpJitterStart = 1e-6;
inline constexpr double kGpJitterMax = 1e-4;

/// One candidate configuration with its normalized encoding: m, d, k min-max
/// scaled to [0,1] followed by a one-hot block-specs index.
struct SearchPoint {
    std::vector<double> encoded;
    ModelConfig config;

    bool operator==(const SearchPoint&) const = default;
};

// Full grid in lexicographic (m, d, k, block index) order; encode/decode is a
// bijection by construction.
std::vector<SearchPoint> build_search_grid(const std::vector<std::string>& block_ids,
                                           int num_classes);

/// Gaussian-Process surrogate state over observed (point, value) pairs.
/// The diagonal jitter is treated as part of the covariance, so re-querying
/// an observed point interpolates its value exactly.
struct GpState {
    std::vector<SearchPoint> points;
    std::vector<double> values;
    double length_scale = kGpLengthScale;
    double signal_variance = 0.0;  // population variance of values, floored
    double noise_jitter = 0.0;     // accepted diagonal jitter factor
    double prior_mean = 0.0;
    std::vector<double> factorization;  // lower-triangular Cholesky factor, row-major n x n
    std::vector<double> alpha;          // (K + jitter*s2*I)^-1 (values - prior_mean)

    int size() const { return static_cast<int>(values.size()); }
    bool empty() const { return values.empty(); }
};

// Fits the squared-exponential surrogate. Requires >= 1 observation and no
// duplicate points with conflicting values; escalates jitter 1e-6 -> 1e-4 and
// raises NumericalError if the Gram matrix still fails to factorize.
GpState gp_fit(const std::vector<SearchPoint>& points, const std::vector<double>& values);

struct Prediction {
    double mean = 0.0;
    double variance = 0.0;
};

Prediction gp_predict(const GpState& state, const SearchPoint& point);

// Next candidate: UCB (mean + beta * sigma) argmax over unvisited grid points,
// ties broken by grid order. With an empty state the pick is uniform from the
// unvisited set via the caller's PRNG. Returns nothing when all points are
// visited.
std::optional<std::size_t> acquire(const GpState& state, const std::vector<SearchPoint>& grid,
                                   const std::vector<bool>& visited, std::mt19937_64& rng);

struct TraceEntry {
    int iteration = 0;
    ModelConfig config;
    double gigaops = 0.0;
    bool feasible = false;

    bool operator==(const TraceEntry&) const = default;
};

/// Search outcome: the feasible configuration closest to the budget, if any.
struct SearchResult {
    std::optional<ModelConfig> best;
    double gigaops = 0.0;         // of best, when present
    double budget = 0.0;
    double min_difference = 0.0;  // budget - gigaops, when best present
    std::vector<TraceEntry> trace;

    bool operator==(const SearchResult&) const = default;
};

// Per-second throughput demand: (n_cameras * fps) * megaops / 1000.
double gigaops_per_second(double megaops, int n_cameras, int fps_per_camera);

/// Pure per-image cost of a configuration, in megaops.
using CostFn = std::function<double(const ModelConfig&)>;

// Surrogate-driven budget search. Each grid point is evaluated at most once;
// the incumbent updates only on feasible and strictly closer-to-budget
// evaluations. Deterministic given the seed.
SearchResult bayesian_search(const ScenarioSpec& scenario, const std::vector<SearchPoint>& grid,
                             const CostFn& cost_fn, std::uint64_t seed);

// Brute-force verification oracle: evaluates the whole grid. Candidates are
// costed in parallel, so cost_fn must be safe to call concurrently.
SearchResult exhaustive_search(const ScenarioSpec& scenario, const std::vector<SearchPoint>& grid,
                               const CostFn& cost_fn);

void to_json(nlohmann::json& j, const TraceEntry& e);
void from_json(const nlohmann::json& j, TraceEntry& e);
void to_json(nlohmann::json& j, const SearchResult& r);
void from_json(const nlohmann::json& j, SearchResult& r);

std::string format_search_summary(const ScenarioSpec& scenario, const SearchResult& result);

} // namespace budgetseg
