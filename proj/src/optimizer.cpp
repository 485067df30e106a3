#include "budgetseg/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace budgetseg {

double gigaops_per_second(double megaops, int n_cameras, int fps_per_camera) {
    if (megaops < 0.0 || n_cameras < 0 || fps_per_camera < 0) {
        throw StructureError("gigaops_per_second arguments must be non-negative");
    }
    const double images_per_second = static_cast<double>(n_cameras) * fps_per_camera;
    return images_per_second * megaops / 1000.0;
}

std::vector<SearchPoint> build_search_grid(const std::vector<std::string>& block_ids,
                                           int num_classes) {
    if (block_ids.empty()) {
        throw StructureError("search grid needs at least one block-specs id");
    }
    const double m_lo = grids::width_multiplier.front();
    const double m_span = grids::width_multiplier.back() - m_lo;
    const double d_lo = grids::classifier_depth.front();
    const double d_span = grids::classifier_depth.back() - d_lo;
    const double k_lo = grids::classifier_kernel.front();
    const double k_span = grids::classifier_kernel.back() - k_lo;
    std::vector<SearchPoint> grid;
    grid.reserve(grids::width_multiplier.size() * grids::classifier_depth.size() *
                 grids::classifier_kernel.size() * block_ids.size());
    for (double m : grids::width_multiplier) {
        for (int d : grids::classifier_depth) {
            for (int k : grids::classifier_kernel) {
                for (std::size_t b = 0; b < block_ids.size(); ++b) {
                    SearchPoint p;
                    p.config = ModelConfig{m, d, k, num_classes, block_ids[b]};
                    p.encoded.reserve(3 + block_ids.size());
                    p.encoded.push_back(m_span > 0 ? (m - m_lo) / m_span : 0.0);
                    p.encoded.push_back(d_span > 0 ? (d - d_lo) / d_span : 0.0);
                    p.encoded.push_back(k_span > 0 ? (k - k_lo) / k_span : 0.0);
                    for (std::size_t i = 0; i < block_ids.size(); ++i) {
                        p.encoded.push_back(i == b ? 1.0 : 0.0);
                    }
                    grid.push_back(std::move(p));
                }
            }
        }
    }
    return grid;
}

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

// In-place lower Cholesky; returns false on a non-positive pivot.
bool cholesky(std::vector<double>& a, int n) {
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            double s = a[static_cast<std::size_t>(i) * n + j];
            for (int t = 0; t < j; ++t) {
                s -= a[static_cast<std::size_t>(i) * n + t] * a[static_cast<std::size_t>(j) * n + t];
            }
            if (i == j) {
                if (!(s > 0.0) || !std::isfinite(s)) {
                    return false;
                }
                a[static_cast<std::size_t>(i) * n + i] = std::sqrt(s);
            } else {
                a[static_cast<std::size_t>(i) * n + j] = s / a[static_cast<std::size_t>(j) * n + j];
            }
        }
        for (int j = i + 1; j < n; ++j) {
            a[static_cast<std::size_t>(i) * n + j] = 0.0;
        }
    }
    return true;
}

void forward_solve(const std::vector<double>& l, int n, std::vector<double>& x) {
    for (int i = 0; i < n; ++i) {
        double s = x[i];
        for (int t = 0; t < i; ++t) {
            s -= l[static_cast<std::size_t>(i) * n + t] * x[t];
        }
        x[i] = s / l[static_cast<std::size_t>(i) * n + i];
    }
}

void backward_solve(const std::vector<double>& l, int n, std::vector<double>& x) {
    for (int i = n - 1; i >= 0; --i) {
        double s = x[i];
        for (int t = i + 1; t < n; ++t) {
            s -= l[static_cast<std::size_t>(t) * n + i] * x[t];
        }
        x[i] = s / l[static_cast<std::size_t>(i) * n + i];
    }
}

} // namespace

GpState gp_fit(const std::vector<SearchPoint>& points, const std::vector<double>& values) {
    if (points.empty() || points.size() != values.size()) {
        throw StructureError("gp_fit needs at least one (point, value) observation");
    }
    // Exact repeats collapse to one observation (the objective is
    // deterministic); conflicting values at the same point are an error.
    GpState state;
    for (std::size_t i = 0; i < points.size(); ++i) {
        bool seen = false;
        for (std::size_t j = 0; j < state.points.size(); ++j) {
            if (state.points[j].encoded == points[i].encoded) {
                if (state.values[j] != values[i]) {
                    throw StructureError(
                        "duplicate observation with conflicting values at index " +
                        std::to_string(i));
                }
                seen = true;
                break;
            }
        }
        if (!seen) {
            state.points.push_back(points[i]);
            state.values.push_back(values[i]);
        }
    }
    const int n = static_cast<int>(state.values.size());
    state.length_scale = kGpLengthScale;
    double mean = 0.0;
    for (double v : state.values) mean += v;
    mean /= n;
    state.prior_mean = mean;
    double var = 0.0;
    for (double v : state.values) var += (v - mean) * (v - mean);
    var /= n;
    state.signal_variance = std::max(var, kGpVarianceFloor);

    std::vector<double> gram(static_cast<std::size_t>(n) * n);
    const double inv_2l2 = 1.0 / (2.0 * state.length_scale * state.length_scale);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j <= i; ++j) {
            const double k =
                state.signal_variance *
                std::exp(-squared_distance(state.points[i].encoded, state.points[j].encoded) *
                         inv_2l2);
            gram[static_cast<std::size_t>(i) * n + j] = k;
            gram[static_cast<std::size_t>(j) * n + i] = k;
        }
    }
    bool ok = false;
    for (double jitter = kGpJitterStart; jitter <= kGpJitterMax * 1.0000001; jitter *= 10.0) {
        std::vector<double> attempt = gram;
        for (int i = 0; i < n; ++i) {
            attempt[static_cast<std::size_t>(i) * n + i] += jitter * state.signal_variance;
        }
        if (cholesky(attempt, n)) {
            state.factorization = std::move(attempt);
            state.noise_jitter = jitter;
            ok = true;
            break;
        }
    }
    if (!ok) {
        throw NumericalError("Gram matrix failed to factorize with jitter up to " +
                             std::to_string(kGpJitterMax));
    }
    state.alpha.resize(n);
    for (int i = 0; i < n; ++i) {
        state.alpha[i] = state.values[i] - state.prior_mean;
    }
    forward_solve(state.factorization, n, state.alpha);
    backward_solve(state.factorization, n, state.alpha);
    return state;
}

Prediction gp_predict(const GpState& state, const SearchPoint& point) {
    if (state.empty()) {
        throw StructureError("gp_predict requires a fitted state");
    }
    const int n = state.size();
    const double s2 = state.signal_variance;
    const double inv_2l2 = 1.0 / (2.0 * state.length_scale * state.length_scale);
    std::vector<double> k(n);
    for (int i = 0; i < n; ++i) {
        k[i] = s2 * std::exp(-squared_distance(point.encoded, state.points[i].encoded) * inv_2l2);
        // jitter is part of the covariance, so an exact re-query interpolates
        if (point.encoded == state.points[i].encoded) {
            k[i] += state.noise_jitter * s2;
        }
    }
    Prediction pred;
    pred.mean = state.prior_mean;
    for (int i = 0; i < n; ++i) {
        pred.mean += k[i] * state.alpha[i];
    }
    const double prior_var = s2 * (1.0 + state.noise_jitter);
    forward_solve(state.factorization, n, k);
    double reduction = 0.0;
    for (int i = 0; i < n; ++i) {
        reduction += k[i] * k[i];
    }
    pred.variance = std::clamp(prior_var - reduction, 0.0, prior_var);
    return pred;
}

std::optional<std::size_t> acquire(const GpState& state, const std::vector<SearchPoint>& grid,
                                   const std::vector<bool>& visited, std::mt19937_64& rng) {
    if (grid.size() != visited.size()) {
        throw StructureError("visited mask does not match the grid");
    }
    std::vector<std::size_t> open;
    open.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!visited[i]) open.push_back(i);
    }
    if (open.empty()) {
        return std::nullopt;
    }
    if (state.empty()) {
        return open[static_cast<std::size_t>(rng() % open.size())];
    }
    std::size_t best = open.front();
    double best_ucb = -std::numeric_limits<double>::infinity();
    for (std::size_t i : open) {
        const Prediction p = gp_predict(state, grid[i]);
        const double ucb = p.mean + kUcbBeta * std::sqrt(p.variance);
        if (ucb > best_ucb) {  // strict: ties resolve to the earliest grid point
            best_ucb = ucb;
            best = i;
        }
    }
    return best;
}

SearchResult bayesian_search(const ScenarioSpec& scenario, const std::vector<SearchPoint>& grid,
                             const CostFn& cost_fn, std::uint64_t seed) {
    if (grid.empty()) {
        throw StructureError("search grid is empty");
    }
    if (scenario.max_iterations < 1) {
        throw StructureError("max_iterations must be >= 1");
    }
    std::mt19937_64 rng(seed);
    std::vector<bool> visited(grid.size(), false);
    std::vector<SearchPoint> obs_points;
    std::vector<double> obs_values;
    GpState state;
    SearchResult result;
    result.budget = scenario.budget_gops;
    double min_difference = std::numeric_limits<double>::infinity();
    for (int iteration = 1; iteration <= scenario.max_iterations; ++iteration) {
        const auto pick = acquire(state, grid, visited, rng);
        if (!pick) {
            break;  // every grid point evaluated
        }
        const std::size_t idx = *pick;
        visited[idx] = true;
        const ModelConfig& cfg = grid[idx].config;
        const double megaops = cost_fn(cfg);
        const double gigaops =
            gigaops_per_second(megaops, scenario.n_cameras, scenario.fps_per_camera);
        const bool feasible = gigaops <= scenario.budget_gops;
        result.trace.push_back(TraceEntry{iteration, cfg, gigaops, feasible});
        if (feasible && scenario.budget_gops - gigaops < min_difference) {
            min_difference = scenario.budget_gops - gigaops;
            result.best = cfg;
            result.gigaops = gigaops;
        }
        // Reflect infeasible values below the budget line so the surrogate
        // stays smooth while the maximum sits at the feasibility boundary.
        const double objective =
            feasible ? gigaops : 2.0 * scenario.budget_gops - gigaops;
        obs_points.push_back(grid[idx]);
        obs_values.push_back(objective);
        state = gp_fit(obs_points, obs_values);
    }
    result.min_difference = result.best ? min_difference : 0.0;
    return result;
}

SearchResult exhaustive_search(const ScenarioSpec& scenario, const std::vector<SearchPoint>& grid,
                               const CostFn& cost_fn) {
    if (grid.empty()) {
        throw StructureError("search grid is empty");
    }
    const int n = static_cast<int>(grid.size());
    std::vector<double> gigaops(grid.size(), 0.0);
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) {
        // exceptions cannot leave the parallel region; carry the first one out
        try {
            gigaops[i] = gigaops_per_second(cost_fn(grid[i].config), scenario.n_cameras,
                                            scenario.fps_per_camera);
        } catch (...) {
            if (!failure) {
#pragma omp critical
                if (!failure) failure = std::current_exception();
            }
        }
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
    SearchResult result;
    result.budget = scenario.budget_gops;
    double min_difference = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        const bool feasible = gigaops[i] <= scenario.budget_gops;
        result.trace.push_back(TraceEntry{i + 1, grid[i].config, gigaops[i], feasible});
        if (feasible && scenario.budget_gops - gigaops[i] < min_difference) {
            min_difference = scenario.budget_gops - gigaops[i];
            result.best = grid[i].config;
            result.gigaops = gigaops[i];
        }
    }
    result.min_difference = result.best ? min_difference : 0.0;
    return result;
}

void to_json(nlohmann::json& j, const TraceEntry& e) {
    j = nlohmann::json{{"iteration", e.iteration},
                       {"config", e.config},
                       {"gigaops", e.gigaops},
                       {"feasible", e.feasible}};
}

void from_json(const nlohmann::json& j, TraceEntry& e) {
    j.at("iteration").get_to(e.iteration);
    j.at("config").get_to(e.config);
    j.at("gigaops").get_to(e.gigaops);
    j.at("feasible").get_to(e.feasible);
}

void to_json(nlohmann::json& j, const SearchResult& r) {
    j = nlohmann::json::object();
    if (r.best) {
        j["best"] = *r.best;
        j["gigaops"] = r.gigaops;
        j["min_difference"] = r.min_difference;
    } else {
        j["best"] = nullptr;
        j["gigaops"] = nullptr;
        j["min_difference"] = nullptr;
    }
    j["budget"] = r.budget;
    j["trace"] = r.trace;
}

void from_json(const nlohmann::json& j, SearchResult& r) {
    if (j.at("best").is_null()) {
        r.best.reset();
        r.gigaops = 0.0;
        r.min_difference = 0.0;
    } else {
        r.best = j.at("best").get<ModelConfig>();
        j.at("gigaops").get_to(r.gigaops);
        j.at("min_difference").get_to(r.min_difference);
    }
    j.at("budget").get_to(r.budget);
    j.at("trace").get_to(r.trace);
}

std::string format_search_summary(const ScenarioSpec& scenario, const SearchResult& result) {
    std::ostringstream os;
    os << "scenario " << scenario.name << ": budget " << scenario.budget_gops << " GOPS, "
       << scenario.images_per_second() << " images/s, " << result.trace.size()
       << " evaluations\n";
    if (!result.best) {
        os << "no feasible configuration found\n";
        return os.str();
    }
    const ModelConfig& c = *result.best;
    os << std::setprecision(6) << std::fixed;
    os << "best: m=" << c.width_multiplier << " d=" << c.classifier_depth
       << " k=" << c.classifier_kernel << " specs=" << c.block_specs_id << '\n';
    os << "gigaops " << result.gigaops << " / " << result.budget << "  (utilization "
       << 100.0 * result.gigaops / result.budget << "%, headroom " << result.min_difference
       << ")\n";
    return os.str();
}

} // namespace budgetseg
