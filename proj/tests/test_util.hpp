#pragma once

#include <random>
#include <string>
#include <vector>

#include "budgetseg/tensor.hpp"

namespace testutil {

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng()) /
                             static_cast<double>(std::mt19937_64::max()));
}

inline budgetseg::Tensor random_tensor(int h, int w, int c, std::mt19937_64& rng) {
    std::vector<double> values(static_cast<std::size_t>(h) * w * c);
    for (double& v : values) {
        v = uniform(rng, -1.0, 1.0);
    }
    return budgetseg::Tensor(h, w, c, std::move(values));
}

inline budgetseg::Filterbank random_filterbank(budgetseg::FilterKind kind, int kh, int kw, int ci,
                                               int co, std::mt19937_64& rng) {
    budgetseg::Filterbank f = budgetseg::Filterbank::make(kind, kh, kw, ci, co);
    for (double& v : f.weights) {
        v = uniform(rng, -1.0, 1.0);
    }
    return f;
}

inline std::string source_path(const std::string& relative) {
    return std::string(BUDGETSEG_SOURCE_DIR) + "/" + relative;
}

} // namespace testutil
