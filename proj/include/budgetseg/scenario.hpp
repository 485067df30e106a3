#pragma once

#include <string>

#include <nlohmann/json_fwd.hpp>

#include "budgetseg/errors.hpp"

namespace budgetseg {

enum class AccuracyLevel { low, medium, high };

std::string to_string(AccuracyLevel level);

/// One deployment scenario: camera setup, class count and compute budget.
struct ScenarioSpec {
    std::string name;
    int num_classes = 1;
    int n_cameras = 1;
    int fps_per_camera = 1;
    AccuracyLevel required_accuracy = AccuracyLevel::medium;  // informational
    double budget_gops = 0.0;
    int max_iterations = 1;
    int input_h = 0;
    int input_w = 0;

    int images_per_second() const { return n_cameras * fps_per_camera; }

    bool operator==(const ScenarioSpec&) const = default;
};

// Strict schema: unknown fields are rejected; invariant violations name the
// offending field. Input dimensions must be divisible by 32.
ScenarioSpec load_scenario(const std::string& path);
ScenarioSpec parse_scenario(const nlohmann::json& j, const std::string& origin);

} // namespace budgetseg
