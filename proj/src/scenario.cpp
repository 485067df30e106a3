#include "budgetseg/scenario.hpp"

#include <nlohmann/json.hpp>

#include "json_util.hpp"

namespace budgetseg {

std::string to_string(AccuracyLevel level) {
    switch (level) {
    case AccuracyLevel::low: return "low";
    case AccuracyLevel::medium: return "medium";
    case AccuracyLevel::high: return "high";
    }
    return "unknown";
}

namespace {

AccuracyLevel accuracy_from_string(const std::string& name, const std::string& where) {
    if (name == "low") return AccuracyLevel::low;
    if (name == "medium") return AccuracyLevel::medium;
    if (name == "high") return AccuracyLevel::high;
    throw ParseError(where + "/required_accuracy: expected low, medium or high, got '" + name +
                     "'");
}

} // namespace

ScenarioSpec parse_scenario(const nlohmann::json& j, const std::string& origin) {
    detail::check_keys(j,
                       {"name", "num_classes", "n_cameras", "fps_per_camera",
                        "required_accuracy", "budget_gops", "max_iterations", "input_h",
                        "input_w"},
                       origin);
    ScenarioSpec s;
    s.name = detail::get_string(j, "name", origin);
    s.num_classes = detail::get_int(j, "num_classes", origin);
    s.n_cameras = detail::get_int(j, "n_cameras", origin);
    s.fps_per_camera = detail::get_int(j, "fps_per_camera", origin);
    s.required_accuracy =
        accuracy_from_string(detail::get_string(j, "required_accuracy", origin), origin);
    s.budget_gops = detail::get_double(j, "budget_gops", origin);
    s.max_iterations = detail::get_int(j, "max_iterations", origin);
    s.input_h = detail::get_int(j, "input_h", origin);
    s.input_w = detail::get_int(j, "input_w", origin);
    if (s.num_classes < 1) {
        throw ParseError(origin + "/num_classes: must be >= 1");
    }
    if (s.n_cameras < 1) {
        throw ParseError(origin + "/n_cameras: must be >= 1");
    }
    if (s.fps_per_camera < 1) {
        throw ParseError(origin + "/fps_per_camera: must be >= 1");
    }
    if (!(s.budget_gops > 0.0)) {
        throw ParseError(origin + "/budget_gops: must be > 0");
    }
    if (s.max_iterations < 1) {
        throw ParseError(origin + "/max_iterations: must be >= 1");
    }
    if (s.input_h < 32 || s.input_h % 32 != 0 || s.input_w < 32 || s.input_w % 32 != 0) {
        throw ParseError(origin + "/input_h,input_w: must be positive and divisible by 32");
    }
    return s;
}

ScenarioSpec load_scenario(const std::string& path) {
    return parse_scenario(detail::load_json_file(path), path);
}

} // namespace budgetseg
