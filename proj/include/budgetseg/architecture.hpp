#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "budgetseg/cost_model.hpp"

namespace budgetseg {

namespace grids {
inline constexpr std::array<double, 5> width_multiplier{0.25, 0.5, 0.75, 1.0, 1.25};
inline constexpr std::array<int, 4> classifier_depth{512, 1024, 1536, 2048};
inline constexpr std::array<int, 5> classifier_kernel{3, 5, 7, 9, 11};
} // namespace grids

/// One backbone entry as declared in a block-specs file.
struct BlockEntry {
    LayerKind kind = LayerKind::separable;  // separable, pointwise or standard
    int kernel = 3;
    int stride = 1;
    int out_channels = 0;

    bool operator==(const BlockEntry&) const = default;
};

/// A backbone described as data: stem and body entries with a declared
/// cumulative stride (must be 32).
struct BlockSpecs {
    std::string id;
    int input_h = 0;
    int input_w = 0;
    std::vector<BlockEntry> layers;
    int cumulative_stride = 0;

    bool operator==(const BlockSpecs&) const = default;
};

BlockSpecs load_block_specs(const std::string& path);
BlockSpecs parse_block_specs(const nlohmann::json& j, const std::string& origin);

/// The three-tier hyperparameter tuple plus class count and backbone choice.
struct ModelConfig {
    double width_multiplier = 1.0;  // m
    int classifier_depth = 1024;    // d
    int classifier_kernel = 3;      // k
    int num_classes = 1;            // n
    std::string block_specs_id;

    bool operator==(const ModelConfig&) const = default;
};

ModelConfig load_model_config(const std::string& path);
void to_json(nlohmann::json& j, const ModelConfig& cfg);
void from_json(const nlohmann::json& j, ModelConfig& cfg);

// Throws StructureError unless m, d, k all sit on the search grids and
// num_classes >= 1.
void validate_config(const ModelConfig& cfg);

// Width-multiplier channel scaling: round(base * m) to the nearest multiple
// of 8, floored at 8.
int scale_channels(int base, double multiplier);

// The four-layer FCN head: channel-preserving separable k x k, pointwise to
// classifier_depth, 1x1 classifier to num_classes, then the 64x64 stride-32
// pad-16 transposed upsampler.
std::vector<LayerSpec> build_fcn_head(int backbone_out_channels, const ModelConfig& cfg);

/// Fully-resolved symbolic network ready for cost accounting.
struct SymbolicModel {
    std::vector<LayerSpec> layers;
    int input_h = 0;
    int input_w = 0;
    std::string block_specs_id;
    ModelConfig config;

    bool operator==(const SymbolicModel&) const = default;
};

SymbolicModel build_model(const BlockSpecs& specs, const ModelConfig& cfg);
SymbolicModel build_model(const BlockSpecs& specs, const ModelConfig& cfg, int input_h,
                          int input_w);

} // namespace budgetseg
