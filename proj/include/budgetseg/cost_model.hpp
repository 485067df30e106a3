#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "budgetseg/errors.hpp"

namespace budgetseg {

enum class LayerKind { separable, pointwise, classifier_1x1, transposed_upsample, standard };

std::string to_string(LayerKind kind);
LayerKind layer_kind_from_string(const std::string& name);

/// One symbolic layer; the unit of cost accounting.
struct LayerSpec {
    LayerKind kind = LayerKind::standard;
    int kernel_h = 1;
    int kernel_w = 1;
    int stride = 1;
    int pad = 0;
    int in_channels = 1;  // c_i
    int out_filters = 1;  // n_f; equals in_channels for separable layers

    bool operator==(const LayerSpec&) const = default;
};

struct LayerCost {
    int index = 0;
    int out_h = 0;
    int out_w = 0;
    std::int64_t macs = 0;

    bool operator==(const LayerCost&) const = default;
};

struct CostReport {
    std::vector<LayerCost> per_layer;
    std::int64_t total_macs = 0;
    std::int64_t total_ops = 0;  // 2 * total_macs
    double megaops = 0.0;        // total_macs / 1e6

    bool operator==(const CostReport&) const = default;
};

// Separable (depthwise) convolution MACs: out_h * out_w * c_i * h_f * w_f.
std::int64_t mac_separable(std::int64_t out_h, std::int64_t out_w, std::int64_t c_i,
                           std::int64_t h_f, std::int64_t w_f);

// Pointwise (1x1) convolution MACs: out_h * out_w * c_i * n_f.
std::int64_t mac_pointwise(std::int64_t out_h, std::int64_t out_w, std::int64_t c_i,
                           std::int64_t n_f);

// Depthwise separable pair: out_h * out_w * c_i * (h_f * w_f + n_f).
// Equals mac_separable + mac_pointwise exactly.
std::int64_t mac_dsp(std::int64_t out_h, std::int64_t out_w, std::int64_t c_i, std::int64_t h_f,
                     std::int64_t w_f, std::int64_t n_f);

// Operation reduction factor of a separable pair vs. a classical convolution:
// (h_f * w_f * n_f) / (h_f * w_f + n_f). Bounded above by h_f * w_f.
double reduction_factor(std::int64_t h_f, std::int64_t w_f, std::int64_t n_f);

/// Transposed-convolution parameters realizing an upscale factor x:
/// stride x, kernel 2x, pad x/2.
struct UpsampleParams {
    int factor = 0;
    int stride = 0;
    int kernel = 0;
    int pad = 0;

    bool operator==(const UpsampleParams&) const = default;
};

// Requires an even factor >= 2 (odd factors would need fractional padding).
UpsampleParams upsample_params(int factor);

// Transposed-convolution output side: (in - 1) * stride + kernel - 2 * pad.
// Throws ShapeError when non-positive.
int transposed_out_size(int in, int stride, int kernel, int pad);

// Propagates spatial sizes through the layer chain and accumulates exact MACs.
// Validates channel chaining and the factor-32 downsampling bookkeeping in
// front of any transposed_upsample layer; violations raise StructureError
// naming the offending layer index.
CostReport network_cost(const std::vector<LayerSpec>& layers, int input_h, int input_w);

void to_json(nlohmann::json& j, const LayerCost& c);
void from_json(const nlohmann::json& j, LayerCost& c);
void to_json(nlohmann::json& j, const CostReport& r);
void from_json(const nlohmann::json& j, CostReport& r);

/// Aligned plain-text table of a cost report, one row per layer.
std::string format_cost_table(const std::vector<LayerSpec>& layers, const CostReport& report);

} // namespace budgetseg
