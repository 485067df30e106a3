#include "budgetseg/architecture.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "json_util.hpp"

namespace budgetseg {

namespace {

bool on_grid(double value, const auto& grid) {
    return std::find(grid.begin(), grid.end(), value) != grid.end();
}

} // namespace

void validate_config(const ModelConfig& cfg) {
    if (!on_grid(cfg.width_multiplier, grids::width_multiplier)) {
        throw StructureError("width_multiplier " + std::to_string(cfg.width_multiplier) +
                             " is not on the search grid");
    }
    if (!on_grid(cfg.classifier_depth, grids::classifier_depth)) {
        throw StructureError("classifier_depth " + std::to_string(cfg.classifier_depth) +
                             " is not on the search grid");
    }
    if (!on_grid(cfg.classifier_kernel, grids::classifier_kernel)) {
        throw StructureError("classifier_kernel " + std::to_string(cfg.classifier_kernel) +
                             " is not on the search grid");
    }
    if (cfg.num_classes < 1) {
        throw StructureError("num_classes must be >= 1");
    }
}

int scale_channels(int base, double multiplier) {
    if (base < 1 || multiplier <= 0.0) {
        throw StructureError("scale_channels requires base >= 1 and multiplier > 0");
    }
    const long long rounded = std::llround(base * multiplier / 8.0) * 8;
    return static_cast<int>(std::max(8LL, rounded));
}

std::vector<LayerSpec> build_fcn_head(int backbone_out_channels, const ModelConfig& cfg) {
    validate_config(cfg);
    if (backbone_out_channels < 1) {
        throw StructureError("backbone output channels must be >= 1");
    }
    const int k = cfg.classifier_kernel;
    const UpsampleParams up = upsample_params(32);
    std::vector<LayerSpec> head;
    head.push_back(LayerSpec{LayerKind::separable, k, k, 1, (k - 1) / 2, backbone_out_channels,
                             backbone_out_channels});
    head.push_back(LayerSpec{LayerKind::pointwise, 1, 1, 1, 0, backbone_out_channels,
                             cfg.classifier_depth});
    head.push_back(
        LayerSpec{LayerKind::classifier_1x1, 1, 1, 1, 0, cfg.classifier_depth, cfg.num_classes});
    head.push_back(LayerSpec{LayerKind::transposed_upsample, up.kernel, up.kernel, up.stride,
                             up.pad, cfg.num_classes, cfg.num_classes});
    return head;
}

BlockSpecs parse_block_specs(const nlohmann::json& j, const std::string& origin) {
    detail::check_keys(j, {"id", "input", "layers", "cumulative_stride"}, origin);
    BlockSpecs specs;
    specs.id = detail::get_string(j, "id", origin);
    const nlohmann::json& input = detail::get_field(j, "input", origin);
    detail::check_keys(input, {"h", "w"}, origin + "/input");
    specs.input_h = detail::get_int(input, "h", origin + "/input");
    specs.input_w = detail::get_int(input, "w", origin + "/input");
    specs.cumulative_stride = detail::get_int(j, "cumulative_stride", origin);
    const nlohmann::json& layers = detail::get_field(j, "layers", origin);
    if (!layers.is_array() || layers.empty()) {
        throw ParseError(origin + "/layers: expected a non-empty array");
    }
    int stride_product = 1;
    int channels = 3;  // backbones consume RGB images
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const std::string where = origin + "/layers/" + std::to_string(i);
        const nlohmann::json& lj = layers[i];
        detail::check_keys(lj, {"kind", "kernel", "stride", "out_channels"}, where);
        BlockEntry entry;
        entry.kind = layer_kind_from_string(detail::get_string(lj, "kind", where));
        if (entry.kind != LayerKind::separable && entry.kind != LayerKind::pointwise &&
            entry.kind != LayerKind::standard) {
            throw ParseError(where + "/kind: must be separable, pointwise or standard");
        }
        entry.kernel = detail::get_int(lj, "kernel", where);
        entry.stride = detail::get_int(lj, "stride", where);
        entry.out_channels = detail::get_int(lj, "out_channels", where);
        if (entry.kernel < 1 || entry.kernel % 2 == 0) {
            throw ParseError(where + "/kernel: forward kernels must be odd and >= 1");
        }
        if (entry.stride < 1) {
            throw ParseError(where + "/stride: must be >= 1");
        }
        if (entry.out_channels < 1) {
            throw ParseError(where + "/out_channels: must be >= 1");
        }
        if (entry.kind == LayerKind::pointwise && entry.kernel != 1) {
            throw ParseError(where + "/kernel: pointwise entries must use kernel 1");
        }
        if (entry.kind == LayerKind::separable && entry.out_channels != channels) {
            throw ParseError(where + "/out_channels: separable entries preserve channels (" +
                             std::to_string(channels) + "), got " +
                             std::to_string(entry.out_channels));
        }
        stride_product *= entry.stride;
        channels = entry.out_channels;
        specs.layers.push_back(entry);
    }
    if (specs.input_h < 1 || specs.input_w < 1) {
        throw ParseError(origin + "/input: dimensions must be >= 1");
    }
    if (stride_product != specs.cumulative_stride) {
        throw ParseError(origin + ": declared cumulative_stride " +
                         std::to_string(specs.cumulative_stride) +
                         " does not match the layer stride product " +
                         std::to_string(stride_product));
    }
    if (specs.cumulative_stride != 32) {
        throw ParseError(origin + "/cumulative_stride: must be 32, got " +
                         std::to_string(specs.cumulative_stride));
    }
    return specs;
}

BlockSpecs load_block_specs(const std::string& path) {
    return parse_block_specs(detail::load_json_file(path), path);
}

ModelConfig load_model_config(const std::string& path) {
    const nlohmann::json j = detail::load_json_file(path);
    detail::check_keys(j,
                       {"width_multiplier", "classifier_depth", "classifier_kernel",
                        "num_classes", "block_specs_id"},
                       path);
    ModelConfig cfg;
    cfg.width_multiplier = detail::get_double(j, "width_multiplier", path);
    cfg.classifier_depth = detail::get_int(j, "classifier_depth", path);
    cfg.classifier_kernel = detail::get_int(j, "classifier_kernel", path);
    cfg.num_classes = detail::get_int(j, "num_classes", path);
    cfg.block_specs_id = detail::get_string(j, "block_specs_id", path);
    validate_config(cfg);
    return cfg;
}

void to_json(nlohmann::json& j, const ModelConfig& cfg) {
    j = nlohmann::json{{"width_multiplier", cfg.width_multiplier},
                       {"classifier_depth", cfg.classifier_depth},
                       {"classifier_kernel", cfg.classifier_kernel},
                       {"num_classes", cfg.num_classes},
                       {"block_specs_id", cfg.block_specs_id}};
}

void from_json(const nlohmann::json& j, ModelConfig& cfg) {
    j.at("width_multiplier").get_to(cfg.width_multiplier);
    j.at("classifier_depth").get_to(cfg.classifier_depth);
    j.at("classifier_kernel").get_to(cfg.classifier_kernel);
    j.at("num_classes").get_to(cfg.num_classes);
    j.at("block_specs_id").get_to(cfg.block_specs_id);
}

SymbolicModel build_model(const BlockSpecs& specs, const ModelConfig& cfg, int input_h,
                          int input_w) {
    validate_config(cfg);
    if (specs.id != cfg.block_specs_id) {
        throw StructureError("config selects block specs '" + cfg.block_specs_id +
                             "' but '" + specs.id + "' was supplied");
    }
    SymbolicModel model;
    model.input_h = input_h;
    model.input_w = input_w;
    model.block_specs_id = specs.id;
    model.config = cfg;
    int channels = 3;
    for (const BlockEntry& entry : specs.layers) {
        LayerSpec layer;
        layer.kind = entry.kind;
        layer.kernel_h = entry.kernel;
        layer.kernel_w = entry.kernel;
        layer.stride = entry.stride;
        layer.pad = (entry.kernel - 1) / 2;  // SAME padding
        layer.in_channels = channels;
        layer.out_filters = entry.kind == LayerKind::separable
                                ? channels
                                : scale_channels(entry.out_channels, cfg.width_multiplier);
        channels = layer.out_filters;
        model.layers.push_back(layer);
    }
    std::vector<LayerSpec> head = build_fcn_head(channels, cfg);
    model.layers.insert(model.layers.end(), head.begin(), head.end());
    return model;
}

SymbolicModel build_model(const BlockSpecs& specs, const ModelConfig& cfg) {
    return build_model(specs, cfg, specs.input_h, specs.input_w);
}

} // namespace budgetseg
