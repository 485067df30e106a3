#include "budgetseg/cost_model.hpp"

#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace budgetseg {

std::string to_string(LayerKind kind) {
    switch (kind) {
    case LayerKind::separable: return "separable";
    case LayerKind::pointwise: return "pointwise";
    case LayerKind::classifier_1x1: return "classifier_1x1";
    case LayerKind::transposed_upsample: return "transposed_upsample";
    case LayerKind::standard: return "standard";
    }
    return "unknown";
}

LayerKind layer_kind_from_string(const std::string& name) {
    if (name == "separable") return LayerKind::separable;
    if (name == "pointwise") return LayerKind::pointwise;
    if (name == "classifier_1x1") return LayerKind::classifier_1x1;
    if (name == "transposed_upsample") return LayerKind::transposed_upsample;
    if (name == "standard") return LayerKind::standard;
    throw ParseError("unknown layer kind '" + name + "'");
}

namespace {

void require_positive(std::int64_t v, const char* name) {
    if (v < 1) {
        throw StructureError(std::string(name) + " must be >= 1, got " + std::to_string(v));
    }
}

} // namespace

std::int64_t mac_separable(std::int64_t out_h, std::int64_t out_w, std::int64_t c_i,
                           std::int64_t h_f, std::int64_t w_f) {
    require_positive(out_h, "out_h");
    require_positive(out_w, "out_w");
    require_positive(c_i, "c_i");
    require_positive(h_f, "h_f");
    require_positive(w_f, "w_f");
    return out_h * out_w * c_i * h_f * w_f;
}

std::int64_t mac_pointwise(std::int64_t out_h, std::int64_t out_w, std::int64_t c_i,
                           std::int64_t n_f) {
    require_positive(out_h, "out_h");
    require_positive(out_w, "out_w");
    require_positive(c_i, "c_i");
    require_positive(n_f, "n_f");
    return out_h * out_w * c_i * n_f;
}

std::int64_t mac_dsp(std::int64_t out_h, std::int64_t out_w, std::int64_t c_i, std::int64_t h_f,
                     std::int64_t w_f, std::int64_t n_f) {
    require_positive(out_h, "out_h");
    require_positive(out_w, "out_w");
    require_positive(c_i, "c_i");
    require_positive(h_f, "h_f");
    require_positive(w_f, "w_f");
    require_positive(n_f, "n_f");
    return out_h * out_w * c_i * (h_f * w_f + n_f);
}

double reduction_factor(std::int64_t h_f, std::int64_t w_f, std::int64_t n_f) {
    require_positive(h_f, "h_f");
    require_positive(w_f, "w_f");
    require_positive(n_f, "n_f");
    const double spatial = static_cast<double>(h_f) * static_cast<double>(w_f);
    return spatial * static_cast<double>(n_f) / (spatial + static_cast<double>(n_f));
}

UpsampleParams upsample_params(int factor) {
    if (factor < 2 || factor % 2 != 0) {
        throw StructureError("upsample factor must be even and >= 2, got " +
                             std::to_string(factor) + " (odd factors need fractional padding)");
    }
    return UpsampleParams{factor, factor, 2 * factor, factor / 2};
}

int transposed_out_size(int in, int stride, int kernel, int pad) {
    if (in < 1 || stride < 1 || kernel < 1 || pad < 0) {
        throw ShapeError("invalid transposed-convolution geometry");
    }
    const int out = (in - 1) * stride + kernel - 2 * pad;
    if (out < 1) {
        throw ShapeError("transposed output size " + std::to_string(out) + " is not positive");
    }
    return out;
}

namespace {

int forward_out_size(int in, int kernel, int stride, int pad, int index) {
    const int span = in + 2 * pad - kernel;
    if (span < 0) {
        throw StructureError("layer " + std::to_string(index) + ": kernel " +
                             std::to_string(kernel) + " exceeds padded input " +
                             std::to_string(in + 2 * pad));
    }
    return span / stride + 1;
}

} // namespace

CostReport network_cost(const std::vector<LayerSpec>& layers, int input_h, int input_w) {
    if (!layers.empty() && (input_h < 1 || input_w < 1)) {
        throw StructureError("network input dimensions must be >= 1");
    }
    CostReport report;
    int h = input_h;
    int w = input_w;
    int channels = layers.empty() ? 0 : layers.front().in_channels;
    std::int64_t downsampling = 1;  // cumulative stride of the layers walked so far
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const LayerSpec& layer = layers[i];
        const std::string where = "layer " + std::to_string(i);
        if (layer.kernel_h < 1 || layer.kernel_w < 1 || layer.stride < 1 || layer.pad < 0 ||
            layer.in_channels < 1 || layer.out_filters < 1) {
            throw StructureError(where + ": counts must be >= 1 and pad >= 0");
        }
        if (layer.in_channels != channels) {
            throw StructureError(where + ": in_channels " + std::to_string(layer.in_channels) +
                                 " breaks the chain, preceding output has " +
                                 std::to_string(channels) + " channels");
        }
        int out_h = 0;
        int out_w = 0;
        std::int64_t macs = 0;
        switch (layer.kind) {
        case LayerKind::separable:
            if (layer.out_filters != layer.in_channels) {
                throw StructureError(where + ": separable layers preserve channels, out_filters " +
                                     std::to_string(layer.out_filters) + " != in_channels " +
                                     std::to_string(layer.in_channels));
            }
            out_h = forward_out_size(h, layer.kernel_h, layer.stride, layer.pad, static_cast<int>(i));
            out_w = forward_out_size(w, layer.kernel_w, layer.stride, layer.pad, static_cast<int>(i));
            macs = mac_separable(out_h, out_w, layer.in_channels, layer.kernel_h, layer.kernel_w);
            channels = layer.in_channels;
            break;
        case LayerKind::pointwise:
        case LayerKind::classifier_1x1:
            if (layer.kind == LayerKind::classifier_1x1 &&
                (layer.kernel_h != 1 || layer.kernel_w != 1)) {
                throw StructureError(where + ": classifier_1x1 requires a 1x1 kernel");
            }
            out_h = forward_out_size(h, layer.kernel_h, layer.stride, layer.pad, static_cast<int>(i));
            out_w = forward_out_size(w, layer.kernel_w, layer.stride, layer.pad, static_cast<int>(i));
            macs = mac_pointwise(out_h, out_w, layer.in_channels, layer.out_filters);
            channels = layer.out_filters;
            break;
        case LayerKind::standard:
            out_h = forward_out_size(h, layer.kernel_h, layer.stride, layer.pad, static_cast<int>(i));
            out_w = forward_out_size(w, layer.kernel_w, layer.stride, layer.pad, static_cast<int>(i));
            macs = static_cast<std::int64_t>(out_h) * out_w * layer.in_channels * layer.kernel_h *
                   layer.kernel_w * layer.out_filters;
            channels = layer.out_filters;
            break;
        case LayerKind::transposed_upsample:
            if (downsampling != 32) {
                throw StructureError(where + ": cumulative stride before the upsampler is " +
                                     std::to_string(downsampling) + ", expected 32");
            }
            out_h = transposed_out_size(h, layer.stride, layer.kernel_h, layer.pad);
            out_w = transposed_out_size(w, layer.stride, layer.kernel_w, layer.pad);
            // scatter count: every input pixel multiplies the full kernel
            macs = static_cast<std::int64_t>(h) * w * layer.in_channels * layer.kernel_h *
                   layer.kernel_w * layer.out_filters;
            channels = layer.out_filters;
            break;
        }
        if (layer.kind != LayerKind::transposed_upsample) {
            downsampling *= layer.stride;
        }
        report.per_layer.push_back(LayerCost{static_cast<int>(i), out_h, out_w, macs});
        report.total_macs += macs;
        h = out_h;
        w = out_w;
    }
    report.total_ops = 2 * report.total_macs;
    report.megaops = static_cast<double>(report.total_macs) / 1e6;
    return report;
}

void to_json(nlohmann::json& j, const LayerCost& c) {
    j = nlohmann::json{{"index", c.index}, {"out_h", c.out_h}, {"out_w", c.out_w},
                       {"macs", c.macs}};
}

void from_json(const nlohmann::json& j, LayerCost& c) {
    j.at("index").get_to(c.index);
    j.at("out_h").get_to(c.out_h);
    j.at("out_w").get_to(c.out_w);
    j.at("macs").get_to(c.macs);
}

void to_json(nlohmann::json& j, const CostReport& r) {
    j = nlohmann::json{{"per_layer", r.per_layer},
                       {"total_macs", r.total_macs},
                       {"total_ops", r.total_ops},
                       {"megaops", r.megaops}};
}

void from_json(const nlohmann::json& j, CostReport& r) {
    j.at("per_layer").get_to(r.per_layer);
    j.at("total_macs").get_to(r.total_macs);
    j.at("total_ops").get_to(r.total_ops);
    j.at("megaops").get_to(r.megaops);
}

std::string format_cost_table(const std::vector<LayerSpec>& layers, const CostReport& report) {
    std::ostringstream os;
    os << std::left << std::setw(6) << "layer" << std::setw(21) << "kind" << std::setw(9)
       << "kernel" << std::setw(8) << "stride" << std::setw(8) << "c_in" << std::setw(8) << "n_f"
       << std::setw(12) << "out" << std::right << std::setw(16) << "macs" << '\n';
    for (const LayerCost& c : report.per_layer) {
        const LayerSpec& l = layers[static_cast<std::size_t>(c.index)];
        std::ostringstream kernel;
        kernel << l.kernel_h << 'x' << l.kernel_w;
        std::ostringstream out;
        out << c.out_h << 'x' << c.out_w;
        os << std::left << std::setw(6) << c.index << std::setw(21) << to_string(l.kind)
           << std::setw(9) << kernel.str() << std::setw(8) << l.stride << std::setw(8)
           << l.in_channels << std::setw(8) << l.out_filters << std::setw(12) << out.str()
           << std::right << std::setw(16) << c.macs << '\n';
    }
    os << "total_macs " << report.total_macs << "  total_ops " << report.total_ops
       << "  megaops " << std::setprecision(10) << report.megaops << '\n';
    return os.str();
}

} // namespace budgetseg
