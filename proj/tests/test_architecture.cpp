#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <nlohmann/json.hpp>

#include "budgetseg/architecture.hpp"
#include "test_util.hpp"

using namespace budgetseg;

TEST_CASE("scale_channels") {
    CHECK(scale_channels(1024, 0.25) == 256);
    CHECK(scale_channels(1024, 1.0) == 1024);
    CHECK(scale_channels(1024, 1.25) == 1280);
    CHECK(scale_channels(1024, 8.0 / 1024.0) == 8);
    CHECK(scale_channels(8, 0.25) == 8);    // floor at 8
    CHECK(scale_channels(96, 0.75) == 72);  // already a multiple of 8
    CHECK(scale_channels(100, 0.75) == 72); // 75 rounds to the nearest multiple of 8
    CHECK_THROWS_AS(scale_channels(0, 1.0), StructureError);
}

TEST_CASE("build_fcn_head emits the four head layers in order") {
    ModelConfig cfg{1.0, 1024, 3, 7, "x"};
    const std::vector<LayerSpec> head = build_fcn_head(960, cfg);
    REQUIRE(head.size() == 4);

    CHECK(head[0].kind == LayerKind::separable);
    CHECK(head[0].kernel_h == 3);
    CHECK(head[0].pad == 1);
    CHECK(head[0].in_channels == 960);
    CHECK(head[0].out_filters == 960);

    CHECK(head[1].kind == LayerKind::pointwise);
    CHECK(head[1].in_channels == 960);
    CHECK(head[1].out_filters == 1024);

    CHECK(head[2].kind == LayerKind::classifier_1x1);
    CHECK(head[2].kernel_h == 1);
    CHECK(head[2].in_channels == 1024);
    CHECK(head[2].out_filters == 7);

    CHECK(head[3].kind == LayerKind::transposed_upsample);
    CHECK(head[3].kernel_h == 64);
    CHECK(head[3].stride == 32);
    CHECK(head[3].pad == 16);
    CHECK(head[3].in_channels == 7);
    CHECK(head[3].out_filters == 7);
}

TEST_CASE("head separable cost at a 16x32 feature map follows the closed form") {
    ModelConfig cfg{1.0, 512, 11, 7, "x"};
    const std::vector<LayerSpec> head = build_fcn_head(288, cfg);
    CHECK(mac_separable(16, 32, head[0].in_channels, head[0].kernel_h, head[0].kernel_w) ==
          16LL * 32 * 288 * 121);
}

TEST_CASE("two-class head keeps classifier and upsampler at two channels") {
    ModelConfig cfg{1.25, 2048, 7, 2, "x"};
    const std::vector<LayerSpec> head = build_fcn_head(720, cfg);
    CHECK(head[2].out_filters == 2);
    CHECK(head[3].in_channels == 2);
    CHECK(head[3].out_filters == 2);
}

TEST_CASE("off-grid hyperparameters are rejected") {
    CHECK_THROWS_AS(build_fcn_head(64, ModelConfig{0.3, 1024, 3, 7, "x"}), StructureError);
    CHECK_THROWS_AS(build_fcn_head(64, ModelConfig{1.0, 800, 3, 7, "x"}), StructureError);
    CHECK_THROWS_AS(build_fcn_head(64, ModelConfig{1.0, 1024, 4, 7, "x"}), StructureError);
    CHECK_THROWS_AS(build_fcn_head(64, ModelConfig{1.0, 1024, 3, 0, "x"}), StructureError);
}

namespace {

BlockSpecs load_ref(const char* file) {
    return load_block_specs(testutil::source_path(file));
}

} // namespace

TEST_CASE("shipped block specs load and chain") {
    const BlockSpecs large = load_ref("specs/ref_large.json");
    CHECK(large.id == "ref_large");
    CHECK(large.cumulative_stride == 32);
    CHECK(large.input_h == 512);
    CHECK(large.layers.size() == 27);
    const BlockSpecs small = load_ref("specs/ref_small.json");
    CHECK(small.id == "ref_small");
    CHECK(small.layers.size() == 21);
}

TEST_CASE("block specs schema violations carry the field path") {
    auto parse = [](const char* text) {
        return parse_block_specs(nlohmann::json::parse(text), "inline");
    };
    // unknown field
    CHECK_THROWS_AS(parse(R"({"id":"a","input":{"h":32,"w":32},"cumulative_stride":32,
        "layers":[{"kind":"standard","kernel":3,"stride":32,"out_channels":8}],"extra":1})"),
                    ParseError);
    // declared stride disagrees with the product
    CHECK_THROWS_AS(parse(R"({"id":"a","input":{"h":32,"w":32},"cumulative_stride":32,
        "layers":[{"kind":"standard","kernel":3,"stride":16,"out_channels":8}]})"),
                    ParseError);
    // stride 16 backbones are rejected outright
    CHECK_THROWS_AS(parse(R"({"id":"a","input":{"h":32,"w":32},"cumulative_stride":16,
        "layers":[{"kind":"standard","kernel":3,"stride":16,"out_channels":8}]})"),
                    ParseError);
    // even forward kernel
    CHECK_THROWS_AS(parse(R"({"id":"a","input":{"h":32,"w":32},"cumulative_stride":32,
        "layers":[{"kind":"standard","kernel":4,"stride":32,"out_channels":8}]})"),
                    ParseError);
    // separable entry that pretends to change the channel count
    try {
        parse(R"({"id":"a","input":{"h":32,"w":32},"cumulative_stride":32,"layers":[
            {"kind":"standard","kernel":3,"stride":32,"out_channels":8},
            {"kind":"separable","kernel":3,"stride":1,"out_channels":16}]})");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("/layers/1") != std::string::npos);
    }
}

TEST_CASE("build_model is deterministic and respects the width multiplier") {
    const BlockSpecs specs = load_ref("specs/ref_large.json");
    ModelConfig cfg{1.0, 1024, 3, 7, "ref_large"};
    const SymbolicModel a = build_model(specs, cfg);
    const SymbolicModel b = build_model(specs, cfg);
    CHECK(a == b);
    CHECK(a.input_h == 512);
    CHECK(a.layers.size() == specs.layers.size() + 4);

    const CostReport narrow =
        network_cost(build_model(specs, ModelConfig{0.25, 1024, 3, 7, "ref_large"}).layers, 512,
                     1024);
    const CostReport wide = network_cost(a.layers, 512, 1024);
    CHECK(narrow.total_macs < wide.total_macs);

    CHECK_THROWS_AS(build_model(specs, ModelConfig{1.0, 1024, 3, 7, "ref_small"}),
                    StructureError);
}

TEST_CASE("head shape invariant holds on every grid point") {
    const BlockSpecs large = load_ref("specs/ref_large.json");
    const BlockSpecs small = load_ref("specs/ref_small.json");
    for (const BlockSpecs* specs : {&large, &small}) {
        for (double m : grids::width_multiplier) {
            for (int d : grids::classifier_depth) {
                for (int k : grids::classifier_kernel) {
                    const ModelConfig cfg{m, d, k, 7, specs->id};
                    const SymbolicModel model = build_model(*specs, cfg);
                    REQUIRE(model.layers.size() >= 4);
                    const auto* tail = &model.layers[model.layers.size() - 4];
                    CHECK(tail[0].kind == LayerKind::separable);
                    CHECK(tail[0].kernel_h == k);
                    CHECK(tail[1].kind == LayerKind::pointwise);
                    CHECK(tail[1].out_filters == d);
                    CHECK(tail[2].kind == LayerKind::classifier_1x1);
                    CHECK(tail[2].out_filters == 7);
                    CHECK(tail[3].kind == LayerKind::transposed_upsample);
                    CHECK(tail[3].kernel_h == 64);
                    CHECK(tail[3].stride == 32);
                    CHECK(tail[3].pad == 16);
                }
            }
        }
    }
}

TEST_CASE("cost is monotone in each knob") {
    const BlockSpecs specs = load_ref("specs/ref_small.json");
    auto megaops = [&](double m, int d, int k) {
        const SymbolicModel model = build_model(specs, ModelConfig{m, d, k, 7, "ref_small"});
        return network_cost(model.layers, model.input_h, model.input_w).total_macs;
    };
    for (std::size_t i = 1; i < grids::width_multiplier.size(); ++i) {
        CHECK(megaops(grids::width_multiplier[i - 1], 1024, 5) <=
              megaops(grids::width_multiplier[i], 1024, 5));
    }
    for (std::size_t i = 1; i < grids::classifier_depth.size(); ++i) {
        CHECK(megaops(0.75, grids::classifier_depth[i - 1], 5) <=
              megaops(0.75, grids::classifier_depth[i], 5));
    }
    for (std::size_t i = 1; i < grids::classifier_kernel.size(); ++i) {
        CHECK(megaops(0.75, 1024, grids::classifier_kernel[i - 1]) <=
              megaops(0.75, 1024, grids::classifier_kernel[i]));
    }
}

TEST_CASE("the upsampler restores the input resolution") {
    const BlockSpecs specs = load_ref("specs/ref_large.json");
    for (const auto [h, w] : {std::pair{64, 64}, std::pair{128, 256}, std::pair{512, 1024}}) {
        const SymbolicModel model =
            build_model(specs, ModelConfig{1.0, 512, 3, 2, "ref_large"}, h, w);
        const CostReport report = network_cost(model.layers, h, w);
        CHECK(report.per_layer.back().out_h == h);
        CHECK(report.per_layer.back().out_w == w);
    }
}

TEST_CASE("model config files are strict") {
    CHECK_THROWS_AS(load_model_config(testutil::source_path("specs/ref_large.json")),
                    ParseError);
}
