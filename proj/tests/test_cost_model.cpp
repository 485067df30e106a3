#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "budgetseg/architecture.hpp"
#include "budgetseg/cost_model.hpp"

using namespace budgetseg;

TEST_CASE("mac_separable") {
    CHECK(mac_separable(4, 4, 5, 3, 3) == 720);
    CHECK(mac_separable(1, 1, 1, 1, 1) == 1);
    CHECK_THROWS_AS(mac_separable(0, 4, 5, 3, 3), StructureError);
}

TEST_CASE("mac_pointwise") {
    CHECK(mac_pointwise(4, 4, 5, 8) == 640);
    CHECK(mac_pointwise(4, 4, 5, 1024) == 81920);
    CHECK(mac_separable(4, 4, 5, 3, 3) + mac_pointwise(4, 4, 5, 1024) == 82640);
}

TEST_CASE("mac_dsp reproduces the width-multiplier table") {
    const struct {
        double multiplier;
        std::int64_t expected;
    } rows[] = {
        {8.0 / 1024.0, 1360}, {0.25, 21200}, {0.5, 41680},   {0.75, 62160},
        {1.0, 82640},         {1.25, 103120}, {2.0, 164560},
    };
    for (const auto& row : rows) {
        const int n_f = scale_channels(1024, row.multiplier);
        CHECK(mac_dsp(4, 4, 5, 3, 3, n_f) == row.expected);
    }
}

TEST_CASE("mac_dsp additivity holds exactly on random tuples") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 200; ++trial) {
        const std::int64_t h = 1 + static_cast<std::int64_t>(rng() % 32);
        const std::int64_t w = 1 + static_cast<std::int64_t>(rng() % 32);
        const std::int64_t c = 1 + static_cast<std::int64_t>(rng() % 64);
        const std::int64_t k = 1 + static_cast<std::int64_t>(rng() % 11);
        const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 2048);
        CHECK(mac_dsp(h, w, c, k, k, n) == mac_separable(h, w, c, k, k) + mac_pointwise(h, w, c, n));
    }
}

TEST_CASE("near-linear width scaling bound") {
    const double alphas[] = {0.25, 0.5, 0.75, 1.0, 1.25, 2.0};
    for (std::int64_t n_f : {256LL, 512LL, 1024LL, 2048LL}) {
        for (double a : alphas) {
            const auto scaled = static_cast<std::int64_t>(a * static_cast<double>(n_f));
            const double ratio = static_cast<double>(mac_dsp(4, 4, 5, 3, 3, scaled)) /
                                 static_cast<double>(mac_dsp(4, 4, 5, 3, 3, n_f));
            CHECK(std::abs(ratio - a) <= 9.0 / static_cast<double>(n_f) + 1e-12);
        }
    }
}

TEST_CASE("reduction_factor") {
    CHECK(reduction_factor(3, 3, 1024) == doctest::Approx(9216.0 / 1033.0).epsilon(1e-12));
    CHECK(reduction_factor(1, 1, 1) == doctest::Approx(0.5));
    double prev = 0.0;
    for (std::int64_t n = 1; n <= 1 << 20; n *= 2) {
        const double r = reduction_factor(3, 3, n);
        CHECK(r > prev);   // monotone in n_f
        CHECK(r < 9.0);    // bounded by the kernel area
        prev = r;
    }
    CHECK(reduction_factor(3, 3, 1 << 20) == doctest::Approx(9.0).epsilon(1e-4));
}

TEST_CASE("upsample_params") {
    CHECK(upsample_params(32) == UpsampleParams{32, 32, 64, 16});
    CHECK(upsample_params(2) == UpsampleParams{2, 2, 4, 1});
    CHECK_THROWS_AS(upsample_params(3), StructureError);
    CHECK_THROWS_AS(upsample_params(0), StructureError);
    // the parameters invert the downsampling exactly: o = x * i
    for (int x : {2, 4, 8, 16, 32}) {
        const UpsampleParams p = upsample_params(x);
        for (int i = 1; i <= 10; ++i) {
            CHECK(transposed_out_size(i, p.stride, p.kernel, p.pad) == x * i);
        }
    }
    CHECK(transposed_out_size(7, 4, 8, 2) == 28);
}

TEST_CASE("transposed_out_size") {
    CHECK(transposed_out_size(2, 1, 3, 0) == 4);
    CHECK(transposed_out_size(1, 1, 1, 0) == 1);
    CHECK(transposed_out_size(5, 2, 4, 1) == 10);
    CHECK_THROWS_AS(transposed_out_size(1, 1, 1, 1), ShapeError);
}

namespace {

std::vector<LayerSpec> example_dsp_pair() {
    return {
        LayerSpec{LayerKind::separable, 3, 3, 1, 1, 5, 5},
        LayerSpec{LayerKind::pointwise, 1, 1, 1, 0, 5, 1024},
    };
}

} // namespace

TEST_CASE("network_cost: single separable+pointwise pair on a 4x4 map") {
    const CostReport report = network_cost(example_dsp_pair(), 4, 4);
    CHECK(report.total_macs == 82640);
    CHECK(report.total_ops == 2 * 82640);
    CHECK(report.megaops == doctest::Approx(0.08264));
    REQUIRE(report.per_layer.size() == 2);
    CHECK(report.per_layer[0].macs == 720);
    CHECK(report.per_layer[1].macs == 81920);
}

TEST_CASE("network_cost: empty layer list") {
    const CostReport report = network_cost({}, 4, 4);
    CHECK(report.total_macs == 0);
    CHECK(report.total_ops == 0);
    CHECK(report.per_layer.empty());
}

TEST_CASE("network_cost: chain break names the offending layer") {
    std::vector<LayerSpec> layers = example_dsp_pair();
    layers[1].in_channels = 6;
    try {
        network_cost(layers, 4, 4);
        FAIL("expected StructureError");
    } catch (const StructureError& e) {
        CHECK(std::string(e.what()).find("layer 1") != std::string::npos);
    }
}

TEST_CASE("network_cost: upsampler requires cumulative stride 32") {
    std::vector<LayerSpec> layers = {
        LayerSpec{LayerKind::standard, 3, 3, 2, 1, 3, 8},
        LayerSpec{LayerKind::transposed_upsample, 64, 64, 32, 16, 8, 2},
    };
    CHECK_THROWS_AS(network_cost(layers, 64, 64), StructureError);

    // five stride-2 stages in front make it legal
    std::vector<LayerSpec> ok;
    int c = 3;
    for (int i = 0; i < 5; ++i) {
        ok.push_back(LayerSpec{LayerKind::standard, 3, 3, 2, 1, c, 8});
        c = 8;
    }
    ok.push_back(LayerSpec{LayerKind::transposed_upsample, 64, 64, 32, 16, 8, 2});
    const CostReport report = network_cost(ok, 64, 64);
    CHECK(report.per_layer.back().out_h == 64);
    CHECK(report.per_layer.back().out_w == 64);
}

TEST_CASE("network_cost: total is the sum of per-layer counts") {
    std::vector<LayerSpec> layers = example_dsp_pair();
    layers.push_back(LayerSpec{LayerKind::classifier_1x1, 1, 1, 1, 0, 1024, 7});
    const CostReport report = network_cost(layers, 4, 4);
    std::int64_t sum = 0;
    for (const LayerCost& c : report.per_layer) sum += c.macs;
    CHECK(report.total_macs == sum);
    CHECK(report.total_ops == 2 * sum);
}

TEST_CASE("CostReport JSON round-trips to an equal value") {
    std::vector<LayerSpec> layers = example_dsp_pair();
    const CostReport report = network_cost(layers, 4, 4);
    const nlohmann::json j = report;
    CHECK(j.contains("per_layer"));
    CHECK(j.contains("total_macs"));
    CHECK(j.contains("total_ops"));
    CHECK(j.contains("megaops"));
    const auto back = nlohmann::json::parse(j.dump()).get<CostReport>();
    CHECK(back == report);
}
