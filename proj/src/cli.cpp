#include "budgetseg/cli.hpp"

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "budgetseg/architecture.hpp"
#include "budgetseg/bilinear.hpp"
#include "budgetseg/cost_model.hpp"
#include "budgetseg/optimizer.hpp"
#include "budgetseg/scenario.hpp"
#include "budgetseg/tensor.hpp"

namespace budgetseg {

namespace {

using nlohmann::json;

void write_text(const std::string& text, const std::string& path) {
    std::ofstream out(path);
    if (!out) {
        throw ParseError("cannot open '" + path + "' for writing");
    }
    out << text;
}

void emit_json(const json& j, const std::string& out_path, bool json_to_stdout,
               std::ostream& out) {
    const std::string text = j.dump(2) + "\n";
    if (!out_path.empty()) {
        write_text(text, out_path);
    }
    if (json_to_stdout || out_path.empty()) {
        out << text;
    }
}

Tensor random_tensor(int h, int w, int c, std::mt19937_64& rng) {
    std::vector<double> values(static_cast<std::size_t>(h) * w * c);
    for (double& v : values) {
        v = static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max()) * 2.0 - 1.0;
    }
    return Tensor(h, w, c, std::move(values));
}

Filterbank random_filterbank(FilterKind kind, int kh, int kw, int ci, int co,
                             std::mt19937_64& rng) {
    Filterbank f = Filterbank::make(kind, kh, kw, ci, co);
    for (double& v : f.weights) {
        v = static_cast<double>(rng()) / static_cast<double>(std::mt19937_64::max()) * 2.0 - 1.0;
    }
    return f;
}

// Runs every layer through the instrumented engine and checks the per-layer
// MAC counters and output shapes against the analytic report.
bool verify_model_against_engine(const SymbolicModel& model, const CostReport& report,
                                 std::uint64_t seed, std::ostream& out) {
    std::mt19937_64 rng(seed);
    Tensor activation = random_tensor(model.input_h, model.input_w,
                                      model.layers.empty() ? 1 : model.layers.front().in_channels,
                                      rng);
    bool all_ok = true;
    out << std::left << std::setw(6) << "layer" << std::setw(21) << "kind" << std::right
        << std::setw(16) << "analytic" << std::setw(16) << "engine" << "  status\n";
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const LayerSpec& layer = model.layers[i];
        MacCounter counter;
        Tensor next;
        switch (layer.kind) {
        case LayerKind::separable: {
            const Filterbank f = random_filterbank(FilterKind::depthwise, layer.kernel_h,
                                                   layer.kernel_w, layer.in_channels,
                                                   layer.in_channels, rng);
            next = conv_depthwise(activation, f, layer.stride, layer.pad, counter);
            break;
        }
        case LayerKind::pointwise:
        case LayerKind::classifier_1x1: {
            const Filterbank f = random_filterbank(FilterKind::pointwise, 1, 1,
                                                   layer.in_channels, layer.out_filters, rng);
            next = conv_pointwise(activation, f, counter);
            break;
        }
        case LayerKind::standard: {
            const Filterbank f = random_filterbank(FilterKind::standard, layer.kernel_h,
                                                   layer.kernel_w, layer.in_channels,
                                                   layer.out_filters, rng);
            next = conv_standard(activation, f, layer.stride, layer.pad, counter);
            break;
        }
        case LayerKind::transposed_upsample: {
            const Filterbank f = random_filterbank(FilterKind::transposed, layer.kernel_h,
                                                   layer.kernel_w, layer.in_channels,
                                                   layer.out_filters, rng);
            next = conv_transposed(activation, f, layer.stride, layer.pad, counter);
            break;
        }
        }
        const LayerCost& cost = report.per_layer[i];
        const bool macs_ok = counter.macs == static_cast<std::uint64_t>(cost.macs);
        const bool shape_ok = next.height() == cost.out_h && next.width() == cost.out_w;
        all_ok = all_ok && macs_ok && shape_ok;
        out << std::left << std::setw(6) << i << std::setw(21) << to_string(layer.kind)
            << std::right << std::setw(16) << cost.macs << std::setw(16) << counter.macs << "  "
            << (macs_ok && shape_ok ? "ok" : (macs_ok ? "SHAPE MISMATCH" : "MAC MISMATCH"))
            << '\n';
        activation = std::move(next);
    }
    out << (all_ok ? "engine counts match the analytic model\n"
                   : "engine counts DIVERGE from the analytic model\n");
    return all_ok;
}

struct SweepRow {
    std::string label;
    int n_f = 0;
    std::int64_t macs = 0;
};

std::vector<SweepRow> width_sweep(int h, int w, int c, int kernel, int base_depth) {
    const std::vector<std::pair<std::string, double>> multipliers = {
        {"8/1024", 8.0 / 1024.0}, {"0.25", 0.25}, {"0.5", 0.5},  {"0.75", 0.75},
        {"1.0", 1.0},             {"1.25", 1.25}, {"2.0", 2.0},
    };
    std::vector<SweepRow> rows;
    for (const auto& [label, m] : multipliers) {
        const int n_f = scale_channels(base_depth, m);
        rows.push_back(SweepRow{label, n_f, mac_dsp(h, w, c, kernel, kernel, n_f)});
    }
    return rows;
}

struct CostArgs {
    std::string model_path;
    std::string specs_path;
    std::string out_path;
    bool json_stdout = false;
    bool verify = false;
    bool sweep = false;
    int input_h = 0;
    int input_w = 0;
    int sweep_h = 4;
    int sweep_w = 4;
    int sweep_c = 5;
    int sweep_kernel = 3;
    int sweep_base_depth = 1024;
    std::uint64_t seed = 42;
};

int run_cost(const CostArgs& args, std::ostream& out) {
    if (args.sweep) {
        const auto rows =
            width_sweep(args.sweep_h, args.sweep_w, args.sweep_c, args.sweep_kernel,
                        args.sweep_base_depth);
        out << std::left << std::setw(18) << "width_multiplier" << std::setw(8) << "n_f"
            << std::right << std::setw(12) << "macs" << '\n';
        for (const SweepRow& row : rows) {
            out << std::left << std::setw(18) << row.label << std::setw(8) << row.n_f
                << std::right << std::setw(12) << row.macs << '\n';
        }
        return kExitOk;
    }
    const ModelConfig cfg = load_model_config(args.model_path);
    const BlockSpecs specs = load_block_specs(args.specs_path);
    const int h = args.input_h > 0 ? args.input_h : specs.input_h;
    const int w = args.input_w > 0 ? args.input_w : specs.input_w;
    const SymbolicModel model = build_model(specs, cfg, h, w);
    const CostReport report = network_cost(model.layers, model.input_h, model.input_w);
    if (args.json_stdout || !args.out_path.empty()) {
        emit_json(json(report), args.out_path, args.json_stdout, out);
    }
    if (!args.json_stdout) {
        out << format_cost_table(model.layers, report);
    }
    if (args.verify) {
        if (!verify_model_against_engine(model, report, args.seed, out)) {
            return kExitNumerical;
        }
    }
    return kExitOk;
}

struct SearchArgs {
    std::string scenario_path;
    std::vector<std::string> specs_paths = {"specs/ref_large.json", "specs/ref_small.json"};
    std::string method = "bo";
    std::uint64_t seed = 42;
    int max_iters = 0;  // 0: use the scenario's cap
    std::string out_path;
    bool json_stdout = false;
};

int run_search(const SearchArgs& args, std::ostream& out) {
    ScenarioSpec scenario = load_scenario(args.scenario_path);
    if (args.max_iters > 0) {
        scenario.max_iterations = args.max_iters;
    }
    std::vector<std::string> ids;
    std::map<std::string, BlockSpecs> by_id;
    for (const std::string& path : args.specs_paths) {
        BlockSpecs specs = load_block_specs(path);
        if (by_id.count(specs.id) != 0) {
            throw ParseError("duplicate block specs id '" + specs.id + "'");
        }
        ids.push_back(specs.id);
        by_id.emplace(specs.id, std::move(specs));
    }
    const std::vector<SearchPoint> grid = build_search_grid(ids, scenario.num_classes);
    const CostFn cost_fn = [&](const ModelConfig& cfg) {
        const SymbolicModel model =
            build_model(by_id.at(cfg.block_specs_id), cfg, scenario.input_h, scenario.input_w);
        return network_cost(model.layers, model.input_h, model.input_w).megaops;
    };
    const SearchResult result = args.method == "exhaustive"
                                    ? exhaustive_search(scenario, grid, cost_fn)
                                    : bayesian_search(scenario, grid, cost_fn, args.seed);
    if (args.json_stdout || !args.out_path.empty()) {
        emit_json(json(result), args.out_path, args.json_stdout, out);
    }
    if (!args.json_stdout) {
        out << format_search_summary(scenario, result);
    }
    return result.best ? kExitOk : kExitNoFeasible;
}

struct KernelsArgs {
    int classes = 1;
    int size = 64;
    std::string mode = "full";
    std::string out_path;
};

int run_kernels(const KernelsArgs& args, std::ostream& out) {
    const BankMode mode = args.mode == "diagonal" ? BankMode::diagonal : BankMode::full;
    const KernelBank bank = create_bilinear_kernels(args.classes, args.size, args.size, mode);
    if (args.out_path.empty()) {
        write_kernel_csv(bank, out);
    } else {
        std::ofstream file(args.out_path);
        if (!file) {
            throw ParseError("cannot open '" + args.out_path + "' for writing");
        }
        write_kernel_csv(bank, file);
    }
    return kExitOk;
}

struct UpsampleArgs {
    std::string input_path;
    int factor = 2;
    std::string mode = "diagonal";
    bool check = false;
    std::string out_path;
};

int run_upsample(const UpsampleArgs& args, std::ostream& out, std::ostream& err) {
    const Tensor input = read_tensor_csv(args.input_path);
    const UpsampleParams params = upsample_params(args.factor);
    const BankMode mode = args.mode == "full" ? BankMode::full : BankMode::diagonal;
    const KernelBank bank =
        create_bilinear_kernels(input.channels(), params.kernel, params.kernel, mode);
    const Filterbank f = to_filterbank(bank);
    MacCounter counter;
    const Tensor result = conv_transposed(input, f, params.stride, params.pad, counter);
    if (args.out_path.empty()) {
        write_tensor_csv(result, out);
    } else {
        write_tensor_csv(result, args.out_path);
    }
    if (args.check) {
        const Tensor oracle = bilinear_upsample_reference(input, args.factor);
        const int margin = upsample_interior_margin(args.factor);
        double max_dev = 0.0;
        for (int y = margin; y < result.height() - margin; ++y) {
            for (int x = margin; x < result.width() - margin; ++x) {
                for (int c = 0; c < result.channels(); ++c) {
                    max_dev = std::max(max_dev, std::abs(result.at(y, x, c) - oracle.at(y, x, c)));
                }
            }
        }
        err << "max_abs_deviation " << std::setprecision(3) << std::scientific << max_dev
            << " (interior, margin " << margin << ")\n";
    }
    return kExitOk;
}

struct ValidateArgs {
    std::string model_path;
    std::string specs_path;
    int input_h = 0;
    int input_w = 0;
    std::uint64_t seed = 42;
};

int run_validate(const ValidateArgs& args, std::ostream& out) {
    const ModelConfig cfg = load_model_config(args.model_path);
    const BlockSpecs specs = load_block_specs(args.specs_path);
    const int h = args.input_h > 0 ? args.input_h : specs.input_h;
    const int w = args.input_w > 0 ? args.input_w : specs.input_w;
    const SymbolicModel model = build_model(specs, cfg, h, w);
    const CostReport report = network_cost(model.layers, model.input_h, model.input_w);
    return verify_model_against_engine(model, report, args.seed, out) ? kExitOk
                                                                      : kExitNumerical;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"budget-aware configurator for depthwise-separable segmentation networks"};
    app.require_subcommand(1);

    CostArgs cost_args;
    CLI::App* cost = app.add_subcommand("cost", "analytic MAC/ops accounting for a model");
    cost->add_option("--model", cost_args.model_path, "model config JSON");
    cost->add_option("--specs", cost_args.specs_path, "block specs JSON");
    cost->add_option("--input-h", cost_args.input_h, "override input height");
    cost->add_option("--input-w", cost_args.input_w, "override input width");
    cost->add_flag("--verify", cost_args.verify, "cross-check against the instrumented engine");
    cost->add_flag("--json", cost_args.json_stdout, "emit JSON instead of the table");
    cost->add_option("--out", cost_args.out_path, "write the JSON report to a file");
    cost->add_flag("--sweep", cost_args.sweep, "width-multiplier sweep of the example layer");
    cost->add_option("--sweep-height", cost_args.sweep_h, "sweep feature-map height");
    cost->add_option("--sweep-width", cost_args.sweep_w, "sweep feature-map width");
    cost->add_option("--sweep-channels", cost_args.sweep_c, "sweep input channels");
    cost->add_option("--sweep-kernel", cost_args.sweep_kernel, "sweep depthwise kernel size");
    cost->add_option("--sweep-base-depth", cost_args.sweep_base_depth, "sweep base filter count");
    cost->add_option("--seed", cost_args.seed, "PRNG seed for --verify data");

    SearchArgs search_args;
    CLI::App* search = app.add_subcommand("search", "budget search over the configuration grid");
    search->add_option("scenario", search_args.scenario_path, "scenario JSON")->required();
    search->add_option("--specs", search_args.specs_paths, "block specs JSON files");
    search->add_option("--method", search_args.method, "bo or exhaustive")
        ->check(CLI::IsMember({"bo", "exhaustive"}));
    search->add_option("--seed", search_args.seed, "PRNG seed");
    search->add_option("--max-iters", search_args.max_iters, "iteration cap override");
    search->add_flag("--json", search_args.json_stdout, "emit JSON instead of the summary");
    search->add_option("--out", search_args.out_path, "write the JSON result to a file");

    KernelsArgs kernels_args;
    CLI::App* kernels = app.add_subcommand("kernels", "dump bilinear upsampling kernels");
    kernels->add_option("--classes", kernels_args.classes, "number of classes")->required();
    kernels->add_option("--size", kernels_args.size, "kernel side length");
    kernels->add_option("--mode", kernels_args.mode, "full or diagonal")
        ->check(CLI::IsMember({"full", "diagonal"}));
    kernels->add_option("--out", kernels_args.out_path, "output CSV path");

    UpsampleArgs upsample_args;
    CLI::App* upsample =
        app.add_subcommand("upsample", "bilinear upsampling via transposed convolution");
    upsample->add_option("input", upsample_args.input_path, "input tensor CSV")->required();
    upsample->add_option("--factor", upsample_args.factor, "even upscale factor")->required();
    upsample->add_option("--mode", upsample_args.mode, "full or diagonal kernel bank")
        ->check(CLI::IsMember({"full", "diagonal"}));
    upsample->add_flag("--check", upsample_args.check,
                       "compare against the interpolation oracle");
    upsample->add_option("--out", upsample_args.out_path, "output CSV path");

    ValidateArgs validate_args;
    CLI::App* validate =
        app.add_subcommand("validate", "run the engine against the analytic cost model");
    validate->add_option("--model", validate_args.model_path, "model config JSON")->required();
    validate->add_option("--specs", validate_args.specs_path, "block specs JSON")->required();
    validate->add_option("--input-h", validate_args.input_h, "override input height");
    validate->add_option("--input-w", validate_args.input_w, "override input width");
    validate->add_option("--seed", validate_args.seed, "PRNG seed for layer data");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInputError;
    }

    try {
        if (cost->parsed()) {
            if (!cost_args.sweep && (cost_args.model_path.empty() || cost_args.specs_path.empty())) {
                err << "cost: either --sweep or both --model and --specs are required\n";
                return kExitInputError;
            }
            return run_cost(cost_args, out);
        }
        if (search->parsed()) {
            return run_search(search_args, out);
        }
        if (kernels->parsed()) {
            return run_kernels(kernels_args, out);
        }
        if (upsample->parsed()) {
            return run_upsample(upsample_args, out, err);
        }
        if (validate->parsed()) {
            return run_validate(validate_args, out);
        }
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const StructureError& e) {
        err << "structural error: " << e.what() << '\n';
        return kExitInputError;
    } catch (const ShapeError& e) {
        err << "shape error: " << e.what() << '\n';
        return kExitInputError;
    }
    return kExitInputError;
}

} // namespace budgetseg
