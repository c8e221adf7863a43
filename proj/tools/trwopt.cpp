// Command-line front end for tensor-ring decomposition and completion.
//
// Subcommands: synth, mask, decompose, complete, metrics. Exit codes:
// 0 success, 2 validation error, 3 I/O error, 4 numerical abort.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "trwopt/trwopt.hpp"

namespace fs = std::filesystem;
using trwopt::DenseTensor;

namespace {

std::vector<std::size_t> parse_csv_sizes(const std::string& text, const char* what) {
    std::vector<std::size_t> out;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t comma = text.find(',', pos);
        const std::string item = text.substr(pos, comma == std::string::npos ? comma : comma - pos);
        if (item.empty())
            throw std::invalid_argument(std::string(what) + ": empty entry in '" + text + "'");
        std::size_t value = 0;
        for (char c : item) {
            if (c < '0' || c > '9')
                throw std::invalid_argument(std::string(what) + ": '" + item +
                                            "' is not a positive integer");
            value = value * 10 + std::size_t(c - '0');
            if (value > (std::size_t(1) << 40))
                throw std::invalid_argument(std::string(what) + ": value too large");
        }
        out.push_back(value);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

// "u1,u2,.../v1,v2,..." with the channel count taken from the image.
trwopt::TensorizationPlan parse_plan(const std::string& text, std::size_t channels) {
    const std::size_t slash = text.find('/');
    if (slash == std::string::npos)
        throw std::invalid_argument("--plan expects 'u1,u2,.../v1,v2,...'");
    trwopt::TensorizationPlan plan;
    plan.row_factors = parse_csv_sizes(text.substr(0, slash), "--plan");
    plan.col_factors = parse_csv_sizes(text.substr(slash + 1), "--plan");
    plan.channels = channels;
    plan.validate();
    return plan;
}

// Single value broadcasts to every mode; a length-N list is taken as is; a
// length-N+1 list must close the ring explicitly.
std::vector<std::size_t> resolve_ranks(const std::string& text, std::size_t order) {
    std::vector<std::size_t> ranks = parse_csv_sizes(text, "--ranks");
    for (std::size_t r : ranks)
        if (r == 0) throw std::invalid_argument("--ranks: ranks must be >= 1");
    if (ranks.size() == 1) return std::vector<std::size_t>(order, ranks[0]);
    if (ranks.size() == order) return ranks;
    if (ranks.size() == order + 1) {
        if (ranks.back() != ranks.front())
            throw std::invalid_argument(
                "--ranks: explicit closure entry must equal the first rank");
        ranks.pop_back();
        return ranks;
    }
    throw std::invalid_argument("--ranks: expected 1, " + std::to_string(order) + " or " +
                                std::to_string(order + 1) + " values for a " +
                                std::to_string(order) + "-mode tensor");
}

bool sniff_ppm(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw trwopt::io_error("cannot open " + path.string());
    char magic[2] = {0, 0};
    is.read(magic, 2);
    return magic[0] == 'P' && magic[1] == '6';
}

struct LoadedInput {
    DenseTensor tensor;
    bool is_image = false;
};

LoadedInput load_input(const fs::path& path) {
    if (sniff_ppm(path)) return {trwopt::read_ppm(path), true};
    return {trwopt::read_tensor(path), false};
}

double observed_psnr(const DenseTensor& data, const DenseTensor& weight,
                     const DenseTensor& recon, bool clip) {
    const std::size_t count = trwopt::observed_count(weight);
    if (count == 0) return std::numeric_limits<double>::infinity();
    double acc = 0.0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        double x = recon[i];
        if (clip) x = std::clamp(x, 0.0, 255.0);
        const double r = weight[i] * (data[i] - x);
        acc += r * r;
    }
    const double m = acc / double(count);
    if (m == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / m);
}

void print_run_summary(const trwopt::CompletionReport& report, double psnr_value) {
    std::cout << "stop_reason=" << trwopt::stop_reason_name(report.stop_reason)
              << " iterations=" << report.iterations.size() << " rse=" << report.final_rse
              << " psnr=" << psnr_value << "\n";
}

struct OptimizerFlags {
    int max_iters = 500;
    double tol = 1e-6;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
        cmd->add_option("--tol", tol, "Relative-change stopping tolerance")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for masks and core initialization")
            ->capture_default_str();
    }

    trwopt::OptimizerConfig config() const {
        trwopt::OptimizerConfig cfg;
        cfg.max_iters = max_iters;
        cfg.rel_tol = tol;
        cfg.seed = seed;
        return cfg;
    }
};

struct CompleteArgs {
    std::string input, output, out_image, out_mask, mask_path, ranks, plan, report;
    double missing_rate = -1.0;
    OptimizerFlags opt;
};

int run_complete(const CompleteArgs& a) {
    LoadedInput in = load_input(a.input);
    if (!a.out_image.empty() && !in.is_image &&
        (in.tensor.order() != 3 || in.tensor.dims()[2] != 3))
        throw std::invalid_argument("--out-image requires a U x V x 3 input");

    std::optional<trwopt::TensorizationPlan> plan;
    if (!a.plan.empty()) {
        if (in.tensor.order() != 3)
            throw std::invalid_argument("--plan requires a 3-mode (image-like) input");
        plan = parse_plan(a.plan, in.tensor.dims()[2]);
    }
    DenseTensor work = plan ? trwopt::tensorize_visual(in.tensor, *plan) : in.tensor;

    DenseTensor weight;
    if (!a.mask_path.empty()) {
        DenseTensor m = trwopt::read_mask(a.mask_path);
        if (m.dims() == in.tensor.dims())
            weight = plan ? trwopt::tensorize_visual(m, *plan) : std::move(m);
        else if (m.dims() == work.dims())
            weight = std::move(m);
        else
            throw std::invalid_argument("mask dims match neither the input nor the plan output");
    } else {
        weight = trwopt::gen_mask_random(work.dims(), a.missing_rate, a.opt.seed);
    }

    DenseTensor observed = trwopt::hadamard(work, weight);
    auto [cores, report] = trwopt::optimize(observed, weight, resolve_ranks(a.ranks, work.order()),
                                            a.opt.config());

    DenseTensor completed_work = trwopt::complete(observed, weight, cores);
    DenseTensor completed =
        plan ? trwopt::detensorize_visual(completed_work, *plan) : completed_work;
    trwopt::write_tensor(a.output, completed);
    if (in.is_image || !a.out_image.empty()) {
        fs::path img = a.out_image.empty() ? fs::path(a.output).replace_extension(".ppm")
                                           : fs::path(a.out_image);
        trwopt::write_ppm(img, completed);
    }

    // Persist the mask in input space so the run can be replayed with --mask.
    DenseTensor mask_out = plan ? trwopt::detensorize_visual(weight, *plan) : weight;
    fs::path mask_path = a.out_mask.empty() ? fs::path(a.output).replace_extension(".mask.trt1")
                                            : fs::path(a.out_mask);
    trwopt::write_mask(mask_path, mask_out);

    const double psnr_value =
        observed_psnr(observed, weight, trwopt::reconstruct_full(cores), in.is_image);
    if (!a.report.empty()) trwopt::write_report(a.report, report, psnr_value);
    print_run_summary(report, psnr_value);
    return 0;
}

struct DecomposeArgs {
    std::string input, output, ranks, plan, report;
    OptimizerFlags opt;
};

int run_decompose(const DecomposeArgs& a) {
    LoadedInput in = load_input(a.input);

    std::optional<trwopt::TensorizationPlan> plan;
    if (!a.plan.empty()) {
        if (in.tensor.order() != 3)
            throw std::invalid_argument("--plan requires a 3-mode (image-like) input");
        plan = parse_plan(a.plan, in.tensor.dims()[2]);
    }
    DenseTensor work = plan ? trwopt::tensorize_visual(in.tensor, *plan) : in.tensor;

    DenseTensor weight = DenseTensor::filled(work.dims(), 1.0);
    auto [cores, report] = trwopt::optimize(work, weight, resolve_ranks(a.ranks, work.order()),
                                            a.opt.config());
    trwopt::write_tr_cores(a.output, cores);

    const double psnr_value =
        observed_psnr(work, weight, trwopt::reconstruct_full(cores), in.is_image);
    if (!a.report.empty()) trwopt::write_report(a.report, report, psnr_value);
    print_run_summary(report, psnr_value);
    return 0;
}

struct SynthArgs {
    std::string dims, output, form = "literal";
    double scale = 0.0;
};

int run_synth(const SynthArgs& a) {
    const std::vector<std::size_t> dims = parse_csv_sizes(a.dims, "--dims");
    std::size_t length = 1;
    for (std::size_t d : dims) {
        if (d == 0) throw std::invalid_argument("--dims: dimensions must be >= 1");
        length *= d;
    }
    const trwopt::SyntheticForm form = a.form == "x4" ? trwopt::SyntheticForm::x_over_4
                                                      : trwopt::SyntheticForm::literal;
    DenseTensor t(dims, trwopt::gen_synthetic(length, form, a.scale));
    trwopt::write_tensor(a.output, t);
    std::cout << "wrote " << a.output << " (" << length << " entries)\n";
    return 0;
}

struct MetricsArgs {
    std::string real, estimate, report;
};

int run_metrics(const MetricsArgs& a) {
    DenseTensor real = load_input(a.real).tensor;
    DenseTensor estimate = load_input(a.estimate).tensor;
    const double rse_value = trwopt::rse(real, estimate);
    const double mse_value = trwopt::mse(real, estimate);
    const double psnr_value = trwopt::psnr(real, estimate);

    nlohmann::json j = {{"rse", rse_value}, {"mse", mse_value}};
    if (std::isfinite(psnr_value))
        j["psnr"] = psnr_value;
    else
        j["psnr"] = "inf";
    std::cout << j.dump(2) << "\n";
    if (!a.report.empty()) {
        std::ofstream os(a.report, std::ios::trunc);
        if (!os) throw trwopt::io_error("cannot open " + a.report);
        os << j.dump(2) << "\n";
    }
    return 0;
}

struct MaskArgs {
    std::string dims, like, output, block, lines;
    double missing_rate = -1.0;
    std::uint64_t seed = 0;
};

int run_mask(const MaskArgs& a) {
    std::vector<std::size_t> dims;
    if (!a.like.empty())
        dims = load_input(a.like).tensor.dims();
    else
        dims = parse_csv_sizes(a.dims, "--dims");

    DenseTensor mask;
    if (a.missing_rate >= 0.0) {
        mask = trwopt::gen_mask_random(dims, a.missing_rate, a.seed);
    } else if (!a.block.empty()) {
        // origin/extent, one-based origins: "2,3/4,4"
        const std::size_t slash = a.block.find('/');
        if (slash == std::string::npos)
            throw std::invalid_argument("--block expects 'o1,o2,.../s1,s2,...'");
        std::vector<std::size_t> origin = parse_csv_sizes(a.block.substr(0, slash), "--block");
        std::vector<std::size_t> extent = parse_csv_sizes(a.block.substr(slash + 1), "--block");
        for (std::size_t& o : origin) {
            if (o == 0) throw std::invalid_argument("--block: origins are one-based");
            --o;
        }
        mask = trwopt::gen_mask_block(dims, origin, extent);
    } else if (!a.lines.empty()) {
        // "mode:i1,i2,...", one-based mode and indices
        const std::size_t colon = a.lines.find(':');
        if (colon == std::string::npos)
            throw std::invalid_argument("--lines expects 'mode:i1,i2,...'");
        const std::size_t mode = parse_csv_sizes(a.lines.substr(0, colon), "--lines").at(0);
        std::vector<std::size_t> idx = parse_csv_sizes(a.lines.substr(colon + 1), "--lines");
        for (std::size_t& i : idx) {
            if (i == 0) throw std::invalid_argument("--lines: indices are one-based");
            --i;
        }
        mask = trwopt::gen_mask_lines(dims, mode, idx);
    } else {
        throw std::invalid_argument("mask: choose one of --missing-rate, --block, --lines");
    }

    trwopt::write_mask(a.output, mask);
    std::cout << "wrote " << a.output << " (" << trwopt::observed_count(mask) << " of "
              << mask.size() << " observed)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Tensor-ring decomposition and completion toolkit"};
    app.require_subcommand(1);

    CompleteArgs complete_args;
    CLI::App* cmd_complete = app.add_subcommand(
        "complete", "Recover missing entries of a tensor or image from observed ones");
    cmd_complete->add_option("input", complete_args.input, "Input tensor (TRT1) or image (P6 PPM)")
        ->required();
    cmd_complete->add_option("-o,--output", complete_args.output, "Completed tensor (TRT1)")
        ->required();
    cmd_complete->add_option("--out-image", complete_args.out_image,
                             "Completed image path (defaults to the output with .ppm)");
    cmd_complete->add_option("--out-mask", complete_args.out_mask,
                             "Where to persist the mask (defaults to <output>.mask.trt1)");
    CLI::Option* mask_opt =
        cmd_complete->add_option("--mask", complete_args.mask_path, "Mask file (TRT1, 0/1)");
    CLI::Option* rate_opt = cmd_complete->add_option(
        "--missing-rate", complete_args.missing_rate, "Random missing rate in [0,1]");
    mask_opt->excludes(rate_opt);
    rate_opt->excludes(mask_opt);
    cmd_complete
        ->add_option("--ranks", complete_args.ranks,
                     "Ring ranks: single value (broadcast) or per-mode list")
        ->required();
    cmd_complete->add_option("--plan", complete_args.plan,
                             "Block tensorization 'u1,u2,.../v1,v2,...' for image inputs");
    cmd_complete->add_option("--report", complete_args.report, "Write a JSON run report here");
    complete_args.opt.attach(cmd_complete);

    DecomposeArgs decompose_args;
    CLI::App* cmd_decompose =
        app.add_subcommand("decompose", "Fit ring cores to a fully observed tensor");
    cmd_decompose->add_option("input", decompose_args.input, "Input tensor (TRT1) or image (PPM)")
        ->required();
    cmd_decompose->add_option("-o,--output", decompose_args.output,
                              "Cores file (one TRT1 record per core)")
        ->required();
    cmd_decompose->add_option("--ranks", decompose_args.ranks, "Ring ranks")->required();
    cmd_decompose->add_option("--plan", decompose_args.plan,
                              "Block tensorization for image inputs");
    cmd_decompose->add_option("--report", decompose_args.report, "Write a JSON run report here");
    decompose_args.opt.attach(cmd_decompose);

    SynthArgs synth_args;
    CLI::App* cmd_synth = app.add_subcommand("synth", "Sample the synthetic oscillator");
    cmd_synth->add_option("--dims", synth_args.dims, "Tensor shape, e.g. 16,16,16,16")->required();
    cmd_synth->add_option("-o,--output", synth_args.output, "Output tensor (TRT1)")->required();
    cmd_synth->add_option("--synth-form", synth_args.form, "literal | x4")
        ->check(CLI::IsMember({"literal", "x4"}))
        ->capture_default_str();
    cmd_synth->add_option("--synth-scale", synth_args.scale,
                          "Domain length L (default: length/1000)");

    MetricsArgs metrics_args;
    CLI::App* cmd_metrics =
        app.add_subcommand("metrics", "Compare an estimate against a reference tensor");
    cmd_metrics->add_option("real", metrics_args.real, "Reference tensor or image")->required();
    cmd_metrics->add_option("estimate", metrics_args.estimate, "Estimate tensor or image")
        ->required();
    cmd_metrics->add_option("--report", metrics_args.report, "Also write the JSON here");

    MaskArgs mask_args;
    CLI::App* cmd_mask = app.add_subcommand("mask", "Generate an observation mask");
    CLI::Option* dims_opt = cmd_mask->add_option("--dims", mask_args.dims, "Mask shape");
    CLI::Option* like_opt =
        cmd_mask->add_option("--like", mask_args.like, "Take the shape from this tensor/image");
    dims_opt->excludes(like_opt);
    like_opt->excludes(dims_opt);
    cmd_mask->add_option("-o,--output", mask_args.output, "Output mask (TRT1)")->required();
    CLI::Option* mrate = cmd_mask->add_option("--missing-rate", mask_args.missing_rate,
                                              "Uniform random missing rate in [0,1]");
    CLI::Option* mblock = cmd_mask->add_option(
        "--block", mask_args.block, "Zero a box: one-based origin/extent 'o1,o2,.../s1,s2,...'");
    CLI::Option* mlines = cmd_mask->add_option(
        "--lines", mask_args.lines, "Zero whole slices: one-based 'mode:i1,i2,...'");
    mrate->excludes(mblock)->excludes(mlines);
    mblock->excludes(mrate)->excludes(mlines);
    mlines->excludes(mrate)->excludes(mblock);
    cmd_mask->add_option("--seed", mask_args.seed, "Seed for random masks")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*cmd_complete) {
            if (complete_args.mask_path.empty() && complete_args.missing_rate < 0.0)
                throw std::invalid_argument("complete: need exactly one of --mask, --missing-rate");
            return run_complete(complete_args);
        }
        if (*cmd_decompose) return run_decompose(decompose_args);
        if (*cmd_synth) return run_synth(synth_args);
        if (*cmd_metrics) return run_metrics(metrics_args);
        if (*cmd_mask) {
            if (mask_args.dims.empty() && mask_args.like.empty())
                throw std::invalid_argument("mask: need one of --dims, --like");
            return run_mask(mask_args);
        }
        return 2;
    } catch (const trwopt::numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const trwopt::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return 2;
    } catch (const std::out_of_range& e) {
        std::cerr << "invalid arguments: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
