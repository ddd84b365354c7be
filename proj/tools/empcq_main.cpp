// empcq command-line tool: validate, quantize, rescale and error-bound
// analysis for piecewise-affine controller partitions.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "empcq/errors.hpp"
#include "empcq/harness.hpp"
#include "empcq/io.hpp"
#include "empcq/kernels.hpp"

namespace {

using namespace empcq;

struct FormatFlags {
    int a = 12, b = 5;
    int regions_a = -1, regions_b = -1;
    int laws_a = -1, laws_b = -1;
    int state_a = -1, state_b = -1;

    FixedPointFormat pick(int cls_a, int cls_b) const {
        return FixedPointFormat(cls_a >= 0 ? cls_a : a, cls_b >= 0 ? cls_b : b);
    }
    FixedPointFormat regions() const { return pick(regions_a, regions_b); }
    FixedPointFormat laws() const { return pick(laws_a, laws_b); }
    FixedPointFormat state() const { return pick(state_a, state_b); }
};

void add_format_flags(CLI::App* cmd, FormatFlags& f) {
    cmd->add_option("--a", f.a, "Total word length for all data classes")->capture_default_str();
    cmd->add_option("--b", f.b, "Fraction bits for all data classes")->capture_default_str();
    cmd->add_option("--regions-a", f.regions_a, "Total bits for region data (H, K)");
    cmd->add_option("--regions-b", f.regions_b, "Fraction bits for region data (H, K)");
    cmd->add_option("--laws-a", f.laws_a, "Total bits for law data (F, G)");
    cmd->add_option("--laws-b", f.laws_b, "Fraction bits for law data (F, G)");
    cmd->add_option("--state-a", f.state_a, "Total bits for the on-line state");
    cmd->add_option("--state-b", f.state_b, "Fraction bits for the on-line state");
}

Vec parse_state(const std::string& text) {
    Vec out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used])))
                ++used;
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw DomainError("cannot parse state component '" + item + "'");
        }
    }
    if (out.empty()) throw DomainError("empty state vector");
    return out;
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string join(const Vec& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt17(v[i]);
    return s;
}

int cmd_validate(const std::string& input) {
    const PwaPartition p = load_partition(input);
    const auto pairs = find_facet_pairs(p, default_probe_step(p.box));
    const auto cont = check_continuity(p, pairs);
    std::cout << "valid: n=" << p.state_dim << " m=" << p.input_dim << " regions="
              << p.region_count() << "\n";
    std::cout << pairs.size() << " facet pairs\n";
    for (const FacetPair& fp : pairs)
        std::cout << "  regions " << (std::min(fp.lower, fp.upper) + 1) << " and "
                  << (std::max(fp.lower, fp.upper) + 1) << "  (h=[" << join(fp.hp.normal)
                  << "], k=" << fmt17(fp.hp.offset) << ")\n";
    std::cout << "continuity: worst residual " << fmt17(cont.worst_residual) << " over "
              << cont.probes_checked << " facet probes\n";
    return 0;
}

int cmd_quantize(const std::string& input, const std::string& output, const FormatFlags& f) {
    const PwaPartition p = load_partition(input);
    const QuantizedPartition qp = quantize_partition(p, f.regions(), f.laws(), f.state());
    save_quantized_partition(qp, std::filesystem::path(output));
    double worst = 0.0;
    for (std::size_t i = 0; i < qp.delta_H.size(); ++i) {
        for (double d : qp.delta_H[i].data()) worst = std::fmax(worst, std::fabs(d));
        for (double d : qp.delta_K[i]) worst = std::fmax(worst, std::fabs(d));
        for (double d : qp.delta_F[i].data()) worst = std::fmax(worst, std::fabs(d));
        for (double d : qp.delta_G[i]) worst = std::fmax(worst, std::fabs(d));
    }
    std::cout << "quantized " << p.region_count() << " regions; worst data delta "
              << fmt17(worst) << "\n";
    return 0;
}

int cmd_rescale(const std::string& input, const std::string& output) {
    const PwaPartition p = load_partition(input);
    const ScalingTransform s = compute_scaling(p.box);
    const PwaPartition scaled = rescale_partition(p, s);
    save_partition(scaled, std::filesystem::path(output), &s);
    std::cout << "rescaled with D = diag(" << join(s.diag) << ")\n";
    return 0;
}

int cmd_bounds(const std::string& input, const std::string& state_text, const FormatFlags& f,
               bool box_norms) {
    const PwaPartition p = load_partition(input);
    const Vec x = parse_state(state_text);
    if (x.size() != p.state_dim) throw DomainError("state dimension mismatch");
    const QuantizedPartition qp = quantize_partition(p, f.regions(), f.laws(), f.state());
    const auto pairs = find_facet_pairs(p, default_probe_step(p.box));
    const BoundReport r = control_error_report(p, qp, pairs, x, BoundOptions{box_norms});

    std::cout << "state:               [" << join(r.x) << "]\n";
    std::cout << "region (true):       " << r.region_true + 1 << "\n";
    std::cout << "region (quantized):  "
              << (r.region_quant ? std::to_string(*r.region_quant + 1) : std::string("none"))
              << "\n";
    std::cout << "delta:               " << fmt17(r.delta) << "\n";
    std::cout << "first term:          " << fmt17(r.first_term) << "\n";
    std::cout << "second (a priori):   " << fmt17(r.second_apriori) << "\n";
    std::cout << "second (a posterio): " << fmt17(r.second_aposteriori) << "\n";
    std::cout << "bound (a priori):    " << fmt17(r.bound_apriori) << "\n";
    std::cout << "bound (a posterio):  " << fmt17(r.bound_aposteriori) << "\n";
    std::cout << "actual error:        " << fmt17(r.actual_error) << "\n";
    std::cout << "flags:               same_region=" << r.flags.same_region
              << " jump=" << r.flags.jump << " corner_jump=" << r.flags.corner_jump
              << " projection_in_facet=" << r.flags.projection_in_facet
              << " no_region=" << r.flags.no_region << "\n";
    return 0;
}

ExperimentConfig make_config(const FormatFlags& f, std::size_t count, std::uint64_t seed,
                             const std::string& mode, double band, double drop,
                             unsigned threads, bool box_norms) {
    ExperimentConfig cfg;
    cfg.sample_count = count;
    cfg.seed = seed;
    if (mode == "box")
        cfg.mode = SampleMode::box_uniform;
    else if (mode == "near")
        cfg.mode = SampleMode::near_facets;
    else
        throw DomainError("mode must be 'box' or 'near'");
    cfg.band_width = band;
    cfg.fmt_regions = f.regions();
    cfg.fmt_laws = f.laws();
    cfg.fmt_state = f.state();
    cfg.drop_threshold = drop;
    cfg.threads = threads;
    cfg.use_box_norms = box_norms;
    return cfg;
}

int cmd_sweep(const std::string& input, const std::string& output, const std::string& format,
              const ExperimentConfig& cfg) {
    const PwaPartition p = load_partition(input);
    const QuantizedPartition qp = quantize_partition(p, cfg.fmt_regions, cfg.fmt_laws,
                                                     cfg.fmt_state);
    const auto pairs = find_facet_pairs(p, default_probe_step(p.box));
    const auto reports = run_sweep(p, qp, pairs, cfg);

    ExportFormat ef;
    if (format == "csv")
        ef = ExportFormat::csv;
    else if (format == "json")
        ef = ExportFormat::json;
    else if (format == "svg")
        ef = ExportFormat::svg_scatter;
    else
        throw DomainError("format must be csv, json or svg");
    export_sweep(reports, output, ef, p.state_dim);
    std::cout << "wrote " << reports.size() << " reports to " << output << "\n";
    return 0;
}

int cmd_facets(const std::string& input, const std::string& output, ExperimentConfig cfg) {
    cfg.mode = SampleMode::near_facets;
    const PwaPartition p = load_partition(input);
    const QuantizedPartition qp = quantize_partition(p, cfg.fmt_regions, cfg.fmt_laws,
                                                     cfg.fmt_state);
    const auto pairs = find_facet_pairs(p, default_probe_step(p.box));
    const auto rows = facet_report(p, qp, pairs, cfg);
    std::ofstream out(output);
    if (!out) throw IoError("cannot write '" + output + "'");
    write_facet_rows_csv(out, rows);
    std::cout << "wrote " << rows.size() << " facet rows to " << output << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fixed-point quantization error bounds for explicit-MPC PWA controllers"};
    app.require_subcommand(1);

    std::string input, output, state_text;
    std::string mode = "box", format = "csv";
    std::size_t count = 100000;
    std::uint64_t seed = 0;
    double band = 0.0, drop = 1e-4;
    unsigned threads = 1;
    bool box_norms = false;
    FormatFlags fmts;

    auto* validate = app.add_subcommand("validate", "Check a partition document");
    validate->add_option("input", input, "Partition document")->required();

    auto* quantize = app.add_subcommand("quantize", "Snap a partition to fixed-point grids");
    quantize->add_option("input", input, "Partition document")->required();
    quantize->add_option("--out", output, "Quantized document destination")->required();
    add_format_flags(quantize, fmts);

    auto* rescale = app.add_subcommand("rescale", "Normalize state units and hyperplanes");
    rescale->add_option("input", input, "Partition document")->required();
    rescale->add_option("--out", output, "Rescaled document destination")->required();

    auto* bounds = app.add_subcommand("bounds", "Error bounds for a single state");
    bounds->add_option("input", input, "Partition document")->required();
    bounds->add_option("--state", state_text, "Comma-separated state vector")->required();
    bounds->add_flag("--box-norm", box_norms, "Bound state norms over the whole box");
    add_format_flags(bounds, fmts);

    auto* sweep = app.add_subcommand("sweep", "Bound-vs-actual sweep over sampled states");
    sweep->add_option("input", input, "Partition document")->required();
    sweep->add_option("--out", output, "Report destination")->required();
    sweep->add_option("--format", format, "csv, json or svg")->capture_default_str();
    sweep->add_option("--n", count, "Sample count")->capture_default_str();
    sweep->add_option("--seed", seed, "Experiment seed")->capture_default_str();
    sweep->add_option("--mode", mode, "box or near")->capture_default_str();
    sweep->add_option("--band", band, "Near-facet band width (0: auto)");
    sweep->add_option("--drop", drop, "Drop threshold")->capture_default_str();
    sweep->add_option("--threads", threads, "Worker threads")->capture_default_str();
    sweep->add_flag("--box-norm", box_norms, "Bound state norms over the whole box");
    add_format_flags(sweep, fmts);

    auto* facets = app.add_subcommand("facets", "Per-facet sensitivity table");
    facets->add_option("input", input, "Partition document")->required();
    facets->add_option("--out", output, "CSV destination")->required();
    facets->add_option("--n", count, "Sample count")->capture_default_str();
    facets->add_option("--seed", seed, "Experiment seed")->capture_default_str();
    facets->add_option("--band", band, "Near-facet band width (0: auto)");
    facets->add_option("--drop", drop, "Triviality threshold")->capture_default_str();
    facets->add_option("--threads", threads, "Worker threads")->capture_default_str();
    add_format_flags(facets, fmts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(input);
        if (quantize->parsed()) return cmd_quantize(input, output, fmts);
        if (rescale->parsed()) return cmd_rescale(input, output);
        if (bounds->parsed()) return cmd_bounds(input, state_text, fmts, box_norms);
        if (sweep->parsed())
            return cmd_sweep(input, output, format,
                             make_config(fmts, count, seed, mode, band, drop, threads,
                                         box_norms));
        if (facets->parsed())
            return cmd_facets(input, output,
                              make_config(fmts, count, seed, "near", band, drop, threads,
                                          box_norms));
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}
