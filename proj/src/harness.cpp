#include "empcq/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <thread>

#include <json.hpp>

#include "empcq/errors.hpp"
#include "empcq/kernels.hpp"
#include "empcq/rescale.hpp"
#include "empcq/rng.hpp"

namespace empcq {
namespace {

constexpr std::uint32_t kBoxPurpose = 0xB0;
constexpr std::uint32_t kNearPurpose = 0xF1;

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double sort_key(double apriori) {
    return std::isnan(apriori) ? std::numeric_limits<double>::infinity() : apriori;
}

}  // namespace

double default_near_facet_band(const PwaPartition& p, const ExperimentConfig& cfg) {
    const double eps = std::fmax(cfg.fmt_regions.step(), cfg.fmt_state.step());
    // Uniform residual bound in normalized units, mapped back through the
    // largest coordinate scale.
    return 2.0 * rescaled_delta_bound(eps, p.state_dim) * p.box.norm_inf_bound();
}

SampleSet sample_states(const PwaPartition& p, std::span<const FacetPair> pairs,
                        const ExperimentConfig& cfg) {
    if (cfg.sample_count < 1) throw DomainError("sample_count must be at least 1");
    SampleSet out;
    const std::size_t n = p.state_dim;

    if (cfg.mode == SampleMode::box_uniform) {
        Vec x(n);
        for (std::size_t s = 0; s < cfg.sample_count; ++s) {
            Rng rng(cfg.seed, make_stream(kBoxPurpose, s));
            for (std::size_t l = 0; l < n; ++l) x[l] = rng.uniform(p.box.lo[l], p.box.hi[l]);
            ++out.drawn;
            if (locate(p, x)) {
                out.states.push_back(x);
                out.pair_of.push_back(static_cast<std::size_t>(-1));
            }
        }
        return out;
    }

    if (pairs.empty()) throw DomainError("near-facet sampling needs at least one facet pair");
    const double band = cfg.band_width > 0.0 ? cfg.band_width : default_near_facet_band(p, cfg);
    if (!(band > 0.0)) throw DomainError("band_width must be positive");

    for (std::size_t s = 0; s < cfg.sample_count; ++s) {
        const std::size_t pi = s % pairs.size();
        const FacetPair& fp = pairs[pi];
        Rng rng(cfg.seed, make_stream(kNearPurpose, s));
        ++out.drawn;
        auto probe = one_facet_probe(p, fp, p.locate_tol, rng, 64);
        if (!probe) continue;
        const double dist = band * rng.next_unit_positive();
        // fp.hp has unit normal; stepping against it moves into the lower
        // (h·x <= k) side.
        Vec x = std::move(*probe);
        for (std::size_t l = 0; l < n; ++l) x[l] -= dist * fp.hp.normal[l];
        if (!locate(p, x)) continue;
        out.states.push_back(std::move(x));
        out.pair_of.push_back(pi);
    }
    return out;
}

namespace {

std::vector<BoundReport> compute_reports(const PwaPartition& p, const QuantizedPartition& qp,
                                         std::span<const FacetPair> pairs, const SampleSet& ss,
                                         const ExperimentConfig& cfg) {
    std::vector<BoundReport> reports(ss.states.size());
    const BoundOptions opts{cfg.use_box_norms};
    const unsigned threads = std::max(1u, cfg.threads);

    std::exception_ptr failure;
    std::mutex failure_mu;
    const auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            try {
                reports[i] = control_error_report(p, qp, pairs, ss.states[i], opts);
            } catch (const OverflowError& e) {
                std::string state;
                for (std::size_t l = 0; l < ss.states[i].size(); ++l)
                    state += (l ? ", " : "") + fmt17(ss.states[i][l]);
                std::lock_guard lock(failure_mu);
                if (!failure)
                    failure = std::make_exception_ptr(
                        OverflowError(std::string(e.what()) + " at state [" + state + "]"));
                return;
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                return;
            }
        }
    };

    if (threads == 1 || reports.size() < 2 * threads) {
        worker(0, reports.size());
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (reports.size() + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(reports.size(), begin + chunk);
            if (begin >= end) break;
            pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return reports;
}

}  // namespace

std::vector<BoundReport> run_sweep(const PwaPartition& p, const QuantizedPartition& qp,
                                   std::span<const FacetPair> pairs,
                                   const ExperimentConfig& cfg) {
    const SampleSet ss = sample_states(p, pairs, cfg);
    std::vector<BoundReport> reports = compute_reports(p, qp, pairs, ss, cfg);

    std::erase_if(reports, [&](const BoundReport& r) {
        return r.bound_aposteriori < cfg.drop_threshold && r.actual_error < cfg.drop_threshold;
    });
    std::stable_sort(reports.begin(), reports.end(), [](const BoundReport& a,
                                                        const BoundReport& b) {
        return sort_key(a.bound_apriori) < sort_key(b.bound_apriori);
    });
    return reports;
}

std::vector<FacetSensitivityRow> facet_report(const PwaPartition& p,
                                              const QuantizedPartition& qp,
                                              std::span<const FacetPair> pairs,
                                              const ExperimentConfig& cfg) {
    if (cfg.mode != SampleMode::near_facets)
        throw DomainError("facet report requires near-facet sampling");
    const SampleSet ss = sample_states(p, pairs, cfg);
    const std::vector<BoundReport> reports = compute_reports(p, qp, pairs, ss, cfg);

    std::vector<FacetSensitivityRow> rows(pairs.size());
    for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        rows[pi].pair = pairs[pi];
        rows[pi].pair_index = pi;
    }
    for (std::size_t i = 0; i < reports.size(); ++i) {
        const BoundReport& rep = reports[i];
        if (!rep.bound_claimed()) continue;
        FacetSensitivityRow& row = rows[ss.pair_of[i]];
        // Only events involving this pair's regions describe this facet;
        // near a corner a sample can wander into a third region, and that
        // event belongs to the other facet's statistics.
        const auto member = [&](std::size_t r) {
            return r == row.pair.lower || r == row.pair.upper;
        };
        if (!member(rep.region_true) || !rep.region_quant || !member(*rep.region_quant))
            continue;
        row.max_aposteriori = std::fmax(row.max_aposteriori, rep.bound_aposteriori);
        row.max_actual = std::fmax(row.max_actual, rep.actual_error);
        ++row.samples_used;
    }
    for (auto& row : rows)
        row.trivial = row.max_aposteriori < cfg.drop_threshold &&
                      row.max_actual < cfg.drop_threshold;
    return rows;
}

void write_reports_csv(std::ostream& out, std::span<const BoundReport> reports,
                       std::size_t state_dim) {
    for (std::size_t l = 0; l < state_dim; ++l) out << 'x' << (l + 1) << ',';
    out << "region_true,region_quant,delta,first_term,second_apriori,second_aposteriori,"
           "bound_apriori,bound_aposteriori,actual_error,"
           "same_region,jump,corner_jump,projection_in_facet,no_region\n";
    for (const BoundReport& r : reports) {
        for (double v : r.x) out << fmt17(v) << ',';
        out << (r.region_true + 1) << ',' << (r.region_quant ? *r.region_quant + 1 : 0) << ','
            << fmt17(r.delta) << ',' << fmt17(r.first_term) << ',' << fmt17(r.second_apriori)
            << ',' << fmt17(r.second_aposteriori) << ',' << fmt17(r.bound_apriori) << ','
            << fmt17(r.bound_aposteriori) << ',' << fmt17(r.actual_error) << ','
            << int(r.flags.same_region) << ',' << int(r.flags.jump) << ','
            << int(r.flags.corner_jump) << ',' << int(r.flags.projection_in_facet) << ','
            << int(r.flags.no_region) << '\n';
    }
}

void write_reports_json(std::ostream& out, std::span<const BoundReport> reports) {
    nlohmann::json arr = nlohmann::json::array();
    for (const BoundReport& r : reports) {
        nlohmann::json j{{"x", r.x},
                         {"region_true", r.region_true + 1},
                         {"delta", r.delta},
                         {"first_term", r.first_term},
                         {"second_apriori", r.second_apriori},
                         {"second_aposteriori", r.second_aposteriori},
                         {"bound_apriori", r.bound_apriori},
                         {"bound_aposteriori", r.bound_aposteriori},
                         {"actual_error", r.actual_error},
                         {"flags",
                          {{"same_region", r.flags.same_region},
                           {"jump", r.flags.jump},
                           {"corner_jump", r.flags.corner_jump},
                           {"projection_in_facet", r.flags.projection_in_facet},
                           {"no_region", r.flags.no_region}}}};
        if (r.region_quant)
            j["region_quant"] = *r.region_quant + 1;
        else
            j["region_quant"] = nullptr;
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

void write_sweep_svg(std::ostream& out, std::span<const BoundReport> reports) {
    if (reports.empty()) throw DomainError("scatter plot needs at least one report");

    double vmax = 0.0;
    for (const BoundReport& r : reports) {
        if (!std::isnan(r.bound_apriori)) vmax = std::fmax(vmax, r.bound_apriori);
        if (!std::isnan(r.actual_error)) vmax = std::fmax(vmax, r.actual_error);
    }
    if (vmax == 0.0) vmax = 1.0;

    const double width = 900, height = 520;
    const double ml = 70, mr = 170, mt = 30, mb = 50;
    const double pw = width - ml - mr, ph = height - mt - mb;
    const auto sx = [&](std::size_t i) {
        return ml + pw * (reports.size() > 1
                              ? static_cast<double>(i) / static_cast<double>(reports.size() - 1)
                              : 0.5);
    };
    const auto sy = [&](double v) { return mt + ph * (1.0 - v / vmax); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    out << "  <rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "  <text x=\"" << ml + pw / 2 << "\" y=\"" << height - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">state index (sorted by a priori bound)"
           "</text>\n";
    out << "  <text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
        << mt + ph / 2 << ")\">control error bound</text>\n";

    struct Series {
        const char* id;
        const char* label;
        const char* color;
        double (*value)(const BoundReport&);
    };
    const Series series[3] = {
        {"apriori", "a priori", "#1f77b4", [](const BoundReport& r) { return r.bound_apriori; }},
        {"aposteriori", "a posteriori", "#ff7f0e",
         [](const BoundReport& r) { return r.bound_aposteriori; }},
        {"actual", "actual", "#2ca02c", [](const BoundReport& r) { return r.actual_error; }},
    };
    for (const Series& s : series) {
        out << "  <g class=\"series\" id=\"" << s.id << "\" fill=\"" << s.color << "\">\n";
        for (std::size_t i = 0; i < reports.size(); ++i) {
            const double v = s.value(reports[i]);
            if (std::isnan(v)) continue;
            out << "    <circle cx=\"" << fmt17(sx(i)) << "\" cy=\"" << fmt17(sy(v))
                << "\" r=\"2\"/>\n";
        }
        out << "  </g>\n";
    }
    for (int i = 0; i < 3; ++i) {
        const double ly = mt + 18 + 22 * i;
        out << "  <circle cx=\"" << width - mr + 18 << "\" cy=\"" << ly << "\" r=\"4\" fill=\""
            << series[i].color << "\"/>\n";
        out << "  <text x=\"" << width - mr + 30 << "\" y=\"" << ly + 4
            << "\" font-size=\"13\">" << series[i].label << "</text>\n";
    }
    out << "</svg>\n";
}

void write_facet_rows_csv(std::ostream& out, std::span<const FacetSensitivityRow> rows) {
    out << "region_i,region_j,max_aposteriori,max_actual,samples_used,trivial\n";
    for (const FacetSensitivityRow& row : rows) {
        const std::size_t a = std::min(row.pair.lower, row.pair.upper) + 1;
        const std::size_t b = std::max(row.pair.lower, row.pair.upper) + 1;
        out << a << ',' << b << ',' << fmt17(row.max_aposteriori) << ','
            << fmt17(row.max_actual) << ',' << row.samples_used << ',' << int(row.trivial)
            << '\n';
    }
}

void export_sweep(std::span<const BoundReport> reports, const std::filesystem::path& destination,
                  ExportFormat format, std::size_t state_dim) {
    std::ofstream out(destination);
    if (!out) throw IoError("cannot write '" + destination.string() + "'");
    switch (format) {
        case ExportFormat::csv: write_reports_csv(out, reports, state_dim); break;
        case ExportFormat::json: write_reports_json(out, reports); break;
        case ExportFormat::svg_scatter: write_sweep_svg(out, reports); break;
    }
    if (!out) throw IoError("write failed for '" + destination.string() + "'");
}

}  // namespace empcq
