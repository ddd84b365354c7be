#pragma once

#include <filesystem>
#include <iosfwd>

#include "empcq/bounds.hpp"

namespace empcq {

enum class SampleMode { box_uniform, near_facets };

struct ExperimentConfig {
    std::size_t sample_count = 100000;
    std::uint64_t seed = 0;
    SampleMode mode = SampleMode::box_uniform;
    // near_facets: maximum offset from the facet, into the lower region.
    // 0 selects a default of twice the uniform residual bound, mapped back
    // to state units (jumps cannot originate farther out than that).
    double band_width = 0.0;
    FixedPointFormat fmt_regions{12, 5};
    FixedPointFormat fmt_laws{12, 5};
    FixedPointFormat fmt_state{12, 5};
    // Reports whose a posteriori bound and actual error both fall below this
    // are dropped from sweeps (near-zero-gain regions produce piles of
    // them).
    double drop_threshold = 1e-4;
    unsigned threads = 1;
    bool use_box_norms = false;
};

struct SampleSet {
    std::vector<Vec> states;
    // Samples drawn before consistency filtering.
    std::size_t drawn = 0;
    // near_facets: index into the pair list per surviving state.
    std::vector<std::size_t> pair_of;
};

// Deterministic in (seed, config, partition): sample i is generated from its
// own counter-based stream regardless of evaluation order. box_uniform draws
// from the state box and keeps states inside some region; near_facets walks
// the facet-pair list round-robin, draws a probe point on the facet and
// offsets it into the lower region by a uniform distance in (0, band].
SampleSet sample_states(const PwaPartition& p, std::span<const FacetPair> pairs,
                        const ExperimentConfig& cfg);

// One BoundReport per sampled state, dropped below the threshold and sorted
// by ascending a priori bound (unclaimed NaN bounds sort last). Identical
// output for any thread count.
std::vector<BoundReport> run_sweep(const PwaPartition& p, const QuantizedPartition& qp,
                                   std::span<const FacetPair> pairs,
                                   const ExperimentConfig& cfg);

// Per-facet sensitivity: the largest a posteriori bound and actual error
// seen among this pair's near-facet samples (those within the bound model).
struct FacetSensitivityRow {
    FacetPair pair;
    std::size_t pair_index = 0;
    double max_aposteriori = 0.0;
    double max_actual = 0.0;
    std::size_t samples_used = 0;
    bool trivial = false;  // both maxima below the drop threshold
};

std::vector<FacetSensitivityRow> facet_report(const PwaPartition& p,
                                              const QuantizedPartition& qp,
                                              std::span<const FacetPair> pairs,
                                              const ExperimentConfig& cfg);

enum class ExportFormat { csv, json, svg_scatter };

void write_reports_csv(std::ostream& out, std::span<const BoundReport> reports,
                       std::size_t state_dim);
void write_reports_json(std::ostream& out, std::span<const BoundReport> reports);
// Index-vs-value scatter of the two bounds and the actual error.
void write_sweep_svg(std::ostream& out, std::span<const BoundReport> reports);
void write_facet_rows_csv(std::ostream& out, std::span<const FacetSensitivityRow> rows);

void export_sweep(std::span<const BoundReport> reports, const std::filesystem::path& destination,
                  ExportFormat format, std::size_t state_dim);

double default_near_facet_band(const PwaPartition& p, const ExperimentConfig& cfg);

}  // namespace empcq
