#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

#include "empcq/quantize.hpp"
#include "empcq/rescale.hpp"

namespace empcq {

struct LoadOptions {
    double continuity_tol = 1e-8;     // partitions are produced offline in doubles
    double probe_step = 0.0;          // 0: derived from the box extents
    std::size_t probes_per_facet = 32;
    std::size_t witness_attempts = 65536;
    bool check_continuity = true;
};

// Reads and validates a partition document. Checks, in order: schema and
// dimensions, nonzero constraint rows, region nonemptiness (stored witness
// or seeded sampling), witness containment in the box, and continuity of the
// law across every detected shared facet. Throws ParseError for documents
// that cannot be read and ValidationError for ones that violate an
// invariant. A `scaling` record, when present, is returned through
// out_scaling.
PwaPartition load_partition(std::istream& in, const LoadOptions& opts = {},
                            std::optional<ScalingTransform>* out_scaling = nullptr);
PwaPartition load_partition(const std::filesystem::path& file, const LoadOptions& opts = {},
                            std::optional<ScalingTransform>* out_scaling = nullptr);

void save_partition(const PwaPartition& p, std::ostream& out,
                    const ScalingTransform* scaling = nullptr);
void save_partition(const PwaPartition& p, const std::filesystem::path& file,
                    const ScalingTransform* scaling = nullptr);

// Quantized documents carry a `formats` record and serialize every quantized
// entry as its integer mantissa, which round-trips bit-exactly. Reloaded
// partitions have no deltas (the originals are gone) and support evaluation
// only.
void save_quantized_partition(const QuantizedPartition& qp, std::ostream& out);
void save_quantized_partition(const QuantizedPartition& qp, const std::filesystem::path& file);
QuantizedPartition load_quantized_partition(std::istream& in);
QuantizedPartition load_quantized_partition(const std::filesystem::path& file);

}  // namespace empcq
