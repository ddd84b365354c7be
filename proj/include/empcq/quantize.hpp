#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "empcq/partition.hpp"

namespace empcq {

// Signed fixed-point format: `total_bits` in all (one of them the sign bit),
// `frac_bits` of fraction. Grid step 2^-b, representable range
// [-2^(a-1-b), 2^(a-1-b) - 2^-b].
class FixedPointFormat {
public:
    FixedPointFormat(int total_bits, int frac_bits);

    int total_bits() const { return total_bits_; }
    int frac_bits() const { return frac_bits_; }

    double step() const { return step_; }        // 2^-b
    double scale() const { return scale_; }      // 2^b
    double min_value() const { return min_; }
    double max_value() const { return max_; }
    bool contains(double z) const { return z >= min_ && z <= max_; }

    friend bool operator==(const FixedPointFormat&, const FixedPointFormat&) = default;

private:
    int total_bits_;
    int frac_bits_;
    double step_;
    double scale_;
    double min_;
    double max_;
};

// Round-to-nearest grid multiple, ties to even mantissa. The result is
// exactly representable and within half a step of z. Throws OverflowError
// for z outside the representable range (silent saturation would break the
// error model every bound downstream relies on).
double quantize_scalar(double z, const FixedPointFormat& fmt);

// Integer mantissa of a grid value: grid_value * 2^b, exact.
std::int64_t mantissa_of(double grid_value, const FixedPointFormat& fmt);

Vec quantize_vector(std::span<const double> v, const FixedPointFormat& fmt);
Matrix quantize_matrix(const Matrix& m, const FixedPointFormat& fmt);

// A partition snapped to fixed-point grids, one format per data class:
// region data (H, K), law data (F, G), and the on-line state. The exact
// quantization deltas (quantized - original) are retained for the
// data-dependent error bounds.
struct QuantizedPartition {
    PwaPartition base;  // snapped values, same structure and box as source
    FixedPointFormat fmt_regions;
    FixedPointFormat fmt_laws;
    FixedPointFormat fmt_state;

    std::vector<Matrix> delta_H;
    std::vector<Vec> delta_K;
    std::vector<Matrix> delta_F;
    std::vector<Vec> delta_G;
    // False for partitions reloaded from a quantized document, where the
    // originals are no longer available.
    bool deltas_valid = false;
};

// Snaps every H, K entry with fmt_regions and every F, G entry with
// fmt_laws. Overflow on any entry is an error naming the region and entry.
QuantizedPartition quantize_partition(const PwaPartition& p, const FixedPointFormat& fmt_regions,
                                      const FixedPointFormat& fmt_laws,
                                      const FixedPointFormat& fmt_state);

struct QuantizedEval {
    Vec state;                          // x snapped to the state grid
    std::optional<std::size_t> region;  // sequential search over snapped H, K
    Vec control;                        // empty when no region contains state
};

// The on-line controller model: snap the state, point-locate it against the
// quantized regions (same lowest-index tie-break as locate, exact
// comparisons), evaluate the quantized law. Arithmetic on the quantized
// operands is carried out in working precision and not re-rounded.
QuantizedEval quantized_evaluate(const QuantizedPartition& qp, std::span<const double> x);

}  // namespace empcq
