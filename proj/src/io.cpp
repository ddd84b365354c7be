#include "empcq/io.hpp"

#include <cmath>
#include <fstream>
#include <string>

#include <json.hpp>

#include "empcq/errors.hpp"

namespace empcq {
namespace {

using nlohmann::json;

constexpr std::uint64_t kWitnessSeed = 0x57195E55C0FFEE01ull;
constexpr std::uint32_t kWitnessPurpose = 0x71;

json parse_stream(std::istream& in) {
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid JSON: ") + e.what());
    }
}

const json& field(const json& j, const char* name) {
    if (!j.contains(name)) throw ParseError(std::string("missing field '") + name + "'");
    return j.at(name);
}

double number(const json& j, const std::string& what) {
    if (!j.is_number()) throw ParseError(what + " must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ValidationError(what + " is not finite");
    return v;
}

Vec vector_of(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array");
    Vec out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(number(j[i], what + "[" + std::to_string(i + 1) + "]"));
    return out;
}

Matrix matrix_of(const json& j, std::size_t cols, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of rows");
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vec row = vector_of(j[r], what + " row " + std::to_string(r + 1));
        if (row.size() != cols)
            throw ValidationError(what + " row " + std::to_string(r + 1) + " has " +
                                  std::to_string(row.size()) + " entries, expected " +
                                  std::to_string(cols));
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

std::size_t dimension(const json& j, const char* name) {
    const json& f = field(j, name);
    if (!f.is_number_integer() || f.get<long long>() < 1)
        throw ValidationError(std::string("'") + name + "' must be a positive integer");
    return f.get<std::size_t>();
}

StateBox box_of(const json& j, std::size_t n) {
    const json& b = field(j, "state_box");
    StateBox box;
    box.lo = vector_of(field(b, "lo"), "state_box.lo");
    box.hi = vector_of(field(b, "hi"), "state_box.hi");
    if (box.lo.size() != n || box.hi.size() != n)
        throw ValidationError("state_box bounds must have length n");
    for (std::size_t l = 0; l < n; ++l)
        if (!(box.lo[l] < box.hi[l]))
            throw ValidationError("state_box coordinate " + std::to_string(l + 1) +
                                  " has lo >= hi");
    return box;
}

void require_nonzero_rows(const Matrix& H, std::size_t region) {
    for (std::size_t r = 0; r < H.rows(); ++r) {
        bool nonzero = false;
        for (std::size_t c = 0; c < H.cols(); ++c) nonzero |= H(r, c) != 0.0;
        if (!nonzero)
            throw ValidationError("region " + std::to_string(region + 1) + ": constraint row " +
                                  std::to_string(r + 1) + " is the zero vector");
    }
}

// A region is usable only if some point satisfies it: take the stored
// witness when present, otherwise sample the box with a fixed seed.
void certify_nonempty(const PwaPartition& p, const std::vector<std::optional<Vec>>& witnesses,
                      std::size_t attempts) {
    for (std::size_t i = 0; i < p.regions.size(); ++i) {
        if (witnesses[i]) {
            const Vec& w = *witnesses[i];
            if (w.size() != p.state_dim)
                throw ValidationError("region " + std::to_string(i + 1) +
                                      ": witness has wrong dimension");
            if (!p.box.contains(w, p.locate_tol))
                throw ValidationError("region " + std::to_string(i + 1) +
                                      ": witness lies outside the state box");
            if (!p.regions[i].contains(w, p.locate_tol))
                throw ValidationError("region " + std::to_string(i + 1) +
                                      ": witness does not satisfy the constraints");
            continue;
        }
        Rng rng(kWitnessSeed, make_stream(kWitnessPurpose, i));
        Vec x(p.state_dim);
        bool found = false;
        for (std::size_t t = 0; t < attempts && !found; ++t) {
            for (std::size_t l = 0; l < p.state_dim; ++l)
                x[l] = rng.uniform(p.box.lo[l], p.box.hi[l]);
            found = p.regions[i].contains(x, p.locate_tol);
        }
        if (!found)
            throw ValidationError("region " + std::to_string(i + 1) +
                                  ": no point of the state box satisfies the constraints "
                                  "(empty region, or add a \"witness\" to the document)");
    }
}

}  // namespace

PwaPartition load_partition(std::istream& in, const LoadOptions& opts,
                            std::optional<ScalingTransform>* out_scaling) {
    const json doc = parse_stream(in);
    if (!doc.is_object()) throw ParseError("partition document must be a JSON object");

    const std::size_t n = dimension(doc, "n");
    const std::size_t m = dimension(doc, "m");
    StateBox box = box_of(doc, n);

    const json& regs = field(doc, "regions");
    if (!regs.is_array()) throw ParseError("'regions' must be an array");
    if (regs.empty()) throw ValidationError("partition has no regions");

    std::vector<Region> regions;
    std::vector<AffineLaw> laws;
    std::vector<std::optional<Vec>> witnesses;
    for (std::size_t i = 0; i < regs.size(); ++i) {
        const json& r = regs[i];
        const std::string where = "region " + std::to_string(i + 1);
        Matrix H = matrix_of(field(r, "H"), n, where + ".H");
        Vec K = vector_of(field(r, "K"), where + ".K");
        if (H.rows() != K.size())
            throw ValidationError(where + ": H has " + std::to_string(H.rows()) +
                                  " rows but K has " + std::to_string(K.size()) + " entries");
        if (H.rows() == 0) throw ValidationError(where + ": empty constraint system");
        require_nonzero_rows(H, i);

        Matrix F = matrix_of(field(r, "F"), n, where + ".F");
        Vec G = vector_of(field(r, "G"), where + ".G");
        if (F.rows() != m || G.size() != m)
            throw ValidationError(where + ": law dimensions do not match m = " +
                                  std::to_string(m));

        regions.push_back(make_region(std::move(H), std::move(K)));
        laws.push_back(AffineLaw{std::move(F), std::move(G)});
        if (r.contains("witness"))
            witnesses.push_back(vector_of(r.at("witness"), where + ".witness"));
        else
            witnesses.push_back(std::nullopt);
    }

    PwaPartition p = assemble_partition(n, m, std::move(regions), std::move(laws), std::move(box));
    certify_nonempty(p, witnesses, opts.witness_attempts);

    if (opts.check_continuity) {
        const double step = opts.probe_step > 0.0 ? opts.probe_step : default_probe_step(p.box);
        const auto pairs = find_facet_pairs(p, step);
        const ContinuityResult res = check_continuity(p, pairs, opts.probes_per_facet);
        if (res.worst_residual > opts.continuity_tol) {
            const FacetPair& fp = pairs[res.worst_pair];
            std::string point;
            for (std::size_t l = 0; l < res.worst_point.size(); ++l)
                point += (l ? ", " : "") + std::to_string(res.worst_point[l]);
            throw ValidationError(
                "law is discontinuous across the facet between regions " +
                std::to_string(std::min(fp.lower, fp.upper) + 1) + " and " +
                std::to_string(std::max(fp.lower, fp.upper) + 1) + ": residual " +
                std::to_string(res.worst_residual) + " at [" + point + "]");
        }
    }

    if (out_scaling) {
        out_scaling->reset();
        if (doc.contains("scaling")) {
            ScalingTransform s;
            s.diag = vector_of(field(doc.at("scaling"), "D"), "scaling.D");
            if (s.diag.size() != n) throw ValidationError("scaling.D must have length n");
            *out_scaling = std::move(s);
        }
    }
    return p;
}

PwaPartition load_partition(const std::filesystem::path& file, const LoadOptions& opts,
                            std::optional<ScalingTransform>* out_scaling) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file.string() + "'");
    return load_partition(in, opts, out_scaling);
}

namespace {

json box_json(const StateBox& box) { return json{{"lo", box.lo}, {"hi", box.hi}}; }

json matrix_rows_json(const Matrix& m) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r)
        rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
    return rows;
}

}  // namespace

void save_partition(const PwaPartition& p, std::ostream& out, const ScalingTransform* scaling) {
    json doc{{"n", p.state_dim}, {"m", p.input_dim}, {"state_box", box_json(p.box)}};
    json regs = json::array();
    for (std::size_t i = 0; i < p.regions.size(); ++i) {
        regs.push_back(json{{"H", matrix_rows_json(p.regions[i].H)},
                            {"K", p.regions[i].K},
                            {"F", matrix_rows_json(p.laws[i].F)},
                            {"G", p.laws[i].G}});
    }
    doc["regions"] = std::move(regs);
    if (scaling) doc["scaling"] = json{{"D", scaling->diag}};
    out << doc.dump(2) << '\n';
}

void save_partition(const PwaPartition& p, const std::filesystem::path& file,
                    const ScalingTransform* scaling) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write '" + file.string() + "'");
    save_partition(p, out, scaling);
}

namespace {

json format_json(const FixedPointFormat& fmt) {
    return json{{"a", fmt.total_bits()}, {"b", fmt.frac_bits()}};
}

FixedPointFormat format_of(const json& j, const std::string& what) {
    if (!j.is_object()) throw ParseError(what + " must be an object");
    const json& a = field(j, "a");
    const json& b = field(j, "b");
    if (!a.is_number_integer() || !b.is_number_integer())
        throw ParseError(what + ": a and b must be integers");
    try {
        return FixedPointFormat(a.get<int>(), b.get<int>());
    } catch (const DomainError& e) {
        throw ValidationError(what + ": " + e.what());
    }
}

json mantissa_matrix_json(const Matrix& m, const FixedPointFormat& fmt) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (double v : m.row(r)) row.push_back(mantissa_of(v, fmt));
        rows.push_back(std::move(row));
    }
    return rows;
}

json mantissa_vector_json(const Vec& v, const FixedPointFormat& fmt) {
    json out = json::array();
    for (double x : v) out.push_back(mantissa_of(x, fmt));
    return out;
}

std::int64_t integer_of(const json& j, const std::string& what) {
    if (!j.is_number_integer()) throw ParseError(what + " must be an integer mantissa");
    return j.get<std::int64_t>();
}

Vec mantissa_vector_of(const json& j, const FixedPointFormat& fmt, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array");
    Vec out;
    out.reserve(j.size());
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(static_cast<double>(integer_of(j[i], what)) * fmt.step());
    return out;
}

Matrix mantissa_matrix_of(const json& j, std::size_t cols, const FixedPointFormat& fmt,
                          const std::string& what) {
    if (!j.is_array()) throw ParseError(what + " must be an array of rows");
    Matrix m(j.size(), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const Vec row = mantissa_vector_of(j[r], fmt, what + " row " + std::to_string(r + 1));
        if (row.size() != cols)
            throw ValidationError(what + " row " + std::to_string(r + 1) +
                                  " has wrong length");
        for (std::size_t c = 0; c < cols; ++c) m(r, c) = row[c];
    }
    return m;
}

}  // namespace

void save_quantized_partition(const QuantizedPartition& qp, std::ostream& out) {
    json doc{{"n", qp.base.state_dim},
             {"m", qp.base.input_dim},
             {"state_box", box_json(qp.base.box)},
             {"formats",
              json{{"regions", format_json(qp.fmt_regions)},
                   {"laws", format_json(qp.fmt_laws)},
                   {"state", format_json(qp.fmt_state)}}}};
    json regs = json::array();
    for (std::size_t i = 0; i < qp.base.regions.size(); ++i) {
        regs.push_back(json{{"H", mantissa_matrix_json(qp.base.regions[i].H, qp.fmt_regions)},
                            {"K", mantissa_vector_json(qp.base.regions[i].K, qp.fmt_regions)},
                            {"F", mantissa_matrix_json(qp.base.laws[i].F, qp.fmt_laws)},
                            {"G", mantissa_vector_json(qp.base.laws[i].G, qp.fmt_laws)}});
    }
    doc["regions"] = std::move(regs);
    out << doc.dump(2) << '\n';
}

void save_quantized_partition(const QuantizedPartition& qp, const std::filesystem::path& file) {
    std::ofstream out(file);
    if (!out) throw IoError("cannot write '" + file.string() + "'");
    save_quantized_partition(qp, out);
}

QuantizedPartition load_quantized_partition(std::istream& in) {
    const json doc = parse_stream(in);
    if (!doc.is_object()) throw ParseError("quantized document must be a JSON object");

    const std::size_t n = dimension(doc, "n");
    const std::size_t m = dimension(doc, "m");
    StateBox box = box_of(doc, n);

    const json& formats = field(doc, "formats");
    const FixedPointFormat fmt_regions = format_of(field(formats, "regions"), "formats.regions");
    const FixedPointFormat fmt_laws = format_of(field(formats, "laws"), "formats.laws");
    const FixedPointFormat fmt_state = format_of(field(formats, "state"), "formats.state");

    const json& regs = field(doc, "regions");
    if (!regs.is_array() || regs.empty())
        throw ValidationError("quantized document has no regions");

    std::vector<Region> regions;
    std::vector<AffineLaw> laws;
    for (std::size_t i = 0; i < regs.size(); ++i) {
        const json& r = regs[i];
        const std::string where = "region " + std::to_string(i + 1);
        Matrix H = mantissa_matrix_of(field(r, "H"), n, fmt_regions, where + ".H");
        Vec K = mantissa_vector_of(field(r, "K"), fmt_regions, where + ".K");
        if (H.rows() != K.size()) throw ValidationError(where + ": H/K size mismatch");
        Matrix F = mantissa_matrix_of(field(r, "F"), n, fmt_laws, where + ".F");
        Vec G = mantissa_vector_of(field(r, "G"), fmt_laws, where + ".G");
        if (F.rows() != m || G.size() != m)
            throw ValidationError(where + ": law dimensions do not match m");
        regions.push_back(make_region(std::move(H), std::move(K)));
        laws.push_back(AffineLaw{std::move(F), std::move(G)});
    }

    QuantizedPartition qp{assemble_partition(n, m, std::move(regions), std::move(laws),
                                             std::move(box)),
                          fmt_regions, fmt_laws, fmt_state,
                          {}, {}, {}, {}, false};
    qp.base.locate_tol = 0.0;
    return qp;
}

QuantizedPartition load_quantized_partition(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open '" + file.string() + "'");
    return load_quantized_partition(in);
}

}  // namespace empcq
