#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mmfield/field.hpp"
#include "mmfield/relation.hpp"

namespace mmfield {

using Json = nlohmann::ordered_json;

/// Malformed field document (bad keys, shapes or types).
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A parsed field file: the field plus optional weights.
struct FieldDocument {
    MetricField field;
    std::optional<std::vector<double>> weights;
    std::optional<std::vector<std::vector<double>>> points;  ///< domain coordinates, when given

    MMField mm() const {
        if (weights) return MMField(field, *weights);
        return MMField::uniform(field);
    }
};

/// Non-finite values are written as the strings "inf", "-inf", "nan".
inline Json number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

inline double read_number(const Json& j, const char* what) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
    }
    throw FormatError(std::string(what) + ": expected a number");
}

namespace detail {

inline std::vector<double> read_vector(const Json& j, const char* what) {
    if (!j.is_array()) throw FormatError(std::string(what) + ": expected an array");
    std::vector<double> v;
    v.reserve(j.size());
    for (const auto& e : j) v.push_back(read_number(e, what));
    return v;
}

/// Lower triangle of a symmetric zero-diagonal matrix, row-major: either
/// strict (n(n-1)/2 entries) or with diagonal (n(n+1)/2 entries).
inline DenseMatrix read_lower_triangle(const Json& j, std::size_t n, const char* what) {
    const auto v = read_vector(j, what);
    const bool strict = v.size() == n * (n - 1) / 2;
    if (!strict && v.size() != n * (n + 1) / 2)
        throw FormatError(std::string(what) + ": lower triangle has the wrong number of entries");
    DenseMatrix m(n, n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j2 = 0; j2 <= i; ++j2) {
            if (j2 == i && strict) break;
            const double x = v[k++];
            m(i, j2) = x;
            m(j2, i) = x;
        }
    return m;
}

inline Json lower_triangle(const DenseMatrix& m) {
    Json out = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < i; ++j) out.push_back(number(m(i, j)));
    return out;
}

}  // namespace detail

inline TargetSpacePtr parse_target(const Json& j) {
    if (!j.is_object() || !j.contains("type")) throw FormatError("metric: expected an object with a type");
    const auto type = j.at("type").get<std::string>();
    if (type == "euclidean") {
        for (const auto& [k, v] : j.items())
            if (k != "type" && k != "dim") throw FormatError("metric: unknown key " + k);
        if (!j.contains("dim") || !j.at("dim").is_number_unsigned()) throw FormatError("metric: euclidean needs dim");
        return TargetSpace::euclidean(j.at("dim").get<std::size_t>());
    }
    if (type == "explicit") {
        for (const auto& [k, v] : j.items())
            if (k != "type" && k != "n_b" && k != "matrix") throw FormatError("metric: unknown key " + k);
        if (!j.contains("n_b") || !j.contains("matrix")) throw FormatError("metric: explicit needs n_b and matrix");
        const auto nb = j.at("n_b").get<std::size_t>();
        const auto& mj = j.at("matrix");
        DenseMatrix m;
        if (mj.is_array() && !mj.empty() && mj.front().is_array()) {
            std::vector<std::vector<double>> rows;
            for (const auto& r : mj) rows.push_back(detail::read_vector(r, "metric.matrix"));
            m = DenseMatrix::from_rows(rows);
        } else {
            m = detail::read_lower_triangle(mj, nb, "metric.matrix");
        }
        if (m.rows() != nb) throw FormatError("metric: matrix size differs from n_b");
        try {
            return TargetSpace::explicit_metric(std::move(m));
        } catch (const std::invalid_argument& e) {
            throw FormatError(e.what());
        }
    }
    throw FormatError("metric: unknown type " + type);
}

inline Json target_to_json(const TargetSpace& s) {
    Json j;
    if (s.is_euclidean()) {
        j["type"] = "euclidean";
        j["dim"] = s.dim();
    } else {
        j["type"] = "explicit";
        j["n_b"] = s.size();
        j["matrix"] = detail::lower_triangle(s.matrix());
    }
    return j;
}

inline Json bpoint_to_json(const BPoint& p) {
    if (p.is_index()) return p.idx();
    Json a = Json::array();
    for (double c : p.coords()) a.push_back(number(c));
    return a;
}

/// Parses the field document. Keys: n, metric, points | d, values,
/// weights (optional), labels (optional). `points` are Euclidean domain
/// coordinates from which d is computed when `d` is absent.
inline FieldDocument parse_field(const Json& j) {
    if (!j.is_object()) throw FormatError("field document must be a JSON object");
    static const char* known[] = {"n", "metric", "points", "d", "values", "weights", "labels"};
    for (const auto& [k, v] : j.items())
        if (std::find(std::begin(known), std::end(known), k) == std::end(known)) throw FormatError("unknown key " + k);
    for (const char* k : {"n", "metric", "values"})
        if (!j.contains(k)) throw FormatError(std::string("missing key ") + k);
    if (!j.at("n").is_number_unsigned()) throw FormatError("n: expected a nonnegative integer");
    const auto n = j.at("n").get<std::size_t>();
    if (n == 0) throw FormatError("n must be positive");
    auto space = parse_target(j.at("metric"));

    std::optional<std::vector<std::vector<double>>> points;
    if (j.contains("points")) {
        const auto& pj = j.at("points");
        if (!pj.is_array() || pj.size() != n) throw FormatError("points: expected n coordinate vectors");
        std::vector<std::vector<double>> pts;
        for (const auto& p : pj) pts.push_back(p.is_array() ? detail::read_vector(p, "points") : std::vector<double>{read_number(p, "points")});
        for (const auto& p : pts)
            if (p.size() != pts.front().size()) throw FormatError("points: mixed dimensions");
        points = std::move(pts);
    }
    DenseMatrix d;
    if (j.contains("d")) {
        d = detail::read_lower_triangle(j.at("d"), n, "d");
    } else if (points) {
        const auto& pts = *points;
        d = DenseMatrix(n, n);
        for (std::size_t a = 0; a < n; ++a)
            for (std::size_t b = 0; b < n; ++b) {
                double s = 0.0;
                for (std::size_t c = 0; c < pts[a].size(); ++c) s += (pts[a][c] - pts[b][c]) * (pts[a][c] - pts[b][c]);
                d(a, b) = std::sqrt(s);
            }
    } else {
        throw FormatError("need either d or points");
    }

    const auto& vj = j.at("values");
    if (!vj.is_array() || vj.size() != n) throw FormatError("values: expected n entries");
    std::vector<BPoint> values;
    for (const auto& v : vj) {
        if (space->is_euclidean()) {
            if (v.is_array()) values.emplace_back(detail::read_vector(v, "values"));
            else values.emplace_back(Coords{read_number(v, "values")});
        } else {
            if (!v.is_number_unsigned()) throw FormatError("values: explicit target needs point indices");
            values.push_back(BPoint::index(v.get<std::size_t>()));
        }
    }
    std::vector<std::string> labels;
    if (j.contains("labels")) {
        if (!j.at("labels").is_array() || j.at("labels").size() != n) throw FormatError("labels: expected n strings");
        for (const auto& l : j.at("labels")) labels.push_back(l.get<std::string>());
    }
    FieldDocument doc;
    doc.points = std::move(points);
    try {
        doc.field = MetricField(std::move(space), std::move(d), std::move(values), std::move(labels));
    } catch (const std::invalid_argument& e) {
        throw FormatError(e.what());
    }
    if (j.contains("weights")) {
        auto w = detail::read_vector(j.at("weights"), "weights");
        if (w.size() != n) throw FormatError("weights: expected n entries");
        doc.weights = std::move(w);
    }
    return doc;
}

inline Json field_to_json(const MetricField& f, const std::vector<double>* weights = nullptr) {
    Json j;
    j["n"] = f.size();
    j["metric"] = target_to_json(*f.space());
    j["d"] = detail::lower_triangle(f.distances());
    Json v = Json::array();
    for (const auto& b : f.values()) v.push_back(bpoint_to_json(b));
    j["values"] = std::move(v);
    if (weights) {
        Json w = Json::array();
        for (double x : *weights) w.push_back(number(x));
        j["weights"] = std::move(w);
    }
    if (!f.labels().empty()) j["labels"] = f.labels();
    return j;
}

inline Json field_to_json(const MMField& f) { return field_to_json(f.field(), &f.weights()); }

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline FieldDocument load_field(const std::string& path) {
    const Json j = read_json_file(path);
    try {
        return parse_field(j);
    } catch (const Json::exception& e) {
        throw FormatError(path + ": " + e.what());
    }
}

inline Json matrix_to_json(const DenseMatrix& m) {
    Json rows = Json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
        Json r = Json::array();
        for (std::size_t j = 0; j < m.cols(); ++j) r.push_back(number(m(i, j)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline Json relation_to_json(const Relation& r) {
    Json out = Json::array();
    for (const auto& [a, b] : r.pairs()) out.push_back(Json::array({a, b}));
    return out;
}

/// Run-length encoding of a boolean sequence: alternating run lengths,
/// starting with a run of false (possibly zero).
inline Json run_length(const std::vector<bool>& bits) {
    Json out = Json::array();
    bool cur = false;
    std::size_t len = 0;
    for (bool b : bits) {
        if (b != cur) {
            out.push_back(len);
            cur = b;
            len = 0;
        }
        ++len;
    }
    out.push_back(len);
    return out;
}

inline std::vector<bool> run_length_decode(const Json& runs) {
    std::vector<bool> bits;
    bool cur = false;
    for (const auto& r : runs) {
        bits.insert(bits.end(), r.get<std::size_t>(), cur);
        cur = !cur;
    }
    return bits;
}

}  // namespace mmfield
