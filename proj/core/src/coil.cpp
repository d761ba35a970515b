#include "pickling/coil.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"

namespace pickling {

namespace {

constexpr std::array<std::string_view, kFieldCount> kFieldNames = {
    "W",     "t_s",   "w_s",   "T_1",   "T_2",   "T_3",   "T_rinse",
    "v",     "HCl_1", "HCl_2", "HCl_3", "Fe2_1", "Fe2_2", "Fe2_3",
};

constexpr std::array<std::string_view, kSpeedClassCount> kClassNames = {"A", "B", "C", "U"};

}  // namespace

std::string_view field_name(Field f) noexcept { return kFieldNames[index_of(f)]; }

std::optional<Field> field_from_name(std::string_view name) noexcept {
    for (std::size_t i = 0; i < kFieldCount; ++i) {
        if (kFieldNames[i] == name) return kAllFields[i];
    }
    return std::nullopt;
}

std::string_view to_string(SpeedClass c) noexcept {
    return kClassNames[static_cast<std::size_t>(c)];
}

std::optional<SpeedClass> speed_class_from_string(std::string_view s) noexcept {
    for (std::size_t i = 0; i < kSpeedClassCount; ++i) {
        if (kClassNames[i] == s) return static_cast<SpeedClass>(i);
    }
    return std::nullopt;
}

SpeedClass classify_speed(double v) {
    if (!std::isfinite(v) || v <= 0.0) {
        throw InvalidInput("classify_speed: speed must be positive and finite, got " +
                           format_number(v));
    }
    if (v < kSpeedBreakAB) return SpeedClass::A;
    if (v < kSpeedBreakBC) return SpeedClass::B;
    return SpeedClass::C;
}

SpeedBounds speed_class_bounds(SpeedClass c) {
    switch (c) {
        case SpeedClass::A: return {0.0, kSpeedBreakAB};
        case SpeedClass::B: return {kSpeedBreakAB, kSpeedBreakBC};
        case SpeedClass::C: return {kSpeedBreakBC, std::numeric_limits<double>::infinity()};
        case SpeedClass::U: break;
    }
    throw InvalidInput("speed_class_bounds: class U has no speed range");
}

bool FieldBound::contains(double x) const noexcept {
    if (!std::isfinite(x)) return false;
    const bool lo_ok = lo_inclusive ? x >= lo : x > lo;
    const bool hi_ok = hi_inclusive ? x <= hi : x < hi;
    return lo_ok && hi_ok;
}

std::string FieldBound::describe() const {
    std::string s;
    s += lo_inclusive ? '[' : '(';
    s += format_number(lo);
    s += ", ";
    s += format_number(hi);
    s += hi_inclusive ? ']' : ')';
    return s;
}

BoundTable BoundTable::defaults() {
    // {lo, hi, lo_inclusive, hi_inclusive}; units: t, mm, mm, degC, speed-units, wt%, g/L.
    auto b = [](Field f, double lo, double hi, bool li, bool hi_inc) {
        return FieldBound{f, lo, hi, li, hi_inc};
    };
    return BoundTable{{
        b(Field::W, 0.0, 60.0, false, true),
        b(Field::t_s, 0.0, 25.0, false, true),
        b(Field::w_s, 0.0, 3000.0, false, true),
        b(Field::T_1, 20.0, 100.0, false, false),
        b(Field::T_2, 20.0, 100.0, false, false),
        b(Field::T_3, 20.0, 100.0, false, false),
        b(Field::T_rinse, 20.0, 100.0, false, false),
        b(Field::v, 0.0, 600.0, false, false),
        b(Field::HCl_1, 0.0, 20.0, false, true),
        b(Field::HCl_2, 0.0, 20.0, false, true),
        b(Field::HCl_3, 0.0, 20.0, false, true),
        b(Field::Fe2_1, 0.0, 250.0, true, true),
        b(Field::Fe2_2, 0.0, 250.0, true, true),
        b(Field::Fe2_3, 0.0, 250.0, true, true),
    }};
}

std::string RejectionReport::to_string() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < violations.size(); ++i) {
        const auto& v = violations[i];
        if (i) os << "; ";
        os << v.field << '=' << format_number(v.value) << " violates " << v.rule;
    }
    return os.str();
}

RawRecord ProcessConditions::at_speed(double v) const {
    RawRecord raw;
    raw.values = values_;
    raw[Field::v] = v;
    return raw;
}

RawRecord CoilRecord::raw() const {
    RawRecord r;
    r.values = values_;
    r.under_p = under_p_;
    return r;
}

ProcessConditions CoilRecord::conditions() const {
    ProcessConditions c;
    c.values_ = values_;
    return c;
}

struct Validator {
    static RejectionReport check(const RawRecord& raw, const BoundTable& bounds, bool with_speed) {
        RejectionReport report;
        for (Field f : kAllFields) {
            if (f == Field::v && !with_speed) continue;
            const FieldBound& bound = bounds[f];
            const double x = raw[f];
            if (!bound.contains(x)) {
                report.violations.push_back(
                    {std::string(field_name(f)), x, "range " + bound.describe()});
            }
        }
        if (!(raw[Field::w_s] > raw[Field::t_s])) {
            report.violations.push_back({"w_s,t_s", raw[Field::w_s], "w_s > t_s"});
        }
        return report;
    }

    static CoilRecord record(const RawRecord& raw) {
        CoilRecord r;
        r.values_ = raw.values;
        r.under_p_ = raw.under_p;
        return r;
    }

    static ProcessConditions conditions(const RawRecord& raw) {
        ProcessConditions c;
        c.values_ = raw.values;
        return c;
    }
};

RecordValidation validate_record(const RawRecord& raw, const BoundTable& bounds) {
    RecordValidation out;
    out.report = Validator::check(raw, bounds, true);
    if (out.report.violations.empty()) out.record = Validator::record(raw);
    return out;
}

ConditionsValidation validate_conditions(const RawRecord& raw, const BoundTable& bounds) {
    ConditionsValidation out;
    out.report = Validator::check(raw, bounds, false);
    if (out.report.violations.empty()) out.conditions = Validator::conditions(raw);
    return out;
}

CoilRecord make_record(const RawRecord& raw, const BoundTable& bounds) {
    auto result = validate_record(raw, bounds);
    if (!result.accepted()) throw InvalidInput("invalid record: " + result.report.to_string());
    return *result.record;
}

Dataset::Dataset(std::vector<CoilRecord> records, Provenance provenance,
                 std::optional<std::uint64_t> seed)
    : records_(std::move(records)), provenance_(provenance), seed_(seed) {
    if (records_.empty()) throw InvalidInput("dataset: no records");
}

std::size_t Dataset::defect_count() const noexcept {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.under_p() ? 1 : 0;
    return n;
}

double Dataset::defect_fraction() const noexcept {
    return static_cast<double>(defect_count()) / static_cast<double>(records_.size());
}

Dataset Dataset::subset(std::span<const std::size_t> indices) const {
    std::vector<CoilRecord> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(records_.at(i));
    return Dataset(std::move(out), provenance_, seed_);
}

NetworkInput network_input(const ProcessConditions& c, double v) {
    NetworkInput x{};
    for (std::size_t i = 0; i + 1 < kNetworkInputCount; ++i) x[i] = c[kNetworkInputs[i]];
    x[kNetworkInputCount - 1] = v;
    return x;
}

NetworkInput network_input(const CoilRecord& r) {
    NetworkInput x{};
    for (std::size_t i = 0; i < kNetworkInputCount; ++i) x[i] = r[kNetworkInputs[i]];
    return x;
}

TreeFeatures tree_features(const ProcessConditions& c) {
    TreeFeatures x{};
    for (std::size_t i = 0; i < kTreeFeatureCount; ++i) x[i] = c[kTreeFeatures[i]];
    return x;
}

TreeFeatures tree_features(const CoilRecord& r) { return tree_features(r.conditions()); }

}  // namespace pickling
