#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pickling {

// Numeric fields of a coil record, in CSV column order.
enum class Field : std::uint8_t {
    W,
    t_s,
    w_s,
    T_1,
    T_2,
    T_3,
    T_rinse,
    v,
    HCl_1,
    HCl_2,
    HCl_3,
    Fe2_1,
    Fe2_2,
    Fe2_3,
};

inline constexpr std::size_t kFieldCount = 14;

inline constexpr std::array<Field, kFieldCount> kAllFields = {
    Field::W,     Field::t_s,   Field::w_s,   Field::T_1,   Field::T_2,
    Field::T_3,   Field::T_rinse, Field::v,   Field::HCl_1, Field::HCl_2,
    Field::HCl_3, Field::Fe2_1, Field::Fe2_2, Field::Fe2_3,
};

std::string_view field_name(Field f) noexcept;
std::optional<Field> field_from_name(std::string_view name) noexcept;

constexpr std::size_t index_of(Field f) noexcept { return static_cast<std::size_t>(f); }

enum class SpeedClass : std::uint8_t { A, B, C, U };

inline constexpr std::size_t kSpeedClassCount = 4;

std::string_view to_string(SpeedClass c) noexcept;
std::optional<SpeedClass> speed_class_from_string(std::string_view s) noexcept;

// Speed bins: A = (0, 245), B = [245, 385), C = [385, inf).
inline constexpr double kSpeedBreakAB = 245.0;
inline constexpr double kSpeedBreakBC = 385.0;

// Bins a positive speed into A, B or C. Never returns U.
// Throws InvalidInput for non-positive or non-finite speeds.
SpeedClass classify_speed(double v);

struct SpeedBounds {
    double lo;
    double hi;  // +inf for class C
};

// Bin edges for A/B/C; throws InvalidInput for U.
SpeedBounds speed_class_bounds(SpeedClass c);

// Unvalidated values shaped like a coil record; input to validate_record.
struct RawRecord {
    std::array<double, kFieldCount> values{};
    bool under_p = false;

    double& operator[](Field f) { return values[index_of(f)]; }
    double operator[](Field f) const { return values[index_of(f)]; }
};

// Open/closed interval for a single field.
struct FieldBound {
    Field field;
    double lo;
    double hi;
    bool lo_inclusive;
    bool hi_inclusive;

    bool contains(double x) const noexcept;
    std::string describe() const;
};

// The plant-tunable range table. One entry per field, in field order.
struct BoundTable {
    std::array<FieldBound, kFieldCount> bounds;

    const FieldBound& operator[](Field f) const { return bounds[index_of(f)]; }
    FieldBound& operator[](Field f) { return bounds[index_of(f)]; }

    static BoundTable defaults();
};

struct FieldViolation {
    std::string field;  // field name, or "w_s,t_s" for the cross-field rule
    double value;
    std::string rule;
};

struct RejectionReport {
    std::vector<FieldViolation> violations;

    std::string to_string() const;
};

class CoilRecord;

// Coil/bath conditions without a line speed: everything the advisor needs.
class ProcessConditions {
public:
    double operator[](Field f) const { return values_[index_of(f)]; }

    // Copy of these conditions with `v` set; does not validate v.
    RawRecord at_speed(double v) const;

private:
    friend class CoilRecord;
    friend struct Validator;
    std::array<double, kFieldCount> values_{};
};

// A validated coil. Only obtainable through validate_record.
class CoilRecord {
public:
    double operator[](Field f) const { return values_[index_of(f)]; }
    bool under_p() const noexcept { return under_p_; }
    const std::array<double, kFieldCount>& values() const noexcept { return values_; }

    RawRecord raw() const;
    ProcessConditions conditions() const;

    friend bool operator==(const CoilRecord&, const CoilRecord&) = default;

private:
    friend struct Validator;
    std::array<double, kFieldCount> values_{};
    bool under_p_ = false;
};

struct RecordValidation {
    std::optional<CoilRecord> record;
    RejectionReport report;

    bool accepted() const noexcept { return record.has_value(); }
};

struct ConditionsValidation {
    std::optional<ProcessConditions> conditions;
    RejectionReport report;

    bool accepted() const noexcept { return conditions.has_value(); }
};

// Checks every field against `bounds` and collects all violations.
RecordValidation validate_record(const RawRecord& raw,
                                 const BoundTable& bounds = BoundTable::defaults());

// Same as validate_record but ignores v and under_p.
ConditionsValidation validate_conditions(const RawRecord& raw,
                                         const BoundTable& bounds = BoundTable::defaults());

// Throwing convenience wrapper; InvalidInput carries the full report.
CoilRecord make_record(const RawRecord& raw, const BoundTable& bounds = BoundTable::defaults());

enum class Provenance : std::uint8_t { Simulated, Imported };

class Dataset {
public:
    // Throws InvalidInput on an empty record list.
    Dataset(std::vector<CoilRecord> records, Provenance provenance,
            std::optional<std::uint64_t> seed = std::nullopt);

    std::span<const CoilRecord> records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    const CoilRecord& operator[](std::size_t i) const { return records_[i]; }
    Provenance provenance() const noexcept { return provenance_; }
    std::optional<std::uint64_t> seed() const noexcept { return seed_; }

    std::size_t defect_count() const noexcept;
    double defect_fraction() const noexcept;

    // Rows picked by index, keeping provenance and seed.
    Dataset subset(std::span<const std::size_t> indices) const;

private:
    std::vector<CoilRecord> records_;
    Provenance provenance_;
    std::optional<std::uint64_t> seed_;
};

// Model input layouts.
inline constexpr std::size_t kNetworkInputCount = 8;
inline constexpr std::size_t kTreeFeatureCount = 12;

inline constexpr std::array<Field, kNetworkInputCount> kNetworkInputs = {
    Field::T_3, Field::HCl_1, Field::Fe2_1, Field::HCl_2,
    Field::Fe2_2, Field::HCl_3, Field::Fe2_3, Field::v,
};

inline constexpr std::array<Field, kTreeFeatureCount> kTreeFeatures = {
    Field::t_s,   Field::W,     Field::T_1,   Field::T_2,
    Field::T_3,   Field::T_rinse, Field::HCl_1, Field::Fe2_1,
    Field::HCl_2, Field::Fe2_2, Field::HCl_3, Field::Fe2_3,
};

using NetworkInput = std::array<double, kNetworkInputCount>;
using TreeFeatures = std::array<double, kTreeFeatureCount>;

NetworkInput network_input(const ProcessConditions& c, double v);
NetworkInput network_input(const CoilRecord& r);
TreeFeatures tree_features(const ProcessConditions& c);
TreeFeatures tree_features(const CoilRecord& r);

}  // namespace pickling
