#pragma once

#include <array>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "pickling/coil.hpp"
#include "pickling/decision_tree.hpp"
#include "pickling/recbfn.hpp"

namespace pickling::advisor {

struct ScanGrid {
    double v_min = 100.0;
    double v_max = 500.0;
    double step = 5.0;

    void validate() const;  // throws ConfigError
    std::size_t size() const;
    double at(std::size_t i) const { return v_min + static_cast<double>(i) * step; }
    std::vector<double> points() const;

    friend bool operator==(const ScanGrid&, const ScanGrid&) = default;
};

// The seven bath measurements the network reads besides the line speed, in
// network input order: T_3, HCl_1, Fe2_1, HCl_2, Fe2_2, HCl_3, Fe2_3.
inline constexpr std::array<Field, kNetworkInputCount - 1> kBathFields = {
    Field::T_3, Field::HCl_1, Field::Fe2_1, Field::HCl_2, Field::Fe2_2, Field::HCl_3, Field::Fe2_3,
};

class BathInputs {
public:
    // Checks each value against `bounds`; throws InvalidInput listing every violation.
    static BathInputs make(const std::array<double, kBathFields.size()>& values,
                           const BoundTable& bounds = BoundTable::defaults());
    static BathInputs of(const ProcessConditions& conditions);

    const std::array<double, kBathFields.size()>& values() const noexcept { return values_; }
    NetworkInput at_speed(double v) const;

private:
    std::array<double, kBathFields.size()> values_{};
};

struct TracePoint {
    double v;
    bool defect;
    double score_no_defect;
    double score_defect;

    friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

using Trace = std::vector<TracePoint>;

// Defect verdict at one candidate speed.
using SpeedProbe = std::function<recbfn::Prediction(double v)>;

SpeedProbe network_probe(const recbfn::Network& network, const BathInputs& bath);

// One prediction per grid point, ascending in v.
Trace scan(const SpeedProbe& probe, const ScanGrid& grid);
Trace scan_speeds(const recbfn::Network& network, const BathInputs& bath, const ScanGrid& grid);

struct MaxSpeed {
    double v_star;
    double first_defect_speed;
    friend bool operator==(const MaxSpeed&, const MaxSpeed&) = default;
};

struct SpeedRange {
    SpeedClass speed_class;
    double lo;
    double hi;  // +inf for class C
    friend bool operator==(const SpeedRange&, const SpeedRange&) = default;
};

struct Infeasible {
    std::string reason;
    friend bool operator==(const Infeasible&, const Infeasible&) = default;
};

using Outcome = std::variant<MaxSpeed, SpeedRange, Infeasible>;

struct Advice {
    Outcome outcome;
    Trace trace;
    ScanGrid grid;

    friend bool operator==(const Advice&, const Advice&) = default;
};

// Pure decision from a trace: first point defective -> Infeasible; a later defect ->
// MaxSpeed at the last clear point before it; all clear -> range_class() as a
// SpeedRange (U becomes Infeasible). range_class is only called on an all-clear trace.
Advice decide(Trace trace, const ScanGrid& grid, const std::function<SpeedClass()>& range_class);

// Throws ConfigError when the models do not match the coil feature layouts.
Advice advise(const tree::DecisionTree& tree, const recbfn::Network& network,
              const ProcessConditions& conditions, const ScanGrid& grid);

// Global-model class for a coil at the speed it actually ran: U when the network
// flags a defect at that speed, otherwise the tree's class.
SpeedClass classify_operating_point(bool defect_at_speed,
                                    const std::function<SpeedClass()>& range_class);
SpeedClass classify_operating_point(const tree::DecisionTree& tree,
                                    const recbfn::Network& network, const CoilRecord& record);

// Throws ConfigError on a feature layout mismatch.
void check_compatible(const tree::DecisionTree& tree, const recbfn::Network& network);

// "MAX_SPEED 290 (first defect at 300)", "RANGE B [245,385)", "INFEASIBLE <reason>".
std::string summary_line(const Advice& advice);

// Summary line, key=value lines, then one "TRACE <v> <class> <score_no_defect> <score_defect>"
// row per grid point.
void write_advice(std::ostream& out, const Advice& advice);
std::string format_advice(const Advice& advice);

std::string_view outcome_kind(const Outcome& outcome) noexcept;  // max_speed | speed_range | infeasible

}  // namespace pickling::advisor
