#include "pickling/advisor.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"

namespace pickling::advisor {

void ScanGrid::validate() const {
    if (!std::isfinite(v_min) || !std::isfinite(v_max) || !std::isfinite(step)) {
        throw ConfigError("scan grid: bounds and step must be finite");
    }
    if (!(v_min > 0.0)) throw ConfigError("scan grid: v_min must be positive");
    if (!(v_min < v_max)) throw ConfigError("scan grid: v_min must be below v_max");
    if (!(step > 0.0)) throw ConfigError("scan grid: step must be positive");
    if (size() < 2) throw ConfigError("scan grid: needs at least two points");
}

std::size_t ScanGrid::size() const {
    if (!(step > 0.0) || !(v_max >= v_min)) return 0;
    return static_cast<std::size_t>(std::floor((v_max - v_min) / step + 1e-9)) + 1;
}

std::vector<double> ScanGrid::points() const {
    std::vector<double> out(size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = at(i);
    return out;
}

BathInputs BathInputs::make(const std::array<double, kBathFields.size()>& values,
                            const BoundTable& bounds) {
    RejectionReport report;
    for (std::size_t i = 0; i < kBathFields.size(); ++i) {
        const FieldBound& b = bounds[kBathFields[i]];
        if (!b.contains(values[i])) {
            report.violations.push_back(
                {std::string(field_name(kBathFields[i])), values[i], "range " + b.describe()});
        }
    }
    if (!report.violations.empty()) throw InvalidInput("invalid bath inputs: " + report.to_string());
    BathInputs bath;
    bath.values_ = values;
    return bath;
}

BathInputs BathInputs::of(const ProcessConditions& conditions) {
    BathInputs bath;
    for (std::size_t i = 0; i < kBathFields.size(); ++i) bath.values_[i] = conditions[kBathFields[i]];
    return bath;
}

NetworkInput BathInputs::at_speed(double v) const {
    NetworkInput x{};
    for (std::size_t i = 0; i < values_.size(); ++i) x[i] = values_[i];
    x[kNetworkInputCount - 1] = v;
    return x;
}

SpeedProbe network_probe(const recbfn::Network& network, const BathInputs& bath) {
    if (network.dims() != kNetworkInputCount) {
        throw ConfigError("advisor: network expects " + std::to_string(network.dims()) +
                          " inputs, coil layout provides " + std::to_string(kNetworkInputCount));
    }
    return [&network, bath](double v) { return network.predict(bath.at_speed(v)); };
}

Trace scan(const SpeedProbe& probe, const ScanGrid& grid) {
    grid.validate();
    Trace trace;
    trace.reserve(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = grid.at(i);
        const auto p = probe(v);
        trace.push_back({v, p.label == recbfn::Label::Defect, p.score_no_defect, p.score_defect});
    }
    return trace;
}

Trace scan_speeds(const recbfn::Network& network, const BathInputs& bath, const ScanGrid& grid) {
    return scan(network_probe(network, bath), grid);
}

Advice decide(Trace trace, const ScanGrid& grid, const std::function<SpeedClass()>& range_class) {
    Advice advice{Infeasible{}, std::move(trace), grid};
    const Trace& t = advice.trace;
    if (t.empty()) throw InvalidInput("advisor: empty trace");

    if (t.front().defect) {
        advice.outcome = Infeasible{"under-pickling predicted at the lowest scanned speed " +
                                    format_number(t.front().v)};
        return advice;
    }
    for (std::size_t i = 1; i < t.size(); ++i) {
        if (t[i].defect) {
            advice.outcome = MaxSpeed{t[i - 1].v, t[i].v};
            return advice;
        }
    }
    const SpeedClass cls = range_class();
    if (cls == SpeedClass::U) {
        advice.outcome = Infeasible{"decision tree assigns class U"};
        return advice;
    }
    const auto b = speed_class_bounds(cls);
    advice.outcome = SpeedRange{cls, b.lo, b.hi};
    return advice;
}

void check_compatible(const tree::DecisionTree& tree, const recbfn::Network& network) {
    if (tree.feature_count() != kTreeFeatureCount) {
        throw ConfigError("advisor: tree uses " + std::to_string(tree.feature_count()) +
                          " features, expected " + std::to_string(kTreeFeatureCount));
    }
    if (network.dims() != kNetworkInputCount) {
        throw ConfigError("advisor: network uses " + std::to_string(network.dims()) +
                          " inputs, expected " + std::to_string(kNetworkInputCount));
    }
    if (network.units().empty()) throw ConfigError("advisor: network has no units");
}

Advice advise(const tree::DecisionTree& tree, const recbfn::Network& network,
              const ProcessConditions& conditions, const ScanGrid& grid) {
    check_compatible(tree, network);
    auto trace = scan_speeds(network, BathInputs::of(conditions), grid);
    return decide(std::move(trace), grid,
                  [&] { return tree::predict_class(tree, tree_features(conditions)); });
}

SpeedClass classify_operating_point(bool defect_at_speed,
                                    const std::function<SpeedClass()>& range_class) {
    return defect_at_speed ? SpeedClass::U : range_class();
}

SpeedClass classify_operating_point(const tree::DecisionTree& tree,
                                    const recbfn::Network& network, const CoilRecord& record) {
    check_compatible(tree, network);
    const bool defect = network.predict(network_input(record)).label == recbfn::Label::Defect;
    return classify_operating_point(defect,
                                    [&] { return tree::predict_class(tree, tree_features(record)); });
}

std::string_view outcome_kind(const Outcome& outcome) noexcept {
    switch (outcome.index()) {
        case 0: return "max_speed";
        case 1: return "speed_range";
        default: return "infeasible";
    }
}

std::string summary_line(const Advice& advice) {
    if (const auto* m = std::get_if<MaxSpeed>(&advice.outcome)) {
        return "MAX_SPEED " + format_number(m->v_star) + " (first defect at " +
               format_number(m->first_defect_speed) + ")";
    }
    if (const auto* r = std::get_if<SpeedRange>(&advice.outcome)) {
        const bool open_lo = r->speed_class == SpeedClass::A;
        return "RANGE " + std::string(to_string(r->speed_class)) + ' ' + (open_lo ? '(' : '[') +
               format_number(r->lo) + ',' + format_number(r->hi) + ')';
    }
    return "INFEASIBLE " + std::get<Infeasible>(advice.outcome).reason;
}

void write_advice(std::ostream& out, const Advice& advice) {
    out << summary_line(advice) << '\n';
    out << "advice=" << outcome_kind(advice.outcome) << '\n';
    if (const auto* m = std::get_if<MaxSpeed>(&advice.outcome)) {
        out << "v_star=" << format_number(m->v_star) << '\n';
        out << "first_defect_speed=" << format_number(m->first_defect_speed) << '\n';
    } else if (const auto* r = std::get_if<SpeedRange>(&advice.outcome)) {
        out << "class=" << to_string(r->speed_class) << '\n';
        out << "range_lo=" << format_number(r->lo) << '\n';
        out << "range_hi=" << format_number(r->hi) << '\n';
    } else {
        out << "reason=" << std::get<Infeasible>(advice.outcome).reason << '\n';
    }
    out << "grid=" << format_number(advice.grid.v_min) << ',' << format_number(advice.grid.v_max)
        << ',' << format_number(advice.grid.step) << '\n';
    out << "trace_rows=" << advice.trace.size() << '\n';
    for (const auto& p : advice.trace) {
        out << "TRACE " << format_number(p.v) << ' ' << (p.defect ? "defect" : "no_defect") << ' '
            << format_number(p.score_no_defect) << ' ' << format_number(p.score_defect) << '\n';
    }
}

std::string format_advice(const Advice& advice) {
    std::ostringstream os;
    write_advice(os, advice);
    return os.str();
}

}  // namespace pickling::advisor
