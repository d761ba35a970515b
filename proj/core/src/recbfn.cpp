#include "pickling/recbfn.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>

#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"

namespace pickling::recbfn {

namespace {

Unit point_unit(std::span<const double> x, Label label) {
    Unit u;
    u.label = label;
    u.weight = 1;
    u.dims.reserve(x.size());
    for (double xd : x) u.dims.push_back({kClampLo, xd, xd, kClampHi});
    return u;
}

struct ShrinkMove {
    std::size_t dim;
    Trapezoid replacement;
    double kept;  // remaining fraction of the support width
};

// Rounding can leave the degree exactly at theta; step past it by a few ulps.
double nudge(double s, double x) {
    return std::numeric_limits<double>::epsilon() * std::max({1.0, std::abs(s), std::abs(x)});
}

// Smallest support cut on one flank that drops the degree at x below theta.
std::optional<ShrinkMove> flank_cut(const Trapezoid& t, double x, double theta, std::size_t dim) {
    Trapezoid r = t;
    const double width = t.s_hi - t.s_lo;
    if (x < t.c_lo) {
        const double s = std::max(t.s_lo, (x - theta * t.c_lo) / (1.0 - theta));
        r.s_lo = s;
        for (double step = nudge(s, x); r.degree(x) >= theta; step *= 2) r.s_lo = s + step;
        return ShrinkMove{dim, r, (t.s_hi - r.s_lo) / width};
    }
    if (x > t.c_hi) {
        const double s = std::min(t.s_hi, (x - theta * t.c_hi) / (1.0 - theta));
        r.s_hi = s;
        for (double step = nudge(s, x); r.degree(x) >= theta; step *= 2) r.s_hi = s - step;
        return ShrinkMove{dim, r, (r.s_hi - t.s_lo) / width};
    }
    return std::nullopt;
}

// Shrinks `u` so membership at x drops below theta. Support first; when x sits
// inside the core on every dimension, the core is cut back as well.
bool shrink(Unit& u, std::span<const double> x, double theta) {
    std::optional<ShrinkMove> best;
    for (std::size_t d = 0; d < u.dims.size(); ++d) {
        auto move = flank_cut(u.dims[d], x[d], theta, d);
        if (move && (!best || move->kept > best->kept)) best = move;
    }
    if (!best) {
        for (std::size_t d = 0; d < u.dims.size(); ++d) {
            const Trapezoid& t = u.dims[d];
            const double width = t.s_hi - t.s_lo;
            if (t.c_lo < x[d]) {
                Trapezoid r{t.s_lo, t.c_lo, std::midpoint(t.c_lo, x[d]), x[d]};
                const double kept = (r.s_hi - r.s_lo) / width;
                if (r.c_hi < x[d] && (!best || kept > best->kept)) best = ShrinkMove{d, r, kept};
            }
            if (x[d] < t.c_hi) {
                Trapezoid r{x[d], std::midpoint(x[d], t.c_hi), t.c_hi, t.s_hi};
                const double kept = (r.s_hi - r.s_lo) / width;
                if (r.c_lo > x[d] && (!best || kept > best->kept)) best = ShrinkMove{d, r, kept};
            }
        }
    }
    if (!best) return false;
    u.dims[best->dim] = best->replacement;
    return true;
}

struct Extremes {
    double own = 0.0;
    double other = 0.0;
};

Extremes extremes(std::span<const Unit> units, std::span<const double> x, Label label) {
    Extremes e;
    for (const Unit& u : units) {
        const double m = membership(u, x);
        if (u.label == label) {
            e.own = std::max(e.own, m);
        } else {
            e.other = std::max(e.other, m);
        }
    }
    return e;
}

std::size_t violations(std::span<const Unit> units, const PatternSet& scaled, const Thresholds& th) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < scaled.size(); ++i) {
        const auto e = extremes(units, scaled.row(i), scaled.labels[i]);
        if (!(e.own >= th.theta_plus && e.other < th.theta_minus)) ++count;
    }
    return count;
}

std::vector<Unit> weighted_units(const std::vector<Unit>& units) {
    std::vector<Unit> out;
    std::copy_if(units.begin(), units.end(), std::back_inserter(out),
                 [](const Unit& u) { return u.weight > 0; });
    return out;
}

char label_char(Label l) { return l == Label::Defect ? 'D' : 'N'; }

}  // namespace

InputScaler::InputScaler(std::vector<double> min, std::vector<double> max)
    : min_(std::move(min)), max_(std::move(max)) {
    if (min_.size() != max_.size() || min_.empty()) {
        throw InvalidInput("scaler: min/max must be non-empty and of equal length");
    }
    for (std::size_t d = 0; d < min_.size(); ++d) {
        if (!std::isfinite(min_[d]) || !std::isfinite(max_[d]) || !(max_[d] > min_[d])) {
            throw InvalidInput("scaler: dimension " + std::to_string(d) + " needs max > min");
        }
    }
}

InputScaler InputScaler::fit(std::span<const double> rows, std::size_t dims) {
    if (dims == 0 || rows.empty() || rows.size() % dims != 0) {
        throw InvalidInput("scaler: data shape does not match dimension count");
    }
    std::vector<double> lo(dims, std::numeric_limits<double>::infinity());
    std::vector<double> hi(dims, -std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const std::size_t d = i % dims;
        lo[d] = std::min(lo[d], rows[i]);
        hi[d] = std::max(hi[d], rows[i]);
    }
    return InputScaler(std::move(lo), std::move(hi));
}

std::vector<double> InputScaler::normalize(std::span<const double> x) const {
    if (!fitted()) throw ModelError("scaler: not fitted");
    if (x.size() != dims()) {
        throw InvalidInput("scaler: expected " + std::to_string(dims()) + " inputs, got " +
                           std::to_string(x.size()));
    }
    std::vector<double> out(x.size());
    for (std::size_t d = 0; d < x.size(); ++d) {
        if (!std::isfinite(x[d])) throw InvalidInput("scaler: non-finite input");
        out[d] = std::clamp((x[d] - min_[d]) / (max_[d] - min_[d]), kClampLo, kClampHi);
    }
    return out;
}

double Trapezoid::degree(double x) const noexcept {
    if (x < s_lo || x > s_hi) return 0.0;
    if (x < c_lo) return (x - s_lo) / (c_lo - s_lo);
    if (x > c_hi) return (s_hi - x) / (s_hi - c_hi);
    return 1.0;
}

double membership(const Unit& unit, std::span<const double> x_scaled) {
    double m = 1.0;
    for (std::size_t d = 0; d < unit.dims.size(); ++d) {
        m = std::min(m, unit.dims[d].degree(x_scaled[d]));
        if (m == 0.0) break;
    }
    return m;
}

void Thresholds::validate() const {
    if (!(theta_minus > 0.0 && theta_minus < theta_plus && theta_plus <= 1.0)) {
        throw ConfigError("recbfn: thresholds must satisfy 0 < theta_minus < theta_plus <= 1");
    }
}

Network::Network(InputScaler scaler, std::vector<Unit> units, Thresholds thresholds)
    : scaler_(std::move(scaler)), units_(std::move(units)), thresholds_(thresholds) {
    if (!scaler_.fitted()) throw ModelError("recbfn: network needs a fitted scaler");
    for (const Unit& u : units_) {
        if (u.dims.size() != scaler_.dims()) throw ModelError("recbfn: unit dimension mismatch");
        if (u.weight < 1) throw ModelError("recbfn: unit weight must be at least 1");
        for (const Trapezoid& t : u.dims) {
            if (!(t.s_lo <= t.c_lo && t.c_lo <= t.c_hi && t.c_hi <= t.s_hi)) {
                throw ModelError("recbfn: unit violates s_lo <= c_lo <= c_hi <= s_hi");
            }
        }
    }
}

std::size_t Network::unit_count(Label l) const noexcept {
    return static_cast<std::size_t>(
        std::count_if(units_.begin(), units_.end(), [l](const Unit& u) { return u.label == l; }));
}

Prediction Network::predict(std::span<const double> x_raw) const {
    const auto x = scaler_.normalize(x_raw);
    return predict_scaled(x);
}

Prediction Network::predict_scaled(std::span<const double> x_scaled) const {
    Prediction p{Label::Defect, 0.0, 0.0};
    for (const Unit& u : units_) {
        const double s = static_cast<double>(u.weight) * membership(u, x_scaled);
        (u.label == Label::Defect ? p.score_defect : p.score_no_defect) += s;
    }
    p.label = p.score_no_defect > p.score_defect ? Label::NoDefect : Label::Defect;
    return p;
}

void PatternSet::add(std::span<const double> x, Label label) {
    if (dims == 0) dims = x.size();
    if (x.size() != dims) throw InvalidInput("pattern set: dimension mismatch");
    values.insert(values.end(), x.begin(), x.end());
    labels.push_back(label);
}

TrainingResult train_scaled(const PatternSet& scaled, const InputScaler& scaler,
                            const Thresholds& thresholds, std::size_t max_epochs) {
    thresholds.validate();
    if (scaled.dims != scaler.dims()) throw ModelError("recbfn: scaler/pattern dimension mismatch");
    const bool has_defect = std::find(scaled.labels.begin(), scaled.labels.end(), Label::Defect) !=
                            scaled.labels.end();
    const bool has_clean = std::find(scaled.labels.begin(), scaled.labels.end(),
                                     Label::NoDefect) != scaled.labels.end();
    if (!has_defect || !has_clean) {
        throw ModelError("recbfn: training data must contain both defect and no-defect patterns");
    }
    if (max_epochs == 0) throw ConfigError("recbfn: max_epochs must be positive");

    const double theta_plus = thresholds.theta_plus;
    const double theta_minus = thresholds.theta_minus;

    std::vector<Unit> units;
    std::vector<std::size_t> seen[kLabelCount];
    TrainingResult result{Network(scaler, {}, thresholds), false, 0, 0, 0, 0};

    for (std::size_t epoch = 1; epoch <= max_epochs; ++epoch) {
        result.epochs = epoch;
        for (Unit& u : units) u.weight = 0;
        for (auto& s : seen) s.clear();

        for (std::size_t i = 0; i < scaled.size(); ++i) {
            const auto x = scaled.row(i);
            const Label label = scaled.labels[i];

            Unit* cover = nullptr;
            double cover_degree = -1.0;
            for (Unit& u : units) {
                if (u.label != label) continue;
                const double m = membership(u, x);
                if (m > cover_degree) {
                    cover = &u;
                    cover_degree = m;
                }
            }

            if (cover && cover_degree >= theta_plus) {
                ++cover->weight;
                for (std::size_t d = 0; d < x.size(); ++d) {
                    cover->dims[d].c_lo = std::min(cover->dims[d].c_lo, x[d]);
                    cover->dims[d].c_hi = std::max(cover->dims[d].c_hi, x[d]);
                }
            } else {
                Unit fresh = point_unit(x, label);
                for (std::size_t j : seen[static_cast<std::size_t>(other(label))]) {
                    const auto xj = scaled.row(j);
                    if (membership(fresh, xj) >= theta_minus) shrink(fresh, xj, theta_minus);
                }
                units.push_back(std::move(fresh));
                ++result.commits;
            }

            for (Unit& u : units) {
                if (u.label == label) continue;
                if (membership(u, x) >= theta_minus && shrink(u, x, theta_minus)) ++result.shrinks;
            }
            seen[static_cast<std::size_t>(label)].push_back(i);
        }

        auto candidate = weighted_units(units);
        const std::size_t residual = violations(candidate, scaled, thresholds);
        if (residual == 0 || epoch == max_epochs) {
            result.converged = residual == 0;
            result.residual_conflicts = residual;
            result.network = Network(scaler, std::move(candidate), thresholds);
            break;
        }
    }
    return result;
}

TrainingResult train_recbfn(const PatternSet& raw, const Thresholds& thresholds,
                            std::size_t max_epochs) {
    if (raw.size() == 0) throw ModelError("recbfn: no training patterns");
    auto scaler = InputScaler::fit(raw.values, raw.dims);
    PatternSet scaled;
    scaled.dims = raw.dims;
    scaled.values.reserve(raw.values.size());
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto x = scaler.normalize(raw.row(i));
        scaled.values.insert(scaled.values.end(), x.begin(), x.end());
    }
    scaled.labels = raw.labels;
    return train_scaled(scaled, scaler, thresholds, max_epochs);
}

std::size_t count_threshold_violations(const Network& network, const PatternSet& raw) {
    PatternSet scaled;
    scaled.dims = raw.dims;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const auto x = network.scaler().normalize(raw.row(i));
        scaled.values.insert(scaled.values.end(), x.begin(), x.end());
    }
    scaled.labels = raw.labels;
    return violations(network.units(), scaled, network.thresholds());
}

void write_network(std::ostream& out, const Network& network) {
    out << "R " << network.dims() << ' ' << format_number(network.thresholds().theta_plus) << ' '
        << format_number(network.thresholds().theta_minus) << '\n';
    out << 'S';
    for (std::size_t d = 0; d < network.dims(); ++d) {
        out << ' ' << format_number(network.scaler().min()[d]) << ' '
            << format_number(network.scaler().max()[d]);
    }
    out << '\n';
    for (const Unit& u : network.units()) {
        out << "U " << label_char(u.label) << ' ' << u.weight;
        for (const Trapezoid& t : u.dims) {
            out << ' ' << format_number(t.s_lo) << ' ' << format_number(t.c_lo) << ' '
                << format_number(t.c_hi) << ' ' << format_number(t.s_hi);
        }
        out << '\n';
    }
}

std::string serialize_network(const Network& network) {
    std::ostringstream os;
    write_network(os, network);
    return os.str();
}

Network read_network(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) {
        return ModelError("network file line " + std::to_string(line_no) + ": " + why);
    };
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++line_no;
            if (!line.empty() && line[0] != '#') return true;
        }
        return false;
    };
    auto read_num = [&](std::istringstream& ls) {
        std::string tok;
        double x = 0;
        if (!(ls >> tok) || !parse_number(tok, x)) throw fail("bad number");
        return x;
    };

    if (!next_line()) throw fail("missing header");
    std::istringstream header(line);
    std::string tag;
    std::size_t dims = 0;
    if (!(header >> tag) || tag != "R" || !(header >> dims) || dims == 0) {
        throw fail("expected 'R <dims> <theta_plus> <theta_minus>'");
    }
    Thresholds th;
    th.theta_plus = read_num(header);
    th.theta_minus = read_num(header);

    if (!next_line()) throw fail("missing scaler line");
    std::istringstream sl(line);
    if (!(sl >> tag) || tag != "S") throw fail("expected scaler line 'S ...'");
    std::vector<double> lo(dims), hi(dims);
    for (std::size_t d = 0; d < dims; ++d) {
        lo[d] = read_num(sl);
        hi[d] = read_num(sl);
    }

    std::vector<Unit> units;
    while (next_line()) {
        std::istringstream ul(line);
        std::string label;
        Unit u;
        if (!(ul >> tag >> label >> u.weight) || tag != "U") throw fail("malformed unit line");
        if (label == "D") {
            u.label = Label::Defect;
        } else if (label == "N") {
            u.label = Label::NoDefect;
        } else {
            throw fail("unknown unit class '" + label + "'");
        }
        u.dims.resize(dims);
        for (auto& t : u.dims) {
            t.s_lo = read_num(ul);
            t.c_lo = read_num(ul);
            t.c_hi = read_num(ul);
            t.s_hi = read_num(ul);
        }
        std::string extra;
        if (ul >> extra) throw fail("trailing tokens");
        units.push_back(std::move(u));
    }
    try {
        th.validate();
        return Network(InputScaler(std::move(lo), std::move(hi)), std::move(units), th);
    } catch (const ConfigError& e) {
        throw ModelError(std::string("network file: ") + e.what());
    } catch (const InvalidInput& e) {
        throw ModelError(std::string("network file: ") + e.what());
    }
}

Network parse_network(const std::string& text) {
    std::istringstream in(text);
    return read_network(in);
}

}  // namespace pickling::recbfn
