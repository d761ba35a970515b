#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pickling::recbfn {

// Scaled inputs are clamped to this box before membership evaluation; a freshly
// committed unit's support spans it.
inline constexpr double kClampLo = -0.25;
inline constexpr double kClampHi = 1.25;

enum class Label : std::uint8_t { NoDefect = 0, Defect = 1 };

inline constexpr std::size_t kLabelCount = 2;

constexpr Label other(Label l) noexcept {
    return l == Label::Defect ? Label::NoDefect : Label::Defect;
}

// Per-dimension min/max learned from training data.
class InputScaler {
public:
    InputScaler() = default;
    InputScaler(std::vector<double> min, std::vector<double> max);  // throws InvalidInput

    // Fits on row-major data with `dims` columns. Throws InvalidInput when a
    // column is constant or non-finite.
    static InputScaler fit(std::span<const double> rows, std::size_t dims);

    bool fitted() const noexcept { return !min_.empty(); }
    std::size_t dims() const noexcept { return min_.size(); }
    const std::vector<double>& min() const noexcept { return min_; }
    const std::vector<double>& max() const noexcept { return max_; }

    // (x - min) / (max - min), clamped to [kClampLo, kClampHi].
    // Throws ModelError when unfitted, InvalidInput on a dimension mismatch.
    std::vector<double> normalize(std::span<const double> x) const;

    friend bool operator==(const InputScaler&, const InputScaler&) = default;

private:
    std::vector<double> min_;
    std::vector<double> max_;
};

// One dimension of a unit: support [s_lo, s_hi] around core [c_lo, c_hi].
struct Trapezoid {
    double s_lo;
    double c_lo;
    double c_hi;
    double s_hi;

    // 1 inside the core, linear ramps on the flanks, 0 at and beyond the support edges.
    double degree(double x) const noexcept;

    friend bool operator==(const Trapezoid&, const Trapezoid&) = default;
};

struct Unit {
    std::vector<Trapezoid> dims;
    Label label = Label::Defect;
    std::size_t weight = 1;

    friend bool operator==(const Unit&, const Unit&) = default;
};

// Fuzzy AND over dimensions: min of the per-dimension trapezoids.
double membership(const Unit& unit, std::span<const double> x_scaled);

struct Thresholds {
    double theta_plus = 0.4;   // cover
    double theta_minus = 0.2;  // conflict

    void validate() const;  // 0 < theta_minus < theta_plus <= 1, throws ConfigError

    friend bool operator==(const Thresholds&, const Thresholds&) = default;
};

struct Prediction {
    Label label;
    double score_no_defect;
    double score_defect;
};

class Network {
public:
    Network(InputScaler scaler, std::vector<Unit> units, Thresholds thresholds);

    const InputScaler& scaler() const noexcept { return scaler_; }
    std::span<const Unit> units() const noexcept { return units_; }
    const Thresholds& thresholds() const noexcept { return thresholds_; }
    std::size_t dims() const noexcept { return scaler_.dims(); }
    std::size_t unit_count(Label l) const noexcept;

    // Weighted sum of memberships per class; ties and all-zero scores go to Defect.
    Prediction predict(std::span<const double> x_raw) const;
    Prediction predict_scaled(std::span<const double> x_scaled) const;

    friend bool operator==(const Network&, const Network&) = default;

private:
    InputScaler scaler_;
    std::vector<Unit> units_;
    Thresholds thresholds_;
};

// Training patterns as row-major raw inputs plus one label per row.
struct PatternSet {
    std::size_t dims = 0;
    std::vector<double> values;
    std::vector<Label> labels;

    std::size_t size() const noexcept { return labels.size(); }
    std::span<const double> row(std::size_t i) const { return {values.data() + i * dims, dims}; }
    void add(std::span<const double> x, Label label);
};

struct TrainingResult {
    Network network;
    bool converged = false;
    std::size_t epochs = 0;
    std::size_t residual_conflicts = 0;  // patterns violating the threshold conditions
    std::size_t commits = 0;
    std::size_t shrinks = 0;
};

// Dynamic decay adjustment over scaled patterns (cover / commit / shrink), in
// dataset order, until an epoch leaves every pattern satisfying
//   max own-class membership >= theta_plus and max other-class membership < theta_minus
// or max_epochs is reached (then converged = false).
// Throws ModelError unless both classes are present.
TrainingResult train_scaled(const PatternSet& scaled, const InputScaler& scaler,
                            const Thresholds& thresholds = {}, std::size_t max_epochs = 20);

// Fits the scaler on `raw`, normalizes, then runs train_scaled.
TrainingResult train_recbfn(const PatternSet& raw, const Thresholds& thresholds = {},
                            std::size_t max_epochs = 20);

// Number of patterns (raw space) violating the threshold conditions.
std::size_t count_threshold_violations(const Network& network, const PatternSet& raw);

// Text format:
//   R <dims> <theta_plus> <theta_minus>
//   S <min_1> <max_1> ... <min_dims> <max_dims>
//   U <D|N> <w> <s_lo c_lo c_hi s_hi> x dims
void write_network(std::ostream& out, const Network& network);
std::string serialize_network(const Network& network);
Network read_network(std::istream& in);  // throws ModelError
Network parse_network(const std::string& text);

}  // namespace pickling::recbfn
