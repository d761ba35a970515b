#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pickling/coil.hpp"
#include "pickling/decision_tree.hpp"
#include "pickling/recbfn.hpp"

namespace pickling::eval {

// Square count matrix indexed (actual, predicted).
class ConfusionMatrix {
public:
    explicit ConfusionMatrix(std::vector<std::string> class_names);

    void add(std::size_t actual, std::size_t predicted, std::size_t count = 1);

    std::size_t classes() const noexcept { return names_.size(); }
    const std::string& name(std::size_t c) const { return names_.at(c); }
    std::size_t at(std::size_t actual, std::size_t predicted) const;
    std::size_t total() const noexcept { return total_; }
    std::size_t actual_count(std::size_t c) const;
    std::size_t predicted_count(std::size_t c) const;

    // One-vs-rest view of class c.
    std::size_t tp(std::size_t c) const { return at(c, c); }
    std::size_t fp(std::size_t c) const { return predicted_count(c) - tp(c); }
    std::size_t fn(std::size_t c) const { return actual_count(c) - tp(c); }
    std::size_t tn(std::size_t c) const { return total_ - tp(c) - fp(c) - fn(c); }

    double accuracy() const;  // throws InvalidInput on an empty matrix

private:
    std::vector<std::string> names_;
    std::vector<std::size_t> counts_;
    std::size_t total_ = 0;
};

// nullopt means undefined (zero denominator), which is distinct from 0.
std::optional<double> precision(std::size_t tp, std::size_t fp);
std::optional<double> recall(std::size_t tp, std::size_t fn);
std::optional<double> f_measure(double precision, double recall);
std::optional<double> f_measure(std::optional<double> precision, std::optional<double> recall);

// Share of actual non-defect rows predicted as `defect_class`.
// Throws InvalidInput when there are no actual non-defect rows.
double false_alarm_rate(const ConfusionMatrix& m, std::size_t defect_class);

struct SplitIndices {
    std::vector<std::size_t> train;       // ascending dataset order
    std::vector<std::size_t> validation;  // ascending dataset order
};

// Per-class (defect / no-defect) proportional split, deterministic in seed.
// Throws InvalidInput for a fraction outside (0, 1), DataError when a class
// present in the data would leave fewer than 2 rows on either side.
SplitIndices stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed);

// Evaluation ground truth: U for under-pickled coils, otherwise the speed bin.
SpeedClass actual_class(const CoilRecord& record);

ConfusionMatrix speed_class_matrix();

struct ClassMetrics {
    SpeedClass speed_class;
    std::size_t support;
    std::optional<double> precision;
    std::optional<double> recall;
    std::optional<double> f_measure;
};

struct GlobalReport {
    ConfusionMatrix matrix = speed_class_matrix();
    std::vector<ClassMetrics> rows;  // U, A, B, C
    double accuracy = 0.0;
    std::optional<double> false_alarm_rate;
};

GlobalReport report_from_matrix(const ConfusionMatrix& matrix);

// Runs `classify` on every record and scores it against actual_class.
GlobalReport evaluate_global(const std::function<SpeedClass(const CoilRecord&)>& classify,
                             const Dataset& validation);
GlobalReport evaluate_global(const tree::DecisionTree& tree, const recbfn::Network& network,
                             const Dataset& validation);

// Aligned table (Precision, Recall, F-Measure per class) followed by
// machine-readable "ROW <class> <p> <r> <f> <support>" lines; undefined values print "n/a".
void write_report(std::ostream& out, const GlobalReport& report);
std::string format_report(const GlobalReport& report);

std::string format_metric(std::optional<double> x);

}  // namespace pickling::eval
