#include "pickling/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "pickling/advisor.hpp"
#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"
#include "pickling/random.hpp"

namespace pickling::eval {

ConfusionMatrix::ConfusionMatrix(std::vector<std::string> class_names)
    : names_(std::move(class_names)), counts_(names_.size() * names_.size(), 0) {
    if (names_.empty()) throw InvalidInput("confusion matrix: no classes");
}

void ConfusionMatrix::add(std::size_t actual, std::size_t predicted, std::size_t count) {
    if (actual >= classes() || predicted >= classes()) {
        throw InvalidInput("confusion matrix: class index out of range");
    }
    counts_[actual * classes() + predicted] += count;
    total_ += count;
}

std::size_t ConfusionMatrix::at(std::size_t actual, std::size_t predicted) const {
    return counts_.at(actual * classes() + predicted);
}

std::size_t ConfusionMatrix::actual_count(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t p = 0; p < classes(); ++p) n += at(c, p);
    return n;
}

std::size_t ConfusionMatrix::predicted_count(std::size_t c) const {
    std::size_t n = 0;
    for (std::size_t a = 0; a < classes(); ++a) n += at(a, c);
    return n;
}

double ConfusionMatrix::accuracy() const {
    if (total_ == 0) throw InvalidInput("confusion matrix: empty");
    std::size_t correct = 0;
    for (std::size_t c = 0; c < classes(); ++c) correct += at(c, c);
    return static_cast<double>(correct) / static_cast<double>(total_);
}

std::optional<double> precision(std::size_t tp, std::size_t fp) {
    if (tp + fp == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fp);
}

std::optional<double> recall(std::size_t tp, std::size_t fn) {
    if (tp + fn == 0) return std::nullopt;
    return static_cast<double>(tp) / static_cast<double>(tp + fn);
}

std::optional<double> f_measure(double p, double r) {
    if (!(p + r > 0.0)) return std::nullopt;
    return 2.0 * p * r / (p + r);
}

std::optional<double> f_measure(std::optional<double> p, std::optional<double> r) {
    if (!p || !r) return std::nullopt;
    return f_measure(*p, *r);
}

double false_alarm_rate(const ConfusionMatrix& m, std::size_t defect_class) {
    if (defect_class >= m.classes()) throw InvalidInput("false_alarm_rate: bad defect class");
    std::size_t clean = 0;
    std::size_t alarms = 0;
    for (std::size_t a = 0; a < m.classes(); ++a) {
        if (a == defect_class) continue;
        clean += m.actual_count(a);
        alarms += m.at(a, defect_class);
    }
    if (clean == 0) throw InvalidInput("false_alarm_rate: no actual non-defect rows");
    return static_cast<double>(alarms) / static_cast<double>(clean);
}

SplitIndices stratified_split(const Dataset& data, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw InvalidInput("stratified_split: train fraction must lie in (0, 1), got " +
                           format_number(train_fraction));
    }
    SplitIndices out;
    for (int cls = 0; cls < 2; ++cls) {
        std::vector<std::size_t> members;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (data[i].under_p() == (cls == 1)) members.push_back(i);
        }
        if (members.empty()) continue;

        Rng rng(mix_seed(seed, static_cast<std::uint64_t>(cls)));
        rng.shuffle(std::span<std::size_t>(members));
        const auto n_train = static_cast<std::size_t>(
            std::llround(static_cast<double>(members.size()) * train_fraction));
        if (n_train < 2 || members.size() - n_train < 2) {
            throw DataError(std::string("stratified_split: ") +
                            (cls == 1 ? "defect" : "no-defect") + " class has " +
                            std::to_string(members.size()) +
                            " records, too few for both sides of the split");
        }
        out.train.insert(out.train.end(), members.begin(), members.begin() + n_train);
        out.validation.insert(out.validation.end(), members.begin() + n_train, members.end());
    }
    std::sort(out.train.begin(), out.train.end());
    std::sort(out.validation.begin(), out.validation.end());
    return out;
}

SpeedClass actual_class(const CoilRecord& record) {
    return record.under_p() ? SpeedClass::U : classify_speed(record[Field::v]);
}

ConfusionMatrix speed_class_matrix() { return ConfusionMatrix({"A", "B", "C", "U"}); }

GlobalReport report_from_matrix(const ConfusionMatrix& matrix) {
    GlobalReport report;
    report.matrix = matrix;
    for (SpeedClass c : {SpeedClass::U, SpeedClass::A, SpeedClass::B, SpeedClass::C}) {
        const auto i = static_cast<std::size_t>(c);
        ClassMetrics row{c, matrix.actual_count(i), precision(matrix.tp(i), matrix.fp(i)),
                         recall(matrix.tp(i), matrix.fn(i)), std::nullopt};
        row.f_measure = f_measure(row.precision, row.recall);
        report.rows.push_back(row);
    }
    report.accuracy = matrix.total() ? matrix.accuracy() : 0.0;
    try {
        report.false_alarm_rate = false_alarm_rate(matrix, static_cast<std::size_t>(SpeedClass::U));
    } catch (const InvalidInput&) {
        report.false_alarm_rate = std::nullopt;
    }
    return report;
}

GlobalReport evaluate_global(const std::function<SpeedClass(const CoilRecord&)>& classify,
                             const Dataset& validation) {
    auto matrix = speed_class_matrix();
    for (const auto& rec : validation.records()) {
        matrix.add(static_cast<std::size_t>(actual_class(rec)),
                   static_cast<std::size_t>(classify(rec)));
    }
    return report_from_matrix(matrix);
}

GlobalReport evaluate_global(const tree::DecisionTree& tree, const recbfn::Network& network,
                             const Dataset& validation) {
    advisor::check_compatible(tree, network);
    return evaluate_global(
        [&](const CoilRecord& rec) { return advisor::classify_operating_point(tree, network, rec); },
        validation);
}

std::string format_metric(std::optional<double> x) {
    if (!x) return "n/a";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", *x);
    return buf;
}

void write_report(std::ostream& out, const GlobalReport& report) {
    char line[128];
    std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %8s\n", "class", "Precision", "Recall",
                  "F-Measure", "support");
    out << line;
    for (const auto& row : report.rows) {
        std::snprintf(line, sizeof line, "%-8s %10s %10s %10s %8zu\n",
                      std::string(to_string(row.speed_class)).c_str(),
                      format_metric(row.precision).c_str(), format_metric(row.recall).c_str(),
                      format_metric(row.f_measure).c_str(), row.support);
        out << line;
    }
    out << "accuracy " << format_metric(report.accuracy) << '\n';
    out << "false_alarm_rate " << format_metric(report.false_alarm_rate) << '\n';
    out << "samples " << report.matrix.total() << '\n';
    out << "confusion (rows actual A,B,C,U; columns predicted A,B,C,U)\n";
    for (std::size_t a = 0; a < report.matrix.classes(); ++a) {
        out << "  " << report.matrix.name(a);
        for (std::size_t p = 0; p < report.matrix.classes(); ++p) out << ' ' << report.matrix.at(a, p);
        out << '\n';
    }
    for (const auto& row : report.rows) {
        out << "ROW " << to_string(row.speed_class) << ' '
            << (row.precision ? format_number(*row.precision) : "n/a") << ' '
            << (row.recall ? format_number(*row.recall) : "n/a") << ' '
            << (row.f_measure ? format_number(*row.f_measure) : "n/a") << ' ' << row.support << '\n';
    }
}

std::string format_report(const GlobalReport& report) {
    std::ostringstream os;
    write_report(os, report);
    return os.str();
}

}  // namespace pickling::eval
