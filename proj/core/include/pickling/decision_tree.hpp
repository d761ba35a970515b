#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pickling/coil.hpp"

namespace pickling::tree {

using ClassCounts = std::array<std::size_t, kSpeedClassCount>;

// Row-major feature matrix with one SpeedClass label per row.
class TrainingSet {
public:
    explicit TrainingSet(std::size_t feature_count);

    void add(std::span<const double> features, SpeedClass label);

    std::size_t feature_count() const noexcept { return feature_count_; }
    std::size_t size() const noexcept { return labels_.size(); }
    bool empty() const noexcept { return labels_.empty(); }
    double value(std::size_t row, std::size_t feature) const {
        return values_[row * feature_count_ + feature];
    }
    std::span<const double> row(std::size_t i) const {
        return {values_.data() + i * feature_count_, feature_count_};
    }
    SpeedClass label(std::size_t row) const { return labels_[row]; }
    ClassCounts class_counts() const;

private:
    std::size_t feature_count_;
    std::vector<double> values_;
    std::vector<SpeedClass> labels_;
};

// Shannon entropy in bits. Throws InvalidInput when every count is zero.
double entropy(std::span<const std::size_t> counts);

// Gain ratio of the binary split feature <= threshold over the whole set.
// Returns 0 for zero information gain. Throws InvalidInput when one side is empty.
double gain_ratio(const TrainingSet& samples, std::size_t feature, double threshold);

struct Split {
    std::size_t feature;
    double threshold;
    double gain_ratio;
};

// Highest gain ratio over every feature and every midpoint between consecutive
// distinct values, each side holding at least min_leaf rows. Ties go to the lower
// feature index, then the lower threshold. nullopt when no split has positive gain.
std::optional<Split> best_split(const TrainingSet& samples, std::size_t min_leaf = 1);

struct TreeConfig {
    bool prune = true;
    double confidence = 0.25;  // C4.5 pessimistic pruning CF
    std::size_t min_leaf = 2;

    void validate() const;  // throws ConfigError
};

struct Node {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
    SpeedClass label = SpeedClass::A;
    ClassCounts histogram{};

    friend bool operator==(const Node&, const Node&) = default;
};

// Nodes are stored in preorder; node 0 is the root. Left branch is feature <= threshold.
class DecisionTree {
public:
    DecisionTree(std::vector<Node> nodes, std::size_t feature_count, std::size_t sample_count,
                 std::uint64_t seed);

    std::span<const Node> nodes() const noexcept { return nodes_; }
    std::size_t feature_count() const noexcept { return feature_count_; }
    std::size_t depth() const noexcept { return depth_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    std::size_t sample_count() const noexcept { return sample_count_; }
    std::uint64_t seed() const noexcept { return seed_; }

    // Throws InvalidInput on a wrong feature count or a non-finite value.
    SpeedClass predict(std::span<const double> features) const;

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;

private:
    std::vector<Node> nodes_;
    std::size_t feature_count_;
    std::size_t sample_count_;
    std::uint64_t seed_;
    std::size_t depth_ = 0;
};

// Grows a binary C4.5 tree; `seed` is recorded as training metadata only.
// Throws InvalidInput on an empty training set.
DecisionTree train_tree(const TrainingSet& samples, const TreeConfig& config = {},
                        std::uint64_t seed = 0);

SpeedClass predict_class(const DecisionTree& tree, const TreeFeatures& features);

// C4.5 upper-bound on extra errors for a leaf with n cases and e errors.
double pessimistic_extra_errors(double n, double e, double confidence);

// Text format:
//   T <feature_count> <depth> <size> <sample_count> <seed>
//   N <id> <feature> <threshold> <left-id> <right-id>
//   L <id> <class> <count_A>,<count_B>,<count_C>,<count_U>
// Features are written by name for the 12-feature coil layout, else as x<index>.
void write_tree(std::ostream& out, const DecisionTree& tree);
std::string serialize_tree(const DecisionTree& tree);
DecisionTree read_tree(std::istream& in);  // throws ModelError
DecisionTree parse_tree(const std::string& text);

}  // namespace pickling::tree
