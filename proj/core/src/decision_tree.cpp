#include "pickling/decision_tree.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"

namespace pickling::tree {

namespace {

// Information gains below this are treated as zero.
constexpr double kGainEpsilon = 1e-12;

ClassCounts subtract(const ClassCounts& a, const ClassCounts& b) {
    ClassCounts out{};
    for (std::size_t i = 0; i < kSpeedClassCount; ++i) out[i] = a[i] - b[i];
    return out;
}

std::size_t total(const ClassCounts& c) { return std::accumulate(c.begin(), c.end(), std::size_t{0}); }

double entropy_of(const ClassCounts& c) { return entropy(c); }

double ratio_from_counts(const ClassCounts& left, const ClassCounts& right) {
    const double nl = static_cast<double>(total(left));
    const double nr = static_cast<double>(total(right));
    const double n = nl + nr;
    ClassCounts parent{};
    for (std::size_t i = 0; i < kSpeedClassCount; ++i) parent[i] = left[i] + right[i];

    const double pl = nl / n;
    const double pr = nr / n;
    const double gain = entropy_of(parent) - (pl * entropy_of(left) + pr * entropy_of(right));
    if (gain <= kGainEpsilon) return 0.0;
    const double split_info = -(pl * std::log2(pl) + pr * std::log2(pr));
    return gain / split_info;
}

SpeedClass majority(const ClassCounts& c) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < kSpeedClassCount; ++i) {
        if (c[i] > c[best]) best = i;
    }
    return static_cast<SpeedClass>(best);
}

ClassCounts counts_of(const TrainingSet& s, std::span<const std::size_t> rows) {
    ClassCounts c{};
    for (std::size_t r : rows) ++c[static_cast<std::size_t>(s.label(r))];
    return c;
}

bool is_pure(const ClassCounts& c) {
    return std::count_if(c.begin(), c.end(), [](std::size_t x) { return x > 0; }) <= 1;
}

std::optional<Split> best_split_rows(const TrainingSet& s, std::span<const std::size_t> rows,
                                     std::size_t min_leaf) {
    if (rows.size() < 2) return std::nullopt;
    const ClassCounts all = counts_of(s, rows);
    if (is_pure(all)) return std::nullopt;
    min_leaf = std::max<std::size_t>(min_leaf, 1);

    std::optional<Split> best;
    std::vector<std::size_t> order(rows.begin(), rows.end());
    for (std::size_t f = 0; f < s.feature_count(); ++f) {
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return s.value(a, f) < s.value(b, f);
        });
        ClassCounts left{};
        for (std::size_t i = 0; i + 1 < order.size(); ++i) {
            ++left[static_cast<std::size_t>(s.label(order[i]))];
            const double a = s.value(order[i], f);
            const double b = s.value(order[i + 1], f);
            if (!(a < b)) continue;
            const std::size_t n_left = i + 1;
            if (n_left < min_leaf || order.size() - n_left < min_leaf) continue;
            const double ratio = ratio_from_counts(left, subtract(all, left));
            if (ratio <= 0.0) continue;
            if (!best || ratio > best->gain_ratio) best = Split{f, std::midpoint(a, b), ratio};
        }
    }
    return best;
}

struct Grown {
    bool leaf = true;
    std::size_t feature = 0;
    double threshold = 0.0;
    ClassCounts histogram{};
    std::unique_ptr<Grown> left;
    std::unique_ptr<Grown> right;
};

std::unique_ptr<Grown> grow(const TrainingSet& s, std::vector<std::size_t> rows,
                            const TreeConfig& config) {
    auto node = std::make_unique<Grown>();
    node->histogram = counts_of(s, rows);
    if (is_pure(node->histogram) || rows.size() < 2 * config.min_leaf) return node;

    const auto split = best_split_rows(s, rows, config.min_leaf);
    if (!split) return node;

    std::vector<std::size_t> left_rows;
    std::vector<std::size_t> right_rows;
    for (std::size_t r : rows) {
        (s.value(r, split->feature) <= split->threshold ? left_rows : right_rows).push_back(r);
    }
    rows.clear();
    rows.shrink_to_fit();

    node->leaf = false;
    node->feature = split->feature;
    node->threshold = split->threshold;
    node->left = grow(s, std::move(left_rows), config);
    node->right = grow(s, std::move(right_rows), config);
    return node;
}

// Subtree-replacement pass; returns the pessimistic error estimate of the kept subtree.
double prune(Grown& node, double confidence) {
    const double n = static_cast<double>(total(node.histogram));
    const double leaf_errors =
        n - static_cast<double>(node.histogram[static_cast<std::size_t>(majority(node.histogram))]);
    const double as_leaf = leaf_errors + pessimistic_extra_errors(n, leaf_errors, confidence);
    if (node.leaf) return as_leaf;

    const double as_tree = prune(*node.left, confidence) + prune(*node.right, confidence);
    if (as_leaf <= as_tree + 0.1) {
        node.leaf = true;
        node.left.reset();
        node.right.reset();
        return as_leaf;
    }
    return as_tree;
}

std::size_t flatten(const Grown& g, std::vector<Node>& out) {
    const std::size_t id = out.size();
    out.push_back({});
    Node node;
    node.leaf = g.leaf;
    node.histogram = g.histogram;
    node.label = majority(g.histogram);
    if (!g.leaf) {
        node.feature = g.feature;
        node.threshold = g.threshold;
        node.left = flatten(*g.left, out);
        node.right = flatten(*g.right, out);
    }
    out[id] = node;
    return id;
}

std::string feature_token(std::size_t feature, std::size_t feature_count) {
    if (feature_count == kTreeFeatureCount) return std::string(field_name(kTreeFeatures[feature]));
    return "x" + std::to_string(feature);
}

std::optional<std::size_t> parse_feature(const std::string& token, std::size_t feature_count) {
    if (feature_count == kTreeFeatureCount) {
        for (std::size_t i = 0; i < kTreeFeatureCount; ++i) {
            if (field_name(kTreeFeatures[i]) == token) return i;
        }
    }
    if (token.size() > 1 && token[0] == 'x') {
        try {
            std::size_t pos = 0;
            const auto idx = std::stoul(token.substr(1), &pos);
            if (pos == token.size() - 1 && idx < feature_count) return idx;
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

}  // namespace

TrainingSet::TrainingSet(std::size_t feature_count) : feature_count_(feature_count) {
    if (feature_count == 0) throw InvalidInput("training set: need at least one feature");
}

void TrainingSet::add(std::span<const double> features, SpeedClass label) {
    if (features.size() != feature_count_) {
        throw InvalidInput("training set: expected " + std::to_string(feature_count_) +
                           " features, got " + std::to_string(features.size()));
    }
    for (double x : features) {
        if (!std::isfinite(x)) throw InvalidInput("training set: non-finite feature value");
    }
    values_.insert(values_.end(), features.begin(), features.end());
    labels_.push_back(label);
}

ClassCounts TrainingSet::class_counts() const {
    ClassCounts c{};
    for (SpeedClass l : labels_) ++c[static_cast<std::size_t>(l)];
    return c;
}

double entropy(std::span<const std::size_t> counts) {
    const double n = static_cast<double>(std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
    if (n == 0.0) throw InvalidInput("entropy: all counts are zero");
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h;
}

double gain_ratio(const TrainingSet& samples, std::size_t feature, double threshold) {
    if (feature >= samples.feature_count()) throw InvalidInput("gain_ratio: feature out of range");
    ClassCounts left{};
    ClassCounts right{};
    for (std::size_t r = 0; r < samples.size(); ++r) {
        auto& side = samples.value(r, feature) <= threshold ? left : right;
        ++side[static_cast<std::size_t>(samples.label(r))];
    }
    if (total(left) == 0 || total(right) == 0) {
        throw InvalidInput("gain_ratio: degenerate split at " + format_number(threshold) +
                           " leaves one side empty");
    }
    return ratio_from_counts(left, right);
}

std::optional<Split> best_split(const TrainingSet& samples, std::size_t min_leaf) {
    std::vector<std::size_t> rows(samples.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return best_split_rows(samples, rows, min_leaf);
}

void TreeConfig::validate() const {
    if (!(confidence > 0.0 && confidence < 1.0)) {
        throw ConfigError("tree: pruning confidence must lie in (0, 1)");
    }
    if (min_leaf < 1) throw ConfigError("tree: min_leaf must be at least 1");
}

double pessimistic_extra_errors(double n, double e, double confidence) {
    // Normal deviates for selected one-sided confidence levels, interpolated as in C4.5.
    static constexpr std::array<double, 9> kConf = {0, 0.001, 0.005, 0.01, 0.05, 0.10, 0.20, 0.40, 1.00};
    static constexpr std::array<double, 9> kDev = {4.0, 3.09, 2.58, 2.33, 1.65, 1.28, 0.84, 0.25, 0.00};

    std::size_t i = 1;
    while (i + 1 < kConf.size() && confidence > kConf[i]) ++i;
    double coeff = kDev[i - 1] + (kDev[i] - kDev[i - 1]) * (confidence - kConf[i - 1]) /
                                     (kConf[i] - kConf[i - 1]);
    coeff *= coeff;

    if (e < 1e-6) return n * (1.0 - std::exp(std::log(confidence) / n));
    if (e < 0.9999) {
        const double val0 = n * (1.0 - std::exp(std::log(confidence) / n));
        return val0 + e * (pessimistic_extra_errors(n, 1.0, confidence) - val0);
    }
    if (e + 0.5 >= n) return 0.67 * (n - e);
    const double pr = (e + 0.5 + coeff / 2.0 +
                       std::sqrt(coeff * ((e + 0.5) * (1.0 - (e + 0.5) / n) + coeff / 4.0))) /
                      (n + coeff);
    return n * pr - e;
}

DecisionTree::DecisionTree(std::vector<Node> nodes, std::size_t feature_count,
                           std::size_t sample_count, std::uint64_t seed)
    : nodes_(std::move(nodes)), feature_count_(feature_count), sample_count_(sample_count),
      seed_(seed) {
    if (nodes_.empty()) throw ModelError("decision tree: no nodes");
    if (feature_count_ == 0) throw ModelError("decision tree: zero features");

    // Walk from the root: every node reached exactly once, children after parents.
    std::vector<std::size_t> level(nodes_.size(), 0);
    std::vector<bool> reached(nodes_.size(), false);
    std::vector<std::size_t> stack = {0};
    reached[0] = true;
    level[0] = 1;
    std::size_t visited = 0;
    while (!stack.empty()) {
        const std::size_t id = stack.back();
        stack.pop_back();
        ++visited;
        depth_ = std::max(depth_, level[id]);
        const Node& n = nodes_[id];
        if (n.leaf) continue;
        if (n.feature >= feature_count_) throw ModelError("decision tree: feature out of range");
        if (!std::isfinite(n.threshold)) throw ModelError("decision tree: non-finite threshold");
        for (std::size_t child : {n.left, n.right}) {
            if (child <= id || child >= nodes_.size() || reached[child]) {
                throw ModelError("decision tree: malformed child link at node " + std::to_string(id));
            }
            reached[child] = true;
            level[child] = level[id] + 1;
            stack.push_back(child);
        }
    }
    if (visited != nodes_.size()) throw ModelError("decision tree: unreachable nodes");
}

SpeedClass DecisionTree::predict(std::span<const double> features) const {
    if (features.size() != feature_count_) {
        throw InvalidInput("decision tree: expected " + std::to_string(feature_count_) +
                           " features, got " + std::to_string(features.size()));
    }
    for (double x : features) {
        if (!std::isfinite(x)) throw InvalidInput("decision tree: missing or non-finite feature");
    }
    std::size_t id = 0;
    while (!nodes_[id].leaf) {
        const Node& n = nodes_[id];
        id = features[n.feature] <= n.threshold ? n.left : n.right;
    }
    return nodes_[id].label;
}

DecisionTree train_tree(const TrainingSet& samples, const TreeConfig& config, std::uint64_t seed) {
    config.validate();
    if (samples.empty()) throw InvalidInput("train_tree: empty training set");

    std::vector<std::size_t> rows(samples.size());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    auto root = grow(samples, std::move(rows), config);
    if (config.prune) prune(*root, config.confidence);

    std::vector<Node> nodes;
    flatten(*root, nodes);
    return DecisionTree(std::move(nodes), samples.feature_count(), samples.size(), seed);
}

SpeedClass predict_class(const DecisionTree& tree, const TreeFeatures& features) {
    return tree.predict(features);
}

void write_tree(std::ostream& out, const DecisionTree& tree) {
    out << "T " << tree.feature_count() << ' ' << tree.depth() << ' ' << tree.size() << ' '
        << tree.sample_count() << ' ' << tree.seed() << '\n';
    const auto nodes = tree.nodes();
    for (std::size_t id = 0; id < nodes.size(); ++id) {
        const Node& n = nodes[id];
        if (n.leaf) {
            out << "L " << id << ' ' << to_string(n.label) << ' ' << n.histogram[0] << ','
                << n.histogram[1] << ',' << n.histogram[2] << ',' << n.histogram[3] << '\n';
        } else {
            out << "N " << id << ' ' << feature_token(n.feature, tree.feature_count()) << ' '
                << format_number(n.threshold) << ' ' << n.left << ' ' << n.right << '\n';
        }
    }
}

std::string serialize_tree(const DecisionTree& tree) {
    std::ostringstream os;
    write_tree(os, tree);
    return os.str();
}

DecisionTree read_tree(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto fail = [&](const std::string& why) -> ModelError {
        return ModelError("tree file line " + std::to_string(line_no) + ": " + why);
    };

    std::size_t feature_count = 0, depth = 0, size = 0, samples = 0;
    std::uint64_t seed = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        if (!(ls >> tag >> feature_count >> depth >> size >> samples >> seed) || tag != "T") {
            throw fail("expected header 'T <features> <depth> <size> <samples> <seed>'");
        }
        break;
    }
    if (size == 0) throw fail("missing or empty tree header");

    std::vector<Node> nodes(size);
    std::vector<bool> defined(size, false);
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        std::size_t id = 0;
        if (!(ls >> tag >> id)) throw fail("malformed node line");
        if (id >= size) throw fail("node id out of range");
        if (defined[id]) throw fail("duplicate node id");
        Node n;
        if (tag == "L") {
            std::string cls, hist;
            if (!(ls >> cls >> hist)) throw fail("malformed leaf");
            const auto label = speed_class_from_string(cls);
            if (!label) throw fail("unknown class '" + cls + "'");
            n.leaf = true;
            n.label = *label;
            std::istringstream hs(hist);
            char sep = 0;
            if (!(hs >> n.histogram[0] >> sep >> n.histogram[1] >> sep >> n.histogram[2] >> sep >>
                  n.histogram[3])) {
                throw fail("malformed histogram");
            }
        } else if (tag == "N") {
            std::string feature, threshold;
            if (!(ls >> feature >> threshold >> n.left >> n.right)) throw fail("malformed split");
            const auto f = parse_feature(feature, feature_count);
            if (!f) throw fail("unknown feature '" + feature + "'");
            n.leaf = false;
            n.feature = *f;
            if (!parse_number(threshold, n.threshold)) throw fail("bad threshold");
        } else {
            throw fail("unknown tag '" + tag + "'");
        }
        std::string extra;
        if (ls >> extra) throw fail("trailing tokens");
        nodes[id] = n;
        defined[id] = true;
    }
    for (std::size_t id = 0; id < size; ++id) {
        if (!defined[id]) throw ModelError("tree file: node " + std::to_string(id) + " missing");
    }
    // Split nodes carry no counts on disk; rebuild them from their children.
    for (std::size_t id = size; id-- > 0;) {
        Node& n = nodes[id];
        if (n.leaf) continue;
        if (n.left <= id || n.right <= id || n.left >= size || n.right >= size) {
            throw ModelError("tree file: node " + std::to_string(id) + " has bad children");
        }
        for (std::size_t c = 0; c < n.histogram.size(); ++c) {
            n.histogram[c] = nodes[n.left].histogram[c] + nodes[n.right].histogram[c];
        }
        n.label = majority(n.histogram);
    }
    DecisionTree tree(std::move(nodes), feature_count, samples, seed);
    if (tree.depth() != depth) throw ModelError("tree file: header depth does not match nodes");
    return tree;
}

DecisionTree parse_tree(const std::string& text) {
    std::istringstream in(text);
    return read_tree(in);
}

}  // namespace pickling::tree
