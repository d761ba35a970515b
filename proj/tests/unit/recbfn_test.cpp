#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pickling/errors.hpp"
#include "pickling/recbfn.hpp"

using namespace pickling;
using namespace pickling::recbfn;

namespace {

// Own/other class maximum membership of a raw pattern, computed without the library.
std::pair<double, double> own_other(const Network& net, std::span<const double> raw, Label label) {
    std::vector<double> x;
    for (std::size_t d = 0; d < raw.size(); ++d) {
        const double lo = net.scaler().min()[d], hi = net.scaler().max()[d];
        x.push_back(std::clamp((raw[d] - lo) / (hi - lo), kClampLo, kClampHi));
    }
    double own = 0, oth = 0;
    for (const auto& u : net.units()) {
        double m = 1;
        for (std::size_t d = 0; d < x.size(); ++d) {
            const auto& t = u.dims[d];
            m = std::min(m, oracle::trapezoid(t.s_lo, t.c_lo, t.c_hi, t.s_hi, x[d]));
        }
        (u.label == label ? own : oth) = std::max(u.label == label ? own : oth, m);
    }
    return {own, oth};
}

PatternSet two_clusters(std::mt19937_64& rng, int per_class) {
    std::normal_distribution<double> noise(0, 0.05);
    PatternSet p;
    p.dims = 2;
    for (int i = 0; i < per_class; ++i) {
        const double a[2] = {0.2 + noise(rng), 0.2 + noise(rng)};
        const double b[2] = {0.8 + noise(rng), 0.8 + noise(rng)};
        p.add(a, Label::NoDefect);
        p.add(b, Label::Defect);
    }
    return p;
}

PatternSet random_patterns(std::mt19937_64& rng, int n, std::size_t dims) {
    std::uniform_real_distribution<double> u(0, 1);
    PatternSet p;
    p.dims = dims;
    for (int i = 0; i < n; ++i) {
        std::vector<double> x;
        for (std::size_t d = 0; d < dims; ++d) x.push_back(u(rng));
        p.add(x, (x[0] + x[1] > 1.0) == (i % 9 != 0) ? Label::Defect : Label::NoDefect);
    }
    return p;
}

}  // namespace

TEST(Scaler, Examples) {
    const InputScaler s({0, 10}, {10, 20});
    const double mid[2] = {5, 15};
    EXPECT_EQ(s.normalize(mid), (std::vector<double>{0.5, 0.5}));
    const double far[2] = {-100, 100};
    EXPECT_EQ(s.normalize(far), (std::vector<double>{kClampLo, kClampHi}));
    const double wrong[1] = {1};
    EXPECT_THROW(s.normalize(wrong), InvalidInput);
    EXPECT_THROW(InputScaler().normalize(mid), ModelError);
}

TEST(Scaler, FitRejectsConstantColumn) {
    const std::vector<double> rows{1, 5, 2, 5, 3, 5};
    EXPECT_THROW(InputScaler::fit(rows, 2), InvalidInput);
    const std::vector<double> ok{1, 5, 2, 6};
    const auto s = InputScaler::fit(ok, 2);
    EXPECT_EQ(s.min(), (std::vector<double>{1, 5}));
    EXPECT_EQ(s.max(), (std::vector<double>{2, 6}));
}

TEST(Trapezoid, MatchesDefinition) {
    const Trapezoid t{0.1, 0.3, 0.5, 0.9};
    EXPECT_DOUBLE_EQ(t.degree(0.4), 1.0);
    EXPECT_DOUBLE_EQ(t.degree(0.2), 0.5);
    EXPECT_DOUBLE_EQ(t.degree(0.7), 0.5);
    EXPECT_EQ(t.degree(0.1), 0.0);
    EXPECT_EQ(t.degree(0.95), 0.0);
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int i = 0; i < 5000; ++i) {
        const double x = u(rng);
        EXPECT_NEAR(t.degree(x), oracle::trapezoid(0.1, 0.3, 0.5, 0.9, x), 1e-15);
    }
}

TEST(Trapezoid, VerticalFlank) {
    const Trapezoid t{0.5, 0.5, kClampHi, kClampHi};
    EXPECT_EQ(t.degree(std::nextafter(0.5, 0.0)), 0.0);
    EXPECT_EQ(t.degree(0.5), 1.0);
}

TEST(Membership, MinimumOverDimensions) {
    const Unit u{{{0, 0.2, 0.4, 0.6}, {0, 0.5, 0.5, 1}}, Label::Defect, 1};
    const double x[2] = {0.5, 0.75};
    EXPECT_DOUBLE_EQ(membership(u, x), 0.5);
}

TEST(Predict, WeightedSumAndTies) {
    const auto net = fixtures::flip_network(300);
    std::vector<double> x(8, 50.0);
    x[7] = 299;
    auto p = net.predict(x);
    EXPECT_EQ(p.label, Label::NoDefect);
    EXPECT_EQ(p.score_no_defect, 1.0);
    EXPECT_EQ(p.score_defect, 0.0);
    x[7] = 300;
    p = net.predict(x);
    EXPECT_EQ(p.label, Label::Defect);
    EXPECT_EQ(p.score_defect, 5.0);

    const Network empty(InputScaler({0}, {1}), {}, Thresholds{});
    const double z[1] = {0.5};
    EXPECT_EQ(empty.predict(z).label, Label::Defect);
}

TEST(Train, TwoClustersGiveTwoUnits) {
    std::mt19937_64 rng(32);
    const auto p = two_clusters(rng, 40);
    const auto r = train_recbfn(p);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.network.unit_count(Label::Defect), 1u);
    EXPECT_EQ(r.network.unit_count(Label::NoDefect), 1u);
    EXPECT_EQ(r.network.units()[0].weight + r.network.units()[1].weight, 80u);
    for (std::size_t i = 0; i < p.size(); ++i) EXPECT_EQ(r.network.predict(p.row(i)).label, p.labels[i]);
}

TEST(Train, SingleClassThrows) {
    PatternSet p;
    p.dims = 1;
    for (double x : {0.0, 1.0, 2.0}) p.add(std::span<const double>(&x, 1), Label::Defect);
    EXPECT_THROW(train_recbfn(p), ModelError);
}

TEST(Train, XorSatisfiesThresholds) {
    PatternSet p;
    p.dims = 2;
    for (int i = 0; i < 4; ++i) {
        const double x[2] = {static_cast<double>(i & 1), static_cast<double>(i >> 1)};
        p.add(x, (i == 1 || i == 2) ? Label::Defect : Label::NoDefect);
    }
    const auto r = train_recbfn(p);
    ASSERT_TRUE(r.converged);
    EXPECT_EQ(r.residual_conflicts, 0u);
    for (std::size_t i = 0; i < p.size(); ++i) {
        const auto [own, oth] = own_other(r.network, p.row(i), p.labels[i]);
        EXPECT_GE(own, 0.4);
        EXPECT_LT(oth, 0.2);
        EXPECT_EQ(r.network.predict(p.row(i)).label, p.labels[i]);
    }
}

TEST(Train, OutOfSupportIsDefect) {
    std::mt19937_64 rng(33);
    const auto r = train_recbfn(two_clusters(rng, 20));
    // Far away along the diagonal, past both clusters' supports.
    const double x[2] = {-50, 60};
    const auto p = r.network.predict(x);
    if (p.score_no_defect == 0 && p.score_defect == 0) EXPECT_EQ(p.label, Label::Defect);
}

TEST(Train, ConvergedRunsSatisfyInvariantsByOracle) {
    std::mt19937_64 rng(34);
    int converged = 0;
    for (int trial = 0; trial < 30; ++trial) {
        const auto p = random_patterns(rng, 120, 3);
        const auto r = train_recbfn(p, Thresholds{0.4, 0.2}, 40);
        EXPECT_EQ(r.residual_conflicts, count_threshold_violations(r.network, p));
        if (!r.converged) continue;
        ++converged;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const auto [own, oth] = own_other(r.network, p.row(i), p.labels[i]);
            EXPECT_GE(own, 0.4) << "trial " << trial << " row " << i;
            EXPECT_LT(oth, 0.2) << "trial " << trial << " row " << i;
        }
        std::size_t total = 0;
        for (const auto& u : r.network.units()) {
            EXPECT_GT(u.weight, 0u);
            total += u.weight;
            for (const auto& t : u.dims) {
                EXPECT_LE(t.s_lo, t.c_lo);
                EXPECT_LE(t.c_lo, t.c_hi);
                EXPECT_LE(t.c_hi, t.s_hi);
            }
        }
        EXPECT_GE(total, p.size());
    }
    EXPECT_GT(converged, 20);
}

TEST(Train, Deterministic) {
    std::mt19937_64 rng(35);
    const auto p = random_patterns(rng, 150, 4);
    EXPECT_EQ(train_recbfn(p).network, train_recbfn(p).network);
}

TEST(Thresholds, Validation) {
    EXPECT_NO_THROW((Thresholds{0.4, 0.2}.validate()));
    EXPECT_THROW((Thresholds{0.2, 0.4}.validate()), ConfigError);
    EXPECT_THROW((Thresholds{0.4, 0.0}.validate()), ConfigError);
    EXPECT_THROW((Thresholds{1.1, 0.2}.validate()), ConfigError);
}

TEST(NetworkSerialization, RoundTripIsExact) {
    std::mt19937_64 rng(36);
    const auto p = random_patterns(rng, 200, 8);
    const auto net = train_recbfn(p).network;
    const auto text = serialize_network(net);
    EXPECT_EQ(text.rfind("R 8 ", 0), 0u);
    const auto back = parse_network(text);
    EXPECT_EQ(back, net);
    EXPECT_EQ(serialize_network(back), text);
    std::uniform_real_distribution<double> u(-0.5, 1.5);
    for (int i = 0; i < 1000; ++i) {
        std::vector<double> x;
        for (int d = 0; d < 8; ++d) x.push_back(u(rng));
        const auto a = net.predict(x), b = back.predict(x);
        EXPECT_EQ(a.label, b.label);
        EXPECT_EQ(a.score_defect, b.score_defect);
        EXPECT_EQ(a.score_no_defect, b.score_no_defect);
    }
}

TEST(NetworkSerialization, RejectsMalformedText) {
    EXPECT_THROW(parse_network(""), ModelError);
    EXPECT_THROW(parse_network("R 1 0.4 0.2\nS 0 1\nU X 1 0 0 1 1\n"), ModelError);
    EXPECT_THROW(parse_network("R 1 0.4 0.2\nS 0 1\nU D 1 0 0 1\n"), ModelError);
    EXPECT_THROW(parse_network("R 1 0.4 0.2\nS 1 0\nU D 1 0 0 1 1\n"), ModelError);
    EXPECT_NO_THROW(parse_network("R 1 0.4 0.2\nS 0 1\nU D 1 0 0 1 1\n"));
}
