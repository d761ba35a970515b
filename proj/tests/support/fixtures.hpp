#pragma once

#include <atomic>
#include <filesystem>
#include <random>
#include <string>

#include <unistd.h>

#include "pickling/advisor.hpp"
#include "pickling/coil.hpp"
#include "pickling/config.hpp"
#include "pickling/recbfn.hpp"

#ifndef PICKLING_TEST_CONFIG
#error "PICKLING_TEST_CONFIG must point at config/pickling.conf"
#endif

namespace fixtures {

inline pickling::AppConfig default_config() { return pickling::load_config(PICKLING_TEST_CONFIG); }

// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("pickling-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::string file(const std::string& name) const { return (path_ / name).string(); }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

// A plausible in-range coil; v defaults to 200.
inline pickling::RawRecord typical_raw(double v = 200.0) {
    using pickling::Field;
    pickling::RawRecord r;
    r[Field::W] = 20;
    r[Field::t_s] = 3;
    r[Field::w_s] = 1250;
    r[Field::T_1] = 80;
    r[Field::T_2] = 80;
    r[Field::T_3] = 80;
    r[Field::T_rinse] = 45;
    r[Field::v] = v;
    r[Field::HCl_1] = 10;
    r[Field::HCl_2] = 3;
    r[Field::HCl_3] = 3;
    r[Field::Fe2_1] = 30;
    r[Field::Fe2_2] = 30;
    r[Field::Fe2_3] = 30;
    return r;
}

// Uniform coil drawn inside the validation bounds (with a small margin off the edges).
inline pickling::RawRecord random_raw(std::mt19937_64& rng) {
    using pickling::Field;
    auto u = [&](double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); };
    pickling::RawRecord r;
    r[Field::W] = u(1, 60);
    r[Field::t_s] = u(0.5, 10);
    r[Field::w_s] = u(500, 3000);
    r[Field::T_1] = u(21, 99);
    r[Field::T_2] = u(21, 99);
    r[Field::T_3] = u(21, 99);
    r[Field::T_rinse] = u(21, 99);
    r[Field::v] = u(1, 599);
    for (Field f : {Field::HCl_1, Field::HCl_2, Field::HCl_3}) r[f] = u(0.1, 20);
    for (Field f : {Field::Fe2_1, Field::Fe2_2, Field::Fe2_3}) r[f] = u(0, 200);
    return r;
}

// Network over the 8 coil inputs, each scaled from [0, 100] except v from [100, 500].
// One no-defect unit covers everything; one defect unit covers scaled v >= 0.5
// (raw v >= 300) with a vertical flank, so every v below 300 is clean and 300
// and above is defective.
inline pickling::recbfn::Network flip_network(double flip_speed = 300.0) {
    using namespace pickling::recbfn;
    std::vector<double> lo(8, 0.0), hi(8, 100.0);
    lo[7] = 100.0;
    hi[7] = 500.0;
    InputScaler scaler(lo, hi);
    const double edge = (flip_speed - 100.0) / 400.0;

    Unit clean{std::vector<Trapezoid>(8, Trapezoid{kClampLo, kClampLo, kClampHi, kClampHi}),
               Label::NoDefect, 1};
    Unit defect{std::vector<Trapezoid>(8, Trapezoid{kClampLo, kClampLo, kClampHi, kClampHi}),
                Label::Defect, 5};
    defect.dims[7] = Trapezoid{edge, edge, kClampHi, kClampHi};
    return Network(scaler, {clean, defect}, Thresholds{});
}

// Single-leaf tree over the coil tree features that always answers `c`.
inline pickling::tree::DecisionTree constant_tree(pickling::SpeedClass c) {
    pickling::tree::TrainingSet set(pickling::kTreeFeatures.size());
    const std::vector<double> x(pickling::kTreeFeatures.size(), 1.0);
    set.add(x, c);
    return pickling::tree::train_tree(set);
}

inline pickling::advisor::BathInputs typical_bath() {
    return pickling::advisor::BathInputs::make({80, 10, 30, 3, 30, 3, 30});
}

}  // namespace fixtures
