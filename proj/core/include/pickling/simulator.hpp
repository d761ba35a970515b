#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pickling/coil.hpp"
#include "pickling/errors.hpp"

namespace pickling::sim {

inline constexpr std::size_t kTankCount = 3;

// Pickling tank lengths in metres. The rinse tank does not attack scale.
struct LineGeometry {
    std::array<double, kTankCount> tank_length{};

    double total_length() const noexcept;
    void validate() const;  // throws ConfigError
};

// Arrhenius-style scale dissolution model. Per tank k the attack rate is
//   k0 * HCl_k^n * exp(-E / (T_k + 273.15)) * max(0, 1 - beta * Fe2_k)
// and the time needed to clear the scale is gamma * t_s / sum_k(rate_k).
struct KineticsParams {
    double k0 = 0;             // base rate constant
    double activation = 0;     // E, kelvin
    double acid_exponent = 0;  // n, in [0.5, 2]
    double iron_inhibition = 0;  // beta, L/g
    double scale_coefficient = 0;  // gamma, per mm of strip thickness

    void validate() const;  // throws ConfigError
};

struct UniformRange {
    double lo = 0;
    double hi = 0;
};

// One component of the operator set-point model: the line speed is drawn as
// v = r * v_crit with r ~ U[lo, hi], where v_crit is the noiseless critical speed.
struct SpeedRatioComponent {
    double weight = 1;
    double lo = 0;
    double hi = 0;
};

struct SimulatorConfig {
    KineticsParams kinetics;
    LineGeometry geometry;
    std::array<UniformRange, kFieldCount> fields{};  // entry for v is unused
    std::vector<SpeedRatioComponent> speed_ratio;
    double noise_amplitude = 0.05;
    int decimals = 3;  // sampled values are rounded to this many decimals

    void validate() const;  // throws ConfigError
};

// Attack rate of one tank; zero once the bath is iron-saturated.
double tank_rate(double hcl, double temperature_c, double fe2, const KineticsParams& params);

// Time to fully dissolve the scale. Throws SaturatedBath when every tank rate is zero.
double required_pickling_time(const ProcessConditions& conditions, const KineticsParams& params);
double required_pickling_time(const CoilRecord& record, const KineticsParams& params);

// Time spent in the pickling tanks. Throws InvalidInput for v <= 0.
double residence_time(double v, const LineGeometry& geometry);

// Highest speed at which the noiseless model still clears the scale.
double critical_speed(const ProcessConditions& conditions, const KineticsParams& params,
                      const LineGeometry& geometry);

// Noiseless ground truth: under-pickled iff residence time < required time.
bool is_under_pickled(const ProcessConditions& conditions, double v, const KineticsParams& params,
                      const LineGeometry& geometry);

// Noise term epsilon in [-amplitude, amplitude], deterministic in noise_seed.
double label_noise(std::uint64_t noise_seed, double amplitude);

// under_p = t_res < t_req * (1 + epsilon).
bool label_sample(const CoilRecord& record, const KineticsParams& params,
                  const LineGeometry& geometry, std::uint64_t noise_seed,
                  double noise_amplitude = 0.05);

class GenerationFailure : public DataError {
public:
    GenerationFailure(const std::string& what, double achieved_fraction)
        : DataError(what), achieved_fraction_(achieved_fraction) {}
    double achieved_fraction() const noexcept { return achieved_fraction_; }

private:
    double achieved_fraction_;
};

// Draws n labeled, validated records whose defect share is round(n * fraction) / n.
// Deterministic in seed. Throws InvalidInput for n < 100 or fraction outside (0, 1),
// and GenerationFailure when more than 100 * n draws are needed.
Dataset generate_dataset(std::size_t n, double target_defect_fraction, std::uint64_t seed,
                         const SimulatorConfig& config,
                         const BoundTable& bounds = BoundTable::defaults());

}  // namespace pickling::sim
