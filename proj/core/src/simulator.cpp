#include "pickling/simulator.hpp"

#include <cmath>
#include <string>

#include "pickling/number_format.hpp"
#include "pickling/random.hpp"

namespace pickling::sim {

namespace {

constexpr double kCelsiusToKelvin = 273.15;

constexpr std::array<Field, kTankCount> kTankHcl = {Field::HCl_1, Field::HCl_2, Field::HCl_3};
constexpr std::array<Field, kTankCount> kTankTemp = {Field::T_1, Field::T_2, Field::T_3};
constexpr std::array<Field, kTankCount> kTankFe = {Field::Fe2_1, Field::Fe2_2, Field::Fe2_3};

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

double round_to(double x, double scale) { return std::round(x * scale) / scale; }

}  // namespace

double LineGeometry::total_length() const noexcept {
    double total = 0.0;
    for (double l : tank_length) total += l;
    return total;
}

void LineGeometry::validate() const {
    for (std::size_t k = 0; k < kTankCount; ++k) {
        if (!positive_finite(tank_length[k])) {
            throw ConfigError("geometry: tank " + std::to_string(k + 1) +
                              " length must be positive, got " + format_number(tank_length[k]));
        }
    }
}

void KineticsParams::validate() const {
    auto require_positive = [](double x, const char* name) {
        if (!positive_finite(x)) {
            throw ConfigError(std::string("kinetics: ") + name + " must be positive, got " +
                              format_number(x));
        }
    };
    require_positive(k0, "k0");
    require_positive(activation, "activation");
    require_positive(acid_exponent, "acid_exponent");
    require_positive(iron_inhibition, "iron_inhibition");
    require_positive(scale_coefficient, "scale_coefficient");
    if (acid_exponent < 0.5 || acid_exponent > 2.0) {
        throw ConfigError("kinetics: acid_exponent must lie in [0.5, 2], got " +
                          format_number(acid_exponent));
    }
}

void SimulatorConfig::validate() const {
    kinetics.validate();
    geometry.validate();
    for (Field f : kAllFields) {
        if (f == Field::v) continue;
        const auto& r = fields[index_of(f)];
        if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi) {
            throw ConfigError("simulator: bad sampling range for " + std::string(field_name(f)));
        }
    }
    if (speed_ratio.empty()) throw ConfigError("simulator: no speed ratio components");
    double total_weight = 0.0;
    for (const auto& c : speed_ratio) {
        if (!(c.weight > 0.0) || !positive_finite(c.lo) || !(c.hi >= c.lo)) {
            throw ConfigError("simulator: bad speed ratio component");
        }
        total_weight += c.weight;
    }
    if (!std::isfinite(total_weight)) throw ConfigError("simulator: bad speed ratio weights");
    if (!(noise_amplitude >= 0.0) || noise_amplitude >= 1.0) {
        throw ConfigError("simulator: noise amplitude must lie in [0, 1)");
    }
    if (decimals < 0 || decimals > 9) throw ConfigError("simulator: decimals must lie in [0, 9]");
}

double tank_rate(double hcl, double temperature_c, double fe2, const KineticsParams& params) {
    const double free_fraction = 1.0 - params.iron_inhibition * fe2;
    if (free_fraction <= 0.0) return 0.0;
    return params.k0 * std::pow(hcl, params.acid_exponent) *
           std::exp(-params.activation / (temperature_c + kCelsiusToKelvin)) * free_fraction;
}

double required_pickling_time(const ProcessConditions& c, const KineticsParams& params) {
    double total_rate = 0.0;
    for (std::size_t k = 0; k < kTankCount; ++k) {
        total_rate += tank_rate(c[kTankHcl[k]], c[kTankTemp[k]], c[kTankFe[k]], params);
    }
    if (!(total_rate > 0.0)) {
        throw SaturatedBath("required_pickling_time: every tank is iron-saturated (beta * Fe2 >= 1)");
    }
    return params.scale_coefficient * c[Field::t_s] / total_rate;
}

double required_pickling_time(const CoilRecord& record, const KineticsParams& params) {
    return required_pickling_time(record.conditions(), params);
}

double residence_time(double v, const LineGeometry& geometry) {
    if (!positive_finite(v)) {
        throw InvalidInput("residence_time: speed must be positive, got " + format_number(v));
    }
    return geometry.total_length() / v;
}

double critical_speed(const ProcessConditions& c, const KineticsParams& params,
                      const LineGeometry& geometry) {
    return geometry.total_length() / required_pickling_time(c, params);
}

bool is_under_pickled(const ProcessConditions& c, double v, const KineticsParams& params,
                      const LineGeometry& geometry) {
    return residence_time(v, geometry) < required_pickling_time(c, params);
}

double label_noise(std::uint64_t noise_seed, double amplitude) {
    Rng rng(noise_seed);
    return amplitude * (2.0 * rng.uniform01() - 1.0);
}

bool label_sample(const CoilRecord& record, const KineticsParams& params,
                  const LineGeometry& geometry, std::uint64_t noise_seed, double noise_amplitude) {
    const double t_req = required_pickling_time(record, params);
    const double t_res = residence_time(record[Field::v], geometry);
    return t_res < t_req * (1.0 + label_noise(noise_seed, noise_amplitude));
}

Dataset generate_dataset(std::size_t n, double target_defect_fraction, std::uint64_t seed,
                         const SimulatorConfig& config, const BoundTable& bounds) {
    if (n < 100) throw InvalidInput("generate_dataset: n must be at least 100");
    if (!(target_defect_fraction > 0.0 && target_defect_fraction < 1.0)) {
        throw InvalidInput("generate_dataset: defect fraction must lie in (0, 1)");
    }
    config.validate();

    const auto defect_target =
        static_cast<std::size_t>(std::llround(static_cast<double>(n) * target_defect_fraction));
    const std::size_t clean_target = n - defect_target;
    const double scale = std::pow(10.0, config.decimals);

    double weight_total = 0.0;
    for (const auto& c : config.speed_ratio) weight_total += c.weight;

    std::vector<CoilRecord> records;
    records.reserve(n);
    std::size_t defects = 0;
    std::size_t clean = 0;
    const std::size_t budget = 100 * n;

    for (std::size_t draw = 0; draw < budget && records.size() < n; ++draw) {
        Rng rng(mix_seed(seed, draw));
        RawRecord raw;
        for (Field f : kAllFields) {
            if (f == Field::v) continue;
            const auto& r = config.fields[index_of(f)];
            raw[f] = round_to(rng.uniform(r.lo, r.hi), scale);
        }
        // Conditions must be valid before the kinetics are evaluated.
        raw[Field::v] = 1.0;
        auto conditions = validate_conditions(raw, bounds);
        if (!conditions.accepted()) continue;

        double v_crit;
        try {
            v_crit = critical_speed(*conditions.conditions, config.kinetics, config.geometry);
        } catch (const SaturatedBath&) {
            continue;
        }

        double pick = rng.uniform01() * weight_total;
        const SpeedRatioComponent* component = &config.speed_ratio.back();
        for (const auto& c : config.speed_ratio) {
            if (pick < c.weight) {
                component = &c;
                break;
            }
            pick -= c.weight;
        }
        raw[Field::v] = round_to(v_crit * rng.uniform(component->lo, component->hi), scale);

        const std::uint64_t noise_seed = rng.below(std::uint64_t(-1));
        auto checked = validate_record(raw, bounds);
        if (!checked.accepted()) continue;

        const bool defect = label_sample(*checked.record, config.kinetics, config.geometry,
                                         noise_seed, config.noise_amplitude);
        if (defect ? defects >= defect_target : clean >= clean_target) continue;
        raw.under_p = defect;
        records.push_back(make_record(raw, bounds));
        (defect ? defects : clean) += 1;
    }

    if (records.size() < n) {
        const double achieved =
            records.empty() ? 0.0
                            : static_cast<double>(defects) / static_cast<double>(records.size());
        throw GenerationFailure("generate_dataset: sampling budget of " + std::to_string(budget) +
                                    " draws exhausted with " + std::to_string(records.size()) +
                                    " records, achieved defect fraction " +
                                    format_number(achieved),
                                achieved);
    }
    return Dataset(std::move(records), Provenance::Simulated, seed);
}

}  // namespace pickling::sim
