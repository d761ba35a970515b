#include "pickling/config.hpp"

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "pickling/number_format.hpp"

namespace pickling {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<double> numbers(const std::string& key, const std::string& value) {
    std::istringstream in(value);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        double x = 0;
        if (!parse_number(tok, x)) throw ConfigError("config: " + key + ": bad number '" + tok + "'");
        out.push_back(x);
    }
    return out;
}

class Entries {
public:
    explicit Entries(std::map<std::string, std::string> kv) : kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    const std::string& raw(const std::string& key) {
        used_.insert(key);
        auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError("config: missing required key '" + key + "'");
        return it->second;
    }

    std::vector<double> list(const std::string& key, std::size_t expected) {
        auto v = numbers(key, raw(key));
        if (v.size() != expected) {
            throw ConfigError("config: " + key + " expects " + std::to_string(expected) +
                              " value(s), got " + std::to_string(v.size()));
        }
        return v;
    }

    double number(const std::string& key) { return list(key, 1)[0]; }

    void number(const std::string& key, double& out) {
        if (has(key)) out = number(key);
    }

    template <typename Int>
    void integer(const std::string& key, Int& out) {
        if (!has(key)) return;
        const std::string& v = raw(key);
        try {
            std::size_t pos = 0;
            const unsigned long long x = std::stoull(v, &pos);
            if (pos != v.size() || v[0] == '-') throw std::invalid_argument(v);
            out = static_cast<Int>(x);
        } catch (const std::exception&) {
            throw ConfigError("config: " + key + ": expected a non-negative integer, got '" + v + "'");
        }
    }

    void boolean(const std::string& key, bool& out) {
        if (!has(key)) return;
        const std::string& v = raw(key);
        if (v == "true" || v == "1") {
            out = true;
        } else if (v == "false" || v == "0") {
            out = false;
        } else {
            throw ConfigError("config: " + key + ": expected true/false, got '" + v + "'");
        }
    }

    void text(const std::string& key, std::string& out) {
        if (has(key)) out = raw(key);
    }

    void reject_unknown() const {
        for (const auto& [k, v] : kv_) {
            if (!used_.count(k)) throw ConfigError("config: unknown key '" + k + "'");
        }
    }

private:
    std::map<std::string, std::string> kv_;
    std::set<std::string> used_;
};

}  // namespace

void AppConfig::validate() const {
    simulator.validate();
    grid.validate();
    thresholds.validate();
    tree.validate();
    if (max_epochs == 0) throw ConfigError("config: recbfn.max_epochs must be positive");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("config: split.train_fraction must lie in (0, 1)");
    }
    if (!(simulate_defect_fraction > 0.0 && simulate_defect_fraction < 1.0)) {
        throw ConfigError("config: simulate.defect_fraction must lie in (0, 1)");
    }
    if (simulate_count < 100) throw ConfigError("config: simulate.n must be at least 100");
    if (data_path.empty() || model_dir.empty()) throw ConfigError("config: empty path");
    if (data_path == model_dir) throw ConfigError("config: paths.data and paths.model_dir must differ");
}

AppConfig parse_config(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        auto key = trim(line.substr(0, eq));
        auto value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        if (!kv.emplace(key, value).second) {
            throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
        }
    }

    Entries e(std::move(kv));
    AppConfig cfg;
    auto& sim = cfg.simulator;
    sim.kinetics.k0 = e.number("kinetics.k0");
    sim.kinetics.activation = e.number("kinetics.activation");
    sim.kinetics.acid_exponent = e.number("kinetics.acid_exponent");
    sim.kinetics.iron_inhibition = e.number("kinetics.iron_inhibition");
    sim.kinetics.scale_coefficient = e.number("kinetics.scale_coefficient");
    const auto lengths = e.list("geometry.tank_lengths", sim::kTankCount);
    for (std::size_t k = 0; k < sim::kTankCount; ++k) sim.geometry.tank_length[k] = lengths[k];

    for (Field f : kAllFields) {
        if (f == Field::v) continue;
        const auto r = e.list("sample." + std::string(field_name(f)), 2);
        sim.fields[index_of(f)] = {r[0], r[1]};
    }
    e.integer("sample.decimals", sim.decimals);
    e.number("noise.amplitude", sim.noise_amplitude);

    {
        const std::string& ratio_text = e.raw("speed.ratio");
        std::istringstream parts(ratio_text);
        std::string part;
        while (std::getline(parts, part, ';')) {
            const auto v = numbers("speed.ratio", part);
            if (v.size() != 3) throw ConfigError("config: speed.ratio components are 'weight lo hi'");
            sim.speed_ratio.push_back({v[0], v[1], v[2]});
        }
    }

    e.number("scan.v_min", cfg.grid.v_min);
    e.number("scan.v_max", cfg.grid.v_max);
    e.number("scan.step", cfg.grid.step);
    e.number("recbfn.theta_plus", cfg.thresholds.theta_plus);
    e.number("recbfn.theta_minus", cfg.thresholds.theta_minus);
    e.integer("recbfn.max_epochs", cfg.max_epochs);
    e.boolean("tree.prune", cfg.tree.prune);
    e.number("tree.confidence", cfg.tree.confidence);
    e.integer("tree.min_leaf", cfg.tree.min_leaf);
    e.number("split.train_fraction", cfg.train_fraction);
    e.integer("split.seed", cfg.split_seed);
    e.integer("simulate.n", cfg.simulate_count);
    e.number("simulate.defect_fraction", cfg.simulate_defect_fraction);
    e.integer("simulate.seed", cfg.simulate_seed);
    e.text("paths.data", cfg.data_path);
    e.text("paths.model_dir", cfg.model_dir);
    e.reject_unknown();

    cfg.validate();
    return cfg;
}

AppConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace pickling
