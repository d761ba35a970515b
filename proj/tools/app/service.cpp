#include "service.hpp"

#include <cmath>
#include <limits>
#include <map>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "pickling/errors.hpp"

namespace pickling::app {

using nlohmann::json;

namespace {

Response reply(int status, const json& body) { return {status, body.dump()}; }

Response error(int status, const std::string& message) {
    return reply(status, json{{"error", message}});
}

Response field_errors(const std::map<std::string, std::string>& fields) {
    json f = json::object();
    for (const auto& [name, message] : fields) f[name] = message;
    return reply(400, json{{"error", "invalid request"}, {"fields", f}});
}

// Reads named numeric fields out of a JSON object, collecting per-field messages.
class FieldReader {
public:
    explicit FieldReader(const json& body) : body_(body) {}

    double require(Field f) {
        const std::string name(field_name(f));
        seen_.push_back(name);
        auto it = body_.find(name);
        if (it == body_.end()) {
            errors_[name] = "missing";
            return 0.0;
        }
        if (!it->is_number()) {
            errors_[name] = "expected a number";
            return 0.0;
        }
        const double x = it->get<double>();
        if (!std::isfinite(x)) errors_[name] = "expected a finite number";
        return x;
    }

    void allow(const std::string& name) { seen_.push_back(name); }

    void check_bound(Field f, double x) {
        const std::string name(field_name(f));
        if (errors_.count(name)) return;
        const auto& b = BoundTable::defaults()[f];
        if (!b.contains(x)) errors_[name] = "out of range " + b.describe();
    }

    void add(const std::string& name, const std::string& message) { errors_[name] = message; }

    bool finish() {
        for (const auto& [key, value] : body_.items()) {
            if (std::find(seen_.begin(), seen_.end(), key) == seen_.end()) {
                errors_[key] = "unknown field";
            }
        }
        return errors_.empty();
    }

    const std::map<std::string, std::string>& errors() const { return errors_; }

private:
    const json& body_;
    std::vector<std::string> seen_;
    std::map<std::string, std::string> errors_;
};

std::optional<json> parse_object(const std::string& body, Response& failure) {
    json parsed = json::parse(body, nullptr, false);
    if (parsed.is_discarded()) {
        failure = error(400, "malformed JSON body");
        return std::nullopt;
    }
    if (!parsed.is_object()) {
        failure = error(400, "request body must be a JSON object");
        return std::nullopt;
    }
    return parsed;
}

const char* label_name(recbfn::Label l) { return l == recbfn::Label::Defect ? "defect" : "no_defect"; }

json grid_json(const advisor::ScanGrid& g) {
    return json{{"v_min", g.v_min}, {"v_max", g.v_max}, {"step", g.step}, {"points", g.size()}};
}

json trace_json(const advisor::Trace& trace) {
    json rows = json::array();
    for (const auto& p : trace) {
        rows.push_back({{"v", p.v},
                        {"class", p.defect ? "defect" : "no_defect"},
                        {"score_no_defect", p.score_no_defect},
                        {"score_defect", p.score_defect}});
    }
    return rows;
}

json advice_json(const advisor::Advice& advice) {
    json out{{"advice", std::string(advisor::outcome_kind(advice.outcome))},
             {"summary", advisor::summary_line(advice)}};
    if (const auto* m = std::get_if<advisor::MaxSpeed>(&advice.outcome)) {
        out["v_star"] = m->v_star;
        out["first_defect_speed"] = m->first_defect_speed;
    } else if (const auto* r = std::get_if<advisor::SpeedRange>(&advice.outcome)) {
        out["class"] = std::string(to_string(r->speed_class));
        out["range_lo"] = r->lo;
        out["range_hi"] = std::isinf(r->hi) ? json(nullptr) : json(r->hi);
    } else {
        out["reason"] = std::get<advisor::Infeasible>(advice.outcome).reason;
    }
    out["grid"] = grid_json(advice.grid);
    out["trace"] = trace_json(advice.trace);
    return out;
}

}  // namespace

std::shared_ptr<const Snapshot> ModelStore::get() const {
    std::lock_guard lock(mutex_);
    return current_;
}

void ModelStore::set(std::shared_ptr<const Snapshot> snapshot) {
    std::lock_guard lock(mutex_);
    current_ = std::move(snapshot);
}

Service::Service(std::string model_dir, advisor::ScanGrid grid)
    : model_dir_(std::move(model_dir)), grid_(grid) {
    grid_.validate();
}

void Service::reload() {
    std::lock_guard lock(reload_mutex_);
    auto loaded = load_models(model_dir_);
    store_.set(std::make_shared<const Snapshot>(Snapshot{std::move(loaded), grid_, model_dir_}));
}

void Service::install(ModelBundle models) {
    advisor::check_compatible(models.tree, models.network);
    store_.set(std::make_shared<const Snapshot>(Snapshot{std::move(models), grid_, "<memory>"}));
}

Response Service::handle(const std::string& method, const std::string& path, const std::string& body) {
    try {
        if (method == "GET" && path == "/api/health") return health();
        if (method == "GET" && path == "/api/model") return model();
        if (method == "POST" && path == "/api/predict") return predict(body);
        if (method == "POST" && path == "/api/advise") return advise(body);
        if (method == "POST" && path == "/api/scan") return scan(body);
        if (method == "POST" && path == "/api/reload") return do_reload();
        return error(404, "no route for " + method + " " + path);
    } catch (const InvalidInput& e) {
        return error(400, e.what());
    } catch (const std::exception& e) {
        return error(500, e.what());
    }
}

Response Service::health() const {
    const auto snap = store_.get();
    return reply(200, json{{"status", "ok"}, {"model_loaded", snap != nullptr}});
}

Response Service::model() const {
    const auto snap = store_.get();
    if (!snap) return error(503, "no model loaded");
    const auto& tree = snap->models.tree;
    const auto& net = snap->models.network;

    json features = json::array();
    for (Field f : kTreeFeatures) features.push_back(std::string(field_name(f)));
    json inputs = json::array();
    json scaler = json::object();
    for (std::size_t d = 0; d < kNetworkInputCount; ++d) {
        const std::string name(field_name(kNetworkInputs[d]));
        inputs.push_back(name);
        scaler[name] = {{"min", net.scaler().min()[d]}, {"max", net.scaler().max()[d]}};
    }
    return reply(200, json{
                          {"source", snap->source},
                          {"tree",
                           {{"depth", tree.depth()},
                            {"size", tree.size()},
                            {"samples", tree.sample_count()},
                            {"features", features}}},
                          {"network",
                           {{"units", net.units().size()},
                            {"units_defect", net.unit_count(recbfn::Label::Defect)},
                            {"units_no_defect", net.unit_count(recbfn::Label::NoDefect)},
                            {"theta_plus", net.thresholds().theta_plus},
                            {"theta_minus", net.thresholds().theta_minus},
                            {"inputs", inputs},
                            {"scaler", scaler}}},
                          {"grid", grid_json(snap->grid)},
                      });
}

Response Service::predict(const std::string& body) const {
    const auto snap = store_.get();
    if (!snap) return error(503, "no model loaded");
    Response failure;
    const auto parsed = parse_object(body, failure);
    if (!parsed) return failure;

    FieldReader reader(*parsed);
    NetworkInput x{};
    for (std::size_t d = 0; d < kNetworkInputCount; ++d) {
        x[d] = reader.require(kNetworkInputs[d]);
        reader.check_bound(kNetworkInputs[d], x[d]);
    }
    if (!reader.finish()) return field_errors(reader.errors());

    const auto p = snap->models.network.predict(x);
    const double total = p.score_no_defect + p.score_defect;
    const double conf_defect = total > 0.0 ? p.score_defect / total : 1.0;
    return reply(200, json{{"class", label_name(p.label)},
                           {"defect", p.label == recbfn::Label::Defect},
                           {"confidence", {{"no_defect", 1.0 - conf_defect}, {"defect", conf_defect}}},
                           {"scores", {{"no_defect", p.score_no_defect}, {"defect", p.score_defect}}}});
}

Response Service::advise(const std::string& body) const {
    const auto snap = store_.get();
    if (!snap) return error(503, "no model loaded");
    Response failure;
    const auto parsed = parse_object(body, failure);
    if (!parsed) return failure;

    FieldReader reader(*parsed);
    RawRecord raw;
    for (Field f : kAllFields) {
        if (f == Field::v) continue;
        raw[f] = reader.require(f);
    }
    // The current line speed may be sent along; advice does not depend on it.
    if (parsed->contains("v")) {
        reader.allow("v");
        if (!(*parsed)["v"].is_number()) reader.add("v", "expected a number");
    }
    raw[Field::v] = 1.0;
    if (!reader.finish()) return field_errors(reader.errors());

    const auto checked = validate_conditions(raw);
    if (!checked.accepted()) {
        std::map<std::string, std::string> fields;
        for (const auto& v : checked.report.violations) fields[v.field] = v.rule;
        return field_errors(fields);
    }
    const auto advice = advisor::advise(snap->models.tree, snap->models.network,
                                        *checked.conditions, snap->grid);
    return reply(200, advice_json(advice));
}

Response Service::scan(const std::string& body) const {
    const auto snap = store_.get();
    if (!snap) return error(503, "no model loaded");
    Response failure;
    const auto parsed = parse_object(body, failure);
    if (!parsed) return failure;

    FieldReader reader(*parsed);
    std::array<double, advisor::kBathFields.size()> bath{};
    for (std::size_t i = 0; i < bath.size(); ++i) {
        bath[i] = reader.require(advisor::kBathFields[i]);
        reader.check_bound(advisor::kBathFields[i], bath[i]);
    }

    advisor::ScanGrid grid = snap->grid;
    if (parsed->contains("grid")) {
        reader.allow("grid");
        const json& g = (*parsed)["grid"];
        bool ok = g.is_object();
        for (auto [key, slot] : {std::pair{"v_min", &grid.v_min}, std::pair{"v_max", &grid.v_max},
                                 std::pair{"step", &grid.step}}) {
            if (!ok) break;
            if (!g.contains(key)) continue;
            if (!g[key].is_number()) {
                ok = false;
                break;
            }
            *slot = g[key].get<double>();
        }
        if (ok) {
            for (const auto& [key, value] : g.items()) {
                if (key != "v_min" && key != "v_max" && key != "step") ok = false;
            }
        }
        if (!ok) {
            reader.add("grid", "expected an object with numeric v_min, v_max, step");
        } else {
            try {
                grid.validate();
                if (grid.size() > 100000) reader.add("grid", "too many grid points");
            } catch (const ConfigError& e) {
                reader.add("grid", e.what());
            }
        }
    }
    if (!reader.finish()) return field_errors(reader.errors());

    const auto trace = advisor::scan_speeds(snap->models.network, advisor::BathInputs::make(bath), grid);
    return reply(200, json{{"grid", grid_json(grid)}, {"trace", trace_json(trace)}});
}

Response Service::do_reload() {
    try {
        reload();
    } catch (const std::exception& e) {
        return error(500, std::string("reload failed, previous model kept: ") + e.what());
    }
    const auto snap = store_.get();
    return reply(200, json{{"status", "reloaded"},
                           {"source", snap->source},
                           {"units", snap->models.network.units().size()},
                           {"tree_size", snap->models.tree.size()}});
}

void Service::bind(httplib::Server& server, const std::string& static_dir) {
    auto forward = [this](const httplib::Request& req, httplib::Response& res) {
        const auto r = handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_content(r.body, "application/json");
    };
    server.Get("/api/health", forward);
    server.Get("/api/model", forward);
    server.Post("/api/predict", forward);
    server.Post("/api/advise", forward);
    server.Post("/api/scan", forward);
    server.Post("/api/reload", forward);
    if (!static_dir.empty() && !server.set_mount_point("/", static_dir)) {
        throw ConfigError("static directory '" + static_dir + "' does not exist");
    }
}

std::pair<std::string, int> parse_bind(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == address.size()) {
        throw ConfigError("bind address must look like host:port, got '" + address + "'");
    }
    int port = 0;
    try {
        std::size_t pos = 0;
        port = std::stoi(address.substr(colon + 1), &pos);
        if (pos != address.size() - colon - 1) throw std::invalid_argument(address);
    } catch (const std::exception&) {
        throw ConfigError("bind address has a bad port: '" + address + "'");
    }
    if (port < 0 || port > 65535) throw ConfigError("bind port out of range: " + std::to_string(port));
    return {address.substr(0, colon), port};
}

}  // namespace pickling::app
