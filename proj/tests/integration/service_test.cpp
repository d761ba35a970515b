#include <gtest/gtest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <sstream>
#include <thread>

#include "commands.hpp"
#include "fixtures.hpp"
#include "pickling/errors.hpp"
#include "pickling/pipeline.hpp"
#include "service.hpp"

using namespace pickling;
using json = nlohmann::json;

namespace {

const advisor::ScanGrid kGrid{100, 500, 10};

json bath() {
    return {{"T_3", 80}, {"HCl_1", 10}, {"Fe2_1", 30}, {"HCl_2", 3},
            {"Fe2_2", 30}, {"HCl_3", 3}, {"Fe2_3", 30}};
}

json coil() {
    json j = bath();
    j.update({{"W", 20}, {"t_s", 3}, {"w_s", 1250}, {"T_1", 80}, {"T_2", 80}, {"T_rinse", 45}});
    return j;
}

struct Call {
    int status;
    json body;
};

Call call(app::Service& s, const std::string& method, const std::string& path, const json& body = {}) {
    const auto r = s.handle(method, path, body.is_null() ? "" : body.dump());
    return {r.status, json::parse(r.body)};
}

void install_flip(app::Service& s, double flip = 300) {
    s.install({fixtures::constant_tree(SpeedClass::B), fixtures::flip_network(flip)});
}

}  // namespace

TEST(Service, HealthWithAndWithoutModel) {
    app::Service s("/nonexistent", kGrid);
    auto h = call(s, "GET", "/api/health");
    EXPECT_EQ(h.status, 200);
    EXPECT_EQ(h.body["status"], "ok");
    EXPECT_EQ(h.body["model_loaded"], false);
    EXPECT_EQ(call(s, "POST", "/api/predict", bath()).status, 503);
    EXPECT_EQ(call(s, "GET", "/api/model").status, 503);
    install_flip(s);
    EXPECT_EQ(call(s, "GET", "/api/health").body["model_loaded"], true);
}

TEST(Service, UnknownRouteIs404) {
    app::Service s("/nonexistent", kGrid);
    EXPECT_EQ(call(s, "GET", "/api/nope").status, 404);
    EXPECT_EQ(call(s, "GET", "/api/predict").status, 404);
}

TEST(Service, ModelDescription) {
    app::Service s("/nonexistent", kGrid);
    install_flip(s);
    const auto m = call(s, "GET", "/api/model");
    ASSERT_EQ(m.status, 200);
    EXPECT_EQ(m.body["network"]["units"], 2);
    EXPECT_EQ(m.body["network"]["units_defect"], 1);
    EXPECT_EQ(m.body["network"]["inputs"].size(), 8u);
    EXPECT_EQ(m.body["network"]["scaler"]["v"]["max"], 500);
    EXPECT_EQ(m.body["tree"]["features"].size(), kTreeFeatures.size());
    EXPECT_EQ(m.body["grid"]["points"], 41);
}

TEST(Service, PredictAroundTheFlip) {
    app::Service s("/nonexistent", kGrid);
    install_flip(s);
    auto x = bath();
    x["v"] = 250;
    auto p = call(s, "POST", "/api/predict", x);
    ASSERT_EQ(p.status, 200) << p.body;
    EXPECT_EQ(p.body["class"], "no_defect");
    EXPECT_EQ(p.body["defect"], false);
    EXPECT_DOUBLE_EQ(p.body["confidence"]["no_defect"].get<double>(), 1.0);
    x["v"] = 350;
    p = call(s, "POST", "/api/predict", x);
    EXPECT_EQ(p.body["class"], "defect");
    EXPECT_DOUBLE_EQ(p.body["scores"]["defect"].get<double>(), 5.0);
}

TEST(Service, FieldErrorsAreReportedPerField) {
    app::Service s("/nonexistent", kGrid);
    install_flip(s);
    auto x = bath();
    x.erase("Fe2_3");
    x["HCl_2"] = 35;
    x["T_3"] = "hot";
    x["colour"] = 1;
    const auto r = call(s, "POST", "/api/predict", x);
    ASSERT_EQ(r.status, 400);
    EXPECT_EQ(r.body["error"], "invalid request");
    const auto& f = r.body["fields"];
    EXPECT_EQ(f["Fe2_3"], "missing");
    EXPECT_EQ(f["v"], "missing");
    EXPECT_EQ(f["T_3"], "expected a number");
    EXPECT_EQ(f["HCl_2"].get<std::string>().rfind("out of range", 0), 0u);
    EXPECT_EQ(f["colour"], "unknown field");
    EXPECT_EQ(call(s, "POST", "/api/predict", json::array()).status, 400);
    EXPECT_EQ(s.handle("POST", "/api/predict", "{not json").status, 400);
}

TEST(Service, ScanFlipsAtThreeHundred) {
    app::Service s("/nonexistent", kGrid);
    install_flip(s);
    const auto r = call(s, "POST", "/api/scan", bath());
    ASSERT_EQ(r.status, 200) << r.body;
    const auto& trace = r.body["trace"];
    ASSERT_EQ(trace.size(), 41u);
    for (const auto& p : trace) {
        EXPECT_EQ(p["class"] == "defect", p["v"].get<double>() >= 300) << p;
    }
    auto custom = bath();
    custom["grid"] = {{"v_min", 200}, {"v_max", 400}, {"step", 50}};
    EXPECT_EQ(call(s, "POST", "/api/scan", custom).body["trace"].size(), 5u);
    custom["grid"] = {{"step", -1}};
    EXPECT_EQ(call(s, "POST", "/api/scan", custom).status, 400);
}

TEST(Service, AdviseMatchesCli) {
    fixtures::TempDir dir;
    save_models(dir.path().string(), {fixtures::constant_tree(SpeedClass::B), fixtures::flip_network(300)});
    const auto cfg = fixtures::default_config();
    app::Service s(dir.path().string(), cfg.grid);
    s.reload();
    const auto r = call(s, "POST", "/api/advise", coil());
    ASSERT_EQ(r.status, 200) << r.body;
    EXPECT_EQ(r.body["advice"], "max_speed");
    EXPECT_EQ(r.body["v_star"], 295);
    EXPECT_EQ(r.body["first_defect_speed"], 300);

    std::vector<std::string> args{"-c", PICKLING_TEST_CONFIG, "advise", "-m", dir.path().string()};
    const json fields = coil();
    for (const auto& [k, v] : fields.items()) {
        args.push_back("--set");
        args.push_back(k + "=" + v.dump());
    }
    std::ostringstream out, err;
    ASSERT_EQ(app::run(args, out, err), 0) << err.str();
    EXPECT_EQ(out.str().substr(0, out.str().find('\n')), r.body["summary"].get<std::string>());

    auto with_v = coil();
    with_v["v"] = 123;
    EXPECT_EQ(call(s, "POST", "/api/advise", with_v).body, r.body);
}

TEST(Service, AdviseOutcomes) {
    app::Service s("/nonexistent", kGrid);
    install_flip(s, 100);
    auto r = call(s, "POST", "/api/advise", coil());
    EXPECT_EQ(r.body["advice"], "infeasible");
    EXPECT_TRUE(r.body["reason"].is_string());
    s.install({fixtures::constant_tree(SpeedClass::C), fixtures::flip_network(600)});
    r = call(s, "POST", "/api/advise", coil());
    EXPECT_EQ(r.body["advice"], "speed_range");
    EXPECT_EQ(r.body["class"], "C");
    EXPECT_EQ(r.body["range_lo"], 385);
    EXPECT_TRUE(r.body["range_hi"].is_null());
}

TEST(Service, ReloadKeepsOldModelOnFailure) {
    fixtures::TempDir dir;
    app::Service s(dir.path().string(), kGrid);
    install_flip(s);
    const auto failed = call(s, "POST", "/api/reload");
    EXPECT_EQ(failed.status, 500);
    EXPECT_EQ(call(s, "GET", "/api/health").body["model_loaded"], true);
    save_models(dir.path().string(), {fixtures::constant_tree(SpeedClass::A), fixtures::flip_network(200)});
    const auto ok = call(s, "POST", "/api/reload");
    ASSERT_EQ(ok.status, 200) << ok.body;
    EXPECT_EQ(ok.body["status"], "reloaded");
    EXPECT_EQ(ok.body["source"], dir.path().string());
    auto x = bath();
    x["v"] = 250;
    EXPECT_EQ(call(s, "POST", "/api/predict", x).body["class"], "defect");
}

TEST(Service, ParseBind) {
    EXPECT_EQ(app::parse_bind("127.0.0.1:8080"), (std::pair<std::string, int>{"127.0.0.1", 8080}));
    EXPECT_THROW(app::parse_bind("localhost"), ConfigError);
    EXPECT_THROW(app::parse_bind("host:99999"), ConfigError);
}

TEST(Service, ServesOverHttp) {
    app::Service s("/nonexistent", kGrid);
    install_flip(s);
    httplib::Server server;
    s.bind(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    ASSERT_GT(port, 0);
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    const auto health = client.Get("/api/health");
    ASSERT_TRUE(health);
    EXPECT_EQ(health->status, 200);
    EXPECT_EQ(json::parse(health->body)["model_loaded"], true);
    const auto scan = client.Post("/api/scan", bath().dump(), "application/json");
    ASSERT_TRUE(scan);
    EXPECT_EQ(scan->status, 200);
    EXPECT_EQ(json::parse(scan->body)["trace"].size(), 41u);
    const auto bad = client.Post("/api/predict", "{}", "application/json");
    ASSERT_TRUE(bad);
    EXPECT_EQ(bad->status, 400);
    EXPECT_NE(bad->get_header_value("Content-Type").find("application/json"), std::string::npos);

    server.stop();
    t.join();
}
