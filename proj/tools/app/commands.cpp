#include "commands.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>
#include <httplib.h>

#include "pickling/advisor.hpp"
#include "pickling/config.hpp"
#include "pickling/csv.hpp"
#include "pickling/errors.hpp"
#include "pickling/evaluation.hpp"
#include "pickling/number_format.hpp"
#include "pickling/pipeline.hpp"
#include "pickling/simulator.hpp"
#include "service.hpp"

#ifndef PICKLING_DEFAULT_CONFIG
#define PICKLING_DEFAULT_CONFIG "config/pickling.conf"
#endif

namespace pickling::app {

namespace {

struct UsageError : Error {
    using Error::Error;
};

struct Options {
    std::string config_path = PICKLING_DEFAULT_CONFIG;

    std::optional<long long> sim_n;
    std::optional<double> sim_fraction;
    std::optional<std::uint64_t> sim_seed;
    std::string sim_out;

    std::string data;
    std::string model_dir;
    bool skip_invalid = false;
    bool holdout = false;

    std::vector<std::string> assignments;
    std::string advise_csv;
    std::size_t advise_row = 0;

    std::string bind;
    std::string static_dir;
};

AppConfig load(const Options& o) { return load_config(o.config_path); }

Dataset read_data(const std::string& path, bool skip_invalid, std::ostream& err) {
    auto imported = read_csv_file(path, skip_invalid ? InvalidRowPolicy::Skip : InvalidRowPolicy::Reject);
    for (const auto& s : imported.skipped) err << "skipped line " << s.line << ": " << s.reason << '\n';
    return std::move(imported.data);
}

int cmd_simulate(const Options& o, std::ostream& out) {
    const auto cfg = load(o);
    const long long n = o.sim_n.value_or(static_cast<long long>(cfg.simulate_count));
    const double fraction = o.sim_fraction.value_or(cfg.simulate_defect_fraction);
    const std::uint64_t seed = o.sim_seed.value_or(cfg.simulate_seed);
    const std::string path = o.sim_out.empty() ? cfg.data_path : o.sim_out;
    if (n < 100) throw UsageError("simulate: -n must be at least 100, got " + std::to_string(n));
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw UsageError("simulate: --defect-fraction must lie in (0, 1)");
    }

    const auto data = sim::generate_dataset(static_cast<std::size_t>(n), fraction, seed, cfg.simulator);
    write_csv_file(path, data);
    out << "wrote " << data.size() << " records (" << data.defect_count() << " under-pickled) to "
        << path << '\n';
    return kExitOk;
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = load(o);
    const std::string data_path = o.data.empty() ? cfg.data_path : o.data;
    const std::string model_dir = o.model_dir.empty() ? cfg.model_dir : o.model_dir;
    if (data_path == model_dir) throw UsageError("train: data path and model directory must differ");

    const auto data = read_data(data_path, o.skip_invalid, err);
    const auto trained = train_pipeline(data, cfg);
    save_models(model_dir, trained.models);

    std::ostringstream report;
    report << "data=" << data_path << '\n' << "records=" << data.size() << '\n';
    write_summary(report, trained.summary);
    report << '\n';
    eval::write_report(report, eval::evaluate_global(trained.models.tree, trained.models.network,
                                                     data.subset(trained.split.validation)));
    {
        const auto path = model_dir + "/" + kReportFile;
        std::ofstream file(path, std::ios::binary);
        if (!file) throw ModelError("cannot write '" + path + "'");
        file << report.str();
    }
    out << report.str();
    if (!trained.summary.converged) {
        err << "warning: RecBFN training stopped at the epoch cap with "
            << trained.summary.residual_conflicts << " residual conflicts\n";
    }
    return kExitOk;
}

int cmd_evaluate(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = load(o);
    const auto models = load_models(o.model_dir.empty() ? cfg.model_dir : o.model_dir);
    auto data = read_data(o.data.empty() ? cfg.data_path : o.data, o.skip_invalid, err);
    if (o.holdout) {
        const auto split = eval::stratified_split(data, cfg.train_fraction, cfg.split_seed);
        data = data.subset(split.validation);
    }
    eval::write_report(out, eval::evaluate_global(models.tree, models.network, data));
    return kExitOk;
}

ProcessConditions conditions_from_assignments(const std::vector<std::string>& assignments) {
    RawRecord raw;
    std::map<Field, bool> given;
    for (const auto& a : assignments) {
        const auto eq = a.find('=');
        if (eq == std::string::npos) throw UsageError("advise: expected FIELD=VALUE, got '" + a + "'");
        const auto field = field_from_name(a.substr(0, eq));
        if (!field) throw UsageError("advise: unknown field '" + a.substr(0, eq) + "'");
        double x = 0;
        if (!parse_number(a.substr(eq + 1), x)) throw UsageError("advise: bad number in '" + a + "'");
        if (given[*field]) throw UsageError("advise: field " + a.substr(0, eq) + " given twice");
        given[*field] = true;
        raw[*field] = x;
    }
    std::string missing;
    for (Field f : kAllFields) {
        if (f == Field::v || given[f]) continue;
        missing += (missing.empty() ? "" : ", ") + std::string(field_name(f));
    }
    if (!missing.empty()) throw UsageError("advise: missing field(s): " + missing);
    // The advisor scans its own speeds; a given v is accepted but not used.
    raw[Field::v] = 1.0;
    auto checked = validate_conditions(raw);
    if (!checked.accepted()) throw InvalidInput("advise: " + checked.report.to_string());
    return *checked.conditions;
}

int cmd_advise(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = load(o);
    const auto models = load_models(o.model_dir.empty() ? cfg.model_dir : o.model_dir);

    std::optional<ProcessConditions> conditions;
    if (!o.advise_csv.empty()) {
        if (!o.assignments.empty()) throw UsageError("advise: use either --set or --csv, not both");
        const auto data = read_data(o.advise_csv, false, err);
        if (o.advise_row < 1 || o.advise_row > data.size()) {
            throw UsageError("advise: --row must lie in 1.." + std::to_string(data.size()));
        }
        conditions = data[o.advise_row - 1].conditions();
    } else {
        conditions = conditions_from_assignments(o.assignments);
    }

    const auto advice = advisor::advise(models.tree, models.network, *conditions, cfg.grid);
    advisor::write_advice(out, advice);
    return std::holds_alternative<advisor::Infeasible>(advice.outcome) ? kExitInfeasible : kExitOk;
}

int cmd_serve(const Options& o, std::ostream& out) {
    const auto cfg = load(o);
    std::string bind = o.bind;
    if (bind.empty()) {
        const char* env = std::getenv(kBindEnv);
        bind = env && *env ? env : "127.0.0.1:8080";
    }
    const auto [host, port] = parse_bind(bind);

    Service service(o.model_dir.empty() ? cfg.model_dir : o.model_dir, cfg.grid);
    service.reload();
    httplib::Server server;
    service.bind(server, o.static_dir);
    if (!server.bind_to_port(host, port)) throw ConfigError("cannot bind " + bind);
    out << "listening on " << host << ':' << port << std::endl;
    server.listen_after_bind();
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Under-pickling prediction and line speed advisory", "pickling"};
    app.set_help_all_flag("--help-all");
    app.require_subcommand(1, 1);
    app.add_option("-c,--config", o.config_path, "Configuration file")->envname(kConfigEnv);

    auto* simulate = app.add_subcommand("simulate", "Generate a labeled synthetic dataset (CSV)");
    simulate->add_option("-n", o.sim_n, "Number of records (default from config)");
    simulate->add_option("--defect-fraction", o.sim_fraction, "Share of under-pickled records");
    simulate->add_option("--seed", o.sim_seed, "Random seed");
    simulate->add_option("-o,--out", o.sim_out, "Output CSV path");

    auto* train = app.add_subcommand("train", "Train the decision tree and RecBFN from a CSV");
    train->add_option("-d,--data", o.data, "Input CSV");
    train->add_option("-m,--out-dir", o.model_dir, "Model output directory");
    train->add_flag("--skip-invalid", o.skip_invalid, "Skip rows that fail validation");

    auto* evaluate = app.add_subcommand("evaluate", "Report per-class precision/recall/F-measure");
    evaluate->add_option("-m,--models", o.model_dir, "Model directory");
    evaluate->add_option("-d,--data", o.data, "Labeled CSV");
    evaluate->add_flag("--holdout", o.holdout, "Only score the validation part of the configured split");
    evaluate->add_flag("--skip-invalid", o.skip_invalid, "Skip rows that fail validation");

    auto* advise = app.add_subcommand("advise", "Advise a maximum line speed or a speed range");
    advise->add_option("-m,--models", o.model_dir, "Model directory");
    advise->add_option("--set", o.assignments, "Coil/bath value as FIELD=VALUE (repeatable)");
    advise->add_option("--csv", o.advise_csv, "Take the conditions from a CSV file");
    advise->add_option("--row", o.advise_row, "1-based data row of --csv")->default_val(1);

    auto* serve = app.add_subcommand("serve", "Run the HTTP API");
    serve->add_option("-m,--models", o.model_dir, "Model directory");
    serve->add_option("-b,--bind", o.bind, "host:port (env PICKLING_BIND)");
    serve->add_option("--static", o.static_dir, "Directory with the operator console files");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << "run with --help for usage\n";
        return kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(o, out);
        if (train->parsed()) return cmd_train(o, out, err);
        if (evaluate->parsed()) return cmd_evaluate(o, out, err);
        if (advise->parsed()) return cmd_advise(o, out, err);
        if (serve->parsed()) return cmd_serve(o, out);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ModelError& e) {
        err << "model error: " << e.what() << '\n';
        return kExitModel;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << '\n';
        return kExitData;
    } catch (const InvalidInput& e) {
        err << "invalid input: " << e.what() << '\n';
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace pickling::app
