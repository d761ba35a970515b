#include "pickling/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <ostream>

#include "pickling/errors.hpp"
#include "pickling/number_format.hpp"

namespace pickling {

recbfn::PatternSet network_patterns(const Dataset& data) {
    recbfn::PatternSet set;
    set.dims = kNetworkInputCount;
    set.values.reserve(data.size() * kNetworkInputCount);
    for (const auto& rec : data.records()) {
        set.add(network_input(rec), rec.under_p() ? recbfn::Label::Defect : recbfn::Label::NoDefect);
    }
    return set;
}

bool defective_at_every_speed(const recbfn::Network& network, const ProcessConditions& conditions,
                              const advisor::ScanGrid& grid) {
    const auto trace = advisor::scan_speeds(network, advisor::BathInputs::of(conditions), grid);
    for (const auto& p : trace) {
        if (!p.defect) return false;
    }
    return true;
}

tree::TrainingSet tree_training_set(const Dataset& data,
                                    const std::function<bool(const CoilRecord&)>& hopeless) {
    tree::TrainingSet set(kTreeFeatureCount);
    for (const auto& rec : data.records()) {
        if (!rec.under_p()) {
            set.add(tree_features(rec), classify_speed(rec[Field::v]));
        } else if (hopeless(rec)) {
            set.add(tree_features(rec), SpeedClass::U);
        }
    }
    return set;
}

double network_error(const recbfn::Network& network, const Dataset& data) {
    std::size_t wrong = 0;
    for (const auto& rec : data.records()) {
        const bool defect = network.predict(network_input(rec)).label == recbfn::Label::Defect;
        wrong += defect != rec.under_p() ? 1 : 0;
    }
    return static_cast<double>(wrong) / static_cast<double>(data.size());
}

TrainedPipeline train_pipeline(const Dataset& data, const AppConfig& config) {
    config.validate();
    const std::size_t defects = data.defect_count();
    if (defects == 0 || defects == data.size()) {
        throw ModelError("recbfn: training data must contain both defect and no-defect coils");
    }

    auto split = eval::stratified_split(data, config.train_fraction, config.split_seed);
    const Dataset train = data.subset(split.train);
    const Dataset validation = data.subset(split.validation);

    auto fitted = recbfn::train_recbfn(network_patterns(train), config.thresholds, config.max_epochs);
    const recbfn::Network& network = fitted.network;

    auto hopeless = [&](const CoilRecord& rec) {
        return defective_at_every_speed(network, rec.conditions(), config.grid);
    };
    const auto tree_train = tree_training_set(train, hopeless);
    const auto tree_validation = tree_training_set(validation, hopeless);
    auto tree = tree::train_tree(tree_train, config.tree, config.split_seed);

    TrainingSummary s;
    s.train_rows = train.size();
    s.validation_rows = validation.size();
    s.train_defects = train.defect_count();
    s.validation_defects = validation.defect_count();
    s.converged = fitted.converged;
    s.epochs = fitted.epochs;
    s.residual_conflicts = fitted.residual_conflicts;
    s.units_defect = network.unit_count(recbfn::Label::Defect);
    s.units_no_defect = network.unit_count(recbfn::Label::NoDefect);
    s.network_train_error = network_error(network, train);
    s.network_validation_error = network_error(network, validation);
    s.tree_train_rows = tree_train.size();
    s.tree_validation_rows = tree_validation.size();
    s.tree_depth = tree.depth();
    s.tree_size = tree.size();
    if (!tree_validation.empty()) {
        std::size_t correct = 0;
        for (std::size_t i = 0; i < tree_validation.size(); ++i) {
            correct += tree.predict(tree_validation.row(i)) == tree_validation.label(i) ? 1 : 0;
        }
        s.tree_validation_accuracy =
            static_cast<double>(correct) / static_cast<double>(tree_validation.size());
    }

    return TrainedPipeline{ModelBundle{std::move(tree), std::move(fitted.network)}, std::move(split), s};
}

void write_summary(std::ostream& out, const TrainingSummary& s) {
    out << "split.train_rows=" << s.train_rows << '\n'
        << "split.validation_rows=" << s.validation_rows << '\n'
        << "split.train_defects=" << s.train_defects << '\n'
        << "split.validation_defects=" << s.validation_defects << '\n'
        << "recbfn.converged=" << (s.converged ? "true" : "false") << '\n'
        << "recbfn.epochs=" << s.epochs << '\n'
        << "recbfn.residual_conflicts=" << s.residual_conflicts << '\n'
        << "recbfn.units=" << (s.units_defect + s.units_no_defect) << '\n'
        << "recbfn.units_defect=" << s.units_defect << '\n'
        << "recbfn.units_no_defect=" << s.units_no_defect << '\n'
        << "recbfn.train_error=" << format_number(s.network_train_error) << '\n'
        << "recbfn.validation_error=" << format_number(s.network_validation_error) << '\n'
        << "tree.train_rows=" << s.tree_train_rows << '\n'
        << "tree.validation_rows=" << s.tree_validation_rows << '\n'
        << "tree.depth=" << s.tree_depth << '\n'
        << "tree.size=" << s.tree_size << '\n'
        << "tree.validation_accuracy=" << format_number(s.tree_validation_accuracy) << '\n';
}

void save_models(const std::string& dir, const ModelBundle& models) {
    std::filesystem::create_directories(dir);
    const auto write = [&](const char* name, auto&& emit) {
        const auto path = (std::filesystem::path(dir) / name).string();
        std::ofstream out(path, std::ios::binary);
        if (!out) throw ModelError("cannot write '" + path + "'");
        emit(out);
        if (!out) throw ModelError("write failed for '" + path + "'");
    };
    write(kTreeFile, [&](std::ostream& o) { tree::write_tree(o, models.tree); });
    write(kNetworkFile, [&](std::ostream& o) { recbfn::write_network(o, models.network); });
}

ModelBundle load_models(const std::string& dir) {
    const auto open = [&](const char* name) {
        const auto path = (std::filesystem::path(dir) / name).string();
        std::ifstream in(path, std::ios::binary);
        if (!in) throw ModelError("cannot open model file '" + path + "'");
        return in;
    };
    auto tree_in = open(kTreeFile);
    auto net_in = open(kNetworkFile);
    ModelBundle bundle{tree::read_tree(tree_in), recbfn::read_network(net_in)};
    try {
        advisor::check_compatible(bundle.tree, bundle.network);
    } catch (const ConfigError& e) {
        throw ModelError(std::string("model files in '") + dir + "' do not fit together: " + e.what());
    }
    return bundle;
}

}  // namespace pickling
