#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>

#include "pickling/advisor.hpp"
#include "pickling/coil.hpp"
#include "pickling/config.hpp"
#include "pickling/decision_tree.hpp"
#include "pickling/evaluation.hpp"
#include "pickling/recbfn.hpp"

namespace pickling {

struct ModelBundle {
    tree::DecisionTree tree;
    recbfn::Network network;
};

inline constexpr const char* kTreeFile = "tree.txt";
inline constexpr const char* kNetworkFile = "network.txt";

// Raw network patterns (T_3, bath, v) labeled by under_p.
recbfn::PatternSet network_patterns(const Dataset& data);

// True when every grid speed is predicted defective.
bool defective_at_every_speed(const recbfn::Network& network, const ProcessConditions& conditions,
                              const advisor::ScanGrid& grid);

// Tree labels: clean coils get their speed bin, defective coils that no grid
// speed can save get U, all other defective coils are left out.
tree::TrainingSet tree_training_set(const Dataset& data,
                                    const std::function<bool(const CoilRecord&)>& hopeless);

struct TrainingSummary {
    std::size_t train_rows = 0;
    std::size_t validation_rows = 0;
    std::size_t train_defects = 0;
    std::size_t validation_defects = 0;

    bool converged = false;
    std::size_t epochs = 0;
    std::size_t residual_conflicts = 0;
    std::size_t units_defect = 0;
    std::size_t units_no_defect = 0;
    double network_train_error = 0.0;
    double network_validation_error = 0.0;

    std::size_t tree_train_rows = 0;
    std::size_t tree_validation_rows = 0;
    std::size_t tree_depth = 0;
    std::size_t tree_size = 0;
    double tree_validation_accuracy = 0.0;
};

struct TrainedPipeline {
    ModelBundle models;
    eval::SplitIndices split;
    TrainingSummary summary;
};

// Stratified split, RecBFN on the training rows, then the tree on labels derived
// with that network. Throws ModelError when a class is missing.
TrainedPipeline train_pipeline(const Dataset& data, const AppConfig& config);

// Misclassification rate of the network against under_p.
double network_error(const recbfn::Network& network, const Dataset& data);

void write_summary(std::ostream& out, const TrainingSummary& summary);

void save_models(const std::string& dir, const ModelBundle& models);
ModelBundle load_models(const std::string& dir);  // throws ModelError

}  // namespace pickling
