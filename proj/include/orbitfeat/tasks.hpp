#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include <json.hpp>

#include "orbitfeat/groups.hpp"
#include "orbitfeat/learn.hpp"

namespace orbitfeat {

/// Desk-scale synthetic datasets whose targets are invariant to the nominal
/// group by construction.
struct SyntheticTask {
    enum class Generator {
        PermInvariantRegression,      // symmetric matrices, target from sorted row norms
        RotatedShapesClassification,  // blob patterns rotated uniformly, label = pattern id
        AffineShapes,                 // blob patterns under rotation + scaling + translation
    };

    Generator generator = Generator::PermInvariantRegression;
    int matrix_order = 10;    // PermInvariantRegression
    double noise = 0.1;       // target noise std
    int image_size = 16;
    int n_classes = 3;
    double angle_range = 6.283185307179586476925286766559;
    double pixel_noise = 0.0;
    double scale_sigma = 0.15;  // AffineShapes log-normal scale
    double trans_sigma = 1.0;   // AffineShapes translation std (pixels)
    int n_train = 300;
    int n_test = 200;
    std::uint64_t seed = 0;
};

struct Dataset {
    Eigen::MatrixXd x_train, x_test;
    Eigen::MatrixXd y_train, y_test;        // regression targets or one-hot labels
    Eigen::VectorXi labels_train, labels_test;  // classification only
    InputLayout layout;
    TaskKind kind = TaskKind::Regression;
    int n_classes = 0;
};

Dataset generate_task(const SyntheticTask& task);

/// Noiseless regression target of one flattened sample (exposed so tests can
/// verify the built-in invariance directly).
double perm_invariant_target(const Eigen::Ref<const Eigen::VectorXd>& flat, int n);

/// One sample per row, label/target in the last column.
void split_xy(const Eigen::Ref<const Eigen::MatrixXd>& table, Eigen::MatrixXd& x,
              Eigen::VectorXd& y);

void to_json(nlohmann::json& j, const SyntheticTask& t);
void from_json(const nlohmann::json& j, SyntheticTask& t);

}  // namespace orbitfeat
