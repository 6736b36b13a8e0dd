#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "aceml/errors.hpp"

namespace aceml {

// Feature matrix plus response; the unit every learner consumes.
struct Dataset {
    Eigen::MatrixXd X;                       // n x p
    Eigen::VectorXd y;                       // n
    std::vector<std::string> feature_names;  // p entries

    Dataset() = default;
    Dataset(Eigen::MatrixXd X, Eigen::VectorXd y, std::vector<std::string> names = {});

    int n() const { return static_cast<int>(X.rows()); }
    int p() const { return static_cast<int>(X.cols()); }

    // n >= 1, p >= 1, y length matches, all entries finite.
    void validate() const;

    static std::vector<std::string> default_names(int p);  // x1..xp
};

}  // namespace aceml
