#include "aceml/dataset.hpp"

namespace aceml {

Dataset::Dataset(Eigen::MatrixXd X_in, Eigen::VectorXd y_in, std::vector<std::string> names)
    : X(std::move(X_in)), y(std::move(y_in)), feature_names(std::move(names)) {
    if (feature_names.empty() && X.cols() > 0) {
        feature_names = default_names(static_cast<int>(X.cols()));
    }
}

void Dataset::validate() const {
    if (X.rows() < 1 || X.cols() < 1) {
        throw Error("Dataset: needs at least one row and one column");
    }
    if (y.size() != X.rows()) {
        throw DimensionMismatch("Dataset: y length does not match row count");
    }
    if (!X.allFinite() || !y.allFinite()) {
        throw Error("Dataset: non-finite entries");
    }
    if (!feature_names.empty() && static_cast<Eigen::Index>(feature_names.size()) != X.cols()) {
        throw DimensionMismatch("Dataset: feature name count does not match column count");
    }
}

std::vector<std::string> Dataset::default_names(int p) {
    std::vector<std::string> names;
    names.reserve(p);
    for (int j = 0; j < p; ++j) {
        names.push_back("x" + std::to_string(j + 1));
    }
    return names;
}

}  // namespace aceml
