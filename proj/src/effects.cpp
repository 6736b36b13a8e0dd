#include "aceml/effects.hpp"

#include <algorithm>
#include <cmath>

namespace aceml {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014327;

void check_feature(const Eigen::MatrixXd& X, int k) {
    if (k < 0 || k >= X.cols()) {
        throw DimensionMismatch("feature index " + std::to_string(k) + " out of range");
    }
}

// Quantile with linear interpolation between order statistics (R type 7).
double quantile(Eigen::VectorXd sorted, double prob) {
    const auto n = sorted.size();
    const double idx = prob * static_cast<double>(n - 1);
    const auto lo = static_cast<Eigen::Index>(std::floor(idx));
    const auto hi = std::min(lo + 1, n - 1);
    const double frac = idx - static_cast<double>(lo);
    return sorted(lo) * (1.0 - frac) + sorted(hi) * frac;
}

}  // namespace

double column_sd(const Eigen::VectorXd& x) {
    const auto n = x.size();
    if (n < 2) return 0.0;
    const double mean = x.mean();
    return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(n - 1));
}

Eigen::VectorXd conditional_effects(const Model& m, const Eigen::MatrixXd& X, int k,
                                    double h_fraction, bool central) {
    check_feature(X, k);
    if (!(h_fraction > 0.0)) {
        throw Error("conditional_effects: h_fraction must be positive");
    }
    const double sd = column_sd(X.col(k));
    if (sd <= 0.0) {
        throw ZeroVariance("conditional_effects: feature " + std::to_string(k) +
                               " has zero variance",
                           k);
    }
    const double h = h_fraction * sd;
    Eigen::MatrixXd Xp = X;
    Xp.col(k).array() += h;
    if (central) {
        Eigen::MatrixXd Xm = X;
        Xm.col(k).array() -= h;
        return (m.predict(Xp) - m.predict(Xm)) / (2.0 * h);
    }
    return (m.predict(Xp) - m.predict(X)) / h;
}

AceReport ace(const Model& m, const Eigen::MatrixXd& X, double h_fraction, bool central) {
    const int p = static_cast<int>(X.cols());
    AceReport report;
    report.ce.resize(X.rows(), p);
    report.ace.resize(p);
    report.h.resize(p);
    report.features.resize(p);

    const Eigen::VectorXd base = central ? Eigen::VectorXd() : m.predict(X);
    for (int k = 0; k < p; ++k) {
        const double sd = column_sd(X.col(k));
        if (sd <= 0.0) {
            throw ZeroVariance("ace: feature " + std::to_string(k) + " has zero variance", k);
        }
        const double h = h_fraction * sd;
        Eigen::MatrixXd Xp = X;
        Xp.col(k).array() += h;
        Eigen::VectorXd ce;
        if (central) {
            Eigen::MatrixXd Xm = X;
            Xm.col(k).array() -= h;
            ce = (m.predict(Xp) - m.predict(Xm)) / (2.0 * h);
        } else {
            ce = (m.predict(Xp) - base) / h;
        }
        report.ce.col(k) = ce;
        report.ace(k) = ce.mean();
        report.h(k) = h;
        report.features[k] = k;
    }
    return report;
}

double silverman_bandwidth(const Eigen::VectorXd& x) {
    const auto n = x.size();
    const double sd = column_sd(x);
    Eigen::VectorXd sorted = x;
    std::sort(sorted.data(), sorted.data() + sorted.size());
    const double iqr = quantile(sorted, 0.75) - quantile(sorted, 0.25);
    double spread = sd;
    if (iqr > 0.0) spread = std::min(spread, iqr / 1.34);
    if (spread <= 0.0) spread = sd;
    return 1.06 * spread * std::pow(static_cast<double>(n), -0.2);
}

Eigen::VectorXd kde_density(const Eigen::VectorXd& x, double bandwidth,
                            const Eigen::VectorXd& at) {
    const auto n = x.size();
    if (n < 2) {
        throw Error("kde_density: need at least 2 samples");
    }
    if (!(bandwidth > 0.0)) {
        throw Error("kde_density: bandwidth must be positive");
    }
    Eigen::VectorXd out(at.size());
    const double norm = 1.0 / (static_cast<double>(n) * bandwidth);
    for (Eigen::Index i = 0; i < at.size(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double z = (at(i) - x(j)) / bandwidth;
            acc += std::exp(-0.5 * z * z);
        }
        out(i) = acc * norm * kInvSqrt2Pi;
    }
    return out;
}

Eigen::VectorXd kde_1d(const Eigen::VectorXd& x, double bandwidth) {
    if (column_sd(x) <= 0.0) {
        throw ZeroVariance("kde_1d: zero-variance sample", 0);
    }
    if (bandwidth <= 0.0) {
        bandwidth = silverman_bandwidth(x);
    }
    return kde_density(x, bandwidth, x);
}

AceReport weighted_ace(const Model& m, const Eigen::MatrixXd& X, int k, double h_fraction,
                       double density_floor_fraction) {
    check_feature(X, k);
    const Eigen::VectorXd ce = conditional_effects(m, X, k, h_fraction);
    const Eigen::VectorXd dens = kde_1d(X.col(k));
    const double floor = density_floor_fraction * dens.maxCoeff();
    Eigen::VectorXd w(dens.size());
    for (Eigen::Index i = 0; i < dens.size(); ++i) {
        w(i) = 1.0 / std::max(dens(i), floor);
    }
    w /= w.sum();

    AceReport report;
    report.ce = ce;
    report.ace = Eigen::VectorXd::Constant(1, w.dot(ce));
    report.h = Eigen::VectorXd::Constant(1, h_fraction * column_sd(X.col(k)));
    report.features = {k};
    report.weighted = true;
    report.weights = w;
    return report;
}

InteractionReport interaction_ace(const Model& m, const Eigen::MatrixXd& X, int m_idx, int k_idx,
                                  double h_fraction) {
    check_feature(X, m_idx);
    check_feature(X, k_idx);
    if (m_idx == k_idx) {
        throw SameFeature("interaction_ace: feature indices must differ");
    }
    const double sd_m = column_sd(X.col(m_idx));
    const double sd_k = column_sd(X.col(k_idx));
    if (sd_m <= 0.0) throw ZeroVariance("interaction_ace: zero variance", m_idx);
    if (sd_k <= 0.0) throw ZeroVariance("interaction_ace: zero variance", k_idx);
    const double h_m = h_fraction * sd_m;
    const double h_k = h_fraction * sd_k;

    Eigen::MatrixXd Xpp = X, Xpm = X, Xmp = X, Xmm = X;
    Xpp.col(m_idx).array() += h_m;
    Xpp.col(k_idx).array() += h_k;
    Xpm.col(m_idx).array() += h_m;
    Xpm.col(k_idx).array() -= h_k;
    Xmp.col(m_idx).array() -= h_m;
    Xmp.col(k_idx).array() += h_k;
    Xmm.col(m_idx).array() -= h_m;
    Xmm.col(k_idx).array() -= h_k;

    InteractionReport report;
    report.m = m_idx;
    report.k = k_idx;
    report.h_m = h_m;
    report.h_k = h_k;
    report.ce2 = (m.predict(Xpp) - m.predict(Xmp) - m.predict(Xpm) + m.predict(Xmm)) /
                 (4.0 * h_m * h_k);
    report.value = report.ce2.mean();
    return report;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd& X) const {
    Eigen::MatrixXd out = X.rowwise() - mean.transpose();
    out.array().rowwise() /= sd.transpose().array();
    return out;
}

Eigen::MatrixXd Standardizer::invert(const Eigen::MatrixXd& Xs) const {
    Eigen::MatrixXd out = Xs;
    out.array().rowwise() *= sd.transpose().array();
    return out.rowwise() + mean.transpose();
}

std::pair<Eigen::MatrixXd, Standardizer> standardize(const Eigen::MatrixXd& X) {
    Standardizer s;
    const int p = static_cast<int>(X.cols());
    s.mean = X.colwise().mean();
    s.sd.resize(p);
    for (int j = 0; j < p; ++j) {
        s.sd(j) = column_sd(X.col(j));
        if (s.sd(j) <= 0.0) {
            throw ZeroVariance("standardize: feature " + std::to_string(j) +
                                   " has zero variance",
                               j);
        }
    }
    return {s.apply(X), s};
}

}  // namespace aceml
