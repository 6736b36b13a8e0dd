#include "aceml/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace aceml {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t splitmix_fin(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream_id)
    : master_seed_(master_seed), stream_id_(stream_id) {
    // Hash the pair into a SplitMix64 state, then expand to four words.
    std::uint64_t h = splitmix_fin(master_seed + kGolden);
    h ^= splitmix_fin(stream_id + kGolden);
    std::uint64_t s = h;
    for (auto& w : state_) {
        s += kGolden;
        w = splitmix_fin(s);
    }
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
        state_[0] = kGolden;
    }
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform();
}

double RngStream::uniform_pos() {
    double u;
    do {
        u = uniform();
    } while (u <= 0.0);
    return u;
}

std::uint64_t RngStream::uniform_index(std::uint64_t n) {
    // Multiply-shift mapping; bias is < n / 2^64, irrelevant at our scales.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

long RngStream::uniform_int(long lo, long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<long>(uniform_index(span));
}

double RngStream::normal() {
    if (has_cached_normal_) {
        has_cached_normal_ = false;
        return cached_normal_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    cached_normal_ = v * f;
    has_cached_normal_ = true;
    return u * f;
}

double RngStream::normal(double mean, double sd) {
    return mean + sd * normal();
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) {
        throw Error("gamma: shape must be positive");
    }
    if (shape < 1.0) {
        const double g = gamma(shape + 1.0);
        return g * std::pow(uniform_pos(), 1.0 / shape);
    }
    // Marsaglia-Tsang squeeze
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform_pos();
        if (u < 1.0 - 0.0331 * x * x * x * x) {
            return d * v;
        }
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
            return d * v;
        }
    }
}

double RngStream::beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    return ga / (ga + gb);
}

CovMatrix CovMatrix::identity(int p) {
    return CovMatrix(Eigen::MatrixXd::Identity(p, p), true);
}

void CovMatrix::validate() const {
    const auto p = entries.rows();
    if (p < 1 || entries.cols() != p) {
        throw Error("CovMatrix: must be square with dim >= 1");
    }
    const double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-12) {
        throw Error("CovMatrix: not symmetric (max asymmetry " + std::to_string(asym) + ")");
    }
    if (is_correlation) {
        for (Eigen::Index i = 0; i < p; ++i) {
            if (std::abs(entries(i, i) - 1.0) > 1e-12) {
                throw Error("CovMatrix: correlation matrix diagonal is not 1");
            }
        }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(entries, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-10) {
        throw Error("CovMatrix: not positive semidefinite");
    }
}

Eigen::MatrixXd cholesky(const CovMatrix& S) {
    const int p = S.dim();
    const Eigen::MatrixXd& a = S.entries;
    if (a.cols() != p) {
        throw DimensionMismatch("cholesky: matrix is not square");
    }
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(p, p);
    for (int j = 0; j < p; ++j) {
        double pivot = a(j, j);
        for (int k = 0; k < j; ++k) {
            pivot -= L(j, k) * L(j, k);
        }
        if (pivot <= 1e-12) {
            throw NotPositiveDefinite("cholesky: pivot " + std::to_string(pivot) +
                                      " at column " + std::to_string(j));
        }
        L(j, j) = std::sqrt(pivot);
        for (int i = j + 1; i < p; ++i) {
            double s = a(i, j);
            for (int k = 0; k < j; ++k) {
                s -= L(i, k) * L(j, k);
            }
            L(i, j) = s / L(j, j);
        }
    }
    return L;
}

Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean, const CovMatrix& S, int n, RngStream& rng) {
    const int p = S.dim();
    if (mean.size() != p) {
        throw DimensionMismatch("mvn_sample: mean length does not match covariance dim");
    }
    const Eigen::MatrixXd L = cholesky(S);
    Eigen::MatrixXd X(n, p);
    Eigen::VectorXd z(p);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < p; ++j) {
            z(j) = rng.normal();
        }
        X.row(i) = (mean + L * z).transpose();
    }
    return X;
}

CovMatrix lkj_sample_corr(int dim, double eta, RngStream& rng) {
    if (dim < 2) {
        throw Error("lkj_sample_corr: dim must be >= 2");
    }
    if (!(eta > 0.0)) {
        throw Error("lkj_sample_corr: eta must be positive");
    }
    // Rows of the Cholesky factor are built one at a time: row m is a point
    // sqrt(y)*u on the m-ball (y ~ Beta(m/2, b), u uniform on the sphere)
    // completed with sqrt(1-y) on the diagonal.
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(dim, dim);
    double b = eta + (dim - 2) / 2.0;
    const double r = 2.0 * rng.beta(b, b) - 1.0;
    L(0, 0) = 1.0;
    L(1, 0) = r;
    L(1, 1) = std::sqrt(1.0 - r * r);
    for (int m = 2; m < dim; ++m) {
        b -= 0.5;
        const double y = rng.beta(m / 2.0, b);
        Eigen::VectorXd u(m);
        double norm2 = 0.0;
        do {
            for (int j = 0; j < m; ++j) {
                u(j) = rng.normal();
            }
            norm2 = u.squaredNorm();
        } while (norm2 == 0.0);
        u *= std::sqrt(y / norm2);
        L.row(m).head(m) = u.transpose();
        L(m, m) = std::sqrt(std::max(0.0, 1.0 - y));
    }
    Eigen::MatrixXd R = L * L.transpose();
    // Symmetrize and pin the diagonal against rounding.
    R = ((R + R.transpose()) / 2.0).eval();
    R.diagonal().setOnes();
    return CovMatrix(std::move(R), true);
}

Eigen::VectorXd lognormal_sample(double meanlog, double sdlog, int n, RngStream& rng) {
    if (!(sdlog > 0.0)) {
        throw Error("lognormal_sample: sdlog must be positive");
    }
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) {
        x(i) = std::exp(meanlog + sdlog * rng.normal());
    }
    return x;
}

}  // namespace aceml
