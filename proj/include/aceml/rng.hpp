#pragma once

#include <array>
#include <cstdint>

#include <Eigen/Dense>

#include "aceml/errors.hpp"

namespace aceml {

// Deterministic random stream. A (master_seed, stream_id) pair always produces
// the same sequence; distinct stream_ids give statistically independent
// sequences. The generator is xoshiro256++ with SplitMix64 seeding, so the raw
// bit stream does not depend on the platform's <random> implementation.
class RngStream {
public:
    RngStream() : RngStream(0, 0) {}
    RngStream(std::uint64_t master_seed, std::uint64_t stream_id);

    std::uint64_t master_seed() const { return master_seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi);
    // Uniform on (0, 1); rejects exact zeros.
    double uniform_pos();
    // Integer in [0, n); n > 0.
    std::uint64_t uniform_index(std::uint64_t n);
    // Integer in [lo, hi] inclusive.
    long uniform_int(long lo, long hi);

    double normal();  // N(0, 1), Marsaglia polar
    double normal(double mean, double sd);
    double gamma(double shape);  // unit scale, shape > 0
    double beta(double a, double b);

private:
    std::array<std::uint64_t, 4> state_{};
    std::uint64_t master_seed_ = 0;
    std::uint64_t stream_id_ = 0;
    bool has_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

inline RngStream split_rng(std::uint64_t master_seed, std::uint64_t stream_id) {
    return RngStream(master_seed, stream_id);
}

// Symmetric covariance (or correlation) matrix with validity checks.
struct CovMatrix {
    Eigen::MatrixXd entries;
    bool is_correlation = false;

    CovMatrix() = default;
    explicit CovMatrix(Eigen::MatrixXd m, bool correlation = false)
        : entries(std::move(m)), is_correlation(correlation) {}

    int dim() const { return static_cast<int>(entries.rows()); }

    static CovMatrix identity(int p);

    // Throws Error if asymmetric beyond 1e-12, non-square, eigenvalue < -1e-10,
    // or (for correlation matrices) diagonal entries differ from 1.
    void validate() const;
};

// Lower-triangular L with L*L^T = S. Throws NotPositiveDefinite when a pivot
// falls to 1e-12 or below.
Eigen::MatrixXd cholesky(const CovMatrix& S);

// n i.i.d. rows from N(mean, S). Row i is filled before row i+1, coordinates
// left to right, so output is reproducible from the stream alone.
Eigen::MatrixXd mvn_sample(const Eigen::VectorXd& mean, const CovMatrix& S, int n, RngStream& rng);

// Correlation matrix ~ LKJ(eta), onion construction (partial correlations via
// Beta draws, assembled as rows of the Cholesky factor). dim >= 2, eta > 0.
CovMatrix lkj_sample_corr(int dim, double eta, RngStream& rng);

Eigen::VectorXd lognormal_sample(double meanlog, double sdlog, int n, RngStream& rng);

}  // namespace aceml
