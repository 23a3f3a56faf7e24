#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>

namespace eelm {

/// Overflow-safe ln(1 + e^u).
double softplus(double u);

/// Frozen random first layer. Entries of W and b are i.i.d. uniform on
/// [-sqrt(1/l_in), sqrt(1/l_in)].
struct ElmParams {
    Eigen::MatrixXd W;  // l_hid x l_in
    Eigen::VectorXd b;  // l_hid
    std::uint64_t seed = 0;

    std::size_t l_in() const { return static_cast<std::size_t>(W.cols()); }
    std::size_t l_hid() const { return static_cast<std::size_t>(W.rows()); }
};

ElmParams init_elm(std::size_t l_in, std::size_t l_hid, std::uint64_t seed);

/// softplus(W z + b).
Eigen::VectorXd embed(const ElmParams& p, std::span<const double> z);
/// Column-wise embed of a l_in x n sample matrix.
Eigen::MatrixXd embed_batch(const ElmParams& p, const Eigen::MatrixXd& Z);

struct Readout {
    Eigen::MatrixXd theta;  // l_out x l_hid
};

/// Running means C = E[z+ phi^T] and D = E[phi phi^T].
class MomentAccumulator {
public:
    MomentAccumulator(std::size_t l_out, std::size_t l_hid);

    void add(const Eigen::VectorXd& phi, std::span<const double> target);
    /// Adds the columns of Phi (l_hid x k) and Targets (l_out x k) as k samples.
    void add_batch(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Targets);
    /// Count-weighted merge of an accumulator built over a disjoint shard.
    void merge(const MomentAccumulator& other);

    const Eigen::MatrixXd& C() const { return c_; }
    const Eigen::MatrixXd& D() const { return d_; }
    std::size_t count() const { return n_; }

private:
    Eigen::MatrixXd c_;
    Eigen::MatrixXd d_;
    std::size_t n_ = 0;
};

inline constexpr double kDefaultRidge = 1e-8;

/// Solves theta (D + ridge I) = C by Cholesky. Throws SolveError when the
/// system is not numerically positive definite.
Readout solve_readout(const MomentAccumulator& acc, double ridge = kDefaultRidge);

Eigen::VectorXd predict_window(const ElmParams& p, const Readout& r, std::span<const double> z);

struct ElmModel {
    ElmParams params;
    Readout readout;

    std::size_t l_in() const { return params.l_in(); }
    std::size_t l_out() const { return static_cast<std::size_t>(readout.theta.rows()); }

    Eigen::VectorXd predict(std::span<const double> z) const { return predict_window(params, readout, z); }
    /// Predictions for each column of Z (l_in x n); returns l_out x n.
    Eigen::MatrixXd predict_batch(const Eigen::MatrixXd& Z) const;
};

} // namespace eelm
