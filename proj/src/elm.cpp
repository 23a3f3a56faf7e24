#include "eelm/elm.hpp"

#include "eelm/errors.hpp"

#include <cmath>
#include <limits>
#include <random>

namespace eelm {

double softplus(double u)
{
    if (u > 20.0)
        return u + std::log1p(std::exp(-u));
    return std::log1p(std::exp(u));
}

ElmParams init_elm(std::size_t l_in, std::size_t l_hid, std::uint64_t seed)
{
    if (l_in < 1 || l_hid < 1)
        throw ConfigError("elm: dimensions must be at least 1");
    const double bound = std::sqrt(1.0 / static_cast<double>(l_in));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-bound, bound);

    ElmParams p;
    p.seed = seed;
    p.W.resize(static_cast<Eigen::Index>(l_hid), static_cast<Eigen::Index>(l_in));
    p.b.resize(static_cast<Eigen::Index>(l_hid));
    for (Eigen::Index i = 0; i < p.W.rows(); ++i)
        for (Eigen::Index j = 0; j < p.W.cols(); ++j)
            p.W(i, j) = dist(rng);
    for (Eigen::Index i = 0; i < p.b.size(); ++i)
        p.b(i) = dist(rng);
    return p;
}

Eigen::VectorXd embed(const ElmParams& p, std::span<const double> z)
{
    if (z.size() != p.l_in())
        throw ConfigError("embed: input length does not match l_in");
    const Eigen::Map<const Eigen::VectorXd> x(z.data(), static_cast<Eigen::Index>(z.size()));
    Eigen::VectorXd u = p.W * x + p.b;
    return u.unaryExpr([](double v) { return softplus(v); });
}

Eigen::MatrixXd embed_batch(const ElmParams& p, const Eigen::MatrixXd& Z)
{
    if (static_cast<std::size_t>(Z.rows()) != p.l_in())
        throw ConfigError("embed: input length does not match l_in");
    Eigen::MatrixXd U = p.W * Z;
    U.colwise() += p.b;
    return U.unaryExpr([](double v) { return softplus(v); });
}

MomentAccumulator::MomentAccumulator(std::size_t l_out, std::size_t l_hid)
    : c_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l_out), static_cast<Eigen::Index>(l_hid))),
      d_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(l_hid), static_cast<Eigen::Index>(l_hid)))
{
}

void MomentAccumulator::add(const Eigen::VectorXd& phi, std::span<const double> target)
{
    if (phi.size() != d_.rows() || static_cast<Eigen::Index>(target.size()) != c_.rows())
        throw ConfigError("accumulate: sample dimensions do not match accumulator");
    const Eigen::Map<const Eigen::VectorXd> y(target.data(), static_cast<Eigen::Index>(target.size()));
    const double w = 1.0 / static_cast<double>(n_ + 1);
    c_ += w * (y * phi.transpose() - c_);
    d_ += w * (phi * phi.transpose() - d_);
    ++n_;
}

void MomentAccumulator::add_batch(const Eigen::MatrixXd& Phi, const Eigen::MatrixXd& Targets)
{
    if (Phi.rows() != d_.rows() || Targets.rows() != c_.rows() || Phi.cols() != Targets.cols())
        throw ConfigError("accumulate: batch dimensions do not match accumulator");
    const auto k = static_cast<std::size_t>(Phi.cols());
    if (k == 0)
        return;
    // Lower-triangle rank-k update, mirrored so D stays exactly symmetric.
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(d_.rows(), d_.cols());
    s.selfadjointView<Eigen::Lower>().rankUpdate(Phi);
    s.triangularView<Eigen::StrictlyUpper>() = s.transpose();

    const double total = static_cast<double>(n_ + k);
    c_ += (Targets * Phi.transpose() - static_cast<double>(k) * c_) / total;
    d_ += (s - static_cast<double>(k) * d_) / total;
    n_ += k;
}

void MomentAccumulator::merge(const MomentAccumulator& other)
{
    if (other.c_.rows() != c_.rows() || other.d_.rows() != d_.rows())
        throw ConfigError("merge: accumulator dimensions differ");
    if (other.n_ == 0)
        return;
    const double total = static_cast<double>(n_ + other.n_);
    const double w = static_cast<double>(other.n_) / total;
    c_ += w * (other.c_ - c_);
    d_ += w * (other.d_ - d_);
    n_ += other.n_;
}

Readout solve_readout(const MomentAccumulator& acc, double ridge)
{
    if (acc.count() == 0)
        throw SolveError("solve_readout: accumulator is empty");
    if (ridge < 0.0)
        throw ConfigError("elm.ridge must be non-negative");
    Eigen::MatrixXd a = acc.D();
    a.diagonal().array() += ridge;
    const Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success)
        throw SolveError("solve_readout: moment matrix is not positive definite");
    if (llt.rcond() < 1e2 * std::numeric_limits<double>::epsilon())
        throw SolveError("solve_readout: moment matrix is numerically singular");
    Readout r;
    r.theta = llt.solve(acc.C().transpose()).transpose();
    if (!r.theta.allFinite())
        throw SolveError("solve_readout: non-finite readout");
    return r;
}

Eigen::VectorXd predict_window(const ElmParams& p, const Readout& r, std::span<const double> z)
{
    if (static_cast<std::size_t>(r.theta.cols()) != p.l_hid())
        throw ConfigError("predict: readout does not match hidden dimension");
    return r.theta * embed(p, z);
}

Eigen::MatrixXd ElmModel::predict_batch(const Eigen::MatrixXd& Z) const
{
    return readout.theta * embed_batch(params, Z);
}

} // namespace eelm
