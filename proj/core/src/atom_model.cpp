#include "qjump/atom_model.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "qjump/errors.hpp"

namespace qjump {

void LevelSet::validate() const {
    double sum = 0.0;
    for (double p : populations) {
        if (p < 0.0 || p > 1.0)
            throw ValidationError("LevelSet: populations must lie in [0, 1]");
        sum += p;
    }
    if (std::fabs(sum - 1.0) > 1e-12)
        throw ValidationError("LevelSet: populations must sum to 1");
}

RateMatrix::RateMatrix(std::size_t n_levels) : n_(n_levels), q_(n_levels * n_levels, 0.0) {
    if (n_levels < 2)
        throw ValidationError("RateMatrix: need at least 2 levels");
}

double RateMatrix::rate(std::size_t from, std::size_t to) const {
    return q_[to * n_ + from];
}

void RateMatrix::set_rate(std::size_t from, std::size_t to, double rate_per_s) {
    if (from >= n_ || to >= n_ || from == to)
        throw ValidationError("RateMatrix: bad level index");
    if (rate_per_s < 0.0 || !std::isfinite(rate_per_s))
        throw ValidationError("RateMatrix: rates must be finite and >= 0");
    q_[to * n_ + from] = rate_per_s;
    refresh_diagonal(from);
}

void RateMatrix::refresh_diagonal(std::size_t col) {
    double outflow = 0.0;
    for (std::size_t row = 0; row < n_; ++row)
        if (row != col)
            outflow += q_[row * n_ + col];
    q_[col * n_ + col] = -outflow;
}

void RateMatrix::validate() const {
    double max_entry = 0.0;
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) {
            if (i != j && q_[i * n_ + j] < 0.0)
                throw ValidationError("RateMatrix: negative off-diagonal entry");
            max_entry = std::max(max_entry, std::fabs(q_[i * n_ + j]));
        }
    for (std::size_t col = 0; col < n_; ++col) {
        double sum = 0.0;
        for (std::size_t row = 0; row < n_; ++row)
            sum += q_[row * n_ + col];
        if (std::fabs(sum) > 1e-9 * std::max(max_entry, 1.0))
            throw ValidationError("RateMatrix: column does not conserve probability");
    }
}

std::vector<bool> RateMatrix::isolated_levels() const {
    std::vector<bool> isolated(n_, true);
    for (std::size_t from = 0; from < n_; ++from)
        for (std::size_t to = 0; to < n_; ++to)
            if (from != to && rate(from, to) > 0.0)
                isolated[from] = isolated[to] = false;
    return isolated;
}

std::vector<double> stationary_distribution(const RateMatrix& rates) {
    rates.validate();

    const std::size_t n = rates.size();
    const auto isolated = rates.isolated_levels();
    std::vector<std::size_t> coupled;
    for (std::size_t i = 0; i < n; ++i)
        if (!isolated[i])
            coupled.push_back(i);
    if (coupled.empty())
        throw DegenerateDynamicsError("stationary_distribution: no coupled levels");

    const std::size_t m = coupled.size();
    Eigen::MatrixXd q(m, m);
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < m; ++c)
            q(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                rates.entry(coupled[r], coupled[c]);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(q, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    // Generators are singular by construction; uniqueness requires the
    // second-smallest singular value to be clearly nonzero.
    const double tol = 1e-10 * sv(0);
    if (m >= 2 && sv(static_cast<Eigen::Index>(m) - 2) <= tol)
        throw DegenerateDynamicsError(
            "stationary_distribution: no unique stationary state");

    Eigen::VectorXd v = svd.matrixV().col(static_cast<Eigen::Index>(m) - 1);
    if (v.sum() < 0.0)
        v = -v;
    // Irreducible chains give a strictly positive vector; clip roundoff.
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (v(i) < 0.0 && v(i) > -1e-12)
            v(i) = 0.0;
    if ((v.array() < 0.0).any())
        throw DegenerateDynamicsError(
            "stationary_distribution: stationary vector not non-negative");
    v /= v.sum();

    std::vector<double> populations(n, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        populations[coupled[k]] = v(static_cast<Eigen::Index>(k));
    return populations;
}

LevelSet steady_state_populations(const RateMatrix& rates) {
    if (rates.size() != kNumLevels)
        throw ValidationError("steady_state_populations: expected a 5-level matrix");
    const auto p = stationary_distribution(rates);
    LevelSet out;
    std::copy(p.begin(), p.end(), out.populations.begin());
    out.validate();
    return out;
}

RateMatrix default_calibration_matrix() {
    constexpr double kDecayP12toS12 = 1.32e8; // /s
    constexpr double kDecayP12toD32 = 8.4e6;  // /s
    constexpr double kPump397 = 5.5e7;        // /s
    constexpr double kPump866 = 1.5e6;        // /s

    const auto s = static_cast<std::size_t>(Level::S12);
    const auto p = static_cast<std::size_t>(Level::P12);
    const auto d = static_cast<std::size_t>(Level::D32);

    RateMatrix q(kNumLevels);
    q.set_rate(s, p, kPump397);
    q.set_rate(p, s, kDecayP12toS12 + kPump397);
    q.set_rate(d, p, kPump866);
    q.set_rate(p, d, kDecayP12toD32 + kPump866);
    return q;
}

LineProfile absorption_profile(double natural_fwhm_mhz, double zeeman_broadening_mhz) {
    if (!(natural_fwhm_mhz > 0.0))
        throw ValidationError("absorption_profile: natural width must be > 0");
    if (zeeman_broadening_mhz < 0.0)
        throw ValidationError("absorption_profile: broadening must be >= 0");
    return LineProfile::lorentzian(0.0, natural_fwhm_mhz + zeeman_broadening_mhz, 1.0);
}

void DarkStateParams::validate() const {
    if (!(mean_dwell_s > 0.0))
        throw ValidationError("DarkStateParams: mean_dwell must be > 0");
}

DwellSampler::DwellSampler(DarkStateParams params, std::uint64_t seed)
    : params_(params), rng_(seed, /*stream=*/0) {
    params_.validate();
}

double DwellSampler::next() {
    return rng_.exponential(params_.mean_dwell_s);
}

} // namespace qjump
