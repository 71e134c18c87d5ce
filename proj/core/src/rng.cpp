#include "qjump/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace qjump {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;
}

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ull;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebull;
    z ^= z >> 31;
    return z;
}

CounterRng::CounterRng(std::uint64_t master_seed, std::uint64_t stream)
    : key_(mix64(mix64(master_seed ^ kGolden) + mix64(stream))), stream_(stream) {}

std::uint64_t CounterRng::next_u64() {
    ++counter_;
    return mix64(key_ + counter_ * kGolden);
}

double CounterRng::uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double CounterRng::exponential(double mean) {
    if (!(mean > 0.0))
        throw std::invalid_argument("exponential: mean must be > 0");
    // 1 - u is in (0, 1], so the log is finite.
    return -mean * std::log(1.0 - uniform());
}

std::uint64_t CounterRng::poisson(double mean) {
    if (mean < 0.0 || !std::isfinite(mean))
        throw std::invalid_argument("poisson: mean must be finite and >= 0");
    if (mean == 0.0)
        return 0;
    return mean < 10.0 ? poisson_inversion(mean) : poisson_ptrs(mean);
}

std::uint64_t CounterRng::poisson_inversion(double mean) {
    const double u = uniform();
    double p = std::exp(-mean);
    double cdf = p;
    std::uint64_t k = 0;
    while (u > cdf) {
        ++k;
        p *= mean / static_cast<double>(k);
        cdf += p;
        if (p == 0.0)
            break; // u in the far tail; cdf has saturated
    }
    return k;
}

// Hormann's PTRS transformed rejection: ~86% of samples take the two-uniform
// fast path with no transcendental call beyond the setup constants.
std::uint64_t CounterRng::poisson_ptrs(double mean) {
    if (mean != ptrs_mean_) {
        ptrs_mean_ = mean;
        ptrs_b_ = 0.931 + 2.53 * std::sqrt(mean);
        ptrs_a_ = -0.059 + 0.02483 * ptrs_b_;
        ptrs_vr_ = 0.9277 - 3.6224 / (ptrs_b_ - 2.0);
        ptrs_log_inv_alpha_ = std::log(1.1239 + 1.1328 / (ptrs_b_ - 3.4));
        ptrs_log_mean_ = std::log(mean);
    }
    for (;;) {
        const double u = uniform() - 0.5;
        const double v = uniform();
        const double us = 0.5 - std::fabs(u);
        const double kf =
            std::floor((2.0 * ptrs_a_ / us + ptrs_b_) * u + mean + 0.43);
        if (us >= 0.07 && v <= ptrs_vr_)
            return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us))
            continue;
        if (std::log(v) + ptrs_log_inv_alpha_ -
                std::log(ptrs_a_ / (us * us) + ptrs_b_) <=
            kf * ptrs_log_mean_ - mean - std::lgamma(kf + 1.0))
            return static_cast<std::uint64_t>(kf);
    }
}

} // namespace qjump
