#pragma once

#include <cstdint>

namespace qjump {

// Counter-based generator "qjump-sm64ctr-v1".
//
// The i-th output depends only on (key, i), where the key is derived from
// (master_seed, stream) with the splitmix64 finalizer:
//
//   key   = mix(mix(master_seed ^ 0x9e3779b97f4a7c15) + mix(stream))
//   out_i = mix(key + i * 0x9e3779b97f4a7c15),  i = 1, 2, ...
//
// Every consumer (dwell sampling, per-bin counting, Monte Carlo trials) owns
// its own stream, so results are independent of scheduling. The generator
// name and seeding scheme are recorded in trace metadata so a stored trace
// pins the exact stream that produced it.
class CounterRng {
  public:
    static constexpr const char* kName = "qjump-sm64ctr-v1";

    CounterRng(std::uint64_t master_seed, std::uint64_t stream);

    std::uint64_t next_u64();

    // Uniform in [0, 1), 53-bit mantissa.
    double uniform();

    // Exponential with the given mean (inverse CDF). mean > 0.
    double exponential(double mean);

    // Poisson with the given mean. Sequential-search inversion below
    // mean 10, Hormann's PTRS transformed rejection above. mean >= 0.
    std::uint64_t poisson(double mean);

    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    std::uint64_t stream_;

    // Cached PTRS constants, rebuilt only when the mean changes.
    double ptrs_mean_ = -1.0;
    double ptrs_b_ = 0.0, ptrs_a_ = 0.0, ptrs_vr_ = 0.0;
    double ptrs_log_inv_alpha_ = 0.0, ptrs_log_mean_ = 0.0;

    std::uint64_t poisson_inversion(double mean);
    std::uint64_t poisson_ptrs(double mean);
};

// splitmix64 finalizer; exposed for key derivation in tests and tools.
std::uint64_t mix64(std::uint64_t z);

} // namespace qjump
