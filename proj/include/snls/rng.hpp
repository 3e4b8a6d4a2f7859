#pragma once

#include <cstdint>
#include <random>

namespace snls {

/// Deterministic Gaussian stream.  Streams for independent Monte Carlo
/// paths are derived from (master seed, path index) so results do not
/// depend on worker count or scheduling.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed) : engine_(seed) {}

    static RngStream derived(std::uint64_t master_seed, std::uint64_t stream_index) {
        std::seed_seq seq{static_cast<std::uint32_t>(master_seed),
                          static_cast<std::uint32_t>(master_seed >> 32),
                          static_cast<std::uint32_t>(stream_index),
                          static_cast<std::uint32_t>(stream_index >> 32)};
        RngStream s(0);
        s.engine_.seed(seq);
        return s;
    }

    double normal() { return normal_(engine_); }
    double uniform() { return uniform_(engine_); }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
};

}  // namespace snls
