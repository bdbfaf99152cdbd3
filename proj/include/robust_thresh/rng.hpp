#pragma once

#include <array>
#include <cstdint>

namespace rthresh {

// Philox4x64-10 counter-based generator (Salmon et al., SC'11).
// Every output is a pure function of (key, counter), so a sample's random
// numbers do not depend on the order in which samples are generated.
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter block(Counter ctr, Key key);
};

// Stream tags separate independent uses of one user seed.
enum class StreamTag : std::uint64_t {
    Covariates = 1,
    Noise = 2,
    Truth = 3,
    AdversaryChoice = 4,
    AdversaryNoise = 5,
    AdversaryDirection = 6,
    Init = 7,
    Lab = 8,
    Harness = 9,
};

// A sequential view of one (seed, tag, stream id) substream. Draw j of the
// stream is block j/4 lane j%4 of Philox keyed by (seed, tag) at counter
// (stream id, j/4, 0, 0).
class CounterStream {
public:
    CounterStream(std::uint64_t seed, StreamTag tag, std::uint64_t stream_id);

    std::uint64_t next_u64();
    // Uniform on the open interval (0, 1); never returns 0 or 1.
    double next_open01();
    // Uniform on [0, 1).
    double next_unit();
    // Standard normal by inverse CDF.
    double next_normal();
    // +1 or -1 with equal probability.
    double next_sign();
    // Uniform integer in [0, bound) by rejection.
    std::uint64_t next_below(std::uint64_t bound);

private:
    Philox4x64::Key key_;
    std::uint64_t stream_id_;
    std::uint64_t block_index_ = 0;
    Philox4x64::Counter buffer_{};
    int lane_ = 4;
};

// Hash-derive a child seed, used to give each (axis point, trial) its own seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

// Inverse of the standard normal CDF (Wichura AS241, ~1e-16 relative accuracy).
double normal_quantile(double p);

}  // namespace rthresh
