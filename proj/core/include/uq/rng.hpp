#pragma once

#include <cstdint>
#include <array>

namespace uq {

// Splittable deterministic random stream. A stream is fully identified by
// (seed, stream_id): equal pairs produce equal sequences regardless of which
// thread runs them, and derive() builds statistically independent child
// streams without touching the parent's state. xoshiro256++ core seeded
// through a splitmix64 chain.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0);

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream_id() const { return stream_id_; }

    std::uint64_t next_u64();

    // Uniform on [0, 1), 53-bit resolution.
    double next_double();

    // Uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n);

    // Standard normal via Marsaglia's polar method (second value cached).
    double next_normal();

    // Child stream keyed by (a, b); independent of the parent's position.
    RngStream derive(std::uint64_t a, std::uint64_t b = 0) const;

  private:
    std::uint64_t seed_ = 0;
    std::uint64_t stream_id_ = 0;
    std::array<std::uint64_t, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace uq
