#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace cirsim {

// Seedable uniform source. A (seed, stream_id) pair fully determines the
// sequence; paths in a batch use their index as stream_id.
class RngStream {
public:
    static constexpr std::string_view kGeneratorId = "mt19937_64/seed_seq(seed,stream_id)/u53";

    RngStream(std::uint64_t seed, std::uint64_t stream_id);

    std::uint64_t next_u64() { return engine_(); }

    // Uniform on the open interval (0, 1) with 53-bit resolution.
    double uniform()
    {
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }

private:
    std::mt19937_64 engine_;
    std::uint64_t seed_;
    std::uint64_t stream_id_;
};

} // namespace cirsim
