#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace rollout {

// std::mt19937_64's output sequence is fixed by the standard; the
// distributions in <random> are not, so draws are derived from raw words here
// to keep outputs identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform_open() { return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53; }

    /// Uniform index in [0, n). n must be positive.
    std::size_t index(std::size_t n) {
        auto i = static_cast<std::size_t>(uniform_open() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace rollout
