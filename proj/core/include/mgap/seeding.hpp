#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mgap {

// 64-bit FNV-1a over a label string.
std::uint64_t fnv1a64(std::string_view s);

// SplitMix64 finalizer; decorrelates nearby seeds.
std::uint64_t splitmix64(std::uint64_t x);

// All randomness in the pipeline flows from one master seed. A component
// derives its own stream as sub_seed(master, "component/task", index), so
// runs are reproducible end to end and components stay decorrelated.
std::uint64_t sub_seed(std::uint64_t master, std::string_view label, std::uint64_t index = 0);

inline std::mt19937_64 make_rng(std::uint64_t master, std::string_view label, std::uint64_t index = 0) {
    return std::mt19937_64(sub_seed(master, label, index));
}

}  // namespace mgap
