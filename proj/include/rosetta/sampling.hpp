#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace rosetta {

/// Seeded, platform-independent shuffling. The engine is std::mt19937_64,
/// whose output sequence the standard fixes; bounded integers come from
/// rejection sampling rather than std::uniform_int_distribution, whose
/// algorithm is implementation-defined.
class SeededShuffler {
public:
    explicit SeededShuffler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform integer in [0, bound).
    std::uint64_t below(std::uint64_t bound);

    /// Fisher-Yates, swapping from the back.
    template <typename T>
    void shuffle(std::vector<T>& items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Seed for replica `index` (0-based) of a sampling run seeded with `seed`.
std::uint64_t replica_seed(std::uint64_t seed, std::size_t index) noexcept;

/// The first `n` entries of a seeded permutation of [0, population).
std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n, std::uint64_t seed);

}  // namespace rosetta
