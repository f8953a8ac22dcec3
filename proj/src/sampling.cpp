#include "rosetta/sampling.hpp"

#include <limits>
#include <numeric>

#include "rosetta/errors.hpp"

namespace rosetta {

std::uint64_t SeededShuffler::below(std::uint64_t bound) {
    if (bound <= 1) return 0;
    // Largest multiple of bound that fits; values above it are rejected.
    const auto limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % bound;
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t replica_seed(std::uint64_t seed, std::size_t index) noexcept {
    return splitmix64(seed + static_cast<std::uint64_t>(index));
}

std::vector<std::size_t> sample_indices(std::size_t population, std::size_t n, std::uint64_t seed) {
    if (n > population) throw SizeExceedsCorpus(n, population);
    std::vector<std::size_t> order(population);
    std::iota(order.begin(), order.end(), std::size_t{0});
    SeededShuffler(seed).shuffle(order);
    order.resize(n);
    return order;
}

}  // namespace rosetta
