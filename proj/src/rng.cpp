#include "dsekl/rng.hpp"

#include <numeric>
#include <unordered_set>

namespace dsekl {

std::vector<Index> sample_indices(std::size_t n, std::size_t size, Rng& rng) {
    if (size > n) size = n;
    std::vector<Index> out;
    out.reserve(size);
    // Floyd's algorithm is O(size); a partial shuffle is cheaper once the
    // sample covers a sizeable fraction of the population.
    if (size * 4 < n) {
        std::unordered_set<Index> seen;
        seen.reserve(size * 2);
        for (std::size_t j = n - size; j < n; ++j) {
            const Index t = std::uniform_int_distribution<Index>(0, j)(rng);
            out.push_back(seen.insert(t).second ? t : j);
            if (out.back() == j) seen.insert(j);
        }
        return out;
    }
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    for (std::size_t k = 0; k < size; ++k) {
        const Index t = std::uniform_int_distribution<Index>(k, n - 1)(rng);
        std::swap(perm[k], perm[t]);
        out.push_back(perm[k]);
    }
    return out;
}

}  // namespace dsekl
