#include "hkc/random.hpp"

#include <algorithm>
#include <unordered_set>

namespace hkc {

std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                    std::size_t count,
                                                    Rng& rng) {
  std::vector<std::size_t> out;
  out.reserve(count);
  if (count * 4 >= n) {
    // Dense case: partial Fisher-Yates.
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    for (std::size_t i = 0; i < count; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(pool[i], pool[pick(rng)]);
      out.push_back(pool[i]);
    }
  } else {
    std::unordered_set<std::size_t> chosen;
    for (std::size_t j = n - count; j < n; ++j) {
      std::uniform_int_distribution<std::size_t> pick(0, j);
      const std::size_t v = pick(rng);
      if (chosen.insert(v).second) {
        out.push_back(v);
      } else {
        chosen.insert(j);
        out.push_back(j);
      }
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace hkc
