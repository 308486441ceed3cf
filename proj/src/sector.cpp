#include "zeno/sector.hpp"

#include <algorithm>
#include <bit>
#include <stdexcept>

namespace zeno {

std::uint64_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  std::uint64_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
  return r;
}

namespace {

template <class Keep>
std::vector<Code> enumerate(int n, int m, Keep keep) {
  if (n < 1 || n > kMaxCodedSites) throw std::invalid_argument("sector needs 1..32 sites");
  if (m < 0 || m > n) throw std::invalid_argument("boson count outside [0, N]");
  std::vector<Code> out;
  if (m == 0) {
    if (keep(Code{0})) out.push_back(0);
    return out;
  }
  // Gosper's hack walks all m-bit patterns in ascending order.
  std::uint64_t c = (std::uint64_t{1} << m) - 1;
  const std::uint64_t limit = std::uint64_t{1} << n;
  while (c < limit) {
    if (keep(static_cast<Code>(c))) out.push_back(static_cast<Code>(c));
    const std::uint64_t low = c & (~c + 1);
    const std::uint64_t ripple = c + low;
    c = (((ripple ^ c) >> 2) / low) | ripple;
  }
  return out;
}

}  // namespace

HilbertSector HilbertSector::full(int n_sites, int bosons) {
  HilbertSector s;
  s.n_sites_ = n_sites;
  s.bosons_ = bosons;
  s.codes_ = enumerate(n_sites, bosons, [](Code) { return true; });
  return s;
}

HilbertSector HilbertSector::zeno(const LatticeSpec& spec, int bosons) {
  spec.validate();
  HilbertSector s;
  s.n_sites_ = spec.n_sites;
  s.bosons_ = bosons;
  s.codes_ = enumerate(spec.n_sites, bosons, [&](Code c) { return is_zeno_code(c, spec); });
  return s;
}

HilbertSector HilbertSector::from_codes(int n_sites, std::vector<Code> codes, bool mixed) {
  HilbertSector s;
  s.n_sites_ = n_sites;
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  s.bosons_ = codes.empty() ? 0 : std::popcount(codes.front());
  for (Code c : codes) {
    if (n_sites < kMaxCodedSites && (c >> n_sites) != 0)
      throw std::invalid_argument("code has bits beyond the lattice");
    if (std::popcount(c) != s.bosons_) {
      if (!mixed) throw std::invalid_argument("codes of a sector must share the boson number");
      s.bosons_ = -1;
    }
  }
  s.codes_ = std::move(codes);
  return s;
}

long HilbertSector::index(Code c) const noexcept {
  const auto it = std::lower_bound(codes_.begin(), codes_.end(), c);
  if (it == codes_.end() || *it != c) return -1;
  return static_cast<long>(it - codes_.begin());
}

}  // namespace zeno
