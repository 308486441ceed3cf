#include "zeno/lattice.hpp"

#include <algorithm>
#include <bit>

namespace zeno {

Boundary parse_boundary(std::string_view s) {
  if (s == "periodic") return Boundary::periodic;
  if (s == "open") return Boundary::open;
  throw std::invalid_argument("unknown boundary '" + std::string(s) + "'");
}

std::string_view to_string(Boundary b) {
  return b == Boundary::periodic ? "periodic" : "open";
}

std::string_view to_string(ComplexKind k) {
  switch (k) {
    case ComplexKind::free: return "free";
    case ComplexKind::type_one: return "type_one";
    case ComplexKind::type_two: return "type_two";
  }
  return "?";
}

void LatticeSpec::validate() const {
  if (n_sites < 1) throw std::invalid_argument("lattice needs at least one site");
  if (critical_distance < 1) throw std::invalid_argument("critical distance must be >= 1");
  if (boundary == Boundary::periodic && critical_distance >= n_sites)
    throw std::invalid_argument("periodic lattice requires R < N");
}

int LatticeSpec::site(int j) const {
  if (boundary == Boundary::periodic) return ((j % n_sites) + n_sites) % n_sites;
  return (j >= 0 && j < n_sites) ? j : -1;
}

std::vector<std::pair<int, int>> LatticeSpec::loss_channels() const {
  std::vector<std::pair<int, int>> out;
  if (boundary == Boundary::periodic) {
    for (int j = 0; j < n_sites; ++j) out.emplace_back(j, (j + critical_distance) % n_sites);
  } else {
    for (int j = 0; j + critical_distance < n_sites; ++j)
      out.emplace_back(j, j + critical_distance);
  }
  return out;
}

// ---------------------------------------------------------------------------

FockConfiguration FockConfiguration::from_string(std::string_view bits) {
  FockConfiguration c(static_cast<int>(bits.size()));
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      c.occ_[i] = 1;
    else if (bits[i] != '0')
      throw std::invalid_argument("configuration string must contain only 0 and 1");
  }
  return c;
}

FockConfiguration FockConfiguration::from_sites(int n_sites, const std::vector<int>& sites) {
  FockConfiguration c(n_sites);
  for (int s : sites) {
    if (s < 0 || s >= n_sites) throw std::invalid_argument("site index out of range");
    c.set(s, true);
  }
  return c;
}

FockConfiguration FockConfiguration::from_code(Code code, int n_sites) {
  FockConfiguration c(n_sites);
  for (int j = 0; j < n_sites; ++j) c.set(j, (code & site_mask(n_sites, j)) != 0);
  return c;
}

FockConfiguration FockConfiguration::mott(int n_sites) {
  FockConfiguration c(n_sites);
  std::fill(c.occ_.begin(), c.occ_.end(), std::uint8_t{1});
  return c;
}

int FockConfiguration::count() const noexcept {
  return static_cast<int>(std::count(occ_.begin(), occ_.end(), std::uint8_t{1}));
}

std::vector<int> FockConfiguration::occupied_sites() const {
  std::vector<int> out;
  for (int j = 0; j < size(); ++j)
    if (occupied(j)) out.push_back(j);
  return out;
}

std::string FockConfiguration::to_string() const {
  std::string s(occ_.size(), '0');
  for (std::size_t i = 0; i < occ_.size(); ++i)
    if (occ_[i]) s[i] = '1';
  return s;
}

Code FockConfiguration::code() const {
  if (size() > kMaxCodedSites) throw std::invalid_argument("configuration too long for a code");
  Code c = 0;
  for (int j = 0; j < size(); ++j)
    if (occupied(j)) c |= site_mask(size(), j);
  return c;
}

// ---------------------------------------------------------------------------

namespace {

Code low_mask(int n) noexcept { return n >= 32 ? ~Code{0} : (Code{1} << n) - 1; }

void check_cap(const LatticeSpec& spec, int cap) {
  if (spec.n_sites > cap || spec.n_sites > kMaxCodedSites)
    throw CapExceeded("enumeration over " + std::to_string(spec.n_sites) +
                      " sites exceeds the cap of " + std::to_string(cap));
}

}  // namespace

bool is_zeno_code(Code code, const LatticeSpec& spec) noexcept {
  const int n = spec.n_sites;
  const int r = spec.critical_distance;
  if (spec.boundary == Boundary::open) {
    if (r >= n) return true;
    return (code & (code << r) & low_mask(n)) == 0;
  }
  // Rotating left by R lines site j+R up with site j.
  const Code rot = ((code << r) | (code >> (n - r))) & low_mask(n);
  return (code & rot) == 0;
}

bool is_zeno_state(const FockConfiguration& config, const LatticeSpec& spec) {
  if (config.size() != spec.n_sites)
    throw std::invalid_argument("configuration length differs from lattice size");
  for (auto [a, b] : spec.loss_channels())
    if (config.occupied(a) && config.occupied(b)) return false;
  return true;
}

std::uint64_t count_zeno_states(const LatticeSpec& spec, int cap) {
  spec.validate();
  check_cap(spec, cap);
  const std::uint64_t total = std::uint64_t{1} << spec.n_sites;
  std::uint64_t count = 0;
  for (std::uint64_t c = 0; c < total; ++c)
    if (is_zeno_code(static_cast<Code>(c), spec)) ++count;
  return count;
}

std::vector<FockConfiguration> enumerate_zeno_basis(const LatticeSpec& spec, int boson_count,
                                                    int cap) {
  spec.validate();
  check_cap(spec, cap);
  if (boson_count < 0 || boson_count > spec.n_sites)
    throw std::invalid_argument("boson count outside [0, N]");
  std::vector<FockConfiguration> out;
  const std::uint64_t total = std::uint64_t{1} << spec.n_sites;
  for (std::uint64_t c = 0; c < total; ++c) {
    const auto code = static_cast<Code>(c);
    if (std::popcount(code) == boson_count && is_zeno_code(code, spec))
      out.push_back(FockConfiguration::from_code(code, spec.n_sites));
  }
  return out;
}

ComplexKind complex_kind(const std::vector<int>& offsets, int critical_distance) {
  if (offsets.size() <= 1) return ComplexKind::free;
  const int extent = offsets.back() - offsets.front();
  if (extent < critical_distance) return ComplexKind::type_one;
  if (extent > critical_distance) return ComplexKind::type_two;
  throw std::logic_error("cluster endpoints at the critical distance");
}

std::vector<ComplexSpecies> classify_complexes(const FockConfiguration& config,
                                               const LatticeSpec& spec) {
  if (!is_zeno_state(config, spec))
    throw std::invalid_argument("classify_complexes requires a Zeno configuration");
  const std::vector<int> sites = config.occupied_sites();
  const int r = spec.critical_distance;
  const int n = spec.n_sites;
  const auto count = sites.size();
  std::vector<ComplexSpecies> out;
  if (count == 0) return out;

  // Gap following boson i (cyclic on a ring).
  auto gap_after = [&](std::size_t i) {
    if (i + 1 < count) return sites[i + 1] - sites[i];
    return spec.boundary == Boundary::periodic ? sites[0] + n - sites[i] : n + r + 1;
  };

  // Start right after an unbound gap so no cluster straddles the start.
  std::size_t start = 0;
  if (spec.boundary == Boundary::periodic) {
    std::size_t widest = count - 1;
    for (std::size_t i = 0; i < count; ++i)
      if (gap_after(i) > gap_after(widest)) widest = i;
    start = (widest + 1) % count;
  }

  ComplexSpecies current;
  int unwrapped = 0;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t i = (start + k) % count;
    if (current.offsets.empty()) {
      current.anchor = sites[i];
      unwrapped = 0;
      current.offsets.push_back(0);
    }
    const int gap = gap_after(i);
    const bool last = (k + 1 == count);
    if (!last && gap < r) {
      unwrapped += gap;
      current.offsets.push_back(unwrapped);
      continue;
    }
    current.boson_count = static_cast<int>(current.offsets.size());
    current.extent = current.offsets.back();
    current.kind = complex_kind(current.offsets, r);
    out.push_back(std::move(current));
    current = ComplexSpecies{};
  }
  return out;
}

}  // namespace zeno
