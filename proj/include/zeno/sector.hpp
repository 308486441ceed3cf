#pragma once

// Fixed-particle-number Fock sectors with code <-> index lookup.

#include <cstddef>
#include <functional>
#include <vector>

#include "zeno/lattice.hpp"

namespace zeno {

class HilbertSector {
 public:
  HilbertSector() = default;

  // All configurations of `bosons` particles on n_sites, ascending codes.
  static HilbertSector full(int n_sites, int bosons);
  // Only configurations satisfying the Zeno constraint of `spec`.
  static HilbertSector zeno(const LatticeSpec& spec, int bosons);
  // Arbitrary code list (sorted and deduplicated here). All codes must
  // share one boson number unless `mixed` is set.
  static HilbertSector from_codes(int n_sites, std::vector<Code> codes, bool mixed = false);

  int n_sites() const noexcept { return n_sites_; }
  int boson_count() const noexcept { return bosons_; }  // -1 for mixed sets
  std::size_t size() const noexcept { return codes_.size(); }
  const std::vector<Code>& codes() const noexcept { return codes_; }
  Code code(std::size_t i) const { return codes_[i]; }
  FockConfiguration config(std::size_t i) const {
    return FockConfiguration::from_code(codes_[i], n_sites_);
  }

  // Position of `c`, or -1 if absent.
  long index(Code c) const noexcept;

 private:
  int n_sites_ = 0;
  int bosons_ = 0;
  std::vector<Code> codes_;
};

// Binomial coefficient as a double-safe 64-bit value.
std::uint64_t binomial(int n, int k);

}  // namespace zeno
