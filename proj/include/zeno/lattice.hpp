#pragma once

// Hard-core boson configurations on a one-dimensional lattice with
// distance-selective pair loss: the Zeno constraint, enumeration of the
// constrained configuration space and clustering into bound complexes.

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace zeno {

// Configurations with at most this many sites are encoded as bit masks.
using Code = std::uint32_t;
inline constexpr int kMaxCodedSites = 32;
inline constexpr int kEnumerationCap = 24;

class CapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Boundary { periodic, open };

Boundary parse_boundary(std::string_view s);
std::string_view to_string(Boundary b);

struct LatticeSpec {
  int n_sites = 0;
  int critical_distance = 1;  // R
  Boundary boundary = Boundary::periodic;

  // Throws std::invalid_argument. Periodic lattices need R < N; an open
  // chain with R >= N simply has no loss channel.
  void validate() const;

  // Site index after boundary handling, or -1 when it falls off an open chain.
  int site(int j) const;

  // Distance-R pairs (j, j+R), one per jump operator L_j. Periodic lattices
  // have N channels (for N = 2R each pair therefore appears twice), open
  // chains N - R.
  std::vector<std::pair<int, int>> loss_channels() const;
};

// Bit layout shared by every module: site 0 is the most significant of the N
// low bits, so numeric order of codes equals lexicographic order of the
// occupation string.
constexpr Code site_mask(int n_sites, int site) noexcept {
  return Code{1} << (n_sites - 1 - site);
}

class FockConfiguration {
 public:
  FockConfiguration() = default;
  explicit FockConfiguration(int n_sites) : occ_(static_cast<std::size_t>(n_sites), 0) {}

  static FockConfiguration from_string(std::string_view bits);
  static FockConfiguration from_sites(int n_sites, const std::vector<int>& sites);
  static FockConfiguration from_code(Code code, int n_sites);
  static FockConfiguration mott(int n_sites);

  int size() const noexcept { return static_cast<int>(occ_.size()); }
  bool occupied(int j) const { return occ_[static_cast<std::size_t>(j)] != 0; }
  void set(int j, bool on) { occ_[static_cast<std::size_t>(j)] = on ? 1 : 0; }
  int count() const noexcept;
  std::vector<int> occupied_sites() const;
  std::string to_string() const;
  Code code() const;  // requires size() <= kMaxCodedSites

  friend bool operator==(const FockConfiguration&, const FockConfiguration&) = default;
  friend auto operator<=>(const FockConfiguration&, const FockConfiguration&) = default;

 private:
  std::vector<std::uint8_t> occ_;
};

enum class ComplexKind { free, type_one, type_two };
std::string_view to_string(ComplexKind k);

struct ComplexSpecies {
  ComplexKind kind = ComplexKind::free;
  std::vector<int> offsets;  // relative to the leftmost boson, offsets[0] == 0
  int boson_count = 0;
  int extent = 0;
  int anchor = 0;  // lattice site of the leftmost boson
};

bool is_zeno_state(const FockConfiguration& config, const LatticeSpec& spec);
bool is_zeno_code(Code code, const LatticeSpec& spec) noexcept;

// Number of configurations annihilated by every jump operator.
std::uint64_t count_zeno_states(const LatticeSpec& spec, int cap = kEnumerationCap);

// Partitions the bosons of a Zeno configuration into clusters: consecutive
// bosons closer than R are bound, farther apart they are not.
std::vector<ComplexSpecies> classify_complexes(const FockConfiguration& config,
                                               const LatticeSpec& spec);

// Kind of an anchored offset list (sorted, offsets[0] == 0).
ComplexKind complex_kind(const std::vector<int>& offsets, int critical_distance);

// Zeno configurations with a fixed boson number in ascending lexicographic order.
std::vector<FockConfiguration> enumerate_zeno_basis(const LatticeSpec& spec, int boson_count,
                                                    int cap = kEnumerationCap);

}  // namespace zeno
