#pragma once

#include <cstdint>

namespace defgeo {

// Resource guards.  Every potentially explosive operation checks these before
// allocating; a trip raises ResourceError naming the guard.  Defaults keep
// worst-case memory under about 1 GiB.  DEFGEO_MEMORY_CAP_MIB and
// DEFGEO_FAMILY_CAP environment variables override the two main knobs.
struct Limits {
  // Largest relation arity accepted per universe size (see arity_cap).
  int arity_cap_k2 = 16;
  int arity_cap_k3 = 9;

  // Maximum number of function tables a term-clone fixpoint may hold.
  std::uint64_t max_clone_tables = 1ull << 20;

  // Maximum number of relations in a materialized family (algebraic family,
  // intersection closure).
  std::uint64_t max_family_members = 1ull << 25;

  // Naive-closure oracle: maximum materialized family size.
  std::uint64_t max_oracle_members = 1ull << 20;

  // Naive-closure oracle: budget on pairwise combination steps, so a family
  // that stays under the size cap but churns forever still terminates.
  std::uint64_t max_oracle_work = 1ull << 33;

  // Maximum number of substitution maps enumerated per generator when seeding
  // a definable family (n^r maps for a generator with r free variables).
  std::uint64_t max_seed_maps = 1ull << 20;

  // Overall memory budget for large allocations, in MiB.
  std::uint64_t memory_cap_mib = 1024;

  int arity_cap(int k) const;

  // Throws ResourceError("memory cap") if `bytes` exceeds the budget.
  void check_memory(std::uint64_t bytes, const char* what) const;

  // Defaults with environment overrides applied (read once).
  static const Limits& defaults();
};

}  // namespace defgeo
