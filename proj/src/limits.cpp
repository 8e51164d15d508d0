#include "defgeo/limits.hpp"

#include <cstdlib>
#include <string>

#include "defgeo/errors.hpp"

namespace defgeo {

int Limits::arity_cap(int k) const {
  if (k <= 2) return arity_cap_k2;
  if (k == 3) return arity_cap_k3;
  // Largest n with k^n <= 2^16.
  int n = 0;
  std::uint64_t v = 1;
  while (v * static_cast<std::uint64_t>(k) <= (1ull << 16)) {
    v *= static_cast<std::uint64_t>(k);
    ++n;
  }
  return n > 0 ? n : 1;
}

void Limits::check_memory(std::uint64_t bytes, const char* what) const {
  if (bytes > memory_cap_mib * (1ull << 20)) {
    throw ResourceError("memory cap", std::string(what) + " needs " +
                                          std::to_string(bytes >> 20) + " MiB");
  }
}

namespace {

std::uint64_t env_u64(const char* name, std::uint64_t fallback) {
  const char* s = std::getenv(name);
  if (s == nullptr || *s == '\0') return fallback;
  char* end = nullptr;
  unsigned long long v = std::strtoull(s, &end, 10);
  if (end == s || *end != '\0' || v == 0) return fallback;
  return static_cast<std::uint64_t>(v);
}

Limits make_defaults() {
  Limits l;
  l.memory_cap_mib = env_u64("DEFGEO_MEMORY_CAP_MIB", l.memory_cap_mib);
  l.max_family_members = env_u64("DEFGEO_FAMILY_CAP", l.max_family_members);
  return l;
}

}  // namespace

const Limits& Limits::defaults() {
  static const Limits instance = make_defaults();
  return instance;
}

}  // namespace defgeo
