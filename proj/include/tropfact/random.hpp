#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace tropfact {

using Rng = std::mt19937_64;

// Sub-seed for an independent random stream. Streams are keyed by a fixed
// label (and an optional index, e.g. trial or user), so adding a new
// consumer never perturbs an existing one.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view label, std::uint64_t index = 0);

inline Rng make_rng(std::uint64_t seed, std::string_view label, std::uint64_t index = 0) {
  return Rng(derive_seed(seed, label, index));
}

}  // namespace tropfact
