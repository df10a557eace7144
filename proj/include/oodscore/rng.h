//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_RNG_H_
#define OODSCORE_RNG_H_

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace oodscore {

using Rng = std::mt19937_64;

// Derives an independent stream seed from a base seed and a tag. Built on
// std::seed_seq, whose mixing is fully specified by the standard.
inline std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag,
                                 std::uint64_t index = 0) {
  std::vector<std::uint32_t> material {
    static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)
  };
  for (unsigned char c: tag)
    material.push_back(c);
  std::seed_seq seq(material.begin(), material.end());
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

}  // namespace oodscore

#endif  // OODSCORE_RNG_H_
