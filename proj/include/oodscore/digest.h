//
// oodscore - Copyright 2026 The oodscore Authors.
// SPDX-License-Identifier: Apache-2.0
//

#ifndef OODSCORE_DIGEST_H_
#define OODSCORE_DIGEST_H_

#include <filesystem>
#include <string>
#include <string_view>

namespace oodscore {

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Digest of a file, or of a directory as the digest over sorted
// "<relative path>\0<file digest>\n" lines.
std::string sha256_path(const std::filesystem::path &path);

}  // namespace oodscore

#endif  // OODSCORE_DIGEST_H_
