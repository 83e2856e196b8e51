// SPDX-License-Identifier: MIT
#pragma once

#include <iosfwd>
#include <string>

#include "gotd/dense_tensor.hpp"

namespace gotd {

/// Binary tensor format: magic "GOTD", u32 version (1), u64 mode count,
/// per-mode u64 dimensions, then the values as little-endian doubles in the
/// mode-0-fastest layout. Round trips are bit exact.
void write_tensor(std::ostream& out, const DenseTensor& x);
void write_tensor_file(const std::string& path, const DenseTensor& x);
DenseTensor read_tensor(std::istream& in);
DenseTensor read_tensor_file(const std::string& path);

}  // namespace gotd
