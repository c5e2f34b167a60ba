#pragma once

#include <string>

#include "shapeseed/tensor.hpp"

namespace shapeseed {

// Dense tensor file (".dtf"): magic "SEGT", version 0x01, dtype 0x01
// (real32 little-endian), two reserved zero bytes, then H, W, C as u32 LE,
// then H*W*C real32 values in row-major ((row*W+col)*C+ch) order.

void write_dtf(const std::string& path, const Tensor3& tensor);

/// Rejects unknown magic/version/dtype, truncated payloads, and non-finite
/// values.
Tensor3 read_dtf(const std::string& path);

}  // namespace shapeseed
