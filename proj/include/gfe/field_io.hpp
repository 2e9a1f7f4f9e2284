// Field persistence: little-endian binary format, magic "GFE1", version 1.
#pragma once

#include <stdexcept>
#include <string>

#include "gfe/field.hpp"

namespace gfe {

struct BadMagicError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VersionMismatchError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TruncatedPayloadError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/** Write a field; layout: magic, kind u8, reserved u8, version u16, N u32,
 *  seed u64, k_lo i32, k_hi i32, then N^2 float64 values row-major. */
void write_field(const Field& f, const std::string& path);

/** Read a field written by write_field; round-trips bit-exactly. */
Field read_field(const std::string& path);

}  // namespace gfe
