// Field container: one realization of a Gaussian field on V_N, row-major.
#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "gfe/lattice.hpp"

namespace gfe {

enum class FieldKind : std::uint8_t { gff = 0, mbrw = 1, brw = 2 };

inline const char* kind_name(FieldKind k) {
  switch (k) {
    case FieldKind::gff: return "gff";
    case FieldKind::mbrw: return "mbrw";
    case FieldKind::brw: return "brw";
  }
  return "?";
}

/** Sampled field: values over V_N plus the metadata that reproduces it. */
struct Field {
  FieldKind kind = FieldKind::gff;
  int N = 0;
  std::uint64_t seed = 0;
  int k_lo = 0;  // level range actually summed (0..0 for GFF)
  int k_hi = 0;
  std::vector<double> values;  // row-major, index x * N + y

  double at(Vertex v) const { return values[static_cast<std::size_t>(v.x) * N + v.y]; }
  double& at(Vertex v) { return values[static_cast<std::size_t>(v.x) * N + v.y]; }

  void require_square() const {
    if (static_cast<std::size_t>(N) * N != values.size())
      throw std::logic_error("Field: value count does not match N");
  }
};

}  // namespace gfe
