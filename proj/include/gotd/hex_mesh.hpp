// SPDX-License-Identifier: MIT
#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "gotd/common.hpp"

namespace gotd {

/// Hexahedral mesh over a spatial tensor grid. Each node carries its
/// coordinates and the (i1,i2,i3) spatial tensor indices (0-based) of the
/// value it owns; each element lists its 8 nodes with the local ordering
/// x fastest, then y, then z (local node l = ix + 2*iy + 4*iz).
struct HexMesh {
  std::vector<double> x, y, z;
  std::vector<std::array<std::size_t, 3>> tensor_ind;  // per node
  std::vector<std::array<std::size_t, 8>> elements;    // node indices

  std::size_t node_count() const { return x.size(); }
  std::size_t element_count() const { return elements.size(); }

  /// Checks node references, tensor-index bounds against the spatial
  /// dimensions, and injectivity of tensor_ind.
  void validate(const std::array<std::size_t, 3>& spatial_dims) const;
};

/// Uniform structured grid with nx*ny*nz nodes and spacing (hx,hy,hz);
/// node (i,j,k) sits at (i*hx, j*hy, k*hz) and owns tensor index (i,j,k).
HexMesh structured_hex_mesh(std::size_t nx, std::size_t ny, std::size_t nz,
                            double hx, double hy, double hz);

/// Plain-text mesh: header "nodes N elems E", then N lines "x y z i1 i2 i3"
/// (1-based tensor indices), then E lines of 8 node indices (1-based).
HexMesh read_hex_mesh(std::istream& in);
HexMesh read_hex_mesh_file(const std::string& path);
void write_hex_mesh(std::ostream& out, const HexMesh& mesh);

}  // namespace gotd
