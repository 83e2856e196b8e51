// SPDX-License-Identifier: MIT
#include "gotd/hex_mesh.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace gotd {

void HexMesh::validate(const std::array<std::size_t, 3>& spatial_dims) const {
  const std::size_t n = node_count();
  GOTD_CHECK(y.size() == n && z.size() == n && tensor_ind.size() == n,
             "mesh: node arrays must have equal lengths");
  std::set<std::array<std::size_t, 3>> seen;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < 3; ++a)
      GOTD_CHECK(tensor_ind[i][a] < spatial_dims[a],
                 "mesh: node tensor index exceeds the spatial dimensions");
    GOTD_CHECK(seen.insert(tensor_ind[i]).second,
               "mesh: tensor indices must be unique per node");
  }
  for (std::size_t e = 0; e < elements.size(); ++e)
    for (std::size_t k = 0; k < 8; ++k)
      GOTD_CHECK(elements[e][k] < n, "mesh: element " + std::to_string(e) +
                                         " references an out-of-range node");
}

HexMesh structured_hex_mesh(std::size_t nx, std::size_t ny, std::size_t nz,
                            double hx, double hy, double hz) {
  GOTD_CHECK(nx >= 2 && ny >= 2 && nz >= 2,
             "structured mesh needs at least two nodes per direction");
  GOTD_CHECK(hx > 0 && hy > 0 && hz > 0, "mesh spacing must be positive");
  HexMesh m;
  const std::size_t n = nx * ny * nz;
  m.x.reserve(n);
  m.y.reserve(n);
  m.z.reserve(n);
  m.tensor_ind.reserve(n);
  for (std::size_t k = 0; k < nz; ++k)
    for (std::size_t j = 0; j < ny; ++j)
      for (std::size_t i = 0; i < nx; ++i) {
        m.x.push_back(static_cast<double>(i) * hx);
        m.y.push_back(static_cast<double>(j) * hy);
        m.z.push_back(static_cast<double>(k) * hz);
        m.tensor_ind.push_back({i, j, k});
      }
  const auto node = [nx, ny](std::size_t i, std::size_t j, std::size_t k) {
    return i + nx * (j + ny * k);
  };
  for (std::size_t k = 0; k + 1 < nz; ++k)
    for (std::size_t j = 0; j + 1 < ny; ++j)
      for (std::size_t i = 0; i + 1 < nx; ++i) {
        std::array<std::size_t, 8> e;
        for (std::size_t l = 0; l < 8; ++l)
          e[l] = node(i + (l & 1), j + ((l >> 1) & 1), k + ((l >> 2) & 1));
        m.elements.push_back(e);
      }
  return m;
}

HexMesh read_hex_mesh(std::istream& in) {
  std::string tag_nodes, tag_elems;
  std::size_t n = 0, e = 0;
  in >> tag_nodes >> n >> tag_elems >> e;
  GOTD_CHECK(in && tag_nodes == "nodes" && tag_elems == "elems",
             "mesh: expected header 'nodes N elems E'");
  HexMesh m;
  m.x.resize(n);
  m.y.resize(n);
  m.z.resize(n);
  m.tensor_ind.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t i1 = 0, i2 = 0, i3 = 0;
    in >> m.x[i] >> m.y[i] >> m.z[i] >> i1 >> i2 >> i3;
    GOTD_CHECK(in, "mesh: truncated node record");
    GOTD_CHECK(i1 >= 1 && i2 >= 1 && i3 >= 1,
               "mesh: tensor indices are 1-based");
    m.tensor_ind[i] = {i1 - 1, i2 - 1, i3 - 1};
  }
  m.elements.resize(e);
  for (std::size_t j = 0; j < e; ++j) {
    for (std::size_t k = 0; k < 8; ++k) {
      std::size_t idx = 0;
      in >> idx;
      GOTD_CHECK(in, "mesh: truncated element record");
      GOTD_CHECK(idx >= 1, "mesh: node indices are 1-based");
      m.elements[j][k] = idx - 1;
    }
  }
  return m;
}

HexMesh read_hex_mesh_file(const std::string& path) {
  std::ifstream in(path);
  GOTD_CHECK(in.good(), "mesh: cannot open '" + path + "'");
  return read_hex_mesh(in);
}

void write_hex_mesh(std::ostream& out, const HexMesh& mesh) {
  out << "nodes " << mesh.node_count() << " elems " << mesh.element_count()
      << "\n";
  char buf[128];
  for (std::size_t i = 0; i < mesh.node_count(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %zu %zu %zu\n",
                  mesh.x[i], mesh.y[i], mesh.z[i], mesh.tensor_ind[i][0] + 1,
                  mesh.tensor_ind[i][1] + 1, mesh.tensor_ind[i][2] + 1);
    out << buf;
  }
  for (const auto& e : mesh.elements) {
    for (std::size_t k = 0; k < 8; ++k) out << e[k] + 1 << (k == 7 ? '\n' : ' ');
  }
}

}  // namespace gotd
