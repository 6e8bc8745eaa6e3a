// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ksafem/geometry.hpp"

namespace ksafem {

/// Conforming tetrahedral mesh with tagged-edge bisection refinement.
///
/// Tetrahedra carry an ordered vertex tuple, a refinement tag d in {1,2,3}
/// and a generation counter. The refinement edge of a tet is (v[0], v[d]);
/// bisection follows Maubach's rule, so the initial box meshes (Kuhn-cube
/// triangulations, all tags = 3) stay shape regular under arbitrary local
/// refinement and the recursive conformity closure terminates.
///
/// A TetMesh is immutable after construction: refine() returns a new mesh
/// that remembers its parent through `mesh_id`/`parent_mesh_id`, the
/// per-tet ancestor index `parent_tet`, and the `parent_refined` flags.
struct TetMesh {
  struct Tet {
    std::array<std::int32_t, 4> v;
    std::int8_t tag = 3;    // refinement edge is (v[0], v[tag])
    std::int32_t gen = 0;
  };

  // Interior face shared by tets a and b; `la`/`lb` are the local face ids
  // (face f of a tet is opposite its vertex f).
  struct InteriorFace {
    std::int32_t a, b;
    std::int8_t la, lb;
    std::array<std::int32_t, 3> v;
  };

  struct BoundaryFace {
    std::int32_t tet;
    std::int8_t local;
    std::array<std::int32_t, 3> v;
  };

  std::vector<Vec3> vertices;
  std::vector<Tet> tets;
  std::vector<InteriorFace> interior_faces;
  std::vector<BoundaryFace> boundary_faces;
  Box domain_box;

  std::uint64_t mesh_id = 0;
  std::uint64_t parent_mesh_id = 0;            // 0: no parent
  std::vector<std::int32_t> parent_tet;        // ancestor in parent mesh
  std::vector<char> parent_refined;            // per parent tet: was it bisected

  int n_tets() const { return static_cast<int>(tets.size()); }
  int n_vertices() const { return static_cast<int>(vertices.size()); }

  const Vec3& point(std::int32_t v) const { return vertices[v]; }
  std::array<Vec3, 4> tet_points(std::int32_t t) const {
    const Tet& T = tets[t];
    return {vertices[T.v[0]], vertices[T.v[1]], vertices[T.v[2]], vertices[T.v[3]]};
  }
  double volume(std::int32_t t) const {
    auto p = tet_points(t);
    return tet_volume(p[0], p[1], p[2], p[3]);
  }
  double diameter(std::int32_t t) const;   // h_tau: longest edge
  double inball_diameter(std::int32_t t) const;  // rho_tau = 2 * inradius

  // Local face f of tet t, as the three vertex ids != v[f].
  std::array<std::int32_t, 3> face_vertices(std::int32_t t, int f) const;

  /// Unit normal of local face f pointing out of tet t.
  Vec3 outward_normal(std::int32_t t, int f) const;
};

struct ElementPatch {
  std::int32_t center;
  std::vector<std::int32_t> neighbors;  // tets sharing an edge with center (includes it)
};

/// Kuhn triangulation of an axis-aligned box, n subdivisions per axis:
/// 6 n^3 tets, (n+1)^3 vertices, every tet tagged for bisection.
TetMesh build_box_mesh(const Box& box, int n);

/// Bisect every marked tet at least once and close the mesh back to
/// conformity. The result is nested: each new tet lies in exactly one
/// parent tet.
TetMesh refine(const TetMesh& mesh, const std::vector<std::int32_t>& marked);

/// max over tets of h_tau / rho_tau
double shape_regularity(const TetMesh& mesh);

ElementPatch patch(const TetMesh& mesh, std::int32_t tau);

/// Face-pairing audit: every face is shared by exactly two tets or lies on
/// the boundary box, volumes are positive and sum to the box volume.
/// Throws ContractViolation with a description on the first defect.
void check_conformity(const TetMesh& mesh);

/// The refined set R = T_old \ (T_old intersect T_new) of the step that
/// produced `mesh` (indices into the parent mesh).
std::vector<std::int32_t> refined_set(const TetMesh& mesh);

/// Rebuild the face adjacency of a hand-assembled mesh (vertices and tets
/// filled in, faces empty). Throws when a face has more than two owners.
void rebuild_adjacency(TetMesh& mesh);

}  // namespace ksafem
