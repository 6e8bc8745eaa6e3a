// SPDX-License-Identifier: Apache-2.0

#include "ksafem/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <unordered_map>

#include "ksafem/error.hpp"

namespace ksafem {

namespace {

std::atomic<std::uint64_t> next_mesh_id{1};

inline std::uint64_t edge_key(std::int32_t a, std::int32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

struct FaceKey {
  std::array<std::int32_t, 3> v;
  bool operator==(const FaceKey& o) const { return v == o.v; }
};

struct FaceKeyHash {
  std::size_t operator()(const FaceKey& k) const {
    std::uint64_t h = 1469598103934665603ull;
    for (std::int32_t x : k.v) {
      h ^= static_cast<std::uint64_t>(x) + 0x9e3779b97f4a7c15ull;
      h *= 1099511628211ull;
    }
    return static_cast<std::size_t>(h);
  }
};

FaceKey sorted_face(std::int32_t a, std::int32_t b, std::int32_t c) {
  std::array<std::int32_t, 3> f = {a, b, c};
  std::sort(f.begin(), f.end());
  return {f};
}

void build_adjacency(TetMesh& m) {
  m.interior_faces.clear();
  m.boundary_faces.clear();
  struct Slot {
    std::int32_t tet = -1;
    std::int8_t local = -1;
  };
  std::unordered_map<FaceKey, std::pair<Slot, Slot>, FaceKeyHash> table;
  table.reserve(m.tets.size() * 2);
  for (std::int32_t t = 0; t < m.n_tets(); ++t) {
    for (int f = 0; f < 4; ++f) {
      auto fv = m.face_vertices(t, f);
      FaceKey key = sorted_face(fv[0], fv[1], fv[2]);
      auto& entry = table[key];
      if (entry.first.tet < 0) {
        entry.first = {t, static_cast<std::int8_t>(f)};
      } else if (entry.second.tet < 0) {
        entry.second = {t, static_cast<std::int8_t>(f)};
      } else {
        throw ContractViolation("mesh face shared by more than two tets");
      }
    }
  }
  for (std::int32_t t = 0; t < m.n_tets(); ++t) {
    for (int f = 0; f < 4; ++f) {
      auto fv = m.face_vertices(t, f);
      FaceKey key = sorted_face(fv[0], fv[1], fv[2]);
      const auto& entry = table.at(key);
      if (entry.second.tet < 0) {
        m.boundary_faces.push_back({t, static_cast<std::int8_t>(f), key.v});
      } else if (entry.first.tet == t && entry.first.local == f) {
        // register the interior face once, from its first slot
        m.interior_faces.push_back({entry.first.tet, entry.second.tet,
                                    entry.first.local, entry.second.local, key.v});
      }
    }
  }
}

}  // namespace

double TetMesh::diameter(std::int32_t t) const {
  auto p = tet_points(t);
  double h = 0.0;
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) h = std::max(h, norm(p[i] - p[j]));
  return h;
}

double TetMesh::inball_diameter(std::int32_t t) const {
  auto p = tet_points(t);
  const double V = tet_volume(p[0], p[1], p[2], p[3]);
  double area = 0.0;
  area += triangle_area(p[1], p[2], p[3]);
  area += triangle_area(p[0], p[2], p[3]);
  area += triangle_area(p[0], p[1], p[3]);
  area += triangle_area(p[0], p[1], p[2]);
  return 6.0 * V / area;  // 2 * (3V / A)
}

std::array<std::int32_t, 3> TetMesh::face_vertices(std::int32_t t, int f) const {
  const Tet& T = tets[t];
  std::array<std::int32_t, 3> out;
  int k = 0;
  for (int i = 0; i < 4; ++i)
    if (i != f) out[k++] = T.v[i];
  return out;
}

Vec3 TetMesh::outward_normal(std::int32_t t, int f) const {
  auto fv = face_vertices(t, f);
  const Vec3& a = vertices[fv[0]];
  const Vec3& b = vertices[fv[1]];
  const Vec3& c = vertices[fv[2]];
  Vec3 n = cross(b - a, c - a);
  n = n * (1.0 / norm(n));
  const Vec3 opposite = vertices[tets[t].v[f]];
  if (dot(n, opposite - a) > 0.0) n = n * (-1.0);
  return n;
}

TetMesh build_box_mesh(const Box& box, int n) {
  if (!box.nondegenerate()) throw InvalidInput("build_box_mesh: degenerate box");
  if (n < 1) throw InvalidInput("build_box_mesh: need n >= 1");

  TetMesh m;
  m.domain_box = box;
  m.mesh_id = next_mesh_id.fetch_add(1);

  const int nv = n + 1;
  auto vid = [&](int i, int j, int k) { return (i * nv + j) * nv + k; };
  m.vertices.resize(static_cast<std::size_t>(nv) * nv * nv);
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j < nv; ++j)
      for (int k = 0; k < nv; ++k)
        m.vertices[vid(i, j, k)] = {box.lo.x + box.extent(0) * i / n,
                                    box.lo.y + box.extent(1) * j / n,
                                    box.lo.z + box.extent(2) * k / n};

  // Kuhn split of each cell: one tet per permutation of the axes, walking
  // from the low corner to the high corner. All six share the cell diagonal,
  // which is every tet's initial refinement edge (tag 3).
  static const int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  m.tets.reserve(static_cast<std::size_t>(6) * n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        for (const auto& p : perms) {
          int c[3] = {i, j, k};
          TetMesh::Tet T;
          T.v[0] = vid(c[0], c[1], c[2]);
          for (int step = 0; step < 3; ++step) {
            c[p[step]] += 1;
            T.v[step + 1] = vid(c[0], c[1], c[2]);
          }
          T.tag = 3;
          T.gen = 0;
          m.tets.push_back(T);
        }

  build_adjacency(m);
  return m;
}

namespace {

// Working state of one refine() call.
struct Refiner {
  const TetMesh& base;
  std::vector<Vec3> vertices;
  struct WTet {
    std::array<std::int32_t, 4> v;
    std::int8_t tag;
    std::int32_t gen;
    std::int32_t root;  // index into base.tets
    bool alive = true;
    bool in_progress = false;
  };
  std::vector<WTet> tets;
  std::unordered_map<std::uint64_t, std::int32_t> edge_midpoint;
  std::unordered_map<std::uint64_t, std::vector<std::int32_t>> edge_tets;
  long bisections = 0;
  long budget = 0;

  explicit Refiner(const TetMesh& b) : base(b), vertices(b.vertices) {
    tets.reserve(b.tets.size() * 2);
    for (std::int32_t t = 0; t < b.n_tets(); ++t) {
      tets.push_back({b.tets[t].v, b.tets[t].tag, b.tets[t].gen, t});
      register_edges(t);
    }
    budget = 256l * b.n_tets() + 4096;
  }

  void register_edges(std::int32_t t) {
    const auto& v = tets[t].v;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        edge_tets[edge_key(v[i], v[j])].push_back(t);
  }

  std::uint64_t refinement_edge(std::int32_t t) const {
    return edge_key(tets[t].v[0], tets[t].v[tets[t].tag]);
  }

  std::int32_t midpoint_vertex(std::int32_t a, std::int32_t b) {
    const std::uint64_t key = edge_key(a, b);
    auto it = edge_midpoint.find(key);
    if (it != edge_midpoint.end()) return it->second;
    const std::int32_t id = static_cast<std::int32_t>(vertices.size());
    vertices.push_back(midpoint(vertices[a], vertices[b]));
    edge_midpoint.emplace(key, id);
    return id;
  }

  // Maubach bisection of tet t at its refinement edge (v0, v_d).
  void bisect(std::int32_t t) {
    WTet& T = tets[t];
    const int d = T.tag;
    const std::int32_t z = midpoint_vertex(T.v[0], T.v[d]);
    const std::int8_t child_tag = static_cast<std::int8_t>(d > 1 ? d - 1 : 3);

    WTet c1, c2;
    c1.v = T.v;
    c1.v[d] = z;
    for (int i = 0; i < d; ++i) c2.v[i] = T.v[i + 1];
    c2.v[d] = z;
    for (int i = d + 1; i < 4; ++i) c2.v[i] = T.v[i];
    c1.tag = c2.tag = child_tag;
    c1.gen = c2.gen = T.gen + 1;
    c1.root = c2.root = T.root;

    T.alive = false;
    const std::int32_t i1 = static_cast<std::int32_t>(tets.size());
    tets.push_back(c1);
    register_edges(i1);
    const std::int32_t i2 = static_cast<std::int32_t>(tets.size());
    tets.push_back(c2);
    register_edges(i2);
    if (++bisections > budget)
      throw NumericalFailure("refine: conformity closure exceeded its budget "
                             "(incompatible edge tagging)");
  }

  // All alive tets sharing edge `key`.
  std::vector<std::int32_t> alive_on_edge(std::uint64_t key) {
    auto it = edge_tets.find(key);
    std::vector<std::int32_t> out;
    if (it == edge_tets.end()) return out;
    auto& vec = it->second;
    vec.erase(std::remove_if(vec.begin(), vec.end(),
                             [&](std::int32_t t) { return !tets[t].alive; }),
              vec.end());
    out = vec;
    return out;
  }

  // Kossaczky-style recursion: make every tet around the refinement edge of
  // t compatible, then split them all at once.
  void ensure_bisected(std::int32_t t) {
    if (!tets[t].alive) return;
    if (tets[t].in_progress)
      throw NumericalFailure("refine: cyclic closure (incompatible tagging)");
    tets[t].in_progress = true;
    for (;;) {
      if (!tets[t].alive) break;
      const std::uint64_t e = refinement_edge(t);
      std::vector<std::int32_t> ring = alive_on_edge(e);
      std::int32_t pending = -1;
      for (std::int32_t s : ring)
        if (refinement_edge(s) != e) {
          pending = s;
          break;
        }
      if (pending >= 0) {
        ensure_bisected(pending);
        continue;
      }
      for (std::int32_t s : ring) bisect(s);
      break;
    }
    // tets[t] is dead now; nothing to reset on it.
  }

  // A tet is nonconforming if some edge already has a midpoint vertex.
  bool has_split_edge(std::int32_t t) const {
    const auto& v = tets[t].v;
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        if (edge_midpoint.count(edge_key(v[i], v[j]))) return true;
    return false;
  }
};

}  // namespace

TetMesh refine(const TetMesh& mesh, const std::vector<std::int32_t>& marked) {
  for (std::int32_t t : marked)
    if (t < 0 || t >= mesh.n_tets())
      throw InvalidInput("refine: marked tet index out of range");

  if (marked.empty()) {
    TetMesh out = mesh;
    out.mesh_id = next_mesh_id.fetch_add(1);
    out.parent_mesh_id = mesh.mesh_id;
    out.parent_tet.resize(out.tets.size());
    for (std::int32_t t = 0; t < out.n_tets(); ++t) out.parent_tet[t] = t;
    out.parent_refined.assign(mesh.tets.size(), 0);
    return out;
  }

  Refiner r(mesh);
  for (std::int32_t t : marked) r.ensure_bisected(t);

  // Closure: bisect any tet that saw one of its edges split elsewhere,
  // until the mesh is conforming again.
  for (;;) {
    bool changed = false;
    for (std::int32_t t = 0; t < static_cast<std::int32_t>(r.tets.size()); ++t) {
      if (!r.tets[t].alive) continue;
      if (r.has_split_edge(t)) {
        r.ensure_bisected(t);
        changed = true;
      }
    }
    if (!changed) break;
  }

  TetMesh out;
  out.domain_box = mesh.domain_box;
  out.mesh_id = next_mesh_id.fetch_add(1);
  out.parent_mesh_id = mesh.mesh_id;
  out.vertices = std::move(r.vertices);
  out.parent_refined.assign(mesh.tets.size(), 0);
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t)
    out.parent_refined[t] = r.tets[t].alive ? 0 : 1;
  for (const auto& w : r.tets) {
    if (!w.alive) continue;
    out.tets.push_back({w.v, w.tag, w.gen});
    out.parent_tet.push_back(w.root);
  }
  build_adjacency(out);
  return out;
}

double shape_regularity(const TetMesh& mesh) {
  double worst = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t)
    worst = std::max(worst, mesh.diameter(t) / mesh.inball_diameter(t));
  return worst;
}

ElementPatch patch(const TetMesh& mesh, std::int32_t tau) {
  if (tau < 0 || tau >= mesh.n_tets()) throw InvalidInput("patch: bad tet index");
  // Tets sharing an edge with tau = tets sharing at least two vertices,
  // since every vertex pair of a tet is one of its edges.
  std::unordered_map<std::int32_t, int> shared;
  std::unordered_map<std::int32_t, std::vector<std::int32_t>> vertex_tets;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t)
    for (int i = 0; i < 4; ++i) vertex_tets[mesh.tets[t].v[i]].push_back(t);
  for (int i = 0; i < 4; ++i)
    for (std::int32_t t : vertex_tets[mesh.tets[tau].v[i]]) shared[t] += 1;
  ElementPatch p;
  p.center = tau;
  for (const auto& [t, count] : shared)
    if (count >= 2) p.neighbors.push_back(t);
  std::sort(p.neighbors.begin(), p.neighbors.end());
  return p;
}

void check_conformity(const TetMesh& mesh) {
  double vol = 0.0;
  for (std::int32_t t = 0; t < mesh.n_tets(); ++t) {
    const double V = mesh.volume(t);
    if (!(V > 0.0)) throw ContractViolation("tet with nonpositive volume");
    vol += V;
    for (int i = 0; i < 4; ++i) {
      const std::int32_t v = mesh.tets[t].v[i];
      if (v < 0 || v >= mesh.n_vertices())
        throw ContractViolation("tet vertex index out of range");
    }
  }
  const double box_vol = mesh.domain_box.volume();
  if (std::abs(vol - box_vol) > 1e-10 * box_vol)
    throw ContractViolation("tet volumes do not tile the domain box");

  // Face pairing. build_adjacency already throws on 3+ sharers; what is
  // left is to confirm that every unpaired face really lies on the box.
  const std::size_t paired = 2 * mesh.interior_faces.size() + mesh.boundary_faces.size();
  if (paired != static_cast<std::size_t>(4) * mesh.n_tets())
    throw ContractViolation("face pairing does not cover all tet faces");
  const Box& B = mesh.domain_box;
  for (const auto& bf : mesh.boundary_faces) {
    bool on_plane = false;
    for (int a = 0; a < 3 && !on_plane; ++a) {
      for (double plane : {B.lo[a], B.hi[a]}) {
        bool all = true;
        for (std::int32_t v : bf.v)
          all = all && std::abs(mesh.point(v)[a] - plane) <= 1e-12 * (1.0 + std::abs(plane));
        if (all) {
          on_plane = true;
          break;
        }
      }
    }
    if (!on_plane)
      throw ContractViolation("unpaired interior face (hanging node)");
  }
}

void rebuild_adjacency(TetMesh& mesh) { build_adjacency(mesh); }

std::vector<std::int32_t> refined_set(const TetMesh& mesh) {
  std::vector<std::int32_t> out;
  for (std::int32_t t = 0; t < static_cast<std::int32_t>(mesh.parent_refined.size()); ++t)
    if (mesh.parent_refined[t]) out.push_back(t);
  return out;
}

}  // namespace ksafem
