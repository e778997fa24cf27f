#pragma once

#include "regge/core.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace regge::mesh {

/// Codimension-1 entity (triangle in 3D, edge in 2D). Vertex indices sorted.
struct Facet {
  std::array<int, 3> v{-1, -1, -1};            // dim entries used
  std::array<int, 2> cells{-1, -1};            // adjacent cells, 1 or 2
  int n_cells = 0;
  bool boundary = false;
};

/// Codimension-2 entity (edge in 3D, vertex in 2D). Vertex indices sorted.
/// For every incident cell we record the two facets of that cell containing
/// the ridge.
struct Ridge {
  std::array<int, 2> v{-1, -1};                // dim-1 entries used
  std::vector<int> cells;                      // incident cells
  std::vector<std::array<int, 2>> cell_facets; // per incident cell: global facet ids
  bool boundary = false;
  int multiplicity() const { return boundary ? 1 : 2; }
};

/// Simplicial triangulation of a box in dimension 2 or 3 with full
/// codimension-0/1/2 incidence. Immutable once connectivity is built.
class SimplicialMesh {
 public:
  int dim = 0;
  std::vector<Vec> vertices;
  std::vector<std::array<int, 4>> cells;       // dim+1 entries used, positively oriented

  std::vector<Facet> facets;                   // lexicographic by sorted vertex tuple
  std::vector<Ridge> ridges;                   // lexicographic by sorted vertex tuple
  std::vector<std::array<int, 4>> cell_facet_ids;  // per cell: facet opposite local vertex i
  std::vector<std::vector<int>> cell_ridge_ids;    // per cell: C(dim+1,dim-1) ridges, sorted
  std::vector<std::vector<int>> vertex_cells;      // incidence used by the perturbation
  std::vector<bool> vertex_on_boundary;

  bool connectivity_built = false;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_cells() const { return static_cast<int>(cells.size()); }
  int n_facets() const { return static_cast<int>(facets.size()); }
  int n_ridges() const { return static_cast<int>(ridges.size()); }

  /// Edge count as used for Regge degree-of-freedom bookkeeping
  /// (ridges in 3D, facets in 2D).
  int n_edges() const { return dim == 3 ? n_ridges() : n_facets(); }

  Vec cell_vertex(int c, int local) const { return vertices[cells[c][local]]; }

  /// Signed volume in the stored vertex order (positive for valid cells).
  double cell_volume(int c) const;
  double max_edge_length() const;
  double min_edge_length() const;

  /// Total |Omega| and boundary measure, Euclidean.
  double total_volume() const;
  double boundary_area() const;
};

/// Structured Kuhn triangulation of (-1,1)^dim: every subcube is split into
/// dim! simplices sharing the main diagonal. Connectivity included.
SimplicialMesh generate_box_mesh(int dim, int level);

struct PerturbConfig {
  // Per-coordinate uniform amplitude = hmax * 2^{-(2*dim+1)/2}. The dim-2
  // exponent is a configuration knob; override to change the factor.
  double amplitude_factor = -1.0;  // <0: use default formula
  int max_retries = 100;
};

/// Moves interior vertices by independent uniform offsets; boundary vertices
/// are untouched. Deterministic in (mesh, seed). Fails if a positive-volume
/// configuration cannot be found within the retry budget.
SimplicialMesh perturb_interior_vertices(const SimplicialMesh& m, std::uint64_t seed,
                                         const PerturbConfig& cfg = {});

/// Derives facets/ridges and incidence from the cell list. Rejects
/// non-manifold facets.
void build_connectivity(SimplicialMesh& m);

void write_mesh(const SimplicialMesh& m, const std::string& path);
SimplicialMesh read_mesh(const std::string& path);
void write_mesh(const SimplicialMesh& m, std::ostream& os);
SimplicialMesh read_mesh(std::istream& is);

}  // namespace regge::mesh
