#pragma once

#include "lpi/geom.hpp"

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace lpi {

/// Weighted undirected graph stored as sorted adjacency lists.
struct KnnGraph {
  struct Edge {
    std::size_t to;
    double weight;
  };
  std::vector<std::vector<Edge>> adjacency;

  std::size_t size() const { return adjacency.size(); }
  /// Sizes of the connected components, largest first.
  std::vector<std::size_t> component_sizes() const;
};

/// Symmetrized kNN graph: u-v is an edge when either endpoint is among the
/// other's k nearest neighbors. Edge weights are Euclidean lengths.
KnnGraph build_knn_graph(std::span<const Vec3> points, std::size_t k);

/// Single-source shortest path lengths (Dijkstra). Unreachable nodes are +inf.
std::vector<double> shortest_paths(const KnnGraph& graph, std::size_t source);

/// Graph-geodesic distances from every region center to every surface point.
struct GeodesicTable {
  std::size_t centers = 0;
  std::size_t points = 0;
  std::size_t knn_k = 0;
  std::vector<double> dist;  // centers x points, row-major

  double at(std::size_t center, std::size_t point) const { return dist[center * points + point]; }
  const double* row(std::size_t center) const { return dist.data() + center * points; }

  bool operator==(const GeodesicTable&) const = default;
};

/// One Dijkstra per center over the symmetrized kNN graph. Throws
/// DisconnectedGraph (carrying component sizes) when the graph is not connected.
GeodesicTable build_geodesic_table(const PointCloud& cloud, const RegionCenters& centers,
                                   std::size_t knn_k);

/// "LPIG" | u32 I | u32 N | u32 knn_k | I*N float64, all little-endian.
void write_geodesic_table(std::ostream& out, const GeodesicTable& table);
GeodesicTable read_geodesic_table(std::istream& in);
void write_geodesic_table(const std::filesystem::path& path, const GeodesicTable& table);
GeodesicTable read_geodesic_table(const std::filesystem::path& path);

}  // namespace lpi
