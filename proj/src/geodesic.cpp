#include "lpi/geodesic.hpp"

#include "lpi/errors.hpp"
#include "lpi/parallel.hpp"
#include "lpi/spatial_index.hpp"

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <string>

namespace lpi {

std::vector<std::size_t> KnnGraph::component_sizes() const {
  std::vector<std::size_t> sizes;
  std::vector<bool> seen(size(), false);
  std::vector<std::size_t> stack;
  for (std::size_t s = 0; s < size(); ++s) {
    if (seen[s]) continue;
    std::size_t count = 0;
    seen[s] = true;
    stack.push_back(s);
    while (!stack.empty()) {
      const std::size_t u = stack.back();
      stack.pop_back();
      ++count;
      for (const auto& e : adjacency[u]) {
        if (!seen[e.to]) {
          seen[e.to] = true;
          stack.push_back(e.to);
        }
      }
    }
    sizes.push_back(count);
  }
  std::sort(sizes.begin(), sizes.end(), std::greater<>());
  return sizes;
}

KnnGraph build_knn_graph(std::span<const Vec3> points, std::size_t k) {
  if (k < 1) throw InvalidArgument("knn graph needs k >= 1");
  const std::size_t n = points.size();
  KnnGraph graph;
  graph.adjacency.resize(n);
  if (n < 2) return graph;
  const SpatialIndex index(points);
  const std::size_t kk = std::min(k, n - 1);
  for (std::size_t u = 0; u < n; ++u) {
    for (const auto& nb : index.knn(points[u], kk, u)) {
      graph.adjacency[u].push_back({nb.index, nb.distance});
      graph.adjacency[nb.index].push_back({u, nb.distance});
    }
  }
  for (auto& adj : graph.adjacency) {
    std::sort(adj.begin(), adj.end(), [](const auto& a, const auto& b) { return a.to < b.to; });
    adj.erase(std::unique(adj.begin(), adj.end(), [](const auto& a, const auto& b) { return a.to == b.to; }),
              adj.end());
  }
  return graph;
}

std::vector<double> shortest_paths(const KnnGraph& graph, std::size_t source) {
  std::vector<double> dist(graph.size(), std::numeric_limits<double>::infinity());
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  dist[source] = 0.0;
  queue.emplace(0.0, source);
  while (!queue.empty()) {
    const auto [d, u] = queue.top();
    queue.pop();
    if (d > dist[u]) continue;
    for (const auto& e : graph.adjacency[u]) {
      const double nd = d + e.weight;
      if (nd < dist[e.to]) {
        dist[e.to] = nd;
        queue.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

GeodesicTable build_geodesic_table(const PointCloud& cloud, const RegionCenters& centers,
                                   std::size_t knn_k) {
  const KnnGraph graph = build_knn_graph(cloud.points, knn_k);
  const auto sizes = graph.component_sizes();
  if (sizes.size() > 1) {
    std::string msg = "kNN graph (k=" + std::to_string(knn_k) + ") is disconnected; component sizes:";
    for (auto s : sizes) msg += " " + std::to_string(s);
    throw DisconnectedGraph(msg + " (raise knn_k)", sizes);
  }

  GeodesicTable table;
  table.centers = centers.size();
  table.points = cloud.size();
  table.knn_k = knn_k;
  table.dist.resize(table.centers * table.points);
  // Each row is written by exactly one task, so the table is independent of scheduling.
  parallel_for(table.centers, 1, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto row = shortest_paths(graph, centers.source_indices[i]);
      std::copy(row.begin(), row.end(), table.dist.begin() + static_cast<std::ptrdiff_t>(i * table.points));
    }
  });
  return table;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& in) {
  std::uint32_t v = 0;
  if (!in.read(reinterpret_cast<char*>(&v), 4)) throw FormatError("geodesic table: truncated header");
  return v;
}

}  // namespace

void write_geodesic_table(std::ostream& out, const GeodesicTable& table) {
  out.write("LPIG", 4);
  put_u32(out, static_cast<std::uint32_t>(table.centers));
  put_u32(out, static_cast<std::uint32_t>(table.points));
  put_u32(out, static_cast<std::uint32_t>(table.knn_k));
  out.write(reinterpret_cast<const char*>(table.dist.data()),
            static_cast<std::streamsize>(table.dist.size() * sizeof(double)));
}

GeodesicTable read_geodesic_table(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "LPIG", 4) != 0) {
    throw FormatError("geodesic table: bad magic");
  }
  GeodesicTable table;
  table.centers = get_u32(in);
  table.points = get_u32(in);
  table.knn_k = get_u32(in);
  table.dist.resize(table.centers * table.points);
  if (!in.read(reinterpret_cast<char*>(table.dist.data()),
               static_cast<std::streamsize>(table.dist.size() * sizeof(double)))) {
    throw FormatError("geodesic table: truncated data");
  }
  return table;
}

void write_geodesic_table(const std::filesystem::path& path, const GeodesicTable& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  write_geodesic_table(out, table);
}

GeodesicTable read_geodesic_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_geodesic_table(in);
}

}  // namespace lpi
