#pragma once

#include "lpi/affinity.hpp"
#include "lpi/geom.hpp"
#include "lpi/implicit_net.hpp"
#include "lpi/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace lpi {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Complete state of a trained (or freshly initialized) partition model.
struct Checkpoint {
  ImplicitNet net;
  Tensor codes;        // I x T surface codes
  Tensor unseen_code;  // 1 x T, never optimized; fills space outside a part during part extraction
  RegionCenters centers;
  PointCloud cloud;  // normalized input samples (needed by intrinsic and semantic affinities)
  AffinityConfig affinity;
  std::size_t geodesic_knn = 10;
  Normalization normalization;
  std::uint64_t step = 0;

  std::size_t region_count() const { return static_cast<std::size_t>(codes.rows()); }
  std::size_t latent_dim() const { return static_cast<std::size_t>(codes.cols()); }
};

bool operator==(const Checkpoint& a, const Checkpoint& b);

/// Affinity field matching the checkpoint's configuration (builds the geodesic table when needed).
AffinityField make_affinity_field(const Checkpoint& checkpoint);

/// Little-endian binary: "LPIC", u32 version, network shape and parameters,
/// surface codes, unseen code, region centers, affinity configuration,
/// normalized cloud, normalization, step count.
void write_checkpoint(std::ostream& out, const Checkpoint& checkpoint);
Checkpoint read_checkpoint(std::istream& in);

/// Writes to a sibling temporary file and renames it into place.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

/// Short stable identifier derived from the serialized bytes.
std::string checkpoint_id(const Checkpoint& checkpoint);

}  // namespace lpi
