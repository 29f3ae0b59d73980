#include "lpi/checkpoint.hpp"

#include "lpi/errors.hpp"

#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace lpi {
namespace {

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}

  template <typename T>
  void put(T v) {
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }
  void u32(std::size_t v) { put(static_cast<std::uint32_t>(v)); }
  void f64(double v) { put(v); }
  void tensor(const Tensor& t) {
    u32(static_cast<std::size_t>(t.rows()));
    u32(static_cast<std::size_t>(t.cols()));
    out_.write(reinterpret_cast<const char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }

 private:
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get() {
    T v;
    if (!in_.read(reinterpret_cast<char*>(&v), sizeof(T))) throw FormatError("checkpoint: truncated data");
    return v;
  }
  std::uint32_t u32() { return get<std::uint32_t>(); }
  double f64() { return get<double>(); }
  Tensor tensor() {
    const auto rows = u32();
    const auto cols = u32();
    if (static_cast<std::uint64_t>(rows) * cols > (1ull << 32)) throw FormatError("checkpoint: tensor too large");
    Tensor t(rows, cols);
    if (!in_.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw FormatError("checkpoint: truncated tensor");
    }
    return t;
  }

 private:
  std::istream& in_;
};

}  // namespace

bool operator==(const Checkpoint& a, const Checkpoint& b) {
  return a.net == b.net && a.codes == b.codes && a.unseen_code == b.unseen_code &&
         a.centers.centers == b.centers.centers && a.centers.source_indices == b.centers.source_indices &&
         a.cloud.points == b.cloud.points && a.cloud.segment_labels == b.cloud.segment_labels &&
         a.affinity == b.affinity && a.geodesic_knn == b.geodesic_knn && a.normalization == b.normalization &&
         a.step == b.step;
}

AffinityField make_affinity_field(const Checkpoint& checkpoint) {
  return AffinityField(checkpoint.affinity, checkpoint.centers, checkpoint.cloud, checkpoint.geodesic_knn);
}

void write_checkpoint(std::ostream& out, const Checkpoint& c) {
  Writer w(out);
  out.write("LPIC", 4);
  w.u32(kCheckpointVersion);

  const NetConfig& nc = c.net.config();
  w.u32(c.net.latent_dim());
  w.u32(nc.hidden_layers);
  w.u32(nc.hidden_width);
  w.u32(nc.skip_layers.size());
  for (auto s : nc.skip_layers) w.u32(s);
  w.f64(nc.softplus_beta);
  w.f64(nc.init_radius);
  w.u32(c.net.layer_count());
  for (std::size_t l = 0; l < c.net.layer_count(); ++l) {
    w.tensor(c.net.weights()[l]);
    w.tensor(c.net.biases()[l]);
  }

  w.tensor(c.codes);
  w.tensor(c.unseen_code);

  w.u32(c.centers.size());
  for (std::size_t i = 0; i < c.centers.size(); ++i) {
    w.put<std::uint64_t>(c.centers.source_indices[i]);
    for (int k = 0; k < 3; ++k) w.f64(c.centers.centers[i][k]);
  }

  w.u32(static_cast<std::size_t>(c.affinity.mode));
  w.f64(c.affinity.sigma);
  w.f64(c.affinity.semantic_own_weight);
  w.u32(c.geodesic_knn);

  w.u32(c.cloud.size());
  w.put<std::uint8_t>(c.cloud.has_labels() ? 1 : 0);
  for (const auto& p : c.cloud.points)
    for (int k = 0; k < 3; ++k) w.f64(p[k]);
  for (int label : c.cloud.segment_labels) w.put<std::int32_t>(label);

  w.f64(c.normalization.scale);
  for (int k = 0; k < 3; ++k) w.f64(c.normalization.offset[k]);
  w.put<std::uint64_t>(c.step);
  if (!out) throw IoError("checkpoint: write failed");
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "LPIC", 4) != 0) throw FormatError("checkpoint: bad magic");
  Reader r(in);
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));
  }

  Checkpoint c;
  NetConfig nc;
  const std::size_t latent_dim = r.u32();
  nc.hidden_layers = r.u32();
  nc.hidden_width = r.u32();
  const auto skips = r.u32();
  if (skips > 1024) throw FormatError("checkpoint: implausible skip count");
  nc.skip_layers.clear();
  for (std::uint32_t i = 0; i < skips; ++i) nc.skip_layers.push_back(r.u32());
  nc.softplus_beta = r.f64();
  nc.init_radius = r.f64();
  const auto layers = r.u32();
  if (layers > 4096) throw FormatError("checkpoint: implausible layer count");
  std::vector<Tensor> weights, biases;
  for (std::uint32_t l = 0; l < layers; ++l) {
    weights.push_back(r.tensor());
    biases.push_back(r.tensor());
  }
  c.net = ImplicitNet::from_parts(nc, latent_dim, std::move(weights), std::move(biases));

  c.codes = r.tensor();
  c.unseen_code = r.tensor();
  if (c.codes.cols() != static_cast<Eigen::Index>(latent_dim) || c.unseen_code.rows() != 1 ||
      c.unseen_code.cols() != static_cast<Eigen::Index>(latent_dim)) {
    throw FormatError("checkpoint: code shape does not match the network");
  }

  const auto centers = r.u32();
  if (centers != c.codes.rows()) throw FormatError("checkpoint: center count does not match code count");
  for (std::uint32_t i = 0; i < centers; ++i) {
    c.centers.source_indices.push_back(r.get<std::uint64_t>());
    Vec3 p;
    for (int k = 0; k < 3; ++k) p[k] = r.f64();
    c.centers.centers.push_back(p);
  }

  const auto mode = r.u32();
  if (mode > static_cast<std::uint32_t>(AffinityMode::Nearest)) throw FormatError("checkpoint: bad affinity mode");
  c.affinity.mode = static_cast<AffinityMode>(mode);
  c.affinity.sigma = r.f64();
  c.affinity.semantic_own_weight = r.f64();
  c.geodesic_knn = r.u32();

  const auto n = r.u32();
  const bool labeled = r.get<std::uint8_t>() != 0;
  c.cloud.points.resize(n);
  for (auto& p : c.cloud.points)
    for (int k = 0; k < 3; ++k) p[k] = r.f64();
  if (labeled) {
    c.cloud.segment_labels.resize(n);
    for (auto& label : c.cloud.segment_labels) label = r.get<std::int32_t>();
  }
  for (std::size_t i = 0; i < c.centers.size(); ++i) {
    if (c.centers.source_indices[i] >= n) throw FormatError("checkpoint: center source index out of range");
  }

  c.normalization.scale = r.f64();
  for (int k = 0; k < 3; ++k) c.normalization.offset[k] = r.f64();
  c.step = r.get<std::uint64_t>();
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    write_checkpoint(out, checkpoint);
    out.close();
    if (!out) throw IoError("cannot write " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return read_checkpoint(in);
}

std::string checkpoint_id(const Checkpoint& checkpoint) {
  std::ostringstream buffer;
  write_checkpoint(buffer, checkpoint);
  const std::string bytes = buffer.str();
  std::uint64_t hash = 1469598103934665603ull;  // FNV-1a
  for (unsigned char ch : bytes) {
    hash ^= ch;
    hash *= 1099511628211ull;
  }
  std::ostringstream id;
  id << std::hex << std::setw(16) << std::setfill('0') << hash;
  return id.str();
}

}  // namespace lpi
