#include "fracross/snapshot.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>

#include "fracross/errors.hpp"

namespace fracross {

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

template <typename T>
T to_little(T v) {
  if constexpr (std::endian::native == std::endian::big) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    std::memcpy(&v, b, sizeof(T));
  }
  return v;
}

template <typename T>
void put(std::string& out, T v) {
  v = to_little(v);
  char b[sizeof(T)];
  std::memcpy(b, &v, sizeof(T));
  out.append(b, sizeof(T));
}

class Reader {
 public:
  explicit Reader(const std::string& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (bytes_.size() - pos_ < sizeof(T)) throw SnapshotError(std::string("truncated snapshot while reading ") + what);
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return to_little(v);
  }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  const std::string& bytes_;
  std::size_t pos_ = 4;
};

}  // namespace

std::string encode_snapshot(const Snapshot& s) {
  if (s.fields.empty()) throw SnapshotError("snapshot has no fields");
  const PeriodicGrid& g = s.fields.front().grid;
  for (const ScalarField& f : s.fields)
    if (!(f.grid == g)) throw SnapshotError("snapshot fields live on different grids");
  std::string out = "FXD1";
  put<std::uint32_t>(out, kSnapshotVersion);
  put<std::uint32_t>(out, static_cast<std::uint32_t>(g.dim()));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.fields.size()));
  for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.points_per_axis()));
  put<double>(out, g.half_length());
  put<double>(out, s.t);
  out.reserve(out.size() + s.fields.size() * g.size() * sizeof(double));
  for (const ScalarField& f : s.fields)
    for (double v : f.values) put<double>(out, v);
  return out;
}

Snapshot decode_snapshot(const std::string& bytes) {
  if (bytes.size() < 4 || bytes.compare(0, 4, "FXD1") != 0) throw SnapshotError("not an FXD1 snapshot (bad magic)");
  Reader r(bytes);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kSnapshotVersion) throw SnapshotError("unsupported snapshot version " + std::to_string(version));
  const auto d = r.get<std::uint32_t>("dimension");
  const auto n = r.get<std::uint32_t>("species count");
  if (d < 1 || d > 3 || n < 1) throw SnapshotError("snapshot header has invalid dimension or species count");
  std::vector<std::uint32_t> dims(d);
  for (auto& v : dims) v = r.get<std::uint32_t>("grid size");
  for (auto v : dims)
    if (v != dims.front()) throw SnapshotError("snapshot grids must have equal size along every axis");
  const double L = r.get<double>("half length");
  Snapshot s;
  s.t = r.get<double>("time");
  PeriodicGrid g;
  try {
    g = PeriodicGrid(static_cast<int>(d), static_cast<int>(dims.front()), L);
  } catch (const std::exception& e) {
    throw SnapshotError(std::string("snapshot header describes an invalid grid: ") + e.what());
  }
  if (r.remaining() != static_cast<std::size_t>(n) * g.size() * sizeof(double))
    throw SnapshotError("snapshot payload length does not match the header");
  for (std::uint32_t i = 0; i < n; ++i) {
    ScalarField f(g);
    for (double& v : f.values) v = r.get<double>("payload");
    s.fields.push_back(std::move(f));
  }
  return s;
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot) {
  const std::string bytes = encode_snapshot(snapshot);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SnapshotError("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw SnapshotError("failed writing " + path.string());
}

Snapshot read_snapshot(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SnapshotError("cannot open " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_snapshot(bytes);
}

}  // namespace fracross
