#include "mrccs/checkpoint.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <vector>

#include "mrccs/errors.hpp"

namespace mrccs {
namespace {

constexpr uint32_t kFormatVersion = 1;
constexpr char kCheckpointMagic[4] = {'M', 'R', 'C', 'C'};
constexpr char kMeasurementsMagic[4] = {'M', 'R', 'M', 'S'};

class ByteSink {
 public:
  void u32(uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    bytes_.insert(bytes_.end(), b, b + 4);
  }
  void f32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    u32(bits);
  }
  void raw(const void* p, size_t n) {
    const unsigned char* c = static_cast<const unsigned char*>(p);
    bytes_.insert(bytes_.end(), c, c + n);
  }
  const std::vector<unsigned char>& bytes() const { return bytes_; }

 private:
  std::vector<unsigned char> bytes_;
};

class ByteSource {
 public:
  ByteSource(const unsigned char* p, size_t n, std::string path)
      : p_(p), n_(n), path_(std::move(path)) {}

  uint32_t u32() {
    need(4);
    uint32_t v = static_cast<uint32_t>(p_[pos_]) |
                 (static_cast<uint32_t>(p_[pos_ + 1]) << 8) |
                 (static_cast<uint32_t>(p_[pos_ + 2]) << 16) |
                 (static_cast<uint32_t>(p_[pos_ + 3]) << 24);
    pos_ += 4;
    return v;
  }
  float f32() {
    uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string str(size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(p_ + pos_), n);
    pos_ += n;
    return s;
  }
  size_t pos() const { return pos_; }
  size_t remaining() const { return n_ - pos_; }

 private:
  void need(size_t n) {
    if (pos_ + n > n_)
      throw DataError("truncated container: " + path_);
  }
  const unsigned char* p_;
  size_t n_;
  size_t pos_ = 0;
  std::string path_;
};

void save_container(const std::string& path, const char magic[4],
                    const KvMap& config, const ParamStore& store) {
  ByteSink body;
  body.u32(kFormatVersion);
  std::string blob = serialize_kv(config);
  body.u32(static_cast<uint32_t>(blob.size()));
  body.raw(blob.data(), blob.size());
  body.u32(static_cast<uint32_t>(store.size()));
  for (const auto& e : store) {
    body.u32(static_cast<uint32_t>(e.name.size()));
    body.raw(e.name.data(), e.name.size());
    body.u32(static_cast<uint32_t>(e.shape.size()));
    for (int d : e.shape) body.u32(static_cast<uint32_t>(d));
    for (float v : e.value) body.f32(v);
  }
  uint32_t crc = crc32_ieee(body.bytes().data(), body.bytes().size());

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write container: " + path);
  out.write(magic, 4);
  out.write(reinterpret_cast<const char*>(body.bytes().data()),
            static_cast<std::streamsize>(body.bytes().size()));
  unsigned char tail[4] = {static_cast<unsigned char>(crc & 0xff),
                           static_cast<unsigned char>((crc >> 8) & 0xff),
                           static_cast<unsigned char>((crc >> 16) & 0xff),
                           static_cast<unsigned char>((crc >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(tail), 4);
  out.flush();
  if (!out) throw DataError("cannot write container: " + path);
}

ParamContainer load_container(const std::string& path, const char magic[4]) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open container: " + path);
  std::vector<unsigned char> all{std::istreambuf_iterator<char>(in),
                                 std::istreambuf_iterator<char>()};
  if (all.size() < 12) throw DataError("truncated container: " + path);
  if (std::memcmp(all.data(), magic, 4) != 0)
    throw DataError("bad magic in " + path + " (expected " +
                    std::string(magic, 4) + ")");
  const size_t body_len = all.size() - 8;
  uint32_t stored = static_cast<uint32_t>(all[all.size() - 4]) |
                    (static_cast<uint32_t>(all[all.size() - 3]) << 8) |
                    (static_cast<uint32_t>(all[all.size() - 2]) << 16) |
                    (static_cast<uint32_t>(all[all.size() - 1]) << 24);
  uint32_t actual = crc32_ieee(all.data() + 4, body_len);
  if (stored != actual)
    throw DataError("checksum mismatch in " + path + " (file is corrupt)");

  ByteSource src(all.data() + 4, body_len, path);
  uint32_t version = src.u32();
  if (version != kFormatVersion)
    throw DataError("unsupported container version " + std::to_string(version) +
                    " in " + path);
  uint32_t blob_len = src.u32();
  ParamContainer out;
  out.config = parse_kv_text(src.str(blob_len));
  uint32_t count = src.u32();
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t name_len = src.u32();
    std::string name = src.str(name_len);
    uint32_t rank = src.u32();
    if (rank == 0 || rank > 8)
      throw DataError("bad array rank in " + path);
    std::vector<int> shape(rank);
    long total = 1;
    for (uint32_t r = 0; r < rank; ++r) {
      shape[r] = static_cast<int>(src.u32());
      total *= shape[r];
    }
    if (total < 1 || total > (1L << 28))
      throw DataError("bad array size in " + path);
    auto& e = out.params.add(name, shape);
    for (float& v : e.value) v = src.f32();
  }
  if (src.remaining() != 0)
    throw DataError("trailing bytes in " + path);
  return out;
}

}  // namespace

uint32_t crc32_ieee(const unsigned char* data, size_t n, uint32_t seed) {
  static const auto table = [] {
    std::array<uint32_t, 256> t{};
    for (uint32_t i = 0; i < 256; ++i) {
      uint32_t c = i;
      for (int k = 0; k < 8; ++k)
        c = (c & 1) ? 0xEDB88320u ^ (c >> 1) : (c >> 1);
      t[i] = c;
    }
    return t;
  }();
  uint32_t c = seed ^ 0xFFFFFFFFu;
  for (size_t i = 0; i < n; ++i)
    c = table[(c ^ data[i]) & 0xFF] ^ (c >> 8);
  return c ^ 0xFFFFFFFFu;
}

void save_checkpoint(const std::string& path, const KvMap& config,
                     const ParamStore& store) {
  save_container(path, kCheckpointMagic, config, store);
}

ParamContainer load_checkpoint(const std::string& path) {
  return load_container(path, kCheckpointMagic);
}

void save_measurements(const std::string& path, const Measurements& m,
                       long source_height, long source_width) {
  KvMap config;
  config["variant"] = variant_name(m.plan.variant);
  config["scale_steps"] = std::to_string(m.plan.k);
  config["measurements_per_block"] = std::to_string(m.plan.m);
  config["feature_width"] = std::to_string(m.plan.feature_width);
  config["source_height"] = std::to_string(source_height);
  config["source_width"] = std::to_string(source_width);
  ParamStore store;
  auto& e = store.add("measurements",
                      {static_cast<int>(m.tensor.channels),
                       static_cast<int>(m.tensor.height),
                       static_cast<int>(m.tensor.width)});
  e.value = m.tensor.data;
  save_container(path, kMeasurementsMagic, config, store);
}

MeasurementsFile load_measurements(const std::string& path) {
  ParamContainer raw = load_container(path, kMeasurementsMagic);
  KvReader cfg(raw.config);
  MeasurementsFile out;
  out.config = raw.config;
  out.measurements.plan.variant = variant_from_name(cfg.get_string("variant"));
  out.measurements.plan.k = static_cast<int>(cfg.require_int("scale_steps"));
  out.measurements.plan.m =
      static_cast<int>(cfg.require_int("measurements_per_block"));
  out.measurements.plan.feature_width =
      static_cast<int>(cfg.require_int("feature_width"));
  out.source_height = cfg.require_int("source_height");
  out.source_width = cfg.require_int("source_width");
  cfg.finish();
  out.measurements.plan.validate();
  if (!raw.params.contains("measurements"))
    throw DataError("no measurements array in " + path);
  const auto& e = raw.params.at("measurements");
  if (e.shape.size() != 3)
    throw DataError("measurements array in " + path + " is not rank 3");
  Tensor3 t(e.shape[0], e.shape[1], e.shape[2]);
  t.data = e.value;
  out.measurements.tensor = std::move(t);
  if (out.measurements.tensor.channels != out.measurements.plan.m)
    throw DataError("measurements channel count disagrees with plan in " +
                    path);
  return out;
}

}  // namespace mrccs
