#include "depthsr/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>

#include "depthsr/error.hpp"

namespace depthsr {

namespace {

constexpr char kMagic[8] = {'D', 'S', 'R', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint8_t kFloat64 = 1;

static_assert(std::numeric_limits<double>::is_iec559, "checkpoint format assumes IEEE-754 doubles");

class Writer {
 public:
  template <typename U>
  void put(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  void put_bytes(const std::string& s) { out_ += s; }
  void put_f64(double d) { put(std::bit_cast<std::uint64_t>(d)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(const std::string& b) : bytes_(b) {}

  template <typename U>
  U get(const char* what) {
    need(sizeof(U), what);
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i)
      v |= static_cast<U>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  std::string get_bytes(std::size_t n, const char* what) {
    need(n, what);
    std::string s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  double get_f64(const char* what) { return std::bit_cast<double>(get<std::uint64_t>(what)); }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n, const char* what) {
    if (remaining() < n) throw CorruptCheckpointError(std::string("checkpoint truncated while reading ") + what);
  }
  const std::string& bytes_;
  std::size_t pos_ = 0;
};

struct Record {
  std::string name;
  std::vector<int> shape;
  std::uint64_t payload_bytes = 0;
};

}  // namespace

std::string encode_checkpoint(const Parameters& p, const NetworkConfig& cfg) {
  Writer w;
  w.put_bytes(std::string(kMagic, sizeof kMagic));
  w.put<std::uint32_t>(kCheckpointVersion);
  const std::string text = cfg.serialize();
  w.put<std::uint32_t>(static_cast<std::uint32_t>(text.size()));
  w.put_bytes(text);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(p.tensors().size()));
  for (const auto& t : p.tensors()) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.name.size()));
    w.put_bytes(t.name);
    w.put<std::uint8_t>(kFloat64);
    w.put<std::uint32_t>(static_cast<std::uint32_t>(t.shape.size()));
    for (int d : t.shape) w.put<std::uint64_t>(static_cast<std::uint64_t>(d));
    w.put<std::uint64_t>(static_cast<std::uint64_t>(t.values.size()) * sizeof(double));
  }
  for (const auto& t : p.tensors())
    for (double v : t.values) w.put_f64(v);
  return w.take();
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  Reader r(bytes);
  if (r.get_bytes(sizeof kMagic, "magic") != std::string(kMagic, sizeof kMagic))
    throw CorruptCheckpointError("not a checkpoint file (bad magic)");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion)
    throw CorruptCheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto cfg_len = r.get<std::uint32_t>("config length");
  const std::string cfg_text = r.get_bytes(cfg_len, "config");
  NetworkConfig cfg;
  try {
    cfg = NetworkConfig::parse(cfg_text);
  } catch (const ValidationError& e) {
    throw CorruptCheckpointError(std::string("checkpoint config invalid: ") + e.what());
  }

  const auto count = r.get<std::uint32_t>("array count");
  std::vector<Record> records;
  for (std::uint32_t i = 0; i < count; ++i) {
    Record rec;
    const auto name_len = r.get<std::uint32_t>("array name length");
    rec.name = r.get_bytes(name_len, "array name");
    const auto dtype = r.get<std::uint8_t>("element type");
    if (dtype != kFloat64)
      throw CorruptCheckpointError("array '" + rec.name + "' has unsupported element type " + std::to_string(dtype));
    const auto ndim = r.get<std::uint32_t>("array rank");
    if (ndim > 8) throw CorruptCheckpointError("array '" + rec.name + "' has implausible rank");
    std::uint64_t elements = 1;
    for (std::uint32_t d = 0; d < ndim; ++d) {
      const auto dim = r.get<std::uint64_t>("array dims");
      if (dim > (1u << 30)) throw CorruptCheckpointError("array '" + rec.name + "' has implausible dimension");
      rec.shape.push_back(static_cast<int>(dim));
      elements *= dim;
    }
    rec.payload_bytes = r.get<std::uint64_t>("payload length");
    if (rec.payload_bytes != elements * sizeof(double))
      throw CorruptCheckpointError("array '" + rec.name + "': header declares " + std::to_string(rec.payload_bytes) +
                                   " payload bytes but its shape needs " + std::to_string(elements * sizeof(double)));
    records.push_back(std::move(rec));
  }

  std::vector<ParamTensor> tensors;
  for (const Record& rec : records) {
    if (r.remaining() < rec.payload_bytes)
      throw CorruptCheckpointError("checkpoint truncated in payload of array '" + rec.name + "'");
    ParamTensor t{rec.name, rec.shape, std::vector<double>(rec.payload_bytes / sizeof(double))};
    for (double& v : t.values) v = r.get_f64("payload");
    tensors.push_back(std::move(t));
  }
  if (r.remaining() != 0)
    throw CorruptCheckpointError(std::to_string(r.remaining()) + " trailing bytes after the last payload");

  const auto layout = parameter_layout(cfg);
  DEPTHSR_REQUIRE(layout.size() == tensors.size(), "checkpoint holds " + std::to_string(tensors.size()) +
                                                       " arrays but its config needs " + std::to_string(layout.size()));
  for (std::size_t i = 0; i < layout.size(); ++i) {
    DEPTHSR_REQUIRE(tensors[i].name == layout[i].first,
                    "checkpoint array '" + tensors[i].name + "' where '" + layout[i].first + "' was expected");
    DEPTHSR_REQUIRE(tensors[i].shape == layout[i].second, "checkpoint array '" + tensors[i].name + "' has wrong shape");
  }
  return Checkpoint{cfg, Parameters(std::move(tensors))};
}

void save_checkpoint(const Parameters& p, const NetworkConfig& cfg, const std::string& path) {
  const std::string bytes = encode_checkpoint(p, cfg);
  const std::string tmp = path + ".partial";
  {
    std::ofstream out(tmp, std::ios::binary);
    DEPTHSR_REQUIRE(out.good(), "cannot write checkpoint " + path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    DEPTHSR_REQUIRE(out.good(), "failed writing checkpoint " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  DEPTHSR_REQUIRE(in.good(), "cannot open checkpoint " + path);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace depthsr
