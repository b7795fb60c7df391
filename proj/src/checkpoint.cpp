#include "explorium/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

#include "explorium/error.hpp"

namespace explorium {
namespace {

static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t le(int n, const std::string& what) {
    need(static_cast<std::size_t>(n), what);
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }

  std::string text(std::size_t n, const std::string& what) {
    need(n, what);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  void need(std::size_t n, const std::string& what) const {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated record: " + what);
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_checkpoint(const std::vector<NamedTensor>& records) {
  std::vector<std::uint8_t> out(std::begin(kCheckpointMagic), std::end(kCheckpointMagic));
  out.push_back(kCheckpointVersion);
  for (const auto& r : records) {
    if (r.name.size() > 0xFFFF) throw FormatError("record name too long: " + r.name.substr(0, 32));
    if (r.tensor.rank() > 0xFF) throw FormatError("record rank too large: " + r.name);
    put_le(out, r.name.size(), 2);
    out.insert(out.end(), r.name.begin(), r.name.end());
    out.push_back(static_cast<std::uint8_t>(r.tensor.rank()));
    for (auto d : r.tensor.shape()) {
      if (d > 0xFFFFFFFFu) throw FormatError("record dimension too large: " + r.name);
      put_le(out, d, 4);
    }
    for (float v : r.tensor.values()) put_le(out, std::bit_cast<std::uint32_t>(v), 4);
  }
  return out;
}

std::vector<NamedTensor> decode_checkpoint(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kCheckpointMagic, 4) != 0) throw FormatError("bad magic");
  if (bytes.size() < 5) throw FormatError("truncated record: version byte");
  if (bytes[4] != kCheckpointVersion) {
    throw FormatError("unsupported version " + std::to_string(static_cast<int>(bytes[4])));
  }
  std::vector<std::uint8_t> body(bytes.begin() + 5, bytes.end());
  Reader in(body);
  std::vector<NamedTensor> records;
  while (!in.done()) {
    const auto name_len = static_cast<std::size_t>(in.le(2, "name length"));
    std::string name = in.text(name_len, "name");
    const auto rank = static_cast<std::size_t>(in.le(1, name + " rank"));
    if (rank == 0) throw FormatError("record " + name + " has rank 0");
    Shape shape(rank);
    for (auto& d : shape) {
      d = static_cast<std::size_t>(in.le(4, name + " dims"));
      if (d == 0) throw FormatError("record " + name + " has a zero dimension");
    }
    const std::size_t n = shape_size(shape);
    in.need(n * 4, name + " values");
    std::vector<float> values(n);
    for (auto& v : values) v = std::bit_cast<float>(static_cast<std::uint32_t>(in.le(4, name)));
    records.push_back({std::move(name), Tensor<float>(std::move(shape), std::move(values))});
  }
  return records;
}

void save_checkpoint(const std::filesystem::path& path, const std::vector<NamedTensor>& records) {
  const auto bytes = encode_checkpoint(records);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open checkpoint for writing: " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

std::vector<NamedTensor> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_checkpoint(bytes);
}

}  // namespace explorium
