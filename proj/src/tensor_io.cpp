#include "dcat/tensor_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>

namespace dcat {

namespace {

constexpr char kMagic[4] = {'D', 'T', 'E', 'N'};
constexpr std::uint8_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool done() const { return pos_ == bytes_.size(); }

  std::string_view take(std::size_t n, const std::string& what) {
    if (bytes_.size() - pos_ < n) throw FormatError("truncated input while reading " + what);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  std::uint8_t u8(const std::string& what) { return static_cast<std::uint8_t>(take(1, what)[0]); }

  std::uint32_t u32(const std::string& what) {
    auto s = take(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t(static_cast<unsigned char>(s[i])) << (8 * i);
    return v;
  }

  Tensor tensor(const std::string& what) {
    auto magic = take(4, what);
    if (std::memcmp(magic.data(), kMagic, 4) != 0) throw FormatError("bad DTEN magic in " + what);
    const auto version = u8(what);
    if (version != kVersion) {
      throw FormatError("unsupported DTEN version " + std::to_string(version) + " in " + what);
    }
    const auto rank = u8(what);
    Shape shape(rank);
    std::uint64_t count = 1;
    for (auto& d : shape) {
      d = u32(what);
      if (d == 0) throw FormatError("zero dimension in " + what);
      count *= static_cast<std::uint64_t>(d);
      if (count > (std::uint64_t{1} << 34)) throw FormatError("implausible size in " + what);
    }
    auto raw = take(static_cast<std::size_t>(count) * 4, what);
    Tensor::Array values(static_cast<Index>(count));
    for (std::uint64_t i = 0; i < count; ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= std::uint32_t(static_cast<unsigned char>(raw[i * 4 + b])) << (8 * b);
      }
      values[static_cast<Index>(i)] = std::bit_cast<float>(bits);
    }
    return Tensor(std::move(shape), std::move(values));
  }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string encode_dten(const Tensor& tensor) {
  if (tensor.rank() > 255) throw FormatError("DTEN rank exceeds 255");
  std::string out(kMagic, 4);
  out.push_back(static_cast<char>(kVersion));
  out.push_back(static_cast<char>(tensor.rank()));
  for (Index d : tensor.shape()) {
    if (d > Index{0xFFFFFFFF}) throw FormatError("DTEN dimension exceeds u32");
    put_u32(out, static_cast<std::uint32_t>(d));
  }
  out.reserve(out.size() + static_cast<std::size_t>(tensor.size()) * 4);
  for (Index i = 0; i < tensor.size(); ++i) put_u32(out, std::bit_cast<std::uint32_t>(tensor[i]));
  return out;
}

Tensor decode_dten(std::string_view bytes) {
  Reader r(bytes);
  Tensor t = r.tensor("tensor");
  if (!r.done()) throw FormatError("trailing bytes after DTEN record");
  return t;
}

void write_dten(std::ostream& out, const Tensor& tensor) {
  const std::string bytes = encode_dten(tensor);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

Tensor read_dten(std::istream& in) {
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_dten(bytes);
}

void save_tensor(const std::filesystem::path& path, const Tensor& tensor) {
  write_file_atomic(path, encode_dten(tensor));
}

Tensor load_tensor(const std::filesystem::path& path) { return decode_dten(read_file(path)); }

std::string encode_container(const std::vector<TensorRecord>& records) {
  std::string out;
  std::set<std::string> seen;
  for (const auto& rec : records) {
    if (rec.key.empty() || rec.key.size() > 255) {
      throw FormatError("container key must be 1..255 bytes: '" + rec.key + "'");
    }
    if (!seen.insert(rec.key).second) throw FormatError("duplicate container key '" + rec.key + "'");
    out.push_back(static_cast<char>(rec.key.size()));
    out += rec.key;
    out += encode_dten(rec.tensor);
  }
  return out;
}

std::vector<TensorRecord> decode_container(std::string_view bytes) {
  Reader r(bytes);
  std::vector<TensorRecord> records;
  std::set<std::string> seen;
  while (!r.done()) {
    const std::string where = "record #" + std::to_string(records.size());
    const auto len = r.u8("key length of " + where);
    if (len == 0) throw FormatError("empty key in " + where);
    std::string key(r.take(len, "key of " + where));
    if (!seen.insert(key).second) throw FormatError("duplicate key '" + key + "'");
    Tensor t = r.tensor("record '" + key + "'");
    records.push_back({std::move(key), std::move(t)});
  }
  return records;
}

void save_container(const std::filesystem::path& path, const std::vector<TensorRecord>& records) {
  write_file_atomic(path, encode_container(records));
}

std::vector<TensorRecord> load_container(const std::filesystem::path& path) {
  return decode_container(read_file(path));
}

Tensor text_to_tensor(std::string_view text) {
  if (text.empty()) return Tensor::zeros({1});
  Tensor::Array v(static_cast<Index>(text.size()));
  for (std::size_t i = 0; i < text.size(); ++i) {
    v[static_cast<Index>(i)] = static_cast<float>(static_cast<unsigned char>(text[i]));
  }
  return Tensor({static_cast<Index>(text.size())}, std::move(v));
}

std::string tensor_to_text(const Tensor& tensor) {
  std::string out;
  out.reserve(static_cast<std::size_t>(tensor.size()));
  for (Index i = 0; i < tensor.size(); ++i) {
    const float f = tensor[i];
    if (f < 0.0f || f > 255.0f || f != static_cast<float>(static_cast<int>(f))) {
      throw FormatError("text record holds a non-byte value");
    }
    if (f == 0.0f && tensor.size() == 1) return {};
    out.push_back(static_cast<char>(static_cast<unsigned char>(f)));
  }
  return out;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace dcat
