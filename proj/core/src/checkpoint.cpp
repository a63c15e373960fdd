#include "binlab/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

#include "binlab/error.hpp"

namespace binlab {

namespace {

constexpr char kMagic[8] = {'B', 'I', 'N', 'L', 'A', 'B', '\0', '\1'};

template <typename T>
void put_le(std::vector<char>& out, T v) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  const U u = std::bit_cast<U>(v);
  for (std::size_t i = 0; i < sizeof(U); ++i) out.push_back(static_cast<char>((u >> (8 * i)) & 0xff));
}

template <typename T>
T get_le(const std::vector<char>& in, std::size_t offset) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U u = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i)
    u |= static_cast<U>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  return std::bit_cast<T>(u);
}

}  // namespace

const Tensor& Checkpoint::get(const std::string& name) const {
  auto it = tensors.find(name);
  if (it == tensors.end()) throw DataError("checkpoint has no tensor '" + name + "'");
  return it->second;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  nlohmann::json dir = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : ckpt.tensors) {
    dir.push_back({{"name", name}, {"shape", t.shape()}, {"offset", offset}});
    offset += 8 * t.size();
  }
  const std::string header = nlohmann::json{{"meta", ckpt.meta}, {"tensors", dir}}.dump();

  std::vector<char> buf(kMagic, kMagic + 8);
  put_le<std::uint32_t>(buf, Checkpoint::kVersion);
  put_le<std::uint64_t>(buf, header.size());
  buf.insert(buf.end(), header.begin(), header.end());
  buf.reserve(buf.size() + offset);
  for (const auto& [name, t] : ckpt.tensors)
    for (double v : t.data()) put_le<double>(buf, v);

  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint '" + path.string() + "'");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("short write to '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint '" + path.string() + "'");
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "checkpoint '" + path.string() + "': ";
  if (buf.size() < 20 || std::memcmp(buf.data(), kMagic, 8) != 0)
    throw DataError(where + "bad magic at byte offset 0");
  const auto version = get_le<std::uint32_t>(buf, 8);
  if (version != Checkpoint::kVersion)
    throw DataError(where + "unsupported version " + std::to_string(version));
  const auto header_len = get_le<std::uint64_t>(buf, 12);
  if (20 + header_len > buf.size()) throw DataError(where + "truncated header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(buf.begin() + 20,
                                   buf.begin() + 20 + static_cast<std::ptrdiff_t>(header_len));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(where + "malformed header: " + e.what());
  }
  const std::size_t payload = 20 + header_len;
  Checkpoint ckpt;
  ckpt.meta = header.at("meta");
  for (const auto& e : header.at("tensors")) {
    const auto name = e.at("name").get<std::string>();
    const auto shape = e.at("shape").get<Shape>();
    const auto offset = e.at("offset").get<std::uint64_t>();
    if (shape.empty()) {
      ckpt.tensors[name] = Tensor();
      continue;
    }
    const std::size_t n = shape_product(shape);
    if (payload + offset + 8 * n > buf.size()) throw DataError(where + "truncated payload at '" + name + "'");
    std::vector<double> values(n);
    for (std::size_t i = 0; i < n; ++i) values[i] = get_le<double>(buf, payload + offset + 8 * i);
    ckpt.tensors[name] = Tensor(shape, std::move(values));
  }
  return ckpt;
}

}  // namespace binlab
