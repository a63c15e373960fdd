#include "binlab/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "binlab/error.hpp"

namespace binlab {

namespace {

constexpr std::uint32_t kImageMagic = 0x00000803;
constexpr std::uint32_t kLabelMagic = 0x00000801;

std::vector<std::uint8_t> read_file(const std::filesystem::path& path, std::size_t limit = 0) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path.string() + "'");
  std::vector<std::uint8_t> bytes;
  if (limit == 0) {
    bytes.assign(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
  } else {
    bytes.resize(limit);
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(limit));
    bytes.resize(static_cast<std::size_t>(in.gcount()));
  }
  return bytes;
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& buf, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > buf.size()) {
    throw DataError("'" + path.string() + "' truncated: header needs bytes " +
                    std::to_string(offset) + ".." + std::to_string(offset + 3));
  }
  return (std::uint32_t{buf[offset]} << 24) | (std::uint32_t{buf[offset + 1]} << 16) |
         (std::uint32_t{buf[offset + 2]} << 8) | std::uint32_t{buf[offset + 3]};
}

void check_magic(std::uint32_t got, std::uint32_t want, const std::filesystem::path& path) {
  if (got != want) {
    std::ostringstream os;
    os << "'" << path.string() << "': bad IDX magic at byte offset 0: got 0x" << std::hex
       << got << ", expected 0x" << want;
    throw DataError(os.str());
  }
}

void put_be32(std::ofstream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                     static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b, 4);
}

void assign_splits(CharCorpus& c, SplitFractions f) {
  if (f.train < 0 || f.val < 0 || f.test < 0)
    throw ConfigError("split fractions must be non-negative");
  if (std::fabs(f.train + f.val + f.test - 1.0) > 1e-9)
    throw ConfigError("split fractions must sum to 1");
  const std::size_t n = c.tokens.size();
  const auto n_train = static_cast<std::size_t>(std::floor(f.train * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::floor(f.val * static_cast<double>(n)));
  c.train = {0, n_train};
  c.val = {n_train, n_train + n_val};
  c.test = {n_train + n_val, n};
}

}  // namespace

Tensor ImageDataset::batch_images(std::span<const std::size_t> index) const {
  return gather_rows(images, index);
}

std::vector<int> ImageDataset::batch_labels(std::span<const std::size_t> index) const {
  std::vector<int> out(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) out[i] = labels.at(index[i]);
  return out;
}

void ImageDataset::set_splits(std::size_t n_train, std::size_t n_val, std::size_t n_test) {
  if (n_train + n_val + n_test > count()) {
    throw ConfigError("split sizes " + std::to_string(n_train) + "/" + std::to_string(n_val) +
                      "/" + std::to_string(n_test) + " exceed " + std::to_string(count()) +
                      " images");
  }
  train = {0, n_train};
  val = {n_train, n_train + n_val};
  test = {n_train + n_val, n_train + n_val + n_test};
}

ImageDataset load_mnist_idx(const std::filesystem::path& images,
                            const std::filesystem::path& labels) {
  const auto img = read_file(images);
  const auto lab = read_file(labels);
  check_magic(read_be32(img, 0, images), kImageMagic, images);
  check_magic(read_be32(lab, 0, labels), kLabelMagic, labels);
  const std::uint32_t n = read_be32(img, 4, images);
  const std::uint32_t rows = read_be32(img, 8, images);
  const std::uint32_t cols = read_be32(img, 12, images);
  const std::uint32_t n_labels = read_be32(lab, 4, labels);
  if (n != n_labels) {
    throw DataError("image count " + std::to_string(n) + " != label count " +
                    std::to_string(n_labels));
  }
  if (n == 0 || rows == 0 || cols == 0) throw DataError("'" + images.string() + "' is empty");
  const std::size_t pixels = std::size_t{n} * rows * cols;
  if (img.size() < 16 + pixels) {
    throw DataError("'" + images.string() + "' truncated: expected " +
                    std::to_string(16 + pixels) + " bytes, found " + std::to_string(img.size()));
  }
  if (lab.size() < 8 + std::size_t{n}) {
    throw DataError("'" + labels.string() + "' truncated: expected " + std::to_string(8 + n) +
                    " bytes, found " + std::to_string(lab.size()));
  }
  ImageDataset ds;
  ds.rows = rows;
  ds.cols = cols;
  std::vector<double> px(pixels);
  for (std::size_t i = 0; i < pixels; ++i) px[i] = static_cast<double>(img[16 + i]) / 255.0;
  ds.images = Tensor({n, std::size_t{rows} * cols}, std::move(px));
  ds.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int y = lab[8 + i];
    if (y > 9) {
      throw DataError("'" + labels.string() + "': label " + std::to_string(y) +
                      " at byte offset " + std::to_string(8 + i) + " outside [0,10)");
    }
    ds.labels[i] = y;
  }
  ds.set_splits(n, 0, 0);
  return ds;
}

ImageDataset load_mnist_dir(const std::filesystem::path& dir) {
  auto train = load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte");
  auto test = load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte");
  if (train.features() != test.features()) throw DataError("train/test image sizes differ");
  const std::size_t n_train = train.count();
  const std::size_t n_test = test.count();
  std::vector<double> px(train.images.values());
  px.insert(px.end(), test.images.values().begin(), test.images.values().end());
  ImageDataset all;
  all.rows = train.rows;
  all.cols = train.cols;
  all.images = Tensor({n_train + n_test, train.features()}, std::move(px));
  all.labels = std::move(train.labels);
  all.labels.insert(all.labels.end(), test.labels.begin(), test.labels.end());
  if (n_train >= 60000 && n_test >= 10000) {
    all.set_splits(50000, n_train - 50000, n_test);
  } else {
    const std::size_t n_val = n_train / 6;
    all.set_splits(n_train - n_val, n_val, n_test);
  }
  return all;
}

void write_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                     std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> label_bytes,
                     std::uint32_t count, std::uint32_t rows, std::uint32_t cols) {
  if (pixels.size() != std::size_t{count} * rows * cols || label_bytes.size() != count)
    throw ShapeError("write_mnist_idx: buffer sizes do not match the header");
  std::ofstream img(images, std::ios::binary);
  std::ofstream lab(labels, std::ios::binary);
  if (!img || !lab) throw DataError("cannot create IDX files");
  put_be32(img, kImageMagic);
  put_be32(img, count);
  put_be32(img, rows);
  put_be32(img, cols);
  img.write(reinterpret_cast<const char*>(pixels.data()),
            static_cast<std::streamsize>(pixels.size()));
  put_be32(lab, kLabelMagic);
  put_be32(lab, count);
  lab.write(reinterpret_cast<const char*>(label_bytes.data()),
            static_cast<std::streamsize>(label_bytes.size()));
}

CharCorpus make_char_corpus(std::string_view text, SplitFractions fractions) {
  if (text.empty()) throw DataError("corpus is empty");
  CharCorpus c;
  std::array<bool, 256> seen{};
  for (unsigned char ch : text) seen[ch] = true;
  c.index.fill(-1);
  for (int b = 0; b < 256; ++b) {
    if (seen[static_cast<std::size_t>(b)]) {
      c.index[static_cast<std::size_t>(b)] = static_cast<int>(c.vocab.size());
      c.vocab.push_back(static_cast<std::uint8_t>(b));
    }
  }
  c.tokens.reserve(text.size());
  for (unsigned char ch : text) c.tokens.push_back(c.index[ch]);
  assign_splits(c, fractions);
  return c;
}

CharCorpus load_char_corpus(const std::filesystem::path& path, SplitFractions fractions,
                            std::size_t byte_limit) {
  const auto bytes = read_file(path, byte_limit);
  if (bytes.empty()) throw DataError("corpus '" + path.string() + "' is empty");
  return make_char_corpus(
      std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), fractions);
}

WindowIterator::WindowIterator(std::span<const int> tokens, std::size_t batch,
                               std::size_t time_steps)
    : tokens_(tokens), batch_(batch), time_steps_(time_steps) {
  if (batch == 0 || time_steps == 0) throw ConfigError("batch and time steps must be >= 1");
  if (tokens.size() < batch * (time_steps + 1)) {
    throw DataError("corpus of " + std::to_string(tokens.size()) + " tokens is too short for " +
                    std::to_string(batch) + " streams of " + std::to_string(time_steps + 1));
  }
  stream_len_ = tokens.size() / batch;
  windows_ = (stream_len_ - 1) / time_steps;
}

bool WindowIterator::next(TokenWindow& out) {
  if (position_ >= windows_) return false;
  const std::size_t offset = position_ * time_steps_;
  out.steps = time_steps_;
  out.batch = batch_;
  out.inputs.resize(time_steps_ * batch_);
  out.targets.resize(time_steps_ * batch_);
  for (std::size_t t = 0; t < time_steps_; ++t) {
    for (std::size_t s = 0; s < batch_; ++s) {
      const std::size_t at = s * stream_len_ + offset + t;
      out.inputs[t * batch_ + s] = tokens_[at];
      out.targets[t * batch_ + s] = tokens_[at + 1];
    }
  }
  ++position_;
  return true;
}

Tensor one_hot(std::span<const int> tokens, std::size_t vocab) {
  if (tokens.empty()) throw ShapeError("one_hot: no tokens");
  Tensor x({tokens.size(), vocab});
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int t = tokens[i];
    if (t < 0 || static_cast<std::size_t>(t) >= vocab)
      throw DomainError("one_hot: token " + std::to_string(t) + " outside vocabulary");
    x(i, static_cast<std::size_t>(t)) = 1.0;
  }
  return x;
}

}  // namespace binlab
