#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "binlab/lstm.hpp"
#include "binlab/tensor.hpp"

namespace binlab {

/// Contiguous [begin, end) index range of one split.
struct SplitRange {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::size_t size() const noexcept { return end - begin; }
};

/// Images (N, 784) in [0,1] with labels in [0,10).
struct ImageDataset {
  Tensor images;
  std::vector<int> labels;
  std::size_t rows = 28;
  std::size_t cols = 28;
  SplitRange train;
  SplitRange val;
  SplitRange test;

  std::size_t count() const noexcept { return labels.size(); }
  std::size_t features() const noexcept { return rows * cols; }

  /// Batch of images/labels picked by absolute index.
  Tensor batch_images(std::span<const std::size_t> index) const;
  std::vector<int> batch_labels(std::span<const std::size_t> index) const;

  /// Sets contiguous split boundaries; counts must sum to <= count().
  void set_splits(std::size_t n_train, std::size_t n_val, std::size_t n_test);
};

/// Parses an IDX image file (magic 0x00000803, big-endian dims N x rows x
/// cols, then raw bytes) and the matching label file (magic 0x00000801).
/// Pixels are divided by 255. The whole set is placed in the train split.
/// Throws DataError on a missing file, bad magic (naming the byte offset),
/// truncation or a count mismatch.
ImageDataset load_mnist_idx(const std::filesystem::path& images,
                            const std::filesystem::path& labels);

/// Loads train-*-ubyte and t10k-*-ubyte from `dir`, concatenated in file
/// order, and splits 50000 / 10000 / 10000 (train / validation / test).
ImageDataset load_mnist_dir(const std::filesystem::path& dir);

/// Writes an IDX pair; used for fixtures and round-trip checks.
void write_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                     std::span<const std::uint8_t> pixels, std::span<const std::uint8_t> label_bytes,
                     std::uint32_t count, std::uint32_t rows, std::uint32_t cols);

/// Byte-level corpus. Vocabulary = distinct bytes in ascending order.
struct CharCorpus {
  std::vector<int> tokens;
  std::vector<std::uint8_t> vocab;
  std::array<int, 256> index{};
  SplitRange train;
  SplitRange val;
  SplitRange test;

  std::size_t vocab_size() const noexcept { return vocab.size(); }
  std::span<const int> split(const SplitRange& r) const {
    return std::span<const int>(tokens).subspan(r.begin, r.size());
  }
};

struct SplitFractions {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
};

/// Reads `path` as bytes (at most `byte_limit` when nonzero), builds the
/// vocabulary from the bytes read and splits contiguously by fraction.
/// Throws DataError on a missing/empty file, ConfigError if the fractions are
/// negative or do not sum to 1.
CharCorpus load_char_corpus(const std::filesystem::path& path, SplitFractions fractions = {},
                            std::size_t byte_limit = 0);
CharCorpus make_char_corpus(std::string_view text, SplitFractions fractions = {});

/// Splits a token range into `batch` contiguous streams and walks them in
/// aligned windows of `time_steps`: inputs x[t .. t+TS), targets x[t+1 .. t+TS].
///
/// Each stream has floor(n / batch) tokens and yields floor((len-1) / TS)
/// windows, consecutive in the stream (so hidden state may be carried over).
class WindowIterator {
 public:
  /// Throws DataError if tokens.size() < batch * (time_steps + 1).
  WindowIterator(std::span<const int> tokens, std::size_t batch, std::size_t time_steps);

  /// Fills `out` with the next window; false once exhausted.
  bool next(TokenWindow& out);
  void reset() noexcept { position_ = 0; }

  std::size_t windows_per_epoch() const noexcept { return windows_; }
  std::size_t stream_length() const noexcept { return stream_len_; }

 private:
  std::span<const int> tokens_;
  std::size_t batch_;
  std::size_t time_steps_;
  std::size_t stream_len_;
  std::size_t windows_;
  std::size_t position_ = 0;
};

/// (n, vocab) one-hot rows for a token list.
Tensor one_hot(std::span<const int> tokens, std::size_t vocab);

}  // namespace binlab
