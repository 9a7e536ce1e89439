#pragma once

// Labelled datasets, the MNIST IDX reader/writer and i.i.d. partitioning.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "airdsgd/errors.hpp"
#include "airdsgd/random.hpp"

namespace airdsgd {

struct Dataset {
  Eigen::MatrixXd features;  // one sample per row
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const { return labels.size(); }
  std::size_t feature_count() const { return static_cast<std::size_t>(features.cols()); }

  Dataset subset(const std::vector<std::size_t>& rows) const {
    Dataset out;
    out.class_count = class_count;
    out.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
    out.labels.reserve(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
      out.features.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(rows[k]));
      out.labels.push_back(labels[rows[k]]);
    }
    return out;
  }

  Dataset head(std::size_t count) const {
    std::vector<std::size_t> rows(std::min(count, size()));
    for (std::size_t k = 0; k < rows.size(); ++k) rows[k] = k;
    return subset(rows);
  }
};

namespace idx {

inline constexpr std::uint32_t images_magic = 0x00000803;
inline constexpr std::uint32_t labels_magic = 0x00000801;

namespace detail {

inline std::uint32_t read_be32(std::ifstream& in, const std::string& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw IoError(path + ": truncated header");
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) |
         std::uint32_t{b[3]};
}

inline void write_be32(std::ofstream& out, std::uint32_t v) {
  const std::array<char, 4> b{static_cast<char>(v >> 24), static_cast<char>(v >> 16),
                              static_cast<char>(v >> 8), static_cast<char>(v)};
  out.write(b.data(), 4);
}

inline std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string() + ": cannot open");
  return in;
}

inline std::vector<unsigned char> read_payload(std::ifstream& in, std::size_t bytes,
                                               const std::string& path) {
  std::vector<unsigned char> buf(bytes);
  if (bytes > 0 && !in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes))) {
    throw IoError(path + ": truncated payload (expected " + std::to_string(bytes) + " bytes)");
  }
  return buf;
}

}  // namespace detail

struct RawImages {
  std::uint32_t count = 0, rows = 0, cols = 0;
  std::vector<unsigned char> pixels;
};

inline RawImages read_images(const std::filesystem::path& path) {
  auto in = detail::open(path);
  const std::string p = path.string();
  const std::uint32_t magic = detail::read_be32(in, p);
  if (magic != images_magic) throw FormatError(p + ": bad image magic " + std::to_string(magic));
  RawImages r;
  r.count = detail::read_be32(in, p);
  r.rows = detail::read_be32(in, p);
  r.cols = detail::read_be32(in, p);
  r.pixels = detail::read_payload(in, std::size_t{r.count} * r.rows * r.cols, p);
  return r;
}

inline std::vector<unsigned char> read_labels(const std::filesystem::path& path) {
  auto in = detail::open(path);
  const std::string p = path.string();
  const std::uint32_t magic = detail::read_be32(in, p);
  if (magic != labels_magic) throw FormatError(p + ": bad label magic " + std::to_string(magic));
  const std::uint32_t count = detail::read_be32(in, p);
  return detail::read_payload(in, count, p);
}

inline void write_images(const std::filesystem::path& path, std::uint32_t count, std::uint32_t rows,
                         std::uint32_t cols, const std::vector<unsigned char>& pixels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot create");
  detail::write_be32(out, images_magic);
  detail::write_be32(out, count);
  detail::write_be32(out, rows);
  detail::write_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

inline void write_labels(const std::filesystem::path& path, const std::vector<unsigned char>& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string() + ": cannot create");
  detail::write_be32(out, labels_magic);
  detail::write_be32(out, static_cast<std::uint32_t>(labels.size()));
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

}  // namespace idx

/// Reads an IDX image/label file pair. Pixels are scaled to [0, 1]. A nonzero
/// `limit` keeps only the first `limit` samples.
inline Dataset load_mnist_idx(const std::filesystem::path& images_path,
                              const std::filesystem::path& labels_path, std::size_t limit = 0) {
  const idx::RawImages img = idx::read_images(images_path);
  const std::vector<unsigned char> lab = idx::read_labels(labels_path);
  if (lab.size() != img.count) {
    throw InconsistentFiles(images_path.string() + " has " + std::to_string(img.count) + " images but " +
                            labels_path.string() + " has " + std::to_string(lab.size()) + " labels");
  }
  const std::size_t dim = std::size_t{img.rows} * img.cols;
  const std::size_t count = limit > 0 ? std::min<std::size_t>(limit, img.count) : img.count;
  Dataset ds;
  ds.features.resize(static_cast<Eigen::Index>(count), static_cast<Eigen::Index>(dim));
  for (std::size_t s = 0; s < count; ++s) {
    for (std::size_t k = 0; k < dim; ++k) {
      ds.features(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(k)) =
          img.pixels[s * dim + k] / 255.0;
    }
  }
  ds.labels.assign(lab.begin(), lab.begin() + static_cast<std::ptrdiff_t>(count));
  int max_label = -1;
  for (int l : ds.labels) max_label = std::max(max_label, l);
  ds.class_count = max_label + 1;
  return ds;
}

struct MnistSplit {
  Dataset train;
  Dataset test;
};

/// Loads {train,t10k}-{images-idx3,labels-idx1}-ubyte from a directory and
/// keeps the first train_count / test_count samples (0 keeps everything).
inline MnistSplit load_mnist_dir(const std::filesystem::path& dir, std::size_t train_count = 0,
                                 std::size_t test_count = 0) {
  MnistSplit s;
  s.train = load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", train_count);
  s.test = load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", test_count);
  if (s.train.size() < train_count || s.test.size() < test_count) {
    throw InvalidArgument(dir.string() + " holds " + std::to_string(s.train.size()) + " train / " +
                          std::to_string(s.test.size()) + " test samples, fewer than requested");
  }
  // Classes absent from a small prefix still exist.
  s.train.class_count = s.test.class_count = std::max(s.train.class_count, s.test.class_count);
  return s;
}

/// Seeded Fisher-Yates shuffle of 0..sample_count-1 split into n contiguous
/// parts; the first sample_count % n parts get one extra index.
inline std::vector<std::vector<std::size_t>> partition_iid(std::size_t sample_count, std::size_t n,
                                                           std::uint64_t seed) {
  if (n == 0 || n > sample_count) {
    throw InvalidArgument("partition_iid: need 1 <= n <= sample count (n=" + std::to_string(n) +
                          ", samples=" + std::to_string(sample_count) + ")");
  }
  std::vector<std::size_t> perm(sample_count);
  for (std::size_t k = 0; k < sample_count; ++k) perm[k] = k;
  Engine rng = make_engine(seed);
  for (std::size_t k = sample_count; k > 1; --k) {
    const std::size_t j = uniform_index(rng, k);
    std::swap(perm[k - 1], perm[j]);
  }
  std::vector<std::vector<std::size_t>> parts(n);
  const std::size_t base = sample_count / n, extra = sample_count % n;
  std::size_t pos = 0;
  for (std::size_t p = 0; p < n; ++p) {
    const std::size_t len = base + (p < extra ? 1 : 0);
    parts[p].assign(perm.begin() + static_cast<std::ptrdiff_t>(pos),
                    perm.begin() + static_cast<std::ptrdiff_t>(pos + len));
    pos += len;
  }
  return parts;
}

inline std::vector<std::vector<std::size_t>> partition_iid(const Dataset& ds, std::size_t n,
                                                           std::uint64_t seed) {
  return partition_iid(ds.size(), n, seed);
}

}  // namespace airdsgd
