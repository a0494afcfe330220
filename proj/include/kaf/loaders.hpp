#pragma once

#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "kaf/dataset.hpp"
#include "kaf/error.hpp"

namespace kaf {

namespace detail {

inline std::vector<unsigned char> read_file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::uint32_t read_be32(const std::vector<unsigned char>& b, std::size_t off, const std::string& path) {
  if (off + 4 > b.size()) throw IoError(path + ": truncated header");
  return (std::uint32_t{b[off]} << 24) | (std::uint32_t{b[off + 1]} << 16) | (std::uint32_t{b[off + 2]} << 8) |
         std::uint32_t{b[off + 3]};
}

}  // namespace detail

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;

/// MNIST IDX pair. Pixels are scaled by 1/255; `n_max` > 0 keeps the first n_max records.
inline Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path, std::size_t n_max = 0) {
  const auto img = detail::read_file_bytes(images_path);
  const auto lab = detail::read_file_bytes(labels_path);
  if (detail::read_be32(img, 0, images_path) != kIdxImageMagic) throw FormatError(images_path + ": bad IDX image magic");
  if (detail::read_be32(lab, 0, labels_path) != kIdxLabelMagic) throw FormatError(labels_path + ": bad IDX label magic");
  const std::size_t n = detail::read_be32(img, 4, images_path);
  const std::size_t rows = detail::read_be32(img, 8, images_path);
  const std::size_t cols = detail::read_be32(img, 12, images_path);
  const std::size_t n_labels = detail::read_be32(lab, 4, labels_path);
  if (n != n_labels)
    throw DataError("mnist: " + std::to_string(n) + " images but " + std::to_string(n_labels) + " labels");
  const std::size_t pixels = rows * cols;
  if (img.size() < 16 + n * pixels) throw IoError(images_path + ": truncated image data");
  if (lab.size() < 8 + n) throw IoError(labels_path + ": truncated label data");

  const std::size_t keep = n_max > 0 && n_max < n ? n_max : n;
  Dataset d;
  d.task = TaskKind::Classification;
  d.num_classes = 10;
  d.x = Matrix(keep, pixels);
  d.y = Matrix(keep, 1);
  for (std::size_t i = 0; i < keep; ++i) {
    const unsigned char label = lab[8 + i];
    if (label > 9) throw DataError(labels_path + ": label " + std::to_string(label) + " at record " + std::to_string(i));
    d.y(i, 0) = label;
    for (std::size_t p = 0; p < pixels; ++p) d.x(i, p) = img[16 + i * pixels + p] / 255.0;
  }
  return d;
}

inline constexpr std::size_t kCifarRecordBytes = 3073;

/// CIFAR-10 binary batches: per record one label byte, then the R, G and B planes (1024 bytes each).
inline Dataset load_cifar10_bin(const std::vector<std::string>& batch_paths, std::size_t n_max = 0) {
  std::vector<std::vector<unsigned char>> files;
  std::size_t total = 0;
  for (const auto& p : batch_paths) {
    files.push_back(detail::read_file_bytes(p));
    if (files.back().size() % kCifarRecordBytes != 0)
      throw FormatError(p + ": length " + std::to_string(files.back().size()) + " is not a multiple of 3073");
    total += files.back().size() / kCifarRecordBytes;
  }
  const std::size_t keep = n_max > 0 && n_max < total ? n_max : total;
  Dataset d;
  d.task = TaskKind::Classification;
  d.num_classes = 10;
  d.x = Matrix(keep, kCifarRecordBytes - 1);
  d.y = Matrix(keep, 1);
  std::size_t row = 0;
  for (std::size_t f = 0; f < files.size() && row < keep; ++f) {
    const auto& bytes = files[f];
    for (std::size_t off = 0; off < bytes.size() && row < keep; off += kCifarRecordBytes, ++row) {
      if (bytes[off] > 9)
        throw DataError(batch_paths[f] + ": label " + std::to_string(bytes[off]) + " at record " +
                        std::to_string(off / kCifarRecordBytes));
      d.y(row, 0) = bytes[off];
      for (std::size_t p = 0; p + 1 < kCifarRecordBytes; ++p) d.x(row, p) = bytes[off + 1 + p] / 255.0;
    }
  }
  return d;
}

}  // namespace kaf
