#include "feel/datasets.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <numeric>
#include <random>
#include <string>

#include "feel/errors.hpp"

namespace feel::datasets {
namespace {

std::uint32_t read_be32(std::span<const std::uint8_t> buf, std::size_t offset) {
  return (static_cast<std::uint32_t>(buf[offset]) << 24) | (static_cast<std::uint32_t>(buf[offset + 1]) << 16) |
         (static_cast<std::uint32_t>(buf[offset + 2]) << 8) | static_cast<std::uint32_t>(buf[offset + 3]);
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string hex(std::uint32_t v) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "0x%08x", v);
  return buf;
}

}  // namespace

LabeledDataset generate_synthetic(std::size_t dim, std::size_t classes, std::size_t samples, double spread,
                                  RngStream& rng) {
  if (classes < 2 || dim == 0 || classes > 2 * dim || samples < classes) {
    throw DomainError("generate_synthetic: need 2 <= classes <= 2*dim and samples >= classes");
  }
  LabeledDataset data;
  data.num_classes = classes;
  data.features.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(samples));
  data.labels.resize(samples);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (std::size_t i = 0; i < samples; ++i) {
    const std::size_t c = i % classes;
    data.labels[i] = static_cast<int>(c);
    for (std::size_t k = 0; k < dim; ++k) {
      double mean = 0.0;
      if (c < dim && k == c) mean = 1.0;
      if (c >= dim && k == c - dim) mean = -1.0;
      data.features(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = mean + spread * noise(rng);
    }
  }
  return data;
}

LabeledDataset parse_mnist_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                               std::size_t subset_size, RngStream& rng) {
  if (subset_size == 0) {
    throw FormatError("mnist: subset size 0 gives an empty dataset");
  }
  if (images.size() < 16) {
    throw FormatError("mnist images: truncated header (" + std::to_string(images.size()) + " bytes)");
  }
  if (labels.size() < 8) {
    throw FormatError("mnist labels: truncated header (" + std::to_string(labels.size()) + " bytes)");
  }
  if (const auto magic = read_be32(images, 0); magic != kIdxImagesMagic) {
    throw FormatError("mnist images: bad magic " + hex(magic) + ", expected " + hex(kIdxImagesMagic));
  }
  if (const auto magic = read_be32(labels, 0); magic != kIdxLabelsMagic) {
    throw FormatError("mnist labels: bad magic " + hex(magic) + ", expected " + hex(kIdxLabelsMagic));
  }
  const std::size_t count = read_be32(images, 4);
  const std::size_t rows = read_be32(images, 8);
  const std::size_t cols = read_be32(images, 12);
  const std::size_t label_count = read_be32(labels, 4);
  if (count != label_count) {
    throw FormatError("mnist: " + std::to_string(count) + " images but " + std::to_string(label_count) + " labels");
  }
  const std::size_t pixels = rows * cols;
  if (images.size() < 16 + count * pixels) {
    throw FormatError("mnist images: truncated, expected " + std::to_string(16 + count * pixels) + " bytes, got " +
                      std::to_string(images.size()));
  }
  if (labels.size() < 8 + count) {
    throw FormatError("mnist labels: truncated, expected " + std::to_string(8 + count) + " bytes, got " +
                      std::to_string(labels.size()));
  }
  if (count == 0) {
    throw FormatError("mnist: file holds no samples");
  }

  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min(subset_size, count));

  LabeledDataset data;
  int max_label = 0;
  data.features.resize(static_cast<Eigen::Index>(pixels), static_cast<Eigen::Index>(order.size()));
  data.labels.resize(order.size());
  for (std::size_t j = 0; j < order.size(); ++j) {
    const std::size_t i = order[j];
    for (std::size_t p = 0; p < pixels; ++p) {
      data.features(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(j)) =
          static_cast<double>(images[16 + i * pixels + p]) / 255.0;
    }
    data.labels[j] = labels[8 + i];
    max_label = std::max(max_label, data.labels[j]);
  }
  data.num_classes = std::max<std::size_t>(10, static_cast<std::size_t>(max_label) + 1);
  return data;
}

LabeledDataset load_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                              std::size_t subset_size, RngStream& rng) {
  const auto images = read_file(images_path);
  const auto labels = read_file(labels_path);
  try {
    return parse_mnist_idx(images, labels, subset_size, rng);
  } catch (const FormatError& e) {
    throw FormatError(images_path.string() + " / " + labels_path.string() + ": " + e.what());
  }
}

void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  for (std::size_t k = 0; k < data.dim(); ++k) {
    out << 'f' << k << ',';
  }
  out << "label\n";
  char buf[32];
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t k = 0; k < data.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g",
                    data.features(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)));
      out << buf << ',';
    }
    out << data.labels[i] << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

}  // namespace feel::datasets
