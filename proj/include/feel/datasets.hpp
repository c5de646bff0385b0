#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "feel/learning.hpp"
#include "feel/rng.hpp"

namespace feel::datasets {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

/// Balanced Gaussian clusters (label i mod C). Class c is centred on the
/// unit vector e_c (−e_{c−d} for c >= d) with isotropic std `spread`.
LabeledDataset generate_synthetic(std::size_t dim, std::size_t classes, std::size_t samples, double spread,
                                  RngStream& rng);

/// Parses IDX image/label buffers, scales pixels to [0, 1] and keeps the
/// first `subset_size` samples of a seeded shuffle (all if fewer exist).
LabeledDataset parse_mnist_idx(std::span<const std::uint8_t> images, std::span<const std::uint8_t> labels,
                               std::size_t subset_size, RngStream& rng);
LabeledDataset load_mnist_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                              std::size_t subset_size, RngStream& rng);

/// CSV dump with header f0,...,f{d-1},label.
void write_dataset_csv(const LabeledDataset& data, const std::filesystem::path& path);

}  // namespace feel::datasets
