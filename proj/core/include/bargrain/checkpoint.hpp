#pragma once

#include <cstdint>
#include <filesystem>

#include "bargrain/model.hpp"

namespace bargrain {

// Binary checkpoint layout, all integers and reals little-endian:
//
//   magic      8 bytes "BRGRCKPT"
//   version    u32
//   config     u64 n_rois, t_steps, d_h, hidden, out, classifier_hidden
//              f64 threshold_c, tau
//              u32 mode (0 full, 1 no-corr, 2 no-optim, 3 no-gconv)
//              u64 seed
//   count      u64 number of parameter matrices
//   matrices   per matrix: u64 rows, u64 cols, rows*cols f64 row-major,
//              in ModelState::parameters() order
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ModelState& state, const std::filesystem::path& path);

/// Throws LoadError on a bad magic, unsupported version, truncated file, or
/// parameter shapes that disagree with the stored configuration.
ModelState load_checkpoint(const std::filesystem::path& path);

// Same, additionally rejecting a checkpoint whose N or T differ from the data.
ModelState load_checkpoint(const std::filesystem::path& path, std::size_t n_rois, std::size_t t_steps);

}  // namespace bargrain
