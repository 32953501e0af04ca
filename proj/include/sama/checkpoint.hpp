#pragma once

#include <filesystem>

#include "sama/model.hpp"

namespace sama {

// Versioned model container with named parameter groups {backbone, cakey,
// scenecond, nulls}, the noise schedule, normalization stats, config hash
// and training seed/step. A payload hash in the header guards integrity;
// load_checkpoint names the file and both hashes on mismatch.
void save_checkpoint(const std::filesystem::path& path, ModelState& state);
ModelState load_checkpoint(const std::filesystem::path& path);

}  // namespace sama
