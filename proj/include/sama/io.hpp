#pragma once

#include <filesystem>
#include <string>

#include "sama/common.hpp"
#include "sama/motion.hpp"
#include "sama/scene.hpp"

namespace sama {

// Binary motion container (see FORMATS.md): magic "SMF1", u32 version, u32
// n_frames, u32 dim, u32 fps, u32 joint_count, i32 label_id, then row-major
// float32 frames. Only valid frames are stored.
void save_motion(const std::filesystem::path& path, const MotionSequence& seq, int joint_count);
MotionSequence load_motion(const std::filesystem::path& path, int* joint_count = nullptr);

// Structured text: "bounds cx cy cz half" then one "box cx cy cz hx hy hz"
// per obstacle.
void save_scene(const std::filesystem::path& path, const SceneSpec& scene);
SceneSpec load_scene(const std::filesystem::path& path);

// Voxel grid: magic "SVX1", dims, f64 cell_size, f64 origin[3], occupancy
// packed 8 cells per byte (x fastest).
void save_voxels(const std::filesystem::path& path, const VoxelGrid& grid);
VoxelGrid load_voxels(const std::filesystem::path& path);

// SDF: magic "SSD1", same header, float32 payload.
void save_sdf(const std::filesystem::path& path, const SignedDistanceField& sdf);
SignedDistanceField load_sdf(const std::filesystem::path& path);

uint64_t file_hash(const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace sama
