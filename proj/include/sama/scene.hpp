#pragma once

#include <vector>

#include "sama/common.hpp"
#include "sama/rng.hpp"

namespace sama {

struct Box {
    Vec3 center;
    Vec3 half;

    bool contains(const Vec3& p) const {
        return ((p - center).cwiseAbs().array() < half.array()).all();
    }
    // signed distance to the box surface (negative inside)
    double signed_distance(const Vec3& p) const {
        Vec3 d = (p - center).cwiseAbs() - half;
        Vec3 outside = d.cwiseMax(0.0);
        double inside = std::min(d.maxCoeff(), 0.0);
        return outside.norm() + inside;
    }
};

// Axis-aligned boxes inside a cubic scene volume. The cube is centered on
// the clip's initial root position; obstacles sit on the ground and span
// the full body height so avoidance can reason in the ground plane.
struct SceneSpec {
    std::vector<Box> boxes;
    Vec3 bounds_center{0, 0, 0};
    double bounds_half = 3.0;
};

enum class SceneDifficulty { Empty, Sparse, Dense };

SceneDifficulty scene_difficulty_from_string(const std::string& s);
const char* to_string(SceneDifficulty d);

// empty: no boxes; sparse: 2-4 pillars; dense: 6-10 boxes including wall
// segments. A disk of radius >= 0.5 m around the start (the bounds center)
// is always kept clear.
SceneSpec generate_scene(Rng& rng, SceneDifficulty difficulty, const Vec3& bounds_center,
                         double bounds_half = 3.0);

struct VoxelGrid {
    Vec3i dims{0, 0, 0};
    double cell_size = 0.0;
    Vec3 origin{0, 0, 0};  // corner of cell (0,0,0)
    std::vector<uint8_t> occupancy;

    size_t index(int x, int y, int z) const {
        return static_cast<size_t>(x) +
               static_cast<size_t>(dims[0]) * (static_cast<size_t>(y) +
                                               static_cast<size_t>(dims[1]) * z);
    }
    Vec3 cell_center(int x, int y, int z) const {
        return origin + cell_size * Vec3(x + 0.5, y + 0.5, z + 0.5);
    }
    size_t cell_count() const {
        return static_cast<size_t>(dims[0]) * dims[1] * dims[2];
    }
};

// A cell is occupied iff its center lies inside any box.
VoxelGrid voxelize(const SceneSpec& scene, const Vec3i& dims, double cell_size,
                   const Vec3& origin);

// Convenience: voxel cube of the scene volume centered at `center`.
VoxelGrid voxelize_centered(const SceneSpec& scene, int dims, const Vec3& center);

struct SignedDistanceField {
    Vec3i dims{0, 0, 0};
    double cell_size = 0.0;
    Vec3 origin{0, 0, 0};
    std::vector<double> distance;  // meters, negative inside occupancy

    size_t index(int x, int y, int z) const {
        return static_cast<size_t>(x) +
               static_cast<size_t>(dims[0]) * (static_cast<size_t>(y) +
                                               static_cast<size_t>(dims[1]) * z);
    }
    double diagonal() const {
        return cell_size * std::sqrt(double(dims[0]) * dims[0] + double(dims[1]) * dims[1] +
                                     double(dims[2]) * dims[2]);
    }
};

// Exact Euclidean distance transform (separable lower-envelope passes per
// axis). Cell value = distance from the cell center to the nearest
// occupied-cell center minus half a cell (the surface offset), negated for
// occupied cells via the transform of the complement. All-free grids get
// +diagonal as sentinel, all-occupied -diagonal.
SignedDistanceField compute_sdf(const VoxelGrid& grid);

// Trilinear interpolation of the surrounding 8 cell values; points outside
// the cell-center lattice are clamped and charged the Euclidean excess.
double sdf_query(const SignedDistanceField& sdf, const Vec3& p);

}  // namespace sama
