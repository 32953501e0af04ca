#include "sama/scene.hpp"

#include <algorithm>
#include <limits>

namespace sama {

SceneDifficulty scene_difficulty_from_string(const std::string& s) {
    if (s == "empty") return SceneDifficulty::Empty;
    if (s == "sparse") return SceneDifficulty::Sparse;
    if (s == "dense") return SceneDifficulty::Dense;
    throw ConfigError("unknown scene difficulty '" + s + "'");
}

const char* to_string(SceneDifficulty d) {
    switch (d) {
        case SceneDifficulty::Empty: return "empty";
        case SceneDifficulty::Sparse: return "sparse";
        case SceneDifficulty::Dense: return "dense";
    }
    return "?";
}

namespace {

constexpr double kStartClearRadius = 0.55;  // keeps SDF at the start >= 0.5

// horizontal distance from the start disk to the box footprint
double footprint_clearance(const Box& b, const Vec3& start) {
    double dx = std::max(std::abs(b.center[0] - start[0]) - b.half[0], 0.0);
    double dz = std::max(std::abs(b.center[2] - start[2]) - b.half[2], 0.0);
    return std::hypot(dx, dz);
}

Box sample_box(Rng& rng, const Vec3& c, double bh, double hx, double hy, double hz) {
    double margin_x = bh - hx, margin_z = bh - hz;
    Vec3 center(c[0] + rng.uniform(-margin_x, margin_x), hy,
                c[2] + rng.uniform(-margin_z, margin_z));
    return Box{center, Vec3(hx, hy, hz)};
}

}  // namespace

SceneSpec generate_scene(Rng& rng, SceneDifficulty difficulty, const Vec3& bounds_center,
                         double bounds_half) {
    SceneSpec scene;
    scene.bounds_center = bounds_center;
    scene.bounds_half = bounds_half;
    if (difficulty == SceneDifficulty::Empty) return scene;

    Vec3 start = bounds_center;  // clip start; keep a clear disk around it
    int target = difficulty == SceneDifficulty::Sparse ? rng.uniform_int(2, 4)
                                                       : rng.uniform_int(6, 10);
    int walls = difficulty == SceneDifficulty::Dense ? rng.uniform_int(1, 3) : 0;

    int placed = 0, attempts = 0;
    while (placed < target && attempts < 200) {
        ++attempts;
        Box b;
        if (placed < walls) {
            // thin wall segment, axis-aligned either way
            double len = rng.uniform(0.8, 1.8);
            double hy = rng.uniform(0.8, 1.2);
            if (rng.uniform() < 0.5)
                b = sample_box(rng, bounds_center, bounds_half, len, hy, 0.1);
            else
                b = sample_box(rng, bounds_center, bounds_half, 0.1, hy, len);
        } else {
            double hx = rng.uniform(0.3, 0.5);
            double hz = rng.uniform(0.3, 0.5);
            double hy = rng.uniform(0.8, 1.2);
            b = sample_box(rng, bounds_center, bounds_half, hx, hy, hz);
        }
        b.center[1] = b.half[1];  // sits on the ground
        if (footprint_clearance(b, start) < kStartClearRadius) continue;
        scene.boxes.push_back(b);
        ++placed;
    }
    return scene;
}

VoxelGrid voxelize(const SceneSpec& scene, const Vec3i& dims, double cell_size,
                   const Vec3& origin) {
    if (dims.minCoeff() <= 0) throw ConfigError("voxelize: dims must be positive");
    VoxelGrid g;
    g.dims = dims;
    g.cell_size = cell_size;
    g.origin = origin;
    g.occupancy.assign(g.cell_count(), 0);
    for (int z = 0; z < dims[2]; ++z)
        for (int y = 0; y < dims[1]; ++y)
            for (int x = 0; x < dims[0]; ++x) {
                Vec3 c = g.cell_center(x, y, z);
                for (const Box& b : scene.boxes) {
                    if (b.contains(c)) {
                        g.occupancy[g.index(x, y, z)] = 1;
                        break;
                    }
                }
            }
    return g;
}

VoxelGrid voxelize_centered(const SceneSpec& scene, int dims, const Vec3& center) {
    double cell = 2.0 * scene.bounds_half / dims;
    Vec3 origin = center - Vec3::Constant(scene.bounds_half);
    return voxelize(scene, Vec3i(dims, dims, dims), cell, origin);
}

namespace {

// 1D squared distance transform (lower envelope of parabolas).
void dt_1d(const std::vector<double>& f, int n, std::vector<double>& d, std::vector<int>& v,
           std::vector<double>& z) {
    int k = 0;
    v[0] = 0;
    z[0] = -std::numeric_limits<double>::infinity();
    z[1] = std::numeric_limits<double>::infinity();
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            int p = v[k];
            s = ((f[q] + q * double(q)) - (f[p] + p * double(p))) / (2.0 * q - 2.0 * p);
            if (s > z[k]) break;
            --k;
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = std::numeric_limits<double>::infinity();
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        int p = v[k];
        d[q] = (q - double(p)) * (q - double(p)) + f[p];
    }
}

// squared distance (in cells) to the nearest seed cell center; rows without
// seeds carry a large finite sentinel so the parabola intersections stay
// well-defined (exactness is unaffected: real distances are always smaller)
std::vector<double> edt_squared(const VoxelGrid& g, bool seed_value) {
    const int nx = g.dims[0], ny = g.dims[1], nz = g.dims[2];
    const double far = 1e12;
    std::vector<double> dist(g.cell_count());
    for (size_t i = 0; i < g.cell_count(); ++i)
        dist[i] = (g.occupancy[i] != 0) == seed_value ? 0.0 : far;

    int nmax = std::max({nx, ny, nz});
    std::vector<double> f(nmax), d(nmax), z(nmax + 1);
    std::vector<int> v(nmax);

    // pass along x
    for (int zc = 0; zc < nz; ++zc)
        for (int y = 0; y < ny; ++y) {
            for (int x = 0; x < nx; ++x) f[x] = dist[g.index(x, y, zc)];
            dt_1d(f, nx, d, v, z);
            for (int x = 0; x < nx; ++x) dist[g.index(x, y, zc)] = d[x];
        }
    // pass along y
    for (int zc = 0; zc < nz; ++zc)
        for (int x = 0; x < nx; ++x) {
            for (int y = 0; y < ny; ++y) f[y] = dist[g.index(x, y, zc)];
            dt_1d(f, ny, d, v, z);
            for (int y = 0; y < ny; ++y) dist[g.index(x, y, zc)] = d[y];
        }
    // pass along z
    for (int y = 0; y < ny; ++y)
        for (int x = 0; x < nx; ++x) {
            for (int zc = 0; zc < nz; ++zc) f[zc] = dist[g.index(x, y, zc)];
            dt_1d(f, nz, d, v, z);
            for (int zc = 0; zc < nz; ++zc) dist[g.index(x, y, zc)] = d[zc];
        }
    return dist;
}

}  // namespace

SignedDistanceField compute_sdf(const VoxelGrid& grid) {
    SignedDistanceField sdf;
    sdf.dims = grid.dims;
    sdf.cell_size = grid.cell_size;
    sdf.origin = grid.origin;
    sdf.distance.assign(grid.cell_count(), 0.0);

    bool any_occ = false, any_free = false;
    for (uint8_t o : grid.occupancy) (o ? any_occ : any_free) = true;
    const double sentinel = sdf.diagonal();
    if (!any_occ) {
        std::fill(sdf.distance.begin(), sdf.distance.end(), sentinel);
        return sdf;
    }
    if (!any_free) {
        std::fill(sdf.distance.begin(), sdf.distance.end(), -sentinel);
        return sdf;
    }

    std::vector<double> to_occ = edt_squared(grid, true);
    std::vector<double> to_free = edt_squared(grid, false);
    for (size_t i = 0; i < grid.cell_count(); ++i) {
        if (grid.occupancy[i])
            sdf.distance[i] = -(std::sqrt(to_free[i]) - 0.5) * grid.cell_size;
        else
            sdf.distance[i] = (std::sqrt(to_occ[i]) - 0.5) * grid.cell_size;
    }
    return sdf;
}

double sdf_query(const SignedDistanceField& sdf, const Vec3& p) {
    // continuous coordinates in cell units, relative to cell-center lattice
    Vec3 q = (p - sdf.origin) / sdf.cell_size - Vec3::Constant(0.5);
    Vec3 qc = q;
    double excess2 = 0.0;
    for (int a = 0; a < 3; ++a) {
        double hi = sdf.dims[a] - 1.0;
        if (qc[a] < 0.0) {
            excess2 += qc[a] * qc[a];
            qc[a] = 0.0;
        } else if (qc[a] > hi) {
            excess2 += (qc[a] - hi) * (qc[a] - hi);
            qc[a] = hi;
        }
    }
    int ix = std::min(int(qc[0]), sdf.dims[0] - 2);
    int iy = std::min(int(qc[1]), sdf.dims[1] - 2);
    int iz = std::min(int(qc[2]), sdf.dims[2] - 2);
    ix = std::max(ix, 0);
    iy = std::max(iy, 0);
    iz = std::max(iz, 0);
    double fx = qc[0] - ix, fy = qc[1] - iy, fz = qc[2] - iz;
    if (sdf.dims[0] == 1) { ix = 0; fx = 0; }
    if (sdf.dims[1] == 1) { iy = 0; fy = 0; }
    if (sdf.dims[2] == 1) { iz = 0; fz = 0; }

    auto at = [&](int dx, int dy, int dz) {
        return sdf.distance[sdf.index(std::min(ix + dx, sdf.dims[0] - 1),
                                      std::min(iy + dy, sdf.dims[1] - 1),
                                      std::min(iz + dz, sdf.dims[2] - 1))];
    };
    double c00 = at(0, 0, 0) * (1 - fx) + at(1, 0, 0) * fx;
    double c10 = at(0, 1, 0) * (1 - fx) + at(1, 1, 0) * fx;
    double c01 = at(0, 0, 1) * (1 - fx) + at(1, 0, 1) * fx;
    double c11 = at(0, 1, 1) * (1 - fx) + at(1, 1, 1) * fx;
    double c0 = c00 * (1 - fy) + c10 * fy;
    double c1 = c01 * (1 - fy) + c11 * fy;
    double val = c0 * (1 - fz) + c1 * fz;
    return val + std::sqrt(excess2) * sdf.cell_size;
}

}  // namespace sama
