#include "sama/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace sama {

namespace {

void write_raw(std::ostream& os, const void* p, size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_raw(std::istream& is, void* p, size_t n, const std::string& what) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw DataError("truncated read (" + what + ")");
}

template <typename T>
void write_pod(std::ostream& os, T v) {
    write_raw(os, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& is, const std::string& what) {
    T v;
    read_raw(is, &v, sizeof(T), what);
    return v;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    return os;
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    return is;
}

void expect_magic(std::istream& is, const char* magic, const std::filesystem::path& path) {
    char buf[4];
    read_raw(is, buf, 4, "magic");
    if (std::memcmp(buf, magic, 4) != 0)
        throw DataError("bad magic in " + path.string() + " (expected " + magic + ")");
}

}  // namespace

void save_motion(const std::filesystem::path& path, const MotionSequence& seq, int joint_count) {
    auto os = open_out(path);
    write_raw(os, "SMF1", 4);
    write_pod<uint32_t>(os, 1);
    write_pod<uint32_t>(os, static_cast<uint32_t>(seq.valid_length));
    write_pod<uint32_t>(os, static_cast<uint32_t>(seq.dim()));
    write_pod<uint32_t>(os, static_cast<uint32_t>(seq.fps));
    write_pod<uint32_t>(os, static_cast<uint32_t>(joint_count));
    write_pod<int32_t>(os, static_cast<int32_t>(seq.label));
    for (int r = 0; r < seq.valid_length; ++r)
        for (int c = 0; c < seq.dim(); ++c)
            write_pod<float>(os, static_cast<float>(seq.frames(r, c)));
    if (!os) throw DataError("write failed: " + path.string());
}

MotionSequence load_motion(const std::filesystem::path& path, int* joint_count) {
    auto is = open_in(path);
    expect_magic(is, "SMF1", path);
    uint32_t version = read_pod<uint32_t>(is, "version");
    if (version != 1) throw DataError("unsupported motion file version in " + path.string());
    uint32_t n = read_pod<uint32_t>(is, "n_frames");
    uint32_t d = read_pod<uint32_t>(is, "dim");
    uint32_t fps = read_pod<uint32_t>(is, "fps");
    uint32_t jc = read_pod<uint32_t>(is, "joint_count");
    int32_t label = read_pod<int32_t>(is, "label");
    MotionSequence seq;
    seq.frames = Mat::Zero(n, d);
    seq.fps = static_cast<int>(fps);
    seq.label = label;
    seq.valid_length = static_cast<int>(n);
    for (uint32_t r = 0; r < n; ++r)
        for (uint32_t c = 0; c < d; ++c) seq.frames(r, c) = read_pod<float>(is, "frame data");
    if (joint_count) *joint_count = static_cast<int>(jc);
    return seq;
}

void save_scene(const std::filesystem::path& path, const SceneSpec& scene) {
    std::ostringstream os;
    os.precision(17);
    os << "# sama scene v1\n";
    os << "bounds " << scene.bounds_center[0] << " " << scene.bounds_center[1] << " "
       << scene.bounds_center[2] << " " << scene.bounds_half << "\n";
    for (const Box& b : scene.boxes)
        os << "box " << b.center[0] << " " << b.center[1] << " " << b.center[2] << " "
           << b.half[0] << " " << b.half[1] << " " << b.half[2] << "\n";
    write_text_file(path, os.str());
}

SceneSpec load_scene(const std::filesystem::path& path) {
    std::istringstream is(read_text_file(path));
    SceneSpec scene;
    std::string line;
    bool have_bounds = false;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "bounds") {
            ls >> scene.bounds_center[0] >> scene.bounds_center[1] >> scene.bounds_center[2] >>
                scene.bounds_half;
            have_bounds = true;
        } else if (kind == "box") {
            Box b;
            ls >> b.center[0] >> b.center[1] >> b.center[2] >> b.half[0] >> b.half[1] >>
                b.half[2];
            if (!ls) throw DataError("malformed box line in " + path.string());
            scene.boxes.push_back(b);
        } else {
            throw DataError("unknown record '" + kind + "' in " + path.string());
        }
    }
    if (!have_bounds) throw DataError("scene file missing bounds: " + path.string());
    return scene;
}

namespace {

void write_grid_header(std::ostream& os, const char* magic, const Vec3i& dims, double cell,
                       const Vec3& origin) {
    write_raw(os, magic, 4);
    for (int a = 0; a < 3; ++a) write_pod<uint32_t>(os, static_cast<uint32_t>(dims[a]));
    write_pod<double>(os, cell);
    for (int a = 0; a < 3; ++a) write_pod<double>(os, origin[a]);
}

void read_grid_header(std::istream& is, Vec3i& dims, double& cell, Vec3& origin) {
    for (int a = 0; a < 3; ++a) dims[a] = static_cast<int>(read_pod<uint32_t>(is, "dims"));
    cell = read_pod<double>(is, "cell_size");
    for (int a = 0; a < 3; ++a) origin[a] = read_pod<double>(is, "origin");
}

}  // namespace

void save_voxels(const std::filesystem::path& path, const VoxelGrid& grid) {
    auto os = open_out(path);
    write_grid_header(os, "SVX1", grid.dims, grid.cell_size, grid.origin);
    uint8_t byte = 0;
    int nbits = 0;
    for (size_t i = 0; i < grid.occupancy.size(); ++i) {
        byte |= static_cast<uint8_t>((grid.occupancy[i] ? 1 : 0) << nbits);
        if (++nbits == 8) {
            write_pod<uint8_t>(os, byte);
            byte = 0;
            nbits = 0;
        }
    }
    if (nbits > 0) write_pod<uint8_t>(os, byte);
    if (!os) throw DataError("write failed: " + path.string());
}

VoxelGrid load_voxels(const std::filesystem::path& path) {
    auto is = open_in(path);
    expect_magic(is, "SVX1", path);
    VoxelGrid g;
    read_grid_header(is, g.dims, g.cell_size, g.origin);
    size_t n = g.cell_count();
    g.occupancy.assign(n, 0);
    uint8_t byte = 0;
    for (size_t i = 0; i < n; ++i) {
        if (i % 8 == 0) byte = read_pod<uint8_t>(is, "occupancy");
        g.occupancy[i] = (byte >> (i % 8)) & 1;
    }
    return g;
}

void save_sdf(const std::filesystem::path& path, const SignedDistanceField& sdf) {
    auto os = open_out(path);
    write_grid_header(os, "SSD1", sdf.dims, sdf.cell_size, sdf.origin);
    for (double d : sdf.distance) write_pod<float>(os, static_cast<float>(d));
    if (!os) throw DataError("write failed: " + path.string());
}

SignedDistanceField load_sdf(const std::filesystem::path& path) {
    auto is = open_in(path);
    expect_magic(is, "SSD1", path);
    SignedDistanceField s;
    read_grid_header(is, s.dims, s.cell_size, s.origin);
    size_t n = static_cast<size_t>(s.dims[0]) * s.dims[1] * s.dims[2];
    s.distance.resize(n);
    for (size_t i = 0; i < n; ++i) s.distance[i] = read_pod<float>(is, "distance");
    return s;
}

uint64_t file_hash(const std::filesystem::path& path) {
    auto is = open_in(path);
    char buf[65536];
    uint64_t h = 0xcbf29ce484222325ull;
    while (is) {
        is.read(buf, sizeof(buf));
        h = fnv1a(buf, static_cast<size_t>(is.gcount()), h);
    }
    return h;
}

std::string read_text_file(const std::filesystem::path& path) {
    auto is = open_in(path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    auto os = open_out(path);
    os << content;
    if (!os) throw DataError("write failed: " + path.string());
}

}  // namespace sama
