#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "sama/checkpoint.hpp"
#include "sama/io.hpp"
#include "sama/rng.hpp"

using namespace sama;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    fs::path p = fs::temp_directory_path() / "sama_io_test";
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("motion file round trip is exact at float32") {
    Rng rng(2);
    MotionSequence seq;
    seq.frames = rng.normal_mat(37, 16);
    seq.valid_length = 37;
    seq.fps = 20;
    seq.label = 3;
    // float32 storage: write the quantized values so the round trip is exact
    for (int r = 0; r < seq.frames.rows(); ++r)
        for (int c = 0; c < seq.frames.cols(); ++c)
            seq.frames(r, c) = static_cast<float>(seq.frames(r, c));

    fs::path p = temp_dir() / "clip.smf";
    save_motion(p, seq, 5);
    int jc = 0;
    MotionSequence back = load_motion(p, &jc);
    CHECK(jc == 5);
    CHECK(back.label == 3);
    CHECK(back.fps == 20);
    CHECK(back.valid_length == 37);
    CHECK((back.frames - seq.frames).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scene file round trip") {
    SceneSpec scene;
    scene.bounds_center = Vec3(0.25, 0.95, -1.5);
    scene.bounds_half = 3.0;
    scene.boxes.push_back(Box{Vec3(1, 0.8, 1), Vec3(0.3, 0.8, 0.4)});
    scene.boxes.push_back(Box{Vec3(-1, 1.0, 0.5), Vec3(0.5, 1.0, 0.1)});
    fs::path p = temp_dir() / "scene.txt";
    save_scene(p, scene);
    SceneSpec back = load_scene(p);
    CHECK(back.bounds_half == scene.bounds_half);
    CHECK(back.bounds_center == scene.bounds_center);
    REQUIRE(back.boxes.size() == 2);
    for (size_t i = 0; i < 2; ++i) {
        CHECK(back.boxes[i].center == scene.boxes[i].center);
        CHECK(back.boxes[i].half == scene.boxes[i].half);
    }
}

TEST_CASE("voxel and sdf files round trip") {
    Rng rng(4);
    VoxelGrid g;
    g.dims = Vec3i(9, 7, 5);
    g.cell_size = 0.25;
    g.origin = Vec3(-1, 0, 2);
    g.occupancy.assign(g.cell_count(), 0);
    for (auto& o : g.occupancy) o = rng.uniform() < 0.4 ? 1 : 0;
    fs::path pv = temp_dir() / "grid.svx";
    save_voxels(pv, g);
    VoxelGrid gb = load_voxels(pv);
    CHECK(gb.dims == g.dims);
    CHECK(gb.cell_size == g.cell_size);
    CHECK(gb.occupancy == g.occupancy);

    SignedDistanceField s = compute_sdf(g);
    fs::path ps = temp_dir() / "grid.ssd";
    save_sdf(ps, s);
    SignedDistanceField sb = load_sdf(ps);
    CHECK(sb.dims == s.dims);
    for (size_t i = 0; i < s.distance.size(); ++i)
        CHECK(sb.distance[i] == doctest::Approx(s.distance[i]).epsilon(1e-6));
}

TEST_CASE("checkpoint round trip preserves every tensor") {
    Rng rng(6);
    ModelConfig cfg;
    cfg.pose_dim = 16;
    cfg.latent_dim = 32;
    cfg.blocks = 2;
    cfg.heads = 4;
    cfg.ffn_dim = 64;
    cfg.cakey_hidden = 24;
    cfg.vit_dim = 32;
    cfg.vit_layers = 2;
    cfg.patch_size = 3;
    cfg.vol_dims = Vec3i(6, 6, 6);
    ModelState s = init_backbone(cfg, NoiseSchedule::cosine(16), rng);
    add_cakey_layers(s, rng);
    add_scene_layers(s, rng);
    s.norm.mean = rng.normal_vec(16);
    s.norm.stddev = rng.normal_vec(16).cwiseAbs() + Vec::Ones(16);
    s.config_hash = 0xdeadbeef;
    s.train_seed = 1234;
    s.train_step = 77;

    fs::path p = temp_dir() / "model.ckpt";
    save_checkpoint(p, s);
    ModelState b = load_checkpoint(p);
    CHECK(b.cfg.latent_dim == 32);
    CHECK(b.config_hash == 0xdeadbeef);
    CHECK(b.train_seed == 1234);
    CHECK(b.train_step == 77);
    CHECK(b.has_cakey());
    CHECK(b.has_scene());
    for (const auto& g : param_groups(s)) {
        auto pa = collect_params(s, g);
        auto pb = collect_params(b, g);
        REQUIRE(pa.size() == pb.size());
        for (size_t i = 0; i < pa.size(); ++i) {
            CHECK(pa[i].first == pb[i].first);
            CHECK((*pa[i].second - *pb[i].second).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    CHECK(params_checksum(s, "backbone") == params_checksum(b, "backbone"));
}

TEST_CASE("corrupted checkpoint is refused with the expected hash") {
    Rng rng(9);
    ModelConfig cfg;
    cfg.pose_dim = 16;
    cfg.latent_dim = 32;
    cfg.blocks = 1;
    cfg.heads = 4;
    cfg.ffn_dim = 64;
    ModelState s = init_backbone(cfg, NoiseSchedule::cosine(8), rng);
    fs::path p = temp_dir() / "corrupt.ckpt";
    save_checkpoint(p, s);

    // flip one payload byte
    std::fstream f(p, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(200);
    char c;
    f.seekg(200);
    f.get(c);
    f.seekp(200);
    f.put(static_cast<char>(c ^ 0x5a));
    f.close();

    try {
        load_checkpoint(p);
        FAIL("expected DataError");
    } catch (const DataError& e) {
        std::string msg = e.what();
        CHECK(msg.find("corrupt.ckpt") != std::string::npos);
        CHECK(msg.find("expected hash") != std::string::npos);
    }
}

TEST_CASE("file_hash changes with content") {
    fs::path p1 = temp_dir() / "a.txt";
    fs::path p2 = temp_dir() / "b.txt";
    write_text_file(p1, "hello");
    write_text_file(p2, "hellp");
    CHECK(file_hash(p1) != file_hash(p2));
    CHECK(file_hash(p1) == file_hash(p1));
}
