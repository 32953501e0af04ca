#include "sama/checkpoint.hpp"

#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

namespace sama {

namespace {

constexpr uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& os, T v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& is, const char* what) {
    T v;
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!is) throw DataError(std::string("checkpoint: truncated ") + what);
    return v;
}

void put_string(std::ostream& os, const std::string& s) {
    put<uint32_t>(os, static_cast<uint32_t>(s.size()));
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& is) {
    uint32_t n = get<uint32_t>(is, "string size");
    std::string s(n, '\0');
    is.read(s.data(), n);
    if (!is) throw DataError("checkpoint: truncated string");
    return s;
}

void put_mat(std::ostream& os, const Mat& m) {
    put<uint32_t>(os, static_cast<uint32_t>(m.rows()));
    put<uint32_t>(os, static_cast<uint32_t>(m.cols()));
    os.write(reinterpret_cast<const char*>(m.data()),
             static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Mat get_mat(std::istream& is) {
    uint32_t r = get<uint32_t>(is, "mat rows");
    uint32_t c = get<uint32_t>(is, "mat cols");
    Mat m(r, c);
    is.read(reinterpret_cast<char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
    if (!is) throw DataError("checkpoint: truncated matrix");
    return m;
}

void put_vec(std::ostream& os, const Vec& v) {
    put<uint32_t>(os, static_cast<uint32_t>(v.size()));
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(sizeof(double) * v.size()));
}

Vec get_vec(std::istream& is) {
    uint32_t n = get<uint32_t>(is, "vec size");
    Vec v(n);
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(sizeof(double) * v.size()));
    if (!is) throw DataError("checkpoint: truncated vector");
    return v;
}

std::string hex64(uint64_t v) {
    char buf[19];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, ModelState& s) {
    std::ostringstream body;
    const ModelConfig& c = s.cfg;
    put<int32_t>(body, c.pose_dim);
    put<int32_t>(body, c.latent_dim);
    put<int32_t>(body, c.blocks);
    put<int32_t>(body, c.heads);
    put<int32_t>(body, c.ffn_dim);
    put<int32_t>(body, c.n_labels);
    put<int32_t>(body, c.cakey_hidden);
    put<uint8_t>(body, c.cakey_flags.sparse);
    put<uint8_t>(body, c.cakey_flags.adaptive);
    put<uint8_t>(body, c.cakey_flags.use_time_emb);
    put<int32_t>(body, c.vit_dim);
    put<int32_t>(body, c.vit_layers);
    put<int32_t>(body, c.vit_heads);
    put<int32_t>(body, c.patch_size);
    for (int a = 0; a < 3; ++a) put<int32_t>(body, c.vol_dims[a]);

    put<int32_t>(body, s.schedule.timesteps);
    for (int t = 0; t <= s.schedule.timesteps; ++t) put<double>(body, s.schedule.beta[t]);
    for (int t = 0; t <= s.schedule.timesteps; ++t) put<double>(body, s.schedule.alpha_bar[t]);

    put_vec(body, s.norm.mean.size() ? s.norm.mean : Vec());
    put_vec(body, s.norm.stddev.size() ? s.norm.stddev : Vec());

    put<uint64_t>(body, s.config_hash);
    put<uint64_t>(body, s.train_seed);
    put<int64_t>(body, s.train_step);
    put<uint8_t>(body, s.has_cakey());
    put<uint8_t>(body, s.has_scene());

    auto groups = param_groups(s);
    put<uint32_t>(body, static_cast<uint32_t>(groups.size()));
    for (const auto& g : groups) {
        put_string(body, g);
        auto params = collect_params(s, g);
        put<uint32_t>(body, static_cast<uint32_t>(params.size()));
        for (auto& [name, m] : params) {
            put_string(body, name);
            put_mat(body, *m);
        }
    }

    std::string payload = body.str();
    uint64_t hash = fnv1a(payload.data(), payload.size());

    std::filesystem::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os.write("SACK", 4);
    put<uint32_t>(os, kVersion);
    put<uint64_t>(os, hash);
    os.write(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (!os) throw DataError("write failed: " + path.string());
}

ModelState load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open checkpoint: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, "SACK", 4) != 0)
        throw DataError("not a checkpoint file: " + path.string());
    uint32_t version = get<uint32_t>(is, "version");
    if (version != kVersion)
        throw DataError("unsupported checkpoint version in " + path.string());
    uint64_t expected = get<uint64_t>(is, "hash");

    std::ostringstream rest;
    rest << is.rdbuf();
    std::string payload = rest.str();
    uint64_t actual = fnv1a(payload.data(), payload.size());
    if (actual != expected)
        throw DataError("checkpoint integrity failure: " + path.string() + " (expected hash " +
                        hex64(expected) + ", got " + hex64(actual) + ")");

    std::istringstream body(payload);
    ModelConfig c;
    c.pose_dim = get<int32_t>(body, "pose_dim");
    c.latent_dim = get<int32_t>(body, "latent_dim");
    c.blocks = get<int32_t>(body, "blocks");
    c.heads = get<int32_t>(body, "heads");
    c.ffn_dim = get<int32_t>(body, "ffn_dim");
    c.n_labels = get<int32_t>(body, "n_labels");
    c.cakey_hidden = get<int32_t>(body, "cakey_hidden");
    c.cakey_flags.sparse = get<uint8_t>(body, "sparse");
    c.cakey_flags.adaptive = get<uint8_t>(body, "adaptive");
    c.cakey_flags.use_time_emb = get<uint8_t>(body, "use_time_emb");
    c.vit_dim = get<int32_t>(body, "vit_dim");
    c.vit_layers = get<int32_t>(body, "vit_layers");
    c.vit_heads = get<int32_t>(body, "vit_heads");
    c.patch_size = get<int32_t>(body, "patch_size");
    for (int a = 0; a < 3; ++a) c.vol_dims[a] = get<int32_t>(body, "vol_dims");

    NoiseSchedule sched;
    sched.timesteps = get<int32_t>(body, "timesteps");
    sched.beta.resize(sched.timesteps + 1);
    sched.alpha_bar.resize(sched.timesteps + 1);
    for (int t = 0; t <= sched.timesteps; ++t) sched.beta[t] = get<double>(body, "beta");
    for (int t = 0; t <= sched.timesteps; ++t) sched.alpha_bar[t] = get<double>(body, "abar");

    Vec mean = get_vec(body);
    Vec stddev = get_vec(body);

    uint64_t config_hash = get<uint64_t>(body, "config_hash");
    uint64_t train_seed = get<uint64_t>(body, "train_seed");
    int64_t train_step = get<int64_t>(body, "train_step");
    bool has_cakey = get<uint8_t>(body, "has_cakey");
    bool has_scene = get<uint8_t>(body, "has_scene");

    Rng scratch(0);
    ModelState s = init_backbone(c, sched, scratch);
    if (has_cakey) add_cakey_layers(s, scratch);
    if (has_scene) add_scene_layers(s, scratch);
    s.norm.mean = mean;
    s.norm.stddev = stddev;
    s.config_hash = config_hash;
    s.train_seed = train_seed;
    s.train_step = train_step;

    uint32_t n_groups = get<uint32_t>(body, "group count");
    for (uint32_t gi = 0; gi < n_groups; ++gi) {
        std::string gname = get_string(body);
        auto params = collect_params(s, gname);
        std::map<std::string, Mat*> by_name;
        for (auto& [name, m] : params) by_name[name] = m;
        uint32_t n_tensors = get<uint32_t>(body, "tensor count");
        for (uint32_t ti = 0; ti < n_tensors; ++ti) {
            std::string name = get_string(body);
            Mat m = get_mat(body);
            auto it = by_name.find(name);
            if (it == by_name.end())
                throw DataError("checkpoint: unknown tensor '" + gname + "/" + name + "' in " +
                                path.string());
            if (it->second->rows() != m.rows() || it->second->cols() != m.cols())
                throw DataError("checkpoint: shape mismatch for '" + name + "' in " +
                                path.string());
            *it->second = std::move(m);
        }
    }
    return s;
}

}  // namespace sama
