#include "sama/model.hpp"

#include <cmath>

namespace sama {

void ModelConfig::validate() const {
    if (latent_dim % heads != 0) throw ConfigError("model: latent_dim must divide by heads");
    if (vit_dim % vit_heads != 0) throw ConfigError("model: vit_dim must divide by vit_heads");
    for (int a = 0; a < 3; ++a)
        if (vol_dims[a] % patch_size != 0)
            throw ConfigError("model: voxel dims " + std::to_string(vol_dims[a]) +
                              " not divisible by patch size " + std::to_string(patch_size));
}

Mat NormStats::normalize(const Mat& raw, int valid_len) const {
    Mat out = Mat::Zero(raw.rows(), raw.cols());
    for (int r = 0; r < valid_len; ++r)
        out.row(r) = (raw.row(r) - mean.transpose()).cwiseQuotient(stddev.transpose());
    return out;
}

Mat NormStats::denormalize(const Mat& normed, int valid_len) const {
    Mat out = Mat::Zero(normed.rows(), normed.cols());
    for (int r = 0; r < valid_len; ++r)
        out.row(r) = normed.row(r).cwiseProduct(stddev.transpose()) + mean.transpose();
    return out;
}

namespace {

Mat init_weight(int rows, int cols, Rng& rng) {
    return rng.normal_mat(rows, cols) / std::sqrt(static_cast<double>(rows));
}

BlockParams init_block(int d, int ffn, Rng& rng) {
    BlockParams b;
    b.ln1_g = Mat::Ones(1, d);
    b.ln1_b = Mat::Zero(1, d);
    b.attn.wq = init_weight(d, d, rng);
    b.attn.bq = Mat::Zero(1, d);
    b.attn.wk = init_weight(d, d, rng);
    b.attn.bk = Mat::Zero(1, d);
    b.attn.wv = init_weight(d, d, rng);
    b.attn.bv = Mat::Zero(1, d);
    b.attn.wo = init_weight(d, d, rng);
    b.attn.bo = Mat::Zero(1, d);
    b.ln2_g = Mat::Ones(1, d);
    b.ln2_b = Mat::Zero(1, d);
    b.ff_w1 = init_weight(d, ffn, rng);
    b.ff_b1 = Mat::Zero(1, ffn);
    b.ff_w2 = init_weight(ffn, d, rng);
    b.ff_b2 = Mat::Zero(1, d);
    return b;
}

}  // namespace

ModelState init_backbone(const ModelConfig& cfg, const NoiseSchedule& sched, Rng& rng) {
    cfg.validate();
    ModelState s;
    s.cfg = cfg;
    s.schedule = sched;
    const int d = cfg.latent_dim;
    BackboneParams& bb = s.backbone;
    bb.label_embed = 0.1 * rng.normal_mat(cfg.n_labels, d);
    bb.time_w1 = init_weight(d, d, rng);
    bb.time_b1 = Mat::Zero(1, d);
    bb.time_w2 = init_weight(d, d, rng);
    bb.time_b2 = Mat::Zero(1, d);
    bb.in_w = init_weight(cfg.pose_dim, d, rng);
    bb.in_b = Mat::Zero(1, d);
    bb.out_w = init_weight(d, cfg.pose_dim, rng);
    bb.out_b = Mat::Zero(1, cfg.pose_dim);
    for (int e = 0; e < cfg.blocks; ++e) bb.blocks.push_back(init_block(d, cfg.ffn_dim, rng));
    s.null_text = 0.1 * rng.normal_mat(1, d);
    return s;
}

void add_cakey_layers(ModelState& state, Rng& rng) {
    if (state.has_cakey()) throw ConfigError("cakey layers already present");
    const ModelConfig& c = state.cfg;
    const int d = c.latent_dim;
    int in_dim = d;  // keyframe-value projection
    if (c.cakey_flags.use_time_emb) in_dim += d;
    if (c.cakey_flags.adaptive) in_dim += d;
    CaKeyParams ck;
    for (int e = 0; e < c.blocks; ++e) {
        CaKeyLayerParams l;
        l.key_w = init_weight(c.pose_dim, d, rng);
        l.key_b = Mat::Zero(1, d);
        l.f_w1 = init_weight(in_dim, c.cakey_hidden, rng);
        l.f_b1 = Mat::Zero(1, c.cakey_hidden);
        l.f_w2 = Mat::Zero(c.cakey_hidden, d);  // zero-init: gamma == 1 at start
        l.f_b2 = Mat::Zero(1, d);
        l.h_w1 = init_weight(in_dim, c.cakey_hidden, rng);
        l.h_b1 = Mat::Zero(1, c.cakey_hidden);
        l.h_w2 = Mat::Zero(c.cakey_hidden, d);  // zero-init: beta == 0 at start
        l.h_b2 = Mat::Zero(1, d);
        ck.layers.push_back(std::move(l));
    }
    state.cakey = std::move(ck);
}

void add_scene_layers(ModelState& state, Rng& rng) {
    if (state.has_scene()) throw ConfigError("scene layers already present");
    const ModelConfig& c = state.cfg;
    const int d = c.latent_dim;
    const int vd = c.vit_dim;
    const int p3 = c.patch_size * c.patch_size * c.patch_size;
    SceneCondParams sc;
    sc.vit.patch_w = init_weight(p3, vd, rng);
    sc.vit.patch_b = Mat::Zero(1, vd);
    sc.vit.pos = 0.1 * rng.normal_mat(c.patch_count(), vd);
    for (int e = 0; e < c.vit_layers; ++e)
        sc.vit.blocks.push_back(init_block(vd, 4 * vd, rng));
    sc.vit.out_ln_g = Mat::Ones(1, vd);
    sc.vit.out_ln_b = Mat::Zero(1, vd);
    for (int e = 0; e < c.blocks; ++e) {
        CrossAttnParams x;
        x.lnq_g = Mat::Ones(1, d);
        x.lnq_b = Mat::Zero(1, d);
        x.lnkv_g = Mat::Ones(1, vd);
        x.lnkv_b = Mat::Zero(1, vd);
        x.wq = init_weight(d, d, rng);
        x.bq = Mat::Zero(1, d);
        x.wk = init_weight(vd, d, rng);
        x.bk = Mat::Zero(1, d);
        x.wv = init_weight(vd, d, rng);
        x.bv = Mat::Zero(1, d);
        x.wo = Mat::Zero(d, d);  // zero-init: scene layers start as identity
        x.bo = Mat::Zero(1, d);
        sc.cross.push_back(std::move(x));
    }
    state.scenecond = std::move(sc);
    state.null_scene = 0.1 * rng.normal_mat(1, vd);
}

namespace {

void collect_block(const std::string& prefix, BlockParams& b,
                   std::vector<std::pair<std::string, Mat*>>& out) {
    out.emplace_back(prefix + ".ln1_g", &b.ln1_g);
    out.emplace_back(prefix + ".ln1_b", &b.ln1_b);
    out.emplace_back(prefix + ".wq", &b.attn.wq);
    out.emplace_back(prefix + ".bq", &b.attn.bq);
    out.emplace_back(prefix + ".wk", &b.attn.wk);
    out.emplace_back(prefix + ".bk", &b.attn.bk);
    out.emplace_back(prefix + ".wv", &b.attn.wv);
    out.emplace_back(prefix + ".bv", &b.attn.bv);
    out.emplace_back(prefix + ".wo", &b.attn.wo);
    out.emplace_back(prefix + ".bo", &b.attn.bo);
    out.emplace_back(prefix + ".ln2_g", &b.ln2_g);
    out.emplace_back(prefix + ".ln2_b", &b.ln2_b);
    out.emplace_back(prefix + ".ff_w1", &b.ff_w1);
    out.emplace_back(prefix + ".ff_b1", &b.ff_b1);
    out.emplace_back(prefix + ".ff_w2", &b.ff_w2);
    out.emplace_back(prefix + ".ff_b2", &b.ff_b2);
}

}  // namespace

std::vector<std::pair<std::string, Mat*>> collect_params(ModelState& s,
                                                         const std::string& group) {
    std::vector<std::pair<std::string, Mat*>> out;
    if (group == "backbone") {
        BackboneParams& bb = s.backbone;
        out.emplace_back("label_embed", &bb.label_embed);
        out.emplace_back("time_w1", &bb.time_w1);
        out.emplace_back("time_b1", &bb.time_b1);
        out.emplace_back("time_w2", &bb.time_w2);
        out.emplace_back("time_b2", &bb.time_b2);
        out.emplace_back("in_w", &bb.in_w);
        out.emplace_back("in_b", &bb.in_b);
        out.emplace_back("out_w", &bb.out_w);
        out.emplace_back("out_b", &bb.out_b);
        for (size_t e = 0; e < bb.blocks.size(); ++e)
            collect_block("block" + std::to_string(e), bb.blocks[e], out);
    } else if (group == "cakey") {
        if (!s.cakey) return out;
        for (size_t e = 0; e < s.cakey->layers.size(); ++e) {
            CaKeyLayerParams& l = s.cakey->layers[e];
            std::string p = "cakey" + std::to_string(e);
            out.emplace_back(p + ".key_w", &l.key_w);
            out.emplace_back(p + ".key_b", &l.key_b);
            out.emplace_back(p + ".f_w1", &l.f_w1);
            out.emplace_back(p + ".f_b1", &l.f_b1);
            out.emplace_back(p + ".f_w2", &l.f_w2);
            out.emplace_back(p + ".f_b2", &l.f_b2);
            out.emplace_back(p + ".h_w1", &l.h_w1);
            out.emplace_back(p + ".h_b1", &l.h_b1);
            out.emplace_back(p + ".h_w2", &l.h_w2);
            out.emplace_back(p + ".h_b2", &l.h_b2);
        }
    } else if (group == "scenecond") {
        if (!s.scenecond) return out;
        VitParams& v = s.scenecond->vit;
        out.emplace_back("vit.patch_w", &v.patch_w);
        out.emplace_back("vit.patch_b", &v.patch_b);
        out.emplace_back("vit.pos", &v.pos);
        for (size_t e = 0; e < v.blocks.size(); ++e)
            collect_block("vit.block" + std::to_string(e), v.blocks[e], out);
        out.emplace_back("vit.out_ln_g", &v.out_ln_g);
        out.emplace_back("vit.out_ln_b", &v.out_ln_b);
        for (size_t e = 0; e < s.scenecond->cross.size(); ++e) {
            CrossAttnParams& x = s.scenecond->cross[e];
            std::string p = "cross" + std::to_string(e);
            out.emplace_back(p + ".lnq_g", &x.lnq_g);
            out.emplace_back(p + ".lnq_b", &x.lnq_b);
            out.emplace_back(p + ".lnkv_g", &x.lnkv_g);
            out.emplace_back(p + ".lnkv_b", &x.lnkv_b);
            out.emplace_back(p + ".wq", &x.wq);
            out.emplace_back(p + ".bq", &x.bq);
            out.emplace_back(p + ".wk", &x.wk);
            out.emplace_back(p + ".bk", &x.bk);
            out.emplace_back(p + ".wv", &x.wv);
            out.emplace_back(p + ".bv", &x.bv);
            out.emplace_back(p + ".wo", &x.wo);
            out.emplace_back(p + ".bo", &x.bo);
        }
    } else if (group == "nulls") {
        out.emplace_back("null_text", &s.null_text);
        if (s.null_scene.size() > 0) out.emplace_back("null_scene", &s.null_scene);
    } else {
        throw ConfigError("unknown parameter group '" + group + "'");
    }
    return out;
}

std::vector<std::string> param_groups(const ModelState& s) {
    std::vector<std::string> g{"backbone"};
    if (s.cakey) g.push_back("cakey");
    if (s.scenecond) g.push_back("scenecond");
    g.push_back("nulls");
    return g;
}

uint64_t params_checksum(ModelState& s, const std::string& group) {
    uint64_t h = 0xcbf29ce484222325ull;
    for (auto& [name, m] : collect_params(s, group)) {
        h = fnv1a_str(name, h);
        h = fnv1a(m->data(), sizeof(double) * m->size(), h);
    }
    return h;
}

int64_t param_count(ModelState& s) {
    int64_t n = 0;
    for (const auto& g : param_groups(s))
        for (auto& [name, m] : collect_params(s, g)) n += m->size();
    return n;
}

void ParamBinder::bind_trainable(const std::vector<std::pair<std::string, Mat*>>& params) {
    for (auto& [name, m] : params) {
        nn::Var v = tape_.leaf(*m, true);
        bound_[m] = v;
        trainable_.emplace_back(m, v);
    }
}

nn::Var ParamBinder::operator()(const Mat& m) {
    auto it = bound_.find(&m);
    if (it != bound_.end()) return it->second;
    nn::Var v = tape_.leaf(m, false);
    bound_[&m] = v;
    return v;
}

std::vector<Mat> ParamBinder::take_grads() const {
    std::vector<Mat> out;
    out.reserve(trainable_.size());
    for (auto& [m, v] : trainable_) out.push_back(tape_.grad(v));
    return out;
}

Mat sinusoidal_positions(int count, int dim) {
    Mat pe = Mat::Zero(count, dim);
    for (int p = 0; p < count; ++p)
        for (int i = 0; i < dim / 2; ++i) {
            double freq = std::pow(10000.0, -2.0 * i / dim);
            pe(p, 2 * i) = std::sin(p * freq);
            pe(p, 2 * i + 1) = std::cos(p * freq);
        }
    return pe;
}

Mat timestep_embedding_table(int t, int dim) {
    Mat e = Mat::Zero(1, dim);
    for (int i = 0; i < dim / 2; ++i) {
        double freq = std::pow(10000.0, -2.0 * i / dim);
        e(0, 2 * i) = std::sin(t * freq);
        e(0, 2 * i + 1) = std::cos(t * freq);
    }
    return e;
}

namespace {

using nn::Tape;
using nn::Var;

Var linear(Tape& T, ParamBinder& P, Var x, const Mat& w, const Mat& b) {
    return T.add_rowvec(T.matmul(x, P(w)), P(b));
}

Var self_attention(Tape& T, ParamBinder& P, Var x, const AttnParams& a, int heads,
                   const std::vector<uint8_t>& key_active) {
    int d = static_cast<int>(T.val(x).cols());
    int hd = d / heads;
    double scl = 1.0 / std::sqrt(static_cast<double>(hd));
    Var q = linear(T, P, x, a.wq, a.bq);
    Var k = linear(T, P, x, a.wk, a.bk);
    Var v = linear(T, P, x, a.wv, a.bv);
    std::vector<Var> outs;
    for (int h = 0; h < heads; ++h) {
        Var qh = T.slice_cols(q, h * hd, hd);
        Var kh = T.slice_cols(k, h * hd, hd);
        Var vh = T.slice_cols(v, h * hd, hd);
        Var scores = T.scale(T.matmul_nt(qh, kh), scl);
        Var att = T.softmax_rows(scores, key_active);
        outs.push_back(T.matmul(att, vh));
    }
    Var cat = heads == 1 ? outs[0] : T.concat_cols(outs);
    return linear(T, P, cat, a.wo, a.bo);
}

Var transformer_block(Tape& T, ParamBinder& P, Var x, const BlockParams& b, int heads,
                      const std::vector<uint8_t>& key_active) {
    Var n1 = T.layer_norm(x, P(b.ln1_g), P(b.ln1_b));
    Var a = T.add(x, self_attention(T, P, n1, b.attn, heads, key_active));
    Var n2 = T.layer_norm(a, P(b.ln2_g), P(b.ln2_b));
    Var f = linear(T, P, T.silu(linear(T, P, n2, b.ff_w1, b.ff_b1)), b.ff_w2, b.ff_b2);
    return T.add(a, f);
}

// Affine modulation of keyframe latents from (keyframe values, timestep
// embedding, current activation), blended back so non-keyframe rows pass
// through bit-exactly.
Var cakey_layer(Tape& T, ParamBinder& P, Var a, const CaKeyLayerParams& l,
                const CaKeyFlags& flags, const Mat& x_masked_tok, Var temb,
                const std::vector<uint8_t>& mod_rows) {
    int rows = static_cast<int>(T.val(a).rows());
    Var xk = linear(T, P, T.leaf(x_masked_tok), l.key_w, l.key_b);
    std::vector<Var> parts{xk};
    if (flags.use_time_emb) parts.push_back(T.repeat_row(temb, rows));
    if (flags.adaptive) parts.push_back(a);
    Var in = parts.size() == 1 ? parts[0] : T.concat_cols(parts);
    Var dgam = linear(T, P, T.silu(linear(T, P, in, l.f_w1, l.f_b1)), l.f_w2, l.f_b2);
    Var beta = linear(T, P, T.silu(linear(T, P, in, l.h_w1, l.h_b1)), l.h_w2, l.h_b2);
    Var gamma = T.add_const(dgam, Mat::Ones(rows, T.val(dgam).cols()));
    Var ahat = T.add(T.mul(gamma, a), beta);
    return T.blend_rows(a, ahat, mod_rows);
}

Var cross_attention_layer(Tape& T, ParamBinder& P, Var h, Var s, const CrossAttnParams& x,
                          int heads, const std::vector<uint8_t>& active_rows) {
    int d = static_cast<int>(T.val(h).cols());
    int hd = d / heads;
    double scl = 1.0 / std::sqrt(static_cast<double>(hd));
    Var qn = T.layer_norm(h, P(x.lnq_g), P(x.lnq_b));
    Var kn = T.layer_norm(s, P(x.lnkv_g), P(x.lnkv_b));
    Var q = linear(T, P, qn, x.wq, x.bq);
    Var k = linear(T, P, kn, x.wk, x.bk);
    Var v = linear(T, P, s, x.wv, x.bv);
    std::vector<uint8_t> all_keys(T.val(s).rows(), 1);
    std::vector<Var> outs;
    for (int hh = 0; hh < heads; ++hh) {
        Var qh = T.slice_cols(q, hh * hd, hd);
        Var kh = T.slice_cols(k, hh * hd, hd);
        Var vh = T.slice_cols(v, hh * hd, hd);
        Var att = T.softmax_rows(T.scale(T.matmul_nt(qh, kh), scl), all_keys);
        outs.push_back(T.matmul(att, vh));
    }
    Var cat = heads == 1 ? outs[0] : T.concat_cols(outs);
    Var proj = linear(T, P, cat, x.wo, x.bo);
    return T.blend_rows(h, T.add(h, proj), active_rows);
}

Var vit_forward(Tape& T, ParamBinder& P, const ModelState& s, const VoxelGrid& grid) {
    const ModelConfig& c = s.cfg;
    if (grid.dims != c.vol_dims)
        throw ConfigError("vit_encode: grid dims do not match model config");
    for (int a = 0; a < 3; ++a)
        if (grid.dims[a] % c.patch_size != 0)
            throw ConfigError("vit_encode: dims not divisible by patch size");
    const int ps = c.patch_size;
    const int P_n = c.patch_count();
    const int p3 = ps * ps * ps;
    Mat patches(P_n, p3);
    int per_axis_x = grid.dims[0] / ps, per_axis_y = grid.dims[1] / ps;
    for (int pi = 0; pi < P_n; ++pi) {
        int px = pi % per_axis_x;
        int py = (pi / per_axis_x) % per_axis_y;
        int pz = pi / (per_axis_x * per_axis_y);
        int k = 0;
        for (int z = 0; z < ps; ++z)
            for (int y = 0; y < ps; ++y)
                for (int x = 0; x < ps; ++x)
                    patches(pi, k++) =
                        grid.occupancy[grid.index(px * ps + x, py * ps + y, pz * ps + z)] ? 1.0
                                                                                          : 0.0;
    }
    const VitParams& vp = s.scenecond->vit;
    Var tok = T.add(linear(T, P, T.leaf(patches), vp.patch_w, vp.patch_b), P(vp.pos));
    std::vector<uint8_t> all(P_n, 1);
    for (const BlockParams& b : vp.blocks) tok = transformer_block(T, P, tok, b, c.vit_heads, all);
    return T.layer_norm(tok, P(vp.out_ln_g), P(vp.out_ln_b));
}

}  // namespace

nn::Var model_forward(Tape& T, ParamBinder& P, const ModelState& s, const Mat& x_t, int t,
                      const Condition& cond) {
    const ModelConfig& c = s.cfg;
    const int N = static_cast<int>(x_t.rows());
    if (x_t.cols() != c.pose_dim) throw InvalidInputError("model_forward: pose dim mismatch");
    if (cond.valid_length < 1 || cond.valid_length > N)
        throw InvalidInputError("model_forward: bad valid_length");
    if (cond.label && (*cond.label < 0 || *cond.label >= c.n_labels))
        throw InvalidInputError("model_forward: label id out of range");
    if (cond.mask && cond.mask->size() != N)
        throw InvalidInputError("model_forward: keyframe mask length != N");
    if (cond.mask && !cond.mask->all_zero() && !cond.keyvals_norm)
        throw InvalidInputError("model_forward: keyframe mask given without values");
    if (cond.scene_grid && cond.scene_tokens)
        throw InvalidInputError("model_forward: give either scene grid or tokens, not both");
    if ((cond.scene_grid || cond.scene_tokens) && !s.has_scene())
        throw InvalidInputError("model_forward: scene given but model has no scene layers");

    // timestep embedding -> MLP
    Var temb_sin = T.leaf(timestep_embedding_table(t, c.latent_dim));
    Var temb = linear(T, P, T.silu(linear(T, P, temb_sin, s.backbone.time_w1, s.backbone.time_b1)),
                      s.backbone.time_w2, s.backbone.time_b2);

    // condition token: label (or null-text) plus timestep embedding
    Var text_tok = cond.label ? T.slice_rows(P(s.backbone.label_embed), *cond.label, 1)
                              : P(s.null_text);
    Var tok0 = T.add(text_tok, temb);

    Var xin = linear(T, P, T.leaf(x_t), s.backbone.in_w, s.backbone.in_b);
    Var h = T.concat_rows({tok0, xin});
    h = T.add_const(h, sinusoidal_positions(N + 1, c.latent_dim));

    // self-attention keys: condition token + valid frames
    std::vector<uint8_t> key_active(N + 1, 0);
    key_active[0] = 1;
    for (int i = 0; i < cond.valid_length; ++i) key_active[1 + i] = 1;

    // rows eligible for modulation / scene conditioning (frame tokens only)
    std::vector<uint8_t> frame_rows(N + 1, 1);
    frame_rows[0] = 0;
    std::vector<uint8_t> active_rows(N + 1, 0);
    for (int i = 0; i < cond.valid_length; ++i) active_rows[1 + i] = 1;

    const bool sparse = c.cakey_flags.sparse;
    bool run_cakey = s.has_cakey() && cond.mask != nullptr;
    if (run_cakey && sparse && cond.mask->all_zero()) run_cakey = false;  // exact no-op

    Mat x_masked_tok;
    std::vector<uint8_t> mod_rows;
    if (run_cakey) {
        x_masked_tok = Mat::Zero(N + 1, c.pose_dim);
        mod_rows.assign(N + 1, 0);
        for (int i = 0; i < N; ++i) {
            if (cond.mask->bits[i]) {
                x_masked_tok.row(1 + i) = cond.keyvals_norm->row(i);
                mod_rows[1 + i] = 1;
            }
        }
        if (!sparse) mod_rows = frame_rows;  // global modulation ablation
    }

    Var scene_tok;  // patch tokens (P x vit_dim) or the null-scene token (1 x vit_dim)
    if (s.has_scene()) {
        if (cond.scene_tokens)
            scene_tok = T.leaf(*cond.scene_tokens);
        else if (cond.scene_grid)
            scene_tok = vit_forward(T, P, s, *cond.scene_grid);
        else
            scene_tok = P(s.null_scene);
    }

    for (int e = 0; e < c.blocks; ++e) {
        const BlockParams& b = s.backbone.blocks[e];
        Var n1 = T.layer_norm(h, P(b.ln1_g), P(b.ln1_b));
        Var a = T.add(h, self_attention(T, P, n1, b.attn, c.heads, key_active));
        if (run_cakey)
            a = cakey_layer(T, P, a, s.cakey->layers[e], c.cakey_flags, x_masked_tok, temb,
                            mod_rows);
        if (s.has_scene())
            a = cross_attention_layer(T, P, a, scene_tok, s.scenecond->cross[e], c.heads,
                                      active_rows);
        Var n2 = T.layer_norm(a, P(b.ln2_g), P(b.ln2_b));
        Var f = linear(T, P, T.silu(linear(T, P, n2, b.ff_w1, b.ff_b1)), b.ff_w2, b.ff_b2);
        h = T.add(a, f);
    }

    Var frames = T.slice_rows(h, 1, N);
    return linear(T, P, frames, s.backbone.out_w, s.backbone.out_b);
}

Mat denoise_predict(const ModelState& state, const Mat& x_t, int t, const Condition& cond) {
    nn::Tape tape;
    ParamBinder binder(tape);
    nn::Var out = model_forward(tape, binder, state, x_t, t, cond);
    return tape.val(out);
}

Mat vit_encode(const ModelState& state, const VoxelGrid& grid) {
    if (!state.has_scene()) throw ConfigError("vit_encode: model has no scene layers");
    nn::Tape tape;
    ParamBinder binder(tape);
    nn::Var out = vit_forward(tape, binder, state, grid);
    return tape.val(out);
}

}  // namespace sama
