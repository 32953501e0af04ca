#pragma once

#include <vector>

#include "sama/common.hpp"
#include "sama/rng.hpp"
#include "sama/skeleton.hpp"

namespace sama {

// Action vocabulary; the generator in motion_generator.cpp implements these.
enum class ActionLabel : int {
    Idle = 0,
    WalkForward = 1,
    TurnLeft = 2,
    TurnRight = 3,
    Circle = 4,
    Wave = 5,
};
constexpr int kNumLabels = 6;

inline const char* label_name(int id) {
    static const char* names[kNumLabels] = {"idle",      "walk-forward", "turn-left",
                                            "turn-right", "circle",       "wave"};
    return (id >= 0 && id < kNumLabels) ? names[id] : "?";
}

// N x D frame matrix with global root channels. Frames at index >=
// valid_length are zero-filled padding.
struct MotionSequence {
    Mat frames;
    int fps = 20;
    int label = 0;
    int valid_length = 0;
    // auxiliary per-frame foot-contact flag from the generator (not part of
    // D, not serialized); empty when unknown
    std::vector<uint8_t> contact;

    int n_frames() const { return static_cast<int>(frames.rows()); }
    int dim() const { return static_cast<int>(frames.cols()); }
    Mat valid() const { return frames.topRows(valid_length); }
};

struct KeyframeMask {
    std::vector<uint8_t> bits;

    int size() const { return static_cast<int>(bits.size()); }
    int count() const;
    std::vector<int> indices() const;
    bool all_zero() const;
    static KeyframeMask zeros(int n) { return KeyframeMask{std::vector<uint8_t>(n, 0)}; }
    static KeyframeMask endpoints(int n);
};

// Keyframe mask with forced endpoints and interior keyframes every s_k
// frames from a random phase; the first interior keyframe lands in
// (s_k, 2*s_k], which reproduces the expected ~ (N - s_k)/s_k interior count
// and leaves endpoint-only masks almost surely when s_k >= N.
KeyframeMask sample_keyframe_mask(int n_frames, int stride, Rng& rng);

// Root-channel conversion between per-frame deltas and global values.
// Relative form: frame i>=1 stores (dx, dz, dyaw) from frame i-1, expressed
// in frame i-1's heading; frame 0 root channels are zero by convention (the
// sequence starts at the origin with yaw 0). Height stays absolute.
MotionSequence relative_to_global(const MotionSequence& seq);
MotionSequence global_to_relative(const MotionSequence& seq);

}  // namespace sama
