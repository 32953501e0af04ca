#include "sama/motion.hpp"

namespace sama {

int KeyframeMask::count() const {
    int c = 0;
    for (uint8_t b : bits) c += b;
    return c;
}

std::vector<int> KeyframeMask::indices() const {
    std::vector<int> idx;
    for (int i = 0; i < size(); ++i)
        if (bits[i]) idx.push_back(i);
    return idx;
}

bool KeyframeMask::all_zero() const {
    for (uint8_t b : bits)
        if (b) return false;
    return true;
}

KeyframeMask KeyframeMask::endpoints(int n) {
    KeyframeMask m = zeros(n);
    if (n > 0) m.bits[0] = 1;
    if (n > 1) m.bits[n - 1] = 1;
    return m;
}

KeyframeMask sample_keyframe_mask(int n_frames, int stride, Rng& rng) {
    if (n_frames < 2) throw InvalidInputError("sample_keyframe_mask: need n_frames >= 2");
    if (stride < 1) throw InvalidInputError("sample_keyframe_mask: need stride >= 1");
    KeyframeMask m = KeyframeMask::zeros(n_frames);
    m.bits[0] = 1;
    m.bits[n_frames - 1] = 1;
    int phase = rng.uniform_int(1, stride);
    for (int i = stride + phase; i <= n_frames - 2; i += stride) m.bits[i] = 1;
    return m;
}

MotionSequence relative_to_global(const MotionSequence& seq) {
    MotionSequence out = seq;
    const int n = seq.valid_length;
    if (n == 0) return out;
    double x = 0.0, z = 0.0, yaw = 0.0;
    out.frames(0, 0) = x;
    out.frames(0, 1) = z;
    out.frames(0, 2) = yaw;
    for (int i = 1; i < n; ++i) {
        double dx = seq.frames(i, 0), dz = seq.frames(i, 1), dyaw = seq.frames(i, 2);
        // step expressed in the previous frame's heading
        double c = std::cos(yaw), s = std::sin(yaw);
        x += c * dx + s * dz;
        z += -s * dx + c * dz;
        yaw += dyaw;
        out.frames(i, 0) = x;
        out.frames(i, 1) = z;
        out.frames(i, 2) = yaw;
    }
    return out;
}

MotionSequence global_to_relative(const MotionSequence& seq) {
    MotionSequence out = seq;
    const int n = seq.valid_length;
    if (n == 0) return out;
    out.frames(0, 0) = 0.0;
    out.frames(0, 1) = 0.0;
    out.frames(0, 2) = 0.0;
    for (int i = 1; i < n; ++i) {
        double px = seq.frames(i - 1, 0), pz = seq.frames(i - 1, 1), pyaw = seq.frames(i - 1, 2);
        double gx = seq.frames(i, 0) - px, gz = seq.frames(i, 1) - pz;
        double c = std::cos(pyaw), s = std::sin(pyaw);
        out.frames(i, 0) = c * gx - s * gz;
        out.frames(i, 1) = s * gx + c * gz;
        out.frames(i, 2) = seq.frames(i, 2) - pyaw;
    }
    return out;
}

}  // namespace sama
