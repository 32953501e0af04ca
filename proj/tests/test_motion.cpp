#include <doctest.h>

#include "sama/motion.hpp"
#include "sama/rng.hpp"
#include "sama/skeleton.hpp"

using namespace sama;

TEST_CASE("fk zero pose stacks joints vertically") {
    Skeleton skel = Skeleton::default_five_joint();
    Vec pose = Vec::Zero(skel.pose_dim());
    pose[3] = skel.root_height_standing();
    Mat pos = forward_kinematics(skel, pose);
    // every joint on the root's vertical line
    for (int j = 0; j < skel.joint_count(); ++j) {
        CHECK(pos(j, 0) == doctest::Approx(0.0));
        CHECK(pos(j, 2) == doctest::Approx(0.0));
    }
    CHECK(pos(0, 1) == doctest::Approx(0.95));
    CHECK(pos(1, 1) == doctest::Approx(0.95 + 0.30));
    CHECK(pos(2, 1) == doctest::Approx(0.95 + 0.50));
    CHECK(pos(3, 1) == doctest::Approx(0.95 - 0.52));
    CHECK(pos(4, 1) == doctest::Approx(0.95 - 1.04));
}

TEST_CASE("fk two-link chain quarter turn") {
    // child bone along +z, rotated pi/2 about y -> offset lands on +x
    std::vector<Joint> joints;
    joints.push_back({"root", -1, 0.0, Vec3(0, 1, 0)});
    joints.push_back({"child", 0, 1.0, Vec3(0, 0, 1)});
    Skeleton skel(std::move(joints), 1.0);
    Vec pose = Vec::Zero(skel.pose_dim());
    pose[Skeleton::angle_channel(1) + 1] = kPi / 2.0;  // ry
    Mat pos = forward_kinematics(skel, pose);
    Vec3 offset = (pos.row(1) - pos.row(0)).transpose();
    CHECK(offset[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(offset[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(offset[2] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("fk jacobian matches central finite differences") {
    Skeleton skel = Skeleton::default_five_joint();
    Rng rng(42);
    const double eps = 1e-5;
    for (int trial = 0; trial < 20; ++trial) {
        Vec pose = 0.8 * rng.normal_vec(skel.pose_dim());
        pose[3] = 0.9 + 0.1 * rng.uniform();
        Mat jac = fk_jacobian(skel, pose);
        double max_rel = 0.0;
        for (int c = 0; c < skel.pose_dim(); ++c) {
            Vec pp = pose, pm = pose;
            pp[c] += eps;
            pm[c] -= eps;
            Mat fp = forward_kinematics(skel, pp);
            Mat fm = forward_kinematics(skel, pm);
            for (int j = 0; j < skel.joint_count(); ++j)
                for (int a = 0; a < 3; ++a) {
                    double fd = (fp(j, a) - fm(j, a)) / (2 * eps);
                    double an = jac(3 * j + a, c);
                    double denom = std::max(1.0, std::max(std::abs(fd), std::abs(an)));
                    max_rel = std::max(max_rel, std::abs(fd - an) / denom);
                }
        }
        CHECK(max_rel < 1e-4);
    }
}

TEST_CASE("fk rejects mismatched pose dims") {
    Skeleton skel = Skeleton::default_five_joint();
    Vec pose = Vec::Zero(skel.pose_dim() + 1);
    CHECK_THROWS_AS(forward_kinematics(skel, pose), ConfigError);
}

TEST_CASE("relative_to_global zero deltas stay at origin") {
    MotionSequence seq;
    seq.frames = Mat::Zero(8, 16);
    seq.valid_length = 8;
    MotionSequence g = relative_to_global(seq);
    CHECK(g.frames.leftCols(3).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("relative_to_global integrates a straight line") {
    MotionSequence seq;
    seq.frames = Mat::Zero(10, 16);
    seq.valid_length = 10;
    for (int i = 0; i < 10; ++i) seq.frames(i, 0) = 0.1;  // frame-0 delta is ignored
    MotionSequence g = relative_to_global(seq);
    for (int i = 0; i < 10; ++i) CHECK(g.frames(i, 0) == doctest::Approx(0.1 * i).epsilon(1e-12));
}

TEST_CASE("root conversion round trips") {
    Rng rng(7);
    MotionSequence rel;
    rel.frames = rng.normal_mat(32, 16) * 0.2;
    rel.valid_length = 32;
    rel.frames.row(0).head(3).setZero();  // relative form: frame 0 starts the sequence
    MotionSequence back = global_to_relative(relative_to_global(rel));
    CHECK((back.frames - rel.frames).cwiseAbs().maxCoeff() < 1e-6);

    // and the other direction, for sequences starting at the origin
    MotionSequence g = relative_to_global(rel);
    MotionSequence g2 = relative_to_global(global_to_relative(g));
    CHECK((g2.frames - g.frames).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("keyframe mask endpoints and bounds") {
    Rng rng(1);
    KeyframeMask m = sample_keyframe_mask(2, 5, rng);
    CHECK(m.bits == std::vector<uint8_t>{1, 1});
    CHECK_THROWS_AS(sample_keyframe_mask(1, 5, rng), InvalidInputError);
    CHECK_THROWS_AS(sample_keyframe_mask(10, 0, rng), InvalidInputError);

    for (int trial = 0; trial < 200; ++trial) {
        int n = rng.uniform_int(2, 80);
        int sk = rng.uniform_int(1, 30);
        KeyframeMask mm = sample_keyframe_mask(n, sk, rng);
        CHECK(mm.bits[0] == 1);
        CHECK(mm.bits[n - 1] == 1);
        for (uint8_t b : mm.bits) CHECK((b == 0 || b == 1));
    }
}

TEST_CASE("keyframe mask monte carlo count at stride 20") {
    Rng rng(1234);
    double total = 0.0;
    const int draws = 1000;
    for (int i = 0; i < draws; ++i) {
        KeyframeMask m = sample_keyframe_mask(196, 20, rng);
        total += m.count();
    }
    double mean = total / draws;
    CHECK(mean > 9.8);   // 10.8 +/- 1 window
    CHECK(mean < 11.8);
}

TEST_CASE("keyframe mask with stride >= n is endpoints-only") {
    Rng rng(5);
    int n = 50;
    int endpoint_only = 0;
    const int draws = 2000;
    for (int i = 0; i < draws; ++i) {
        KeyframeMask m = sample_keyframe_mask(n, n, rng);
        if (m.count() == 2) ++endpoint_only;
    }
    double p = static_cast<double>(endpoint_only) / draws;
    CHECK(p >= (n - 1.0) / n - 0.02);
}

TEST_CASE("temporal_diff basics and telescoping") {
    Mat pos(4, 6);
    pos.setConstant(3.0);
    Mat v = temporal_diff(pos);
    CHECK(v.cwiseAbs().maxCoeff() == 0.0);

    Mat lin(5, 3);
    for (int i = 0; i < 5; ++i) lin.row(i).setConstant(0.05 * i);
    Mat vl = temporal_diff(lin);
    CHECK((vl.array() - 0.05).abs().maxCoeff() < 1e-15);

    Rng rng(3);
    Mat r = rng.normal_mat(12, 9);
    Mat vr = temporal_diff(r);
    Mat rebuilt(12, 9);
    rebuilt.row(0) = r.row(0);
    for (int i = 1; i < 12; ++i) rebuilt.row(i) = rebuilt.row(i - 1) + vr.row(i - 1);
    CHECK((rebuilt - r).cwiseAbs().maxCoeff() < 1e-12);

    Mat one(1, 3);
    CHECK_THROWS_AS(temporal_diff(one), InvalidInputError);
}
