#include <doctest.h>

#include <Eigen/Core>
#include <cmath>

#include "orbitfeat/distributions.hpp"
#include "orbitfeat/groups.hpp"
#include "test_util.hpp"

using namespace orbitfeat;
using testutil::blob_image;
using testutil::randv;

namespace {
constexpr double kPi = 3.1415926535897932384626433832795;

Eigen::Vector2d act_on_point(const GroupElement& g, const Eigen::Vector2d& p) {
    Eigen::Matrix2d a;
    Eigen::Vector2d b;
    g.as_affine(a, b);
    return a * p + b;
}
}  // namespace

TEST_CASE("apply identity returns the input on every layout") {
    Rng rng(1);
    const GroupElement e = GroupElement::identity();
    const Eigen::VectorXd v = randv(rng, 7);
    CHECK(apply(e, v, InputLayout::vector(7)) == v);
    const Eigen::VectorXd img = blob_image(rng, 8);
    CHECK(apply(e, img, InputLayout::image(8, 8)) == img);
    const Eigen::VectorXd sym = testutil::sym_sample(rng, 4);
    CHECK(apply(e, sym, InputLayout::symmetric_matrix(4)) == sym);
}

TEST_CASE("rotation has unit jacobian so no intensity scaling happens") {
    Rng rng(2);
    const Eigen::VectorXd img = blob_image(rng, 16);
    const GroupElement g = GroupElement::rotation(0.7);
    CHECK(jacobian_det(g) == 1.0);
    const Eigen::VectorXd with = apply(g, img, InputLayout::image(16, 16), true);
    const Eigen::VectorXd without = apply(g, img, InputLayout::image(16, 16), false);
    CHECK(with == without);
}

TEST_CASE("unitary-normalized scaling preserves the image norm within 2 percent") {
    const double s = 1.3;
    const GroupElement g = GroupElement::scaling(s);

    // base resolution
    Rng rng_img(77);
    const int size = 32;
    const Eigen::VectorXd img = blob_image(rng_img, size);
    const Eigen::VectorXd out = apply(g, img, InputLayout::image(size, size), true);
    CHECK(std::abs(out.norm() - img.norm()) / img.norm() <= 0.02);

    // dense-resampling oracle: the same check at 4x resolution converges
    // toward exact norm preservation, pinning the 2% gap on discretization
    Rng rng_img4(77);
    const int size4 = 4 * size;
    const Eigen::VectorXd img4 = blob_image(rng_img4, size4);
    const Eigen::VectorXd out4 = apply(g, img4, InputLayout::image(size4, size4), true);
    CHECK(std::abs(out4.norm() - img4.norm()) / img4.norm() <= 0.005);
}

TEST_CASE("rotations compose by adding angles mod 2 pi") {
    const GroupElement g = compose(GroupElement::rotation(5.0), GroupElement::rotation(2.5));
    CHECK(g.kind() == GroupKind::Rotation2D);
    CHECK(g.theta() == doctest::Approx(wrap_angle(7.5)).epsilon(1e-14));
}

TEST_CASE("composing a permutation with its inverse gives the identity permutation") {
    Rng rng(4);
    for (int t = 0; t < 10; ++t) {
        const auto p = sample(GroupDistribution::uniform_permutation(9), 1, rng.next_u64())[0];
        const GroupElement e = compose(p, invert(p));
        for (int i = 0; i < 9; ++i) CHECK(e.perm()[static_cast<std::size_t>(i)] == i);
    }
}

TEST_CASE("affine composition matches sequential application on random points") {
    Rng rng(5);
    for (int t = 0; t < 10; ++t) {
        const Eigen::Matrix2d a1 = testutil::randn(rng, 2, 2) + 2.0 * Eigen::Matrix2d::Identity();
        const Eigen::Matrix2d a2 = testutil::randn(rng, 2, 2) + 2.0 * Eigen::Matrix2d::Identity();
        const Eigen::Vector2d b1 = randv(rng, 2), b2 = randv(rng, 2);
        const GroupElement g = GroupElement::affine(a1, b1);
        const GroupElement h = GroupElement::affine(a2, b2);
        const GroupElement gh = compose(g, h);
        CHECK((gh.matrix() - a1 * a2).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK((gh.offset() - (a1 * b2 + b1)).cwiseAbs().maxCoeff() <= 1e-12);
        for (int k = 0; k < 100; ++k) {
            const Eigen::Vector2d p = randv(rng, 2);
            const Eigen::Vector2d direct = act_on_point(gh, p);
            const Eigen::Vector2d sequential = act_on_point(g, act_on_point(h, p));
            CHECK((direct - sequential).cwiseAbs().maxCoeff() <= 1e-10);
        }
    }
}

TEST_CASE("invert on each parameterized kind") {
    CHECK(invert(GroupElement::rotation(0.4)).theta() ==
          doctest::Approx(wrap_angle(-0.4)).epsilon(1e-14));
    const auto pinv = invert(GroupElement::permutation({2, 0, 1}));
    CHECK(pinv.perm() == std::vector<int>{1, 2, 0});
    CHECK(invert(GroupElement::scaling(4.0)).scale() == doctest::Approx(0.25));
    const auto tinv = invert(GroupElement::translation(1.5, -2.0));
    CHECK(tinv.dx() == -1.5);
    CHECK(tinv.dy() == 2.0);

    Rng rng(6);
    for (int t = 0; t < 20; ++t) {
        const Eigen::Matrix2d a = testutil::randn(rng, 2, 2) + 2.0 * Eigen::Matrix2d::Identity();
        const Eigen::Vector2d b = randv(rng, 2);
        const GroupElement g = GroupElement::affine(a, b);
        const GroupElement gi = compose(g, invert(g));
        CHECK((gi.matrix() - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(gi.offset().cwiseAbs().maxCoeff() <= 1e-12);
    }
}

TEST_CASE("jacobian determinants") {
    CHECK(jacobian_det(GroupElement::rotation(1.1)) == 1.0);
    CHECK(jacobian_det(GroupElement::translation(3, 4)) == 1.0);
    CHECK(jacobian_det(GroupElement::permutation({1, 0})) == 1.0);
    CHECK(jacobian_det(GroupElement::scaling(2.0)) == doctest::Approx(4.0));
    Eigen::Matrix2d a;
    a << 2, 0, 0, 3;
    CHECK(jacobian_det(GroupElement::affine(a, Eigen::Vector2d::Zero())) == doctest::Approx(6.0));
}

TEST_CASE("jacobian is multiplicative under composition") {
    Rng rng(7);
    for (int t = 0; t < 30; ++t) {
        const Eigen::Matrix2d a1 = testutil::randn(rng, 2, 2) + 2.0 * Eigen::Matrix2d::Identity();
        const GroupElement g = GroupElement::affine(a1, randv(rng, 2));
        const GroupElement h = GroupElement::scaling(std::exp(0.3 * rng.gaussian()));
        const double lhs = jacobian_det(compose(g, h));
        const double rhs = jacobian_det(g) * jacobian_det(h);
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::abs(rhs));
    }
}

TEST_CASE("permutation action preserves inner products to machine precision") {
    Rng rng(8);
    const auto vec_layout = InputLayout::vector(20);
    const auto sym_layout = InputLayout::symmetric_matrix(6);
    for (int t = 0; t < 50; ++t) {
        const auto g = sample(GroupDistribution::uniform_permutation(20), 1, rng.next_u64())[0];
        const Eigen::VectorXd x = randv(rng, 20), y = randv(rng, 20);
        CHECK(std::abs(apply(g, x, vec_layout).dot(apply(g, y, vec_layout)) - x.dot(y)) <= 1e-12);

        const auto q = sample(GroupDistribution::uniform_permutation(6), 1, rng.next_u64())[0];
        const Eigen::VectorXd a = testutil::sym_sample(rng, 6);
        const Eigen::VectorXd b = testutil::sym_sample(rng, 6);
        CHECK(std::abs(apply(q, a, sym_layout).dot(apply(q, b, sym_layout)) - a.dot(b)) <= 1e-12);
    }
}

TEST_CASE("rotation approximately preserves normalized inner products on smooth images") {
    Rng rng(9);
    const int size = 24;
    const auto layout = InputLayout::image(size, size);
    for (int t = 0; t < 8; ++t) {
        const Eigen::VectorXd i1 = blob_image(rng, size);
        const Eigen::VectorXd i2 = blob_image(rng, size);
        const GroupElement g = GroupElement::rotation(rng.uniform(0.0, 2.0 * kPi));
        const double before = i1.dot(i2);
        const double after = apply(g, i1, layout).dot(apply(g, i2, layout));
        CHECK(std::abs(after - before) / (i1.norm() * i2.norm()) <= 0.03);
    }
}

TEST_CASE("manual jacobian scaling matches unitary_normalize bit-exactly") {
    Rng rng(10);
    const int size = 16;
    const auto layout = InputLayout::image(size, size);
    const Eigen::VectorXd img = blob_image(rng, size);
    Eigen::Matrix2d a;
    a << 1.2, 0.1, -0.2, 0.9;
    for (const GroupElement& g :
         {GroupElement::scaling(1.4), GroupElement::affine(a, Eigen::Vector2d(0.5, -0.3))}) {
        Eigen::VectorXd manual = apply(g, img, layout, false);
        manual *= 1.0 / std::sqrt(jacobian_det(g));
        CHECK(manual == apply(g, img, layout, true));
    }
}

TEST_CASE("continuous round trip stays within the interpolation budget") {
    Rng rng(11);
    const int size = 32;
    const auto layout = InputLayout::image(size, size);
    for (const GroupElement& g : {GroupElement::rotation(0.6), GroupElement::scaling(1.2),
                                  GroupElement::translation(1.7, -0.8)}) {
        const Eigen::VectorXd img = blob_image(rng, size, 3, 0.10, 0.08, 0.11);
        const Eigen::VectorXd back = apply(invert(g), apply(g, img, layout), layout);
        const double linf = (back - img).cwiseAbs().maxCoeff();
        CHECK(linf <= 0.05 * img.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("angles normalize into [0, 2 pi)") {
    CHECK(GroupElement::rotation(-0.5).theta() == doctest::Approx(2 * kPi - 0.5));
    CHECK(GroupElement::rotation(2 * kPi).theta() == doctest::Approx(0.0));
    CHECK(GroupElement::rotation(7.0).theta() == doctest::Approx(7.0 - 2 * kPi));
}

TEST_CASE("invalid constructions and incompatible applications throw") {
    CHECK_THROWS_AS(GroupElement::permutation({0, 0, 1}), std::invalid_argument);
    CHECK_THROWS_AS(GroupElement::permutation({0, 2}), std::invalid_argument);
    CHECK_THROWS_AS(GroupElement::scaling(0.0), std::invalid_argument);
    CHECK_THROWS_AS(GroupElement::scaling(-1.0), std::invalid_argument);
    Eigen::Matrix2d singular;
    singular << 1, 2, 2, 4;
    CHECK_THROWS_AS(GroupElement::affine(singular, Eigen::Vector2d::Zero()),
                    std::invalid_argument);

    Rng rng(12);
    const Eigen::VectorXd img = blob_image(rng, 8);
    // permutation on an image layout
    CHECK_THROWS_AS(apply(GroupElement::permutation({1, 0}), img, InputLayout::image(8, 8)),
                    std::invalid_argument);
    // geometric kind on a vector layout
    CHECK_THROWS_AS(apply(GroupElement::rotation(0.3), randv(rng, 9), InputLayout::vector(9)),
                    std::invalid_argument);
    // length mismatch
    CHECK_THROWS_AS(apply(GroupElement::identity(), randv(rng, 5), InputLayout::vector(6)),
                    std::invalid_argument);
    // permutation size vs layout mismatch
    CHECK_THROWS_AS(apply(GroupElement::permutation({1, 0}), randv(rng, 6),
                          InputLayout::vector(6)),
                    std::invalid_argument);
    // permutations only compose with permutations
    CHECK_THROWS_AS(compose(GroupElement::permutation({1, 0}), GroupElement::rotation(0.2)),
                    std::invalid_argument);
}

TEST_CASE("group elements serialize to json and back") {
    Rng rng(13);
    Eigen::Matrix2d a;
    a << 1.5, 0.25, -0.5, 2.0;
    const std::vector<GroupElement> cases = {
        GroupElement::identity(),
        GroupElement::permutation({3, 1, 0, 2}),
        GroupElement::rotation(1.25),
        GroupElement::translation(0.5, -1.5),
        GroupElement::scaling(2.5),
        GroupElement::affine(a, Eigen::Vector2d(0.1, 0.2)),
    };
    for (const auto& g : cases) {
        const nlohmann::json j = g;
        const auto back = j.get<GroupElement>();
        CHECK(back.kind() == g.kind());
        if (g.kind() == GroupKind::Permutation) {
            const Eigen::VectorXd x = randv(rng, 4);
            CHECK(apply(back, x, InputLayout::vector(4)) == apply(g, x, InputLayout::vector(4)));
        } else if (g.is_geometric()) {
            Eigen::Matrix2d ma, mb;
            Eigen::Vector2d va, vb;
            g.as_affine(ma, va);
            back.as_affine(mb, vb);
            CHECK((ma - mb).cwiseAbs().maxCoeff() == 0.0);
            CHECK((va - vb).cwiseAbs().maxCoeff() == 0.0);
        }
    }
    CHECK_THROWS(nlohmann::json{{"kind", "spin"}}.get<GroupElement>());
}
