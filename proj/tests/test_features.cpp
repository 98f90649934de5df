#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "orbitfeat/features.hpp"
#include "orbitfeat/parallel.hpp"
#include "orbitfeat/serialize.hpp"
#include "test_util.hpp"

using namespace orbitfeat;
using testutil::blob_image;
using testutil::randn;
using testutil::randv;
using testutil::sym_batch;

namespace {

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return v[v.size() / 2];
}

}  // namespace

TEST_CASE("delta identity with one group sample is the classic cosine feature map") {
    Rng rng(1);
    const BaseKernel base(1.7);
    const auto layout = InputLayout::vector(9);
    const auto map = RFFeatureMap::build(base, GroupDistribution::delta_identity(), 32, 1, layout,
                                         RFVariant::RealCosine, TransferMode::DataSide, 5);
    const Eigen::VectorXd x = randv(rng, 9);
    const Eigen::VectorXd psi = map.transform_one(x);
    const double scale = std::sqrt(2.0 / 32.0);
    const Eigen::VectorXd expected =
        scale * ((map.templates() * x + map.phases()).array().cos()).matrix();
    CHECK((psi - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("template-side and data-side transfer agree for permutations") {
    Rng rng(2);
    const BaseKernel base(3.0);
    const auto layout = InputLayout::vector(12);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(12);
    const auto data_side = RFFeatureMap::build(base, dist, 128, 9, layout, RFVariant::RealCosine,
                                               TransferMode::DataSide, 77);
    const auto tmpl_side = RFFeatureMap::build(base, dist, 128, 9, layout, RFVariant::RealCosine,
                                               TransferMode::TemplateSide, 77);
    const Eigen::MatrixXd x = randn(rng, 20, 12);
    const Eigen::MatrixXd fd = data_side.transform(x);
    const Eigen::MatrixXd ft = tmpl_side.transform(x);
    for (int i = 0; i < 20; ++i)
        for (int j = i; j < 20; ++j)
            CHECK(std::abs(fd.row(i).dot(fd.row(j)) - ft.row(i).dot(ft.row(j))) <= 1e-10);
}

TEST_CASE("feature norm stays within the hoeffding budget of the kernel diagonal") {
    Rng rng(3);
    const BaseKernel base(2.5);
    const auto layout = InputLayout::vector(10);
    const int s = 1024;
    const auto map = RFFeatureMap::build(base, GroupDistribution::uniform_permutation(10), s, 10,
                                         layout, RFVariant::RealCosine, TransferMode::DataSide, 9);
    for (int t = 0; t < 100; ++t) {
        const Eigen::VectorXd x = randv(rng, 10);
        const Eigen::VectorXd psi = map.transform_one(x);
        CHECK(psi.squaredNorm() <= 1.0 + 3.0 / std::sqrt(static_cast<double>(s)));
    }
}

TEST_CASE("large feature banks track the matched-r oracle on coulomb-sized matrices") {
    Rng rng(4);
    const int n = 23;
    const auto layout = InputLayout::symmetric_matrix(n);
    const Eigen::MatrixXd x = sym_batch(rng, 25, n);
    const double sigma = median_heuristic_sigma(x);
    const BaseKernel base(sigma);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(n);

    const auto map = RFFeatureMap::build(base, dist, 10000, 70, layout, RFVariant::RealCosine,
                                         TransferMode::DataSide, 42);
    const Eigen::MatrixXd f = map.transform(x);
    const OracleKernel oracle(base, dist, 70, layout);

    Rng pick(5);
    for (int t = 0; t < 50; ++t) {
        const auto i = static_cast<Eigen::Index>(pick.below(25));
        const auto j = static_cast<Eigen::Index>(pick.below(25));
        const double est = f.row(i).dot(f.row(j));
        const double ref = oracle.eval(x.row(i).transpose(), x.row(j).transpose(), pick.next_u64());
        CHECK(std::abs(est - ref) <= 0.05);
    }
}

TEST_CASE("delta identity features converge to the closed-form gaussian kernel") {
    Rng rng(6);
    const BaseKernel base(1.4);
    const auto layout = InputLayout::vector(10);
    const auto map = RFFeatureMap::build(base, GroupDistribution::delta_identity(), 1 << 14, 1,
                                         layout, RFVariant::RealCosine, TransferMode::DataSide, 3);
    const Eigen::MatrixXd x = randn(rng, 40, 10);
    const Eigen::MatrixXd f = map.transform(x);
    Rng pick(7);
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto i = static_cast<Eigen::Index>(pick.below(40));
        const auto j = static_cast<Eigen::Index>(pick.below(40));
        worst = std::max(worst, std::abs(f.row(i).dot(f.row(j)) -
                                         base.eval(x.row(i).transpose(), x.row(j).transpose())));
    }
    CHECK(worst <= 0.03);
}

TEST_CASE("complex variant interleaves re/im and matches the oracle too") {
    Rng rng(8);
    const auto layout = InputLayout::vector(8);
    const BaseKernel base(2.2);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(8);
    const auto map = RFFeatureMap::build(base, dist, 4096, 12, layout, RFVariant::Complex,
                                         TransferMode::DataSide, 11);
    CHECK(map.output_dim() == 2 * 4096);
    const Eigen::MatrixXd x = randn(rng, 16, 8);
    const Eigen::MatrixXd f = map.transform(x);
    const OracleKernel pool_oracle =
        OracleKernel::with_pool(base, map.group_pool(), layout);
    for (int i = 0; i < 16; ++i)
        for (int j = i; j < 16; ++j) {
            const double ref =
                pool_oracle.eval(x.row(i).transpose(), x.row(j).transpose(), 1);
            CHECK(std::abs(f.row(i).dot(f.row(j)) - ref) <= 0.06);
        }
}

TEST_CASE("an exhaustive permutation pool makes features exactly invariant") {
    Rng rng(9);
    const auto layout = InputLayout::vector(3);
    const BaseKernel base(1.5);
    const auto group = OracleKernel::enumerate_permutations(3);
    const auto map = RFFeatureMap::build_with_pool(base, group, 256, layout,
                                                   RFVariant::RealCosine, TransferMode::DataSide, 13);
    const Eigen::MatrixXd x = randn(rng, 10, 3);
    const Eigen::MatrixXd f = map.transform(x);
    for (const auto& g : group) {
        for (int i = 0; i < 10; ++i) {
            const Eigen::VectorXd psi_g = map.transform_one(apply(g, x.row(i).transpose(), layout));
            for (int j = 0; j < 10; ++j)
                CHECK(std::abs(psi_g.dot(f.row(j).transpose()) - f.row(i).dot(f.row(j))) <= 1e-10);
        }
    }
}

TEST_CASE("identical seeds give bit-identical features under any thread count") {
    Rng rng(10);
    const auto layout = InputLayout::symmetric_matrix(6);
    const BaseKernel base(3.0);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(6);
    const Eigen::MatrixXd x = sym_batch(rng, 30, 6);
    const auto m1 = RFFeatureMap::build(base, dist, 200, 7, layout);
    const auto m2 = RFFeatureMap::build(base, dist, 200, 7, layout);
    set_max_threads(1);
    const Eigen::MatrixXd serial = m1.transform(x);
    set_max_threads(4);
    const Eigen::MatrixXd parallel = m2.transform(x);
    set_max_threads(0);
    CHECK(serial == parallel);
}

TEST_CASE("invariance error grows as the distribution concentrates") {
    Rng rng(11);
    const int size = 16;
    const auto layout = InputLayout::image(size, size);
    const GroupElement g = GroupElement::rotation(0.1);

    std::vector<Eigen::VectorXd> images;
    for (int i = 0; i < 50; ++i) images.push_back(blob_image(rng, size));
    Eigen::MatrixXd x(50, layout.dim());
    for (int i = 0; i < 50; ++i) x.row(i) = images[static_cast<std::size_t>(i)];
    const BaseKernel base(median_heuristic_sigma(x));

    std::vector<double> medians;
    for (const double kappa : {1.0, 9.0, 100.0}) {
        const auto map = RFFeatureMap::build(base, GroupDistribution::von_mises_rotation(kappa),
                                             512, 60, layout, RFVariant::RealCosine,
                                             TransferMode::DataSide, 321);
        std::vector<double> gaps;
        for (const auto& img : images) {
            const Eigen::VectorXd moved = apply(g, img, layout);
            gaps.push_back((map.transform_one(moved) - map.transform_one(img)).norm());
        }
        medians.push_back(median(gaps));
    }
    CHECK(medians[0] < medians[1]);
    CHECK(medians[1] < medians[2]);
}

TEST_CASE("template-side transfer requires symmetry or an auto-symmetrized pool") {
    const BaseKernel base(2.0);
    const auto layout = InputLayout::image(8, 8);
    const GroupDistribution asym = GroupDistribution::von_mises_rotation(4.0, 1.0);
    CHECK_FALSE(asym.is_symmetric());
    CHECK_THROWS_AS(RFFeatureMap::build(base, asym, 16, 5, layout, RFVariant::RealCosine,
                                        TransferMode::TemplateSide, 3, true, false),
                    std::invalid_argument);
    // auto-symmetrization doubles the pool
    const auto map = RFFeatureMap::build(base, asym, 16, 5, layout, RFVariant::RealCosine,
                                         TransferMode::TemplateSide, 3, true, true);
    CHECK(map.group_pool().size() == 10);
}

TEST_CASE("build_rf rejects non-positive counts") {
    const BaseKernel base(1.0);
    const auto layout = InputLayout::vector(4);
    CHECK_THROWS_AS(RFFeatureMap::build(base, GroupDistribution::delta_identity(), 0, 1, layout),
                    std::invalid_argument);
    CHECK_THROWS_AS(RFFeatureMap::build(base, GroupDistribution::delta_identity(), 8, 0, layout),
                    std::invalid_argument);
    const auto map = RFFeatureMap::build(base, GroupDistribution::delta_identity(), 8, 1, layout);
    Rng rng(1);
    CHECK_THROWS_AS(map.transform_one(randv(rng, 5)), std::invalid_argument);
}

// ---- Nystrom ----

TEST_CASE("duplicate landmarks reduce the rank without failing") {
    Rng rng(12);
    Eigen::MatrixXd z = randn(rng, 10, 6);
    z.row(9) = z.row(0);
    z.row(8) = z.row(1);
    const auto map = NysFeatureMap::build_with_pool(
        BaseKernel(2.0), {GroupElement::identity()}, z, InputLayout::vector(6));
    CHECK(map.output_dim() < 10);
    CHECK(map.output_dim() >= 8);
}

TEST_CASE("identity nystrom with all points as landmarks reproduces the gram matrix") {
    Rng rng(13);
    const BaseKernel base(2.0);
    const Eigen::MatrixXd x = randn(rng, 60, 8);
    const auto map = NysFeatureMap::build_explicit(base, GroupDistribution::delta_identity(), x, 1,
                                                   InputLayout::vector(8));
    const Eigen::MatrixXd f = map.transform(x);
    CHECK((f * f.transpose() - base.gram(x)).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("pseudo-inverse factor property of the nystrom factorization") {
    Rng rng(14);
    const BaseKernel base(1.5);
    Eigen::MatrixXd z = randn(rng, 24, 5);
    z.row(23) = z.row(0);  // force rank deficiency
    const auto map = NysFeatureMap::build_with_pool(base, {GroupElement::identity()}, z,
                                                    InputLayout::vector(5));
    const Eigen::MatrixXd kzz = base.gram(z);
    const Eigen::MatrixXd pinv = map.factor().transpose() * map.factor();
    CHECK((pinv * kzz * pinv - pinv).norm() <= 1e-6 * pinv.norm());
}

TEST_CASE("landmark-side transfer is exact for permutations") {
    Rng rng(15);
    const BaseKernel base(3.0);
    const auto layout = InputLayout::vector(9);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(9);
    const Eigen::MatrixXd x = randn(rng, 30, 9);

    // k(g x, z) = k(x, g^-1 z) elementwise
    const auto pool = sample(dist, 6, 71);
    for (const auto& g : pool) {
        const Eigen::VectorXd xx = randv(rng, 9);
        const Eigen::VectorXd z = randv(rng, 9);
        CHECK(base.eval(apply(g, xx, layout), z) ==
              doctest::Approx(base.eval(xx, apply(invert(g), z, layout))).epsilon(1e-14));
    }

    const auto data_side = NysFeatureMap::build_from_data(base, dist, x, 20, 6, layout,
                                                          TransferMode::DataSide, 1e-10, 71);
    const auto lmk_side = NysFeatureMap::build_from_data(base, dist, x, 20, 6, layout,
                                                         TransferMode::TemplateSide, 1e-10, 71);
    const Eigen::MatrixXd fd = data_side.transform(x);
    const Eigen::MatrixXd fl = lmk_side.transform(x);
    CHECK((fd - fl).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("nystrom interpolates the landmarks under an identity pool") {
    Rng rng(16);
    const BaseKernel base(2.5);
    const Eigen::MatrixXd z = randn(rng, 25, 6);
    const auto map = NysFeatureMap::build_explicit(base, GroupDistribution::delta_identity(), z, 1,
                                                   InputLayout::vector(6));
    REQUIRE(map.output_dim() == 25);
    const Eigen::MatrixXd f = map.transform(z);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j)
            CHECK(std::abs(f.row(i).dot(f.row(j)) -
                           base.eval(z.row(i).transpose(), z.row(j).transpose())) <= 1e-8);
}

TEST_CASE("nystrom gram error decreases with more landmarks") {
    Rng rng(17);
    const int n = 8;
    const auto layout = InputLayout::symmetric_matrix(n);
    const Eigen::MatrixXd x = sym_batch(rng, 150, n);
    const BaseKernel base(median_heuristic_sigma(x));
    const GroupDistribution dist = GroupDistribution::uniform_permutation(n);

    const OracleKernel oracle(base, dist, 20, layout);
    const Eigen::MatrixXd k_ref = oracle.gram(x, 5);
    const double k_norm = k_ref.norm();

    std::vector<double> errors;
    for (const int m : {50, 100, 200, 400}) {
        const auto map = NysFeatureMap::build_from_data(
            base, dist, x, std::min(m, 150), 20, layout, TransferMode::DataSide, 1e-10, 33);
        const Eigen::MatrixXd f = map.transform(x);
        errors.push_back((f * f.transpose() - k_ref).norm() / k_norm);
    }
    for (std::size_t i = 1; i < errors.size(); ++i) CHECK(errors[i] <= 1.1 * errors[i - 1]);
}

TEST_CASE("a symmetrized pool matches plain sampling for symmetric q within monte carlo error") {
    Rng rng(18);
    const auto layout = InputLayout::vector(10);
    const BaseKernel base(3.0);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(10);
    const Eigen::MatrixXd x = randn(rng, 25, 10);
    const auto pool = sample(dist, 30, 41);

    const auto plain = NysFeatureMap::build_with_pool(base, pool, x.topRows(15), layout);
    const auto symmetrized =
        NysFeatureMap::build_with_pool(base, symmetrize_pool(pool), x.topRows(15), layout);
    const Eigen::MatrixXd fp = plain.transform(x);
    const Eigen::MatrixXd fs = symmetrized.transform(x);
    const double budget = 4.0 / std::sqrt(30.0);
    for (int i = 0; i < 25; ++i)
        for (int j = 0; j < 25; ++j)
            CHECK(std::abs(fp.row(i).dot(fp.row(j)) - fs.row(i).dot(fs.row(j))) <= budget);
}

TEST_CASE("a cutoff above the top eigenvalue raises the degenerate-landmark error") {
    Rng rng(19);
    Eigen::MatrixXd z = randn(rng, 5, 4);
    for (int i = 1; i < 5; ++i) z.row(i) = z.row(0);
    CHECK_THROWS_AS(NysFeatureMap::build_with_pool(BaseKernel(2.0), {GroupElement::identity()}, z,
                                                   InputLayout::vector(4), TransferMode::DataSide,
                                                   1.5),
                    std::runtime_error);
}

// ---- two-layer maps ----

TEST_CASE("a huge second-layer bandwidth flattens the features") {
    Rng rng(20);
    const auto layout = InputLayout::vector(6);
    const BaseKernel base(2.0);
    auto layer1 = RFFeatureMap::build(base, GroupDistribution::uniform_permutation(6), 64, 4,
                                      layout, RFVariant::RealCosine, TransferMode::DataSide, 2);
    const auto two = TwoLayerMap::build(std::move(layer1), 1e9, 128, 3);
    const Eigen::MatrixXd f = two.transform(randn(rng, 20, 6));
    for (Eigen::Index j = 0; j < f.cols(); ++j) {
        const double mean = f.col(j).mean();
        CHECK((f.col(j).array() - mean).square().maxCoeff() <= 1e-4);
    }
}

TEST_CASE("second layer approximates the gaussian hyperkernel on layer-1 embeddings") {
    Rng rng(21);
    const auto layout = InputLayout::vector(8);
    const BaseKernel base(2.5);
    auto layer1 = RFFeatureMap::build(base, GroupDistribution::uniform_permutation(8), 256, 8,
                                      layout, RFVariant::RealCosine, TransferMode::DataSide, 4);
    const RFFeatureMap layer1_copy = layer1;
    const double sigma2 = 0.8;
    const auto two = TwoLayerMap::build(std::move(layer1), sigma2, 10000, 5);
    const Eigen::MatrixXd x = randn(rng, 30, 8);
    const Eigen::MatrixXd f1 = layer1_copy.transform(x);
    const Eigen::MatrixXd f2 = two.transform(x);
    const BaseKernel hyper(sigma2);
    Rng pick(6);
    for (int t = 0; t < 60; ++t) {
        const auto i = static_cast<Eigen::Index>(pick.below(30));
        const auto j = static_cast<Eigen::Index>(pick.below(30));
        const double expected = hyper.eval(f1.row(i).transpose(), f1.row(j).transpose());
        CHECK(std::abs(f2.row(i).dot(f2.row(j)) - expected) <= 0.05);
    }
}

TEST_CASE("the second layer applies no group averaging") {
    const auto layout = InputLayout::vector(5);
    const BaseKernel base(2.0);
    auto layer1 = RFFeatureMap::build(base, GroupDistribution::delta_identity(), 32, 1, layout);
    const RFFeatureMap layer1_copy = layer1;
    const auto two = TwoLayerMap::build(std::move(layer1), 1.1, 64, 9);
    Rng rng(22);
    const Eigen::VectorXd x = randv(rng, 5);
    const Eigen::VectorXd f1 = layer1_copy.transform_one(x);
    const Eigen::VectorXd expected =
        std::sqrt(2.0 / 64.0) *
        ((two.templates2() * f1 + two.phases2()).array().cos()).matrix();
    CHECK((two.transform_one(x) - expected).cwiseAbs().maxCoeff() <= 1e-15);
}

// ---- serialization ----

TEST_CASE("feature containers round trip bit-exactly") {
    Rng rng(23);
    const auto dir = std::filesystem::temp_directory_path();
    const auto layout = InputLayout::symmetric_matrix(5);
    const BaseKernel base(2.0);
    const GroupDistribution dist = GroupDistribution::uniform_permutation(5);
    const Eigen::MatrixXd x = sym_batch(rng, 12, 5);

    const auto rf = RFFeatureMap::build(base, dist, 64, 6, layout, RFVariant::Complex,
                                        TransferMode::TemplateSide, 8);
    const auto rf_path = (dir / "roundtrip_rf.bin").string();
    save_feature_map(rf, rf_path);
    const auto rf_back = load_feature_map(rf_path);
    CHECK(transform(rf_back, x) == rf.transform(x));

    const auto nys = NysFeatureMap::build_from_data(base, dist, x, 8, 6, layout,
                                                    TransferMode::DataSide, 1e-10, 8);
    const auto nys_path = (dir / "roundtrip_nys.bin").string();
    save_feature_map(nys, nys_path);
    CHECK(transform(load_feature_map(nys_path), x) == nys.transform(x));

    auto layer1 = RFFeatureMap::build(base, dist, 32, 4, layout);
    const auto two = TwoLayerMap::build(std::move(layer1), 0.9, 48, 2);
    const auto two_path = (dir / "roundtrip_two.bin").string();
    save_feature_map(two, two_path);
    CHECK(transform(load_feature_map(two_path), x) == two.transform(x));

    CHECK_THROWS(load_feature_map((dir / "missing_container.bin").string()));
}
