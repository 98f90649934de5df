#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "orbitfeat/groups.hpp"
#include "orbitfeat/rng.hpp"

namespace orbitfeat {

/// A probability distribution q over a group. Pair it with a seed via
/// GroupSampler to obtain i.i.d. GroupElement draws.
struct GroupDistribution {
    enum class Family {
        DeltaIdentity,
        UniformPermutation,
        VonMisesRotation,
        GaussianTranslation,
        LogNormalScaling,
        ProductAffine,
    };

    Family family = Family::DeltaIdentity;
    int n = 0;              // UniformPermutation order
    double kappa = 0.0;     // VonMisesRotation concentration
    double mode = 0.0;      // VonMisesRotation mode, radians in [0, 2*pi)
    double sigma = 0.0;     // GaussianTranslation std (pixels) / LogNormalScaling log-std
    double mu = 0.0;        // LogNormalScaling log-mean
    std::vector<GroupDistribution> components;  // ProductAffine factors

    static GroupDistribution delta_identity();
    static GroupDistribution uniform_permutation(int n);
    static GroupDistribution von_mises_rotation(double kappa, double mode = 0.0);
    static GroupDistribution gaussian_translation(double sigma);
    static GroupDistribution log_normal_scaling(double mu, double sigma);
    static GroupDistribution product_affine(std::vector<GroupDistribution> components);

    /// Structural symmetry around the identity, q(g) = q(g^-1).
    bool is_symmetric() const;

    bool operator==(const GroupDistribution&) const = default;
};

/// Stateful single-consumer sample stream. Identical (spec, seed) pairs
/// produce element-wise identical streams.
class GroupSampler {
public:
    GroupSampler(GroupDistribution dist, std::uint64_t seed)
        : dist_(std::move(dist)), rng_(seed) {}

    GroupElement next();
    std::vector<GroupElement> sample(int r);

    const GroupDistribution& dist() const { return dist_; }

private:
    GroupElement draw(const GroupDistribution& d);

    GroupDistribution dist_;
    Rng rng_;
};

inline std::vector<GroupElement> sample(const GroupDistribution& dist, int r, std::uint64_t seed) {
    return GroupSampler(dist, seed).sample(r);
}

/// {g_1..g_r, g_1^-1..g_r^-1}; makes an empirical pool usable with
/// template-side transfer when q itself is not symmetric.
std::vector<GroupElement> symmetrize_pool(const std::vector<GroupElement>& samples);

/// Angle draw with density proportional to exp(kappa*cos(theta - mode)),
/// by Best-Fisher rejection; kappa = 0 is uniform on [0, 2*pi).
double sample_von_mises(Rng& rng, double kappa, double mode);

void to_json(nlohmann::json& j, const GroupDistribution& d);
void from_json(const nlohmann::json& j, GroupDistribution& d);

}  // namespace orbitfeat
