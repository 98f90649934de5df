#include "orbitfeat/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace orbitfeat {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kPi = 3.1415926535897932384626433832795;
}  // namespace

GroupDistribution GroupDistribution::delta_identity() { return GroupDistribution{}; }

GroupDistribution GroupDistribution::uniform_permutation(int n) {
    if (n < 1) throw std::invalid_argument("uniform_permutation: n must be positive");
    GroupDistribution d;
    d.family = Family::UniformPermutation;
    d.n = n;
    return d;
}

GroupDistribution GroupDistribution::von_mises_rotation(double kappa, double mode) {
    if (kappa < 0.0) throw std::invalid_argument("von_mises_rotation: kappa must be >= 0");
    GroupDistribution d;
    d.family = Family::VonMisesRotation;
    d.kappa = kappa;
    d.mode = wrap_angle(mode);
    return d;
}

GroupDistribution GroupDistribution::gaussian_translation(double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("gaussian_translation: sigma must be >= 0");
    GroupDistribution d;
    d.family = Family::GaussianTranslation;
    d.sigma = sigma;
    return d;
}

GroupDistribution GroupDistribution::log_normal_scaling(double mu, double sigma) {
    if (sigma < 0.0) throw std::invalid_argument("log_normal_scaling: sigma must be >= 0");
    GroupDistribution d;
    d.family = Family::LogNormalScaling;
    d.mu = mu;
    d.sigma = sigma;
    return d;
}

GroupDistribution GroupDistribution::product_affine(std::vector<GroupDistribution> components) {
    if (components.empty()) throw std::invalid_argument("product_affine: no components");
    for (const auto& c : components) {
        switch (c.family) {
            case Family::UniformPermutation:
                throw std::invalid_argument("product_affine: permutation factor has no affine form");
            case Family::ProductAffine:
                throw std::invalid_argument("product_affine: nested products are not supported");
            default: break;
        }
    }
    GroupDistribution d;
    d.family = Family::ProductAffine;
    d.components = std::move(components);
    return d;
}

bool GroupDistribution::is_symmetric() const {
    switch (family) {
        case Family::DeltaIdentity:
        case Family::UniformPermutation:
        case Family::GaussianTranslation: return true;
        case Family::VonMisesRotation: return mode == 0.0;
        case Family::LogNormalScaling: return mu == 0.0;
        case Family::ProductAffine: {
            for (const auto& c : components)
                if (!c.is_symmetric()) return false;
            return true;
        }
    }
    return false;
}

double sample_von_mises(Rng& rng, double kappa, double mode) {
    if (kappa < 1e-9) return rng.uniform(0.0, kTwoPi);
    // Best & Fisher (1979) wrapped-Cauchy envelope rejection.
    const double tau = 1.0 + std::sqrt(1.0 + 4.0 * kappa * kappa);
    const double rho = (tau - std::sqrt(2.0 * tau)) / (2.0 * kappa);
    const double rr = (1.0 + rho * rho) / (2.0 * rho);
    double f;
    for (;;) {
        const double u1 = rng.uniform01();
        const double z = std::cos(kPi * u1);
        f = (1.0 + rr * z) / (rr + z);
        const double c = kappa * (rr - f);
        const double u2 = rng.uniform01();
        if (c * (2.0 - c) - u2 > 0.0) break;
        if (u2 > 0.0 && std::log(c / u2) + 1.0 - c >= 0.0) break;
    }
    const double u3 = rng.uniform01();
    const double theta = (u3 < 0.5 ? -1.0 : 1.0) * std::acos(std::clamp(f, -1.0, 1.0));
    return wrap_angle(mode + theta);
}

GroupElement GroupSampler::draw(const GroupDistribution& d) {
    using Family = GroupDistribution::Family;
    switch (d.family) {
        case Family::DeltaIdentity: return GroupElement::identity();
        case Family::UniformPermutation: {
            std::vector<int> perm(static_cast<std::size_t>(d.n));
            for (int i = 0; i < d.n; ++i) perm[static_cast<std::size_t>(i)] = i;
            for (int i = d.n - 1; i > 0; --i) {
                const auto j = static_cast<std::size_t>(
                    rng_.below(static_cast<std::uint64_t>(i) + 1));
                std::swap(perm[static_cast<std::size_t>(i)], perm[j]);
            }
            return GroupElement::permutation(std::move(perm));
        }
        case Family::VonMisesRotation:
            return GroupElement::rotation(sample_von_mises(rng_, d.kappa, d.mode));
        case Family::GaussianTranslation:
            return GroupElement::translation(d.sigma * rng_.gaussian(), d.sigma * rng_.gaussian());
        case Family::LogNormalScaling:
            return GroupElement::scaling(std::exp(d.mu + d.sigma * rng_.gaussian()));
        case Family::ProductAffine: {
            // One draw per factor, composed in list order into a single Affine2D.
            GroupElement g = GroupElement::identity();
            for (const auto& c : d.components) g = compose(g, draw(c));
            Eigen::Matrix2d a;
            Eigen::Vector2d b;
            g.as_affine(a, b);
            return GroupElement::affine(a, b);
        }
    }
    throw std::logic_error("GroupSampler::draw: unreachable");
}

GroupElement GroupSampler::next() { return draw(dist_); }

std::vector<GroupElement> GroupSampler::sample(int r) {
    if (r < 1) throw std::invalid_argument("sample: r must be >= 1");
    std::vector<GroupElement> out;
    out.reserve(static_cast<std::size_t>(r));
    for (int i = 0; i < r; ++i) out.push_back(next());
    return out;
}

std::vector<GroupElement> symmetrize_pool(const std::vector<GroupElement>& samples) {
    std::vector<GroupElement> out;
    out.reserve(2 * samples.size());
    out.insert(out.end(), samples.begin(), samples.end());
    for (const auto& g : samples) out.push_back(invert(g));
    return out;
}

void to_json(nlohmann::json& j, const GroupDistribution& d) {
    using Family = GroupDistribution::Family;
    switch (d.family) {
        case Family::DeltaIdentity: j = {{"family", "delta_identity"}}; break;
        case Family::UniformPermutation:
            j = {{"family", "uniform_permutation"}, {"n", d.n}};
            break;
        case Family::VonMisesRotation:
            j = {{"family", "von_mises_rotation"}, {"kappa", d.kappa}, {"mode", d.mode}};
            break;
        case Family::GaussianTranslation:
            j = {{"family", "gaussian_translation"}, {"sigma", d.sigma}};
            break;
        case Family::LogNormalScaling:
            j = {{"family", "log_normal_scaling"}, {"mu", d.mu}, {"sigma", d.sigma}};
            break;
        case Family::ProductAffine:
            j = {{"family", "product_affine"}, {"components", d.components}};
            break;
    }
}

void from_json(const nlohmann::json& j, GroupDistribution& d) {
    const std::string family = j.at("family").get<std::string>();
    if (family == "delta_identity") {
        d = GroupDistribution::delta_identity();
    } else if (family == "uniform_permutation") {
        d = GroupDistribution::uniform_permutation(j.at("n").get<int>());
    } else if (family == "von_mises_rotation") {
        d = GroupDistribution::von_mises_rotation(j.at("kappa").get<double>(),
                                                  j.value("mode", 0.0));
    } else if (family == "gaussian_translation") {
        d = GroupDistribution::gaussian_translation(j.at("sigma").get<double>());
    } else if (family == "log_normal_scaling") {
        d = GroupDistribution::log_normal_scaling(j.at("mu").get<double>(),
                                                  j.at("sigma").get<double>());
    } else if (family == "product_affine") {
        d = GroupDistribution::product_affine(
            j.at("components").get<std::vector<GroupDistribution>>());
    } else {
        throw std::invalid_argument("unknown distribution family: " + family);
    }
}

}  // namespace orbitfeat
