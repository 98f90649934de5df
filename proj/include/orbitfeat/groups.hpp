#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include <json.hpp>

namespace orbitfeat {

enum class GroupKind {
    Identity,
    Permutation,
    Rotation2D,
    Translation2D,
    Scaling2D,
    Affine2D,
};

/// How a flat vector of length d is interpreted by group actions.
/// Image and SymmetricMatrix use row-major flattening.
struct InputLayout {
    enum class Shape { Vector, Image, SymmetricMatrix };

    Shape shape = Shape::Vector;
    int rows = 0;  // image height / matrix n
    int cols = 0;  // image width  / matrix n

    static InputLayout vector(int d);
    static InputLayout image(int height, int width);
    static InputLayout symmetric_matrix(int n);

    int dim() const;

    bool operator==(const InputLayout&) const = default;
};

/// An invertible transform of input vectors. Immutable after construction;
/// all operations on it are pure functions.
class GroupElement {
public:
    GroupElement() : kind_(GroupKind::Identity) {}

    static GroupElement identity();
    static GroupElement permutation(std::vector<int> perm);
    static GroupElement rotation(double theta);
    static GroupElement translation(double dx, double dy);
    static GroupElement scaling(double s);
    static GroupElement affine(const Eigen::Matrix2d& a, const Eigen::Vector2d& b);

    GroupKind kind() const { return kind_; }
    bool is_identity() const { return kind_ == GroupKind::Identity; }
    /// True for the kinds that act on image coordinates.
    bool is_geometric() const;

    const std::vector<int>& perm() const { return perm_; }
    double theta() const { return theta_; }
    double dx() const { return shift_.x(); }
    double dy() const { return shift_.y(); }
    double scale() const { return scale_; }
    const Eigen::Matrix2d& matrix() const { return mat_; }
    const Eigen::Vector2d& offset() const { return shift_; }

    /// Coordinate form T(p) = A p + b of a geometric element (or identity).
    void as_affine(Eigen::Matrix2d& a, Eigen::Vector2d& b) const;

private:
    GroupKind kind_;
    std::vector<int> perm_;
    double theta_ = 0.0;
    double scale_ = 1.0;
    Eigen::Matrix2d mat_ = Eigen::Matrix2d::Identity();
    Eigen::Vector2d shift_ = Eigen::Vector2d::Zero();
};

/// g then h collapsed into one element: apply(compose(g,h), x) == apply(g, apply(h, x)).
/// Same-kind pairs stay in kind where the kind is closed; mixed geometric
/// pairs become Affine2D. Permutations only compose with permutations.
GroupElement compose(const GroupElement& g, const GroupElement& h);

GroupElement invert(const GroupElement& g);

/// |det J_g|: 1 for identity/permutation/rotation/translation, s^2 for
/// scaling, |det A| for affine.
double jacobian_det(const GroupElement& g);

/// Applies T_g to a flat vector under the given layout. Geometric kinds act
/// on images by resampling I(g^{-1} pixel) with bilinear interpolation and
/// zero padding about the image center; when unitary_normalize is set the
/// result is scaled by |J_g|^{-1/2}. Permutations act on vectors elementwise
/// and on symmetric matrices by joint row/column permutation.
Eigen::VectorXd apply(const GroupElement& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const InputLayout& layout, bool unitary_normalize = true);

double wrap_angle(double theta);  // into [0, 2*pi)

void to_json(nlohmann::json& j, const GroupElement& g);
void from_json(const nlohmann::json& j, GroupElement& g);
void to_json(nlohmann::json& j, const InputLayout& layout);
void from_json(const nlohmann::json& j, InputLayout& layout);

}  // namespace orbitfeat
