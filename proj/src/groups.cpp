#include "orbitfeat/groups.hpp"

#include <Eigen/LU>
#include <cmath>
#include <stdexcept>

namespace orbitfeat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;
constexpr double kSingularTol = 1e-12;

void check_permutation(const std::vector<int>& perm) {
    const int n = static_cast<int>(perm.size());
    if (n == 0) throw std::invalid_argument("permutation: empty");
    std::vector<char> seen(perm.size(), 0);
    for (int v : perm) {
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)])
            throw std::invalid_argument("permutation: not a bijection on {0..n-1}");
        seen[static_cast<std::size_t>(v)] = 1;
    }
}

double bilinear_sample(const double* img, int h, int w, double row, double col) {
    const int r0 = static_cast<int>(std::floor(row));
    const int c0 = static_cast<int>(std::floor(col));
    const double fr = row - r0;
    const double fc = col - c0;
    auto px = [&](int r, int c) -> double {
        if (r < 0 || r >= h || c < 0 || c >= w) return 0.0;
        return img[static_cast<std::size_t>(r) * w + c];
    };
    return px(r0, c0) * (1.0 - fr) * (1.0 - fc) + px(r0, c0 + 1) * (1.0 - fr) * fc +
           px(r0 + 1, c0) * fr * (1.0 - fc) + px(r0 + 1, c0 + 1) * fr * fc;
}

}  // namespace

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

InputLayout InputLayout::vector(int d) {
    if (d < 1) throw std::invalid_argument("layout: d must be positive");
    InputLayout l;
    l.shape = Shape::Vector;
    l.rows = d;
    l.cols = 1;
    return l;
}

InputLayout InputLayout::image(int height, int width) {
    if (height < 1 || width < 1) throw std::invalid_argument("layout: bad image shape");
    InputLayout l;
    l.shape = Shape::Image;
    l.rows = height;
    l.cols = width;
    return l;
}

InputLayout InputLayout::symmetric_matrix(int n) {
    if (n < 1) throw std::invalid_argument("layout: bad matrix order");
    InputLayout l;
    l.shape = Shape::SymmetricMatrix;
    l.rows = n;
    l.cols = n;
    return l;
}

int InputLayout::dim() const {
    switch (shape) {
        case Shape::Vector: return rows;
        case Shape::Image: return rows * cols;
        case Shape::SymmetricMatrix: return rows * rows;
    }
    return 0;
}

GroupElement GroupElement::identity() { return GroupElement(); }

GroupElement GroupElement::permutation(std::vector<int> perm) {
    check_permutation(perm);
    GroupElement g;
    g.kind_ = GroupKind::Permutation;
    g.perm_ = std::move(perm);
    return g;
}

GroupElement GroupElement::rotation(double theta) {
    GroupElement g;
    g.kind_ = GroupKind::Rotation2D;
    g.theta_ = wrap_angle(theta);
    return g;
}

GroupElement GroupElement::translation(double dx, double dy) {
    GroupElement g;
    g.kind_ = GroupKind::Translation2D;
    g.shift_ = Eigen::Vector2d(dx, dy);
    return g;
}

GroupElement GroupElement::scaling(double s) {
    if (!(s > 0.0)) throw std::invalid_argument("scaling: factor must be positive");
    GroupElement g;
    g.kind_ = GroupKind::Scaling2D;
    g.scale_ = s;
    return g;
}

GroupElement GroupElement::affine(const Eigen::Matrix2d& a, const Eigen::Vector2d& b) {
    if (std::abs(a.determinant()) <= kSingularTol)
        throw std::invalid_argument("affine: matrix is singular");
    GroupElement g;
    g.kind_ = GroupKind::Affine2D;
    g.mat_ = a;
    g.shift_ = b;
    return g;
}

bool GroupElement::is_geometric() const {
    switch (kind_) {
        case GroupKind::Rotation2D:
        case GroupKind::Translation2D:
        case GroupKind::Scaling2D:
        case GroupKind::Affine2D: return true;
        default: return false;
    }
}

void GroupElement::as_affine(Eigen::Matrix2d& a, Eigen::Vector2d& b) const {
    a = Eigen::Matrix2d::Identity();
    b = Eigen::Vector2d::Zero();
    switch (kind_) {
        case GroupKind::Identity: break;
        case GroupKind::Rotation2D: {
            const double c = std::cos(theta_), s = std::sin(theta_);
            a << c, -s, s, c;
            break;
        }
        case GroupKind::Translation2D: b = shift_; break;
        case GroupKind::Scaling2D: a = scale_ * Eigen::Matrix2d::Identity(); break;
        case GroupKind::Affine2D:
            a = mat_;
            b = shift_;
            break;
        case GroupKind::Permutation:
            throw std::invalid_argument("as_affine: permutation has no coordinate form");
    }
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
    if (g.is_identity()) return h;
    if (h.is_identity()) return g;
    const GroupKind gk = g.kind(), hk = h.kind();
    if (gk == GroupKind::Permutation || hk == GroupKind::Permutation) {
        if (gk != hk) throw std::invalid_argument("compose: incompatible kinds");
        const auto& gp = g.perm();
        const auto& hp = h.perm();
        if (gp.size() != hp.size()) throw std::invalid_argument("compose: permutation sizes differ");
        std::vector<int> out(gp.size());
        for (std::size_t i = 0; i < gp.size(); ++i)
            out[i] = hp[static_cast<std::size_t>(gp[i])];
        return GroupElement::permutation(std::move(out));
    }
    if (gk == hk) {
        switch (gk) {
            case GroupKind::Rotation2D: return GroupElement::rotation(g.theta() + h.theta());
            case GroupKind::Translation2D:
                return GroupElement::translation(g.dx() + h.dx(), g.dy() + h.dy());
            case GroupKind::Scaling2D: return GroupElement::scaling(g.scale() * h.scale());
            default: break;
        }
    }
    Eigen::Matrix2d ga, ha;
    Eigen::Vector2d gb, hb;
    g.as_affine(ga, gb);
    h.as_affine(ha, hb);
    return GroupElement::affine(ga * ha, ga * hb + gb);
}

GroupElement invert(const GroupElement& g) {
    switch (g.kind()) {
        case GroupKind::Identity: return g;
        case GroupKind::Permutation: {
            const auto& p = g.perm();
            std::vector<int> inv(p.size());
            for (std::size_t i = 0; i < p.size(); ++i)
                inv[static_cast<std::size_t>(p[i])] = static_cast<int>(i);
            return GroupElement::permutation(std::move(inv));
        }
        case GroupKind::Rotation2D: return GroupElement::rotation(-g.theta());
        case GroupKind::Translation2D: return GroupElement::translation(-g.dx(), -g.dy());
        case GroupKind::Scaling2D: return GroupElement::scaling(1.0 / g.scale());
        case GroupKind::Affine2D: {
            const Eigen::Matrix2d& a = g.matrix();
            const double det = a.determinant();
            if (std::abs(det) <= kSingularTol)
                throw std::invalid_argument("invert: singular affine element");
            Eigen::Matrix2d ainv;
            ainv << a(1, 1), -a(0, 1), -a(1, 0), a(0, 0);
            ainv /= det;
            return GroupElement::affine(ainv, -(ainv * g.offset()));
        }
    }
    throw std::logic_error("invert: unreachable");
}

double jacobian_det(const GroupElement& g) {
    switch (g.kind()) {
        case GroupKind::Scaling2D: return g.scale() * g.scale();
        case GroupKind::Affine2D: return std::abs(g.matrix().determinant());
        default: return 1.0;
    }
}

Eigen::VectorXd apply(const GroupElement& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                      const InputLayout& layout, bool unitary_normalize) {
    if (x.size() != layout.dim())
        throw std::invalid_argument("apply: vector length does not match layout");
    if (g.is_identity()) return x;

    if (g.kind() == GroupKind::Permutation) {
        const auto& p = g.perm();
        const int n = static_cast<int>(p.size());
        Eigen::VectorXd y(x.size());
        if (layout.shape == InputLayout::Shape::Vector) {
            if (n != layout.rows)
                throw std::invalid_argument("apply: permutation size does not match vector length");
            for (int i = 0; i < n; ++i) y[i] = x[p[static_cast<std::size_t>(i)]];
            return y;
        }
        if (layout.shape == InputLayout::Shape::SymmetricMatrix) {
            if (n != layout.rows)
                throw std::invalid_argument("apply: permutation size does not match matrix order");
            // Joint row/column permutation (conjugation P X P^T).
            for (int i = 0; i < n; ++i) {
                const int pi = p[static_cast<std::size_t>(i)];
                for (int j = 0; j < n; ++j)
                    y[static_cast<Eigen::Index>(i) * n + j] =
                        x[static_cast<Eigen::Index>(pi) * n + p[static_cast<std::size_t>(j)]];
            }
            return y;
        }
        throw std::invalid_argument("apply: permutation cannot act on an image layout");
    }

    if (!g.is_geometric() || layout.shape != InputLayout::Shape::Image)
        throw std::invalid_argument("apply: geometric elements act on image layouts only");

    const int h = layout.rows, w = layout.cols;
    Eigen::Matrix2d a;
    Eigen::Vector2d b;
    invert(g).as_affine(a, b);  // output pixel -> source pixel
    const double cx = 0.5 * (w - 1);
    const double cy = 0.5 * (h - 1);
    Eigen::VectorXd y(x.size());
    const double* img = x.data();
    for (int row = 0; row < h; ++row) {
        for (int col = 0; col < w; ++col) {
            const double px = col - cx;
            const double py = row - cy;
            const double sx = a(0, 0) * px + a(0, 1) * py + b.x();
            const double sy = a(1, 0) * px + a(1, 1) * py + b.y();
            y[static_cast<Eigen::Index>(row) * w + col] =
                bilinear_sample(img, h, w, sy + cy, sx + cx);
        }
    }
    if (unitary_normalize) y *= 1.0 / std::sqrt(jacobian_det(g));
    return y;
}

void to_json(nlohmann::json& j, const GroupElement& g) {
    switch (g.kind()) {
        case GroupKind::Identity: j = {{"kind", "identity"}}; break;
        case GroupKind::Permutation: j = {{"kind", "permutation"}, {"perm", g.perm()}}; break;
        case GroupKind::Rotation2D: j = {{"kind", "rotation"}, {"theta", g.theta()}}; break;
        case GroupKind::Translation2D:
            j = {{"kind", "translation"}, {"dx", g.dx()}, {"dy", g.dy()}};
            break;
        case GroupKind::Scaling2D: j = {{"kind", "scaling"}, {"s", g.scale()}}; break;
        case GroupKind::Affine2D: {
            const auto& a = g.matrix();
            j = {{"kind", "affine"},
                 {"a", {{a(0, 0), a(0, 1)}, {a(1, 0), a(1, 1)}}},
                 {"b", {g.offset().x(), g.offset().y()}}};
            break;
        }
    }
}

void from_json(const nlohmann::json& j, GroupElement& g) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "identity") {
        g = GroupElement::identity();
    } else if (kind == "permutation") {
        g = GroupElement::permutation(j.at("perm").get<std::vector<int>>());
    } else if (kind == "rotation") {
        g = GroupElement::rotation(j.at("theta").get<double>());
    } else if (kind == "translation") {
        g = GroupElement::translation(j.at("dx").get<double>(), j.at("dy").get<double>());
    } else if (kind == "scaling") {
        g = GroupElement::scaling(j.at("s").get<double>());
    } else if (kind == "affine") {
        const auto a = j.at("a").get<std::vector<std::vector<double>>>();
        const auto b = j.at("b").get<std::vector<double>>();
        if (a.size() != 2 || a[0].size() != 2 || a[1].size() != 2 || b.size() != 2)
            throw std::invalid_argument("affine json: expected 2x2 matrix and 2-vector");
        Eigen::Matrix2d m;
        m << a[0][0], a[0][1], a[1][0], a[1][1];
        g = GroupElement::affine(m, Eigen::Vector2d(b[0], b[1]));
    } else {
        throw std::invalid_argument("unknown group element kind: " + kind);
    }
}

void to_json(nlohmann::json& j, const InputLayout& layout) {
    switch (layout.shape) {
        case InputLayout::Shape::Vector: j = {{"shape", "vector"}, {"d", layout.rows}}; break;
        case InputLayout::Shape::Image:
            j = {{"shape", "image"}, {"height", layout.rows}, {"width", layout.cols}};
            break;
        case InputLayout::Shape::SymmetricMatrix:
            j = {{"shape", "symmetric_matrix"}, {"n", layout.rows}};
            break;
    }
}

void from_json(const nlohmann::json& j, InputLayout& layout) {
    const std::string shape = j.at("shape").get<std::string>();
    if (shape == "vector") {
        layout = InputLayout::vector(j.at("d").get<int>());
    } else if (shape == "image") {
        layout = InputLayout::image(j.at("height").get<int>(), j.at("width").get<int>());
    } else if (shape == "symmetric_matrix") {
        layout = InputLayout::symmetric_matrix(j.at("n").get<int>());
    } else {
        throw std::invalid_argument("unknown layout shape: " + shape);
    }
}

}  // namespace orbitfeat
