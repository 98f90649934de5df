#include "orbitfeat/serialize.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace orbitfeat {

namespace {

constexpr std::array<char, 8> kMagic = {'O', 'R', 'B', 'F', 'E', 'A', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

enum PayloadKind : std::uint32_t { kRF = 1, kNys = 2, kTwoLayer = 3, kRidge = 4 };

static_assert(sizeof(double) == 8);

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw std::runtime_error("cannot open for writing: " + path);
    }
    void raw(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u32(std::uint32_t v) { raw(&v, sizeof v); }
    void u64(std::uint64_t v) { raw(&v, sizeof v); }
    void f64(double v) { raw(&v, sizeof v); }
    void matrix(const Eigen::MatrixXd& m) {
        u64(static_cast<std::uint64_t>(m.rows()));
        u64(static_cast<std::uint64_t>(m.cols()));
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) f64(m(i, j));
    }
    void vector(const Eigen::VectorXd& v) {
        u64(static_cast<std::uint64_t>(v.size()));
        for (Eigen::Index i = 0; i < v.size(); ++i) f64(v[i]);
    }
    void done() {
        out_.flush();
        if (!out_) throw std::runtime_error("write failed");
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
        if (!in_) throw std::runtime_error("cannot open for reading: " + path);
    }
    void raw(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw std::runtime_error("truncated feature container");
    }
    std::uint32_t u32() { std::uint32_t v; raw(&v, sizeof v); return v; }
    std::uint64_t u64() { std::uint64_t v; raw(&v, sizeof v); return v; }
    double f64() { double v; raw(&v, sizeof v); return v; }
    Eigen::MatrixXd matrix() {
        const auto rows = static_cast<Eigen::Index>(u64());
        const auto cols = static_cast<Eigen::Index>(u64());
        Eigen::MatrixXd m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i)
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = f64();
        return m;
    }
    Eigen::VectorXd vector() {
        const auto n = static_cast<Eigen::Index>(u64());
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v[i] = f64();
        return v;
    }

private:
    std::ifstream in_;
};

void write_layout(Writer& w, const InputLayout& l) {
    w.u32(static_cast<std::uint32_t>(l.shape));
    w.u32(static_cast<std::uint32_t>(l.rows));
    w.u32(static_cast<std::uint32_t>(l.cols));
}

InputLayout read_layout(Reader& r) {
    const auto shape = static_cast<InputLayout::Shape>(r.u32());
    const int rows = static_cast<int>(r.u32());
    const int cols = static_cast<int>(r.u32());
    switch (shape) {
        case InputLayout::Shape::Vector: return InputLayout::vector(rows);
        case InputLayout::Shape::Image: return InputLayout::image(rows, cols);
        case InputLayout::Shape::SymmetricMatrix: return InputLayout::symmetric_matrix(rows);
    }
    throw std::runtime_error("bad layout in container");
}

void write_element(Writer& w, const GroupElement& g) {
    w.u32(static_cast<std::uint32_t>(g.kind()));
    switch (g.kind()) {
        case GroupKind::Identity: w.u64(0); break;
        case GroupKind::Permutation: {
            w.u64(g.perm().size());
            for (int v : g.perm()) w.f64(static_cast<double>(v));
            break;
        }
        case GroupKind::Rotation2D:
            w.u64(1);
            w.f64(g.theta());
            break;
        case GroupKind::Translation2D:
            w.u64(2);
            w.f64(g.dx());
            w.f64(g.dy());
            break;
        case GroupKind::Scaling2D:
            w.u64(1);
            w.f64(g.scale());
            break;
        case GroupKind::Affine2D: {
            w.u64(6);
            const auto& a = g.matrix();
            w.f64(a(0, 0)); w.f64(a(0, 1)); w.f64(a(1, 0)); w.f64(a(1, 1));
            w.f64(g.offset().x()); w.f64(g.offset().y());
            break;
        }
    }
}

GroupElement read_element(Reader& r) {
    const auto kind = static_cast<GroupKind>(r.u32());
    const std::uint64_t count = r.u64();
    switch (kind) {
        case GroupKind::Identity: return GroupElement::identity();
        case GroupKind::Permutation: {
            std::vector<int> perm(count);
            for (auto& v : perm) v = static_cast<int>(r.f64());
            return GroupElement::permutation(std::move(perm));
        }
        case GroupKind::Rotation2D: return GroupElement::rotation(r.f64());
        case GroupKind::Translation2D: {
            const double dx = r.f64(), dy = r.f64();
            return GroupElement::translation(dx, dy);
        }
        case GroupKind::Scaling2D: return GroupElement::scaling(r.f64());
        case GroupKind::Affine2D: {
            Eigen::Matrix2d a;
            a(0, 0) = r.f64(); a(0, 1) = r.f64(); a(1, 0) = r.f64(); a(1, 1) = r.f64();
            Eigen::Vector2d b;
            b.x() = r.f64(); b.y() = r.f64();
            return GroupElement::affine(a, b);
        }
    }
    throw std::runtime_error("bad group element in container");
}

void write_pool(Writer& w, const std::vector<GroupElement>& pool) {
    w.u64(pool.size());
    for (const auto& g : pool) write_element(w, g);
}

std::vector<GroupElement> read_pool(Reader& r) {
    std::vector<GroupElement> pool(r.u64());
    for (auto& g : pool) g = read_element(r);
    return pool;
}

}  // namespace

struct FeatureMapCodec {
    static void write_rf(Writer& w, const RFFeatureMap& m) {
        w.u32(static_cast<std::uint32_t>(m.variant_));
        w.u32(static_cast<std::uint32_t>(m.transfer_));
        w.u32(m.unitary_ ? 1 : 0);
        write_layout(w, m.layout_);
        w.f64(m.sigma_);
        w.matrix(m.templates_);
        w.vector(m.phases_);
        write_pool(w, m.pool_);
    }

    static RFFeatureMap read_rf(Reader& r) {
        RFFeatureMap m;
        m.variant_ = static_cast<RFVariant>(r.u32());
        m.transfer_ = static_cast<TransferMode>(r.u32());
        m.unitary_ = r.u32() != 0;
        m.layout_ = read_layout(r);
        m.sigma_ = r.f64();
        m.templates_ = r.matrix();
        m.phases_ = r.vector();
        m.pool_ = read_pool(r);
        if (m.transfer_ == TransferMode::TemplateSide) m.precompute_transfer();
        return m;
    }

    static void write_nys(Writer& w, const NysFeatureMap& m) {
        w.u32(static_cast<std::uint32_t>(m.transfer_));
        w.u32(m.unitary_ ? 1 : 0);
        write_layout(w, m.layout_);
        w.f64(m.base_.sigma());
        w.f64(m.rank_tol_);
        w.matrix(m.landmarks_);
        w.matrix(m.factor_);
        write_pool(w, m.pool_);
    }

    static NysFeatureMap read_nys(Reader& r) {
        NysFeatureMap m;
        m.transfer_ = static_cast<TransferMode>(r.u32());
        m.unitary_ = r.u32() != 0;
        m.layout_ = read_layout(r);
        m.base_ = BaseKernel(r.f64());
        m.rank_tol_ = r.f64();
        m.landmarks_ = r.matrix();
        m.factor_ = r.matrix();
        m.pool_ = read_pool(r);
        if (m.transfer_ == TransferMode::TemplateSide) m.precompute_transfer();
        return m;
    }

    static void write_two_layer(Writer& w, const TwoLayerMap& m) {
        if (std::holds_alternative<RFFeatureMap>(m.layer1_)) {
            w.u32(kRF);
            write_rf(w, std::get<RFFeatureMap>(m.layer1_));
        } else {
            w.u32(kNys);
            write_nys(w, std::get<NysFeatureMap>(m.layer1_));
        }
        w.f64(m.sigma2_);
        w.matrix(m.templates2_);
        w.vector(m.phases2_);
    }

    static TwoLayerMap read_two_layer(Reader& r) {
        TwoLayerMap m;
        const std::uint32_t inner = r.u32();
        if (inner == kRF) {
            m.layer1_ = read_rf(r);
        } else if (inner == kNys) {
            m.layer1_ = read_nys(r);
        } else {
            throw std::runtime_error("bad layer-1 kind in container");
        }
        m.sigma2_ = r.f64();
        m.templates2_ = r.matrix();
        m.phases2_ = r.vector();
        return m;
    }
};

void save_feature_map(const AnyFeatureMap& map, const std::string& path) {
    Writer w(path);
    w.raw(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    if (std::holds_alternative<RFFeatureMap>(map)) {
        w.u32(kRF);
        FeatureMapCodec::write_rf(w, std::get<RFFeatureMap>(map));
    } else if (std::holds_alternative<NysFeatureMap>(map)) {
        w.u32(kNys);
        FeatureMapCodec::write_nys(w, std::get<NysFeatureMap>(map));
    } else {
        w.u32(kTwoLayer);
        FeatureMapCodec::write_two_layer(w, std::get<TwoLayerMap>(map));
    }
    w.done();
}

namespace {

std::uint32_t read_header(Reader& r) {
    std::array<char, 8> magic{};
    r.raw(magic.data(), magic.size());
    if (magic != kMagic) throw std::runtime_error("not a feature container");
    const std::uint32_t version = r.u32();
    if (version != kVersion) throw std::runtime_error("unsupported container version");
    return r.u32();
}

}  // namespace

AnyFeatureMap load_feature_map(const std::string& path) {
    Reader r(path);
    switch (read_header(r)) {
        case kRF: return FeatureMapCodec::read_rf(r);
        case kNys: return FeatureMapCodec::read_nys(r);
        case kTwoLayer: return FeatureMapCodec::read_two_layer(r);
        default: throw std::runtime_error("unknown payload kind");
    }
}

void save_ridge_model(const RidgeModel& model, const std::string& path) {
    Writer w(path);
    w.raw(kMagic.data(), kMagic.size());
    w.u32(kVersion);
    w.u32(kRidge);
    w.f64(model.lambda);
    w.matrix(model.weights);
    w.vector(model.intercepts.transpose());
    w.done();
}

RidgeModel load_ridge_model(const std::string& path) {
    Reader r(path);
    if (read_header(r) != kRidge) throw std::runtime_error("not a ridge model container");
    RidgeModel m;
    m.lambda = r.f64();
    m.weights = r.matrix();
    m.intercepts = r.vector().transpose();
    return m;
}

}  // namespace orbitfeat
