#include "orbitfeat/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "orbitfeat/csv.hpp"
#include "orbitfeat/rng.hpp"

namespace orbitfeat {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::VectorXd perm_invariant_sample(Rng& rng, int n) {
    Eigen::VectorXd scale(n);
    for (int i = 0; i < n; ++i) scale[i] = std::exp(0.4 * rng.gaussian());
    Eigen::VectorXd flat(n * n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            const double v = scale[i] * scale[j] * rng.gaussian();
            flat[static_cast<Eigen::Index>(i) * n + j] = v;
            flat[static_cast<Eigen::Index>(j) * n + i] = v;
        }
    }
    return flat;
}

// Every class is three equal blobs on the same ring; only the relative
// angular arrangement differs. That keeps blob count, width, and the radial
// mass profile identical across classes, so no rotation-invariant scalar
// shortcut separates them; telling classes apart requires handling the
// rotation itself.
constexpr double kClassOffsets[8][3] = {
    {0.0, 2.0943951, 4.1887902},  // 0, 120, 240 degrees
    {0.0, 1.5707963, 3.1415927},  // 0, 90, 180
    {0.0, 1.0471976, 3.1415927},  // 0, 60, 180
    {0.0, 1.5707963, 3.6651914},  // 0, 90, 210
    {0.0, 0.7853982, 3.1415927},  // 0, 45, 180
    {0.0, 1.0471976, 2.0943951},  // 0, 60, 120
    {0.0, 0.7853982, 2.3561945},  // 0, 45, 135
    {0.0, 1.8325957, 3.6651914},  // 0, 105, 210
};

/// Class pattern rotated by theta, with optional affine-task jitter; the
/// blobs are evaluated analytically so the data itself carries no
/// interpolation error.
Eigen::VectorXd blob_pattern(int cls, double theta, int size, double scale, double shift_x,
                             double shift_y) {
    const double radius = scale * 0.28 * size;
    const double width = scale * 0.10 * size;
    const double c = 0.5 * (size - 1);
    Eigen::VectorXd img = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size) * size);
    for (int b = 0; b < 3; ++b) {
        const double phi = theta + kClassOffsets[cls][b];
        const double bx = radius * std::cos(phi) + shift_x;
        const double by = radius * std::sin(phi) + shift_y;
        for (int row = 0; row < size; ++row) {
            for (int col = 0; col < size; ++col) {
                const double dx = (col - c) - bx;
                const double dy = (row - c) - by;
                img[static_cast<Eigen::Index>(row) * size + col] +=
                    std::exp(-(dx * dx + dy * dy) / (2.0 * width * width));
            }
        }
    }
    const double norm = img.norm();
    if (norm > 0.0) img /= norm;
    return img;
}

void fill_shapes(const SyntheticTask& t, Rng& rng, bool affine, Eigen::MatrixXd& x,
                 Eigen::VectorXi& labels, int count) {
    const int size = t.image_size;
    x.resize(count, static_cast<Eigen::Index>(size) * size);
    labels.resize(count);
    for (int i = 0; i < count; ++i) {
        const int cls = static_cast<int>(rng.below(static_cast<std::uint64_t>(t.n_classes)));
        const double theta = rng.uniform(0.0, t.angle_range);
        double scale = 1.0, sx = 0.0, sy = 0.0;
        if (affine) {
            scale = std::exp(t.scale_sigma * rng.gaussian());
            sx = t.trans_sigma * rng.gaussian();
            sy = t.trans_sigma * rng.gaussian();
        }
        Eigen::VectorXd img = blob_pattern(cls, theta, size, scale, sx, sy);
        if (t.pixel_noise > 0.0)
            for (Eigen::Index p = 0; p < img.size(); ++p) img[p] += t.pixel_noise * rng.gaussian();
        x.row(i) = img;
        labels[i] = cls;
    }
}

}  // namespace

double perm_invariant_target(const Eigen::Ref<const Eigen::VectorXd>& flat, int n) {
    if (flat.size() != static_cast<Eigen::Index>(n) * n)
        throw std::invalid_argument("perm_invariant_target: bad length");
    Eigen::VectorXd row_norms(n);
    for (int i = 0; i < n; ++i) row_norms[i] = flat.segment(static_cast<Eigen::Index>(i) * n, n).norm();
    std::sort(row_norms.data(), row_norms.data() + n, std::greater<double>());
    double t = 0.0;
    for (int i = 0; i < n; ++i) t += row_norms[i] / static_cast<double>(1 + i);
    return t + 2.0 * std::sin(row_norms.mean());
}

Dataset generate_task(const SyntheticTask& task) {
    if (task.n_train < 1 || task.n_test < 1)
        throw std::invalid_argument("generate_task: counts must be >= 1");
    Dataset out;
    Rng train_rng(derive_seed(task.seed, seed_stream::kTaskTrain));
    Rng test_rng(derive_seed(task.seed, seed_stream::kTaskTest));

    switch (task.generator) {
        case SyntheticTask::Generator::PermInvariantRegression: {
            const int n = task.matrix_order;
            if (n < 2) throw std::invalid_argument("generate_task: matrix order must be >= 2");
            out.layout = InputLayout::symmetric_matrix(n);
            out.kind = TaskKind::Regression;
            auto fill = [&](Rng& rng, Eigen::MatrixXd& x, Eigen::MatrixXd& y, int count) {
                x.resize(count, static_cast<Eigen::Index>(n) * n);
                y.resize(count, 1);
                for (int i = 0; i < count; ++i) {
                    const Eigen::VectorXd flat = perm_invariant_sample(rng, n);
                    x.row(i) = flat;
                    y(i, 0) = perm_invariant_target(flat, n) + task.noise * rng.gaussian();
                }
            };
            fill(train_rng, out.x_train, out.y_train, task.n_train);
            fill(test_rng, out.x_test, out.y_test, task.n_test);
            return out;
        }
        case SyntheticTask::Generator::RotatedShapesClassification:
        case SyntheticTask::Generator::AffineShapes: {
            if (task.image_size < 4) throw std::invalid_argument("generate_task: image too small");
            if (task.n_classes < 2 || task.n_classes > 8)
                throw std::invalid_argument("generate_task: n_classes must be in 2..8");
            const bool affine = task.generator == SyntheticTask::Generator::AffineShapes;
            out.layout = InputLayout::image(task.image_size, task.image_size);
            out.kind = TaskKind::Classification;
            out.n_classes = task.n_classes;
            fill_shapes(task, train_rng, affine, out.x_train, out.labels_train, task.n_train);
            fill_shapes(task, test_rng, affine, out.x_test, out.labels_test, task.n_test);
            out.y_train = one_hot(out.labels_train, task.n_classes);
            out.y_test = one_hot(out.labels_test, task.n_classes);
            return out;
        }
    }
    throw std::logic_error("generate_task: unreachable");
}

void split_xy(const Eigen::Ref<const Eigen::MatrixXd>& table, Eigen::MatrixXd& x,
              Eigen::VectorXd& y) {
    if (table.cols() < 2) throw std::invalid_argument("split_xy: need at least two columns");
    x = table.leftCols(table.cols() - 1);
    y = table.col(table.cols() - 1);
}

Eigen::MatrixXd read_csv(const std::string& path, bool has_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open csv: " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (first && has_header) {
            first = false;
            continue;
        }
        first = false;
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (!rows.empty() && row.size() != rows.front().size())
            throw std::runtime_error("ragged csv: " + path);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::runtime_error("empty csv: " + path);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                      static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    return m;
}

namespace {

std::string generator_name(SyntheticTask::Generator g) {
    switch (g) {
        case SyntheticTask::Generator::PermInvariantRegression: return "perm_invariant_regression";
        case SyntheticTask::Generator::RotatedShapesClassification: return "rotated_shapes";
        case SyntheticTask::Generator::AffineShapes: return "affine_shapes";
    }
    throw std::logic_error("generator_name: unreachable");
}

SyntheticTask::Generator generator_from_name(const std::string& name) {
    if (name == "perm_invariant_regression")
        return SyntheticTask::Generator::PermInvariantRegression;
    if (name == "rotated_shapes") return SyntheticTask::Generator::RotatedShapesClassification;
    if (name == "affine_shapes") return SyntheticTask::Generator::AffineShapes;
    throw std::invalid_argument("unknown task generator: " + name);
}

}  // namespace

void to_json(nlohmann::json& j, const SyntheticTask& t) {
    j = {{"generator", generator_name(t.generator)},
         {"matrix_order", t.matrix_order},
         {"noise", t.noise},
         {"image_size", t.image_size},
         {"n_classes", t.n_classes},
         {"angle_range", t.angle_range},
         {"pixel_noise", t.pixel_noise},
         {"scale_sigma", t.scale_sigma},
         {"trans_sigma", t.trans_sigma},
         {"train", t.n_train},
         {"test", t.n_test}};
}

void from_json(const nlohmann::json& j, SyntheticTask& t) {
    t.generator = generator_from_name(j.at("generator").get<std::string>());
    t.matrix_order = j.value("matrix_order", t.matrix_order);
    t.noise = j.value("noise", t.noise);
    t.image_size = j.value("image_size", t.image_size);
    t.n_classes = j.value("n_classes", t.n_classes);
    t.angle_range = j.value("angle_range", t.angle_range);
    t.pixel_noise = j.value("pixel_noise", t.pixel_noise);
    t.scale_sigma = j.value("scale_sigma", t.scale_sigma);
    t.trans_sigma = j.value("trans_sigma", t.trans_sigma);
    t.n_train = j.value("train", t.n_train);
    t.n_test = j.value("test", t.n_test);
}

}  // namespace orbitfeat
