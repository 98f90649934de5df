#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "orbitfeat/experiments.hpp"
#include "orbitfeat/selfcheck.hpp"
#include "orbitfeat/serialize.hpp"

namespace py = pybind11;
using namespace orbitfeat;

PYBIND11_MODULE(_core, m) {
    m.doc() = "local group invariant kernel features";

    py::class_<InputLayout>(m, "InputLayout")
        .def_static("vector", &InputLayout::vector, py::arg("d"))
        .def_static("image", &InputLayout::image, py::arg("height"), py::arg("width"))
        .def_static("symmetric_matrix", &InputLayout::symmetric_matrix, py::arg("n"))
        .def("dim", &InputLayout::dim);

    py::class_<GroupElement>(m, "GroupElement")
        .def_static("identity", &GroupElement::identity)
        .def_static("permutation", &GroupElement::permutation, py::arg("perm"))
        .def_static("rotation", &GroupElement::rotation, py::arg("theta"))
        .def_static("translation", &GroupElement::translation, py::arg("dx"), py::arg("dy"))
        .def_static("scaling", &GroupElement::scaling, py::arg("s"))
        .def_static("affine", &GroupElement::affine, py::arg("a"), py::arg("b"))
        .def("is_identity", &GroupElement::is_identity);

    m.def("compose", &compose, py::arg("g"), py::arg("h"));
    m.def("invert", &invert, py::arg("g"));
    m.def("jacobian_det", &jacobian_det, py::arg("g"));
    m.def("apply", &apply, py::arg("g"), py::arg("x"), py::arg("layout"),
          py::arg("unitary_normalize") = true);

    py::class_<GroupDistribution>(m, "GroupDistribution")
        .def_static("delta_identity", &GroupDistribution::delta_identity)
        .def_static("uniform_permutation", &GroupDistribution::uniform_permutation, py::arg("n"))
        .def_static("von_mises_rotation", &GroupDistribution::von_mises_rotation,
                    py::arg("kappa"), py::arg("mode") = 0.0)
        .def_static("gaussian_translation", &GroupDistribution::gaussian_translation,
                    py::arg("sigma"))
        .def_static("log_normal_scaling", &GroupDistribution::log_normal_scaling, py::arg("mu"),
                    py::arg("sigma"))
        .def_static("product_affine", &GroupDistribution::product_affine, py::arg("components"))
        .def("is_symmetric", &GroupDistribution::is_symmetric);

    m.def(
        "sample",
        [](const GroupDistribution& d, int r, std::uint64_t seed) { return sample(d, r, seed); },
        py::arg("dist"), py::arg("r"), py::arg("seed"));
    m.def("symmetrize_pool", &symmetrize_pool, py::arg("samples"));

    py::class_<BaseKernel>(m, "BaseKernel")
        .def(py::init<double>(), py::arg("sigma"))
        .def_property_readonly("sigma", &BaseKernel::sigma)
        .def("eval", &BaseKernel::eval, py::arg("x"), py::arg("y"))
        .def("gram", &BaseKernel::gram, py::arg("x"))
        .def("cross_gram", &BaseKernel::cross_gram, py::arg("x"), py::arg("z"))
        .def("spectral_sample", &BaseKernel::spectral_sample, py::arg("d"), py::arg("s"),
             py::arg("seed"));

    m.def("median_heuristic_sigma", &median_heuristic_sigma, py::arg("x"));

    py::enum_<OracleStatistic>(m, "OracleStatistic")
        .value("VStat", OracleStatistic::VStat)
        .value("UStat", OracleStatistic::UStat);

    py::class_<OracleKernel>(m, "OracleKernel")
        .def(py::init<BaseKernel, GroupDistribution, int, InputLayout, OracleStatistic, bool>(),
             py::arg("base"), py::arg("dist"), py::arg("r_oracle"), py::arg("layout"),
             py::arg("statistic") = OracleStatistic::VStat, py::arg("unitary_normalize") = true)
        .def_static("with_pool", &OracleKernel::with_pool, py::arg("base"), py::arg("pool"),
                    py::arg("layout"), py::arg("unitary_normalize") = true)
        .def_static("enumerate_permutations", &OracleKernel::enumerate_permutations, py::arg("n"))
        .def("eval", &OracleKernel::eval, py::arg("x"), py::arg("y"), py::arg("seed"))
        .def("eval_uv", &OracleKernel::eval_uv, py::arg("x"), py::arg("y"), py::arg("seed"))
        .def("gram", &OracleKernel::gram, py::arg("x"), py::arg("seed"));

    py::enum_<RFVariant>(m, "RFVariant")
        .value("RealCosine", RFVariant::RealCosine)
        .value("Complex", RFVariant::Complex);

    py::enum_<TransferMode>(m, "TransferMode")
        .value("DataSide", TransferMode::DataSide)
        .value("TemplateSide", TransferMode::TemplateSide);

    py::class_<RFFeatureMap>(m, "RFFeatureMap")
        .def_static("build", &RFFeatureMap::build, py::arg("base"), py::arg("dist"), py::arg("s"),
                    py::arg("r"), py::arg("layout"), py::arg("variant") = RFVariant::RealCosine,
                    py::arg("transfer") = TransferMode::DataSide, py::arg("seed") = 0,
                    py::arg("unitary_normalize") = true, py::arg("auto_symmetrize") = true)
        .def_static("build_with_pool", &RFFeatureMap::build_with_pool, py::arg("base"),
                    py::arg("pool"), py::arg("s"), py::arg("layout"),
                    py::arg("variant") = RFVariant::RealCosine,
                    py::arg("transfer") = TransferMode::DataSide, py::arg("seed") = 0,
                    py::arg("unitary_normalize") = true)
        .def("transform", &RFFeatureMap::transform, py::arg("x"))
        .def("output_dim", &RFFeatureMap::output_dim)
        .def_property_readonly("templates", &RFFeatureMap::templates)
        .def_property_readonly("group_pool", &RFFeatureMap::group_pool);

    py::class_<NysFeatureMap>(m, "NysFeatureMap")
        .def_static("build_from_data", &NysFeatureMap::build_from_data, py::arg("base"),
                    py::arg("dist"), py::arg("x"), py::arg("m"), py::arg("r"), py::arg("layout"),
                    py::arg("transfer") = TransferMode::DataSide, py::arg("rank_tol") = 1e-10,
                    py::arg("seed") = 0, py::arg("unitary_normalize") = true,
                    py::arg("auto_symmetrize") = true)
        .def("transform", &NysFeatureMap::transform, py::arg("x"))
        .def("output_dim", &NysFeatureMap::output_dim)
        .def_property_readonly("landmarks", &NysFeatureMap::landmarks);

    py::class_<TwoLayerMap>(m, "TwoLayerMap")
        .def_static(
            "build_on_rf",
            [](RFFeatureMap layer1, double sigma2, int s2, std::uint64_t seed) {
                return TwoLayerMap::build(std::move(layer1), sigma2, s2, seed);
            },
            py::arg("layer1"), py::arg("sigma2"), py::arg("s2"), py::arg("seed"))
        .def("transform", &TwoLayerMap::transform, py::arg("x"))
        .def("output_dim", &TwoLayerMap::output_dim);

    py::class_<RidgeModel>(m, "RidgeModel")
        .def_readonly("weights", &RidgeModel::weights)
        .def_readonly("intercepts", &RidgeModel::intercepts)
        .def_readonly("lambda_", &RidgeModel::lambda);

    m.def("fit_ridge", &fit_ridge, py::arg("features"), py::arg("targets"), py::arg("lambda_"));
    m.def("predict", &predict, py::arg("model"), py::arg("features"));
    m.def("classify", &classify, py::arg("model"), py::arg("features"));
    m.def("spectral_norm", &spectral_norm, py::arg("a"), py::arg("max_iter") = 200,
          py::arg("tol") = 1e-6);

    py::class_<SyntheticTask>(m, "SyntheticTask")
        .def(py::init<>())
        .def_readwrite("matrix_order", &SyntheticTask::matrix_order)
        .def_readwrite("noise", &SyntheticTask::noise)
        .def_readwrite("image_size", &SyntheticTask::image_size)
        .def_readwrite("n_classes", &SyntheticTask::n_classes)
        .def_readwrite("n_train", &SyntheticTask::n_train)
        .def_readwrite("n_test", &SyntheticTask::n_test)
        .def_readwrite("seed", &SyntheticTask::seed)
        .def_property(
            "generator",
            [](const SyntheticTask& t) { return static_cast<int>(t.generator); },
            [](SyntheticTask& t, int g) { t.generator = static_cast<SyntheticTask::Generator>(g); });

    py::class_<Dataset>(m, "Dataset")
        .def_readonly("x_train", &Dataset::x_train)
        .def_readonly("x_test", &Dataset::x_test)
        .def_readonly("y_train", &Dataset::y_train)
        .def_readonly("y_test", &Dataset::y_test)
        .def_readonly("labels_train", &Dataset::labels_train)
        .def_readonly("labels_test", &Dataset::labels_test)
        .def_readonly("layout", &Dataset::layout);

    m.def("generate_task", &generate_task, py::arg("task"));

    m.def(
        "save_feature_map",
        [](const RFFeatureMap& map, const std::string& path) {
            save_feature_map(AnyFeatureMap(map), path);
        },
        py::arg("map"), py::arg("path"));
    m.def(
        "load_rf_feature_map",
        [](const std::string& path) {
            AnyFeatureMap map = load_feature_map(path);
            return std::get<RFFeatureMap>(map);
        },
        py::arg("path"));

    m.def(
        "selfcheck",
        [](std::uint64_t seed) {
            std::vector<std::pair<std::string, bool>> rows;
            for (const auto& r : run_selfcheck(seed)) rows.emplace_back(r.name, r.passed);
            return rows;
        },
        py::arg("seed") = 0);
}
