// Python module auxfm._core. Tensors cross the boundary as float64 numpy arrays.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <cstring>
#include <optional>

#include "auxfm/error.hpp"
#include "auxfm/io.hpp"
#include "auxfm/metrics.hpp"
#include "auxfm/sample.hpp"
#include "auxfm/train.hpp"

namespace py = pybind11;
using namespace auxfm;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Tensor to_tensor(const Array& a) {
    if (a.ndim() != 2) throw ShapeError("expected a 2-D array, got " + std::to_string(a.ndim()) + " dims");
    Tensor t(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    if (t.size() > 0) std::memcpy(t.flat().data(), a.data(), t.size() * sizeof(double));
    return t;
}

Array to_array(const Tensor& t) {
    Array a({t.rows(), t.cols()});
    if (t.size() > 0) std::memcpy(a.mutable_data(), t.flat().data(), t.size() * sizeof(double));
    return a;
}

py::dict sample_dict(const SampleResult& r) {
    py::dict d;
    d["samples"] = to_array(r.samples);
    d["velocity_evaluations"] = r.velocity_evaluations;
    d["prototype_evaluations"] = r.prototype_evaluations;
    if (r.trajectory) {
        py::list states;
        for (const auto& s : r.trajectory->states) states.append(to_array(s));
        d["times"] = r.trajectory->times;
        d["states"] = states;
    }
    return d;
}

SampleConfig sample_config(std::size_t steps, std::size_t batch, std::uint64_t seed, double guidance,
                           bool trajectory) {
    SampleConfig sc;
    sc.steps = steps;
    sc.batch = batch;
    sc.seed = seed;
    sc.guidance = guidance;
    sc.record_trajectory = trajectory;
    return sc;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Flow matching with auxiliary paths (C++ core)";

    py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    py::class_<LabeledDataset>(m, "Dataset")
        .def_property_readonly("points", [](const LabeledDataset& d) { return to_array(d.points); })
        .def_readonly("labels", &LabeledDataset::labels)
        .def_property_readonly("mode_centers", [](const LabeledDataset& d) { return to_array(d.mode_centers); })
        .def("__len__", &LabeledDataset::size)
        .def_property_readonly("num_classes", &LabeledDataset::num_classes);

    m.def("make_ring", [](std::size_t k, std::size_t n_per_mode, double jitter, std::uint64_t seed) {
        RngStream rng(seed);
        return make_ring(k, n_per_mode, jitter, rng);
    }, py::arg("num_modes"), py::arg("n_per_mode"), py::arg("jitter") = 0.02, py::arg("seed") = 0);
    m.def("make_bimodal_ring", [](double separation, double jitter, std::size_t n, std::uint64_t seed) {
        RngStream rng(seed);
        return make_bimodal_ring(separation, jitter, n, rng);
    }, py::arg("separation") = 2.0, py::arg("jitter") = 0.1, py::arg("n") = 2000, py::arg("seed") = 0);

    py::class_<VelocityModel>(m, "VelocityModel")
        .def_property_readonly("dim", &VelocityModel::dim)
        .def_property_readonly("num_classes", &VelocityModel::num_classes)
        .def_property_readonly("forward_calls", [](const VelocityModel& v) { return v.net().forward_calls(); })
        .def("__call__", [](const VelocityModel& v, const Array& x, double t, std::vector<int> labels) {
            return to_array(velocity(v, to_tensor(x), t, labels));
        }, py::arg("x"), py::arg("t"), py::arg("labels") = std::vector<int>{});
    py::class_<PrototypeModel>(m, "PrototypeModel")
        .def_property_readonly("num_classes", &PrototypeModel::num_classes)
        .def("__call__", [](const PrototypeModel& p, std::vector<int> labels) {
            return to_array(prototypes(p, labels));
        });

    m.attr("NULL_LABEL") = kNullLabel;

    // Training from config text, so every config key is reachable without
    // mirroring the structs.
    m.def("train", [](const std::string& config_text, std::optional<std::uint64_t> seed,
                      const VelocityModel* pretrained) {
        RunConfig cfg = parse_config(config_text, "<python>");
        if (seed) cfg.train.seed = *seed;
        cfg.build_dataset();
        TrainOutputs out;
        {
            py::gil_scoped_release release;
            out = run_training(cfg.train, pretrained);
        }
        py::dict d;
        d["velocity"] = std::move(out.velocity);
        d["loss"] = out.velocity_loss;
        if (out.prototype) {
            d["prototype"] = std::move(*out.prototype);
            d["prototype_loss"] = out.prototype_loss;
        }
        d["dataset"] = cfg.train.dataset;
        return d;
    }, py::arg("config") = "", py::arg("seed") = py::none(), py::arg("pretrained") = nullptr);

    m.def("euler_sample", [](const VelocityModel& v, std::size_t steps, std::size_t batch, std::uint64_t seed,
                             std::vector<int> labels, bool trajectory) {
        return sample_dict(euler_sample(v, sample_config(steps, batch, seed, 1.0, trajectory), labels));
    }, py::arg("model"), py::arg("steps") = 100, py::arg("batch") = 2000, py::arg("seed") = 0,
       py::arg("labels") = std::vector<int>{}, py::arg("trajectory") = false);
    m.def("conditional_sample", [](const VelocityModel& v, const PrototypeModel& p, std::vector<int> labels,
                                   std::size_t steps, std::uint64_t seed, bool trajectory) {
        return sample_dict(conditional_sample(v, p, labels, sample_config(steps, labels.size(), seed, 1.0, trajectory)));
    }, py::arg("model"), py::arg("prototype"), py::arg("labels"), py::arg("steps") = 100, py::arg("seed") = 0,
       py::arg("trajectory") = false);
    m.def("cfg_sample", [](const VelocityModel& v, const PrototypeModel& p, std::vector<int> labels, double w,
                           std::size_t steps, std::uint64_t seed, bool trajectory) {
        return sample_dict(cfg_sample(v, p, labels, sample_config(steps, labels.size(), seed, w, trajectory)));
    }, py::arg("model"), py::arg("prototype"), py::arg("labels"), py::arg("guidance"), py::arg("steps") = 100,
       py::arg("seed") = 0, py::arg("trajectory") = false);

    m.def("mode_accuracy", [](const Array& x, std::vector<int> labels, const Array& centers) {
        return mode_accuracy(to_tensor(x), labels, to_tensor(centers));
    });
    m.def("distance_error", [](const Array& x, const Array& centers) {
        return distance_error(to_tensor(x), to_tensor(centers));
    });
    m.def("energy_distance", [](const Array& a, const Array& b) { return energy_distance(to_tensor(a), to_tensor(b)); });

    m.def("continuity_check", [](double t, std::size_t particles, std::size_t steps, std::size_t permutations,
                                 std::uint64_t seed, double adot_scale) {
        ContinuityOptions opts;
        opts.permutations = permutations;
        opts.field.adot_scale = adot_scale;
        ContinuityReport r;
        {
            py::gil_scoped_release release;
            r = continuity_check(OracleInstance::finite_support_default(), particles, steps, t, seed, opts);
        }
        py::dict d;
        d["discrepancy"] = r.discrepancy;
        d["threshold"] = r.threshold;
        d["p_value"] = r.p_value;
        d["passed"] = r.passed;
        return d;
    }, py::arg("t"), py::arg("particles") = 10000, py::arg("steps") = 200, py::arg("permutations") = 500,
       py::arg("seed") = 0, py::arg("adot_scale") = 1.0);

    m.def("save_velocity", [](const VelocityModel& v, const std::filesystem::path& p) { save_checkpoint(v, p); });
    m.def("save_prototype", [](const PrototypeModel& v, const std::filesystem::path& p) { save_checkpoint(v, p); });
    m.def("load_velocity", &load_velocity, py::arg("path"), py::arg("dim") = 2);
    m.def("load_prototype", &load_prototype);
    m.def("config_keys", &config_keys);
}
