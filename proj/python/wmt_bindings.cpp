#include <pybind11/numpy.h>
#include <pybind11/operators.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wmt/discrete_ot.hpp"
#include "wmt/errors.hpp"
#include "wmt/experiments.hpp"
#include "wmt/gaussian_ot.hpp"
#include "wmt/io.hpp"
#include "wmt/multiscale.hpp"
#include "wmt/transport_ops.hpp"

namespace py = pybind11;
using namespace wmt;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

DiscreteMeasure discrete_from_arrays(const Array& points, std::optional<Array> weights) {
  const auto buf = points.request();
  if (buf.ndim != 1 && buf.ndim != 2) throw Error(ErrorCode::DimensionMismatch, "points must be 1-D or 2-D");
  const std::size_t m = static_cast<std::size_t>(buf.shape[0]);
  const std::size_t dim = buf.ndim == 2 ? static_cast<std::size_t>(buf.shape[1]) : 1;
  const auto* p = static_cast<const double*>(buf.ptr);
  std::vector<double> coords(p, p + m * dim);
  if (!weights) return DiscreteMeasure::uniform(dim, std::move(coords));
  const auto wb = weights->request();
  if (wb.ndim != 1 || static_cast<std::size_t>(wb.shape[0]) != m)
    throw Error(ErrorCode::DimensionMismatch, "weights must have one entry per point");
  const auto* w = static_cast<const double*>(wb.ptr);
  return DiscreteMeasure(dim, std::move(coords), std::vector<double>(w, w + m));
}

Array points_of(const DiscreteMeasure& mu) {
  Array out({mu.size(), mu.dim()});
  std::copy(mu.coords().begin(), mu.coords().end(), out.mutable_data());
  return out;
}

Array to_array(std::span<const double> v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Measure to_measure(const py::handle& h) {
  if (py::isinstance<GaussianMeasure>(h)) return h.cast<GaussianMeasure>();
  if (py::isinstance<DiscreteMeasure>(h)) return h.cast<DiscreteMeasure>();
  throw py::type_error("expected GaussianMeasure or DiscreteMeasure");
}

py::object from_measure(const Measure& m) {
  return std::visit([](const auto& x) { return py::cast(x); }, m);
}

Array plan_of(const Coupling& c) {
  Array out({c.rows(), c.cols()});
  std::copy(c.entries().begin(), c.entries().end(), out.mutable_data());
  return out;
}

}  // namespace

PYBIND11_MODULE(_wmt, m) {
  m.doc() = "Wasserstein multiscale transforms";

  static py::exception<Error> error_type(m, "WmtError");
  py::register_exception_translator([](std::exception_ptr ep) {
    try {
      if (ep) std::rethrow_exception(ep);
    } catch (const Error& e) {
      py::object inst = py::handle(error_type.ptr())(e.what());
      inst.attr("code") = std::string(to_string(e.code()));
      PyErr_SetObject(error_type.ptr(), inst.ptr());
    }
  });

  py::enum_<MeasureKind>(m, "MeasureKind")
      .value("Gaussian", MeasureKind::Gaussian)
      .value("Discrete", MeasureKind::Discrete);

  py::class_<GaussianMeasure>(m, "GaussianMeasure")
      .def(py::init<double, double>(), py::arg("mean"), py::arg("variance"))
      .def_property_readonly("mean", &GaussianMeasure::mean)
      .def_property_readonly("variance", &GaussianMeasure::variance)
      .def_property_readonly("stddev", &GaussianMeasure::stddev)
      .def(py::self == py::self)
      .def("__repr__", [](const GaussianMeasure& g) {
        return "GaussianMeasure(mean=" + format_double(g.mean()) + ", variance=" + format_double(g.variance()) + ")";
      });

  py::class_<DiscreteMeasure>(m, "DiscreteMeasure")
      .def(py::init(&discrete_from_arrays), py::arg("points"), py::arg("weights") = py::none())
      .def_property_readonly("dim", &DiscreteMeasure::dim)
      .def_property_readonly("points", &points_of)
      .def_property_readonly("weights", [](const DiscreteMeasure& mu) { return to_array(mu.weights()); })
      .def("__len__", &DiscreteMeasure::size)
      .def(py::self == py::self)
      .def("__repr__", [](const DiscreteMeasure& mu) {
        return "DiscreteMeasure(atoms=" + std::to_string(mu.size()) + ", dim=" + std::to_string(mu.dim()) + ")";
      });

  py::class_<MeasureSequence>(m, "MeasureSequence")
      .def(py::init([](const py::iterable& elements, std::optional<int> level, double origin) {
             MeasureSequence seq;
             for (const auto& e : elements) seq.elements.push_back(to_measure(e));
             seq.level = level.value_or(default_level(seq.size()));
             seq.grid_origin = origin;
             validate_sequence(seq);
             return seq;
           }),
           py::arg("elements"), py::arg("level") = py::none(), py::arg("grid_origin") = 0.0)
      .def_property_readonly("elements",
                             [](const MeasureSequence& s) {
                               py::list out;
                               for (const auto& e : s.elements) out.append(from_measure(e));
                               return out;
                             })
      .def_readonly("level", &MeasureSequence::level)
      .def_readonly("grid_origin", &MeasureSequence::grid_origin)
      .def_property_readonly("kind", &MeasureSequence::kind)
      .def("time_of", &MeasureSequence::time_of)
      .def("__len__", &MeasureSequence::size)
      .def("__getitem__", [](const MeasureSequence& s, std::size_t i) {
        if (i >= s.size()) throw py::index_error();
        return from_measure(s.elements[i]);
      })
      .def("to_json", [](const MeasureSequence& s) { return to_json(s).dump(); });

  py::class_<Pyramid>(m, "Pyramid")
      .def_readonly("coarse", &Pyramid::coarse)
      .def_readonly("norms", &Pyramid::norms)
      .def_readonly("p", &Pyramid::p)
      .def_readonly("kind", &Pyramid::kind)
      .def_property_readonly("levels", &Pyramid::levels)
      .def("to_json", [](const Pyramid& p) { return to_json(p).dump(); })
      .def_static("from_json", [](const std::string& text) { return pyramid_from_json(nlohmann::json::parse(text)); });

  py::class_<Anomaly>(m, "Anomaly")
      .def_readonly("level", &Anomaly::level)
      .def_readonly("index", &Anomaly::index)
      .def_readonly("norm", &Anomaly::norm)
      .def_readonly("time", &Anomaly::time);

  py::class_<OptimalityResult>(m, "OptimalityResult")
      .def_readonly("omega", &OptimalityResult::omega)
      .def_readonly("omega_unshifted", &OptimalityResult::omega_unshifted)
      .def_readonly("omega_shifted", &OptimalityResult::omega_shifted)
      .def_readonly("shifted_levels", &OptimalityResult::shifted_levels)
      .def_readonly("dropped_trailing", &OptimalityResult::dropped_trailing);

  m.def(
      "distance", [](const py::handle& a, const py::handle& b, double p) { return distance(to_measure(a), to_measure(b), p); },
      py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
  m.def(
      "solve_ot",
      [](const DiscreteMeasure& mu, const DiscreteMeasure& nu, double p) {
        const auto sol = solve_kantorovich(mu, nu, p);
        return py::make_tuple(sol.cost.value, plan_of(sol.plan));
      },
      py::arg("mu"), py::arg("nu"), py::arg("p") = 2.0, "Optimal cost and dense plan.");
  m.def(
      "mccann",
      [](const py::handle& a, const py::handle& b, double t, double p) {
        return from_measure(mccann_average(to_measure(a), to_measure(b), t, p));
      },
      py::arg("a"), py::arg("b"), py::arg("t"), py::arg("p") = 2.0);

  m.def("subdivide", &subdivide, py::arg("seq"), py::arg("p") = 2.0);
  m.def("subdivide_r", &subdivide_r, py::arg("seq"), py::arg("r"), py::arg("p") = 2.0);
  m.def("downsample", &downsample, py::arg("seq"));
  m.def("analyze", &analyze, py::arg("seq"), py::arg("levels"), py::arg("p") = 2.0);
  m.def("synthesize", &synthesize, py::arg("pyramid"));
  m.def(
      "optimality_number",
      [](const Pyramid& pyr, std::vector<double> weights) { return optimality_number(pyr, weights); },
      py::arg("pyramid"), py::arg("level_weights") = std::vector<double>{});
  m.def(
      "optimality",
      [](const MeasureSequence& seq, int levels, bool shift, double p) {
        return optimality_number(seq, levels, OptimalityOptions{shift, {}}, p);
      },
      py::arg("seq"), py::arg("levels"), py::arg("shift_averaged") = false, py::arg("p") = 2.0);
  m.def("threshold_details", &threshold_details, py::arg("pyramid"), py::arg("threshold"));
  m.def("count_nonzero_details", &count_nonzero_details, py::arg("pyramid"));
  m.def("detect_anomalies", &detect_anomalies, py::arg("pyramid"), py::arg("base"), py::arg("k_sigma") = 3.0);
  m.def("elementwise_distance", &elementwise_distance, py::arg("a"), py::arg("b"), py::arg("p") = 2.0);
  m.def("seq_delta", &seq_delta, py::arg("seq"), py::arg("p") = 2.0);

  m.def(
      "gen_gaussian_curve",
      [](const std::string& spec_json) { return gen_gaussian_curve(curve_spec_from_json(nlohmann::json::parse(spec_json))).sequence; },
      py::arg("spec_json") = "{}");
  m.def("gen_weighted_family", &gen_weighted_family, py::arg("smooth"), py::arg("k"));
  m.def(
      "simulate_dipole",
      [](const std::string& spec_json) { return simulate_dipole(dipole_spec_from_json(nlohmann::json::parse(spec_json))); },
      py::arg("spec_json") = "{}");

  m.def(
      "read_sequence", [](const std::filesystem::path& path) { return read_sequence(path); }, py::arg("path"));
  m.def(
      "write_sequence",
      [](const std::filesystem::path& path, const MeasureSequence& seq) {
        write_sequence(path, seq, format_from_path(path));
      },
      py::arg("path"), py::arg("seq"));
}
