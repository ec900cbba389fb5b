#include <algorithm>

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ilradmm/baselines.hpp"
#include "ilradmm/deblur.hpp"
#include "ilradmm/diagnostics.hpp"
#include "ilradmm/image.hpp"
#include "ilradmm/instances.hpp"
#include "ilradmm/trace_io.hpp"

namespace py = pybind11;
using namespace ilradmm;

namespace {

// Trace as an (iterations x 12) array in CSV column order.
Matrix trace_matrix(const IterateTrace& t) {
  Matrix m(t.size(), 12);
  for (long i = 0; i < t.size(); ++i) {
    const TraceRow& r = t.rows[static_cast<size_t>(i)];
    m.row(i) << static_cast<double>(r.iter), r.alpha, r.r, r.lagrangian, r.primal_residual,
        r.step_x, r.step_y, r.dual_step, r.kkt, r.weight_min, r.weight_max, r.snr;
  }
  return m;
}

py::dict run_dict(const RunResult& r) {
  py::dict d;
  d["x"] = r.state.x;
  d["y"] = r.state.y;
  d["p"] = r.state.p;
  d["iterations"] = r.trace.size();
  d["converged"] = r.converged;
  d["tau_hat"] = r.tau_hat;
  d["path_length"] = r.path_length;
  d["elapsed_seconds"] = r.elapsed_seconds;
  d["trace"] = trace_matrix(r.trace);
  d["csv"] = format_csv(r.trace);
  return d;
}

Matrix image_to_array(const ImageBuffer& img) {
  Matrix m(img.height, img.width);
  for (long i = 0; i < img.height; ++i)
    for (long j = 0; j < img.width; ++j) m(i, j) = img.at(i, j);
  return m;
}

ImageBuffer array_to_image(const Matrix& m) {
  ImageBuffer img(m.cols(), m.rows());
  for (long i = 0; i < m.rows(); ++i)
    for (long j = 0; j < m.cols(); ++j) img.at(i, j) = m(i, j);
  return img;
}

BaselineConfig make_config(double alpha0, double rho, double alpha_max, double r_margin,
                           int max_iter, double tol, int inner_iters) {
  BaselineConfig c;
  c.alpha0 = alpha0;
  c.rho = rho;
  c.alpha_max = alpha_max;
  c.r_margin = r_margin;
  c.max_iter = max_iter;
  c.primal_tol = c.step_tol = tol;
  c.inner_iters = inner_iters;
  return c;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "ILR-ADMM solver core";

  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DimensionError>(m, "DimensionError", error.ptr());
  py::register_exception<DomainError>(m, "DomainError", error.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", error.ptr());
  py::register_exception<ConvergenceError>(m, "ConvergenceError", error.ptr());
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<IoError>(m, "IoError", error.ptr());

  // operators
  py::class_<LinearOperator>(m, "LinearOperator")
      .def_static("dense", &LinearOperator::dense, py::arg("matrix"))
      .def_static("identity", &LinearOperator::identity, py::arg("n"), py::arg("scale") = 1.0)
      .def_static("difference_1d", &LinearOperator::difference_1d, py::arg("n"))
      .def_static("difference_2d", &LinearOperator::difference_2d, py::arg("rows"),
                  py::arg("cols"))
      .def_static("convolution_2d", &LinearOperator::convolution_2d, py::arg("rows"),
                  py::arg("cols"), py::arg("kernel"))
      .def_property_readonly("in_dim", &LinearOperator::in_dim)
      .def_property_readonly("out_dim", &LinearOperator::out_dim)
      .def_property_readonly("kind",
                             [](const LinearOperator& op) { return to_string(op.kind()); })
      .def("apply", &apply, py::arg("x"))
      .def("adjoint", &adjoint_apply, py::arg("p"))
      .def("to_dense", &LinearOperator::to_dense)
      .def("__repr__", [](const LinearOperator& op) {
        return "<LinearOperator " + to_string(op.kind()) + " " + std::to_string(op.out_dim()) +
               "x" + std::to_string(op.in_dim()) + ">";
      });
  m.def("operator_norm", &operator_norm, py::arg("op"), py::arg("tol") = 1e-8);
  m.def("smallest_positive_singular_value", &smallest_positive_singular_value, py::arg("op"));

  // penalties
  py::class_<ConcaveOuter>(m, "ConcaveOuter")
      .def_static("power", &ConcaveOuter::power, py::arg("q"), py::arg("epsilon"),
                  py::arg("scale") = 1.0)
      .def_static("log", &ConcaveOuter::log, py::arg("epsilon"), py::arg("scale") = 1.0)
      .def_static("etp", &ConcaveOuter::etp, py::arg("gamma"), py::arg("scale") = 1.0)
      .def_static("geman", &ConcaveOuter::geman, py::arg("gamma"), py::arg("scale") = 1.0)
      .def_static("laplace", &ConcaveOuter::laplace, py::arg("gamma"), py::arg("scale") = 1.0)
      .def_property_readonly("kind", [](const ConcaveOuter& g) { return to_string(g.kind); })
      .def_readonly("q", &ConcaveOuter::q)
      .def_readonly("epsilon", &ConcaveOuter::epsilon)
      .def_readonly("shape", &ConcaveOuter::shape)
      .def_readonly("scale", &ConcaveOuter::scale);

  py::class_<InnerConvex>(m, "InnerConvex")
      .def_static("abs", &InnerConvex::abs)
      .def_static("square", &InnerConvex::square)
      .def_property_readonly("kind", [](const InnerConvex& h) { return to_string(h.kind); });

  m.def("outer_value", &outer_value, py::arg("g"), py::arg("s"));
  m.def("outer_derivative", &outer_derivative, py::arg("g"), py::arg("s"));
  m.def(
      "compute_weights",
      [](const ConcaveOuter& g, const InnerConvex& h, const Vector& y) {
        return compute_weights(g, h, y).w;
      },
      py::arg("g"), py::arg("h"), py::arg("y"));
  m.def("prox_weighted_inner", &prox_weighted_inner, py::arg("h"), py::arg("w"), py::arg("r"),
        py::arg("v"));
  m.def("scalar_prox_composite", &scalar_prox_composite, py::arg("g"), py::arg("h"),
        py::arg("alpha"), py::arg("z"));

  // problems
  py::class_<ProblemSpec>(m, "Problem")
      .def(py::init([](const LinearOperator& psi, const Vector& b, const LinearOperator& a,
                       const LinearOperator& bop, const Vector& c, const ConcaveOuter& outer,
                       const InnerConvex& inner) {
             return ProblemSpec(SmoothLoss::least_squares(psi, b), ConstraintSystem(a, bop, c),
                                outer, inner);
           }),
           py::arg("psi"), py::arg("b"), py::arg("A"), py::arg("B"), py::arg("c"),
           py::arg("outer"), py::arg("inner") = InnerConvex::abs())
      .def_property_readonly("x_dim", &ProblemSpec::x_dim)
      .def_property_readonly("y_dim", &ProblemSpec::y_dim)
      .def_property_readonly("c_dim", &ProblemSpec::c_dim)
      .def("loss", [](const ProblemSpec& p, const Vector& x) { return p.loss.value(x); })
      .def("gradient", [](const ProblemSpec& p, const Vector& x) { return p.loss.gradient(x); });

  m.def(
      "dense_instance",
      [](long n, long m_, std::uint64_t seed, double q, double epsilon, double sigma) {
        DenseInstanceParams prm;
        prm.n = n;
        prm.m = m_;
        prm.seed = seed;
        prm.outer = ConcaveOuter::power(q, epsilon, sigma);
        return make_dense_instance(prm).problem;
      },
      py::arg("n") = 20, py::arg("m") = 20, py::arg("seed") = 7, py::arg("q") = 0.5,
      py::arg("epsilon") = 1e-7, py::arg("sigma") = 0.5);
  m.def("least_squares_minimizer", &least_squares_minimizer, py::arg("problem"));

  // solver
  m.def(
      "solve",
      [](const ProblemSpec& problem, const std::string& algo, double alpha0, double rho,
         double alpha_max, double r_margin, int max_iter, double tol, int inner_iters,
         std::optional<Vector> x0) {
        const BaselineConfig cfg =
            make_config(alpha0, rho, alpha_max, r_margin, max_iter, tol, inner_iters);
        std::optional<SolverState> start;
        if (x0) start = IlrAdmm(problem, cfg).initial_state(*x0);
        RunResult r;
        {
          py::gil_scoped_release nogil;
          r = run_algorithm(algorithm_kind_from_string(algo), problem, cfg, {}, start);
        }
        return run_dict(r);
      },
      py::arg("problem"), py::arg("algo") = "ilr", py::arg("alpha0") = 1.0,
      py::arg("rho") = 1.05, py::arg("alpha_max") = 1e3, py::arg("r_margin") = 1e-6,
      py::arg("max_iter") = 200, py::arg("tol") = 0.0, py::arg("inner_iters") = 10,
      py::arg("x0") = std::nullopt);

  // diagnostics
  m.def("lagrangian_value", &lagrangian_value, py::arg("x"), py::arg("y"), py::arg("p"),
        py::arg("problem"), py::arg("alpha"));
  m.def(
      "kkt_residual",
      [](const Vector& x, const Vector& y, const Vector& p, const ProblemSpec& pr) {
        return kkt_residual(x, y, p, pr).value();
      },
      py::arg("x"), py::arg("y"), py::arg("p"), py::arg("problem"));
  m.def(
      "constants",
      [](const ProblemSpec& pr, double alpha_max, double r_margin) {
        SolverConfig c;
        c.alpha0 = c.alpha_max = alpha_max;
        c.r_margin = r_margin;
        const DiagnosticsConstants k = constants_for(pr, c);
        py::dict d;
        d["theta"] = k.theta;
        d["eta"] = k.eta;
        d["lipschitz"] = k.lipschitz;
        d["delta"] = k.delta;
        d["nu"] = k.nu;
        d["descent_condition"] = k.descent_condition;
        d["range"] = to_string(k.range);
        return d;
      },
      py::arg("problem"), py::arg("alpha_max") = 1e3, py::arg("r_margin") = 1e-6);
  m.def(
      "grid_prox_oracle",
      [](const std::function<double(double)>& f, double lo, double hi, double step) {
        return grid_prox_oracle(f, lo, hi, step);
      },
      py::arg("objective"), py::arg("lo"), py::arg("hi"), py::arg("step"));

  // experiments
  m.def("gaussian_kernel", &gaussian_kernel, py::arg("size"), py::arg("width"));
  m.def(
      "phantom_image",
      [](long width, long height, std::uint64_t seed) {
        return image_to_array(phantom_image(width, height, seed));
      },
      py::arg("width") = 64, py::arg("height") = 64, py::arg("seed") = 0);
  m.def(
      "add_noise",
      [](const Matrix& img, double std, std::uint64_t seed) {
        return image_to_array(add_noise(array_to_image(img), std, seed));
      },
      py::arg("image"), py::arg("std"), py::arg("seed"));
  m.def(
      "snr",
      [](const Matrix& u, const Matrix& u_star) {
        return snr(array_to_image(u), array_to_image(u_star));
      },
      py::arg("u"), py::arg("u_star"));
  m.def(
      "load_pgm", [](const std::string& path) { return image_to_array(load_pgm(path)); },
      py::arg("path"));
  m.def(
      "save_pgm",
      [](const Matrix& img, const std::string& path) { save_pgm(array_to_image(img), path); },
      py::arg("image"), py::arg("path"));
  m.def(
      "deblur",
      [](const py::kwargs& kwargs) {
        KeyValueConfig kv;
        for (const auto& [k, v] : kwargs) {
          std::string key = py::str(k);
          std::replace(key.begin(), key.end(), '_', '-');
          kv.set(key, py::str(v));
        }
        const ExperimentConfig cfg = experiment_config_from(kv);
        const auto unused = kv.unused_keys();
        if (!unused.empty()) throw ParameterError("deblur: unknown option '" + unused[0] + "'");
        DeblurReport rep;
        {
          py::gil_scoped_release nogil;
          rep = run_deblur(cfg);
        }
        py::list runs;
        for (const DeblurRun& r : rep.runs) {
          py::dict d = run_dict(r.result);
          d["seed"] = r.seed;
          d["restored"] = image_to_array(r.restored);
          d["snr_degraded"] = r.snr_degraded;
          d["snr_restored"] = r.snr_restored;
          runs.append(d);
        }
        py::dict out;
        out["original"] = image_to_array(rep.original);
        out["runs"] = runs;
        out["mean_snr"] = rep.mean_snr;
        out["mean_snr_degraded"] = rep.mean_snr_degraded;
        out["mean_snr_restored"] = rep.mean_snr_restored;
        return out;
      });

  m.attr("TRACE_COLUMNS") = py::str(kTraceHeader);
}
