#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rotodt/experiment.hpp"
#include "rotodt/metrics.hpp"
#include "rotodt/parallel.hpp"

namespace py = pybind11;
using namespace rotodt;

namespace {

using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;
using ComplexArray = py::array_t<cplx, py::array::c_style | py::array::forcecast>;

Imaging imaging_of(const std::string& s) {
  if (s == "transmission") return Imaging::kTransmission;
  if (s == "reflection") return Imaging::kReflection;
  throw InvalidArgument("imaging must be 'transmission' or 'reflection'");
}

std::vector<Vec3> points_of(const RealArray& a) {
  if (a.ndim() != 2 || a.shape(1) != 3) throw InvalidArgument("points must have shape (M, 3)");
  auto r = a.unchecked<2>();
  std::vector<Vec3> out(a.shape(0));
  for (py::ssize_t i = 0; i < a.shape(0); ++i) out[i] = Vec3(r(i, 0), r(i, 1), r(i, 2));
  return out;
}

RealArray points_to_array(const std::vector<Vec3>& pts) {
  RealArray a({static_cast<py::ssize_t>(pts.size()), py::ssize_t{3}});
  auto w = a.mutable_unchecked<2>();
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int c = 0; c < 3; ++c) w(i, c) = pts[i][c];
  return a;
}

std::vector<cplx> values_of(const ComplexArray& a) {
  if (a.ndim() != 1) throw InvalidArgument("values must be one-dimensional");
  return {a.data(), a.data() + a.size()};
}

ComplexArray values_to_array(const std::vector<cplx>& v) {
  ComplexArray a(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), a.mutable_data());
  return a;
}

// (N, N, N) array indexed [j1 + N/2, j2 + N/2, j3 + N/2], same order as Volume
Volume volume_of(const ComplexArray& a, double support_radius) {
  if (a.ndim() != 3 || a.shape(0) != a.shape(1) || a.shape(0) != a.shape(2))
    throw InvalidArgument("volume must have shape (N, N, N)");
  Volume v(build_grid(static_cast<int>(a.shape(0)), support_radius));
  std::copy(a.data(), a.data() + a.size(), v.values.begin());
  return v;
}

RealArray real_array(const Volume& v) {
  const auto n = static_cast<py::ssize_t>(v.grid.N);
  RealArray a({n, n, n});
  double* out = a.mutable_data();
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v.values[i].real();
  return a;
}

ComplexArray complex_array(const Volume& v) {
  const auto n = static_cast<py::ssize_t>(v.grid.N);
  ComplexArray a({n, n, n});
  std::copy(v.values.begin(), v.values.end(), a.mutable_data());
  return a;
}

KSpaceSamples samples_of(const RealArray& points, const ComplexArray& values,
                         const std::string& imaging) {
  KSpaceSamples s;
  s.points = points_of(points);
  s.values = values_of(values);
  s.imaging = imaging_of(imaging);
  s.validate();
  return s;
}

py::dict report_dict(const ReconReport& r) {
  py::dict d;
  d["volume"] = real_array(r.volume);
  d["residuals"] = r.history.residual;
  d["solution_norms"] = r.history.solution_norm;
  d["psnr_history"] = r.psnr_history;
  d["chosen_iteration"] = r.choice.index;
  d["flagged"] = r.choice.flagged;
  d["note"] = r.choice.note;
  d["imaginary_fraction"] = r.imaginary_fraction;
  d["timings"] = r.timings;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Diffraction tomography of rotating objects";

  // translators run newest first, so the base class goes in before its subclasses
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<NoAnalyticIndicatrix>(m, "NoAnalyticIndicatrix", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);

  m.def("set_num_threads", &set_num_threads, py::arg("threads"));
  m.def("num_threads", &num_threads);

  py::class_<WaveParameters>(m, "Wave")
      .def(py::init(&WaveParameters::from_wavelength), py::arg("wavelength"),
           py::arg("support_radius"), py::arg("detector_distance"),
           py::arg("background_index") = 1.0)
      .def_readonly("wavelength", &WaveParameters::wavelength)
      .def_readonly("k0", &WaveParameters::k0)
      .def_readonly("support_radius", &WaveParameters::support_radius)
      .def_readonly("detector_distance", &WaveParameters::detector_distance);

  py::class_<Trajectory>(m, "Trajectory")
      .def_static("fixed_axis", &Trajectory::fixed_axis_range, py::arg("axis"),
                  py::arg("start") = 0.0, py::arg("stop") = 2.0 * kPi)
      .def_static("oscillating_axis", &Trajectory::oscillating_axis, py::arg("c"))
      .def_static("from_csv", &Trajectory::from_csv, py::arg("path"))
      .def_property_readonly("duration", &Trajectory::duration)
      .def("pose", [](const Trajectory& t, double time) {
        const Pose p = t.at(time);
        return py::make_tuple(p.axis, p.angle);
      })
      .def("__repr__", &Trajectory::describe);

  py::class_<SampleDesign>(m, "Design")
      .def(py::init([](int N, const WaveParameters& w, int S, double duration,
                       const std::string& lattice) {
             return build_design(N, S, w, duration, lattice_rule_from_string(lattice));
           }),
           py::arg("N"), py::arg("wave"), py::arg("S") = 0, py::arg("duration") = 2.0 * kPi,
           py::arg("lattice") = "linspace")
      .def_property_readonly("N", &SampleDesign::N)
      .def_property_readonly("S", &SampleDesign::S)
      .def_property_readonly("per_angle", &SampleDesign::per_angle)
      .def_property_readonly("frequency_step", &SampleDesign::frequency_step)
      .def("__len__", &SampleDesign::size);

  m.def("kspace_points",
        [](const SampleDesign& d, const Trajectory& t, const WaveParameters& w,
           const std::string& imaging) {
          return points_to_array(build_kspace_points(d, t, w, imaging_of(imaging)));
        },
        py::arg("design"), py::arg("trajectory"), py::arg("wave"),
        py::arg("imaging") = "transmission");

  m.def("jacobian",
        [](double k1, double k2, double t, const Trajectory& traj, const WaveParameters& w,
           const std::string& imaging) {
          return jacobian(KPoint{k1, k2, t, imaging_of(imaging)}, traj, w);
        },
        py::arg("k1"), py::arg("k2"), py::arg("t"), py::arg("trajectory"), py::arg("wave"),
        py::arg("imaging") = "transmission");
  m.def("indicatrix",
        [](const Vec3& y, const Trajectory& traj, const WaveParameters& w) {
          return indicatrix_numeric(y, traj, w);
        },
        py::arg("y"), py::arg("trajectory"), py::arg("wave"));

  py::class_<Phantom>(m, "Phantom")
      .def_static("ball", &Phantom::ball, py::arg("radius"), py::arg("amplitude") = 1.0)
      .def_static("ball_with_gap", &Phantom::ball_with_gap, py::arg("radius"),
                  py::arg("half_width"), py::arg("amplitude") = 1.0)
      .def_static("shepp_logan",
                  [](double scale, const std::string& contrast, double amplitude) {
                    return Phantom::shepp_logan(scale, shepp_logan_contrast_from_string(contrast),
                                                amplitude);
                  },
                  py::arg("scale"), py::arg("contrast") = "modified", py::arg("amplitude") = 1.0)
      .def_property_readonly("support_radius", &Phantom::support_radius)
      .def("__call__", [](const Phantom& p, const Vec3& r) { return p(r); })
      .def("fourier",
           [](const Phantom& p, const RealArray& points) {
             return values_to_array(analytic_kspace(p, points_of(points)).values);
           },
           py::arg("points"))
      .def("__repr__", &Phantom::describe);

  m.def("rasterize",
        [](const Phantom& p, int N, double r_s, int oversample) {
          return real_array(rasterize(p, build_grid(N, r_s), oversample));
        },
        py::arg("phantom"), py::arg("N"), py::arg("support_radius"), py::arg("oversample") = 1);
  m.def("averaged_truth",
        [](const Phantom& p, int N, double r_s, int factor) {
          return real_array(averaged_truth(p, build_grid(N, r_s), factor));
        },
        py::arg("phantom"), py::arg("N"), py::arg("support_radius"), py::arg("factor") = 5);
  m.def("synthesize",
        [](const Phantom& p, int N, double r_s, int factor, const RealArray& points, double eps) {
          return values_to_array(
              synthesize_kspace(p, build_grid(N, r_s), factor, points_of(points), eps).values);
        },
        py::arg("phantom"), py::arg("N"), py::arg("support_radius"), py::arg("factor"),
        py::arg("points"), py::arg("eps") = 1e-8,
        "Fourier transform from the fine grid of factor * N points per axis");

  m.def("ndft",
        [](const ComplexArray& vol, double r_s, const RealArray& points, std::optional<double> eps) {
          const Volume v = volume_of(vol, r_s);
          const auto pts = points_of(points);
          std::vector<cplx> out;
          {
            py::gil_scoped_release release;
            out = eps ? nufft_forward(v, pts, *eps) : ndft_direct(v, pts);
          }
          return values_to_array(out);
        },
        py::arg("volume"), py::arg("support_radius"), py::arg("points"), py::arg("eps") = py::none(),
        "Discrete Fourier operator; exact when eps is None");
  m.def("ndft_adjoint",
        [](const RealArray& points, const ComplexArray& values, int N, double r_s,
           std::optional<double> eps) {
          const auto pts = points_of(points);
          const auto vals = values_of(values);
          const GridSpec g = build_grid(N, r_s);
          Volume out;
          {
            py::gil_scoped_release release;
            out = eps ? nufft_adjoint(pts, vals, g, *eps) : ndft_adjoint_direct(pts, vals, g);
          }
          return complex_array(out);
        },
        py::arg("points"), py::arg("values"), py::arg("N"), py::arg("support_radius"),
        py::arg("eps") = py::none());

  m.def("add_noise",
        [](const ComplexArray& values, double level, double relative_level, std::uint64_t seed,
           bool complex_noise) {
          KSpaceSamples s;
          s.values = values_of(values);
          s.points.assign(s.values.size(), Vec3::Zero());
          return values_to_array(
              add_noise(s, NoiseSpec{level, relative_level, seed, complex_noise}).values);
        },
        py::arg("values"), py::arg("level") = 0.0, py::arg("relative_level") = -1.0,
        py::arg("seed") = 0, py::arg("complex") = false);

  m.def("psnr",
        [](const RealArray& truth, const RealArray& test) {
          return psnr(volume_of(truth, 1.0), volume_of(test, 1.0));
        },
        py::arg("truth"), py::arg("test"));
  m.def("ssim",
        [](const RealArray& truth, const RealArray& test, double data_range) {
          SsimOptions opt;
          opt.data_range = data_range;
          return ssim3d(volume_of(truth, 1.0), volume_of(test, 1.0), opt);
        },
        py::arg("truth"), py::arg("test"), py::arg("data_range") = 0.0);

  m.def("reconstruct",
        [](const RealArray& points, const ComplexArray& values, const SampleDesign& design,
           const Trajectory& traj, const WaveParameters& w, int N, const std::string& method,
           int max_iters, const std::string& stopping, double noise_level,
           const std::string& imaging, std::optional<RealArray> truth) {
          const KSpaceSamples s = samples_of(points, values, imaging);
          const GridSpec g = build_grid(N, w.support_radius);
          ReconConfig c;
          c.method = recon_method_from_string(method);
          c.max_iters = max_iters;
          c.stopping = stopping_rule_from_string(stopping);
          c.noise_level = noise_level;
          c.validate();
          std::optional<Volume> t;
          if (truth) t = volume_of(*truth, w.support_radius);
          ReconReport r;
          {
            py::gil_scoped_release release;
            r = reconstruct(s, design, traj, g, w, c, t ? &*t : nullptr);
          }
          return report_dict(r);
        },
        py::arg("points"), py::arg("values"), py::arg("design"), py::arg("trajectory"),
        py::arg("wave"), py::arg("N"), py::arg("method") = "cgne", py::arg("max_iters") = 20,
        py::arg("stopping") = "fixed", py::arg("noise_level") = 0.0,
        py::arg("imaging") = "transmission", py::arg("truth") = py::none());

  m.def("run_experiment",
        [](const std::string& config_json) {
          const Experiment ex(parse_config(json::parse(config_json)));
          KSpaceSamples s;
          Volume truth;
          RunResult run;
          std::string report;
          {
            py::gil_scoped_release release;
            s = simulate(ex);
            truth = truth_volume(ex);
            run = run_reconstruction(ex, s, &truth);
            report = report_json(ex, run).dump();
          }
          py::dict d;
          d["report"] = py::module_::import("json").attr("loads")(report);
          d["volume"] = real_array(run.report.volume);
          d["truth"] = real_array(truth);
          d["points"] = points_to_array(s.points);
          d["values"] = values_to_array(s.values);
          return d;
        },
        py::arg("config"), "Simulate and reconstruct from a JSON experiment config");
  m.def("design_summary", [](const std::string& config_json) {
    const Experiment ex(parse_config(json::parse(config_json)));
    return py::module_::import("json").attr("loads")(design_summary(ex).dump());
  });
}
