// Python surface over the core library: coin and operator constructors,
// transport and resolvent probes, the exact spectrum oracle, and the
// experiment runner.  Matrices cross the boundary as numpy arrays; basis
// labels as (coin_value, (x_1, ..., x_d)) tuples.

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <nlohmann/json.hpp>

#include "rqwalk/coin.hpp"
#include "rqwalk/dynamics.hpp"
#include "rqwalk/errors.hpp"
#include "rqwalk/experiment.hpp"
#include "rqwalk/green.hpp"
#include "rqwalk/lattice.hpp"
#include "rqwalk/localized.hpp"
#include "rqwalk/rng.hpp"
#include "rqwalk/spectral_probe.hpp"
#include "rqwalk/walk.hpp"

namespace py = pybind11;
using namespace rqwalk;

namespace {

BasisLabel to_label(const py::handle& obj, int dim) {
  auto t = obj.cast<std::pair<int, std::vector<Coord>>>();
  return BasisLabel{CoinIndex(t.first, dim), Site(t.second)};
}

py::tuple from_label(const BasisLabel& l) {
  py::tuple site(l.site.dim());
  for (int i = 0; i < l.site.dim(); ++i) site[static_cast<std::size_t>(i)] = l.site[i];
  return py::make_tuple(l.coin.value(), site);
}

template <typename T>
py::array_t<T> to_array(const std::vector<T>& v) {
  py::array_t<T> arr(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), arr.mutable_data());
  return arr;
}

CircleFunction named_circle_function(const std::string& name) {
  if (name == "one") return circle_constant_one();
  if (name == "z") return circle_identity();
  if (name == "z2") return circle_square();
  if (name == "re") return circle_real_part();
  throw ConfigError("unknown circle function: " + name + " (want one|z|z2|re)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "random quantum walks on the lattice";
  m.attr("__version__") = kVersion;

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SolverError>(m, "SolverError", PyExc_RuntimeError);

  py::class_<CoinPermutation>(m, "CoinPermutation")
      .def(py::init<int, std::vector<int>>(), py::arg("dim"), py::arg("images"))
      .def_static("canonical_cycle", &CoinPermutation::canonical_cycle, py::arg("dim"))
      .def_property_readonly("dim", &CoinPermutation::dim)
      .def_property_readonly("images", &CoinPermutation::images)
      .def("is_full_cycle", &CoinPermutation::is_full_cycle);

  py::class_<CoinMatrix>(m, "CoinMatrix")
      .def(py::init<Eigen::MatrixXcd, int>(), py::arg("matrix"), py::arg("dim"))
      .def_property_readonly("dim", &CoinMatrix::dim)
      .def_property_readonly("matrix", &CoinMatrix::matrix)
      .def("unitarity_defect", &CoinMatrix::unitarity_defect);

  py::class_<PhaseDistribution>(m, "PhaseDistribution")
      .def_static("uniform", &PhaseDistribution::uniform)
      .def_static("zero", &PhaseDistribution::zero)
      .def_static("tabulated", &PhaseDistribution::tabulated, py::arg("weights"));

  py::class_<PhaseField>(m, "PhaseField")
      .def(py::init<int, Coord, PhaseDistribution, std::uint64_t>(), py::arg("dim"),
           py::arg("radius"), py::arg("distribution"), py::arg("seed"))
      .def_property_readonly("dim", &PhaseField::dim)
      .def_property_readonly("radius", &PhaseField::radius)
      .def_property_readonly("seed", &PhaseField::seed)
      .def("at",
           [](const PhaseField& f, int coin_value, const std::vector<Coord>& site) {
             return f.at(CoinIndex(coin_value, f.dim()), Site(site));
           },
           py::arg("coin_value"), py::arg("site"))
      .def("to_json", [](const PhaseField& f) { return f.to_json().dump(); })
      .def_static("from_json", [](const std::string& text) {
        return PhaseField::from_json(nlohmann::json::parse(text));
      });

  py::class_<WalkOperator>(m, "WalkOperator")
      .def_property_readonly("num_rows", &WalkOperator::num_rows)
      .def_property_readonly("num_cols", &WalkOperator::num_cols)
      .def_property_readonly("kind", [](const WalkOperator& u) { return u.meta().kind; })
      .def("dense", &WalkOperator::dense)
      .def("coo",
           [](const WalkOperator& u) {
             const auto& s = u.sparse();
             std::vector<std::int64_t> rows, cols;
             std::vector<cd> vals;
             rows.reserve(static_cast<std::size_t>(s.nonZeros()));
             cols.reserve(static_cast<std::size_t>(s.nonZeros()));
             vals.reserve(static_cast<std::size_t>(s.nonZeros()));
             for (int k = 0; k < s.outerSize(); ++k) {
               for (Eigen::SparseMatrix<cd>::InnerIterator it(s, k); it; ++it) {
                 rows.push_back(it.row());
                 cols.push_back(it.col());
                 vals.push_back(it.value());
               }
             }
             return py::make_tuple(to_array(rows), to_array(cols), to_array(vals),
                                   py::make_tuple(u.num_rows(), u.num_cols()));
           })
      .def("labels",
           [](const WalkOperator& u) {
             py::list out;
             for (const BasisLabel& l : u.cols().labels()) out.append(from_label(l));
             return out;
           })
      .def("element",
           [](const WalkOperator& u, const py::handle& to, const py::handle& from) {
             int d = u.rows().dim();
             return u.element(to_label(to, d), to_label(from, d));
           },
           py::arg("to"), py::arg("from_"))
      .def("apply", &WalkOperator::apply, py::arg("x"))
      .def("apply_adjoint", &WalkOperator::apply_adjoint, py::arg("y"))
      .def("isometry_defect_fro", &WalkOperator::isometry_defect_fro)
      .def("isometry_defect_op", &WalkOperator::isometry_defect_op);

  py::class_<DisorderModel>(m, "DisorderModel")
      .def(py::init([](int dim, Coord L, const CoinMatrix& coin, const CoinPermutation& pi,
                       const PhaseDistribution& dist) {
             return DisorderModel{dim, L, coin, pi, dist};
           }),
           py::arg("dim"), py::arg("L"), py::arg("coin"), py::arg("pi"),
           py::arg("distribution"))
      .def_readonly("dim", &DisorderModel::dim)
      .def_readonly("L", &DisorderModel::L)
      .def("phases", &DisorderModel::phases, py::arg("seed"))
      .def("collared", &DisorderModel::collared, py::arg("seed"))
      .def("restriction", &DisorderModel::restriction, py::arg("seed"));

  m.def("hadamard_coin", &hadamard_coin);
  m.def("one_dim_tr_coin", &one_dim_tr_coin, py::arg("t"), py::arg("r"));
  m.def("permutation_coin", &permutation_coin, py::arg("pi"));
  m.def("perturbed_coin", &perturbed_coin, py::arg("pi"), py::arg("delta"), py::arg("seed"));
  m.def("coin_distance", &coin_distance, py::arg("a"), py::arg("b"));
  m.def("haar_unitary",
        [](int n, std::uint64_t seed) {
          auto eng = make_engine(seed, 0);
          return haar_unitary(n, eng);
        },
        py::arg("n"), py::arg("seed"));

  m.def("build_torus", &build_torus, py::arg("coin"), py::arg("phases"), py::arg("M"));
  m.def("build_collared",
        py::overload_cast<const CoinMatrix&, const CoinPermutation&, const PhaseField&, Coord>(
            &build_collared),
        py::arg("coin"), py::arg("pi"), py::arg("phases"), py::arg("L"));

  m.def("restriction_spectrum_exact",
        [](const CoinPermutation& pi, const PhaseField& omega, Coord L) {
          std::vector<cd> spec = restriction_spectrum_exact(pi, omega, L);
          return to_array(spec);
        },
        py::arg("pi"), py::arg("phases"), py::arg("L"));
  m.def("orbit_spectrum",
        [](double alpha, int dim) { return to_array(orbit_spectrum(alpha, dim)); },
        py::arg("alpha"), py::arg("dim"));
  m.def("spectral_distance",
        [](const std::vector<cd>& spectrum, cd z) { return spectral_distance(spectrum, z); },
        py::arg("spectrum"), py::arg("z"));

  m.def("transport",
        [](const WalkOperator& u, const py::list& initial, int N, int p) {
          int d = u.rows().dim();
          std::vector<std::pair<BasisLabel, cd>> amps;
          for (const auto& item : initial) {
            auto pr = item.cast<py::tuple>();
            amps.emplace_back(to_label(pr[0], d), pr[1].cast<cd>());
          }
          TransportSeries ts = transport_series(u, StateVector::from_amplitudes(std::move(amps)),
                                                N, p);
          py::dict out;
          out["times"] = to_array(ts.times);
          out["moments"] = to_array(ts.moments);
          out["growth_exponent"] = ts.growth_exponent;
          out["fit_points"] = ts.fit_points;
          out["p"] = ts.p;
          return out;
        },
        py::arg("u"), py::arg("initial"), py::arg("steps"), py::arg("p") = 1);
  m.def("transport_window_radius", &transport_window_radius, py::arg("steps"),
        py::arg("support_radius"));

  m.def("green_element",
        [](const WalkOperator& u, cd z, const py::handle& to, const py::handle& from) {
          int d = u.rows().dim();
          return green(u, z, to_label(to, d), to_label(from, d));
        },
        py::arg("u"), py::arg("z"), py::arg("to"), py::arg("from_"));
  m.def("green_column",
        [](const WalkOperator& u, cd z, const py::handle& from) {
          GreenSolver solver(u, z);
          return Eigen::VectorXcd(solver.column(to_label(from, u.rows().dim())));
        },
        py::arg("u"), py::arg("z"), py::arg("from_"));
  m.def("default_z_grid",
        [](int angles, double offset) { return to_array(default_z_grid(angles, offset)); },
        py::arg("angles") = 8, py::arg("offset") = 1e-3);

  m.def("poisson_reconstruct",
        [](const WalkOperator& u, const py::handle& to, const py::handle& from,
           const std::string& f, double r, int grid) {
          PoissonConfig cfg;
          cfg.r = r;
          cfg.grid = grid;
          int d = u.rows().dim();
          return poisson_reconstruct(u, to_label(to, d), to_label(from, d),
                                     named_circle_function(f), cfg);
        },
        py::arg("u"), py::arg("to"), py::arg("from_"), py::arg("f") = "z",
        py::arg("r") = 0.999, py::arg("grid") = 1 << 16);

  m.def("run_config",
        [](const std::string& subcommand, const std::string& config_json) {
          nlohmann::json j = nlohmann::json::parse(config_json, nullptr, true, true);
          ExperimentConfig cfg = ExperimentConfig::from_json(j);
          return run_subcommand(subcommand, cfg).string();
        },
        py::arg("subcommand"), py::arg("config_json") = "{}",
        py::call_guard<py::gil_scoped_release>());
}
