#include <algorithm>

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "nehari/diagram.hpp"
#include "nehari/error.hpp"
#include "nehari/io.hpp"
#include "nehari/shooting.hpp"

namespace py = pybind11;
using namespace nehari;

namespace {

py::array_t<double> to_array(const std::vector<double>& v)
{
    py::array_t<double> a(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), a.mutable_data());
    return a;
}

Profile to_profile(const py::array_t<double, py::array::c_style | py::array::forcecast>& a)
{
    if (a.ndim() != 1)
        throw Error(ErrorKind::Dimension, "expected a one-dimensional array");
    return Profile(a.data(), a.data() + a.size());
}

py::dict newton_dict(const NewtonResult& r)
{
    py::dict d;
    d["converged"] = r.converged();
    d["status"] = to_string(r.status);
    d["iterations"] = r.iterations;
    d["lambda"] = r.state.lambda;
    d["residual_norm"] = r.residual_norm;
    d["u"] = to_array(r.state.u);
    return d;
}

py::dict branch_dict(const BranchRecord& r)
{
    std::vector<double> lam, norm;
    std::vector<std::string> tags;
    for (const auto& p : r.branch.points) {
        lam.push_back(p.lambda);
        norm.push_back(p.l2norm);
        tags.emplace_back(to_string(p.tag));
    }
    py::dict d;
    d["id"] = r.id;
    d["role"] = to_string(r.role);
    d["parent"] = r.parent;
    d["seed"] = r.seed;
    d["stop"] = to_string(r.branch.stop);
    d["symmetry"] = to_string(r.branch.symmetry);
    d["lambda"] = to_array(lam);
    d["l2_norm"] = to_array(norm);
    d["tags"] = tags;
    d["folds"] = r.folds;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Positive solutions of -u'' = lambda u + a(x) u^3 on (0, 1) with Dirichlet conditions";

    py::register_exception<Error>(m, "NehariError", PyExc_RuntimeError);

    py::class_<Interval>(m, "Interval")
        .def_readonly("left", &Interval::left)
        .def_readonly("right", &Interval::right)
        .def("__repr__", [](const Interval& i) {
            return "Interval(" + std::to_string(i.left) + ", " + std::to_string(i.right) + ")";
        });

    py::class_<Weight>(m, "Weight")
        .def(py::init([](int kappa, double h, double eps, std::optional<std::vector<double>> centers) {
                 return build_weight(kappa, h, eps, centers);
             }),
             py::arg("kappa"), py::arg("h"), py::arg("eps") = 0.0, py::arg("centers") = py::none())
        .def_property_readonly("kappa", &Weight::kappa)
        .def_property_readonly("h", &Weight::h)
        .def_property_readonly("eps", &Weight::eps)
        .def_property_readonly("intervals", &Weight::intervals)
        .def("__call__", [](const Weight& w, double x) { return eval_weight(w, x); });

    py::class_<Mesh>(m, "Mesh")
        .def_property_readonly("nodes", [](const Mesh& mesh) { return to_array(mesh.nodes()); })
        .def_property_readonly("interior", &Mesh::interior);
    m.def("uniform_mesh", &build_uniform_mesh, py::arg("n"));
    m.def("refined_mesh", py::overload_cast<const Weight&, double, double>(&build_refined_mesh), py::arg("weight"),
          py::arg("coarse_dx"), py::arg("fine_dx"));

    py::class_<Discretization>(m, "Discretization")
        .def(py::init<Weight, Mesh>(), py::arg("weight"), py::arg("mesh"))
        .def(py::init([](const Weight& w, std::size_t n) { return Discretization(w, build_uniform_mesh(n)); }),
             py::arg("weight"), py::arg("n") = 500)
        .def_property_readonly("size", &Discretization::size)
        .def_property_readonly("x", [](const Discretization& d) { return to_array(d.x()); })
        .def("residual", [](const Discretization& d, double lam, py::array_t<double> u) {
            return to_array(d.residual(lam, to_profile(u)));
        })
        .def("l2_norm", [](const Discretization& d, py::array_t<double> u) { return d.l2_norm(to_profile(u)); })
        .def("principal_eigenvalue", &Discretization::principal_eigenvalue);

    m.def("toeplitz_eigenvalue", &toeplitz_eigenvalue, py::arg("n"), py::arg("k") = 1);
    m.def("sine_seed", [](const Discretization& d, double amp) { return to_array(sine_seed(d.mesh(), amp)); });
    m.def("sine_amplitude", &sine_amplitude, py::arg("d"), py::arg("lambda_"));

    m.def(
        "newton",
        [](const Discretization& d, double lam, py::array_t<double> u0, double tol, int max_iters) {
            NewtonOptions opt;
            opt.tol = tol;
            opt.max_iters = max_iters;
            return newton_dict(newton_fixed_lambda(d, lam, to_profile(u0), opt));
        },
        py::arg("d"), py::arg("lambda_"), py::arg("u0"), py::arg("tol") = 1e-4, py::arg("max_iters") = 25,
        "Newton at fixed lambda from u0.");

    m.def(
        "mask_census",
        [](const Discretization& d, double lam) {
            std::vector<CensusEntry> c;
            {
                py::gil_scoped_release release;
                c = mask_census(d, lam);
            }
            py::list out;
            for (const auto& e : c) {
                py::dict row;
                row["mask"] = e.mask.to_string();
                row["u"] = to_array(e.u);
                row["l2_norm"] = e.norm;
                row["seed"] = e.seed;
                out.append(row);
            }
            return out;
        },
        py::arg("d"), py::arg("lambda_"), "Deduplicated solutions found from every peak mask.");

    m.def(
        "shoot_count",
        [](const Weight& w, double lam, std::size_t grid_size, std::optional<double> v0_max) {
            ShootOptions opt;
            opt.grid_size = grid_size;
            opt.v0_max = v0_max;
            ShootResult r;
            {
                py::gil_scoped_release release;
                r = shoot_count(w, lam, opt);
            }
            py::list sols;
            for (const auto& t : r.solutions) {
                std::vector<double> x, u, v;
                for (const auto& s : t.samples) {
                    x.push_back(s.x);
                    u.push_back(s.u);
                    v.push_back(s.v);
                }
                py::dict d;
                d["v0"] = t.v0;
                d["x"] = to_array(x);
                d["u"] = to_array(u);
                d["v"] = to_array(v);
                sols.append(d);
            }
            py::dict d;
            d["count"] = r.count;
            d["roots"] = r.roots;
            d["solutions"] = sols;
            d["warnings"] = r.warnings;
            d["v0_max"] = r.v0_max;
            return d;
        },
        py::arg("weight"), py::arg("lambda_"), py::arg("grid_size") = ShootOptions{}.grid_size,
        py::arg("v0_max") = py::none());

    m.def("potential_energy", &potential_energy, py::arg("lambda_"), py::arg("a"), py::arg("u"));
    m.def("time_map", &time_map, py::arg("u0"), py::arg("lambda_"));
    m.def("time_map_bound", &time_map_bound, py::arg("u0"), py::arg("lambda_"));

    py::class_<DiagramBundle>(m, "Bundle")
        .def_property_readonly("branches",
                               [](const DiagramBundle& b) {
                                   py::list out;
                                   for (const auto& r : b.branches)
                                       out.append(branch_dict(r));
                                   return out;
                               })
        .def_property_readonly("events",
                               [](const DiagramBundle& b) {
                                   py::list out;
                                   for (const auto& e : b.events) {
                                       py::dict d;
                                       d["branch_id"] = e.branch_id;
                                       d["lambda_b"] = e.event.lambda_b;
                                       d["kind"] = to_string(e.event.kind);
                                       d["branch_index"] = e.event.branch_index;
                                       out.append(d);
                                   }
                                   return out;
                               })
        .def_readonly("failures", &DiagramBundle::failures)
        .def_readonly("provenance", &DiagramBundle::provenance)
        .def("config_json", [](const DiagramBundle& b) { return config_json(b.config); })
        .def("to_json", [](const DiagramBundle& b) { return bundle_json(b); })
        .def("branches_csv", &branches_csv)
        .def("events_jsonl", &events_jsonl)
        .def("svg", [](const DiagramBundle& b) { return emit_svg(b); })
        .def("write", [](const DiagramBundle& b, const std::filesystem::path& dir) { write_bundle(b, dir); })
        .def("validate", &validate_bundle, "Largest residual norm over all stored points.")
        .def("isola_turning_point", &isola_turning_point);

    m.def(
        "run_diagram",
        [](const std::string& config_json_text) {
            const auto cfg = parse_config(config_json_text);
            py::gil_scoped_release release;
            return run_diagram(cfg);
        },
        py::arg("config") = "{}", "Full pipeline from a JSON configuration (missing keys take defaults).");
    m.def(
        "run_h_sweep",
        [](const std::string& config_json_text, const std::vector<double>& hs) {
            const auto cfg = parse_config(config_json_text);
            std::vector<HSweepRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_h_sweep(cfg, hs);
            }
            std::vector<std::pair<double, std::optional<double>>> out;
            for (const auto& r : rows)
                out.emplace_back(r.h, r.lambda_b);
            return out;
        },
        py::arg("config"), py::arg("h_values"));
    m.def("default_config", [] { return config_json(RunConfig{}); });
    m.def("worker_count", &worker_count);
}
