#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "catcollapse/commands.hpp"
#include "catcollapse/error.hpp"
#include "catcollapse/hllm.hpp"
#include "catcollapse/infoloss.hpp"
#include "catcollapse/io.hpp"
#include "catcollapse/pcc.hpp"

namespace py = pybind11;
using namespace catcollapse;

namespace {

TreatmentConfig treatments_of(const std::vector<std::string>& names, std::size_t rank) {
    if (names.empty()) return TreatmentConfig(rank, Treatment::nominal);
    TreatmentConfig out;
    for (const auto& n : names) out.push_back(parse_treatment(n));
    return out;
}

py::dict step_dict(const PccStep& s) {
    py::dict d;
    d["r"] = s.r;
    d["d"] = s.d ? py::cast(*s.d) : py::none();
    d["key"] = s.key;
    d["dim"] = s.dim;
    d["dev"] = s.dev;
    d["dfmod"] = s.dfmod;
    d["dfres"] = s.dfres;
    d["dev_term"] = s.dev_term;
    d["df_term"] = s.df_term;
    d["adj_rsq"] = s.adj_rsq;
    d["terminal"] = s.terminal;
    d["keys"] = s.partition.keys();
    return d;
}

}  // namespace

PYBIND11_MODULE(_catcollapse, m) {
    m.doc() = "Paired category collapsing and hierarchical log-linear models";

    py::register_exception<InputError>(m, "InputError", PyExc_ValueError);
    py::register_exception<FeasibilityError>(m, "FeasibilityError", PyExc_RuntimeError);
    py::register_exception<DegeneracyError>(m, "DegeneracyError", PyExc_ArithmeticError);

    py::class_<SparseTable>(m, "SparseTable")
        .def(py::init([](Shape shape, const std::vector<double>& values) {
                 return SparseTable::from_dense(std::move(shape), values);
             }),
             py::arg("shape"), py::arg("values"))
        .def_property_readonly("shape", &SparseTable::shape)
        .def_property_readonly("total", &SparseTable::total)
        .def_property_readonly("nnz", &SparseTable::nnz)
        .def("to_dense", &SparseTable::to_dense)
        .def("__eq__", [](const SparseTable& a, const SparseTable& b) { return a == b; });

    m.def(
        "read_counts",
        [](const std::filesystem::path& path, const std::optional<std::filesystem::path>& config) {
            std::optional<SchemeConfig> cfg;
            if (config) cfg = load_config(*config);
            const CountsData data = read_counts(path, cfg ? &*cfg : nullptr);
            std::vector<std::string> names, treatments;
            std::vector<std::vector<std::string>> labels;
            for (const auto& v : data.variables) {
                names.push_back(v.name);
                labels.push_back(v.categories);
                treatments.emplace_back(to_string(v.treatment));
            }
            return py::make_tuple(data.table(), names, labels, treatments);
        },
        py::arg("path"), py::arg("config") = py::none(),
        "Returns (table, names, labels, treatments) from a long-format counts CSV.");

    m.def(
        "loss_matrix",
        [](const SparseTable& t, std::size_t dim, const std::string& treatment) {
            const LossMatrix lm = loss_matrix(t, dim, parse_treatment(treatment));
            py::list out;
            for (const auto& e : lm.entries()) out.append(py::make_tuple(e.u, e.v, e.g2, e.df));
            return out;
        },
        py::arg("table"), py::arg("dim"), py::arg("treatment") = "nominal",
        "List of (u, v, g2, df) for every eligible category pair.");

    m.def(
        "run_pcc",
        [](const SparseTable& t, const std::vector<std::string>& treatments, std::optional<double> stop) {
            PccOptions opt;
            opt.stop_quotient = stop;
            const PccTrace tr = run_pcc(t, treatments_of(treatments, t.rank()), opt);
            py::list rows;
            for (const auto& s : tr.steps) rows.append(step_dict(s));
            return rows;
        },
        py::arg("table"), py::arg("treatments") = std::vector<std::string>{}, py::arg("stop_quotient") = py::none());

    m.def(
        "collapse",
        [](const SparseTable& t, const std::vector<std::vector<std::size_t>>& keys) {
            return apply_partition(t, Partition(keys));
        },
        py::arg("table"), py::arg("keys"));

    m.def(
        "fit",
        [](const SparseTable& t, const std::vector<std::vector<std::size_t>>& generators) {
            std::vector<Term> terms;
            for (const auto& g : generators) {
                Term term = 0;
                for (auto d : g) term |= make_term({d});
                terms.push_back(term);
            }
            const FitResult f = ipf_fit(t, ModelSpec(t.rank(), terms));
            py::dict d;
            d["fitted"] = f.fitted.to_dense();
            d["dev"] = f.dev;
            d["dfmod"] = f.dfmod;
            d["dfres"] = f.dfres;
            d["iterations"] = f.iterations;
            d["converged"] = f.converged;
            return d;
        },
        py::arg("table"), py::arg("generators"), "Fits the hierarchical model given by lists of variable indices.");

    m.def(
        "backward_select",
        [](const SparseTable& t, const std::vector<std::string>& symbols) {
            const BackwardTrace bt = backward_select(t, ModelSpec::saturated(t.rank()));
            std::vector<std::string> sym = symbols;
            if (sym.empty())
                for (std::size_t k = 0; k < t.rank(); ++k) sym.push_back(std::string(1, static_cast<char>('a' + k % 26)));
            py::list rows;
            for (const auto& r : bt.rows) {
                py::dict d;
                d["r"] = r.r;
                d["terms"] = r.spec.to_string(sym);
                d["dev"] = r.dev;
                d["dfmod"] = r.dfmod;
                d["dfres"] = r.dfres;
                d["dev_term"] = r.dev_term;
                d["df_term"] = r.df_term;
                d["adj_rsq"] = r.adj_rsq;
                rows.append(d);
            }
            return rows;
        },
        py::arg("table"), py::arg("symbols") = std::vector<std::string>{});

    m.def(
        "run_command",
        [](const std::string& command, const std::filesystem::path& data, const std::filesystem::path& out,
           std::optional<std::filesystem::path> config, std::optional<std::string> generators,
           std::optional<std::size_t> pcc_step, bool loss_matrices) {
            RunConfig c;
            c.command = command;
            c.data = data;
            c.out = out;
            c.config = std::move(config);
            c.generators = std::move(generators);
            c.pcc_step = pcc_step;
            c.loss_matrices = loss_matrices;
            std::ostringstream log;
            const int code = run_command(c, log);
            return py::make_tuple(code, log.str());
        },
        py::arg("command"), py::arg("data"), py::arg("out"), py::arg("config") = py::none(),
        py::arg("generators") = py::none(), py::arg("pcc_step") = py::none(), py::arg("loss_matrices") = false,
        "Runs a CLI command; returns (exit_code, log).");
}
