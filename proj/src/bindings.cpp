#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "smartexec/bench.hpp"
#include "smartexec/executor.hpp"
#include "smartexec/learning.hpp"
#include "smartexec/loop_ir.hpp"

namespace py = pybind11;
using namespace smartexec;

namespace {

learning::Dataset dataset_from_rows(const std::vector<std::vector<double>>& rows,
                                    const std::vector<int>& labels,
                                    const std::vector<std::string>& class_names) {
    if (rows.size() != labels.size())
        throw std::invalid_argument("rows and labels must have the same length");
    learning::Dataset data;
    data.class_names = class_names;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != loop_ir::kFeatureCount)
            throw std::invalid_argument("each row needs 7 entries (bias first)");
        learning::Sample s;
        for (std::size_t j = 0; j < loop_ir::kFeatureCount; ++j) s.x[j] = rows[i][j];
        s.label = labels[i];
        data.samples.push_back(s);
    }
    return data;
}

std::vector<double> probs_to_vector(const learning::Vector& v) {
    return {v.data(), v.data() + v.size()};
}

loop_ir::FeatureVector vector_to_features(const std::vector<double>& x) {
    if (x.size() != loop_ir::kFeatureCount)
        throw std::invalid_argument("feature vector needs 7 entries");
    loop_ir::FeatureVector out;
    std::copy(x.begin(), x.end(), out.begin());
    return out;
}

// Runs the loop with the GIL released; each body call re-acquires it.
void run_loop_py(std::int64_t n, const py::function& body, const std::string& policy,
                 unsigned threads, std::int64_t chunk) {
    exec::ExecutionPolicy pol = exec::SeqPolicy{};
    if (policy == "par")
        pol = exec::ParPolicy{threads};
    else if (policy != "seq")
        throw std::invalid_argument("policy must be 'seq' or 'par'");
    exec::ChunkParameter chunk_param = exec::DefaultChunk{};
    if (chunk > 0) chunk_param = exec::StaticChunk{chunk};

    exec::LoopContext ctx;
    ctx.range_len = n;
    ctx.threads = threads;

    py::gil_scoped_release release;
    exec::for_each_range(
        pol, chunk_param, n,
        [&body](std::int64_t i) {
            py::gil_scoped_acquire acquire;
            body(i);
        },
        ctx);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "smart loop executors: feature analysis, model training, dispatch decisions";

    py::class_<loop_ir::StaticFeatures>(m, "StaticFeatures")
        .def(py::init<>())
        .def_readwrite("total_ops", &loop_ir::StaticFeatures::total_ops)
        .def_readwrite("float_ops", &loop_ir::StaticFeatures::float_ops)
        .def_readwrite("comparison_ops", &loop_ir::StaticFeatures::comparison_ops)
        .def_readwrite("deepest_loop_level", &loop_ir::StaticFeatures::deepest_loop_level)
        .def_readwrite("num_int_vars", &loop_ir::StaticFeatures::num_int_vars)
        .def_readwrite("num_float_vars", &loop_ir::StaticFeatures::num_float_vars)
        .def_readwrite("num_if", &loop_ir::StaticFeatures::num_if)
        .def_readwrite("num_if_inner", &loop_ir::StaticFeatures::num_if_inner)
        .def_readwrite("num_calls", &loop_ir::StaticFeatures::num_calls)
        .def_readwrite("num_calls_inner", &loop_ir::StaticFeatures::num_calls_inner)
        .def("__repr__", [](const loop_ir::StaticFeatures& s) {
            return "StaticFeatures(total_ops=" + std::to_string(s.total_ops) +
                   ", float_ops=" + std::to_string(s.float_ops) +
                   ", comparison_ops=" + std::to_string(s.comparison_ops) +
                   ", deepest_loop_level=" + std::to_string(s.deepest_loop_level) + ")";
        });

    m.def(
        "analyze_text",
        [](const std::string& text) {
            return loop_ir::analyze_statement(loop_ir::parse_loop_spec(text));
        },
        py::arg("text"), "Parse a loop spec and return its static features.");

    m.def(
        "make_feature_vector",
        [](const loop_ir::StaticFeatures& s, std::uint64_t threads, std::uint64_t iterations) {
            loop_ir::FeatureVector x =
                loop_ir::make_feature_vector(s, {threads, iterations});
            return std::vector<double>(x.begin(), x.end());
        },
        py::arg("static_features"), py::arg("threads"), py::arg("iterations"));

    m.def("sigmoid", &learning::sigmoid, py::arg("z"));

    py::class_<learning::BinaryModel>(m, "BinaryModel");
    py::class_<learning::MultinomialModel>(m, "MultinomialModel")
        .def_property_readonly("class_names",
                               [](const learning::MultinomialModel& m_) { return m_.class_names; });

    py::class_<learning::WeightsBundle>(m, "WeightsBundle")
        .def_property_readonly("policy_model",
                               [](const learning::WeightsBundle& b) { return b.policy_model; })
        .def_property_readonly("chunk_model",
                               [](const learning::WeightsBundle& b) { return b.chunk_model; })
        .def_property_readonly("prefetch_model",
                               [](const learning::WeightsBundle& b) { return b.prefetch_model; });

    m.def(
        "train_binary",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels) {
            auto fit = learning::train_binary_irls(
                dataset_from_rows(rows, labels, learning::kBinaryClassNames));
            return py::make_tuple(fit.model, fit.info.converged);
        },
        py::arg("rows"), py::arg("labels"),
        "IRLS fit of the seq/par model; rows are raw 7-entry feature vectors.");

    m.def(
        "train_multinomial",
        [](const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
           const std::vector<std::string>& class_names) {
            auto fit = learning::train_multinomial_newton(
                dataset_from_rows(rows, labels, class_names));
            return py::make_tuple(fit.model, fit.info.converged);
        },
        py::arg("rows"), py::arg("labels"), py::arg("class_names"));

    m.def(
        "predict_binary",
        [](const learning::BinaryModel& model, const std::vector<double>& x) {
            auto pred = learning::predict_binary(model, vector_to_features(x));
            return py::make_tuple(pred.label, pred.p);
        },
        py::arg("model"), py::arg("x"));

    m.def(
        "predict_class",
        [](const learning::MultinomialModel& model, const std::vector<double>& x) {
            auto pred = learning::predict_class(model, vector_to_features(x));
            return py::make_tuple(pred.label, probs_to_vector(pred.probs));
        },
        py::arg("model"), py::arg("x"));

    m.def(
        "softmax_probs",
        [](const learning::MultinomialModel& model, const std::vector<double>& x) {
            return probs_to_vector(learning::softmax_probs(model, vector_to_features(x)));
        },
        py::arg("model"), py::arg("x"));

    m.def("save_weights", &learning::save_weights, py::arg("bundle"), py::arg("path"));
    m.def("load_weights", &learning::load_weights, py::arg("path"));

    m.def(
        "seq_par",
        [](const learning::BinaryModel& model, const std::vector<double>& x) {
            return exec::seq_par(model, vector_to_features(x)) == exec::PolicyChoice::Parallel
                       ? "par"
                       : "seq";
        },
        py::arg("model"), py::arg("x"));

    m.def(
        "chunk_size_determination",
        [](const learning::MultinomialModel& model, const std::vector<double>& x) {
            return exec::chunk_size_determination(model, vector_to_features(x));
        },
        py::arg("model"), py::arg("x"));

    m.def(
        "prefetching_distance_determination",
        [](const learning::MultinomialModel& model, const std::vector<double>& x) {
            return exec::prefetching_distance_determination(model, vector_to_features(x));
        },
        py::arg("model"), py::arg("x"));

    m.def("run_loop", &run_loop_py, py::arg("n"), py::arg("body"), py::arg("policy") = "seq",
          py::arg("threads") = 2, py::arg("chunk") = 0,
          "Invoke body(i) for each index in [0, n) under the given policy.");

    m.def(
        "run_kernel",
        [](const std::string& name, const std::string& policy, unsigned threads, bool quick,
           std::uint64_t seed) {
            auto kernel = bench::make_eval_kernel(name, quick);
            exec::ExecutionPolicy pol = exec::SeqPolicy{};
            if (policy == "par") pol = exec::ParPolicy{threads};
            kernel->prepare(seed);
            {
                py::gil_scoped_release release;
                kernel->run(pol, exec::DefaultChunk{}, threads, nullptr);
            }
            return kernel->checksum();
        },
        py::arg("name"), py::arg("policy") = "seq", py::arg("threads") = 2,
        py::arg("quick") = true, py::arg("seed") = 42,
        "Run a named benchmark kernel and return its output checksum.");

    m.def("stream_loop_spec", &bench::stream_loop_spec);
    m.def("stencil_loop_spec", &bench::stencil_loop_spec, py::arg("interior_cols"));
    m.def("matmul_loop_spec", &bench::matmul_loop_spec, py::arg("k"), py::arg("p"));
    m.def("kernel_names", [] { return bench::kernel_names(); });
}
