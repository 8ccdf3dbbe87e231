#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <fstream>
#include <sstream>

#include "patenthan/checkpoint.hpp"
#include "patenthan/error.hpp"
#include "patenthan/interpret.hpp"
#include "patenthan/metrics.hpp"
#include "patenthan/pipeline.hpp"
#include "patenthan/stats.hpp"

namespace py = pybind11;
using namespace patenthan;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ShapeError("expected a 2-d array, got " + std::to_string(a.ndim()) + " dimensions");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.values().begin());
  return m;
}

Array to_array(const Matrix& m) {
  Array a({m.rows(), m.cols()});
  std::copy(m.values().begin(), m.values().end(), a.mutable_data());
  return a;
}

py::dict metrics_dict(const Metrics& m) {
  auto cls = [](const ClassMetrics& c) {
    py::dict d;
    d["precision"] = c.precision;
    d["recall"] = c.recall;
    d["f1"] = c.f1;
    return d;
  };
  py::dict d;
  d["tp"] = m.counts.tp;
  d["tn"] = m.counts.tn;
  d["fp"] = m.counts.fp;
  d["fn"] = m.counts.fn;
  d["accuracy"] = m.accuracy;
  d["pbt"] = cls(m.pbt);
  d["mt"] = cls(m.mt);
  d["macro"] = cls(m.macro);
  d["mcc"] = m.mcc;
  return d;
}

py::dict welch_dict(const WelchResult& r) {
  auto group = [](const GroupSummary& g) {
    py::dict d;
    d["n"] = g.n;
    d["mean"] = g.mean;
    d["variance"] = g.variance;
    return d;
  };
  py::dict d;
  d["t"] = r.t;
  d["df"] = r.df;
  d["p"] = r.p;
  d["group1"] = group(r.group1);
  d["group2"] = group(r.group2);
  return d;
}

ClaimMatrix claim_matrix(const Array& vectors, std::size_t m) { return build_claim_matrix(to_matrix(vectors), m); }

std::vector<PatentRecord> load_records(const std::filesystem::path& path) { return parse_corpus(path); }

}  // namespace

PYBIND11_MODULE(_patenthan, mod) {
  mod.doc() = "Patent screening with a hierarchical attention network over claims";

  auto base = py::register_exception<Error>(mod, "PatentHANError", PyExc_RuntimeError);
  py::register_exception<InvalidInput>(mod, "InvalidInput", base.ptr());
  py::register_exception<IoError>(mod, "IoError", base.ptr());
  py::register_exception<ShapeError>(mod, "ShapeError", base.ptr());
  py::register_exception<NumericError>(mod, "NumericError", base.ptr());

  py::enum_<ValueClass>(mod, "ValueClass").value("PBT", ValueClass::kPBT).value("MT", ValueClass::kMT);
  py::enum_<ClaimType>(mod, "ClaimType")
      .value("INDEPENDENT", ClaimType::kIndependent)
      .value("DEPENDENT", ClaimType::kDependent);
  py::enum_<Horizon>(mod, "Horizon")
      .value("SHORT", Horizon::kShort)
      .value("MID", Horizon::kMid)
      .value("LONG", Horizon::kLong);

  py::class_<RawClaim>(mod, "Claim")
      .def_readonly("index", &RawClaim::index)
      .def_readonly("text", &RawClaim::text)
      .def_readonly("type", &RawClaim::type)
      .def_readonly("referenced_claim", &RawClaim::referenced_claim);

  py::class_<PatentRecord>(mod, "PatentRecord")
      .def_readonly("patent_id", &PatentRecord::patent_id)
      .def_property_readonly("grant_date", [](const PatentRecord& r) { return r.grant_date.to_string(); })
      .def_readonly("claims", &PatentRecord::claims)
      .def("citations_within", &PatentRecord::citations_within, py::arg("years"))
      .def("__repr__", [](const PatentRecord& r) {
        return "<PatentRecord " + r.patent_id + " claims=" + std::to_string(r.claims.size()) + ">";
      });

  mod.def("load_corpus", &load_records, py::arg("path"), "Parses a JSONL patent corpus.");
  mod.def(
      "write_corpus",
      [](const std::filesystem::path& path, const std::vector<PatentRecord>& records) {
        std::ofstream out(path);
        if (!out) throw IoError("cannot write " + path.string());
        write_corpus(out, records);
      },
      py::arg("path"), py::arg("records"));
  mod.def(
      "synthetic_corpus",
      [](std::size_t n, double pbt_fraction, std::uint64_t seed) {
        SyntheticCorpus c = generate_synthetic_corpus(n, pbt_fraction, seed);
        py::dict key;
        for (const auto& [id, cls] : c.key) key[py::str(id)] = cls;
        return py::make_tuple(c.records, key);
      },
      py::arg("n_patents"), py::arg("pbt_fraction") = 0.1, py::arg("seed") = 0,
      "Returns (records, {patent_id: ValueClass}) with a planted class signal.");

  py::class_<LabeledPatent>(mod, "LabeledPatent")
      .def_readonly("patent_id", &LabeledPatent::patent_id)
      .def_readonly("counts", &LabeledPatent::counts)
      .def_readonly("classes", &LabeledPatent::classes)
      .def("label", &LabeledPatent::label, py::arg("horizon"));
  mod.def(
      "assign_labels",
      [](const std::vector<PatentRecord>& records, const std::string& thresholds) {
        return assign_labels(records, parse_thresholds(thresholds)).patents;
      },
      py::arg("records"), py::arg("thresholds") = "3,7,18",
      "Counts citations inside each horizon and labels PBT at or above the threshold.");

  py::class_<HashedEmbedder>(mod, "HashedEmbedder")
      .def(py::init<std::size_t, std::uint64_t>(), py::arg("dim"), py::arg("seed") = 0)
      .def_property_readonly("dim", &HashedEmbedder::dim)
      .def("embed", [](const HashedEmbedder& e, const std::vector<std::string>& tokens) { return e.embed(tokens); });

  py::class_<EmbeddingFile>(mod, "Embeddings")
      .def_readonly("d_e", &EmbeddingFile::d_e)
      .def_property_readonly("patent_ids",
                             [](const EmbeddingFile& f) {
                               std::vector<std::string> ids;
                               for (const auto& r : f.records) ids.push_back(r.patent_id);
                               return ids;
                             })
      .def("__len__", [](const EmbeddingFile& f) { return f.records.size(); })
      .def("claim_vectors", [](const EmbeddingFile& f, std::size_t i) {
        if (i >= f.records.size()) throw py::index_error("record index out of range");
        return to_array(f.claim_vectors(i));
      })
      .def("save", [](const EmbeddingFile& f, const std::filesystem::path& p) { write_embeddings(p, f); });
  mod.def(
      "embed_corpus",
      [](const std::vector<PatentRecord>& records, const HashedEmbedder& embedder, const std::string& filter) {
        return embed_corpus(records, embedder, parse_claim_filter(filter), default_stopwords());
      },
      py::arg("records"), py::arg("embedder"), py::arg("claim_filter") = "independent_only");
  mod.def(
      "from_vectors",
      [](const std::vector<std::pair<std::string, Array>>& items, std::size_t d_e) {
        EmbeddingFile f;
        f.d_e = d_e;
        for (const auto& [id, a] : items) {
          Matrix m = to_matrix(a);
          if (m.cols() != d_e) throw ShapeError("record " + id + " has " + std::to_string(m.cols()) + " columns");
          f.records.push_back(make_embedding_record(id, m));
        }
        return f;
      },
      py::arg("items"), py::arg("d_e"), "Builds CEMB content from (patent_id, claims x d_e array) pairs.");
  mod.def("read_embeddings", py::overload_cast<const std::filesystem::path&>(&read_embeddings), py::arg("path"));

  py::class_<ModelConfig>(mod, "ModelConfig")
      .def(py::init([](std::size_t d_e, std::size_t m, std::size_t n_encoders, double dropout) {
             ModelConfig c;
             c.d_e = d_e;
             c.m = m;
             c.n_encoders = n_encoders;
             c.dropout = dropout;
             c.validate();
             return c;
           }),
           py::arg("d_e") = 768, py::arg("m") = 18, py::arg("n_encoders") = 4, py::arg("dropout") = 0.1)
      .def_readonly("d_e", &ModelConfig::d_e)
      .def_readonly("m", &ModelConfig::m)
      .def_readonly("n_encoders", &ModelConfig::n_encoders)
      .def_readonly("dropout", &ModelConfig::dropout);

  py::class_<ModelParams>(mod, "Model")
      .def(py::init(&init_params), py::arg("config"), py::arg("seed") = 0)
      .def_readonly("config", &ModelParams::config)
      .def_static("load", &load_model, py::arg("path"))
      .def("save", [](const ModelParams& p, const std::filesystem::path& path) { save_model(path, p); })
      .def(
          "forward",
          [](const ModelParams& p, const Array& claims) {
            const ModelOutput out = model_forward(claim_matrix(claims, p.config.m), p);
            return py::make_tuple(out.logits, claim_scores(out.attention));
          },
          py::arg("claims"), "Returns ([t_PBT, t_MT], per-claim attention scores) for a claims x d_e array.")
      .def(
          "predict",
          [](const ModelParams& p, const Array& claims) {
            const Prediction pr = predict_class(model_forward(claim_matrix(claims, p.config.m), p).logits);
            return py::make_tuple(pr.label, pr.p_pbt);
          },
          py::arg("claims"))
      .def(
          "explain",
          [](const ModelParams& p, const PatentRecord& record, const Array& claims, const std::string& filter,
             const std::string& normalization) {
            const auto selected = select_claims(record, parse_claim_filter(filter));
            std::ostringstream out;
            write_explanation(out, explain(record.patent_id, selected, claim_matrix(claims, p.config.m), p,
                                           parse_normalization(normalization)));
            return out.str();
          },
          py::arg("record"), py::arg("claims"), py::arg("claim_filter") = "independent_only",
          py::arg("normalization") = "max", "Renders the per-claim attention report as text.");

  mod.def(
      "train",
      [](const EmbeddingFile& embeddings, const std::vector<LabeledPatent>& labels, Horizon horizon,
         const ModelConfig& config, double learning_rate, std::size_t batch_size, std::size_t max_epochs,
         std::size_t patience, std::uint64_t seed) {
        TrainConfig tc;
        tc.learning_rate = learning_rate;
        tc.batch_size = batch_size;
        tc.max_epochs = max_epochs;
        tc.patience = patience;
        tc.seed = seed;
        tc.validate();
        const Dataset ds = assemble_dataset(embeddings, labels, horizon, config.m);
        std::vector<ValueClass> y;
        for (const auto& e : ds.examples) y.push_back(e.label);
        const Split split = stratified_split(y, 1.0 - tc.validation_fraction, seed);
        std::vector<Example> train, val;
        for (auto i : split.train) train.push_back(ds.examples[i]);
        for (auto i : split.test) val.push_back(ds.examples[i]);
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train_model(train, val, config, tc, seed);
        }
        py::dict report;
        std::vector<std::pair<double, double>> losses;
        for (const auto& e : r.report.epochs) losses.emplace_back(e.train_loss, e.val_loss);
        report["losses"] = losses;
        report["best_epoch"] = r.report.best_epoch;
        report["stop_reason"] = std::string(to_string(r.report.stop_reason));
        report["train"] = metrics_dict(r.report.train_metrics);
        report["validation"] = metrics_dict(r.report.val_metrics);
        return py::make_tuple(std::move(r.params), report);
      },
      py::arg("embeddings"), py::arg("labels"), py::arg("horizon") = Horizon::kShort, py::arg("config"),
      py::arg("learning_rate") = 2e-5, py::arg("batch_size") = 512, py::arg("max_epochs") = 100,
      py::arg("patience") = 5, py::arg("seed") = 0,
      "Trains on a stratified split with early stopping; returns (model, report).");

  mod.def(
      "compute_metrics",
      [](std::uint64_t tp, std::uint64_t tn, std::uint64_t fp, std::uint64_t fn) {
        return metrics_dict(compute_metrics({tp, tn, fp, fn}));
      },
      py::arg("tp"), py::arg("tn"), py::arg("fp"), py::arg("fn"));
  mod.def(
      "welch_ttest",
      [](const std::vector<double>& a, const std::vector<double>& b) { return welch_dict(welch_ttest(a, b)); },
      py::arg("group1"), py::arg("group2"));
}
