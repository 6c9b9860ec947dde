#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <fstream>
#include <sstream>

#include "factkb/cli.hpp"
#include "factkb/corpus.hpp"
#include "factkb/datasets.hpp"
#include "factkb/errors.hpp"
#include "factkb/kb_store.hpp"
#include "factkb/masking.hpp"
#include "factkb/metrics.hpp"

namespace py = pybind11;
using namespace factkb;

namespace {

std::vector<Label> to_labels(const std::vector<std::string>& names) {
  std::vector<Label> out;
  out.reserve(names.size());
  for (const auto& n : names) {
    const auto label = parse_label(n);
    if (!label) throw ConfigError("unknown label '" + n + "'; expected factual or non_factual");
    out.push_back(*label);
  }
  return out;
}

py::dict stats_dict(const KbStats& s) {
  py::dict d;
  d["num_entities"] = s.num_entities;
  d["num_relations"] = s.num_relations;
  d["num_triples"] = s.num_triples;
  d["num_entities_with_out_edges"] = s.num_entities_with_out_edges;
  d["out_degree_histogram"] = s.out_degree_histogram;
  return d;
}

std::vector<CorpusRecord> synthesize(const KnowledgeBase& kb, const std::string& strategy,
                                     std::uint64_t n, std::uint32_t k, std::uint64_t seed,
                                     double mask_prob, const std::optional<std::string>& descriptions,
                                     std::size_t max_units, const std::string& dead_end,
                                     bool with_replacement, bool no_revisit, bool allow_unmasked,
                                     bool evidence_forced_only, unsigned workers) {
  SynthConfig cfg;
  cfg.n = n;
  cfg.k = k;
  cfg.seed = seed;
  cfg.mask_prob = mask_prob;
  cfg.max_units_per_doc = max_units;
  cfg.sample_with_replacement = with_replacement;
  cfg.no_revisit = no_revisit;
  cfg.workers = workers;
  if (dead_end == "truncate") cfg.dead_end_policy = DeadEndPolicy::truncate;
  else if (dead_end == "resample") cfg.dead_end_policy = DeadEndPolicy::resample;
  else throw ConfigError("dead_end must be 'truncate' or 'resample'");
  cfg.validate();

  const auto parsed = parse_strategy(strategy);
  if (!parsed) throw ConfigError("unknown strategy '" + strategy + "'");
  std::vector<Document> docs;
  {
    py::gil_scoped_release release;
    switch (*parsed) {
      case Strategy::entity_wiki: docs = synth_entity_wiki(kb, cfg); break;
      case Strategy::evidence: {
        if (!descriptions) throw ConfigError("the evidence strategy needs descriptions");
        docs = synth_evidence(kb, load_descriptions_file(*descriptions, kb), cfg);
        break;
      }
      case Strategy::knowledge_walk: docs = synth_knowledge_walk(kb, cfg); break;
    }
  }
  MaskOptions options;
  options.allow_unmasked = allow_unmasked;
  options.evidence_forced_only = evidence_forced_only;
  const auto masked = mask_corpus(docs, cfg.mask_prob, cfg.seed, options, workers);
  std::vector<CorpusRecord> out;
  out.reserve(masked.size());
  for (const auto& md : masked) out.push_back(to_record(md, cfg.seed));
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "FactKB corpus synthesis, dataset adapters and factuality metrics.";

  static py::exception<Error> error(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", error.ptr());
  py::register_exception<LookupError>(m, "LookupError", error.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
  py::register_exception<SynthesisError>(m, "SynthesisError", error.ptr());
  py::register_exception<IntegrityError>(m, "IntegrityError", error.ptr());
  py::register_exception<DatasetError>(m, "DatasetError", error.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", error.ptr());

  py::class_<KnowledgeBase>(m, "KnowledgeBase")
      .def_static(
          "load",
          [](const std::string& path, bool add_inverse) {
            LoadOptions options;
            options.add_inverse = add_inverse;
            return load_kb_file(path, options);
          },
          py::arg("path"), py::arg("add_inverse") = false)
      .def_static(
          "from_text",
          [](const std::string& text, bool add_inverse) {
            std::istringstream in(text);
            LoadOptions options;
            options.add_inverse = add_inverse;
            return load_kb(in, options);
          },
          py::arg("text"), py::arg("add_inverse") = false)
      .def_property_readonly("num_entities", &KnowledgeBase::num_entities)
      .def_property_readonly("num_relations", &KnowledgeBase::num_relations)
      .def_property_readonly("num_triples", &KnowledgeBase::num_triples)
      .def("stats", [](const KnowledgeBase& kb) { return stats_dict(kb_stats(kb)); })
      .def(
          "neighbors",
          [](const KnowledgeBase& kb, const std::string& entity) {
            const auto id = kb.find_entity(entity);
            if (!id) throw LookupError("unknown entity '" + entity + "'");
            std::vector<std::pair<std::string, std::string>> out;
            for (const auto& e : kb.out_neighborhood(*id)) {
              out.emplace_back(kb.relation_name(e.relation), kb.entity_name(e.target));
            }
            return out;
          },
          py::arg("entity"), "Out-edges of an entity as (relation, target) pairs.");

  py::class_<CorpusRecord>(m, "CorpusRecord")
      .def_readonly("id", &CorpusRecord::id)
      .def_readonly("strategy", &CorpusRecord::strategy)
      .def_readonly("text", &CorpusRecord::text)
      .def_readonly("masked_text", &CorpusRecord::masked_text)
      .def_property_readonly("targets",
                             [](const CorpusRecord& r) {
                               std::vector<std::pair<std::size_t, std::string>> out;
                               for (const auto& t : r.targets) out.emplace_back(t.unit, t.surface);
                               return out;
                             })
      .def_readonly("source_entities", &CorpusRecord::source_entities)
      .def_readonly("seed", &CorpusRecord::seed)
      .def("to_json", &serialize_record)
      .def_static("from_json", [](const std::string& line) { return parse_record(line); })
      .def("__eq__", [](const CorpusRecord& a, const CorpusRecord& b) { return a == b; })
      .def("__repr__", [](const CorpusRecord& r) { return "<CorpusRecord " + r.id + ">"; });

  m.def("synthesize", &synthesize, py::arg("kb"), py::arg("strategy"), py::arg("n") = 100000,
        py::arg("k") = 5, py::arg("seed") = 0, py::arg("mask_prob") = 0.15,
        py::arg("descriptions") = py::none(), py::arg("max_units") = 480,
        py::arg("dead_end") = "truncate", py::arg("with_replacement") = true,
        py::arg("no_revisit") = false, py::arg("allow_unmasked") = false,
        py::arg("evidence_forced_only") = false, py::arg("workers") = 1,
        "Synthesize and mask a corpus: entity_wiki, evidence or knowledge_walk.");
  m.def("unmask", &unmask_record, py::arg("record"));
  m.def(
      "write_corpus",
      [](const std::vector<CorpusRecord>& records, const std::string& path) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + path);
        return write_corpus(records, out);
      },
      py::arg("records"), py::arg("path"));
  m.def(
      "read_corpus",
      [](const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw Error("cannot open " + path);
        return read_corpus(in, path);
      },
      py::arg("path"));

  py::class_<LabeledPair>(m, "LabeledPair")
      .def_readonly("id", &LabeledPair::id)
      .def_readonly("summary", &LabeledPair::summary)
      .def_readonly("document", &LabeledPair::document)
      .def_property_readonly("label",
                             [](const LabeledPair& p) { return std::string(to_string(p.label)); })
      .def_readonly("subset", &LabeledPair::subset)
      .def_readonly("human_score", &LabeledPair::human_score)
      .def_property_readonly("error_categories",
                             [](const LabeledPair& p) {
                               std::vector<std::string> out;
                               for (auto c : p.error_categories) out.emplace_back(to_string(c));
                               return out;
                             })
      .def("__repr__", [](const LabeledPair& p) { return "<LabeledPair " + p.id + ">"; });

  m.def(
      "load_pairs",
      [](const std::string& path, const std::string& format, bool drop) {
        const auto parsed = parse_format(format);
        if (!parsed) throw ConfigError("unknown dataset format '" + format + "'");
        auto pairs = load_pairs_file(path, builtin_manifest(*parsed));
        if (drop) pairs = drop_nei(pairs);
        return to_labeled(pairs);
      },
      py::arg("path"), py::arg("format"), py::arg("drop_nei") = false);
  m.def("format_pair_input", &format_pair_input, py::arg("pair"));
  m.def(
      "write_pairs",
      [](const std::vector<LabeledPair>& pairs, const std::string& path) {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + path);
        write_pairs(pairs, out);
      },
      py::arg("pairs"), py::arg("path"));
  m.def("read_pairs", &read_pairs_file, py::arg("path"));

  m.def(
      "balanced_accuracy",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
        return balanced_accuracy(to_labels(gold), to_labels(pred));
      },
      py::arg("gold"), py::arg("pred"));
  m.def(
      "micro_f1",
      [](const std::vector<std::string>& gold, const std::vector<std::string>& pred) {
        return micro_f1(to_labels(gold), to_labels(pred));
      },
      py::arg("gold"), py::arg("pred"));
  const auto correlation = [](auto fn) {
    return [fn](const std::vector<double>& x, const std::vector<double>& y,
                const std::string& p_value) {
      if (p_value != "t" && p_value != "permutation") {
        throw ConfigError("p_value must be 't' or 'permutation'");
      }
      const auto r = fn(x, y, p_value == "t" ? PValueMethod::student_t : PValueMethod::permutation);
      return std::make_pair(r.coefficient, r.p_value);
    };
  };
  m.def("pearson",
        correlation([](std::span<const double> x, std::span<const double> y, PValueMethod p) {
          return pearson(x, y, p);
        }),
        py::arg("x"), py::arg("y"), py::arg("p_value") = "t",
        "Pearson coefficient and two-sided p-value.");
  m.def("spearman",
        correlation([](std::span<const double> x, std::span<const double> y, PValueMethod p) {
          return spearman(x, y, p);
        }),
        py::arg("x"), py::arg("y"), py::arg("p_value") = "t",
        "Spearman coefficient and two-sided p-value.");

  m.def(
      "run_cli",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "factkb");
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run the factkb command line; returns (exit_code, stdout, stderr).");
}
