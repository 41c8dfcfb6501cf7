#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "clausewise/clause_gen.hpp"
#include "clausewise/decompose.hpp"
#include "clausewise/errors.hpp"
#include "clausewise/evaluator.hpp"
#include "clausewise/explain.hpp"
#include "clausewise/refine.hpp"
#include "clausewise/schema.hpp"
#include "clausewise/simulate.hpp"
#include "clausewise/sql.hpp"

namespace py = pybind11;
using namespace clausewise;

namespace {

// JSON crosses the boundary as text; the Python package decodes it.
std::string explain_json(const std::string& sql, const SchemaCatalog& schema) {
  return to_json(explain_query(decompose(parse_sql(sql, schema)), schema)).dump();
}

std::string edit_json(const std::string& sql, const SchemaCatalog& schema, const std::string& op, std::size_t step,
                      const std::string& text) {
  const auto shown = explain_query(decompose(parse_sql(sql, schema)), schema);
  auto doc = StepDocument::from(shown);
  if (op == "replace") doc.edit(step - 1, text);
  else if (op == "insert") doc.insert(step - 1, text);
  else if (op == "delete") doc.erase(step - 1);
  else throw py::value_error("op must be replace, insert or delete");
  RuleBasedGenerator generator;
  const auto result = refine(shown, doc, schema, generator);
  nlohmann::ordered_json j;
  j["sql"] = render_sql(result.query);
  auto& outcomes = j["outcomes"];
  outcomes = nlohmann::ordered_json::array();
  for (const auto& o : result.outcomes) outcomes.push_back(to_json(o));
  return j.dump();
}

std::string component_match_json(const std::string& predicted, const std::string& gold, const SchemaCatalog& schema) {
  return to_json(component_match(parse_sql(predicted, schema), parse_sql(gold, schema))).dump();
}

std::string refinement_loop_json(const std::string& predicted, const std::string& gold, const SchemaCatalog& schema,
                                 int rounds, bool paraphrased, std::uint64_t seed) {
  RuleBasedGenerator generator;
  LoopOptions options;
  options.max_rounds = rounds;
  options.paraphrase = paraphrased;
  options.seed = seed;
  return to_json(run_refinement_loop(parse_sql(predicted, schema), parse_sql(gold, schema), schema, generator, options)).dump();
}

std::string corrupt(const std::string& gold, const SchemaCatalog& schema, std::uint64_t seed) {
  return render_sql(corrupt_query(parse_sql(gold, schema), schema, seed).query);
}

std::string generate_clause_sql(const std::string& text, const SchemaCatalog& schema, const std::vector<std::string>& scope) {
  RuleBasedGenerator generator;
  GenerationContext ctx;
  ctx.schema = &schema;
  ctx.scope = scope;
  return render_clause(generate_clause(text, ctx, generator), scope);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Step-by-step SQL explanations and explanation-driven query refinement.";

  py::register_exception<Error>(m, "ClausewiseError", PyExc_ValueError);

  py::class_<SchemaCatalog>(m, "Schema")
      .def_property_readonly("id", &SchemaCatalog::id)
      .def_property_readonly("tables",
                             [](const SchemaCatalog& s) {
                               std::vector<std::string> names;
                               for (const auto& t : s.tables()) names.push_back(t.name);
                               return names;
                             })
      .def("__repr__", [](const SchemaCatalog& s) { return "<Schema " + s.id() + ">"; });

  m.def("load_schema", [](const std::string& path) { return load_schema_file(path); }, py::arg("path"));
  m.def("load_schema_json", [](const std::string& text) { return load_schema_text(text); }, py::arg("text"));
  m.def("normalize_sql", [](const std::string& sql, const SchemaCatalog& s) { return render_sql(parse_sql(sql, s)); },
        py::arg("sql"), py::arg("schema"));
  m.def("sqlite_sql", [](const std::string& sql, const SchemaCatalog& s) { return render_sql(parse_sql(sql, s), {false}); },
        py::arg("sql"), py::arg("schema"));
  m.def("_explain", &explain_json);
  m.def("_edit", &edit_json);
  m.def("_component_match", &component_match_json);
  m.def("exact_set_match",
        [](const std::string& p, const std::string& g, const SchemaCatalog& s) {
          return exact_set_match(parse_sql(p, s), parse_sql(g, s));
        },
        py::arg("predicted"), py::arg("gold"), py::arg("schema"));
  m.def("_refinement_loop", &refinement_loop_json);
  m.def("corrupt", &corrupt, py::arg("gold"), py::arg("schema"), py::arg("seed"));
  m.def("generate_clause", &generate_clause_sql, py::arg("text"), py::arg("schema"), py::arg("scope"));
  m.def("infer_clause_type", [](const std::string& text) { return std::string(to_string(infer_clause_type(text))); },
        py::arg("text"));
}
