#include "ppsd/cli/model_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace ppsd::cli {

namespace {

double parse_double(const std::string& s, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw InputError("cannot parse " + what + " '" + s + "' as a number");
  }
  if (used != s.size() || !std::isfinite(v)) throw InputError("cannot parse " + what + " '" + s + "' as a number");
  return v;
}

long parse_long(const std::string& s, const std::string& what) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw InputError("cannot parse " + what + " '" + s + "'");
  return v;
}

Complex complex_from_json(const Json& j, const std::string& what) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw InputError(what + ": complex entries must be [re, im] pairs");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

GridSpec parse_grid(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.size() != 3) throw InputError("--grid expects x_min:x_max:n_points, got '" + text + "'");
  GridSpec g{parse_double(parts[0], "grid x_min"), parse_double(parts[1], "grid x_max"),
             static_cast<int>(parse_long(parts[2], "grid n_points"))};
  try {
    g.validate(8);
  } catch (const InvariantError& e) {
    throw InputError(e.what());
  }
  return g;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) throw InputError(what + ": expected a non-empty array of rows");
  const auto n = static_cast<Eigen::Index>(j.size());
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
      throw InputError(what + ": matrix must be square");
    }
    for (Eigen::Index k = 0; k < n; ++k) m(i, k) = complex_from_json(row[static_cast<std::size_t>(k)], what);
  }
  return m;
}

Json model_to_json(const LindbladModel& model) {
  Json j;
  j["name"] = model.label;
  j["dim"] = model.dim;
  j["hamiltonian"] = matrix_to_json(model.hamiltonian);
  j["terms"] = Json::array();
  for (const auto& t : model.terms) {
    j["terms"].push_back({{"rate", t.rate}, {"op", matrix_to_json(t.op)}, {"label", t.label}});
  }
  j["basis_note"] = model.basis_note;
  return j;
}

LindbladModel model_from_json(const Json& j) {
  if (!j.is_object()) throw InputError("model file: top level must be an object");
  for (const char* key : {"dim", "hamiltonian", "terms"}) {
    if (!j.contains(key)) throw InputError(std::string("model file: missing field '") + key + "'");
  }
  if (!j["dim"].is_number_integer()) throw InputError("model file: dim must be an integer");
  const auto dim = j["dim"].get<Eigen::Index>();
  Operator h = matrix_from_json(j["hamiltonian"], "hamiltonian");
  if (h.rows() != dim) throw InputError("model file: hamiltonian does not match dim");
  if (!j["terms"].is_array()) throw InputError("model file: terms must be an array");
  std::vector<LindbladTerm> terms;
  for (const auto& t : j["terms"]) {
    if (!t.is_object() || !t.contains("rate") || !t.contains("op") || !t["rate"].is_number()) {
      throw InputError("model file: every term needs a numeric rate and an op");
    }
    LindbladTerm term{t["rate"].get<double>(), matrix_from_json(t["op"], "term op"),
                      t.value("label", std::string{})};
    if (term.op.rows() != dim) throw InputError("model file: term op does not match dim");
    terms.push_back(std::move(term));
  }
  try {
    return make_model(std::move(h), std::move(terms), j.value("name", std::string("model_file")),
                      j.value("basis_note", std::string{}));
  } catch (const InvariantError& e) {
    throw InputError(std::string("model file: ") + e.what());
  }
}

LindbladModel load_model_file(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) throw InputError("cannot read model file " + path.string());
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::parse_error& e) {
    throw InputError("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

std::pair<std::string, double> parse_param(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("--param expects key=value, got '" + text + "'");
  const std::string key = text.substr(0, eq);
  return {key, parse_double(text.substr(eq + 1), "parameter " + key)};
}

ModelSource make_source(const std::string& model_name, const std::string& model_file,
                        const std::vector<std::string>& params, std::optional<long> dim, const std::string& grid) {
  ModelSource src;
  if (!model_name.empty() && !model_file.empty()) throw InputError("give either --model or --model-file");
  if (!model_file.empty()) {
    if (!params.empty() || dim || !grid.empty()) throw InputError("--param/--dim/--grid apply to catalog models only");
    src.file = model_file;
    return src;
  }
  if (model_name.empty()) throw InputError("a model is required (--model or --model-file)");
  ModelSpec spec{model_name_from_string(model_name), {}, std::nullopt, std::nullopt};
  for (const auto& p : params) {
    const auto [k, v] = parse_param(p);
    if (!spec.params.emplace(k, v).second) throw InputError("parameter '" + k + "' given twice");
  }
  if (dim) {
    if (*dim < 2) throw InputError("--dim must be >= 2");
    spec.dim = *dim;
  }
  if (!grid.empty()) spec.grid = parse_grid(grid);
  src.spec = std::move(spec);
  return src;
}

LindbladModel resolve(const ModelSource& source) {
  if (source.file) return load_model_file(*source.file);
  if (!source.spec) throw InputError("no model given");
  return catalog_model(*source.spec);
}

std::string describe_params(const ModelSource& source) {
  if (source.file) return "file=" + source.file->string();
  std::string out;
  for (const auto& [k, v] : source.spec->params) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    out += (out.empty() ? "" : ";") + k + "=" + buf;
  }
  if (source.spec->dim) out += (out.empty() ? "" : ";") + std::string("dim=") + std::to_string(*source.spec->dim);
  if (source.spec->grid) {
    const auto& g = *source.spec->grid;
    char buf[96];
    std::snprintf(buf, sizeof buf, "grid=%.15g:%.15g:%d", g.x_min, g.x_max, g.n_points);
    out += (out.empty() ? "" : ";") + std::string(buf);
  }
  return out;
}

StateVector parse_state(const std::string& text, const ModelSource& source, const LindbladModel& model) {
  const Eigen::Index d = model.dim;
  const auto colon = text.find(':');
  const std::string kind = text.substr(0, colon);
  const std::string arg = colon == std::string::npos ? std::string{} : text.substr(colon + 1);
  const bool pm_basis = source.spec && source.spec->name == ModelName::thermal_qubit;

  if (kind == "plus" || kind == "minus") {
    if (d != 2) throw InputError("state '" + kind + "' needs a qubit model");
    if (pm_basis) return StateVector::basis(2, kind == "plus" ? 0 : 1);
    Vector v(2);
    v << 1.0, (kind == "plus" ? 1.0 : -1.0);
    return StateVector::normalized(v);
  }
  if (kind == "ground") {
    if (!source.spec) throw InputError("state 'ground' needs a catalog model");
    return ground_state(*source.spec);
  }
  if (kind == "basis" || kind == "fock") {
    const long k = parse_long(arg, "basis index");
    if (k < 0 || k >= d) throw InputError("basis index " + arg + " out of range for dim " + std::to_string(d));
    return StateVector::basis(d, k);
  }
  if (kind == "coherent") {
    const auto comma = arg.find(',');
    const double re = parse_double(arg.substr(0, comma), "coherent amplitude");
    const double im = comma == std::string::npos ? 0.0 : parse_double(arg.substr(comma + 1), "coherent amplitude");
    return coherent_state({re, im}, d);
  }
  if (kind == "squeezed_ppsd") {
    if (!source.spec || source.spec->name != ModelName::squeezed_vacuum_decay) {
      throw InputError("state 'squeezed_ppsd' needs the squeezed_vacuum_decay model");
    }
    const auto& p = source.spec->params;
    const auto r = p.find("r");
    if (r == p.end()) throw InputError("squeezed_vacuum_decay: missing parameter 'r'");
    const auto th = p.find("theta");
    return squeezed_ppsd_state(r->second, th == p.end() ? 0.0 : th->second);
  }
  if (kind == "random") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(parse_long(arg.empty() ? "0" : arg, "random seed")));
    return random_state(d, rng);
  }
  if (kind == "file") {
    std::ifstream f(arg);
    if (!f) throw InputError("cannot read state file " + arg);
    Json j;
    try {
      j = Json::parse(f);
    } catch (const Json::parse_error& e) {
      throw InputError("state file " + arg + ": " + e.what());
    }
    if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != d) {
      throw InputError("state file must hold " + std::to_string(d) + " [re, im] amplitudes");
    }
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v(i) = complex_from_json(j[static_cast<std::size_t>(i)], "state file");
    try {
      return StateVector::normalized(v);
    } catch (const InvariantError& e) {
      throw InputError(e.what());
    }
  }
  throw InputError("unknown state '" + text + "'");
}

}  // namespace ppsd::cli
