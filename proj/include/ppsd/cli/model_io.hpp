#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ppsd/lindblad.hpp"
#include "ppsd/models.hpp"

namespace ppsd::cli {

using Json = nlohmann::ordered_json;

/// Matrix as rows of [re, im] pairs.
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& what);

/// {name, dim, hamiltonian, terms: [{rate, op, label}], basis_note}
Json model_to_json(const LindbladModel& model);
LindbladModel model_from_json(const Json& j);

LindbladModel load_model_file(const std::filesystem::path& path);

/// "key=value" -> (key, value); throws InputError.
std::pair<std::string, double> parse_param(const std::string& text);

/** Where a model comes from: a catalog entry or a model file. */
struct ModelSource {
  std::optional<ModelSpec> spec;
  std::optional<std::filesystem::path> file;
};

ModelSource make_source(const std::string& model_name, const std::string& model_file,
                        const std::vector<std::string>& params, std::optional<long> dim,
                        const std::string& grid);

LindbladModel resolve(const ModelSource& source);

/// "k=v;k=v" in key order, or the file path.
std::string describe_params(const ModelSource& source);

/**
 * Parses a state description against a model:
 *   plus | minus       qubit states; basis vectors for models stored in the (|+>, |->) basis
 *   ground             the catalog model's reference state
 *   basis:k | fock:k   basis vector k
 *   coherent:re,im     truncated coherent state
 *   squeezed_ppsd      zero-residual state of the squeezed-vacuum model
 *   random:seed        Haar-random state
 *   file:path          JSON array of [re, im] amplitudes
 */
StateVector parse_state(const std::string& text, const ModelSource& source, const LindbladModel& model);

}  // namespace ppsd::cli
