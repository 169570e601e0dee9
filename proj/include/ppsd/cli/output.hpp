#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace ppsd::cli {

using Json = nlohmann::ordered_json;

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

/** Run metadata plus a table payload; rendered as CSV or JSON. */
struct ResultRecord {
  std::string command;
  std::string model_label;
  std::string params;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> columns;
  std::vector<std::vector<Json>> rows;
  std::vector<Check> checks;
  std::vector<std::string> notes;

  bool passed() const;
  void add_check(std::string name, bool pass, std::string detail);
};

/// Fixed "%.15g" rendering shared by CSV and JSON notes.
std::string format_number(double v);

std::string render_csv(const ResultRecord& rec);
std::string render_json(const ResultRecord& rec);

/// Writes text to path through a temporary file and a rename; "" or "-" writes to out.
void write_output(const std::string& text, const std::string& path, std::ostream& out);

}  // namespace ppsd::cli
