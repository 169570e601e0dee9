#include "ppsd/cli/output.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "ppsd/core.hpp"

namespace ppsd::cli {

bool ResultRecord::passed() const {
  for (const auto& c : checks) {
    if (!c.pass) return false;
  }
  return true;
}

void ResultRecord::add_check(std::string name, bool pass, std::string detail) {
  checks.push_back({std::move(name), pass, std::move(detail)});
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.15g", v);
  return buf;
}

namespace {

std::string csv_cell(const Json& v) {
  if (v.is_number()) return format_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  const std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

}  // namespace

std::string render_csv(const ResultRecord& rec) {
  std::ostringstream os;
  os << "# command: " << rec.command << '\n';
  if (!rec.model_label.empty()) os << "# model: " << rec.model_label << '\n';
  if (!rec.params.empty()) os << "# params: " << rec.params << '\n';
  if (rec.seed) os << "# seed: " << *rec.seed << '\n';
  os << "# version: " << PPSD_LAB_VERSION << '\n';
  for (const auto& c : rec.checks) {
    os << "# check: " << c.name << ' ' << (c.pass ? "pass" : "fail") << ' ' << c.detail << '\n';
  }
  for (const auto& n : rec.notes) os << "# note: " << n << '\n';
  for (std::size_t i = 0; i < rec.columns.size(); ++i) os << (i ? "," : "") << rec.columns[i];
  os << '\n';
  for (const auto& row : rec.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_cell(row[i]);
    os << '\n';
  }
  return os.str();
}

std::string render_json(const ResultRecord& rec) {
  Json j;
  j["metadata"] = {{"command", rec.command}, {"model", rec.model_label}, {"params", rec.params},
                   {"version", PPSD_LAB_VERSION}};
  if (rec.seed) j["metadata"]["seed"] = *rec.seed;
  j["columns"] = rec.columns;
  j["rows"] = Json::array();
  for (const auto& row : rec.rows) j["rows"].push_back(row);
  j["checks"] = Json::array();
  for (const auto& c : rec.checks) j["checks"].push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
  j["notes"] = rec.notes;
  j["status"] = rec.passed() ? "pass" : "fail";
  return j.dump(2) + "\n";
}

void write_output(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  const std::filesystem::path target(path);
  std::filesystem::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InputError("cannot open " + tmp.string() + " for writing");
    f << text;
    f.flush();
    if (!f) throw InputError("failed writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, target, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot move output into place at " + path + ": " + ec.message());
  }
}

}  // namespace ppsd::cli
