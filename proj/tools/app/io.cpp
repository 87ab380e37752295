#include "io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "dnar/error.hpp"

namespace dnar::app {

using nlohmann::json;

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx, digest, &len) != 1) {
    EVP_MD_CTX_free(ctx);
    throw std::runtime_error("SHA-256 computation failed");
  }
  EVP_MD_CTX_free(ctx);
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 15]);
  }
  return out;
}

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

void OutputDir::write_text(const std::string& name, const std::string& content) {
  const auto path = root_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << content;
  if (!out) throw std::runtime_error("cannot write " + path.string());
  auto it = std::find_if(files_.begin(), files_.end(), [&](const auto& f) { return f.first == name; });
  if (it != files_.end())
    it->second = content;
  else
    files_.emplace_back(name, content);
}

void OutputDir::write_json(const std::string& name, const json& j) { write_text(name, j.dump(2) + "\n"); }

void OutputDir::write_manifest() {
  auto files = files_;
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& [name, content] : files)
    if (name != "manifest.json")
      list.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  write_json("manifest.json", {{"files", list}});
}

namespace {

[[noreturn]] void format_error(const std::string& name, const std::string& msg) {
  fail(ErrorCode::FormatError, name + ": " + msg);
}

double parse_number(std::string_view s, const std::string& name, std::size_t line) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    format_error(name, "line " + std::to_string(line) + ": '" + std::string(s) + "' is not a number");
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t pos = line.find(',', start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

transport::DiscreteMeasure atoms_from_json(const json& atoms, int dim, const std::string& name) {
  if (!atoms.is_array() || atoms.empty()) format_error(name, "'atoms' must be a nonempty array");
  transport::DiscreteMeasure mu;
  mu.dim = dim;
  for (const auto& a : atoms) {
    if (!a.is_object() || !a.contains("weight") || !a.contains("point") || !a["weight"].is_number() ||
        !a["point"].is_array())
      format_error(name, "each atom needs a numeric 'weight' and a 'point' array");
    if (static_cast<int>(a["point"].size()) != dim) format_error(name, "atom point has the wrong dimension");
    mu.weights.push_back(a["weight"].get<double>());
    for (const auto& z : a["point"]) {
      if (!z.is_number()) format_error(name, "point coordinates must be numbers");
      mu.points.push_back(z.get<double>());
    }
  }
  return mu;
}

template <class M>
void checked(const M& mu, const std::string& name) {
  try {
    mu.validate();
  } catch (const Error& e) {
    format_error(name, e.what());
  }
}

}  // namespace

AnyMeasure parse_measure(const std::string& text, const std::string& name) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) format_error(name, "empty file");

  if (text[first] == '{') {
    json j;
    try {
      j = json::parse(text);
    } catch (const json::parse_error& e) {
      format_error(name, std::string("invalid JSON: ") + e.what());
    }
    if (j.value("fibered", false)) {
      transport::FiberedMeasure fm;
      if (!j.contains("x_dim") || !j.contains("omega_dim") || !j.contains("fibers"))
        format_error(name, "fibered measures need 'x_dim', 'omega_dim' and 'fibers'");
      fm.x_dim = j["x_dim"].get<int>();
      fm.omega_dim = j["omega_dim"].get<int>();
      if (!j["fibers"].is_array()) format_error(name, "'fibers' must be an array");
      for (const auto& f : j["fibers"]) {
        if (!f.contains("omega") || !f.contains("mass") || !f.contains("atoms"))
          format_error(name, "each fibre needs 'omega', 'mass' and 'atoms'");
        transport::Fiber fiber;
        fiber.omega = f["omega"].get<std::vector<double>>();
        fiber.mass = f["mass"].get<double>();
        fiber.conditional = atoms_from_json(f["atoms"], fm.x_dim, name);
        fm.fibers.push_back(std::move(fiber));
      }
      checked(fm, name);
      return fm;
    }
    if (!j.contains("dimension") || !j["dimension"].is_number_integer())
      format_error(name, "missing integer 'dimension'");
    auto mu = atoms_from_json(j.value("atoms", json()), j["dimension"].get<int>(), name);
    checked(mu, name);
    return mu;
  }

  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  const auto header = split(line);
  if (header.empty() || header[0].find("weight") == std::string_view::npos)
    format_error(name, "CSV header must start with 'weight'");
  const int dim = static_cast<int>(header.size()) - 1;
  if (dim < 1) format_error(name, "CSV needs at least one coordinate column");
  transport::DiscreteMeasure mu;
  mu.dim = dim;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split(line);
    if (static_cast<int>(cells.size()) != dim + 1)
      format_error(name, "line " + std::to_string(lineno) + ": expected " + std::to_string(dim + 1) + " fields");
    mu.weights.push_back(parse_number(cells[0], name, lineno));
    for (int c = 1; c <= dim; ++c) mu.points.push_back(parse_number(cells[c], name, lineno));
  }
  checked(mu, name);
  return mu;
}

AnyMeasure read_measure(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) format_error(path.string(), "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_measure(ss.str(), path.string());
}

std::string measure_csv(const transport::DiscreteMeasure& mu) {
  std::string out = "weight";
  for (int c = 0; c < mu.dim; ++c) out += ",p" + std::to_string(c);
  out += '\n';
  for (std::size_t i = 0; i < mu.size(); ++i) {
    out += format_double(mu.weights[i]);
    for (double z : mu.point(i)) out += "," + format_double(z);
    out += '\n';
  }
  return out;
}

json measure_json(const transport::DiscreteMeasure& mu) {
  json atoms = json::array();
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const auto p = mu.point(i);
    atoms.push_back({{"weight", mu.weights[i]}, {"point", std::vector<double>(p.begin(), p.end())}});
  }
  return {{"dimension", mu.dim}, {"atoms", atoms}};
}

json measure_json(const transport::FiberedMeasure& mu) {
  json fibers = json::array();
  for (const auto& f : mu.fibers)
    fibers.push_back({{"omega", f.omega}, {"mass", f.mass}, {"atoms", measure_json(f.conditional)["atoms"]}});
  return {{"fibered", true}, {"x_dim", mu.x_dim}, {"omega_dim", mu.omega_dim}, {"fibers", fibers}};
}

std::string trajectory_csv(const particle::Trajectory& traj) {
  const int d = traj.dim;
  std::string out = "t,particle";
  for (const char* p : {"x", "v", "w"})
    for (int c = 0; c < d; ++c) out += "," + std::string(p) + std::to_string(c);
  out += '\n';
  for (const auto& f : traj.frames) {
    const std::string t = format_double(f.t);
    for (int i = 0; i < traj.count; ++i) {
      out += t + "," + std::to_string(i);
      for (const auto* a : {&f.x, &f.v, &f.omega})
        for (int c = 0; c < d; ++c) out += "," + format_double((*a)[i * d + c]);
      out += '\n';
    }
  }
  return out;
}

std::string hydro_csv(const hydro::HydroSolution& sol) {
  std::string out = "t,cell_center,rho,w,u\n";
  const double dx = sol.dx();
  for (const auto& f : sol.frames) {
    const std::string t = format_double(f.t);
    for (int i = 0; i < sol.cells; ++i)
      out += t + "," + format_double((i + 0.5) * dx) + "," + format_double(f.rho[i]) + "," + format_double(f.w[i]) +
             "," + format_double(f.u[i]) + "\n";
  }
  return out;
}

std::string series_csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& columns) {
  std::string out;
  for (std::size_t c = 0; c < header.size(); ++c) out += (c ? "," : "") + header[c];
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) out += (c ? "," : "") + format_double(columns[c][r]);
    out += '\n';
  }
  return out;
}

json report_json(const meanfield::StudyReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks)
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", c.value},
                      {"threshold", c.threshold},
                      {"detail", c.detail}});
  json series = json::object();
  for (const auto& s : rep.series) series[s.name] = {{"x", s.x}, {"y", s.y}};
  return {{"kind", rep.kind},       {"parameters", rep.parameters}, {"fitted", rep.fitted},
          {"checks", checks},       {"passed", rep.passed()},       {"series", series}};
}

}  // namespace dnar::app
