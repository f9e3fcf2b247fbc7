#include "charex/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "charex/errors.hpp"

namespace charex::io {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& field, const std::string& path) {
  const std::string t = trim(field);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size())
    throw IoError(path + ": bad numeric field '" + field + "'");
  return v;
}

struct ParsedCsv {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// Numeric two-column reader ('#' metadata, plain unquoted fields).
ParsedCsv read_numeric_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  ParsedCsv out;
  std::string line;
  bool saw_header = false;
  while (std::getline(in, line)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line[0] == '#') {
      const std::string body = trim(line.substr(1));
      const std::size_t colon = body.find(':');
      if (colon != std::string::npos)
        out.metadata.emplace_back(trim(body.substr(0, colon)), trim(body.substr(colon + 1)));
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!saw_header) {
      for (const auto& f : fields) out.columns.push_back(trim(f));
      saw_header = true;
      continue;
    }
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_double(f, path));
    if (row.size() != out.columns.size())
      throw IoError(path + ": row width differs from header");
    out.rows.push_back(std::move(row));
  }
  if (!saw_header) throw IoError(path + ": no header row");
  return out;
}

std::string meta_value(const ParsedCsv& csv, const std::string& key) {
  for (const auto& [k, v] : csv.metadata)
    if (k == key) return v;
  return "";
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

std::string csv_field(const std::string& raw) {
  if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
  std::string q = "\"";
  for (char c : raw) {
    if (c == '"') q += "\"\"";
    else q += c;
  }
  q += "\"";
  return q;
}

std::string CsvTable::render() const {
  std::string s;
  for (const auto& [k, v] : metadata) s += "# " + k + ": " + v + "\r\n";
  for (std::size_t i = 0; i < columns.size(); ++i)
    s += (i ? "," : "") + csv_field(columns[i]);
  s += "\r\n";
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) s += (i ? "," : "") + csv_field(row[i]);
    s += "\r\n";
  }
  return s;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << content;
  if (!out) throw IoError("write failed for '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

DiscreteMeasure read_atoms_csv(const std::string& path) {
  const ParsedCsv csv = read_numeric_csv(path);
  const std::string kind = meta_value(csv, "kind");
  if (kind != "atoms")
    throw IoError(path + ": expected '# kind: atoms' marker, got '" + kind + "'");
  if (csv.columns.size() != 2)
    throw IoError(path + ": atoms files need exactly two columns (position, weight)");
  std::vector<double> pos, w;
  for (const auto& row : csv.rows) {
    pos.push_back(row[0]);
    w.push_back(row[1]);
  }
  return DiscreteMeasure(std::move(pos), std::move(w));
}

GridMeasure read_density_csv(const std::string& path) {
  const ParsedCsv csv = read_numeric_csv(path);
  const std::string kind = meta_value(csv, "kind");
  if (kind != "density")
    throw IoError(path + ": expected '# kind: density' marker, got '" + kind + "'");
  if (csv.columns.size() != 2)
    throw IoError(path + ": density files need exactly two columns (x, density)");
  if (csv.rows.size() < 2) throw IoError(path + ": density files need at least two cells");
  const double dx = csv.rows[1][0] - csv.rows[0][0];
  if (!(dx > 0)) throw IoError(path + ": x column must be strictly increasing");
  std::vector<double> rho;
  rho.reserve(csv.rows.size());
  for (std::size_t k = 0; k < csv.rows.size(); ++k) {
    const double expected = csv.rows[0][0] + dx * static_cast<double>(k);
    if (std::abs(csv.rows[k][0] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
      throw IoError(path + ": x column is not uniformly spaced");
    rho.push_back(csv.rows[k][1]);
  }
  return GridMeasure(csv.rows[0][0] - 0.5 * dx, dx, std::move(rho));
}

std::string render_atoms_csv(const DiscreteMeasure& mu,
                             std::vector<std::pair<std::string, std::string>> metadata) {
  CsvTable t;
  t.metadata = std::move(metadata);
  t.metadata.emplace_back("kind", "atoms");
  t.columns = {"position", "weight"};
  for (std::size_t i = 0; i < mu.size(); ++i)
    t.rows.push_back({format_double(mu.positions()[i]), format_double(mu.weights()[i])});
  return t.render();
}

std::string render_density_csv(const GridMeasure& nu,
                               std::vector<std::pair<std::string, std::string>> metadata) {
  CsvTable t;
  t.metadata = std::move(metadata);
  t.metadata.emplace_back("kind", "density");
  t.columns = {"x", "density"};
  for (int k = 0; k < nu.cells(); ++k)
    t.rows.push_back({format_double(nu.mid(k)), format_double(nu.rho(k))});
  return t.render();
}

}  // namespace charex::io
