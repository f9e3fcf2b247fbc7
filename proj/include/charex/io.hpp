#pragma once
#include <string>
#include <utility>
#include <vector>

#include "charex/measures.hpp"
#include "charex/tableaux.hpp"

namespace charex::io {

inline constexpr const char* kVersion = "1.0.0";

// Shortest decimal string that round-trips the double exactly ('.' radix,
// locale-free, "inf"/"nan" spelled out).
std::string format_double(double v);

// RFC-4180 field: quoted iff it holds a comma, quote, CR or LF; embedded
// quotes doubled.
std::string csv_field(const std::string& raw);

// A CSV artifact: '# key: value' metadata lines above the header row,
// CRLF line endings throughout (RFC-4180).
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string render() const;
};

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Measure files are two-column CSVs with an explicit '# kind:' marker:
//   kind: atoms    columns position,weight
//   kind: density  columns x,density  (x = midpoints of uniform cells)
DiscreteMeasure read_atoms_csv(const std::string& path);
GridMeasure read_density_csv(const std::string& path);
std::string render_atoms_csv(const DiscreteMeasure& mu,
                             std::vector<std::pair<std::string, std::string>> metadata);
std::string render_density_csv(const GridMeasure& nu,
                               std::vector<std::pair<std::string, std::string>> metadata);

}  // namespace charex::io
