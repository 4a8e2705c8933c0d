#pragma once

#include <istream>
#include <string>
#include <string_view>
#include <vector>

namespace bam {

// RFC-4180-style quoting: fields holding commas, quotes or line breaks are
// wrapped in double quotes, embedded quotes doubled. Lines end in LF.
std::string csv_escape(std::string_view field);

// Splits one record. Quoted fields may hold commas and doubled quotes;
// embedded line breaks are not supported by this reader.
std::vector<std::string> csv_split(std::string_view line);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  int column(std::string_view name) const;  // -1 when absent
};

CsvTable read_csv(std::istream& in);

}  // namespace bam
