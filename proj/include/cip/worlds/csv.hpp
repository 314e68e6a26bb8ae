#pragma once

#include <istream>
#include <string>
#include <vector>

namespace cip {

// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF tolerated.
std::vector<std::vector<std::string>> read_csv(std::istream& in);
std::string write_csv(const std::vector<std::vector<std::string>>& rows);
std::string csv_escape(const std::string& cell);

}  // namespace cip
