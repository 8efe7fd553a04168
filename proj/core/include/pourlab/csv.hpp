#ifndef POURLAB_CSV_HPP_
#define POURLAB_CSV_HPP_

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace pourlab::csv {

// RFC-4180 field quoting; rows end with '\n'.
std::string escape(std::string_view field);
void write_row(std::ostream& out, const std::vector<std::string>& fields);

// Parses a whole document, honouring quoted fields with embedded commas,
// doubled quotes and line breaks. Accepts '\n' or "\r\n" row endings.
std::vector<std::vector<std::string>> parse(std::string_view text);

// Shortest decimal text that round-trips to the same double.
std::string format_double(double value);

}  // namespace pourlab::csv

#endif  // POURLAB_CSV_HPP_
