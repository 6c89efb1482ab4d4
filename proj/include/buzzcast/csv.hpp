#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace buzzcast::csv {

struct Record {
    std::size_t line = 0;  // 1-based line number in the source
    std::vector<std::string> fields;
};

// Minimal RFC 4180 reader: comma separated, double-quote escaping, CRLF tolerant.
// Blank lines are skipped.
std::vector<Record> parse(std::string_view content);

// Column lookup for a header record; throws SchemaError naming the first
// missing column.
class Header {
public:
    Header(const Record& header, const std::vector<std::string_view>& required);
    std::size_t operator[](std::string_view column) const;

private:
    std::unordered_map<std::string, std::size_t> index_;
};

std::string escape(std::string_view field);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

double parse_double(std::string_view text, std::size_t line, std::string_view column);
long long parse_int(std::string_view text, std::size_t line, std::string_view column);

}  // namespace buzzcast::csv
