#include "buzzcast/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "buzzcast/error.hpp"

namespace buzzcast::csv {

std::vector<Record> parse(std::string_view content) {
    std::vector<Record> records;
    Record current;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    std::size_t line = 1;
    std::size_t record_line = 1;

    auto finish_field = [&] {
        current.fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto finish_record = [&] {
        finish_field();
        bool blank = current.fields.size() == 1 && current.fields[0].empty();
        if (!blank) {
            current.line = record_line;
            records.push_back(std::move(current));
        }
        current = Record{};
    };

    for (std::size_t i = 0; i < content.size(); ++i) {
        char c = content[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < content.size() && content[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                if (!field_started) in_quotes = true;
                else field.push_back(c);
                field_started = true;
                break;
            case ',':
                finish_field();
                break;
            case '\r':
                break;
            case '\n':
                finish_record();
                ++line;
                record_line = line;
                break;
            default:
                field.push_back(c);
                field_started = true;
        }
    }
    if (field_started || !field.empty() || !current.fields.empty()) finish_record();
    return records;
}

Header::Header(const Record& header, const std::vector<std::string_view>& required) {
    for (std::size_t i = 0; i < header.fields.size(); ++i) {
        std::string name = header.fields[i];
        // Tolerate a UTF-8 BOM on the first column.
        if (i == 0 && name.rfind("\xEF\xBB\xBF", 0) == 0) name.erase(0, 3);
        index_.emplace(std::move(name), i);
    }
    for (auto column : required) {
        if (!index_.count(std::string(column))) throw SchemaError(std::string(column));
    }
}

std::size_t Header::operator[](std::string_view column) const {
    auto it = index_.find(std::string(column));
    if (it == index_.end()) throw SchemaError(std::string(column));
    return it->second;
}

std::string escape(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out.push_back('"');
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    return s;
}

}  // namespace

double parse_double(std::string_view text, std::size_t line, std::string_view column) {
    auto s = trim(text);
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
        throw RowError(line, "cannot parse " + std::string(column) + " value '" + std::string(text) + "'");
    }
    return value;
}

long long parse_int(std::string_view text, std::size_t line, std::string_view column) {
    auto s = trim(text);
    long long value = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (s.empty() || ec != std::errc{} || ptr != s.data() + s.size()) {
        throw RowError(line, "cannot parse " + std::string(column) + " value '" + std::string(text) + "'");
    }
    return value;
}

}  // namespace buzzcast::csv
