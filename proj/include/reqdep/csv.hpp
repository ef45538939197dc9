#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace reqdep::csv {

using Row = std::vector<std::string>;

/// RFC 4180 parse of a whole document. Quoted fields may contain commas,
/// doubled quotes and newlines. CRLF is normalized to LF before parsing.
std::vector<Row> parse(std::string_view text);

std::string escape_field(std::string_view field);
std::string format_row(const Row& row);

class Table {
public:
    /// First row is the header; throws MissingColumn when any of `required`
    /// is absent and MalformedRow when a data row has the wrong field count.
    Table(std::vector<Row> rows, const std::vector<std::string>& required, std::string source);

    std::size_t size() const { return rows_.size(); }
    /// 1-based line-ish row number (header is row 1) for error messages.
    std::size_t row_number(std::size_t data_index) const { return data_index + 2; }
    const std::string& get(std::size_t data_index, std::string_view column) const;
    bool has_column(std::string_view column) const;
    const std::string& source() const { return source_; }

private:
    std::map<std::string, std::size_t, std::less<>> columns_;
    std::vector<Row> rows_;
    std::string source_;
};

Table read_table(const std::filesystem::path& path, const std::vector<std::string>& required);

/// Writes header + rows with LF line endings.
void write_table(const std::filesystem::path& path, const Row& header, const std::vector<Row>& rows);

}  // namespace reqdep::csv
