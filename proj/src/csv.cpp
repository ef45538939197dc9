#include "reqdep/csv.hpp"

#include <fstream>

#include "reqdep/error.hpp"
#include "reqdep/ingest.hpp"

namespace reqdep::csv {

std::vector<Row> parse(std::string_view input) {
    std::string text;
    text.reserve(input.size());
    for (std::size_t i = 0; i < input.size(); ++i) {
        if (input[i] == '\r' && i + 1 < input.size() && input[i + 1] == '\n') continue;
        text.push_back(input[i]);
    }

    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;

    const auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    const auto end_row = [&] {
        end_field();
        rows.push_back(std::move(row));
        row.clear();
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(c);
            }
            continue;
        }
        if (c == '"' && !field_started) {
            in_quotes = true;
            field_started = true;
        } else if (c == ',') {
            end_field();
        } else if (c == '\n') {
            end_row();
        } else {
            field.push_back(c);
            field_started = true;
        }
    }
    if (in_quotes) {
        throw Error(ErrorCode::MalformedRow, "unterminated quoted field");
    }
    if (field_started || !row.empty()) end_row();
    return rows;
}

std::string escape_field(std::string_view field) {
    if (field.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += '"';
    return out;
}

std::string format_row(const Row& row) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
        if (i) line += ',';
        line += escape_field(row[i]);
    }
    line += '\n';
    return line;
}

Table::Table(std::vector<Row> rows, const std::vector<std::string>& required, std::string source)
    : source_(std::move(source)) {
    if (rows.empty()) {
        throw Error(ErrorCode::MissingColumn, source_ + ": file has no header row");
    }
    const Row header = std::move(rows.front());
    for (std::size_t i = 0; i < header.size(); ++i) {
        columns_.emplace(std::string(trim(header[i])), i);
    }
    for (const auto& name : required) {
        if (!columns_.contains(name)) {
            throw Error(ErrorCode::MissingColumn, source_ + ": missing column '" + name + "'");
        }
    }
    rows_.assign(std::make_move_iterator(rows.begin() + 1), std::make_move_iterator(rows.end()));
    // A trailing blank line parses as a single empty field; drop those.
    std::erase_if(rows_, [](const Row& r) { return r.size() == 1 && r.front().empty(); });
    for (std::size_t i = 0; i < rows_.size(); ++i) {
        if (rows_[i].size() != header.size()) {
            throw Error(ErrorCode::MalformedRow, source_ + ": row " + std::to_string(row_number(i)) + " has " +
                                                     std::to_string(rows_[i].size()) + " fields, expected " +
                                                     std::to_string(header.size()));
        }
    }
}

const std::string& Table::get(std::size_t data_index, std::string_view column) const {
    auto it = columns_.find(column);
    if (it == columns_.end()) {
        throw Error(ErrorCode::MissingColumn, source_ + ": missing column '" + std::string(column) + "'");
    }
    return rows_.at(data_index)[it->second];
}

bool Table::has_column(std::string_view column) const { return columns_.find(column) != columns_.end(); }

Table read_table(const std::filesystem::path& path, const std::vector<std::string>& required) {
    return Table(parse(ingest::read_text_file(path)), required, path.string());
}

void write_table(const std::filesystem::path& path, const Row& header, const std::vector<Row>& rows) {
    std::string out = format_row(header);
    for (const auto& r : rows) out += format_row(r);
    ingest::write_text_file(path, out);
}

}  // namespace reqdep::csv
