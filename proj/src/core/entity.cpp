#include "relmatch/core/entity.hpp"

#include "relmatch/errors.hpp"
#include "relmatch/util/fs.hpp"

#include <algorithm>
#include <unordered_set>

namespace relmatch::core {

namespace {

// Splits RFC-4180 text into rows of fields. Quoted fields may contain commas,
// doubled quotes and newlines. Accepts both LF and CRLF row endings.
std::vector<std::vector<std::string>> split_csv(std::string_view text) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_was_quoted = false;
    bool row_had_quotes = false;
    std::size_t line = 1;

    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        row_had_quotes = row_had_quotes || field_was_quoted;
        field_was_quoted = false;
    };
    auto end_row = [&] {
        end_field();
        // Blank lines (e.g. a trailing empty line) are not rows.
        bool blank = row.size() == 1 && row[0].empty() && !row_had_quotes;
        if (!blank) rows.push_back(std::move(row));
        row.clear();
        row_had_quotes = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
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
            if (!field.empty() || field_was_quoted) {
                throw MalformedCsv("line " + std::to_string(line) +
                                   ": quote inside unquoted field");
            }
            in_quotes = true;
            field_was_quoted = true;
            break;
        case ',':
            end_field();
            break;
        case '\r':
            if (i + 1 < text.size() && text[i + 1] == '\n') {
                end_row();
                ++line;
                ++i;
            } else {
                field.push_back(c);
            }
            break;
        case '\n':
            end_row();
            ++line;
            break;
        default:
            if (field_was_quoted) {
                throw MalformedCsv("line " + std::to_string(line) +
                                   ": data after closing quote");
            }
            field.push_back(c);
        }
    }
    if (in_quotes) {
        throw MalformedCsv("unterminated quoted field");
    }
    // Final row without trailing newline.
    if (!field.empty() || field_was_quoted || !row.empty()) {
        end_row();
    }
    return rows;
}

std::string csv_escape(const std::string& value) {
    bool needs_quotes = value.find_first_of(",\"\r\n") != std::string::npos;
    if (!needs_quotes) return value;
    std::string out = "\"";
    for (char c : value) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

} // namespace

const std::string* EntityRecord::attribute(std::string_view name) const {
    for (const auto& [n, v] : attributes) {
        if (n == name) return &v;
    }
    return nullptr;
}

const EntityRecord* EntityTable::find(std::string_view id) const {
    for (const auto& r : records) {
        if (r.id == id) return &r;
    }
    return nullptr;
}

std::unordered_map<std::string, const EntityRecord*> build_id_map(const EntityTable& table) {
    std::unordered_map<std::string, const EntityRecord*> map;
    map.reserve(table.records.size());
    for (const auto& r : table.records) {
        map.emplace(r.id, &r);
    }
    return map;
}

EntityTable parse_table(std::string_view csv_text, const std::string& table_name) {
    // Strip a UTF-8 BOM; everything else is kept verbatim.
    if (csv_text.starts_with("\xef\xbb\xbf")) {
        csv_text.remove_prefix(3);
    }

    auto rows = split_csv(csv_text);
    if (rows.empty()) {
        throw EmptyTable("table '" + table_name + "' has no header row");
    }

    const auto& header = rows.front();
    std::unordered_set<std::string> seen_names;
    for (const auto& name : header) {
        if (!seen_names.insert(name).second) {
            throw MalformedCsv("duplicate column name '" + name + "'");
        }
    }

    std::size_t id_col = header.size();
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "id") {
            id_col = i;
            break;
        }
    }

    EntityTable table;
    table.name = table_name;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (i != id_col) table.schema.push_back(header[i]);
    }

    if (rows.size() == 1) {
        throw EmptyTable("table '" + table_name + "' has no data rows");
    }

    std::unordered_set<std::string> seen_ids;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw MalformedCsv("row " + std::to_string(r) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(row.size()));
        }
        EntityRecord rec;
        if (id_col < header.size()) {
            rec.id = row[id_col];
            if (rec.id.empty()) {
                throw MalformedCsv("row " + std::to_string(r) + ": empty id");
            }
        } else {
            rec.id = std::to_string(r);
        }
        if (!seen_ids.insert(rec.id).second) {
            throw MalformedCsv("duplicate id '" + rec.id + "'");
        }
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (i != id_col) rec.attributes.emplace_back(header[i], row[i]);
        }
        table.records.push_back(std::move(rec));
    }
    return table;
}

EntityTable load_table(const std::filesystem::path& path, const std::string& table_name) {
    return parse_table(util::read_file(path), table_name);
}

std::string table_to_csv(const EntityTable& table) {
    std::string out = "id";
    for (const auto& col : table.schema) {
        out += ',';
        out += csv_escape(col);
    }
    out += '\n';
    for (const auto& rec : table.records) {
        out += csv_escape(rec.id);
        for (const auto& [name, value] : rec.attributes) {
            out += ',';
            out += csv_escape(value);
        }
        out += '\n';
    }
    return out;
}

} // namespace relmatch::core
