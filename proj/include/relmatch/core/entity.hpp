#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace relmatch::core {

/// One row of a table: a stable id plus attribute/value pairs in schema order.
struct EntityRecord {
    std::string id;
    std::vector<std::pair<std::string, std::string>> attributes;

    const std::string* attribute(std::string_view name) const;

    bool operator==(const EntityRecord&) const = default;
};

struct EntityTable {
    std::string name;
    std::vector<std::string> schema;
    std::vector<EntityRecord> records;

    /// Linear lookup; build an id map for hot paths.
    const EntityRecord* find(std::string_view id) const;

    bool operator==(const EntityTable&) const = default;
};

/// Id -> record map for repeated lookups over one table.
std::unordered_map<std::string, const EntityRecord*> build_id_map(const EntityTable& table);

/// Loads a UTF-8 CSV file with a header row. A column named `id` supplies
/// record ids; without one, ids are 1-based row ordinals. The `id` column is
/// excluded from the schema. Values are kept verbatim apart from stripping a
/// leading BOM from the file.
///
/// Throws MalformedCsv on arity mismatches, duplicate or empty ids, duplicate
/// header names, or broken quoting; EmptyTable when there are no data rows.
EntityTable load_table(const std::filesystem::path& path, const std::string& table_name);

/// Same parser over an in-memory buffer.
EntityTable parse_table(std::string_view csv_text, const std::string& table_name);

/// RFC-4180 serialization, header row first. Inverse of parse_table for
/// tables with an `id` column.
std::string table_to_csv(const EntityTable& table);

} // namespace relmatch::core
