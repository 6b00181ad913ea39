#pragma once

#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mlcmeta/error.hpp"

namespace mlcmeta {

// Minimal RFC-4180-style CSV: comma separator, double-quote quoting with ""
// escapes, embedded newlines allowed inside quoted fields. Lines whose first
// character is '#' (outside quotes, at record start) are comments; mlcmeta
// artifacts use them to embed provenance. Blank lines are skipped.

struct CsvRecord {
    std::vector<std::string> fields;
    long line = 0; // 1-based line where the record starts
};

inline std::vector<CsvRecord> read_csv_records(std::istream& in) {
    std::vector<CsvRecord> records;
    std::string field;
    CsvRecord current;
    bool in_quotes = false;
    bool record_started = false;
    bool comment = false;
    long line = 1;
    current.line = 1;

    auto end_field = [&] {
        current.fields.push_back(field);
        field.clear();
    };
    auto end_record = [&] {
        if (record_started) {
            end_field();
            records.push_back(std::move(current));
        }
        current = CsvRecord{};
        record_started = false;
        comment = false;
        current.line = line;
    };

    char c;
    char prev = '\0';
    while (in.get(c)) {
        if (c == '\r') { prev = c; continue; } // normalize CRLF and lone CR
        if (prev == '\r' && c != '\n' && !in_quotes) {
            ++line;
            end_record();
            current.line = line;
        }
        prev = c;
        if (comment) {
            if (c == '\n') { ++line; comment = false; current.line = line; }
            continue;
        }
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') { in.get(); field.push_back('"'); }
                else in_quotes = false;
            } else {
                if (c == '\n') ++line;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
        case '#':
            if (!record_started && field.empty() && current.fields.empty()) { comment = true; }
            else { field.push_back(c); record_started = true; }
            break;
        case '"':
            in_quotes = true;
            record_started = true;
            break;
        case ',':
            end_field();
            record_started = true;
            break;
        case '\n':
            ++line;
            end_record();
            break;
        default:
            field.push_back(c);
            record_started = true;
        }
    }
    if (in_quotes) throw parse_error("unterminated quoted field", current.line);
    end_record(); // flush a final record with no trailing newline
    return records;
}

inline std::vector<CsvRecord> read_csv_records_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    return read_csv_records(in);
}

inline std::string csv_escape(const std::string& s) {
    bool needs_quotes = s.empty();
    for (char c : s) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') { needs_quotes = true; break; }
    }
    if (!needs_quotes && s.front() == '#') needs_quotes = true;
    if (!needs_quotes) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out.push_back(c);
    }
    out += "\"";
    return out;
}

inline void write_csv_row(std::ostream& out, const std::vector<std::string>& fields) {
    for (size_t i = 0; i < fields.size(); ++i) {
        if (i) out << ',';
        out << csv_escape(fields[i]);
    }
    out << '\n';
}

// Header + rows convenience wrapper used by the table-shaped artifacts.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<CsvRecord> rows;

    std::optional<size_t> find(const std::string& name) const {
        for (size_t i = 0; i < header.size(); ++i)
            if (header[i] == name) return i;
        return std::nullopt;
    }
    size_t require(const std::string& name) const {
        if (auto i = find(name)) return *i;
        throw schema_error("missing required column: " + name);
    }
};

inline CsvTable read_csv_table(std::istream& in) {
    auto records = read_csv_records(in);
    if (records.empty()) throw parse_error("empty CSV input: no header row");
    CsvTable t;
    t.header = std::move(records.front().fields);
    records.erase(records.begin());
    for (auto& r : records) {
        if (r.fields.size() != t.header.size())
            throw parse_error("row has " + std::to_string(r.fields.size()) +
                              " fields, header has " + std::to_string(t.header.size()),
                              r.line);
        t.rows.push_back(std::move(r));
    }
    return t;
}

inline CsvTable read_csv_table_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open file: " + path);
    return read_csv_table(in);
}

} // namespace mlcmeta
