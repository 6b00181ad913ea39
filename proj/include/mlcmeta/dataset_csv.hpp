#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "mlcmeta/csv.hpp"
#include "mlcmeta/dataset.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::core {

using TypeHints = std::map<std::string, FeatureType>;

// Parses an MLC dataset from CSV: header row required, comma separator, "?"
// (or an empty field) as the missing marker. Label columns are named; their
// values must be exactly "0" or "1" and complete. Feature columns without a
// type hint are numeric iff every non-missing value parses as a number,
// nominal otherwise. Nominal codes follow first-appearance order, so a
// write/parse round trip reproduces codes exactly.
inline MlcDataset parse_csv(std::istream& in, const std::string& dataset_name,
                            const std::vector<std::string>& label_columns,
                            const TypeHints& hints = {},
                            DatasetRole role = DatasetRole::full) {
    const CsvTable table = read_csv_table(in);
    if (table.rows.empty()) throw parse_error("no data rows in CSV dataset");

    std::set<std::string> header_seen;
    for (const auto& h : table.header)
        if (!header_seen.insert(h).second)
            throw schema_error("duplicate column name in CSV header: " + h);

    std::set<std::string> label_set(label_columns.begin(), label_columns.end());
    if (label_set.size() < 2) throw schema_error("need at least two label columns");
    for (const auto& name : label_columns)
        if (!table.find(name))
            throw schema_error("label column '" + name + "' not present in CSV header");

    std::vector<size_t> feature_cols, label_cols;
    for (size_t j = 0; j < table.header.size(); ++j) {
        if (label_set.count(table.header[j])) label_cols.push_back(j);
        else feature_cols.push_back(j);
    }
    if (feature_cols.empty()) throw schema_error("CSV dataset has no feature columns");

    auto is_missing = [](const std::string& v) { return v.empty() || v == "?"; };

    MlcDataset ds;
    ds.name = dataset_name;
    ds.role = role;
    ds.n = table.rows.size();
    ds.d = feature_cols.size();
    ds.l = label_cols.size();
    for (size_t j : feature_cols) ds.feature_names.push_back(table.header[j]);
    for (size_t j : label_cols) ds.label_names.push_back(table.header[j]);

    // column types: hint wins, otherwise inferred
    ds.feature_types.resize(ds.d, FeatureType::numeric);
    for (size_t f = 0; f < ds.d; ++f) {
        const auto hint = hints.find(ds.feature_names[f]);
        if (hint != hints.end()) {
            ds.feature_types[f] = hint->second;
            continue;
        }
        for (const auto& row : table.rows) {
            const std::string& v = row.fields[feature_cols[f]];
            if (is_missing(v)) continue;
            if (!parse_double(v)) {
                ds.feature_types[f] = FeatureType::nominal;
                break;
            }
        }
    }

    ds.categories.resize(ds.d);
    std::vector<std::map<std::string, size_t>> code_of(ds.d);
    ds.features.reserve(ds.n * ds.d);
    ds.labels.reserve(ds.n * ds.l);

    for (const auto& row : table.rows) {
        for (size_t f = 0; f < ds.d; ++f) {
            const std::string& v = row.fields[feature_cols[f]];
            if (is_missing(v)) {
                ds.features.push_back(MlcDataset::missing());
            } else if (ds.feature_types[f] == FeatureType::numeric) {
                const auto x = parse_double(v);
                if (!x)
                    throw schema_error("column '" + ds.feature_names[f] +
                                       "' hinted numeric but holds '" + v + "'");
                ds.features.push_back(*x);
            } else {
                auto [it, inserted] = code_of[f].try_emplace(v, ds.categories[f].size());
                if (inserted) ds.categories[f].push_back(v);
                ds.features.push_back(static_cast<double>(it->second));
            }
        }
        for (size_t c : label_cols) {
            const std::string& v = row.fields[c];
            if (v == "0") ds.labels.push_back(0);
            else if (v == "1") ds.labels.push_back(1);
            else
                throw schema_error("label column '" + table.header[c] +
                                   "' has value '" + v + "' outside {0,1} (line " +
                                   std::to_string(row.line) + ")");
        }
    }
    ds.validate();
    return ds;
}

inline MlcDataset parse_csv_file(const std::string& path,
                                 const std::vector<std::string>& label_columns,
                                 const TypeHints& hints = {},
                                 DatasetRole role = DatasetRole::full,
                                 std::string dataset_name = {}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open CSV file: " + path);
    if (dataset_name.empty()) {
        dataset_name = path;
        if (const auto slash = dataset_name.find_last_of("/\\"); slash != std::string::npos)
            dataset_name = dataset_name.substr(slash + 1);
        if (const auto dot = dataset_name.rfind(".csv"); dot != std::string::npos)
            dataset_name = dataset_name.substr(0, dot);
    }
    return parse_csv(in, dataset_name, label_columns, hints, role);
}

// Writes the dataset back to CSV: features first, then labels, missing as "?",
// nominal cells as their category strings.
inline void write_csv(std::ostream& out, const MlcDataset& ds) {
    std::vector<std::string> header = ds.feature_names;
    header.insert(header.end(), ds.label_names.begin(), ds.label_names.end());
    write_csv_row(out, header);
    std::vector<std::string> row(ds.d + ds.l);
    for (size_t i = 0; i < ds.n; ++i) {
        for (size_t j = 0; j < ds.d; ++j) {
            if (ds.feature_missing(i, j)) row[j] = "?";
            else if (ds.feature_types[j] == FeatureType::numeric) row[j] = format_double(ds.feature(i, j));
            else row[j] = ds.nominal_value(i, j);
        }
        for (size_t j = 0; j < ds.l; ++j) row[ds.d + j] = ds.label(i, j) ? "1" : "0";
        write_csv_row(out, row);
    }
}

// Type hints matching a dataset's own columns, for exact re-parsing.
inline TypeHints type_hints_of(const MlcDataset& ds) {
    TypeHints h;
    for (size_t j = 0; j < ds.d; ++j) h.emplace(ds.feature_names[j], ds.feature_types[j]);
    return h;
}

} // namespace mlcmeta::core
