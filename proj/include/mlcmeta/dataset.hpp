#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mlcmeta/error.hpp"

namespace mlcmeta::core {

enum class FeatureType { numeric, nominal };

enum class DatasetRole { train, test, full };

inline const char* to_string(DatasetRole r) {
    switch (r) {
    case DatasetRole::train: return "train";
    case DatasetRole::test: return "test";
    default: return "full";
    }
}

// One multi-label data set: an N x d feature matrix of mixed numeric/nominal
// columns and an N x L binary label matrix. Values are immutable after
// construction; all operations on the type are pure.
//
// Feature cells are stored as doubles: numeric columns hold the value itself,
// nominal columns hold the category code (an index into `categories[j]`), and
// missing entries hold NaN. Labels are complete by contract: meta features on
// the label space assume full observation.
struct MlcDataset {
    std::string name;
    DatasetRole role = DatasetRole::full;
    std::size_t n = 0; // instances
    std::size_t d = 0; // features
    std::size_t l = 0; // labels

    std::vector<double> features;                     // n*d, row-major; NaN = missing
    std::vector<FeatureType> feature_types;           // d
    std::vector<std::vector<std::string>> categories; // d; empty for numeric columns
    std::vector<std::uint8_t> labels;                 // n*l, each 0 or 1
    std::vector<std::string> feature_names;           // d
    std::vector<std::string> label_names;             // l

    static double missing() { return std::numeric_limits<double>::quiet_NaN(); }

    double feature(std::size_t i, std::size_t j) const { return features[i * d + j]; }
    bool feature_missing(std::size_t i, std::size_t j) const { return std::isnan(feature(i, j)); }
    std::uint8_t label(std::size_t i, std::size_t j) const { return labels[i * l + j]; }

    // Decoded value of a nominal cell; empty for missing.
    std::string nominal_value(std::size_t i, std::size_t j) const {
        if (feature_missing(i, j)) return {};
        return categories[j][static_cast<std::size_t>(feature(i, j))];
    }

    // Checks structural invariants; throws schema_error on violation.
    void validate() const {
        if (n < 1) throw schema_error("dataset must have at least one instance");
        if (d < 1) throw schema_error("dataset must have at least one feature");
        if (l < 2) throw schema_error("dataset must have more than one label");
        if (features.size() != n * d || labels.size() != n * l ||
            feature_types.size() != d || categories.size() != d ||
            feature_names.size() != d || label_names.size() != l)
            throw schema_error("dataset field sizes are inconsistent");
        for (std::uint8_t v : labels)
            if (v != 0 && v != 1) throw schema_error("label matrix entries must be 0 or 1");
        for (std::size_t j = 0; j < d; ++j) {
            if (feature_types[j] == FeatureType::numeric) {
                if (!categories[j].empty())
                    throw schema_error("numeric column carries categories: " + feature_names[j]);
            } else {
                for (std::size_t i = 0; i < n; ++i) {
                    if (feature_missing(i, j)) continue;
                    const double v = feature(i, j);
                    if (v < 0 || v != std::floor(v) ||
                        static_cast<std::size_t>(v) >= categories[j].size())
                        throw schema_error("nominal code out of range in column " + feature_names[j]);
                }
            }
        }
    }
};

// Counts of each distinct labelset, keyed by the label row itself. std::map
// gives a deterministic (lexicographic) iteration order.
inline std::map<std::vector<std::uint8_t>, std::size_t>
labelset_counts(const MlcDataset& ds) {
    std::map<std::vector<std::uint8_t>, std::size_t> counts;
    std::vector<std::uint8_t> row(ds.l);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < ds.l; ++j) row[j] = ds.label(i, j);
        ++counts[row];
    }
    return counts;
}

inline std::size_t count_distinct_labelsets(const MlcDataset& ds) {
    return labelset_counts(ds).size();
}

// Per-part label-space summary (the Table-1 style statistics).
struct PartSummary {
    std::string part; // "train" / "test" / "full"
    std::size_t n_instances = 0;
    double cardinality = 0.0;
    double density = 0.0;
    std::size_t n_distinct_labelsets = 0;
};

struct DatasetSummary {
    std::size_t n_train = 0;
    std::size_t n_test = 0;
    std::size_t n_features = 0;
    std::size_t n_labels = 0;
    std::vector<PartSummary> parts;
};

inline PartSummary summarize_part(const MlcDataset& ds, const std::string& part_name) {
    PartSummary s;
    s.part = part_name;
    s.n_instances = ds.n;
    std::size_t positives = 0;
    for (std::uint8_t v : ds.labels) positives += v;
    s.cardinality = static_cast<double>(positives) / static_cast<double>(ds.n);
    s.density = s.cardinality / static_cast<double>(ds.l);
    s.n_distinct_labelsets = count_distinct_labelsets(ds);
    return s;
}

// Train/test parts must share the full feature and label schema.
inline void check_same_schema(const MlcDataset& a, const MlcDataset& b) {
    if (a.d != b.d || a.l != b.l)
        throw schema_error("train/test schema mismatch: dimensions differ");
    if (a.feature_types != b.feature_types)
        throw schema_error("train/test schema mismatch: column types differ");
    if (a.feature_names != b.feature_names || a.label_names != b.label_names)
        throw schema_error("train/test schema mismatch: column names differ");
}

inline DatasetSummary dataset_summary(const MlcDataset& train,
                                      const MlcDataset* test = nullptr) {
    train.validate();
    DatasetSummary s;
    s.n_train = train.n;
    s.n_features = train.d;
    s.n_labels = train.l;
    s.parts.push_back(summarize_part(train, "train"));
    if (test) {
        test->validate();
        check_same_schema(train, *test);
        s.n_test = test->n;
        s.parts.push_back(summarize_part(*test, "test"));
    }
    return s;
}

// Value-level equality: numeric cells compare exactly (NaN equals NaN as
// "missing"), nominal cells compare by decoded category string so that two
// datasets with different code assignments for the same data are equal.
inline bool same_data(const MlcDataset& a, const MlcDataset& b) {
    if (a.n != b.n || a.d != b.d || a.l != b.l) return false;
    if (a.feature_types != b.feature_types) return false;
    if (a.feature_names != b.feature_names || a.label_names != b.label_names) return false;
    if (a.labels != b.labels) return false;
    for (std::size_t i = 0; i < a.n; ++i) {
        for (std::size_t j = 0; j < a.d; ++j) {
            const bool ma = a.feature_missing(i, j), mb = b.feature_missing(i, j);
            if (ma != mb) return false;
            if (ma) continue;
            if (a.feature_types[j] == FeatureType::numeric) {
                if (a.feature(i, j) != b.feature(i, j)) return false;
            } else {
                if (a.nominal_value(i, j) != b.nominal_value(i, j)) return false;
            }
        }
    }
    return true;
}

} // namespace mlcmeta::core
