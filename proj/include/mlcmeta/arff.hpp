#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "mlcmeta/dataset.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::core {

// Which attributes of an ARFF file are labels: an explicit name list (MULAN
// XML convention) or "the last k attributes".
struct LabelSpec {
    std::variant<std::size_t, std::vector<std::string>> spec;

    static LabelSpec last_k(std::size_t k) { return LabelSpec{k}; }
    static LabelSpec names(std::vector<std::string> ns) { return LabelSpec{std::move(ns)}; }
    static LabelSpec from_xml_file(const std::string& path);
};

namespace detail {

inline std::string xml_decode(std::string s) {
    const std::pair<const char*, const char*> ents[] = {
        {"&amp;", "&"}, {"&lt;", "<"}, {"&gt;", ">"}, {"&quot;", "\""}, {"&apos;", "'"}};
    for (auto [ent, ch] : ents) {
        size_t pos = 0;
        while ((pos = s.find(ent, pos)) != std::string::npos) {
            s.replace(pos, std::strlen(ent), ch);
            pos += 1;
        }
    }
    return s;
}

// Extracts the name="..." attributes of <label .../> elements. MULAN label
// files are flat, so a full XML parser is not needed.
inline std::vector<std::string> parse_mulan_xml(std::istream& in) {
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::vector<std::string> names;
    size_t pos = 0;
    while ((pos = text.find("<label", pos)) != std::string::npos) {
        // skip other elements sharing the prefix, e.g. <labels>
        const char next = pos + 6 < text.size() ? text[pos + 6] : '\0';
        if (next != ' ' && next != '\t' && next != '\n' && next != '\r' && next != '/' &&
            next != '>') {
            pos += 6;
            continue;
        }
        const size_t close = text.find('>', pos);
        if (close == std::string::npos)
            throw parse_error("unterminated <label> element in label XML");
        const std::string elem = text.substr(pos, close - pos);
        const size_t name_at = elem.find("name");
        if (name_at == std::string::npos)
            throw parse_error("<label> element without name attribute in label XML");
        size_t q = elem.find_first_of("\"'", name_at);
        if (q == std::string::npos)
            throw parse_error("malformed name attribute in label XML");
        const char quote = elem[q];
        const size_t q2 = elem.find(quote, q + 1);
        if (q2 == std::string::npos)
            throw parse_error("malformed name attribute in label XML");
        names.push_back(xml_decode(elem.substr(q + 1, q2 - q - 1)));
        pos = close + 1;
    }
    if (names.empty()) throw parse_error("label XML declares no labels");
    return names;
}

// Splits a comma-separated ARFF list (data row or nominal domain), honouring
// single/double quotes and trimming unquoted whitespace.
inline std::vector<std::string> split_arff_list(std::string_view s, long line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted_token = false;
    size_t i = 0;
    auto flush = [&] {
        if (!quoted_token) cur = std::string(trim(cur));
        out.push_back(cur);
        cur.clear();
        quoted_token = false;
    };
    while (i < s.size()) {
        const char c = s[i];
        if (c == '\'' || c == '"') {
            if (trim(cur).empty()) cur.clear(); // padding before the quote
            const char q = c;
            ++i;
            while (i < s.size() && s[i] != q) {
                if (s[i] == '\\' && i + 1 < s.size()) ++i; // ARFF backslash escape
                cur.push_back(s[i]);
                ++i;
            }
            if (i >= s.size()) throw parse_error("unterminated quote", line);
            ++i;
            while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i; // padding after
            quoted_token = true;
        } else if (c == ',') {
            flush();
            ++i;
        } else {
            cur.push_back(c);
            ++i;
        }
    }
    flush();
    return out;
}

struct ArffAttribute {
    std::string name;
    FeatureType type = FeatureType::numeric;
    std::vector<std::string> domain; // nominal categories, declaration order
};

// Parses "@attribute <name> <type>"; `rest` is everything after the keyword.
inline ArffAttribute parse_attribute_decl(std::string_view rest, long line) {
    ArffAttribute attr;
    size_t i = 0;
    while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
    if (i >= rest.size()) throw parse_error("@attribute without a name", line);
    if (rest[i] == '\'' || rest[i] == '"') {
        const char q = rest[i];
        ++i;
        while (i < rest.size() && rest[i] != q) {
            if (rest[i] == '\\' && i + 1 < rest.size()) ++i;
            attr.name.push_back(rest[i]);
            ++i;
        }
        if (i >= rest.size()) throw parse_error("unterminated attribute name quote", line);
        ++i;
    } else {
        while (i < rest.size() && !std::isspace(static_cast<unsigned char>(rest[i])))
            attr.name.push_back(rest[i++]);
    }
    std::string_view type_part = trim(rest.substr(i));
    if (type_part.empty()) throw parse_error("@attribute without a type", line);
    if (type_part.front() == '{') {
        if (type_part.back() != '}')
            throw parse_error("unterminated nominal domain", line);
        attr.type = FeatureType::nominal;
        attr.domain = split_arff_list(type_part.substr(1, type_part.size() - 2), line);
        if (attr.domain.empty())
            throw parse_error("empty nominal domain", line);
        std::set<std::string> uniq(attr.domain.begin(), attr.domain.end());
        if (uniq.size() != attr.domain.size())
            throw parse_error("duplicate category in nominal domain", line);
    } else {
        const std::string tl = to_lower(type_part.substr(0, type_part.find_first_of(" \t")));
        if (tl == "numeric" || tl == "real" || tl == "integer") {
            attr.type = FeatureType::numeric;
        } else if (tl == "string" || tl == "date" || tl == "relational") {
            throw schema_error("unsupported ARFF attribute type '" + tl +
                               "' for attribute " + attr.name);
        } else {
            throw parse_error("unknown attribute type: " + std::string(type_part), line);
        }
    }
    return attr;
}

inline bool is_binary_domain(const std::vector<std::string>& domain) {
    if (domain.size() > 2) return false;
    for (const auto& v : domain)
        if (v != "0" && v != "1") return false;
    return true;
}

} // namespace detail

inline LabelSpec LabelSpec::from_xml_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open label XML: " + path);
    return names(detail::parse_mulan_xml(in));
}

// Parses a MULAN-style data set: a dense or sparse ARFF file plus a label
// spec naming which attributes are labels. Label attributes must be binary
// ({0,1} numeric or nominal); they are binarized into the label matrix.
// Feature/label order follows the ARFF attribute declaration order.
inline MlcDataset parse_mulan(std::istream& in, const std::string& dataset_name,
                              const LabelSpec& label_spec,
                              DatasetRole role = DatasetRole::full) {
    using namespace detail;

    std::vector<ArffAttribute> attrs;
    std::string relation = dataset_name;
    std::string line_str;
    long line_no = 0;
    bool in_data = false;

    // cells in declaration order; per-row raw values (missing = NaN, nominal = code)
    std::vector<std::vector<double>> raw_rows;

    while (std::getline(in, line_str)) {
        ++line_no;
        if (!line_str.empty() && line_str.back() == '\r') line_str.pop_back();
        std::string_view sv = trim(line_str);
        if (sv.empty() || sv.front() == '%') continue;
        if (!in_data && sv.front() == '@') {
            const size_t sp = sv.find_first_of(" \t");
            const std::string keyword = to_lower(sv.substr(0, sp));
            std::string_view rest = sp == std::string_view::npos ? std::string_view{} : trim(sv.substr(sp));
            if (keyword == "@relation") {
                if (!rest.empty()) relation = std::string(rest);
            } else if (keyword == "@attribute") {
                attrs.push_back(parse_attribute_decl(rest, line_no));
            } else if (keyword == "@data") {
                in_data = true;
            } else {
                throw parse_error("unknown ARFF declaration: " + keyword, line_no);
            }
            continue;
        }
        if (!in_data)
            throw parse_error("data before @data section", line_no);
        if (attrs.empty())
            throw parse_error("@data without attribute declarations", line_no);

        std::vector<double> row(attrs.size(), 0.0);
        if (sv.front() == '{') {
            // sparse row: omitted attributes take value 0 (numeric) /
            // the first declared category (nominal)
            if (sv.back() != '}')
                throw parse_error("unterminated sparse instance", line_no);
            const auto entries = split_arff_list(sv.substr(1, sv.size() - 2), line_no);
            for (const auto& entry : entries) {
                if (entry.empty()) continue; // "{}" : all defaults
                const size_t sp2 = entry.find_first_of(" \t");
                if (sp2 == std::string::npos)
                    throw parse_error("sparse entry without value: " + entry, line_no);
                const auto idx = parse_int(entry.substr(0, sp2));
                if (!idx || *idx < 0 || static_cast<size_t>(*idx) >= attrs.size())
                    throw parse_error("sparse index out of range: " + entry, line_no);
                const std::string value = std::string(trim(std::string_view(entry).substr(sp2)));
                const auto& attr = attrs[static_cast<size_t>(*idx)];
                if (value == "?") {
                    row[static_cast<size_t>(*idx)] = MlcDataset::missing();
                } else if (attr.type == FeatureType::numeric) {
                    const auto v = parse_double(value);
                    if (!v) throw parse_error("bad numeric value '" + value + "'", line_no);
                    row[static_cast<size_t>(*idx)] = *v;
                } else {
                    const auto it = std::find(attr.domain.begin(), attr.domain.end(), value);
                    if (it == attr.domain.end())
                        throw parse_error("value '" + value + "' not in domain of " + attr.name,
                                          line_no);
                    row[static_cast<size_t>(*idx)] =
                        static_cast<double>(it - attr.domain.begin());
                }
            }
        } else {
            const auto values = split_arff_list(sv, line_no);
            if (values.size() != attrs.size())
                throw parse_error("instance has " + std::to_string(values.size()) +
                                  " values, expected " + std::to_string(attrs.size()),
                                  line_no);
            for (size_t j = 0; j < attrs.size(); ++j) {
                const std::string& value = values[j];
                if (value == "?") {
                    row[j] = MlcDataset::missing();
                } else if (attrs[j].type == FeatureType::numeric) {
                    const auto v = parse_double(value);
                    if (!v)
                        throw parse_error("bad numeric value '" + value + "' for attribute " +
                                          attrs[j].name, line_no);
                    row[j] = *v;
                } else {
                    const auto it = std::find(attrs[j].domain.begin(), attrs[j].domain.end(), value);
                    if (it == attrs[j].domain.end())
                        throw parse_error("value '" + value + "' not in domain of " +
                                          attrs[j].name, line_no);
                    row[j] = static_cast<double>(it - attrs[j].domain.begin());
                }
            }
        }
        raw_rows.push_back(std::move(row));
    }

    if (!in_data) throw parse_error("missing @data section");
    if (raw_rows.empty()) throw parse_error("no instances in @data section");

    // resolve which attributes are labels
    std::vector<bool> is_label(attrs.size(), false);
    if (std::holds_alternative<std::size_t>(label_spec.spec)) {
        const std::size_t k = std::get<std::size_t>(label_spec.spec);
        if (k < 2 || k > attrs.size() - 1)
            throw schema_error("label count must leave at least one feature and at least two labels");
        for (size_t j = attrs.size() - k; j < attrs.size(); ++j) is_label[j] = true;
    } else {
        const auto& names = std::get<std::vector<std::string>>(label_spec.spec);
        for (const auto& name : names) {
            bool found = false;
            for (size_t j = 0; j < attrs.size(); ++j) {
                if (attrs[j].name == name) {
                    is_label[j] = true;
                    found = true;
                    break;
                }
            }
            if (!found)
                throw schema_error("label '" + name + "' from label spec not present in ARFF");
        }
    }

    MlcDataset ds;
    ds.name = dataset_name.empty() ? relation : dataset_name;
    ds.role = role;
    ds.n = raw_rows.size();
    for (size_t j = 0; j < attrs.size(); ++j) {
        if (is_label[j]) {
            if (attrs[j].type == FeatureType::nominal && !is_binary_domain(attrs[j].domain))
                throw schema_error("label attribute " + attrs[j].name +
                                   " has a non-binary domain");
            ds.label_names.push_back(attrs[j].name);
        } else {
            ds.feature_names.push_back(attrs[j].name);
            ds.feature_types.push_back(attrs[j].type);
            ds.categories.push_back(attrs[j].domain);
        }
    }
    ds.d = ds.feature_names.size();
    ds.l = ds.label_names.size();
    if (ds.l < 2) throw schema_error("a multi-label dataset needs more than one label");
    if (ds.d < 1) throw schema_error("dataset has no feature attributes");

    ds.features.reserve(ds.n * ds.d);
    ds.labels.reserve(ds.n * ds.l);
    for (size_t i = 0; i < ds.n; ++i) {
        for (size_t j = 0; j < attrs.size(); ++j) {
            const double v = raw_rows[i][j];
            if (is_label[j]) {
                if (std::isnan(v))
                    throw schema_error("missing label value in instance " + std::to_string(i + 1));
                double decoded = v;
                if (attrs[j].type == FeatureType::nominal)
                    decoded = attrs[j].domain[static_cast<size_t>(v)] == "1" ? 1.0 : 0.0;
                if (decoded != 0.0 && decoded != 1.0)
                    throw schema_error("label attribute " + attrs[j].name +
                                       " has non-binary value in instance " + std::to_string(i + 1));
                ds.labels.push_back(static_cast<std::uint8_t>(decoded));
            } else {
                ds.features.push_back(v);
            }
        }
    }
    ds.validate();
    return ds;
}

inline MlcDataset parse_mulan_file(const std::string& arff_path, const LabelSpec& label_spec,
                                   DatasetRole role = DatasetRole::full,
                                   std::string dataset_name = {}) {
    std::ifstream in(arff_path, std::ios::binary);
    if (!in) throw parse_error("cannot open ARFF file: " + arff_path);
    if (dataset_name.empty()) {
        dataset_name = arff_path;
        if (const auto slash = dataset_name.find_last_of("/\\"); slash != std::string::npos)
            dataset_name = dataset_name.substr(slash + 1);
        if (const auto dot = dataset_name.rfind(".arff"); dot != std::string::npos)
            dataset_name = dataset_name.substr(0, dot);
    }
    return parse_mulan(in, dataset_name, label_spec, role);
}

} // namespace mlcmeta::core
