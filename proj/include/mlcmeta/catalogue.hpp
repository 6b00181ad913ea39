#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mlcmeta/error.hpp"
#include "mlcmeta/text.hpp"
#include "mlcmeta/version.hpp"

namespace mlcmeta::meta {

// One catalogued meta feature. `provenance` is "taxonomy" for identifiers
// whose code, name and definition are fixed by the published MLC meta-feature
// taxonomy, and "catalogue" for the slots this catalogue fills from the
// standard meta-feature literature.
struct CatalogueEntry {
    std::string id;     // hierarchical code, e.g. "L.RL.3"
    std::string group;  // taxonomy group: D, A.SF, A.IT, L.DL.G, L.DL.I.A, L.DL.I.E, L.RL
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::string provenance; // "taxonomy" | "catalogue"
    std::string name;       // human-readable name
};

class FeatureCatalogue {
public:
    std::string version;
    std::vector<CatalogueEntry> entries;

    std::optional<std::size_t> find(const std::string& id) const {
        for (std::size_t i = 0; i < entries.size(); ++i)
            if (entries[i].id == id) return i;
        return std::nullopt;
    }

    void validate() const {
        std::set<std::string> ids;
        for (const auto& e : entries)
            if (!ids.insert(e.id).second)
                throw schema_error("duplicate feature id in catalogue: " + e.id);
        for (const char* g : {"D", "A.SF", "A.IT", "L.DL.G", "L.DL.I.A", "L.DL.I.E", "L.RL"}) {
            bool found = false;
            for (const auto& e : entries)
                if (e.group == g) { found = true; break; }
            if (!found) throw schema_error(std::string("catalogue group is empty: ") + g);
        }
    }

    static FeatureCatalogue defaults();
    static FeatureCatalogue parse(std::istream& in);
    static FeatureCatalogue parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw parse_error("cannot open catalogue file: " + path);
        return parse(in);
    }
    void write(std::ostream& out) const;
};

namespace detail {

inline std::string format_range(double lo, double hi) {
    auto fmt = [](double v) {
        if (std::isinf(v)) return std::string(v < 0 ? "-inf" : "inf");
        return format_double(v);
    };
    return "[" + fmt(lo) + "," + fmt(hi) + "]";
}

inline std::pair<double, double> parse_range(const std::string& s, long line) {
    if (s.size() < 5 || s.front() != '[' || s.back() != ']')
        throw parse_error("bad range syntax: " + s, line);
    const auto parts = split(std::string_view(s).substr(1, s.size() - 2), ',');
    if (parts.size() != 2) throw parse_error("bad range syntax: " + s, line);
    auto one = [&](const std::string& t) -> double {
        const auto tv = trim(t);
        if (tv == "inf") return std::numeric_limits<double>::infinity();
        if (tv == "-inf") return -std::numeric_limits<double>::infinity();
        const auto v = parse_double(tv);
        if (!v) throw parse_error("bad range bound: " + t, line);
        return *v;
    };
    return {one(parts[0]), one(parts[1])};
}

} // namespace detail

// Catalogue file: a version line, then one '|'-separated line per feature:
//   id|group|range|provenance|name
inline FeatureCatalogue FeatureCatalogue::parse(std::istream& in) {
    FeatureCatalogue cat;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        if (sv.rfind("version", 0) == 0 && sv.find('|') == std::string_view::npos) {
            cat.version = std::string(trim(sv.substr(7)));
            continue;
        }
        const auto parts = split(sv, '|');
        if (parts.size() != 5)
            throw parse_error("catalogue line needs id|group|range|provenance|name", line_no);
        CatalogueEntry e;
        e.id = std::string(trim(parts[0]));
        e.group = std::string(trim(parts[1]));
        std::tie(e.lo, e.hi) = detail::parse_range(std::string(trim(parts[2])), line_no);
        e.provenance = std::string(trim(parts[3]));
        e.name = std::string(trim(parts[4]));
        cat.entries.push_back(std::move(e));
    }
    if (cat.version.empty()) throw parse_error("catalogue file has no version line");
    cat.validate();
    return cat;
}

inline void FeatureCatalogue::write(std::ostream& out) const {
    out << "# mlcmeta feature catalogue\n";
    out << "# id|group|range|provenance|name\n";
    out << "version " << version << "\n";
    for (const auto& e : entries)
        out << e.id << '|' << e.group << '|' << detail::format_range(e.lo, e.hi) << '|'
            << e.provenance << '|' << e.name << '\n';
}

inline FeatureCatalogue FeatureCatalogue::defaults() {
    constexpr double inf = std::numeric_limits<double>::infinity();
    FeatureCatalogue cat;
    cat.version = catalogue_version;
    auto add = [&](const char* id, const char* group, double lo, double hi,
                   const char* prov, const char* name) {
        cat.entries.push_back({id, group, lo, hi, prov, name});
    };

    // Dimensionality. D.11-D.14 are intentionally unassigned in v1.
    add("D.1", "D", 1, inf, "taxonomy", "Number of attributes");
    add("D.2", "D", 1, inf, "catalogue", "Number of instances");
    add("D.3", "D", 2, inf, "catalogue", "Number of labels");
    add("D.4", "D", 1, inf, "taxonomy", "Number of distinct labelsets");
    add("D.5", "D", 1, inf, "taxonomy", "Product of labels, instances and attributes (LxIxF)");
    add("D.6", "D", 0, inf, "taxonomy", "Ratio of number of instances to number of attributes");
    add("D.7", "D", 0, inf, "catalogue", "Ratio of number of attributes to number of instances");
    add("D.8", "D", 0, inf, "catalogue", "Ratio of number of instances to number of labels");
    add("D.9", "D", 0, inf, "catalogue", "Ratio of number of labels to number of attributes");
    add("D.10", "D", 0, 1, "catalogue", "Proportion of labelsets occurring exactly once");
    add("D.15", "D", 0, 1, "taxonomy", "Proportion of unique label combination (distinct labelsets per instance)");

    // Statistical attribute features
    add("A.SF.1", "A.SF", 0, inf, "catalogue", "Number of numeric attributes");
    add("A.SF.2", "A.SF", 0, inf, "catalogue", "Number of nominal attributes");
    add("A.SF.3", "A.SF", -inf, inf, "taxonomy", "Mean of skewness of numeric attributes");
    add("A.SF.4", "A.SF", -inf, inf, "taxonomy", "Mean of mean of numeric attributes");
    add("A.SF.5", "A.SF", 0, inf, "catalogue", "Mean of standard deviation of numeric attributes");
    add("A.SF.6", "A.SF", -inf, inf, "catalogue", "Mean of kurtosis of numeric attributes");
    add("A.SF.7", "A.SF", 0, inf, "catalogue", "Ratio of numeric attributes to instances");
    add("A.SF.8", "A.SF", 0, inf, "catalogue", "Ratio of nominal attributes to instances");

    // Information-theoretical attribute features
    add("A.IT.1", "A.IT", 0, inf, "taxonomy", "Mean of entropy of nominal attributes");
    add("A.IT.2", "A.IT", 0, 1, "taxonomy", "Mean gain ratio of nominal attributes over the labels");

    // General label distribution
    add("L.DL.G.1", "L.DL.G", 0, inf, "catalogue", "Cardinality");
    add("L.DL.G.2", "L.DL.G", 0, 1, "taxonomy", "Density");
    add("L.DL.G.3", "L.DL.G", 0, 1, "catalogue", "Mean of entropy of labels");
    add("L.DL.G.4", "L.DL.G", -inf, inf, "catalogue", "Skewness cardinality");
    add("L.DL.G.5", "L.DL.G", 0, 1, "taxonomy", "Maximal entropy of labels");
    add("L.DL.G.6", "L.DL.G", -inf, inf, "taxonomy", "Kurtosis cardinality");
    add("L.DL.G.7", "L.DL.G", 0, 1, "catalogue", "Minimal label frequency");
    add("L.DL.G.8", "L.DL.G", 0, 1, "catalogue", "Mean label frequency");
    add("L.DL.G.9", "L.DL.G", 0, 1, "catalogue", "Maximal label frequency");

    // Intra-class imbalance (per label and per labelset)
    add("L.DL.I.A.1", "L.DL.I.A", 0, inf, "catalogue", "Mean of imbalance ratio intra-class");
    add("L.DL.I.A.2", "L.DL.I.A", 0, inf, "taxonomy", "Maximal imbalance ratio intra-class");
    add("L.DL.I.A.3", "L.DL.I.A", 0, inf, "catalogue", "CV of imbalance ratio intra-class");
    add("L.DL.I.A.4", "L.DL.I.A", 1, inf, "taxonomy", "Mean of imbalance ratio per labelset");
    add("L.DL.I.A.5", "L.DL.I.A", 1, inf, "taxonomy", "Maximal imbalance ratio per labelset");

    // Inter-class imbalance
    add("L.DL.I.E.1", "L.DL.I.E", 0, inf, "taxonomy", "Mean of imbalance ratio inter-class (MeanIR)");
    add("L.DL.I.E.2", "L.DL.I.E", 0, inf, "catalogue", "Maximal imbalance ratio inter-class");
    add("L.DL.I.E.3", "L.DL.I.E", 0, inf, "catalogue", "CV of imbalance ratio inter-class");

    // Label relationships
    add("L.RL.1", "L.RL", 1, inf, "catalogue", "Number of distinct labelsets");
    add("L.RL.2", "L.RL", 0, 1, "catalogue", "Diversity (distinct labelsets over labelset space bound)");
    add("L.RL.3", "L.RL", 0, 1, "taxonomy", "SCUMBLE");
    add("L.RL.4", "L.RL", 0, inf, "catalogue", "CV of SCUMBLE");
    add("L.RL.5", "L.RL", 1, inf, "catalogue", "Mean of examples per distinct labelset");
    add("L.RL.6", "L.RL", 0, 1, "taxonomy", "Proportion of labelsets with up to the threshold number of examples");
    add("L.RL.7", "L.RL", 0, 1, "catalogue", "Proportion of examples in the most frequent labelset");
    add("L.RL.8", "L.RL", 0, inf, "taxonomy", "Standard deviation of examples per labelset");
    add("L.RL.9", "L.RL", -inf, inf, "catalogue", "Skewness of examples per labelset");
    add("L.RL.10", "L.RL", -inf, inf, "catalogue", "Kurtosis of examples per labelset");
    add("L.RL.11", "L.RL", 0, inf, "taxonomy", "Number of unconditionally dependent label pairs by chi-square test");
    add("L.RL.12", "L.RL", 0, 1, "taxonomy", "Proportion of unconditionally dependent label pairs by chi-square test");

    cat.validate();
    return cat;
}

} // namespace mlcmeta::meta
