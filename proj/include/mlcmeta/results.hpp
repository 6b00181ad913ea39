#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "mlcmeta/csv.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::core {

enum class Family { AA, PT_BR, PT_LP, OTHER };
enum class Orientation { higher_better, lower_better };

inline const char* to_string(Family f) {
    switch (f) {
    case Family::AA: return "AA";
    case Family::PT_BR: return "PT.BR";
    case Family::PT_LP: return "PT.LP";
    default: return "OTHER";
    }
}

// Method-family / measure-orientation / reliable-defaults registry.
//
// File grammar (one directive per line, '#' comments):
//   family <method> <AA|PT.BR|PT.LP|OTHER>
//   orientation <measure> <higher|lower>
//   reliable-default <method>
struct Registry {
    std::map<std::string, Family> families;
    std::map<std::string, Orientation> orientations;
    std::set<std::string> reliable_defaults;

    // Methods not listed fall back to OTHER so that every method referenced
    // by an analysis resolves to a family.
    Family family_of(const std::string& method) const {
        const auto it = families.find(method);
        return it == families.end() ? Family::OTHER : it->second;
    }

    Orientation orientation_of(const std::string& measure) const {
        const auto it = orientations.find(measure);
        if (it == orientations.end())
            throw contract_error("measure '" + measure +
                                 "' has no registered orientation; add an 'orientation' "
                                 "line to the registry");
        return it->second;
    }

    bool is_reliable_default(const std::string& method) const {
        return reliable_defaults.count(method) > 0;
    }

    static Registry defaults();
    static Registry parse(std::istream& in);
    static Registry parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw parse_error("cannot open registry file: " + path);
        return parse(in);
    }
    void write(std::ostream& out) const;
};

inline Registry Registry::parse(std::istream& in) {
    Registry r;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::vector<std::string> tokens;
        for (const auto& t : split(sv, ' '))
            if (!trim(t).empty()) tokens.push_back(std::string(trim(t)));
        if (tokens[0] == "family") {
            if (tokens.size() != 3) throw parse_error("family needs: family <method> <family>", line_no);
            Family f;
            if (tokens[2] == "AA") f = Family::AA;
            else if (tokens[2] == "PT.BR") f = Family::PT_BR;
            else if (tokens[2] == "PT.LP") f = Family::PT_LP;
            else if (tokens[2] == "OTHER") f = Family::OTHER;
            else throw parse_error("unknown family: " + tokens[2], line_no);
            r.families[tokens[1]] = f;
        } else if (tokens[0] == "orientation") {
            if (tokens.size() != 3)
                throw parse_error("orientation needs: orientation <measure> <higher|lower>", line_no);
            if (tokens[2] == "higher") r.orientations[tokens[1]] = Orientation::higher_better;
            else if (tokens[2] == "lower") r.orientations[tokens[1]] = Orientation::lower_better;
            else throw parse_error("orientation must be higher or lower", line_no);
        } else if (tokens[0] == "reliable-default") {
            if (tokens.size() != 2)
                throw parse_error("reliable-default needs: reliable-default <method>", line_no);
            r.reliable_defaults.insert(tokens[1]);
        } else {
            throw parse_error("unknown registry directive: " + tokens[0], line_no);
        }
    }
    return r;
}

inline void Registry::write(std::ostream& out) const {
    out << "# mlcmeta registry\n";
    out << "# family <method> <AA|PT.BR|PT.LP|OTHER>\n";
    for (const auto& [m, f] : families) out << "family " << m << ' ' << to_string(f) << '\n';
    out << "# orientation <measure> <higher|lower>\n";
    for (const auto& [m, o] : orientations)
        out << "orientation " << m << ' '
            << (o == Orientation::higher_better ? "higher" : "lower") << '\n';
    out << "# reliable-default <method>\n";
    for (const auto& m : reliable_defaults) out << "reliable-default " << m << '\n';
}

inline Registry Registry::defaults() {
    Registry r;
    // algorithm adaptation methods
    for (const char* m : {"BPNN", "MLARM", "MLTSVM", "MLkNN", "PCT", "RFPCT", "DBN"})
        r.families[m] = Family::AA;
    // problem transformation, binary relevance sub-paradigm
    for (const char* m : {"BR", "CC", "EBR", "ECC", "MBR", "RFDTBR", "EBRJ48", "ECCJ48"})
        r.families[m] = Family::PT_BR;
    // problem transformation, label powerset sub-paradigm
    for (const char* m : {"LP", "ELP", "EPS", "PSt", "RSLP", "RAkEL", "HOMER", "TREMLC"})
        r.families[m] = Family::PT_LP;
    // sub-paradigm not fixed; user-editable
    for (const char* m : {"CLR", "CDE", "AdaBoost", "CDN", "SM", "CLEMS"})
        r.families[m] = Family::OTHER;

    for (const char* m : {"RFPCT", "AdaBoost", "TREMLC", "EBRJ48", "ECCJ48", "RFDTBR", "CDE"})
        r.reliable_defaults.insert(m);

    for (const char* m : {"subset.accuracy", "accuracy.example.based",
                          "precision.example.based", "recall.example.based", "F1.example.based",
                          "precision.micro", "recall.micro", "F1.micro",
                          "precision.macro", "recall.macro", "F1.macro",
                          "AUROC.micro", "AUROC.macro"})
        r.orientations[m] = Orientation::higher_better;
    for (const char* m : {"hamming.loss", "hamming.loss.default", "hamming.loss.tuned"})
        r.orientations[m] = Orientation::lower_better;
    return r;
}

// Scores of (dataset, method, measure) plus optional experiment-success logs.
class ResultsTable {
public:
    struct SuccessCell {
        long attempted = 0;
        long finished = 0;
    };

    void add_score(const std::string& dataset, const std::string& method,
                   const std::string& measure, double score) {
        const auto key = std::make_tuple(dataset, method, measure);
        if (!scores_.emplace(key, score).second)
            throw schema_error("duplicate score for (" + dataset + ", " + method + ", " +
                               measure + ")");
        datasets_.insert(dataset);
        methods_.insert(method);
        measures_.insert(measure);
    }

    void add_success(const std::string& dataset, const std::string& method,
                     long attempted, long finished) {
        if (attempted < 0 || finished < 0 || finished > attempted)
            throw schema_error("success log needs 0 <= finished <= attempted for (" +
                               dataset + ", " + method + ")");
        const auto key = std::make_pair(dataset, method);
        if (!success_.emplace(key, SuccessCell{attempted, finished}).second)
            throw schema_error("duplicate success-log row for (" + dataset + ", " + method + ")");
    }

    std::optional<double> score(const std::string& dataset, const std::string& method,
                                const std::string& measure) const {
        const auto it = scores_.find(std::make_tuple(dataset, method, measure));
        if (it == scores_.end()) return std::nullopt;
        return it->second;
    }

    const std::map<std::tuple<std::string, std::string, std::string>, double>& scores() const {
        return scores_;
    }
    const std::map<std::pair<std::string, std::string>, SuccessCell>& success_log() const {
        return success_;
    }

    // sorted unique key sets
    const std::set<std::string>& datasets() const { return datasets_; }
    const std::set<std::string>& methods() const { return methods_; }
    const std::set<std::string>& measures() const { return measures_; }

    bool has_success_log() const { return !success_.empty(); }

    // Scores of measures with a registered orientation are rates in [0, 1].
    void validate_rates(const Registry& registry) const {
        for (const auto& [key, score] : scores_) {
            const auto& measure = std::get<2>(key);
            if (registry.orientations.count(measure) && (score < 0.0 || score > 1.0))
                throw schema_error("score outside [0,1] for rate measure " + measure +
                                   " on (" + std::get<0>(key) + ", " + std::get<1>(key) + ")");
        }
    }

    // CSV with columns dataset,method,measure,score
    static ResultsTable scores_from_csv(std::istream& in) {
        ResultsTable t;
        const CsvTable csv = read_csv_table(in);
        const size_t cd = csv.require("dataset"), cm = csv.require("method"),
                     cs = csv.require("measure"), cv = csv.require("score");
        for (const auto& row : csv.rows) {
            const auto v = parse_double(row.fields[cv]);
            if (!v || !std::isfinite(*v))
                throw parse_error("bad score value: " + row.fields[cv], row.line);
            t.add_score(row.fields[cd], row.fields[cm], row.fields[cs], *v);
        }
        return t;
    }

    // CSV with columns dataset,method,attempted,finished
    void success_from_csv(std::istream& in) {
        const CsvTable csv = read_csv_table(in);
        const size_t cd = csv.require("dataset"), cm = csv.require("method"),
                     ca = csv.require("attempted"), cf = csv.require("finished");
        for (const auto& row : csv.rows) {
            const auto a = parse_int(row.fields[ca]);
            const auto f = parse_int(row.fields[cf]);
            if (!a || !f)
                throw parse_error("bad attempted/finished value", row.line);
            add_success(row.fields[cd], row.fields[cm], *a, *f);
        }
    }

    static ResultsTable scores_from_csv_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw parse_error("cannot open results file: " + path);
        return scores_from_csv(in);
    }
    void success_from_csv_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw parse_error("cannot open success-log file: " + path);
        success_from_csv(in);
    }

private:
    std::map<std::tuple<std::string, std::string, std::string>, double> scores_;
    std::map<std::pair<std::string, std::string>, SuccessCell> success_;
    std::set<std::string> datasets_, methods_, measures_;
};

} // namespace mlcmeta::core
