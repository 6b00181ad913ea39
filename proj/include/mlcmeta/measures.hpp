#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mlcmeta/csv.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::eval {

struct BinaryMatrix {
    std::size_t n = 0, l = 0;
    std::vector<std::uint8_t> cells; // n*l row-major, each 0 or 1

    std::uint8_t at(std::size_t i, std::size_t j) const { return cells[i * l + j]; }
};

struct ScoreMatrix {
    std::size_t n = 0, l = 0;
    std::vector<double> cells; // n*l row-major, values in [0,1]

    double at(std::size_t i, std::size_t j) const { return cells[i * l + j]; }
};

// Ground truth plus at least one of relevance scores / bipartition.
struct PredictionSet {
    BinaryMatrix truth;
    std::optional<ScoreMatrix> scores;
    std::optional<BinaryMatrix> bipartition;

    void validate() const {
        if (truth.n == 0 || truth.l == 0 || truth.cells.size() != truth.n * truth.l)
            throw contract_error("truth matrix is empty or inconsistent");
        if (!scores && !bipartition)
            throw contract_error("prediction set needs scores or a bipartition");
        if (scores) {
            if (scores->n != truth.n || scores->l != truth.l)
                throw contract_error("score matrix shape does not match truth");
            for (double s : scores->cells)
                if (!(s >= 0.0 && s <= 1.0))
                    throw contract_error("relevance scores must lie in [0,1]");
        }
        if (bipartition && (bipartition->n != truth.n || bipartition->l != truth.l))
            throw contract_error("bipartition shape does not match truth");
    }
};

struct LabelCounts {
    std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

struct MeasureReport {
    std::map<std::string, double> measures;
    std::vector<LabelCounts> label_counts; // per label, when bipartitions were evaluated
    std::vector<std::string> notes;

    double at(const std::string& name) const {
        const auto it = measures.find(name);
        if (it == measures.end()) throw contract_error("measure not in report: " + name);
        return it->second;
    }
};

namespace detail {

inline void check_shapes(const BinaryMatrix& truth, const BinaryMatrix& pred) {
    if (pred.n != truth.n || pred.l != truth.l)
        throw contract_error("bipartition shape does not match truth");
}

inline std::vector<LabelCounts> contingency(const BinaryMatrix& truth, const BinaryMatrix& pred) {
    std::vector<LabelCounts> counts(truth.l);
    for (std::size_t i = 0; i < truth.n; ++i) {
        for (std::size_t j = 0; j < truth.l; ++j) {
            const bool t = truth.at(i, j), p = pred.at(i, j);
            if (t && p) ++counts[j].tp;
            else if (!t && p) ++counts[j].fp;
            else if (t && !p) ++counts[j].fn;
            else ++counts[j].tn;
        }
    }
    return counts;
}

// precision/recall/F1 from raw counts; 0/0 maps to 0
inline double safe_div(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

} // namespace detail

// Example-based measures: statistics of each example's predicted vs true
// labelset, averaged over examples. An example with empty truth and empty
// prediction is perfectly predicted (accuracy/precision/recall/F1 = 1).
inline MeasureReport example_based(const BinaryMatrix& truth, const BinaryMatrix& pred) {
    detail::check_shapes(truth, pred);
    const double n = static_cast<double>(truth.n);
    double hamming = 0.0, subset = 0.0, acc = 0.0, prec = 0.0, rec = 0.0, f1 = 0.0;
    for (std::size_t i = 0; i < truth.n; ++i) {
        std::size_t inter = 0, t_size = 0, p_size = 0, uni = 0, mismatch = 0;
        for (std::size_t j = 0; j < truth.l; ++j) {
            const bool t = truth.at(i, j), p = pred.at(i, j);
            inter += t && p;
            uni += t || p;
            t_size += t;
            p_size += p;
            mismatch += t != p;
        }
        hamming += static_cast<double>(mismatch);
        subset += mismatch == 0 ? 1.0 : 0.0;
        if (t_size == 0 && p_size == 0) {
            acc += 1.0;
            prec += 1.0;
            rec += 1.0;
            f1 += 1.0;
        } else {
            acc += detail::safe_div(inter, uni);
            prec += detail::safe_div(inter, p_size);
            rec += detail::safe_div(inter, t_size);
            f1 += detail::safe_div(2.0 * inter, t_size + p_size);
        }
    }
    MeasureReport r;
    r.measures["hamming.loss"] = hamming / (n * static_cast<double>(truth.l));
    r.measures["subset.accuracy"] = subset / n;
    r.measures["accuracy.example.based"] = acc / n;
    r.measures["precision.example.based"] = prec / n;
    r.measures["recall.example.based"] = rec / n;
    r.measures["F1.example.based"] = f1 / n;
    r.label_counts = detail::contingency(truth, pred);
    return r;
}

// Label-based measures: micro pools the per-label contingency tables before
// computing the statistic, macro averages the per-label statistics (0/0
// terms count as 0).
inline MeasureReport label_based(const BinaryMatrix& truth, const BinaryMatrix& pred) {
    detail::check_shapes(truth, pred);
    MeasureReport r;
    r.label_counts = detail::contingency(truth, pred);
    double tp = 0, fp = 0, fn = 0;
    double mp = 0, mr = 0, mf = 0;
    for (const auto& c : r.label_counts) {
        tp += c.tp;
        fp += c.fp;
        fn += c.fn;
        mp += detail::safe_div(c.tp, c.tp + c.fp);
        mr += detail::safe_div(c.tp, c.tp + c.fn);
        mf += detail::safe_div(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn);
    }
    const double l = static_cast<double>(truth.l);
    r.measures["precision.micro"] = detail::safe_div(tp, tp + fp);
    r.measures["recall.micro"] = detail::safe_div(tp, tp + fn);
    r.measures["F1.micro"] = detail::safe_div(2.0 * tp, 2.0 * tp + fp + fn);
    r.measures["precision.macro"] = mp / l;
    r.measures["recall.macro"] = mr / l;
    r.measures["F1.macro"] = mf / l;
    return r;
}

namespace detail {

// Rank-statistic AUC with midranks for ties over a flat cell sequence.
inline double rank_auc(const std::vector<std::pair<double, std::uint8_t>>& cells) {
    std::size_t n_pos = 0;
    for (const auto& [s, t] : cells) n_pos += t;
    const std::size_t n_neg = cells.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw undefined_measure_error("AUROC needs at least one positive and one negative");

    std::vector<std::size_t> order(cells.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return cells[a].first < cells[b].first; });

    double pos_rank_sum = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && cells[order[j]].first == cells[order[i]].first) ++j;
        const double midrank = 0.5 * static_cast<double>(i + 1 + j); // ranks are 1-based
        for (std::size_t k = i; k < j; ++k)
            if (cells[order[k]].second) pos_rank_sum += midrank;
        i = j;
    }
    const double p = static_cast<double>(n_pos);
    return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(n_neg));
}

} // namespace detail

// Micro AUROC: pools every (example, label) cell into one ranking.
inline double auroc_micro(const BinaryMatrix& truth, const ScoreMatrix& scores) {
    if (scores.n != truth.n || scores.l != truth.l)
        throw contract_error("score matrix shape does not match truth");
    std::vector<std::pair<double, std::uint8_t>> cells;
    cells.reserve(truth.n * truth.l);
    for (std::size_t i = 0; i < truth.n; ++i)
        for (std::size_t j = 0; j < truth.l; ++j)
            cells.emplace_back(scores.at(i, j), truth.at(i, j));
    return detail::rank_auc(cells);
}

struct MacroAuroc {
    double value = 0.0;
    std::vector<std::size_t> skipped_labels; // single-class labels, not averaged
};

// Macro AUROC: averages per-label AUCs, skipping labels with a single class.
inline MacroAuroc auroc_macro(const BinaryMatrix& truth, const ScoreMatrix& scores) {
    if (scores.n != truth.n || scores.l != truth.l)
        throw contract_error("score matrix shape does not match truth");
    MacroAuroc out;
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t j = 0; j < truth.l; ++j) {
        std::vector<std::pair<double, std::uint8_t>> cells;
        cells.reserve(truth.n);
        std::size_t pos = 0;
        for (std::size_t i = 0; i < truth.n; ++i) {
            cells.emplace_back(scores.at(i, j), truth.at(i, j));
            pos += truth.at(i, j);
        }
        if (pos == 0 || pos == truth.n) {
            out.skipped_labels.push_back(j);
            continue;
        }
        sum += detail::rank_auc(cells);
        ++used;
    }
    if (used == 0)
        throw undefined_measure_error("AUROC.macro: every label has a single class");
    out.value = sum / static_cast<double>(used);
    return out;
}

enum class AurocMode { micro, macro };

inline double auroc(const BinaryMatrix& truth, const ScoreMatrix& scores, AurocMode mode,
                    std::vector<std::size_t>* skipped = nullptr) {
    if (mode == AurocMode::micro) return auroc_micro(truth, scores);
    const auto m = auroc_macro(truth, scores);
    if (skipped) *skipped = m.skipped_labels;
    return m.value;
}

// Predicted label cardinality when thresholding the scores at t.
inline double cardinality_at(const ScoreMatrix& scores, double t) {
    std::size_t positives = 0;
    for (double s : scores.cells) positives += s >= t;
    return static_cast<double>(positives) / static_cast<double>(scores.n);
}

// PCut: the grid threshold whose induced predictions match the training label
// cardinality most closely; ties break toward the smallest threshold.
inline double pcut_threshold(double train_cardinality, const ScoreMatrix& scores,
                             std::vector<double> grid) {
    if (grid.empty()) throw contract_error("PCut grid must not be empty");
    for (double t : grid)
        if (!(t >= 0.0 && t <= 1.0)) throw contract_error("PCut grid values must lie in [0,1]");
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    double best_t = grid.front();
    double best_gap = std::abs(train_cardinality - cardinality_at(scores, grid.front()));
    for (std::size_t i = 1; i < grid.size(); ++i) {
        const double gap = std::abs(train_cardinality - cardinality_at(scores, grid[i]));
        if (gap < best_gap) {
            best_gap = gap;
            best_t = grid[i];
        }
    }
    return best_t;
}

// Default grid: every distinct score plus {0, 1} — exact minimization over
// all achievable bipartitions.
inline std::vector<double> default_pcut_grid(const ScoreMatrix& scores) {
    std::set<double> grid(scores.cells.begin(), scores.cells.end());
    grid.insert(0.0);
    grid.insert(1.0);
    return std::vector<double>(grid.begin(), grid.end());
}

inline BinaryMatrix apply_threshold(const ScoreMatrix& scores, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw contract_error("threshold must lie in [0,1]");
    BinaryMatrix out;
    out.n = scores.n;
    out.l = scores.l;
    out.cells.resize(scores.cells.size());
    for (std::size_t i = 0; i < scores.cells.size(); ++i)
        out.cells[i] = scores.cells[i] >= t ? 1 : 0;
    return out;
}

inline const std::vector<std::string>& known_measures() {
    static const std::vector<std::string> names = {
        "hamming.loss", "subset.accuracy", "accuracy.example.based",
        "precision.example.based", "recall.example.based", "F1.example.based",
        "precision.micro", "recall.micro", "F1.micro",
        "precision.macro", "recall.macro", "F1.macro",
        "AUROC.micro", "AUROC.macro"};
    return names;
}

// Computes the requested measures in one report. A missing bipartition is
// derived from the scores by PCut over the default grid, which needs the
// training cardinality.
inline MeasureReport evaluate_all(const PredictionSet& pred,
                                  std::optional<double> train_cardinality,
                                  const std::vector<std::string>& measures) {
    pred.validate();
    MeasureReport out;
    if (measures.empty()) return out;

    bool want_bipartition = false, want_auroc = false;
    for (const auto& m : measures) {
        if (std::find(known_measures().begin(), known_measures().end(), m) ==
            known_measures().end())
            throw contract_error("unknown measure: " + m);
        if (m.rfind("AUROC", 0) == 0) want_auroc = true;
        else want_bipartition = true;
    }

    std::optional<BinaryMatrix> bipartition = pred.bipartition;
    if (want_bipartition && !bipartition) {
        if (!pred.scores)
            throw contract_error("bipartition measures requested without bipartition or scores");
        if (!train_cardinality)
            throw contract_error(
                "bipartition measures from scores need the training cardinality for PCut");
        const double t =
            pcut_threshold(*train_cardinality, *pred.scores, default_pcut_grid(*pred.scores));
        bipartition = apply_threshold(*pred.scores, t);
        out.notes.push_back("bipartition derived by PCut at threshold " + format_double(t));
    }

    if (want_bipartition) {
        const auto eb = example_based(pred.truth, *bipartition);
        const auto lb = label_based(pred.truth, *bipartition);
        out.label_counts = eb.label_counts;
        for (const auto& m : measures) {
            if (eb.measures.count(m)) out.measures[m] = eb.measures.at(m);
            else if (lb.measures.count(m)) out.measures[m] = lb.measures.at(m);
        }
    }
    if (want_auroc) {
        if (!pred.scores)
            throw contract_error("AUROC requested but no scores are present");
        for (const auto& m : measures) {
            if (m == "AUROC.micro") {
                out.measures[m] = auroc_micro(pred.truth, *pred.scores);
            } else if (m == "AUROC.macro") {
                const auto macro = auroc_macro(pred.truth, *pred.scores);
                out.measures[m] = macro.value;
                for (std::size_t j : macro.skipped_labels)
                    out.notes.push_back("AUROC.macro skipped single-class label " +
                                        std::to_string(j));
            }
        }
    }
    return out;
}

// Prediction file: CSV with truth_<label> plus score_<label> and/or
// pred_<label> columns.
inline PredictionSet read_predictions_csv(std::istream& in) {
    const CsvTable table = read_csv_table(in);
    std::vector<std::string> label_names;
    std::vector<std::size_t> truth_cols;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (table.header[j].rfind("truth_", 0) == 0) {
            label_names.push_back(table.header[j].substr(6));
            truth_cols.push_back(j);
        }
    }
    if (label_names.empty())
        throw schema_error("prediction CSV needs truth_<label> columns");

    auto column_block = [&](const std::string& prefix,
                            std::vector<std::size_t>& cols) -> bool {
        cols.clear();
        for (const auto& name : label_names) {
            const auto c = table.find(prefix + name);
            if (!c) {
                if (!cols.empty())
                    throw schema_error("prediction CSV has a partial " + prefix + " block");
                return false;
            }
            cols.push_back(*c);
        }
        return true;
    };

    PredictionSet pred;
    pred.truth.n = table.rows.size();
    pred.truth.l = label_names.size();
    std::vector<std::size_t> score_cols, bip_cols;
    const bool has_scores = column_block("score_", score_cols);
    const bool has_bip = column_block("pred_", bip_cols);
    if (has_scores) {
        pred.scores = ScoreMatrix{};
        pred.scores->n = pred.truth.n;
        pred.scores->l = pred.truth.l;
    }
    if (has_bip) {
        pred.bipartition = BinaryMatrix{};
        pred.bipartition->n = pred.truth.n;
        pred.bipartition->l = pred.truth.l;
    }

    auto parse_bit = [](const std::string& v, long line) -> std::uint8_t {
        if (v == "0") return 0;
        if (v == "1") return 1;
        throw schema_error("binary cell must be 0 or 1, got '" + v + "' (line " +
                           std::to_string(line) + ")");
    };
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < label_names.size(); ++k) {
            pred.truth.cells.push_back(parse_bit(row.fields[truth_cols[k]], row.line));
            if (has_scores) {
                const auto v = parse_double(row.fields[score_cols[k]]);
                if (!v) throw schema_error("bad score '" + row.fields[score_cols[k]] + "'");
                pred.scores->cells.push_back(*v);
            }
            if (has_bip)
                pred.bipartition->cells.push_back(parse_bit(row.fields[bip_cols[k]], row.line));
        }
    }
    pred.validate();
    return pred;
}

inline PredictionSet read_predictions_csv_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open predictions file: " + path);
    return read_predictions_csv(in);
}

} // namespace mlcmeta::eval
