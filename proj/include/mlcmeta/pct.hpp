#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlcmeta/csv.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/stats.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::pct {

enum class ColumnType { numeric, nominal };
enum class TreeMode { clustering, classification, regression };

inline const char* to_string(TreeMode m) {
    switch (m) {
    case TreeMode::clustering: return "clustering";
    case TreeMode::classification: return "classification";
    default: return "regression";
    }
}

inline TreeMode tree_mode_from(const std::string& s) {
    if (s == "clustering" || s == "cluster") return TreeMode::clustering;
    if (s == "classification" || s == "classify") return TreeMode::classification;
    if (s == "regression" || s == "mtr") return TreeMode::regression;
    throw contract_error("unknown tree mode: " + s);
}

// Rows with mixed-type descriptive columns and either numeric targets
// (regression, also used as the clustering space) or a single nominal class.
// Descriptive and target values must be complete.
struct DataTable {
    std::size_t n = 0;
    std::size_t d = 0;

    std::vector<std::string> column_names;
    std::vector<ColumnType> column_types;
    std::vector<std::vector<std::string>> categories; // per column; empty for numeric
    std::vector<double> columns;                      // n*d row-major; nominal = code

    std::vector<std::string> target_names; // numeric targets (regression)
    std::vector<double> targets;           // n*t row-major

    std::string class_name;                 // classification target column
    std::vector<std::string> class_values;  // category list
    std::vector<std::size_t> class_of;      // n codes into class_values

    std::vector<std::string> row_ids; // optional; defaults to row indices

    std::size_t t() const { return target_names.size(); }
    double value(std::size_t i, std::size_t j) const { return columns[i * d + j]; }
    double target(std::size_t i, std::size_t k) const { return targets[i * t() + k]; }

    std::vector<double> row(std::size_t i) const {
        return std::vector<double>(columns.begin() + static_cast<std::ptrdiff_t>(i * d),
                                   columns.begin() + static_cast<std::ptrdiff_t>((i + 1) * d));
    }
    std::string row_id(std::size_t i) const {
        return row_ids.empty() ? std::to_string(i) : row_ids[i];
    }

    void validate() const {
        if (n == 0) throw contract_error("data table is empty");
        if (d == 0) throw contract_error("data table needs at least one descriptive column");
        if (columns.size() != n * d) throw contract_error("data table column storage inconsistent");
        for (double v : columns)
            if (std::isnan(v)) throw contract_error("descriptive values must be complete");
        if (!targets.empty()) {
            if (targets.size() != n * t()) throw contract_error("target storage inconsistent");
            for (double v : targets)
                if (std::isnan(v)) throw contract_error("target values must be complete");
        }
        if (!class_of.empty() && class_of.size() != n)
            throw contract_error("class storage inconsistent");
    }

    DataTable subset(const std::vector<std::size_t>& rows) const {
        DataTable s = *this;
        s.n = rows.size();
        s.columns.clear();
        s.targets.clear();
        s.class_of.clear();
        s.row_ids.clear();
        for (std::size_t i : rows) {
            for (std::size_t j = 0; j < d; ++j) s.columns.push_back(value(i, j));
            for (std::size_t k = 0; k < t(); ++k) s.targets.push_back(target(i, k));
            if (!class_of.empty()) s.class_of.push_back(class_of[i]);
            s.row_ids.push_back(row_id(i));
        }
        return s;
    }
};

// Binary test on one descriptive column. Numeric: value <= threshold goes
// left; nominal: value == category goes left. The threshold always lies
// strictly between two observed distinct values.
struct Split {
    std::size_t column = 0;
    bool numeric = true;
    double threshold = 0.0;
    std::size_t category = 0;
    double score = 0.0; // variance reduction / information gain
};

struct LearnParams {
    double f_level = 0.125;  // F-test significance for the stopping rule
    std::size_t min_leaf = 2;
};

// F-test stopping rule for a binary split: F = ((ssp-ssc)/(k-1)) / (ssc/(n-k))
// with k = 2 branches; the split is kept when the upper-tail probability at
// (1, n-2) degrees of freedom is at most `level`.
inline bool ftest_accept(double ss_parent, double ss_children, std::size_t n, double level) {
    if (!(level > 0.0 && level < 1.0)) throw contract_error("F-test level must lie in (0,1)");
    if (n <= 2) return false; // not enough data for the decomposition
    if (ss_parent <= 0.0) return false;
    if (ss_children <= 0.0) return true;
    if (ss_children >= ss_parent) return false;
    const double df2 = static_cast<double>(n - 2);
    const double f = (ss_parent - ss_children) / (ss_children / df2);
    return f_upper_tail(f, 1.0, df2) <= level;
}

struct TreeNode {
    int left = -1, right = -1; // -1 on both: leaf
    Split split;               // meaningful on internal nodes
    std::size_t n_rows = 0;
    double ss = 0.0;                       // impurity sum of squares at the node
    std::vector<std::size_t> members;      // training rows (leaves only)
    std::vector<double> prototype;         // mean target vector (regression/clustering)
    std::vector<double> class_distribution; // class proportions (classification)
    std::size_t majority_class = 0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    TreeMode mode = TreeMode::regression;
    LearnParams params;

    std::vector<std::string> column_names;
    std::vector<ColumnType> column_types;
    std::vector<std::vector<std::string>> categories;

    std::vector<std::string> target_names;
    std::vector<std::string> class_values;

    // normalization record: per-target variance at the root, and for
    // clustering mode the standardization applied to build the target side
    std::vector<double> root_variance;
    std::vector<double> standardize_mean, standardize_std;

    std::vector<TreeNode> nodes; // preorder; root at index 0

    std::size_t node_count() const { return nodes.size(); }
    std::size_t leaf_count() const {
        std::size_t c = 0;
        for (const auto& nd : nodes) c += nd.is_leaf();
        return c;
    }
};

namespace detail {

// Node-evaluation context for regression/clustering: per-row target values
// weighted by the inverse root variance.
struct TargetView {
    const std::vector<double>* values = nullptr; // n*t row-major
    std::size_t t = 0;
    std::vector<double> weight; // 1/root_variance, 0 for zero-variance targets

    double at(std::size_t row, std::size_t k) const { return (*values)[row * t + k]; }
};

// Normalized impurity sum of squares of a row set: sum over targets of
// SS_t / rootvar_t.
inline double node_ss(const TargetView& tv, const std::vector<std::size_t>& rows) {
    double total = 0.0;
    for (std::size_t k = 0; k < tv.t; ++k) {
        if (tv.weight[k] == 0.0) continue;
        double s = 0.0;
        for (std::size_t r : rows) s += tv.at(r, k);
        const double m = s / static_cast<double>(rows.size());
        double ss = 0.0;
        for (std::size_t r : rows) {
            const double dlt = tv.at(r, k) - m;
            ss += dlt * dlt;
        }
        total += ss * tv.weight[k];
    }
    return total;
}

// One-hot class sum of squares: n - sum_k count_k^2 / n (used only for the
// F-test in classification mode; split selection uses information gain).
inline double class_ss(const std::vector<std::size_t>& counts, std::size_t n) {
    double sq = 0.0;
    for (std::size_t c : counts) sq += static_cast<double>(c) * static_cast<double>(c);
    return static_cast<double>(n) - sq / static_cast<double>(n);
}

inline double class_entropy(const std::vector<std::size_t>& counts, std::size_t n) {
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log2(p);
    }
    return h < 0.0 ? 0.0 : h;
}

struct SplitContext {
    const DataTable* table = nullptr;
    TreeMode mode = TreeMode::regression;
    TargetView targets; // regression/clustering
    std::size_t n_classes = 0;
    std::size_t min_leaf = 2;
};

struct Partition {
    std::vector<std::size_t> left, right;
};

inline Partition apply_split(const SplitContext& ctx, const Split& sp,
                             const std::vector<std::size_t>& rows) {
    Partition p;
    for (std::size_t r : rows) {
        const double v = ctx.table->value(r, sp.column);
        const bool goes_left = sp.numeric ? v <= sp.threshold
                                          : static_cast<std::size_t>(v) == sp.category;
        (goes_left ? p.left : p.right).push_back(r);
    }
    return p;
}

// Exhaustive candidate evaluation: numeric thresholds at midpoints between
// consecutive distinct sorted values, nominal one-vs-rest equality tests.
// Ties on the heuristic keep the earliest candidate: columns ascending, then
// thresholds/categories ascending.
inline std::optional<Split> best_split(const SplitContext& ctx,
                                       const std::vector<std::size_t>& rows) {
    const DataTable& table = *ctx.table;
    const std::size_t n = rows.size();
    if (n < 2) return std::nullopt;

    const bool classify = ctx.mode == TreeMode::classification;

    // parent statistics
    std::vector<std::size_t> parent_counts;
    double parent_impurity = 0.0; // entropy (classification) or SS/n (regression)
    std::vector<double> node_mean;
    if (classify) {
        parent_counts.assign(ctx.n_classes, 0);
        for (std::size_t r : rows) ++parent_counts[table.class_of[r]];
        parent_impurity = class_entropy(parent_counts, n);
    } else {
        node_mean.assign(ctx.targets.t, 0.0);
        for (std::size_t k = 0; k < ctx.targets.t; ++k) {
            double s = 0.0;
            for (std::size_t r : rows) s += ctx.targets.at(r, k);
            node_mean[k] = s / static_cast<double>(n);
        }
    }

    std::optional<Split> best;

    // Candidates arrive in canonical order (columns ascending, thresholds and
    // categories ascending) and a later candidate must beat the incumbent by
    // more than a relative epsilon. Distinct candidates can induce the same
    // partition and thus the same mathematical score; without the epsilon the
    // winner among them would be decided by accumulation-order rounding,
    // breaking invariances such as target rescaling.
    auto consider = [&](Split cand) {
        if (cand.score <= 0.0) return;
        if (!best) {
            best = cand;
            return;
        }
        const double eps = 1e-12 * (std::abs(best->score) + std::abs(cand.score));
        if (cand.score > best->score + eps) best = cand;
    };

    for (std::size_t j = 0; j < table.d; ++j) {
        if (table.column_types[j] == ColumnType::numeric) {
            std::vector<std::pair<double, std::size_t>> sorted;
            sorted.reserve(n);
            for (std::size_t r : rows) sorted.emplace_back(table.value(r, j), r);
            std::sort(sorted.begin(), sorted.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            if (classify) {
                std::vector<std::size_t> left_counts(ctx.n_classes, 0);
                std::size_t n_left = 0;
                for (std::size_t p = 0; p + 1 < n; ++p) {
                    ++left_counts[table.class_of[sorted[p].second]];
                    ++n_left;
                    if (sorted[p].first == sorted[p + 1].first) continue;
                    if (n_left < ctx.min_leaf || n - n_left < ctx.min_leaf) continue;
                    const double mid = 0.5 * (sorted[p].first + sorted[p + 1].first);
                    if (!(sorted[p].first < mid && mid < sorted[p + 1].first)) continue;
                    std::vector<std::size_t> right_counts(ctx.n_classes, 0);
                    for (std::size_t c = 0; c < ctx.n_classes; ++c)
                        right_counts[c] = parent_counts[c] - left_counts[c];
                    const double wl = static_cast<double>(n_left) / static_cast<double>(n);
                    const double gain = parent_impurity -
                                        wl * class_entropy(left_counts, n_left) -
                                        (1.0 - wl) * class_entropy(right_counts, n - n_left);
                    consider({j, true, mid, 0, gain});
                }
            } else {
                // prefix sums of node-centered target values and squares
                const std::size_t t = ctx.targets.t;
                std::vector<double> pre_sum(t, 0.0), pre_sq(t, 0.0);
                std::vector<double> tot_sum(t, 0.0), tot_sq(t, 0.0);
                for (const auto& [v, r] : sorted) {
                    for (std::size_t k = 0; k < t; ++k) {
                        const double c = ctx.targets.at(r, k) - node_mean[k];
                        tot_sum[k] += c;
                        tot_sq[k] += c * c;
                    }
                }
                double parent_ss = 0.0;
                for (std::size_t k = 0; k < t; ++k)
                    parent_ss += (tot_sq[k] - tot_sum[k] * tot_sum[k] / static_cast<double>(n)) *
                                 ctx.targets.weight[k];

                std::size_t n_left = 0;
                for (std::size_t p = 0; p + 1 < n; ++p) {
                    const std::size_t r = sorted[p].second;
                    for (std::size_t k = 0; k < t; ++k) {
                        const double c = ctx.targets.at(r, k) - node_mean[k];
                        pre_sum[k] += c;
                        pre_sq[k] += c * c;
                    }
                    ++n_left;
                    if (sorted[p].first == sorted[p + 1].first) continue;
                    if (n_left < ctx.min_leaf || n - n_left < ctx.min_leaf) continue;
                    const double mid = 0.5 * (sorted[p].first + sorted[p + 1].first);
                    if (!(sorted[p].first < mid && mid < sorted[p + 1].first)) continue;
                    double children_ss = 0.0;
                    const double nl = static_cast<double>(n_left);
                    const double nr = static_cast<double>(n - n_left);
                    for (std::size_t k = 0; k < t; ++k) {
                        const double ls = pre_sq[k] - pre_sum[k] * pre_sum[k] / nl;
                        const double rsum = tot_sum[k] - pre_sum[k];
                        const double rs = (tot_sq[k] - pre_sq[k]) - rsum * rsum / nr;
                        children_ss += (ls + rs) * ctx.targets.weight[k];
                    }
                    const double reduction = (parent_ss - children_ss) / static_cast<double>(n);
                    consider({j, true, mid, 0, reduction});
                }
            }
        } else {
            // one-vs-rest on each category observed in this node
            std::set<std::size_t> present;
            for (std::size_t r : rows) present.insert(static_cast<std::size_t>(table.value(r, j)));
            if (present.size() < 2) continue;
            for (std::size_t cat : present) {
                Split cand{j, false, 0.0, cat, 0.0};
                const auto part = apply_split(ctx, cand, rows);
                if (part.left.size() < ctx.min_leaf || part.right.size() < ctx.min_leaf) continue;
                if (classify) {
                    std::vector<std::size_t> lc(ctx.n_classes, 0), rc(ctx.n_classes, 0);
                    for (std::size_t r : part.left) ++lc[table.class_of[r]];
                    for (std::size_t r : part.right) ++rc[table.class_of[r]];
                    const double wl =
                        static_cast<double>(part.left.size()) / static_cast<double>(n);
                    cand.score = parent_impurity - wl * class_entropy(lc, part.left.size()) -
                                 (1.0 - wl) * class_entropy(rc, part.right.size());
                } else {
                    const double parent_ss = node_ss(ctx.targets, rows);
                    const double children_ss =
                        node_ss(ctx.targets, part.left) + node_ss(ctx.targets, part.right);
                    cand.score = (parent_ss - children_ss) / static_cast<double>(n);
                }
                consider(cand);
            }
        }
    }
    return best;
}

} // namespace detail

// Exposed for direct testing: the exhaustive split search over a whole table
// or a row subset.
inline std::optional<Split> best_split(const DataTable& table, TreeMode mode,
                                       const LearnParams& params = {});

inline Tree learn(const DataTable& table, TreeMode mode, const LearnParams& params = {});

namespace detail {

struct LearnSetup {
    SplitContext ctx;
    std::vector<double> cluster_targets; // owned storage for clustering mode
    Tree tree;
};

inline void prepare(LearnSetup& s, const DataTable& table, TreeMode mode,
                    const LearnParams& params) {
    table.validate();
    if (params.min_leaf < 1) throw contract_error("min_leaf must be at least 1");

    Tree& tr = s.tree;
    tr.mode = mode;
    tr.params = params;
    tr.column_names = table.column_names;
    tr.column_types = table.column_types;
    tr.categories = table.categories;

    s.ctx.table = &table;
    s.ctx.mode = mode;
    s.ctx.min_leaf = params.min_leaf;

    if (mode == TreeMode::classification) {
        if (table.class_of.empty())
            throw contract_error("classification mode needs a class column");
        tr.class_values = table.class_values;
        s.ctx.n_classes = table.class_values.size();
        return;
    }

    if (mode == TreeMode::regression) {
        if (table.t() == 0)
            throw contract_error("regression mode needs at least one numeric target");
        tr.target_names = table.target_names;
        s.ctx.targets.values = &table.targets;
        s.ctx.targets.t = table.t();
    } else {
        // clustering: targets are standardized copies of the numeric
        // descriptive columns; zero-variance columns are dropped
        std::vector<std::size_t> keep;
        for (std::size_t j = 0; j < table.d; ++j) {
            if (table.column_types[j] != ColumnType::numeric) continue;
            std::vector<double> col(table.n);
            for (std::size_t i = 0; i < table.n; ++i) col[i] = table.value(i, j);
            const double sd = population_stddev(col);
            if (sd == 0.0) continue;
            keep.push_back(j);
            tr.standardize_mean.push_back(mean(col));
            tr.standardize_std.push_back(sd);
            tr.target_names.push_back(table.column_names[j]);
        }
        if (keep.empty())
            throw contract_error("clustering mode needs at least one non-constant numeric column");
        s.cluster_targets.resize(table.n * keep.size());
        for (std::size_t i = 0; i < table.n; ++i)
            for (std::size_t q = 0; q < keep.size(); ++q)
                s.cluster_targets[i * keep.size() + q] =
                    (table.value(i, keep[q]) - tr.standardize_mean[q]) / tr.standardize_std[q];
        s.ctx.targets.values = &s.cluster_targets;
        s.ctx.targets.t = keep.size();
    }

    // root-variance normalization for the heuristic
    std::vector<std::size_t> all_rows(table.n);
    for (std::size_t i = 0; i < table.n; ++i) all_rows[i] = i;
    tr.root_variance.assign(s.ctx.targets.t, 0.0);
    s.ctx.targets.weight.assign(s.ctx.targets.t, 1.0); // temporary, for raw SS below
    for (std::size_t k = 0; k < s.ctx.targets.t; ++k) {
        std::vector<double> col(table.n);
        for (std::size_t i = 0; i < table.n; ++i) col[i] = s.ctx.targets.at(i, k);
        tr.root_variance[k] = population_variance(col);
    }
    for (std::size_t k = 0; k < s.ctx.targets.t; ++k)
        s.ctx.targets.weight[k] = tr.root_variance[k] > 0.0 ? 1.0 / tr.root_variance[k] : 0.0;
}

inline int grow(LearnSetup& s, const std::vector<std::size_t>& rows) {
    const DataTable& table = *s.ctx.table;
    Tree& tr = s.tree;
    const bool classify = s.ctx.mode == TreeMode::classification;

    const int index = static_cast<int>(tr.nodes.size());
    tr.nodes.emplace_back();
    {
        TreeNode& node = tr.nodes.back();
        node.n_rows = rows.size();
        if (classify) {
            std::vector<std::size_t> counts(s.ctx.n_classes, 0);
            for (std::size_t r : rows) ++counts[table.class_of[r]];
            node.ss = class_ss(counts, rows.size());
            node.class_distribution.resize(counts.size());
            for (std::size_t c = 0; c < counts.size(); ++c)
                node.class_distribution[c] =
                    static_cast<double>(counts[c]) / static_cast<double>(rows.size());
            node.majority_class = static_cast<std::size_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
        } else {
            node.ss = node_ss(s.ctx.targets, rows);
            node.prototype.assign(s.ctx.targets.t, 0.0);
            for (std::size_t k = 0; k < s.ctx.targets.t; ++k) {
                double sum = 0.0;
                for (std::size_t r : rows) sum += s.ctx.targets.at(r, k);
                node.prototype[k] = sum / static_cast<double>(rows.size());
            }
        }
    }

    auto make_leaf = [&] {
        tr.nodes[static_cast<std::size_t>(index)].members = rows;
        return index;
    };

    if (rows.size() < 2 * s.ctx.min_leaf) return make_leaf();
    const auto split = best_split(s.ctx, rows);
    if (!split) return make_leaf();

    const auto part = apply_split(s.ctx, *split, rows);
    double ss_parent, ss_children;
    if (classify) {
        std::vector<std::size_t> lc(s.ctx.n_classes, 0), rc(s.ctx.n_classes, 0);
        for (std::size_t r : part.left) ++lc[table.class_of[r]];
        for (std::size_t r : part.right) ++rc[table.class_of[r]];
        ss_parent = tr.nodes[static_cast<std::size_t>(index)].ss;
        ss_children = class_ss(lc, part.left.size()) + class_ss(rc, part.right.size());
    } else {
        ss_parent = tr.nodes[static_cast<std::size_t>(index)].ss;
        ss_children = node_ss(s.ctx.targets, part.left) + node_ss(s.ctx.targets, part.right);
    }
    if (!ftest_accept(ss_parent, ss_children, rows.size(), tr.params.f_level))
        return make_leaf();

    tr.nodes[static_cast<std::size_t>(index)].split = *split;
    const int left = grow(s, part.left);
    tr.nodes[static_cast<std::size_t>(index)].left = left;
    const int right = grow(s, part.right);
    tr.nodes[static_cast<std::size_t>(index)].right = right;
    return index;
}

} // namespace detail

inline std::optional<Split> best_split(const DataTable& table, TreeMode mode,
                                       const LearnParams& params) {
    detail::LearnSetup s;
    detail::prepare(s, table, mode, params);
    std::vector<std::size_t> rows(table.n);
    for (std::size_t i = 0; i < table.n; ++i) rows[i] = i;
    return detail::best_split(s.ctx, rows);
}

// Standard top-down induction: exhaustive split search, F-test stopping.
// Split choice does not depend on f_level, so stricter levels yield rooted
// subtrees of looser ones.
inline Tree learn(const DataTable& table, TreeMode mode, const LearnParams& params) {
    detail::LearnSetup s;
    detail::prepare(s, table, mode, params);
    std::vector<std::size_t> rows(table.n);
    for (std::size_t i = 0; i < table.n; ++i) rows[i] = i;
    detail::grow(s, rows);
    return std::move(s.tree);
}

struct Prediction {
    std::size_t leaf = 0;                   // node index of the reached leaf
    std::vector<double> values;             // prototype (regression/clustering)
    std::size_t class_code = 0;             // classification
    std::vector<double> class_distribution; // classification
};

// Routes one row (descriptive values in tree column order) to its leaf.
inline Prediction predict(const Tree& tree, std::span<const double> row) {
    if (row.size() != tree.column_names.size())
        throw contract_error("prediction row width does not match the tree's columns");
    std::size_t at = 0;
    for (;;) {
        const TreeNode& node = tree.nodes[at];
        if (node.is_leaf()) {
            Prediction p;
            p.leaf = at;
            p.values = node.prototype;
            p.class_code = node.majority_class;
            p.class_distribution = node.class_distribution;
            return p;
        }
        const double v = row[node.split.column];
        if (std::isnan(v))
            throw contract_error("row is missing column '" +
                                 tree.column_names[node.split.column] +
                                 "' referenced by a split");
        const bool left = node.split.numeric
                              ? v <= node.split.threshold
                              : static_cast<std::size_t>(v) == node.split.category;
        at = static_cast<std::size_t>(left ? node.left : node.right);
    }
}

// ---- exports ----------------------------------------------------------

namespace detail {

inline std::string split_label(const Tree& tree, const Split& sp) {
    if (sp.numeric)
        return tree.column_names[sp.column] + " <= " + format_double(sp.threshold);
    return tree.column_names[sp.column] + " = " +
           tree.categories[sp.column][sp.category];
}

inline std::string leaf_label(const Tree& tree, const TreeNode& node) {
    std::string out;
    if (tree.mode == TreeMode::classification) {
        out = tree.class_values[node.majority_class];
    } else {
        out = "[";
        for (std::size_t k = 0; k < node.prototype.size(); ++k) {
            if (k) out += ", ";
            out += format_double(node.prototype[k]);
        }
        out += "]";
    }
    out += " (n=" + std::to_string(node.n_rows) + ")";
    return out;
}

inline void export_text_node(const Tree& tree, std::size_t at, const std::string& indent,
                             std::ostream& out) {
    const TreeNode& node = tree.nodes[at];
    if (node.is_leaf()) {
        out << indent << "leaf " << at << ": " << leaf_label(tree, node) << "\n";
        return;
    }
    out << indent << split_label(tree, node.split) << "\n";
    out << indent << "+-- yes:\n";
    export_text_node(tree, static_cast<std::size_t>(node.left), indent + "|   ", out);
    out << indent << "+-- no:\n";
    export_text_node(tree, static_cast<std::size_t>(node.right), indent + "    ", out);
}

} // namespace detail

inline std::string export_text(const Tree& tree) {
    std::ostringstream out;
    detail::export_text_node(tree, 0, "", out);
    return out.str();
}

inline std::string export_dot(const Tree& tree) {
    std::ostringstream out;
    out << "digraph pct {\n  node [shape=box];\n";
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& node = tree.nodes[i];
        std::string label = node.is_leaf() ? detail::leaf_label(tree, node)
                                           : detail::split_label(tree, node.split);
        std::string escaped;
        for (char c : label) {
            if (c == '"' || c == '\\') escaped.push_back('\\');
            escaped.push_back(c);
        }
        out << "  n" << i << " [label=\"" << escaped << "\"];\n";
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& node = tree.nodes[i];
        if (node.is_leaf()) continue;
        out << "  n" << i << " -> n" << node.left << " [label=\"yes\"];\n";
        out << "  n" << i << " -> n" << node.right << " [label=\"no\"];\n";
    }
    out << "}\n";
    return out.str();
}

inline nlohmann::json tree_to_json(const Tree& tree) {
    nlohmann::json j;
    j["format"] = "mlcmeta.pct";
    j["version"] = 1;
    j["mode"] = to_string(tree.mode);
    j["params"] = {{"f_level", tree.params.f_level}, {"min_leaf", tree.params.min_leaf}};
    auto cols = nlohmann::json::array();
    for (std::size_t c = 0; c < tree.column_names.size(); ++c) {
        nlohmann::json col;
        col["name"] = tree.column_names[c];
        col["type"] = tree.column_types[c] == ColumnType::numeric ? "numeric" : "nominal";
        if (tree.column_types[c] == ColumnType::nominal) col["categories"] = tree.categories[c];
        cols.push_back(col);
    }
    j["columns"] = cols;
    j["targets"] = tree.target_names;
    j["classes"] = tree.class_values;
    j["root_variance"] = tree.root_variance;
    if (!tree.standardize_mean.empty()) {
        j["standardization"] = {{"mean", tree.standardize_mean},
                                {"stddev", tree.standardize_std}};
    }
    auto nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
        nlohmann::json n;
        n["n_rows"] = node.n_rows;
        n["ss"] = node.ss;
        if (node.is_leaf()) {
            n["members"] = node.members;
            if (!node.prototype.empty()) n["prototype"] = node.prototype;
            if (!node.class_distribution.empty()) {
                n["class_distribution"] = node.class_distribution;
                n["majority_class"] = node.majority_class;
            }
        } else {
            n["left"] = node.left;
            n["right"] = node.right;
            nlohmann::json sp;
            sp["column"] = node.split.column;
            sp["score"] = node.split.score;
            if (node.split.numeric) sp["threshold"] = node.split.threshold;
            else sp["category"] = node.split.category;
            n["split"] = sp;
        }
        nodes.push_back(n);
    }
    j["nodes"] = nodes;
    return j;
}

inline Tree tree_from_json(const nlohmann::json& j) {
    if (!j.contains("format") || j["format"] != "mlcmeta.pct")
        throw schema_error("not an mlcmeta.pct tree document");
    if (j.at("version").get<int>() != 1)
        throw schema_error("unsupported tree document version");
    Tree tree;
    tree.mode = tree_mode_from(j.at("mode").get<std::string>());
    tree.params.f_level = j.at("params").at("f_level").get<double>();
    tree.params.min_leaf = j.at("params").at("min_leaf").get<std::size_t>();
    for (const auto& col : j.at("columns")) {
        tree.column_names.push_back(col.at("name").get<std::string>());
        const bool numeric = col.at("type").get<std::string>() == "numeric";
        tree.column_types.push_back(numeric ? ColumnType::numeric : ColumnType::nominal);
        std::vector<std::string> cats;
        if (col.contains("categories")) cats = col["categories"].get<std::vector<std::string>>();
        tree.categories.push_back(std::move(cats));
    }
    tree.target_names = j.at("targets").get<std::vector<std::string>>();
    tree.class_values = j.at("classes").get<std::vector<std::string>>();
    tree.root_variance = j.at("root_variance").get<std::vector<double>>();
    if (j.contains("standardization")) {
        tree.standardize_mean = j["standardization"].at("mean").get<std::vector<double>>();
        tree.standardize_std = j["standardization"].at("stddev").get<std::vector<double>>();
    }
    for (const auto& n : j.at("nodes")) {
        TreeNode node;
        node.n_rows = n.at("n_rows").get<std::size_t>();
        node.ss = n.at("ss").get<double>();
        if (n.contains("left")) {
            node.left = n.at("left").get<int>();
            node.right = n.at("right").get<int>();
            node.split.column = n.at("split").at("column").get<std::size_t>();
            node.split.score = n.at("split").at("score").get<double>();
            if (n.at("split").contains("threshold")) {
                node.split.numeric = true;
                node.split.threshold = n.at("split").at("threshold").get<double>();
            } else {
                node.split.numeric = false;
                node.split.category = n.at("split").at("category").get<std::size_t>();
            }
        } else {
            if (n.contains("members")) node.members = n.at("members").get<std::vector<std::size_t>>();
            if (n.contains("prototype")) node.prototype = n.at("prototype").get<std::vector<double>>();
            if (n.contains("class_distribution")) {
                node.class_distribution = n.at("class_distribution").get<std::vector<double>>();
                node.majority_class = n.at("majority_class").get<std::size_t>();
            }
        }
        tree.nodes.push_back(std::move(node));
    }
    if (tree.nodes.empty()) throw schema_error("tree document has no nodes");
    return tree;
}

// ---- CSV + role manifest loader ---------------------------------------

// Role manifest: one line per column, "<column> <role> [<type>]" with role in
// {descriptor, target, class, id, ignore} and optional type in
// {numeric, nominal}. Columns not listed default to descriptors.
inline DataTable load_data_table(const std::string& csv_path, const std::string& roles_path) {
    std::ifstream roles_in(roles_path);
    if (!roles_in) throw parse_error("cannot open roles manifest: " + roles_path);
    std::map<std::string, std::string> role_of;
    std::map<std::string, ColumnType> type_of;
    std::string line;
    long line_no = 0;
    while (std::getline(roles_in, line)) {
        ++line_no;
        const auto sv = trim(line);
        if (sv.empty() || sv.front() == '#') continue;
        std::vector<std::string> tokens;
        for (const auto& tk : split(sv, ' '))
            if (!trim(tk).empty()) tokens.push_back(std::string(trim(tk)));
        if (tokens.size() < 2 || tokens.size() > 3)
            throw parse_error("roles line needs: <column> <role> [<type>]", line_no);
        const std::string& role = tokens[1];
        if (role != "descriptor" && role != "target" && role != "class" && role != "id" &&
            role != "ignore")
            throw parse_error("unknown role: " + role, line_no);
        role_of[tokens[0]] = role;
        if (tokens.size() == 3) {
            if (tokens[2] == "numeric") type_of[tokens[0]] = ColumnType::numeric;
            else if (tokens[2] == "nominal") type_of[tokens[0]] = ColumnType::nominal;
            else throw parse_error("unknown type: " + tokens[2], line_no);
        }
    }

    const CsvTable csv = read_csv_table_file(csv_path);
    for (const auto& [col, role] : role_of)
        if (!csv.find(col)) throw schema_error("roles manifest names unknown column: " + col);

    DataTable table;
    table.n = csv.rows.size();
    if (table.n == 0) throw parse_error("data table CSV has no rows");

    std::vector<std::size_t> desc_cols, target_cols;
    std::optional<std::size_t> class_col, id_col;
    for (std::size_t c = 0; c < csv.header.size(); ++c) {
        const auto it = role_of.find(csv.header[c]);
        const std::string role = it == role_of.end() ? "descriptor" : it->second;
        if (role == "descriptor") desc_cols.push_back(c);
        else if (role == "target") target_cols.push_back(c);
        else if (role == "class") {
            if (class_col) throw schema_error("only one class column is allowed");
            class_col = c;
        } else if (role == "id") {
            if (id_col) throw schema_error("only one id column is allowed");
            id_col = c;
        }
    }
    if (desc_cols.empty()) throw schema_error("data table needs at least one descriptor column");

    auto infer_numeric = [&](std::size_t c) {
        const auto hint = type_of.find(csv.header[c]);
        if (hint != type_of.end()) return hint->second == ColumnType::numeric;
        for (const auto& row : csv.rows)
            if (!parse_double(row.fields[c])) return false;
        return true;
    };

    table.d = desc_cols.size();
    table.columns.resize(table.n * table.d);
    std::vector<std::map<std::string, std::size_t>> codes(table.d);
    table.categories.resize(table.d);
    for (std::size_t q = 0; q < desc_cols.size(); ++q) {
        const std::size_t c = desc_cols[q];
        table.column_names.push_back(csv.header[c]);
        const bool numeric = infer_numeric(c);
        table.column_types.push_back(numeric ? ColumnType::numeric : ColumnType::nominal);
        for (std::size_t i = 0; i < table.n; ++i) {
            const std::string& v = csv.rows[i].fields[c];
            if (numeric) {
                const auto x = parse_double(v);
                if (!x) throw schema_error("non-numeric value '" + v + "' in column " +
                                           csv.header[c]);
                table.columns[i * table.d + q] = *x;
            } else {
                auto [it2, inserted] = codes[q].try_emplace(v, table.categories[q].size());
                if (inserted) table.categories[q].push_back(v);
                table.columns[i * table.d + q] = static_cast<double>(it2->second);
            }
        }
    }
    for (std::size_t c : target_cols) {
        table.target_names.push_back(csv.header[c]);
    }
    table.targets.resize(table.n * target_cols.size());
    for (std::size_t i = 0; i < table.n; ++i) {
        for (std::size_t q = 0; q < target_cols.size(); ++q) {
            const std::string& v = csv.rows[i].fields[target_cols[q]];
            const auto x = parse_double(v);
            if (!x) throw schema_error("non-numeric target value '" + v + "'");
            table.targets[i * target_cols.size() + q] = *x;
        }
    }
    if (class_col) {
        table.class_name = csv.header[*class_col];
        std::map<std::string, std::size_t> cc;
        for (std::size_t i = 0; i < table.n; ++i) {
            const std::string& v = csv.rows[i].fields[*class_col];
            auto [it2, inserted] = cc.try_emplace(v, table.class_values.size());
            if (inserted) table.class_values.push_back(v);
            table.class_of.push_back(it2->second);
        }
    }
    if (id_col) {
        for (std::size_t i = 0; i < table.n; ++i)
            table.row_ids.push_back(csv.rows[i].fields[*id_col]);
    }
    table.validate();
    return table;
}

} // namespace mlcmeta::pct
