#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "mlcmeta/csv.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/measures.hpp"
#include "mlcmeta/pct.hpp"
#include "mlcmeta/results.hpp"
#include "mlcmeta/stats.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::pipeline {

// Meta-feature matrix: one row per dataset, one numeric column per feature.
struct MetaMatrix {
    std::vector<std::string> dataset_names;
    std::vector<std::string> feature_names;
    std::vector<double> values; // rows x features

    double at(std::size_t row, std::size_t col) const {
        return values[row * feature_names.size() + col];
    }

    static MetaMatrix from_csv(std::istream& in) {
        const CsvTable table = read_csv_table(in);
        const std::size_t name_col = table.require("dataset");
        MetaMatrix m;
        for (std::size_t c = 0; c < table.header.size(); ++c)
            if (c != name_col) m.feature_names.push_back(table.header[c]);
        std::set<std::string> seen;
        for (const auto& row : table.rows) {
            const std::string& name = row.fields[name_col];
            if (!seen.insert(name).second)
                throw schema_error("duplicate dataset row in meta matrix: " + name);
            m.dataset_names.push_back(name);
            for (std::size_t c = 0; c < table.header.size(); ++c) {
                if (c == name_col) continue;
                const auto v = parse_double(row.fields[c]);
                if (!v || !std::isfinite(*v))
                    throw schema_error("non-numeric meta feature value '" + row.fields[c] +
                                       "' for dataset " + name);
                m.values.push_back(*v);
            }
        }
        if (m.dataset_names.empty()) throw schema_error("meta matrix has no rows");
        return m;
    }

    static MetaMatrix from_csv_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw parse_error("cannot open meta matrix: " + path);
        return from_csv(in);
    }
};

enum class TargetKind { scores, best, tune };

inline const char* to_string(TargetKind k) {
    switch (k) {
    case TargetKind::scores: return "scores";
    case TargetKind::best: return "best";
    default: return "tune";
    }
}

inline constexpr const char* tune_label_tuned = "hyper-tuned";
inline constexpr const char* tune_label_defaults = "reliable-defaults";

// Assembled meta-learning table: datasets as rows, meta features as
// descriptors, and one of three target layouts.
struct MetaDataset {
    TargetKind kind = TargetKind::scores;
    std::string measure;
    std::vector<std::string> dataset_names;
    std::vector<std::string> descriptor_names;
    std::vector<double> descriptors; // rows x descriptors

    std::vector<std::string> method_names; // scores: one target column per method
    std::vector<double> score_targets;     // rows x methods

    std::vector<std::string> labels; // best: winning method; tune: group label
    std::vector<bool> tie_flags;     // best: exact tie among methods

    std::size_t rows() const { return dataset_names.size(); }

    pct::DataTable to_table() const {
        pct::DataTable t;
        t.n = rows();
        t.d = descriptor_names.size();
        t.column_names = descriptor_names;
        t.column_types.assign(t.d, pct::ColumnType::numeric);
        t.categories.resize(t.d);
        t.columns = descriptors;
        t.row_ids = dataset_names;
        if (kind == TargetKind::scores) {
            t.target_names = method_names;
            t.targets = score_targets;
        } else {
            t.class_name = kind == TargetKind::best ? "best_method" : "tune_label";
            std::map<std::string, std::size_t> codes;
            for (const auto& lab : labels) {
                auto [it, inserted] = codes.try_emplace(lab, t.class_values.size());
                if (inserted) t.class_values.push_back(lab);
                t.class_of.push_back(it->second);
            }
        }
        t.validate();
        return t;
    }
};

struct AssembleReport {
    std::vector<std::string> missing_cells; // "dataset/method/measure"
    std::vector<std::string> dropped_rows;
    std::vector<std::string> notes;
};

// Builds the meta dataset for one measure. Missing score cells are listed in
// the report; rows with missing cells are dropped only when `allow_missing`
// is set, otherwise assembly fails.
inline MetaDataset assemble(const MetaMatrix& meta, const core::ResultsTable& results,
                            const std::string& measure,
                            const std::vector<std::string>& methods, TargetKind kind,
                            const core::Registry& registry, bool allow_missing = false,
                            AssembleReport* report = nullptr) {
    if (methods.empty()) throw contract_error("assemble needs a non-empty method list");
    const auto orientation = registry.orientation_of(measure);
    const bool higher = orientation == core::Orientation::higher_better;

    std::vector<std::string> defaults_group, tuned_group;
    if (kind == TargetKind::tune) {
        for (const auto& m : methods)
            (registry.is_reliable_default(m) ? defaults_group : tuned_group).push_back(m);
        if (defaults_group.empty())
            throw contract_error("tune labels need a non-empty reliable-defaults group");
        if (tuned_group.empty())
            throw contract_error("tune labels need a non-empty hyper-tuned group");
    }

    AssembleReport local;
    AssembleReport& rep = report ? *report : local;

    MetaDataset md;
    md.kind = kind;
    md.measure = measure;
    md.descriptor_names = meta.feature_names;
    md.method_names = methods;

    for (std::size_t r = 0; r < meta.dataset_names.size(); ++r) {
        const std::string& ds = meta.dataset_names[r];
        std::vector<double> scores(methods.size());
        bool complete = true;
        for (std::size_t m = 0; m < methods.size(); ++m) {
            const auto s = results.score(ds, methods[m], measure);
            if (!s) {
                rep.missing_cells.push_back(ds + "/" + methods[m] + "/" + measure);
                complete = false;
            } else {
                scores[m] = *s;
            }
        }
        if (!complete) {
            if (!allow_missing)
                continue; // reported; failure raised after the scan
            rep.dropped_rows.push_back(ds);
            continue;
        }

        md.dataset_names.push_back(ds);
        for (std::size_t c = 0; c < meta.feature_names.size(); ++c)
            md.descriptors.push_back(meta.at(r, c));

        if (kind == TargetKind::scores) {
            for (double s : scores) md.score_targets.push_back(s);
        } else if (kind == TargetKind::best) {
            std::size_t best = 0;
            for (std::size_t m = 1; m < methods.size(); ++m) {
                const bool better = higher ? scores[m] > scores[best] : scores[m] < scores[best];
                if (better) best = m;
            }
            // exact ties resolve to the lexicographically first method name
            std::vector<std::string> tied;
            for (std::size_t m = 0; m < methods.size(); ++m)
                if (scores[m] == scores[best]) tied.push_back(methods[m]);
            std::sort(tied.begin(), tied.end());
            md.labels.push_back(tied.front());
            md.tie_flags.push_back(tied.size() > 1);
            if (tied.size() > 1)
                rep.notes.push_back("tie on " + ds + " among: " + [&] {
                    std::string out;
                    for (const auto& t : tied) out += (out.empty() ? "" : ", ") + t;
                    return out;
                }());
        } else {
            auto group_best = [&](const std::vector<std::string>& group) {
                double best = 0.0;
                bool first = true;
                for (const auto& g : group) {
                    const double s = scores[static_cast<std::size_t>(
                        std::find(methods.begin(), methods.end(), g) - methods.begin())];
                    if (first || (higher ? s > best : s < best)) {
                        best = s;
                        first = false;
                    }
                }
                return best;
            };
            const double best_tuned = group_best(tuned_group);
            const double best_defaults = group_best(defaults_group);
            // tuning must strictly win to pay for itself
            const bool tuned_wins =
                higher ? best_tuned > best_defaults : best_tuned < best_defaults;
            md.labels.push_back(tuned_wins ? tune_label_tuned : tune_label_defaults);
            md.tie_flags.push_back(false);
        }
    }

    if (!allow_missing && !rep.missing_cells.empty()) {
        std::string msg = "missing score cells:";
        for (const auto& c : rep.missing_cells) msg += " " + c;
        throw contract_error(msg);
    }
    if (md.dataset_names.empty())
        throw contract_error("no complete rows available to assemble the meta dataset");
    return md;
}

// ---- leave-one-dataset-out evaluation ----------------------------------

struct LooReport {
    TargetKind kind = TargetKind::scores;
    std::vector<double> f_grid;
    std::size_t min_leaf = 2;

    struct PerF {
        double f_level = 0.0;
        std::map<std::string, double> per_target_mae; // MTR
        double mean_mae = 0.0;                        // MTR
        double accuracy = 0.0;                        // classification
    };
    std::vector<PerF> per_f;

    std::map<std::string, double> baseline_per_target_mae; // MTR
    double baseline_mean_mae = 0.0;                        // MTR
    double baseline_accuracy = 0.0;                        // classification

    double chosen_f = 0.0;
    std::vector<std::string> notes;
};

inline const std::vector<double>& default_f_grid() {
    static const std::vector<double> grid = {0.001, 0.01, 0.05, 0.1, 0.125};
    return grid;
}

// For every F-test level: learn on all rows but one, predict the held-out
// row; report per-target MAE (multi-target regression) or accuracy
// (classification). The baseline predicts per-target training means or the
// training majority class on the identical folds. The chosen level minimizes
// the mean error, ties toward the smallest level.
inline LooReport loo_evaluate(const MetaDataset& md, std::vector<double> f_grid,
                              std::size_t min_leaf = 2) {
    if (md.rows() < 3) throw contract_error("leave-one-out needs at least 3 rows");
    if (f_grid.empty()) f_grid = default_f_grid();
    std::sort(f_grid.begin(), f_grid.end());

    const pct::DataTable table = md.to_table();
    const bool mtr = md.kind == TargetKind::scores;
    const std::size_t n = table.n;

    LooReport report;
    report.kind = md.kind;
    report.f_grid = f_grid;
    report.min_leaf = min_leaf;

    std::vector<std::vector<std::size_t>> train_rows(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t i = 0; i < n; ++i)
            if (i != r) train_rows[r].push_back(i);

    // baseline on the identical LOO folds
    if (mtr) {
        const std::size_t t = table.t();
        std::vector<double> abs_err(t, 0.0);
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t k = 0; k < t; ++k) {
                double m = 0.0;
                for (std::size_t i : train_rows[r]) m += table.target(i, k);
                m /= static_cast<double>(n - 1);
                abs_err[k] += std::abs(table.target(r, k) - m);
            }
        }
        double total = 0.0;
        for (std::size_t k = 0; k < t; ++k) {
            report.baseline_per_target_mae[table.target_names[k]] =
                abs_err[k] / static_cast<double>(n);
            total += abs_err[k] / static_cast<double>(n);
        }
        report.baseline_mean_mae = total / static_cast<double>(t);
    } else {
        std::size_t correct = 0;
        for (std::size_t r = 0; r < n; ++r) {
            std::vector<std::size_t> counts(table.class_values.size(), 0);
            for (std::size_t i : train_rows[r]) ++counts[table.class_of[i]];
            const std::size_t majority = static_cast<std::size_t>(
                std::max_element(counts.begin(), counts.end()) - counts.begin());
            correct += majority == table.class_of[r];
        }
        report.baseline_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    }

    for (double f : f_grid) {
        LooReport::PerF per;
        per.f_level = f;
        const pct::LearnParams params{f, min_leaf};
        if (mtr) {
            const std::size_t t = table.t();
            std::vector<double> abs_err(t, 0.0);
            for (std::size_t r = 0; r < n; ++r) {
                const auto tree =
                    pct::learn(table.subset(train_rows[r]), pct::TreeMode::regression, params);
                const auto pred = pct::predict(tree, table.row(r));
                for (std::size_t k = 0; k < t; ++k)
                    abs_err[k] += std::abs(table.target(r, k) - pred.values[k]);
            }
            double total = 0.0;
            for (std::size_t k = 0; k < t; ++k) {
                per.per_target_mae[table.target_names[k]] = abs_err[k] / static_cast<double>(n);
                total += abs_err[k] / static_cast<double>(n);
            }
            per.mean_mae = total / static_cast<double>(t);
        } else {
            std::size_t correct = 0;
            for (std::size_t r = 0; r < n; ++r) {
                const auto tree = pct::learn(table.subset(train_rows[r]),
                                             pct::TreeMode::classification, params);
                const auto pred = pct::predict(tree, table.row(r));
                // the held-out class may be absent from the training subset;
                // compare by label text
                const std::string predicted = tree.class_values[pred.class_code];
                correct += predicted == table.class_values[table.class_of[r]];
            }
            per.accuracy = static_cast<double>(correct) / static_cast<double>(n);
        }
        report.per_f.push_back(std::move(per));
    }

    std::size_t chosen = 0;
    auto error_of = [&](const LooReport::PerF& p) {
        return mtr ? p.mean_mae : 1.0 - p.accuracy;
    };
    for (std::size_t i = 1; i < report.per_f.size(); ++i)
        if (error_of(report.per_f[i]) < error_of(report.per_f[chosen])) chosen = i;
    report.chosen_f = report.per_f[chosen].f_level;

    if (mtr) {
        bool all_equal = true;
        for (const auto& p : report.per_f)
            if (p.mean_mae != report.baseline_mean_mae) all_equal = false;
        if (all_equal)
            report.notes.push_back("model error equals the baseline at every level "
                                   "(degenerate or mean-predicting trees)");
    }
    return report;
}

// ---- landscape clustering ----------------------------------------------

struct LeafAnnotation {
    std::size_t leaf = 0;               // node index in the tree
    std::vector<std::string> datasets;  // cluster members
    // measure -> family -> number of member datasets with >= 1 family method
    // in the top-k for that measure
    std::map<std::string, std::map<std::string, std::size_t>> family_counts;
};

struct LandscapeResult {
    pct::Tree tree;
    std::vector<LeafAnnotation> leaves;
    std::vector<std::string> excluded_datasets;
    std::vector<std::string> notes;
};

// Divisive clustering of the meta matrix, with per-leaf distributions of the
// method families appearing in the top-k methods per measure.
inline LandscapeResult landscape(const MetaMatrix& meta, const core::ResultsTable& results,
                                 const std::vector<std::string>& measures, std::size_t k_top,
                                 const core::Registry& registry,
                                 const pct::LearnParams& params = {}) {
    if (measures.empty()) throw contract_error("landscape needs at least one measure");
    if (k_top < 1) throw contract_error("k_top must be at least 1");

    pct::DataTable table;
    table.n = meta.dataset_names.size();
    table.d = meta.feature_names.size();
    table.column_names = meta.feature_names;
    table.column_types.assign(table.d, pct::ColumnType::numeric);
    table.categories.resize(table.d);
    table.columns = meta.values;
    table.row_ids = meta.dataset_names;
    table.validate();

    LandscapeResult out;
    out.tree = pct::learn(table, pct::TreeMode::clustering, params);
    out.notes.push_back("top-k semantics: a family is counted when at least one of its "
                        "methods ranks in the top-" +
                        std::to_string(k_top) + " for the dataset and measure");

    const std::vector<std::string> methods(results.methods().begin(), results.methods().end());
    std::set<std::string> excluded;

    // leaf membership of every training row
    std::map<std::size_t, std::vector<std::string>> members_of;
    for (std::size_t i = 0; i < table.n; ++i) {
        const auto pred = pct::predict(out.tree, table.row(i));
        members_of[pred.leaf].push_back(meta.dataset_names[i]);
    }

    for (const auto& [leaf, datasets] : members_of) {
        LeafAnnotation ann;
        ann.leaf = leaf;
        ann.datasets = datasets;
        for (const auto& measure : measures) {
            const bool higher =
                registry.orientation_of(measure) == core::Orientation::higher_better;
            auto& counts = ann.family_counts[measure];
            for (const auto& ds : datasets) {
                // rank the methods scored for this dataset and measure
                std::vector<std::pair<double, std::string>> ranked;
                for (const auto& m : methods)
                    if (const auto s = results.score(ds, m, measure)) ranked.emplace_back(*s, m);
                if (ranked.empty()) {
                    excluded.insert(ds);
                    continue;
                }
                std::sort(ranked.begin(), ranked.end(), [&](const auto& a, const auto& b) {
                    if (a.first != b.first) return higher ? a.first > b.first : a.first < b.first;
                    return a.second < b.second;
                });
                std::set<std::string> families;
                for (std::size_t r = 0; r < std::min(k_top, ranked.size()); ++r)
                    families.insert(core::to_string(registry.family_of(ranked[r].second)));
                for (const auto& fam : families) ++counts[fam];
            }
        }
        out.leaves.push_back(std::move(ann));
    }
    // meta-matrix datasets entirely absent from the results
    for (const auto& ds : meta.dataset_names)
        if (!results.datasets().count(ds)) excluded.insert(ds);
    out.excluded_datasets.assign(excluded.begin(), excluded.end());
    return out;
}

// ---- RSED ---------------------------------------------------------------

struct RsedResult {
    std::map<std::pair<std::string, std::string>, double> cells; // (dataset, method)
    std::map<std::string, double> method_rsed; // marginal mean over datasets
    std::map<std::string, double> ds_rsed;     // marginal mean over methods
    std::vector<std::string> excluded;         // attempted == 0 cells
};

inline RsedResult rsed(const core::ResultsTable& results) {
    if (!results.has_success_log())
        throw contract_error("RSED needs success-log rows (dataset,method,attempted,finished)");
    RsedResult out;
    std::map<std::string, std::pair<double, std::size_t>> by_method, by_dataset;
    for (const auto& [key, cell] : results.success_log()) {
        if (cell.attempted == 0) {
            out.excluded.push_back(key.first + "/" + key.second);
            continue;
        }
        const double r = static_cast<double>(cell.finished) / static_cast<double>(cell.attempted);
        out.cells[key] = r;
        auto& m = by_method[key.second];
        m.first += r;
        ++m.second;
        auto& d = by_dataset[key.first];
        d.first += r;
        ++d.second;
    }
    for (const auto& [m, acc] : by_method)
        out.method_rsed[m] = acc.first / static_cast<double>(acc.second);
    for (const auto& [d, acc] : by_dataset)
        out.ds_rsed[d] = acc.first / static_cast<double>(acc.second);
    return out;
}

// ---- hyperparameter-tuning improvement ----------------------------------

struct Improvement {
    double value = 0.0;
    std::vector<std::string> flags;
};

// (default - tuned) / default. A zero default loss yields 0 with a flag
// (nothing to improve); a tuned loss above the default clamps to 0 with a
// flag.
inline Improvement relative_improvement(double default_loss, double tuned_loss) {
    if (!(default_loss >= 0.0 && default_loss <= 1.0) ||
        !(tuned_loss >= 0.0 && tuned_loss <= 1.0))
        throw contract_error("losses must lie in [0,1]");
    Improvement out;
    if (default_loss == 0.0) {
        out.flags.push_back("default loss is 0; improvement defined as 0");
        return out;
    }
    if (tuned_loss > default_loss) {
        out.flags.push_back("tuned loss exceeds default; clamped to 0");
        return out;
    }
    out.value = (default_loss - tuned_loss) / default_loss;
    return out;
}

struct MethodHistogram {
    std::string method;
    std::vector<std::size_t> counts; // bins over [0,1]; final bin right-closed
    double skewness = 0.0;
    std::size_t n = 0;
    std::vector<std::string> flags;
};

struct HistogramsResult {
    std::size_t bins = 20;
    std::string default_measure, tuned_measure;
    std::vector<MethodHistogram> methods;
    std::vector<std::string> excluded; // datasets/methods without both cells
};

// Per-method histograms of the relative hamming-loss improvement across
// datasets. The default/tuned scores arrive as two measure names in the
// results table.
inline HistogramsResult improvement_histograms(const core::ResultsTable& results,
                                               const std::string& default_measure,
                                               const std::string& tuned_measure,
                                               std::size_t bins = 20) {
    if (bins < 1) throw contract_error("histogram needs at least one bin");
    HistogramsResult out;
    out.bins = bins;
    out.default_measure = default_measure;
    out.tuned_measure = tuned_measure;
    for (const auto& method : results.methods()) {
        MethodHistogram h;
        h.method = method;
        h.counts.assign(bins, 0);
        std::vector<double> values;
        for (const auto& ds : results.datasets()) {
            const auto d = results.score(ds, method, default_measure);
            const auto t = results.score(ds, method, tuned_measure);
            if (!d && !t) continue; // method/dataset pair not in this study slice
            if (!d || !t) {
                out.excluded.push_back(ds + "/" + method);
                continue;
            }
            auto imp = relative_improvement(*d, *t);
            for (auto& f : imp.flags) h.flags.push_back(ds + ": " + f);
            values.push_back(imp.value);
            const std::size_t bin =
                std::min(bins - 1, static_cast<std::size_t>(imp.value * static_cast<double>(bins)));
            ++h.counts[bin];
        }
        if (values.empty()) {
            out.excluded.push_back(method + ": no usable default/tuned score pairs");
            continue;
        }
        h.n = values.size();
        h.skewness = population_skewness(values);
        out.methods.push_back(std::move(h));
    }
    return out;
}

// ---- tune or not ---------------------------------------------------------

struct TuneResult {
    MetaDataset meta_dataset;
    pct::Tree tree; // learned on all rows
    double loo_accuracy = 0.0;
    double baseline_accuracy = 0.0;
    std::optional<double> loo_auroc, loo_auprc;
    AssembleReport assemble_report;
    std::vector<std::string> notes;
};

namespace detail {

// Average precision (step-wise interpolation) of scores against binary truth.
inline double average_precision(std::vector<std::pair<double, std::uint8_t>> cells) {
    std::sort(cells.begin(), cells.end(), [](const auto& a, const auto& b) {
        return a.first > b.first;
    });
    std::size_t total_pos = 0;
    for (const auto& [s, t] : cells) total_pos += t;
    if (total_pos == 0) throw undefined_measure_error("AUPRC needs at least one positive");
    double ap = 0.0;
    std::size_t tp = 0, seen = 0, prev_tp = 0;
    std::size_t i = 0;
    while (i < cells.size()) {
        std::size_t j = i;
        while (j < cells.size() && cells[j].first == cells[i].first) ++j;
        for (std::size_t k = i; k < j; ++k) tp += cells[k].second;
        seen = j;
        const double precision = static_cast<double>(tp) / static_cast<double>(seen);
        const double recall_step =
            static_cast<double>(tp - prev_tp) / static_cast<double>(total_pos);
        ap += recall_step * precision;
        prev_tp = tp;
        i = j;
    }
    return ap;
}

} // namespace detail

// Labels every dataset "hyper-tuned" or "reliable-defaults" from the results,
// learns the classification tree, and reports leave-one-out accuracy plus
// AUROC/AUPRC from the leaves' positive-class proportions.
inline TuneResult tune_or_not(const MetaMatrix& meta, const core::ResultsTable& results,
                              const std::string& measure, const core::Registry& registry,
                              const std::vector<std::string>& methods,
                              const pct::LearnParams& params = {}, bool allow_missing = false) {
    TuneResult out;
    out.meta_dataset = assemble(meta, results, measure, methods, TargetKind::tune, registry,
                                allow_missing, &out.assemble_report);
    const pct::DataTable table = out.meta_dataset.to_table();
    out.tree = pct::learn(table, pct::TreeMode::classification, params);

    if (table.n < 3) throw contract_error("tune-or-not needs at least 3 datasets");

    std::size_t correct = 0, baseline_correct = 0;
    std::vector<std::pair<double, std::uint8_t>> cells; // (tuned-score, is-tuned)
    for (std::size_t r = 0; r < table.n; ++r) {
        std::vector<std::size_t> train;
        for (std::size_t i = 0; i < table.n; ++i)
            if (i != r) train.push_back(i);
        const auto sub = table.subset(train);
        const auto tree = pct::learn(sub, pct::TreeMode::classification, params);
        const auto pred = pct::predict(tree, table.row(r));
        const std::string predicted = tree.class_values[pred.class_code];
        const std::string truth = table.class_values[table.class_of[r]];
        correct += predicted == truth;

        std::vector<std::size_t> counts(sub.class_values.size(), 0);
        for (std::size_t code : sub.class_of) ++counts[code];
        const std::size_t majority = static_cast<std::size_t>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        baseline_correct += sub.class_values[majority] == truth;

        // positive-class ("hyper-tuned") proportion in the reached leaf
        double score = 0.0;
        for (std::size_t c = 0; c < tree.class_values.size(); ++c)
            if (tree.class_values[c] == tune_label_tuned) score = pred.class_distribution[c];
        cells.emplace_back(score, truth == tune_label_tuned ? 1 : 0);
    }
    out.loo_accuracy = static_cast<double>(correct) / static_cast<double>(table.n);
    out.baseline_accuracy = static_cast<double>(baseline_correct) / static_cast<double>(table.n);

    std::size_t positives = 0;
    for (const auto& [s, t] : cells) positives += t;
    if (positives == 0 || positives == cells.size()) {
        out.notes.push_back("single-class tune labels; AUROC/AUPRC undefined");
    } else {
        out.loo_auroc = eval::detail::rank_auc(cells);
        out.loo_auprc = detail::average_precision(cells);
    }
    return out;
}

// ---- tuned-vs-defaults difference data -----------------------------------

struct DifferenceSummary {
    std::string measure;
    std::vector<std::pair<std::string, double>> differences; // dataset -> adjusted diff
    double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
    std::vector<std::string> excluded;
};

// Per measure and dataset: best hyper-tuned score minus best reliable-defaults
// score, sign-adjusted so that positive always means tuning helped.
inline std::vector<DifferenceSummary>
difference_boxplot_data(const core::ResultsTable& results,
                        const std::vector<std::string>& measures,
                        const core::Registry& registry,
                        const std::vector<std::string>& methods) {
    std::vector<std::string> defaults_group, tuned_group;
    for (const auto& m : methods)
        (registry.is_reliable_default(m) ? defaults_group : tuned_group).push_back(m);
    if (defaults_group.empty() || tuned_group.empty())
        throw contract_error("difference data needs both method groups to be non-empty");

    std::vector<DifferenceSummary> out;
    for (const auto& measure : measures) {
        DifferenceSummary summary;
        summary.measure = measure;
        const bool higher =
            registry.orientation_of(measure) == core::Orientation::higher_better;
        for (const auto& ds : results.datasets()) {
            auto group_best = [&](const std::vector<std::string>& group) -> std::optional<double> {
                std::optional<double> best;
                for (const auto& m : group) {
                    const auto s = results.score(ds, m, measure);
                    if (!s) continue;
                    if (!best || (higher ? *s > *best : *s < *best)) best = *s;
                }
                return best;
            };
            const auto bt = group_best(tuned_group);
            const auto bd = group_best(defaults_group);
            if (!bt || !bd) {
                summary.excluded.push_back(ds);
                continue;
            }
            const double diff = higher ? *bt - *bd : *bd - *bt;
            summary.differences.emplace_back(ds, diff);
        }
        if (!summary.differences.empty()) {
            std::vector<double> values;
            for (const auto& [ds, v] : summary.differences) values.push_back(v);
            summary.min = quantile_linear(values, 0.0);
            summary.q1 = quantile_linear(values, 0.25);
            summary.median = quantile_linear(values, 0.5);
            summary.q3 = quantile_linear(values, 0.75);
            summary.max = quantile_linear(values, 1.0);
        }
        out.push_back(std::move(summary));
    }
    return out;
}

} // namespace mlcmeta::pipeline
