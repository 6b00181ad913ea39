#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "mlcmeta/catalogue.hpp"
#include "mlcmeta/dataset.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/stats.hpp"
#include "mlcmeta/text.hpp"

namespace mlcmeta::meta {

struct MetaFeatureParams {
    double dependence_alpha = 0.01;     // chi-square significance for L.RL.11/12
    std::size_t small_set_threshold = 2; // labelset size cutoff for L.RL.6
};

// Named feature values in catalogue order, plus provenance.
struct MetaFeatureVector {
    std::string dataset;
    std::string catalogue_version;
    std::vector<std::pair<std::string, double>> values;

    double at(const std::string& id) const {
        for (const auto& [k, v] : values)
            if (k == id) return v;
        throw contract_error("meta feature not present: " + id);
    }
};

// Partial result of one feature-family computation. Sentinel substitutions
// and excluded items are recorded in `diagnostics`.
struct PartialFeatures {
    std::map<std::string, double> values;
    std::vector<std::string> diagnostics;
};

namespace detail {

inline std::vector<std::size_t> label_counts(const core::MlcDataset& ds) {
    std::vector<std::size_t> counts(ds.l, 0);
    for (std::size_t i = 0; i < ds.n; ++i)
        for (std::size_t j = 0; j < ds.l; ++j) counts[j] += ds.label(i, j);
    return counts;
}

// Per-label inter-class imbalance ratio: IRLbl(l) = max_l' count(l') / count(l),
// defined only for labels with at least one positive example.
inline std::vector<double> irlbl(const std::vector<std::size_t>& counts) {
    std::size_t max_count = 0;
    for (std::size_t c : counts) max_count = std::max(max_count, c);
    std::vector<double> ir(counts.size(), 0.0);
    for (std::size_t j = 0; j < counts.size(); ++j)
        if (counts[j] > 0)
            ir[j] = static_cast<double>(max_count) / static_cast<double>(counts[j]);
    return ir;
}

inline std::vector<double> non_missing_column(const core::MlcDataset& ds, std::size_t j) {
    std::vector<double> xs;
    xs.reserve(ds.n);
    for (std::size_t i = 0; i < ds.n; ++i)
        if (!ds.feature_missing(i, j)) xs.push_back(ds.feature(i, j));
    return xs;
}

} // namespace detail

// D group: counts of instances/attributes/labels/labelsets and their
// products and ratios.
inline PartialFeatures compute_dimensionality(const core::MlcDataset& ds) {
    PartialFeatures out;
    const double n = static_cast<double>(ds.n);
    const double d = static_cast<double>(ds.d);
    const double l = static_cast<double>(ds.l);
    const auto ls_counts = core::labelset_counts(ds);
    const double distinct = static_cast<double>(ls_counts.size());
    double singletons = 0;
    for (const auto& [set, count] : ls_counts)
        if (count == 1) ++singletons;

    out.values["D.1"] = d;
    out.values["D.2"] = n;
    out.values["D.3"] = l;
    out.values["D.4"] = distinct;
    out.values["D.5"] = l * n * d;
    out.values["D.6"] = n / d;
    out.values["D.7"] = d / n;
    out.values["D.8"] = n / l;
    out.values["D.9"] = l / d;
    out.values["D.10"] = singletons / n;
    out.values["D.15"] = distinct / n;
    return out;
}

// A.SF + A.IT groups: statistical moments of numeric attributes, counts and
// instance ratios of both attribute kinds, entropy and gain ratio of nominal
// attributes. Per-attribute statistics ignore missing entries; attributes with
// no observed values are excluded from the aggregates.
inline PartialFeatures compute_attribute_stats(const core::MlcDataset& ds) {
    PartialFeatures out;
    const double n = static_cast<double>(ds.n);

    std::vector<double> means, stddevs, skews, kurts;
    std::vector<double> nominal_entropies;
    std::size_t n_numeric = 0, n_nominal = 0;
    std::vector<std::size_t> nominal_cols;

    for (std::size_t j = 0; j < ds.d; ++j) {
        const auto xs = detail::non_missing_column(ds, j);
        if (ds.feature_types[j] == core::FeatureType::numeric) {
            ++n_numeric;
            if (xs.empty()) {
                out.diagnostics.push_back("A.SF: attribute '" + ds.feature_names[j] +
                                          "' has no observed values; excluded");
                continue;
            }
            means.push_back(mean(xs));
            stddevs.push_back(population_stddev(xs));
            skews.push_back(population_skewness(xs));
            kurts.push_back(population_kurtosis(xs));
            if (population_variance(xs) == 0.0)
                out.diagnostics.push_back("A.SF: attribute '" + ds.feature_names[j] +
                                          "' is constant; skewness/kurtosis sentinel 0");
        } else {
            ++n_nominal;
            nominal_cols.push_back(j);
            if (xs.empty()) {
                out.diagnostics.push_back("A.IT: attribute '" + ds.feature_names[j] +
                                          "' has no observed values; excluded");
                continue;
            }
            std::vector<double> counts(ds.categories[j].size(), 0.0);
            for (double v : xs) counts[static_cast<std::size_t>(v)] += 1.0;
            nominal_entropies.push_back(entropy_from_counts(counts));
        }
    }

    auto aggregate = [&](const std::vector<double>& xs, const char* id) {
        if (xs.empty()) {
            out.diagnostics.push_back(std::string(id) + ": no contributing attributes; sentinel 0");
            return 0.0;
        }
        return mean(xs);
    };

    out.values["A.SF.1"] = static_cast<double>(n_numeric);
    out.values["A.SF.2"] = static_cast<double>(n_nominal);
    out.values["A.SF.3"] = aggregate(skews, "A.SF.3");
    out.values["A.SF.4"] = aggregate(means, "A.SF.4");
    out.values["A.SF.5"] = aggregate(stddevs, "A.SF.5");
    out.values["A.SF.6"] = aggregate(kurts, "A.SF.6");
    out.values["A.SF.7"] = static_cast<double>(n_numeric) / n;
    out.values["A.SF.8"] = static_cast<double>(n_nominal) / n;
    out.values["A.IT.1"] = aggregate(nominal_entropies, "A.IT.1");

    // A.IT.2: gain ratio needs a class variable. Defined as the mean over
    // labels of the mean over nominal attributes of
    //   (H(label) + H(attr) - H(attr,label)) / H(attr),
    // all entropies base 2 and computed on the rows where the attribute is
    // observed. Attributes with zero entropy contribute the sentinel 0.
    if (nominal_cols.empty()) {
        out.values["A.IT.2"] = 0.0;
        out.diagnostics.push_back("A.IT.2: no nominal attributes; sentinel 0");
    } else {
        double label_sum = 0.0;
        for (std::size_t y = 0; y < ds.l; ++y) {
            double attr_sum = 0.0;
            std::size_t attr_cnt = 0;
            for (std::size_t j : nominal_cols) {
                const std::size_t k = ds.categories[j].size();
                std::vector<double> attr_counts(k, 0.0);
                std::vector<double> joint_counts(k * 2, 0.0);
                double pos = 0.0, total = 0.0;
                for (std::size_t i = 0; i < ds.n; ++i) {
                    if (ds.feature_missing(i, j)) continue;
                    const auto code = static_cast<std::size_t>(ds.feature(i, j));
                    const auto lab = ds.label(i, y);
                    attr_counts[code] += 1.0;
                    joint_counts[code * 2 + lab] += 1.0;
                    pos += lab;
                    total += 1.0;
                }
                if (total == 0.0) continue; // attribute entirely missing
                ++attr_cnt;
                const double h_attr = entropy_from_counts(attr_counts);
                if (h_attr == 0.0) {
                    out.diagnostics.push_back("A.IT.2: attribute '" + ds.feature_names[j] +
                                              "' has zero entropy; gain-ratio term sentinel 0");
                    continue;
                }
                const double h_label = binary_entropy(pos / total);
                const double h_joint = entropy_from_counts(joint_counts);
                // information gain is non-negative and at most H(attr);
                // clamp away entropy rounding residue
                attr_sum += std::clamp((h_label + h_attr - h_joint) / h_attr, 0.0, 1.0);
            }
            if (attr_cnt > 0) label_sum += attr_sum / static_cast<double>(attr_cnt);
        }
        out.values["A.IT.2"] = label_sum / static_cast<double>(ds.l);
    }
    return out;
}

// L.DL.G group: cardinality, density, label-frequency summary, per-label
// entropies, and skewness/kurtosis of the per-example labelset sizes.
inline PartialFeatures compute_label_distribution(const core::MlcDataset& ds) {
    PartialFeatures out;
    const double n = static_cast<double>(ds.n);

    std::vector<double> sizes(ds.n, 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < ds.l; ++j) s += ds.label(i, j);
        sizes[i] = s;
    }
    const auto counts = detail::label_counts(ds);
    std::vector<double> freqs, entropies;
    for (std::size_t c : counts) {
        const double f = static_cast<double>(c) / n;
        freqs.push_back(f);
        entropies.push_back(binary_entropy(f));
    }

    const double cardinality = mean(sizes);
    out.values["L.DL.G.1"] = cardinality;
    out.values["L.DL.G.2"] = cardinality / static_cast<double>(ds.l);
    out.values["L.DL.G.3"] = mean(entropies);
    out.values["L.DL.G.4"] = population_skewness(sizes);
    out.values["L.DL.G.5"] = *std::max_element(entropies.begin(), entropies.end());
    out.values["L.DL.G.6"] = population_kurtosis(sizes);
    out.values["L.DL.G.7"] = *std::min_element(freqs.begin(), freqs.end());
    out.values["L.DL.G.8"] = mean(freqs);
    out.values["L.DL.G.9"] = *std::max_element(freqs.begin(), freqs.end());
    if (population_variance(sizes) == 0.0)
        out.diagnostics.push_back(
            "L.DL.G: all labelset sizes equal; skewness/kurtosis sentinel 0");
    return out;
}

// L.DL.I.* groups. Inter-class: IRLbl over labels with positives. Intra-class:
// per-label positives-vs-negatives ratio over labels with both classes, and
// per-labelset frequency ratios over the distinct labelsets.
inline PartialFeatures compute_imbalance(const core::MlcDataset& ds) {
    PartialFeatures out;
    const auto counts = detail::label_counts(ds);
    if (*std::max_element(counts.begin(), counts.end()) == 0)
        throw contract_error("imbalance features need at least one label with positives");

    const auto ir = detail::irlbl(counts);
    std::vector<double> ir_defined;
    for (std::size_t j = 0; j < ds.l; ++j) {
        if (counts[j] > 0) ir_defined.push_back(ir[j]);
        else
            out.diagnostics.push_back("L.DL.I.E: label '" + ds.label_names[j] +
                                      "' has no positives; IRLbl undefined, excluded");
    }
    out.values["L.DL.I.E.1"] = mean(ir_defined);
    out.values["L.DL.I.E.2"] = *std::max_element(ir_defined.begin(), ir_defined.end());
    out.values["L.DL.I.E.3"] = coefficient_of_variation(ir_defined);

    std::vector<double> intra;
    for (std::size_t j = 0; j < ds.l; ++j) {
        const auto pos = counts[j];
        const auto neg = ds.n - pos;
        if (pos == 0 || neg == 0) {
            out.diagnostics.push_back("L.DL.I.A: label '" + ds.label_names[j] +
                                      "' has a single class; intra-class IR undefined, excluded");
            continue;
        }
        intra.push_back(static_cast<double>(std::max(pos, neg)) /
                        static_cast<double>(std::min(pos, neg)));
    }
    if (intra.empty()) {
        out.values["L.DL.I.A.1"] = 0.0;
        out.values["L.DL.I.A.2"] = 0.0;
        out.values["L.DL.I.A.3"] = 0.0;
        out.diagnostics.push_back("L.DL.I.A: no label has both classes; sentinel 0");
    } else {
        out.values["L.DL.I.A.1"] = mean(intra);
        out.values["L.DL.I.A.2"] = *std::max_element(intra.begin(), intra.end());
        out.values["L.DL.I.A.3"] = coefficient_of_variation(intra);
    }

    const auto ls_counts = core::labelset_counts(ds);
    std::size_t ls_max = 0;
    for (const auto& [set, c] : ls_counts) ls_max = std::max(ls_max, c);
    std::vector<double> ls_ir;
    for (const auto& [set, c] : ls_counts)
        ls_ir.push_back(static_cast<double>(ls_max) / static_cast<double>(c));
    out.values["L.DL.I.A.4"] = mean(ls_ir);
    out.values["L.DL.I.A.5"] = *std::max_element(ls_ir.begin(), ls_ir.end());
    return out;
}

// L.RL group: labelset diversity, SCUMBLE, examples-per-labelset statistics,
// and the chi-square label-pair dependence counts.
inline PartialFeatures compute_relationships(const core::MlcDataset& ds,
                                             const MetaFeatureParams& params = {}) {
    if (!(params.dependence_alpha > 0.0 && params.dependence_alpha < 1.0))
        throw contract_error("dependence_alpha must lie in (0, 1)");
    PartialFeatures out;
    const double n = static_cast<double>(ds.n);
    const auto ls_counts = core::labelset_counts(ds);
    const double distinct = static_cast<double>(ls_counts.size());

    std::vector<double> per_set_counts;
    std::size_t small_sets = 0, ls_max = 0;
    for (const auto& [set, c] : ls_counts) {
        per_set_counts.push_back(static_cast<double>(c));
        if (c <= params.small_set_threshold) ++small_sets;
        ls_max = std::max(ls_max, c);
    }

    out.values["L.RL.1"] = distinct;
    // bound ratio against the 2^L labelset space; ldexp underflows gracefully
    // for label counts beyond double range
    out.values["L.RL.2"] = std::ldexp(distinct, -static_cast<int>(std::min<std::size_t>(ds.l, 4000)));
    out.values["L.RL.5"] = n / distinct;
    out.values["L.RL.6"] = static_cast<double>(small_sets) / distinct;
    out.values["L.RL.7"] = static_cast<double>(ls_max) / n;
    out.values["L.RL.8"] = population_stddev(per_set_counts);
    out.values["L.RL.9"] = population_skewness(per_set_counts);
    out.values["L.RL.10"] = population_kurtosis(per_set_counts);

    // SCUMBLE: per instance 1 - geometric(IRLbl)/arithmetic(IRLbl) over the
    // labels in its labelset; empty labelsets contribute 0. Instances whose
    // labels all share one IRLbl value are exactly 0 (geometric equals
    // arithmetic mean), which keeps the CV well-defined instead of amplifying
    // rounding residue.
    const auto counts = detail::label_counts(ds);
    const auto ir = detail::irlbl(counts);
    std::vector<double> scumble(ds.n, 0.0);
    for (std::size_t i = 0; i < ds.n; ++i) {
        double prod = 1.0, sum = 0.0;
        std::size_t k = 0;
        bool all_equal = true;
        double first = 0.0;
        for (std::size_t j = 0; j < ds.l; ++j) {
            if (ds.label(i, j)) {
                if (k == 0) first = ir[j];
                else if (ir[j] != first) all_equal = false;
                prod *= ir[j];
                sum += ir[j];
                ++k;
            }
        }
        if (k == 0 || all_equal) continue;
        const double geo = std::pow(prod, 1.0 / static_cast<double>(k));
        const double arith = sum / static_cast<double>(k);
        scumble[i] = std::clamp(1.0 - geo / arith, 0.0, 1.0);
    }
    out.values["L.RL.3"] = mean(scumble);
    out.values["L.RL.4"] = coefficient_of_variation(scumble);

    // Pairwise chi-square dependence on the 2x2 co-occurrence tables. Pairs
    // where either label is constant count as not dependent. Co-occurrence
    // counts come from the active labels of each instance, so the cost is
    // N * cardinality^2 + L^2 rather than L^2 * N.
    const double critical = chi_square_critical_1df(params.dependence_alpha);
    std::vector<std::size_t> cooc(ds.l * ds.l, 0);
    std::vector<std::size_t> active;
    for (std::size_t i = 0; i < ds.n; ++i) {
        active.clear();
        for (std::size_t j = 0; j < ds.l; ++j)
            if (ds.label(i, j)) active.push_back(j);
        for (std::size_t a = 0; a < active.size(); ++a)
            for (std::size_t b = a + 1; b < active.size(); ++b)
                ++cooc[active[a] * ds.l + active[b]];
    }
    std::size_t dependent = 0;
    for (std::size_t a = 0; a < ds.l; ++a) {
        for (std::size_t b = a + 1; b < ds.l; ++b) {
            if (counts[a] == 0 || counts[a] == ds.n) continue;
            if (counts[b] == 0 || counts[b] == ds.n) continue;
            const double n11 = static_cast<double>(cooc[a * ds.l + b]);
            const double n10 = static_cast<double>(counts[a]) - n11;
            const double n01 = static_cast<double>(counts[b]) - n11;
            const double n00 = n - n11 - n10 - n01;
            const double det = n11 * n00 - n10 * n01;
            const double denom = (n11 + n10) * (n01 + n00) * (n11 + n01) * (n10 + n00);
            const double chi2 = n * det * det / denom;
            if (chi2 > critical) ++dependent;
        }
    }
    const double pairs = static_cast<double>(ds.l) * static_cast<double>(ds.l - 1) / 2.0;
    out.values["L.RL.11"] = static_cast<double>(dependent);
    out.values["L.RL.12"] = static_cast<double>(dependent) / pairs;
    return out;
}

struct MetaFeatureResult {
    MetaFeatureVector vector;
    std::vector<std::string> diagnostics;
};

// Union of the family computations, in catalogue order. Deterministic; the
// result contains exactly the catalogue's identifiers and no NaNs.
inline MetaFeatureResult compute_all(const core::MlcDataset& ds,
                                     const FeatureCatalogue& catalogue = FeatureCatalogue::defaults(),
                                     const MetaFeatureParams& params = {}) {
    ds.validate();
    catalogue.validate();

    MetaFeatureResult result;
    std::map<std::string, double> merged;
    auto absorb = [&](PartialFeatures&& part) {
        for (auto& [id, v] : part.values) {
            if (!merged.emplace(id, v).second)
                throw contract_error("feature computed twice: " + id);
        }
        for (auto& d : part.diagnostics) result.diagnostics.push_back(std::move(d));
    };
    absorb(compute_dimensionality(ds));
    absorb(compute_attribute_stats(ds));
    absorb(compute_label_distribution(ds));
    absorb(compute_imbalance(ds));
    absorb(compute_relationships(ds, params));

    result.vector.dataset = ds.name;
    result.vector.catalogue_version = catalogue.version;
    for (const auto& entry : catalogue.entries) {
        const auto it = merged.find(entry.id);
        if (it == merged.end())
            throw contract_error("catalogue feature not computed: " + entry.id);
        if (std::isnan(it->second))
            throw contract_error("meta feature is NaN despite sentinel rules: " + entry.id);
        result.vector.values.emplace_back(entry.id, it->second);
    }
    return result;
}

} // namespace mlcmeta::meta
