#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <vector>

#include "mlcmeta/csv.hpp"
#include "mlcmeta/dataset.hpp"
#include "mlcmeta/error.hpp"
#include "mlcmeta/rng.hpp"

namespace mlcmeta::stratify {

struct FoldAssignment {
    std::vector<std::size_t> fold_of; // fold index per example
    std::size_t k = 0;
    std::uint64_t seed = 0;
};

namespace detail {

// Core of the iterative stratification algorithm over arbitrary fold ratios.
//
// strata[s] lists the examples carrying stratum s (for per-label quotas a
// stratum is a label; for labelset quotas it is a distinct labelset). The
// desired per-fold capacities are c_j = N * ratio_j and the per-fold
// per-stratum quotas d_{j,s} = |stratum s| * ratio_j. Repeatedly the stratum
// with the fewest remaining unassigned examples is processed: each of its
// unassigned examples goes to the fold with the largest remaining quota
// d_{j,s}, ties to the largest remaining capacity c_j, remaining ties are
// broken by the seeded generator. Examples in no stratum are distributed by
// remaining capacity at the end.
inline std::vector<std::size_t> assign_by_ratios(std::size_t n,
                                                 const std::vector<std::vector<std::size_t>>& strata,
                                                 const std::vector<double>& ratios,
                                                 Rng& rng) {
    const std::size_t k = ratios.size();
    std::vector<double> capacity(k);
    for (std::size_t j = 0; j < k; ++j) capacity[j] = static_cast<double>(n) * ratios[j];

    // quota[j][s]
    std::vector<std::vector<double>> quota(k, std::vector<double>(strata.size()));
    for (std::size_t j = 0; j < k; ++j)
        for (std::size_t s = 0; s < strata.size(); ++s)
            quota[j][s] = static_cast<double>(strata[s].size()) * ratios[j];

    // per example: the strata it belongs to
    std::vector<std::vector<std::size_t>> strata_of(n);
    for (std::size_t s = 0; s < strata.size(); ++s)
        for (std::size_t i : strata[s]) strata_of[i].push_back(s);

    std::vector<bool> assigned(n, false);
    std::vector<std::size_t> fold_of(n, 0);
    std::vector<std::size_t> remaining(strata.size());
    for (std::size_t s = 0; s < strata.size(); ++s) remaining[s] = strata[s].size();

    auto pick_fold = [&](std::size_t stratum) {
        std::vector<std::size_t> best;
        double best_q = -1.0;
        for (std::size_t j = 0; j < k; ++j) {
            if (quota[j][stratum] > best_q) {
                best_q = quota[j][stratum];
                best.assign(1, j);
            } else if (quota[j][stratum] == best_q) {
                best.push_back(j);
            }
        }
        if (best.size() > 1) {
            std::vector<std::size_t> cap_best;
            double best_c = -1.0;
            for (std::size_t j : best) {
                if (capacity[j] > best_c) {
                    best_c = capacity[j];
                    cap_best.assign(1, j);
                } else if (capacity[j] == best_c) {
                    cap_best.push_back(j);
                }
            }
            best = std::move(cap_best);
        }
        if (best.size() > 1) return best[rng.next_below(best.size())];
        return best[0];
    };

    auto assign = [&](std::size_t example, std::size_t fold) {
        assigned[example] = true;
        fold_of[example] = fold;
        capacity[fold] -= 1.0;
        for (std::size_t s : strata_of[example]) {
            quota[fold][s] -= 1.0;
            --remaining[s];
        }
    };

    for (;;) {
        // stratum with the fewest remaining unassigned examples; ties to the
        // lowest stratum index
        std::size_t chosen = strata.size();
        for (std::size_t s = 0; s < strata.size(); ++s) {
            if (remaining[s] == 0) continue;
            if (chosen == strata.size() || remaining[s] < remaining[chosen]) chosen = s;
        }
        if (chosen == strata.size()) break;
        for (std::size_t i : strata[chosen]) {
            if (assigned[i]) continue;
            assign(i, pick_fold(chosen));
        }
    }

    // stratum-free examples go by remaining capacity
    for (std::size_t i = 0; i < n; ++i) {
        if (assigned[i]) continue;
        std::vector<std::size_t> best;
        double best_c = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < k; ++j) {
            if (capacity[j] > best_c) {
                best_c = capacity[j];
                best.assign(1, j);
            } else if (capacity[j] == best_c) {
                best.push_back(j);
            }
        }
        const std::size_t fold = best.size() > 1 ? best[rng.next_below(best.size())] : best[0];
        assign(i, fold);
    }
    return fold_of;
}

inline std::vector<std::vector<std::size_t>> label_strata(const core::MlcDataset& ds) {
    std::vector<std::vector<std::size_t>> strata(ds.l);
    for (std::size_t i = 0; i < ds.n; ++i)
        for (std::size_t j = 0; j < ds.l; ++j)
            if (ds.label(i, j)) strata[j].push_back(i);
    return strata;
}

inline std::vector<std::vector<std::size_t>> labelset_strata(const core::MlcDataset& ds) {
    std::map<std::vector<std::uint8_t>, std::vector<std::size_t>> groups;
    std::vector<std::uint8_t> row(ds.l);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < ds.l; ++j) row[j] = ds.label(i, j);
        groups[row].push_back(i);
    }
    std::vector<std::vector<std::size_t>> strata;
    strata.reserve(groups.size());
    for (auto& [set, members] : groups) strata.push_back(std::move(members));
    return strata;
}

} // namespace detail

// Iterative stratified k-fold assignment (per-label quotas). Deterministic
// for a given (dataset, k, seed).
inline FoldAssignment iterative_stratified_folds(const core::MlcDataset& ds, std::size_t k,
                                                 std::uint64_t seed) {
    if (k < 2) throw contract_error("stratification needs k >= 2");
    if (k > ds.n) throw contract_error("stratification needs k <= number of examples");
    Rng rng(seed);
    const std::vector<double> ratios(k, 1.0 / static_cast<double>(k));
    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.fold_of = detail::assign_by_ratios(ds.n, detail::label_strata(ds), ratios, rng);
    return fa;
}

// Stratified subsample of exactly m examples: runs the fold algorithm with
// target ratios (m/N, 1-m/N) and returns the first part, trimmed or padded to
// exactly m from the majority-labelset examples (quota rounding can leave the
// part one off). Returned indices are sorted.
inline std::vector<std::size_t> stratified_subsample(const core::MlcDataset& ds, std::size_t m,
                                                     std::uint64_t seed,
                                                     bool labelset_quotas = false) {
    if (m < 1 || m > ds.n) throw contract_error("subsample size must lie in [1, N]");
    Rng rng(seed);
    const double r = static_cast<double>(m) / static_cast<double>(ds.n);
    const std::vector<double> ratios = {r, 1.0 - r};
    const auto strata = labelset_quotas ? detail::labelset_strata(ds) : detail::label_strata(ds);
    const auto fold_of = detail::assign_by_ratios(ds.n, strata, ratios, rng);

    std::vector<std::size_t> selected;
    std::vector<bool> in_part(ds.n, false);
    for (std::size_t i = 0; i < ds.n; ++i) {
        if (fold_of[i] == 0) {
            selected.push_back(i);
            in_part[i] = true;
        }
    }

    if (selected.size() != m) {
        // majority labelset of the full dataset; ties to the lexicographically
        // smallest label row
        const auto counts = core::labelset_counts(ds);
        std::vector<std::uint8_t> majority;
        std::size_t majority_count = 0;
        for (const auto& [set, c] : counts) {
            if (c > majority_count) {
                majority = set;
                majority_count = c;
            }
        }
        auto has_majority_set = [&](std::size_t i) {
            for (std::size_t j = 0; j < ds.l; ++j)
                if (ds.label(i, j) != majority[j]) return false;
            return true;
        };
        while (selected.size() > m) {
            // drop the highest-index selected majority-labelset example,
            // falling back to the highest-index selected example
            std::size_t drop = selected.size();
            for (std::size_t p = selected.size(); p-- > 0;) {
                if (has_majority_set(selected[p])) {
                    drop = p;
                    break;
                }
            }
            if (drop == selected.size()) drop = selected.size() - 1;
            in_part[selected[drop]] = false;
            selected.erase(selected.begin() + static_cast<std::ptrdiff_t>(drop));
        }
        while (selected.size() < m) {
            std::size_t add = ds.n;
            for (std::size_t i = 0; i < ds.n; ++i) {
                if (!in_part[i] && has_majority_set(i)) {
                    add = i;
                    break;
                }
            }
            if (add == ds.n) {
                for (std::size_t i = 0; i < ds.n; ++i)
                    if (!in_part[i]) {
                        add = i;
                        break;
                    }
            }
            in_part[add] = true;
            selected.push_back(add);
        }
        std::sort(selected.begin(), selected.end());
    }
    return selected;
}

inline void write_folds_csv(std::ostream& out, const FoldAssignment& fa) {
    write_csv_row(out, {"example_index", "fold"});
    for (std::size_t i = 0; i < fa.fold_of.size(); ++i)
        write_csv_row(out, {std::to_string(i), std::to_string(fa.fold_of[i])});
}

} // namespace mlcmeta::stratify
