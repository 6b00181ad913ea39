#pragma once

#include <cstdlib>
#include <string>
#include <vector>

#include "mlcmeta/dataset.hpp"
#include "mlcmeta/rng.hpp"

namespace testutil {

inline std::string data_dir() {
    const char* env = std::getenv("MLCMETA_DATA");
    return env ? env : "data";
}

inline std::string fixture(const std::string& name) {
    return data_dir() + "/fixtures/" + name;
}

inline std::string cli_path() {
    const char* env = std::getenv("MLCMETA_CLI");
    return env ? env : "";
}

// Random MLC dataset of exact shape with mixed column types, optional
// missing feature values and at least one positive label cell.
inline mlcmeta::core::MlcDataset random_dataset_exact(mlcmeta::Rng& rng, std::size_t n,
                                                      std::size_t l, std::size_t d,
                                                      bool allow_missing = false) {
    using namespace mlcmeta::core;
    MlcDataset ds;
    ds.name = "random";
    ds.n = n;
    ds.d = d;
    ds.l = l;

    for (std::size_t j = 0; j < ds.d; ++j) {
        ds.feature_names.push_back("f" + std::to_string(j));
        if (rng.next_below(3) == 0) {
            ds.feature_types.push_back(FeatureType::nominal);
            const std::size_t k = 2 + rng.next_below(3);
            std::vector<std::string> cats;
            for (std::size_t c = 0; c < k; ++c) cats.push_back("c" + std::to_string(c));
            ds.categories.push_back(cats);
        } else {
            ds.feature_types.push_back(FeatureType::numeric);
            ds.categories.emplace_back();
        }
    }
    for (std::size_t j = 0; j < ds.l; ++j) ds.label_names.push_back("l" + std::to_string(j));

    ds.features.resize(ds.n * ds.d);
    for (std::size_t i = 0; i < ds.n; ++i) {
        for (std::size_t j = 0; j < ds.d; ++j) {
            if (allow_missing && rng.next_below(12) == 0) {
                ds.features[i * ds.d + j] = MlcDataset::missing();
            } else if (ds.feature_types[j] == FeatureType::nominal) {
                ds.features[i * ds.d + j] =
                    static_cast<double>(rng.next_below(ds.categories[j].size()));
            } else {
                // quantized values so that ties occur
                ds.features[i * ds.d + j] =
                    static_cast<double>(rng.next_below(200)) / 20.0 - 5.0;
            }
        }
    }

    ds.labels.resize(ds.n * ds.l);
    std::vector<double> p(ds.l);
    for (std::size_t j = 0; j < ds.l; ++j)
        p[j] = 0.1 + 0.8 * rng.next_unit();
    for (std::size_t i = 0; i < ds.n; ++i)
        for (std::size_t j = 0; j < ds.l; ++j)
            ds.labels[i * ds.l + j] = rng.next_unit() < p[j] ? 1 : 0;

    // the imbalance features need at least one positive cell
    bool any = false;
    for (auto v : ds.labels) any = any || v;
    if (!any) ds.labels[rng.next_below(ds.labels.size())] = 1;
    ds.validate();
    return ds;
}

// Random dataset with sizes drawn up to the given bounds.
inline mlcmeta::core::MlcDataset random_dataset(mlcmeta::Rng& rng, std::size_t max_n = 30,
                                                std::size_t max_l = 5, std::size_t max_d = 4,
                                                bool allow_missing = true) {
    const std::size_t n = 1 + rng.next_below(max_n);
    const std::size_t l = 2 + rng.next_below(max_l - 1);
    const std::size_t d = 1 + rng.next_below(max_d);
    return random_dataset_exact(rng, n, l, d, allow_missing);
}

} // namespace testutil
