#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>

#include "mlcmeta/arff.hpp"
#include "mlcmeta/meta_features.hpp"
#include "oracle_meta.hpp"
#include "testutil.hpp"

using namespace mlcmeta;
using namespace mlcmeta::core;
using namespace mlcmeta::meta;

namespace {

// dataset with one trivial numeric feature and the given label rows
MlcDataset labels_only(const std::vector<std::vector<int>>& rows) {
    MlcDataset ds;
    ds.name = "labels-only";
    ds.n = rows.size();
    ds.d = 1;
    ds.l = rows.front().size();
    ds.feature_names = {"x"};
    ds.feature_types = {FeatureType::numeric};
    ds.categories.resize(1);
    for (std::size_t j = 0; j < ds.l; ++j) ds.label_names.push_back("l" + std::to_string(j));
    for (std::size_t i = 0; i < ds.n; ++i) {
        ds.features.push_back(static_cast<double>(i));
        for (int v : rows[i]) ds.labels.push_back(static_cast<std::uint8_t>(v));
    }
    ds.validate();
    return ds;
}

const std::vector<std::vector<int>> toy_rows = {
    {1, 0, 0}, {1, 1, 0}, {0, 1, 1}, {0, 0, 0}}; // labelsets {1},{1,2},{2,3},{}

} // namespace

TEST_CASE("dimensionality features on the ABPM fixture") {
    const auto ds = parse_mulan_file(testutil::fixture("abpm_train.arff"), LabelSpec::last_k(6));
    const auto f = compute_dimensionality(ds).values;
    CHECK(f.at("D.1") == 33.0);
    CHECK(f.at("D.5") == 37422.0);
    CHECK(f.at("D.6") == Catch::Approx(5.727).margin(5e-4));
}

TEST_CASE("dimensionality on the toy labelsets") {
    const auto ds = labels_only(toy_rows);
    const auto f = compute_dimensionality(ds).values;
    CHECK(f.at("D.4") == 4.0);
    CHECK(f.at("D.15") == 1.0); // all labelsets distinct
    CHECK(f.at("D.10") == 1.0); // each occurs exactly once
}

TEST_CASE("single shared labelset") {
    const auto ds = labels_only({{1, 0}, {1, 0}, {1, 0}, {1, 0}, {1, 0}});
    const auto f = compute_dimensionality(ds).values;
    CHECK(f.at("D.4") == 1.0);
    CHECK(f.at("D.15") == Catch::Approx(1.0 / 5.0));
    CHECK(f.at("D.10") == 0.0); // the shared set occurs five times, never once
}

TEST_CASE("attribute statistics") {
    SECTION("mean of means with missing entries") {
        MlcDataset ds = labels_only({{1, 0}, {0, 1}, {1, 1}, {0, 0}});
        ds.d = 2;
        ds.feature_names = {"a", "b"};
        ds.feature_types = {FeatureType::numeric, FeatureType::numeric};
        ds.categories.resize(2);
        ds.features = {0, 1, 0, 3, 0, MlcDataset::missing(), 0, MlcDataset::missing()};
        ds.validate();
        const auto f = compute_attribute_stats(ds).values;
        CHECK(f.at("A.SF.4") == Catch::Approx(1.0)); // (0 + 2) / 2
    }
    SECTION("constant attribute contributes sentinel skewness and kurtosis") {
        MlcDataset ds = labels_only({{1, 0}, {0, 1}});
        ds.features = {5.0, 5.0};
        const auto out = compute_attribute_stats(ds);
        CHECK(out.values.at("A.SF.3") == 0.0);
        CHECK(out.values.at("A.SF.6") == 0.0);
        CHECK_FALSE(out.diagnostics.empty());
    }
    SECTION("uniform nominal attribute has two bits of entropy") {
        MlcDataset ds = labels_only({{1, 0}, {0, 1}, {1, 1}, {0, 0}});
        ds.feature_types = {FeatureType::nominal};
        ds.categories = {{"a", "b", "c", "d"}};
        ds.features = {0, 1, 2, 3};
        ds.validate();
        const auto f = compute_attribute_stats(ds).values;
        CHECK(f.at("A.IT.1") == Catch::Approx(2.0));
    }
}

TEST_CASE("label distribution features") {
    const auto ds = labels_only(toy_rows);
    const auto f = compute_label_distribution(ds).values;
    CHECK(f.at("L.DL.G.1") == Catch::Approx(1.25));
    CHECK(f.at("L.DL.G.2") == Catch::Approx(0.41667).margin(5e-6));
    // l2 is present in exactly half the examples: entropy 1, and no label can
    // exceed it
    CHECK(f.at("L.DL.G.5") == Catch::Approx(1.0));

    const auto constant = labels_only({{1, 0}, {0, 1}, {1, 0}});
    const auto g = compute_label_distribution(constant).values;
    CHECK(g.at("L.DL.G.6") == 0.0); // all labelset sizes equal: sentinel
}

TEST_CASE("imbalance features") {
    SECTION("worked IRLbl example: counts 2,2,1") {
        const auto ds = labels_only({{1, 1, 0}, {1, 1, 0}, {0, 0, 1}});
        const auto f = compute_imbalance(ds).values;
        CHECK(f.at("L.DL.I.E.1") == Catch::Approx(4.0 / 3.0));
        CHECK(f.at("L.DL.I.E.2") == Catch::Approx(2.0));
    }
    SECTION("perfectly balanced labels") {
        const auto ds = labels_only({{1, 0}, {0, 1}});
        const auto f = compute_imbalance(ds).values;
        CHECK(f.at("L.DL.I.E.1") == 1.0);
        CHECK(f.at("L.DL.I.E.3") == 0.0);
    }
    SECTION("intra-class ratio for a 9-of-10 label") {
        std::vector<std::vector<int>> rows(10, {1, 0});
        rows[9] = {0, 1};
        const auto f = compute_imbalance(labels_only(rows)).values;
        CHECK(f.at("L.DL.I.A.2") == Catch::Approx(9.0));
    }
    SECTION("zero-positive label is excluded and reported") {
        const auto out = compute_imbalance(labels_only({{1, 0}, {1, 0}}));
        CHECK(out.values.at("L.DL.I.E.1") == 1.0);
        REQUIRE_FALSE(out.diagnostics.empty());
    }
    SECTION("all labels empty violates the precondition") {
        MlcDataset ds = labels_only({{1, 0}, {1, 0}});
        ds.labels = {0, 0, 0, 0};
        CHECK_THROWS_AS(compute_imbalance(ds), contract_error);
    }
}

TEST_CASE("relationship features") {
    SECTION("equal label frequencies give SCUMBLE 0") {
        const auto ds = labels_only({{1, 0}, {0, 1}, {1, 0}, {0, 1}});
        const auto f = compute_relationships(ds).values;
        CHECK(f.at("L.RL.3") == 0.0);
        CHECK(f.at("L.RL.4") == 0.0);
    }
    SECTION("perfect co-occurrence is dependent at alpha 0.01") {
        // 20 examples with both labels, 20 with neither: chi-square = 40
        std::vector<std::vector<int>> rows;
        for (int i = 0; i < 20; ++i) rows.push_back({1, 1});
        for (int i = 0; i < 20; ++i) rows.push_back({0, 0});
        const auto f = compute_relationships(labels_only(rows)).values;
        CHECK(f.at("L.RL.11") == 1.0);
        CHECK(f.at("L.RL.12") == 1.0);
    }
    SECTION("exact independence is not dependent") {
        // P(a,b) = P(a)P(b) on 4 examples
        const auto ds = labels_only({{1, 1}, {1, 0}, {0, 1}, {0, 0}});
        const auto f = compute_relationships(ds).values;
        CHECK(f.at("L.RL.11") == 0.0);
    }
    SECTION("toy labelset statistics") {
        const auto f = compute_relationships(labels_only(toy_rows)).values;
        CHECK(f.at("L.RL.1") == 4.0);
        CHECK(f.at("L.RL.2") == Catch::Approx(4.0 / 8.0));
        CHECK(f.at("L.RL.5") == 1.0);
        CHECK(f.at("L.RL.6") == 1.0); // every labelset has one example
        CHECK(f.at("L.RL.8") == 0.0);
    }
}

TEST_CASE("compute_all matches the toy hand oracle and the catalogue") {
    const auto ds = labels_only(toy_rows);
    const auto result = compute_all(ds);
    CHECK(result.vector.values.size() == 50);
    CHECK(result.vector.at("D.1") == 1.0);
    CHECK(result.vector.at("L.DL.G.2") == Catch::Approx(0.41667).margin(5e-6));

    const auto expected = oracle::meta_features(ds);
    for (const auto& [id, value] : result.vector.values) {
        INFO(id);
        CHECK(value == Catch::Approx(expected.at(id)).margin(1e-9));
        CHECK_FALSE(std::isnan(value));
    }

    // determinism: bitwise-identical repeat
    const auto again = compute_all(ds);
    REQUIRE(again.vector.values.size() == result.vector.values.size());
    for (std::size_t i = 0; i < result.vector.values.size(); ++i) {
        CHECK(again.vector.values[i].first == result.vector.values[i].first);
        CHECK(again.vector.values[i].second == result.vector.values[i].second);
    }
}

TEST_CASE("oracle agreement on random datasets") {
    Rng rng(777);
    const auto catalogue = FeatureCatalogue::defaults();
    for (int it = 0; it < 200; ++it) {
        const auto ds = testutil::random_dataset(rng, 30, 5, 4);
        const auto got = compute_all(ds, catalogue);
        const auto expected = oracle::meta_features(ds);
        REQUIRE(got.vector.values.size() == 50);
        for (const auto& [id, value] : got.vector.values) {
            INFO("iteration " << it << " feature " << id);
            REQUIRE(value == Catch::Approx(expected.at(id)).margin(1e-9));
        }
    }
}

TEST_CASE("range invariants on random datasets") {
    Rng rng(31337);
    const auto catalogue = FeatureCatalogue::defaults();
    for (int it = 0; it < 1000; ++it) {
        const auto ds = testutil::random_dataset(rng, 20, 5, 3);
        const auto got = compute_all(ds, catalogue);
        std::map<std::string, double> vals(got.vector.values.begin(), got.vector.values.end());
        for (const auto& entry : catalogue.entries) {
            const double v = vals.at(entry.id);
            INFO("iteration " << it << " feature " << entry.id << " = " << v);
            REQUIRE(v >= entry.lo);
            REQUIRE(v <= entry.hi);
        }
        // IRLbl-derived aggregates are at least 1 whenever defined
        REQUIRE(vals.at("L.DL.I.E.1") >= 1.0);
        REQUIRE(vals.at("L.DL.I.E.2") >= vals.at("L.DL.I.E.1"));
        REQUIRE(vals.at("L.RL.3") >= 0.0);
        REQUIRE(vals.at("L.RL.3") <= 1.0);
        // exact pair-count relation
        const double pairs = static_cast<double>(ds.l) * static_cast<double>(ds.l - 1) / 2.0;
        REQUIRE(vals.at("L.RL.12") == vals.at("L.RL.11") / pairs);
    }
}

TEST_CASE("permutation invariance of every feature") {
    Rng rng(4242);
    for (int it = 0; it < 20; ++it) {
        const auto ds = testutil::random_dataset(rng, 15, 4, 3);
        const auto base = compute_all(ds);

        // permute example order (rotate by one plus a swap)
        MlcDataset perm = ds;
        for (std::size_t j = 0; j < ds.d; ++j) {
            perm.features[0 * ds.d + j] = ds.feature(ds.n - 1, j);
            for (std::size_t i = 1; i < ds.n; ++i) perm.features[i * ds.d + j] = ds.feature(i - 1, j);
        }
        for (std::size_t j = 0; j < ds.l; ++j) {
            perm.labels[0 * ds.l + j] = ds.label(ds.n - 1, j);
            for (std::size_t i = 1; i < ds.n; ++i) perm.labels[i * ds.l + j] = ds.label(i - 1, j);
        }
        const auto rotated = compute_all(perm);
        for (std::size_t i = 0; i < base.vector.values.size(); ++i) {
            INFO("example order, feature " << base.vector.values[i].first);
            REQUIRE(rotated.vector.values[i].second ==
                    Catch::Approx(base.vector.values[i].second).margin(1e-9));
        }

        // permute label columns (reverse)
        MlcDataset rev = ds;
        std::reverse(rev.label_names.begin(), rev.label_names.end());
        for (std::size_t i = 0; i < ds.n; ++i)
            for (std::size_t j = 0; j < ds.l; ++j)
                rev.labels[i * ds.l + j] = ds.label(i, ds.l - 1 - j);
        const auto reversed = compute_all(rev);
        for (std::size_t i = 0; i < base.vector.values.size(); ++i) {
            INFO("label order, feature " << base.vector.values[i].first);
            REQUIRE(reversed.vector.values[i].second ==
                    Catch::Approx(base.vector.values[i].second).margin(1e-9));
        }
    }
}

TEST_CASE("duplicating every example") {
    Rng rng(5150);
    // invariant under duplication (population statistics of the same
    // distribution)
    const std::vector<std::string> unchanged = {
        "D.1", "D.3", "D.4", "D.9", "A.SF.1", "A.SF.2", "A.SF.3", "A.SF.4", "A.SF.5",
        "A.SF.6", "A.IT.1", "A.IT.2", "L.DL.G.1", "L.DL.G.2", "L.DL.G.3", "L.DL.G.4",
        "L.DL.G.5", "L.DL.G.6", "L.DL.G.7", "L.DL.G.8", "L.DL.G.9", "L.DL.I.A.1",
        "L.DL.I.A.2", "L.DL.I.A.3", "L.DL.I.A.4", "L.DL.I.A.5", "L.DL.I.E.1",
        "L.DL.I.E.2", "L.DL.I.E.3", "L.RL.1", "L.RL.2", "L.RL.3", "L.RL.4", "L.RL.7",
        "L.RL.9", "L.RL.10"};
    // pure counts and count scales double exactly
    const std::vector<std::string> doubled = {"D.2", "D.5", "D.6", "D.8", "L.RL.5", "L.RL.8"};

    for (int it = 0; it < 20; ++it) {
        const auto ds = testutil::random_dataset(rng, 12, 4, 3);
        MlcDataset dup = ds;
        dup.n = 2 * ds.n;
        dup.features.insert(dup.features.end(), ds.features.begin(), ds.features.end());
        dup.labels.insert(dup.labels.end(), ds.labels.begin(), ds.labels.end());
        dup.validate();

        const auto base = compute_all(ds);
        const auto twice = compute_all(dup);
        std::map<std::string, double> b(base.vector.values.begin(), base.vector.values.end());
        std::map<std::string, double> t(twice.vector.values.begin(), twice.vector.values.end());
        for (const auto& id : unchanged) {
            INFO(id);
            REQUIRE(t.at(id) == Catch::Approx(b.at(id)).margin(1e-9));
        }
        for (const auto& id : doubled) {
            INFO(id);
            REQUIRE(t.at(id) == Catch::Approx(2.0 * b.at(id)).margin(1e-9));
        }
    }
}

TEST_CASE("catalogue file round trip and shipped copy") {
    const auto cat = FeatureCatalogue::defaults();
    std::ostringstream out;
    cat.write(out);
    std::istringstream in(out.str());
    const auto back = FeatureCatalogue::parse(in);
    CHECK(back.version == cat.version);
    REQUIRE(back.entries.size() == cat.entries.size());
    for (std::size_t i = 0; i < cat.entries.size(); ++i) {
        CHECK(back.entries[i].id == cat.entries[i].id);
        CHECK(back.entries[i].group == cat.entries[i].group);
        CHECK(back.entries[i].lo == cat.entries[i].lo);
        CHECK(back.entries[i].hi == cat.entries[i].hi);
        CHECK(back.entries[i].provenance == cat.entries[i].provenance);
        CHECK(back.entries[i].name == cat.entries[i].name);
    }

    const auto shipped = FeatureCatalogue::parse_file(testutil::data_dir() + "/catalogue_v1.txt");
    CHECK(shipped.version == cat.version);
    REQUIRE(shipped.entries.size() == cat.entries.size());
    for (std::size_t i = 0; i < cat.entries.size(); ++i)
        CHECK(shipped.entries[i].id == cat.entries[i].id);
}

TEST_CASE("every taxonomy group is populated") {
    const auto cat = FeatureCatalogue::defaults();
    CHECK(cat.entries.size() == 50);
    CHECK_NOTHROW(cat.validate());
}
