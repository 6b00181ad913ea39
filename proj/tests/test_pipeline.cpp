#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "mlcmeta/meta_pipeline.hpp"
#include "mlcmeta/rng.hpp"
#include "testutil.hpp"

using namespace mlcmeta;
using namespace mlcmeta::core;
using namespace mlcmeta::pipeline;

namespace {

MetaMatrix tiny_meta(std::size_t rows, std::vector<std::string> features,
                     std::vector<double> values) {
    MetaMatrix m;
    for (std::size_t i = 0; i < rows; ++i) m.dataset_names.push_back("d" + std::to_string(i));
    m.feature_names = std::move(features);
    m.values = std::move(values);
    return m;
}

} // namespace

TEST_CASE("assemble best-method labels on a hamming-loss table") {
    const auto meta = tiny_meta(3, {"f"}, {1.0, 2.0, 3.0});
    ResultsTable results;
    const char* methods[] = {"A", "B", "C"};
    const double scores[3][3] = {{0.1, 0.2, 0.3}, {0.5, 0.2, 0.4}, {0.9, 0.8, 0.7}};
    for (int d = 0; d < 3; ++d)
        for (int m = 0; m < 3; ++m)
            results.add_score("d" + std::to_string(d), methods[m], "hamming.loss", scores[d][m]);

    const auto md = assemble(meta, results, "hamming.loss", {"A", "B", "C"}, TargetKind::best,
                             Registry::defaults());
    REQUIRE(md.rows() == 3);
    CHECK(md.labels == std::vector<std::string>{"A", "B", "C"}); // per-row argmin
    CHECK(md.tie_flags == std::vector<bool>{false, false, false});
}

TEST_CASE("assemble tie handling and determinism") {
    const auto meta = tiny_meta(1, {"f"}, {1.0});
    ResultsTable results;
    results.add_score("d0", "Zeta", "F1.macro", 0.5);
    results.add_score("d0", "Alpha", "F1.macro", 0.5);
    const auto md = assemble(meta, results, "F1.macro", {"Zeta", "Alpha"}, TargetKind::best,
                             Registry::defaults());
    CHECK(md.labels[0] == "Alpha"); // lexicographically first among the tied
    CHECK(md.tie_flags[0] == true);

    const auto again = assemble(meta, results, "F1.macro", {"Zeta", "Alpha"}, TargetKind::best,
                                Registry::defaults());
    CHECK(again.labels == md.labels);
    CHECK(again.tie_flags == md.tie_flags);
}

TEST_CASE("assemble tune labels require a strict win") {
    const auto meta = tiny_meta(1, {"f"}, {1.0});
    ResultsTable results;
    // RFPCT is a reliable default; MLkNN is hyper-tuned
    results.add_score("d0", "RFPCT", "hamming.loss", 0.10);
    results.add_score("d0", "MLkNN", "hamming.loss", 0.10);
    const auto md = assemble(meta, results, "hamming.loss", {"RFPCT", "MLkNN"},
                             TargetKind::tune, Registry::defaults());
    CHECK(md.labels[0] == tune_label_defaults); // tie goes to the cheaper option

    ResultsTable better;
    better.add_score("d0", "RFPCT", "hamming.loss", 0.10);
    better.add_score("d0", "MLkNN", "hamming.loss", 0.05);
    const auto md2 = assemble(meta, better, "hamming.loss", {"RFPCT", "MLkNN"},
                              TargetKind::tune, Registry::defaults());
    CHECK(md2.labels[0] == tune_label_tuned);
}

TEST_CASE("assemble missing-cell handling") {
    const auto meta = tiny_meta(2, {"f"}, {1.0, 2.0});
    ResultsTable results;
    results.add_score("d0", "A", "F1.macro", 0.5);
    results.add_score("d0", "B", "F1.macro", 0.6);
    results.add_score("d1", "A", "F1.macro", 0.7); // d1/B missing

    SECTION("without allow-missing the assembly fails and names the cell") {
        try {
            assemble(meta, results, "F1.macro", {"A", "B"}, TargetKind::best,
                     Registry::defaults());
            FAIL("expected contract_error");
        } catch (const contract_error& e) {
            CHECK(std::string(e.what()).find("d1/B/F1.macro") != std::string::npos);
        }
    }
    SECTION("with allow-missing the row is dropped and reported") {
        AssembleReport report;
        const auto md = assemble(meta, results, "F1.macro", {"A", "B"}, TargetKind::best,
                                 Registry::defaults(), true, &report);
        CHECK(md.rows() == 1);
        CHECK(report.dropped_rows == std::vector<std::string>{"d1"});
        REQUIRE(report.missing_cells.size() == 1);
    }
}

TEST_CASE("argbest labels are invariant to positive scaling of a measure") {
    Rng rng(616);
    for (int it = 0; it < 30; ++it) {
        const std::size_t n_ds = 3 + rng.next_below(5);
        std::vector<double> vals;
        for (std::size_t i = 0; i < n_ds; ++i) vals.push_back(rng.next_unit());
        const auto meta = tiny_meta(n_ds, {"f"}, std::move(vals));
        ResultsTable base, scaled;
        const double c = 0.25 + rng.next_unit(); // positive scale
        for (std::size_t d = 0; d < n_ds; ++d) {
            for (const char* m : {"A", "B", "C"}) {
                const double s = rng.next_unit();
                base.add_score("d" + std::to_string(d), m, "F1.macro", s);
                scaled.add_score("d" + std::to_string(d), m, "F1.macro", s * c);
            }
        }
        const auto a = assemble(meta, base, "F1.macro", {"A", "B", "C"}, TargetKind::best,
                                Registry::defaults());
        const auto b = assemble(meta, scaled, "F1.macro", {"A", "B", "C"}, TargetKind::best,
                                Registry::defaults());
        CHECK(a.labels == b.labels);
    }
}

TEST_CASE("LOO baseline MAE on the worked toy") {
    // targets 0.2 / 0.4 / 0.6 with a constant descriptor: every tree is a
    // single leaf predicting the training mean
    MetaDataset md;
    md.kind = TargetKind::scores;
    md.measure = "F1.macro";
    md.dataset_names = {"a", "b", "c"};
    md.descriptor_names = {"f"};
    md.descriptors = {1.0, 1.0, 1.0};
    md.method_names = {"M"};
    md.score_targets = {0.2, 0.4, 0.6};

    const auto report = loo_evaluate(md, {}, 2);
    CHECK(report.baseline_mean_mae == Catch::Approx(0.2));
    for (const auto& per : report.per_f)
        CHECK(per.mean_mae == Catch::Approx(0.2));
    CHECK(report.chosen_f == 0.001); // all tied, smallest level wins
    CHECK_FALSE(report.notes.empty());
}

TEST_CASE("LOO with a constant target") {
    MetaDataset md;
    md.kind = TargetKind::scores;
    md.dataset_names = {"a", "b", "c", "d"};
    md.descriptor_names = {"f"};
    md.descriptors = {1.0, 2.0, 3.0, 4.0};
    md.method_names = {"M"};
    md.score_targets = {0.5, 0.5, 0.5, 0.5};
    const auto report = loo_evaluate(md, {}, 2);
    CHECK(report.baseline_mean_mae == 0.0);
    CHECK(report.per_f.front().mean_mae == 0.0);
}

TEST_CASE("LOO baseline matches the direct formula on random data") {
    Rng rng(717);
    for (int it = 0; it < 20; ++it) {
        const std::size_t rows = 3 + rng.next_below(8);
        MetaDataset md;
        md.kind = TargetKind::scores;
        md.descriptor_names = {"f"};
        md.method_names = {"M1", "M2"};
        for (std::size_t r = 0; r < rows; ++r) {
            md.dataset_names.push_back("d" + std::to_string(r));
            md.descriptors.push_back(rng.next_unit());
            md.score_targets.push_back(rng.next_unit());
            md.score_targets.push_back(rng.next_unit());
        }
        const auto report = loo_evaluate(md, {0.125}, 2);
        for (std::size_t k = 0; k < 2; ++k) {
            double expected = 0.0;
            for (std::size_t r = 0; r < rows; ++r) {
                double mean_rest = 0.0;
                for (std::size_t i = 0; i < rows; ++i)
                    if (i != r) mean_rest += md.score_targets[i * 2 + k];
                mean_rest /= static_cast<double>(rows - 1);
                expected += std::abs(md.score_targets[r * 2 + k] - mean_rest);
            }
            expected /= static_cast<double>(rows);
            CHECK(report.baseline_per_target_mae.at(md.method_names[k]) ==
                  Catch::Approx(expected).margin(1e-12));
        }
    }
}

TEST_CASE("perfectly separable classification meta-toy") {
    // label equals the sign of the descriptor; 10 rows
    MetaDataset md;
    md.kind = TargetKind::best;
    md.descriptor_names = {"f"};
    md.method_names = {"A", "B"};
    for (int r = 0; r < 10; ++r) {
        md.dataset_names.push_back("d" + std::to_string(r));
        const double v = r < 5 ? -1.0 - r : 1.0 + r;
        md.descriptors.push_back(v);
        md.labels.push_back(v < 0 ? "A" : "B");
        md.tie_flags.push_back(false);
    }
    const auto report = loo_evaluate(md, {}, 2);
    bool some_perfect = false;
    for (const auto& per : report.per_f) some_perfect = some_perfect || per.accuracy == 1.0;
    CHECK(some_perfect);
    CHECK(report.baseline_accuracy <= 0.5);
}

TEST_CASE("landscape annotation counts") {
    SECTION("single-leaf tree, three families, k_top 1") {
        // two datasets; constant meta feature forces a single leaf
        auto meta = tiny_meta(2, {"f", "g"}, {1.0, 5.0, 1.0, 5.0});
        ResultsTable results;
        // RFPCT (AA), EBRJ48 (PT.BR), RAkEL (PT.LP)
        results.add_score("d0", "RFPCT", "F1.macro", 0.9);
        results.add_score("d0", "EBRJ48", "F1.macro", 0.5);
        results.add_score("d0", "RAkEL", "F1.macro", 0.4);
        results.add_score("d1", "RFPCT", "F1.macro", 0.2);
        results.add_score("d1", "EBRJ48", "F1.macro", 0.8);
        results.add_score("d1", "RAkEL", "F1.macro", 0.3);
        CHECK_THROWS_AS(landscape(meta, results, {"F1.macro"}, 1, Registry::defaults()),
                        contract_error); // all meta features constant: no cluster space
        meta.values = {1.0, 5.0, 2.0, 6.0};
        const auto ls = landscape(meta, results, {"F1.macro"}, 1, Registry::defaults());
        REQUIRE(ls.leaves.size() == 1);
        const auto& counts = ls.leaves[0].family_counts.at("F1.macro");
        CHECK(counts.at("AA") == 1);    // d0 argbest RFPCT
        CHECK(counts.at("PT.BR") == 1); // d1 argbest EBRJ48
        CHECK(counts.count("PT.LP") == 0);
    }
    SECTION("k_top saturation counts every represented family everywhere") {
        const auto meta = tiny_meta(2, {"f"}, {1.0, 2.0});
        ResultsTable results;
        for (const char* d : {"d0", "d1"}) {
            results.add_score(d, "RFPCT", "F1.macro", 0.5);
            results.add_score(d, "EBRJ48", "F1.macro", 0.6);
        }
        const auto ls = landscape(meta, results, {"F1.macro"}, 10, Registry::defaults());
        std::size_t aa = 0, ptbr = 0;
        for (const auto& leaf : ls.leaves) {
            const auto& counts = leaf.family_counts.at("F1.macro");
            aa += counts.count("AA") ? counts.at("AA") : 0;
            ptbr += counts.count("PT.BR") ? counts.at("PT.BR") : 0;
        }
        CHECK(aa == 2);
        CHECK(ptbr == 2);
    }
    SECTION("lower-better measures rank on the argmin side") {
        const auto meta = tiny_meta(2, {"f"}, {1.0, 2.0});
        ResultsTable results;
        results.add_score("d0", "RFPCT", "hamming.loss", 0.1); // best
        results.add_score("d0", "EBRJ48", "hamming.loss", 0.5);
        results.add_score("d1", "RFPCT", "hamming.loss", 0.6);
        results.add_score("d1", "EBRJ48", "hamming.loss", 0.2); // best
        const auto ls = landscape(meta, results, {"hamming.loss"}, 1, Registry::defaults());
        std::size_t aa = 0, ptbr = 0;
        for (const auto& leaf : ls.leaves) {
            const auto& counts = leaf.family_counts.at("hamming.loss");
            aa += counts.count("AA") ? counts.at("AA") : 0;
            ptbr += counts.count("PT.BR") ? counts.at("PT.BR") : 0;
        }
        CHECK(aa == 1);
        CHECK(ptbr == 1);
    }
    SECTION("datasets absent from the results are excluded and reported") {
        const auto meta = tiny_meta(2, {"f"}, {1.0, 2.0});
        ResultsTable results;
        results.add_score("d0", "RFPCT", "F1.macro", 0.5);
        const auto ls = landscape(meta, results, {"F1.macro"}, 3, Registry::defaults());
        REQUIRE(ls.excluded_datasets.size() == 1);
        CHECK(ls.excluded_datasets[0] == "d1");
        // counts never exceed the leaf size
        for (const auto& leaf : ls.leaves)
            for (const auto& [measure, fam_counts] : leaf.family_counts)
                for (const auto& [fam, count] : fam_counts)
                    CHECK(count <= leaf.datasets.size());
    }
}

TEST_CASE("RSED marginals") {
    ResultsTable results;
    results.add_score("x", "m", "hamming.loss", 0.5); // scores irrelevant here
    results.add_success("d0", "m1", 10, 10);
    results.add_success("d1", "m1", 10, 5);
    results.add_success("d0", "m2", 10, 10);
    results.add_success("d1", "m2", 10, 0);
    results.add_success("d2", "m2", 0, 0); // excluded
    const auto r = rsed(results);
    CHECK(r.method_rsed.at("m1") == Catch::Approx(0.75));
    CHECK(r.ds_rsed.at("d1") == Catch::Approx(0.25));
    CHECK(r.ds_rsed.at("d0") == 1.0);
    REQUIRE(r.excluded.size() == 1);
    CHECK(r.excluded[0] == "d2/m2");

    // complete grid: grand mean of cells equals the mean of dsRSED
    double cell_sum = 0;
    for (const auto& [k, v] : r.cells) cell_sum += v;
    const double grand = cell_sum / static_cast<double>(r.cells.size());
    double ds_sum = 0;
    std::size_t ds_count = 0;
    for (const auto& [d, v] : r.ds_rsed) {
        if (d == "d2") continue;
        ds_sum += v;
        ++ds_count;
    }
    CHECK(grand == Catch::Approx(ds_sum / static_cast<double>(ds_count)));

    ResultsTable empty;
    CHECK_THROWS_AS(rsed(empty), contract_error);
}

TEST_CASE("relative improvement") {
    CHECK(relative_improvement(0.2, 0.2).value == 0.0);
    CHECK(relative_improvement(0.2, 0.0).value == 1.0);
    CHECK(relative_improvement(0.2, 0.1).value == Catch::Approx(0.5));
    const auto zero_default = relative_improvement(0.0, 0.0);
    CHECK(zero_default.value == 0.0);
    CHECK_FALSE(zero_default.flags.empty());
    const auto clamped = relative_improvement(0.1, 0.3);
    CHECK(clamped.value == 0.0);
    CHECK_FALSE(clamped.flags.empty());
    CHECK_THROWS_AS(relative_improvement(1.2, 0.1), contract_error);
}

TEST_CASE("improvement histograms") {
    SECTION("all-zero improvements spike in the first bin") {
        ResultsTable results;
        for (const char* d : {"d0", "d1", "d2"}) {
            results.add_score(d, "m", "hamming.loss.default", 0.2);
            results.add_score(d, "m", "hamming.loss.tuned", 0.2);
        }
        const auto h = improvement_histograms(results, "hamming.loss.default",
                                              "hamming.loss.tuned", 20);
        REQUIRE(h.methods.size() == 1);
        CHECK(h.methods[0].counts[0] == 3);
        CHECK(h.methods[0].skewness == 0.0);
    }
    SECTION("two bins split at one half with a right-closed last bin") {
        ResultsTable results;
        results.add_score("d0", "m", "hamming.loss.default", 0.2);
        results.add_score("d0", "m", "hamming.loss.tuned", 0.2); // improvement 0
        results.add_score("d1", "m", "hamming.loss.default", 0.2);
        results.add_score("d1", "m", "hamming.loss.tuned", 0.1); // improvement 0.5
        results.add_score("d2", "m", "hamming.loss.default", 0.2);
        results.add_score("d2", "m", "hamming.loss.tuned", 0.0); // improvement 1
        const auto h = improvement_histograms(results, "hamming.loss.default",
                                              "hamming.loss.tuned", 2);
        REQUIRE(h.methods.size() == 1);
        CHECK(h.methods[0].counts == std::vector<std::size_t>{1, 2});
    }
    SECTION("a method without tuned scores is omitted and reported") {
        ResultsTable results;
        results.add_score("d0", "m1", "hamming.loss.default", 0.2);
        results.add_score("d0", "m1", "hamming.loss.tuned", 0.1);
        results.add_score("d0", "m2", "hamming.loss.default", 0.2);
        const auto h = improvement_histograms(results, "hamming.loss.default",
                                              "hamming.loss.tuned", 4);
        REQUIRE(h.methods.size() == 1);
        CHECK(h.methods[0].method == "m1");
        CHECK_FALSE(h.excluded.empty());
    }
}

TEST_CASE("tune-or-not on the shipped fixture") {
    const auto meta = MetaMatrix::from_csv_file(testutil::fixture("meta_fixture.csv"));
    auto results = ResultsTable::scores_from_csv_file(testutil::fixture("results_fixture.csv"));
    const std::vector<std::string> methods = {"RFPCT", "RFDTBR", "EBRJ48", "MLkNN", "HOMER"};
    const auto r = tune_or_not(meta, results, "hamming.loss", Registry::defaults(), methods);
    // the fixture's reliable-defaults group always wins strictly
    for (const auto& lab : r.meta_dataset.labels) CHECK(lab == tune_label_defaults);
    CHECK(r.tree.node_count() == 1);
    CHECK(r.loo_accuracy == 1.0);
    CHECK_FALSE(r.loo_auroc.has_value());
    CHECK_FALSE(r.notes.empty());
}

TEST_CASE("tune-or-not with separable labels") {
    // synthetic: tuning wins exactly when the meta feature is negative
    MetaMatrix meta;
    meta.feature_names = {"f"};
    ResultsTable results;
    for (int r = 0; r < 10; ++r) {
        const std::string d = "d" + std::to_string(r);
        meta.dataset_names.push_back(d);
        const double v = r < 5 ? -2.0 - r : 2.0 + r;
        meta.values.push_back(v);
        const bool tuned_wins = v < 0;
        results.add_score(d, "RFPCT", "hamming.loss", 0.2);
        results.add_score(d, "MLkNN", "hamming.loss", tuned_wins ? 0.1 : 0.3);
    }
    const auto r = tune_or_not(meta, results, "hamming.loss", Registry::defaults(),
                               {"RFPCT", "MLkNN"});
    CHECK(r.loo_accuracy == 1.0);
    REQUIRE(r.loo_auroc.has_value());
    CHECK(*r.loo_auroc == 1.0);
    REQUIRE(r.loo_auprc.has_value());
    CHECK(*r.loo_auprc == 1.0);
}

TEST_CASE("tune-or-not contract error when a group is missing") {
    const auto meta = tiny_meta(3, {"f"}, {1.0, 2.0, 3.0});
    ResultsTable results;
    for (const char* d : {"d0", "d1", "d2"})
        results.add_score(d, "RFPCT", "hamming.loss", 0.2);
    try {
        tune_or_not(meta, results, "hamming.loss", Registry::defaults(), {"RFPCT"});
        FAIL("expected contract_error");
    } catch (const contract_error& e) {
        CHECK(std::string(e.what()).find("hyper-tuned") != std::string::npos);
    }
}

TEST_CASE("difference boxplot data") {
    ResultsTable results;
    // defaults: RFPCT; tuned: MLkNN
    results.add_score("d0", "RFPCT", "hamming.loss", 0.2);
    results.add_score("d0", "MLkNN", "hamming.loss", 0.15);
    results.add_score("d1", "RFPCT", "hamming.loss", 0.2);
    results.add_score("d1", "MLkNN", "hamming.loss", 0.2);
    results.add_score("d2", "RFPCT", "hamming.loss", 0.1);
    results.add_score("d2", "MLkNN", "hamming.loss", 0.2);
    const auto out = difference_boxplot_data(results, {"hamming.loss"}, Registry::defaults(),
                                             {"RFPCT", "MLkNN"});
    REQUIRE(out.size() == 1);
    const auto& s = out[0];
    REQUIRE(s.differences.size() == 3);
    // lower-better: positive means tuning helped
    CHECK(s.differences[0].second == Catch::Approx(0.05));
    CHECK(s.differences[1].second == 0.0);
    CHECK(s.differences[2].second == Catch::Approx(-0.1));
    CHECK(s.median == Catch::Approx(0.0));
}

TEST_CASE("meta matrix loader validates input") {
    std::istringstream in("dataset,f1\nd0,1.0\nd0,2.0\n");
    CHECK_THROWS_AS(MetaMatrix::from_csv(in), schema_error);
    std::istringstream bad("dataset,f1\nd0,abc\n");
    CHECK_THROWS_AS(MetaMatrix::from_csv(bad), schema_error);
}
