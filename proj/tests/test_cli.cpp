#include <catch2/catch_amalgamated.hpp>

#include <nlohmann/json.hpp>

#include "mlcmeta/arff.hpp"
#include "mlcmeta/csv.hpp"
#include "mlcmeta/meta_features.hpp"
#include "subprocess.hpp"
#include "testutil.hpp"

using json = nlohmann::json;
using namespace testutil;

namespace {

std::string cli() {
    const std::string path = cli_path();
    REQUIRE_FALSE(path.empty());
    return path;
}

} // namespace

TEST_CASE("meta-features subcommand writes the full catalogue") {
    const auto dir = fresh_dir("mf");
    const int rc = run_command(cli() + " meta-features --dataset " + fixture("toy.arff") +
                                   " --labels 3 --out " + dir.string(),
                               dir);
    REQUIRE(rc == 0);

    const auto table = mlcmeta::read_csv_table_file((dir / "meta_features.csv").string());
    REQUIRE(table.header.size() == 51); // dataset + the 50 feature columns
    const auto cat = mlcmeta::meta::FeatureCatalogue::defaults();
    for (std::size_t i = 0; i < cat.entries.size(); ++i)
        CHECK(table.header[i + 1] == cat.entries[i].id);
    REQUIRE(table.rows.size() == 1);

    // the CSV values equal a direct library computation
    const auto ds = mlcmeta::core::parse_mulan_file(fixture("toy.arff"),
                                                    mlcmeta::core::LabelSpec::last_k(3));
    const auto expected = mlcmeta::meta::compute_all(ds);
    for (std::size_t i = 0; i < cat.entries.size(); ++i) {
        const double got = *mlcmeta::parse_double(table.rows[0].fields[i + 1]);
        CHECK(got == Catch::Approx(expected.vector.values[i].second).margin(1e-12));
    }

    // provenance comment embedded
    const auto raw = slurp(dir / "meta_features.csv");
    CHECK(raw.rfind("# provenance:", 0) == 0);
    const auto doc = json::parse(slurp(dir / "meta_features.json"));
    CHECK(doc.contains("provenance"));
    CHECK(doc["provenance"]["catalogue"] == mlcmeta::catalogue_version);
}

TEST_CASE("summarize prints the table-style statistics") {
    const auto dir = fresh_dir("sum");
    const int rc = run_command(cli() + " summarize --dataset " + fixture("abpm_train.arff") +
                                   " --labels 6 --out " + dir.string(),
                               dir);
    REQUIRE(rc == 0);
    const auto csv = slurp(dir / "summary.csv");
    CHECK(csv.find("0.6614") != std::string::npos);
    CHECK(csv.find("3.9683") != std::string::npos);
}

TEST_CASE("evaluate and pcut subcommands") {
    const auto dir = fresh_dir("ev");
    int rc = run_command(cli() + " evaluate --predictions " + fixture("predictions_toy.csv") +
                             " --train-cardinality 1.5 --out " + dir.string(),
                         dir);
    REQUIRE(rc == 0);
    const auto doc = json::parse(slurp(dir / "measures.json"));
    CHECK(doc["measures"].contains("hamming.loss"));
    CHECK(doc["measures"].contains("AUROC.micro"));

    const auto dir2 = fresh_dir("pcut");
    rc = run_command(cli() + " pcut --predictions " + fixture("predictions_toy.csv") +
                         " --train-cardinality 1.0 --out " + dir2.string(),
                     dir2);
    REQUIRE(rc == 0);
    const auto pdoc = json::parse(slurp(dir2 / "pcut.json"));
    CHECK(pdoc.contains("threshold"));
    CHECK(fs::exists(dir2 / "bipartition.csv"));
}

TEST_CASE("stratify subcommand is seed-deterministic") {
    const auto d1 = fresh_dir("st1"), d2 = fresh_dir("st2");
    const std::string base = cli() + " stratify --dataset " + fixture("abpm_train.arff") +
                             " --labels 6 --k 3 --seed 11 --out ";
    REQUIRE(run_command(base + d1.string(), d1) == 0);
    REQUIRE(run_command(base + d2.string(), d2) == 0);
    std::string mismatch;
    CHECK(same_tree_bytes(d1, d2, &mismatch));
    INFO(mismatch);

    // different seed may differ, but must still be a valid artifact
    const auto d3 = fresh_dir("st3");
    REQUIRE(run_command(cli() + " stratify --dataset " + fixture("abpm_train.arff") +
                            " --labels 6 --k 3 --seed 12 --out " + d3.string(),
                        d3) == 0);
    CHECK(fs::exists(d3 / "folds.csv"));
}

TEST_CASE("tree-learn and tree-predict round trip") {
    const auto dir = fresh_dir("tree");
    int rc = run_command(cli() + " tree-learn --data " + fixture("step_table.csv") + " --roles " +
                             fixture("step_table.roles") + " --mode mtr --min-leaf 1 --out " +
                             dir.string(),
                         dir);
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(dir / "tree.json"));
    REQUIRE(fs::exists(dir / "tree.txt"));
    REQUIRE(fs::exists(dir / "tree.dot"));

    const auto dir2 = fresh_dir("pred");
    rc = run_command(cli() + " tree-predict --tree " + (dir / "tree.json").string() + " --data " +
                         fixture("step_table.csv") + " --out " + dir2.string(),
                     dir2);
    REQUIRE(rc == 0);
    const auto table = mlcmeta::read_csv_table_file((dir2 / "predictions.csv").string());
    REQUIRE(table.rows.size() == 4);
    CHECK(table.rows[0].fields[2] == "0");
    CHECK(table.rows[3].fields[2] == "1");
}

TEST_CASE("perf-model classification run on the shipped fixture") {
    const auto dir = fresh_dir("pm");
    const int rc = run_command(cli() + " perf-model --meta " + fixture("meta_fixture.csv") +
                                   " --results " + fixture("results_fixture.csv") +
                                   " --measure F1.macro --methods RFPCT,RFDTBR,EBRJ48" +
                                   " --target best --out " + dir.string(),
                               dir);
    REQUIRE(rc == 0);
    const auto doc = json::parse(slurp(dir / "loo_report.json"));
    bool perfect = false;
    for (const auto& per : doc["per_f"])
        if (per["accuracy"].get<double>() == 1.0) perfect = true;
    CHECK(perfect);
    CHECK(doc["baseline"]["accuracy"].get<double>() < 1.0);
    CHECK(fs::exists(dir / "metadataset.csv"));
    CHECK(fs::exists(dir / "model_tree.json"));
}

TEST_CASE("usage and error exit codes") {
    const auto dir = fresh_dir("err");
    SECTION("unknown subcommand exits 2") {
        CHECK(run_command(cli() + " frobnicate", dir) == 2);
    }
    SECTION("unknown flag exits 2") {
        CHECK(run_command(cli() + " summarize --nope", dir) == 2);
    }
    SECTION("missing input file exits 1 with a JSON error and no artifacts") {
        const auto out = fresh_dir("err_out");
        const int rc = run_command(cli() + " summarize --dataset /nonexistent.arff --labels 3 " +
                                       "--out " + out.string(),
                                   dir);
        CHECK(rc == 1);
        const auto err = slurp(dir / "stderr.txt");
        CHECK(json::parse(err).contains("error"));
        CHECK_FALSE(fs::exists(out / "summary.csv"));
    }
    SECTION("schema errors exit 1 without partial artifacts") {
        const auto bad = fresh_dir("bad_in");
        std::ofstream f(bad / "bad.csv");
        f << "x,l1,l2\n1,2,0\n"; // label value 2
        f.close();
        const auto out = fresh_dir("err_out2");
        const int rc = run_command(cli() + " summarize --dataset " + (bad / "bad.csv").string() +
                                       " --csv-labels l1,l2 --out " + out.string(),
                                   dir);
        CHECK(rc == 1);
        CHECK_FALSE(fs::exists(out / "summary.csv"));
    }
}

TEST_CASE("evaluate accepts JSON prediction documents") {
    const auto dir = fresh_dir("evjson");
    std::ofstream f(dir / "preds.json");
    f << R"({"truth": [[1,0],[0,1]], "scores": [[0.9,0.2],[0.3,0.8]]})";
    f.close();
    const int rc = run_command(cli() + " evaluate --predictions " + (dir / "preds.json").string() +
                                   " --train-cardinality 1.0 --out " + dir.string(),
                               dir);
    REQUIRE(rc == 0);
    const auto doc = json::parse(slurp(dir / "measures.json"));
    CHECK(doc["measures"]["AUROC.micro"].get<double>() == 1.0);
    CHECK(doc["measures"]["hamming.loss"].get<double>() == 0.0);
}

TEST_CASE("classification tree through the CLI") {
    const auto dir = fresh_dir("clstree");
    std::ofstream data(dir / "iris_like.csv");
    data << "x,kind,species\n1,low,alpha\n2,low,alpha\n10,high,beta\n11,high,beta\n";
    data.close();
    std::ofstream roles(dir / "iris_like.roles");
    roles << "x descriptor numeric\nkind descriptor nominal\nspecies class\n";
    roles.close();
    int rc = run_command(cli() + " tree-learn --data " + (dir / "iris_like.csv").string() +
                             " --roles " + (dir / "iris_like.roles").string() +
                             " --mode classify --min-leaf 1 --out " + dir.string(),
                         dir);
    REQUIRE(rc == 0);

    // predictions on new rows, including an unseen nominal category
    std::ofstream newdata(dir / "new.csv");
    newdata << "x,kind\n1.5,low\n10.5,unseen\n";
    newdata.close();
    const auto out = fresh_dir("clspred");
    rc = run_command(cli() + " tree-predict --tree " + (dir / "tree.json").string() + " --data " +
                         (dir / "new.csv").string() + " --out " + out.string(),
                     dir);
    REQUIRE(rc == 0);
    const auto table = mlcmeta::read_csv_table_file((out / "predictions.csv").string());
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].fields[2] == "alpha");
    CHECK(table.rows[1].fields[2] == "beta");
}

TEST_CASE("CSV datasets and config files") {
    const auto dir = fresh_dir("csvds");
    std::ofstream data(dir / "mini.csv");
    data << "x1,color,l1,l2\n1.5,red,1,0\n2.5,blue,0,1\n3.5,red,1,1\n4.5,green,0,0\n";
    data.close();

    SECTION("CSV dataset input with --csv-labels") {
        const auto out = fresh_dir("csvds_out");
        const int rc = run_command(cli() + " meta-features --dataset " +
                                       (dir / "mini.csv").string() + " --csv-labels l1,l2 --out " +
                                       out.string(),
                                   dir);
        REQUIRE(rc == 0);
        const auto table = mlcmeta::read_csv_table_file((out / "meta_features.csv").string());
        REQUIRE(table.rows.size() == 1);
        CHECK(table.rows[0].fields[0] == "mini");
    }
    SECTION("TOML config file mirrors the flags") {
        const auto out = fresh_dir("cfg_out");
        std::ofstream cfg(dir / "run.toml");
        cfg << "[summarize]\ndataset = \"" << (dir / "mini.csv").string()
            << "\"\ncsv-labels = \"l1,l2\"\nout = \"" << out.string() << "\"\n";
        cfg.close();
        const int rc = run_command(cli() + " --config " + (dir / "run.toml").string() +
                                       " summarize",
                                   dir);
        REQUIRE(rc == 0);
        CHECK(fs::exists(out / "summary.csv"));
    }
}

TEST_CASE("help exits 0") {
    const auto dir = fresh_dir("help");
    CHECK(run_command(cli() + " --help", dir) == 0);
    CHECK(run_command(cli() + " meta-features --help", dir) == 0);
}
