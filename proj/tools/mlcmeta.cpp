// mlcmeta command-line toolkit: one subcommand per analysis scenario, batch
// style. Artifacts are assembled fully in memory and written only when the
// whole computation succeeded, so a failing run never leaves partial outputs.
// Every artifact embeds its run configuration, seed and catalogue version.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mlcmeta/mlcmeta.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace mlcmeta;

namespace {

struct RunContext {
    std::string subcommand;
    std::string out_dir = ".";
    std::uint64_t seed = 0;
    std::string catalogue_version_tag = mlcmeta::catalogue_version;
    std::map<std::string, std::string> options; // echoed into provenance

    std::vector<std::pair<std::string, std::string>> artifacts; // name -> content

    void option(const std::string& key, const std::string& value) { options[key] = value; }

    json provenance() const {
        json p;
        p["tool"] = "mlcmeta";
        p["version"] = library_version;
        p["subcommand"] = subcommand;
        p["seed"] = seed;
        p["catalogue"] = catalogue_version_tag;
        json opts = json::object();
        for (const auto& [k, v] : options) opts[k] = v;
        p["options"] = opts;
        return p;
    }

    std::string provenance_comment() const {
        return "# provenance: " + provenance().dump() + "\n";
    }

    void add_csv(const std::string& name, const std::string& body) {
        artifacts.emplace_back(name, provenance_comment() + body);
    }

    void add_json(const std::string& name, json doc) {
        doc["provenance"] = provenance();
        artifacts.emplace_back(name, doc.dump(2) + "\n");
    }

    // provenance as a comment line in the format's own comment syntax
    void add_text(const std::string& name, const std::string& body) {
        const bool dot = name.size() > 4 && name.substr(name.size() - 4) == ".dot";
        const std::string comment =
            (dot ? "// provenance: " : "# provenance: ") + provenance().dump() + "\n";
        artifacts.emplace_back(name, comment + body);
    }

    // flush to disk; only called after the computation finished
    void write_all() const {
        fs::create_directories(out_dir);
        for (const auto& [name, content] : artifacts) {
            const fs::path path = fs::path(out_dir) / name;
            std::ofstream out(path, std::ios::binary);
            if (!out) throw error("cannot write artifact: " + path.string());
            out << content;
            if (!out) throw error("failed while writing artifact: " + path.string());
        }
        for (const auto& [name, content] : artifacts)
            std::cout << "wrote " << (fs::path(out_dir) / name).string() << "\n";
    }
};

// ---- shared input helpers -------------------------------------------------

struct DatasetArgs {
    std::vector<std::string> paths;
    std::string labels;      // integer count or XML path (ARFF inputs)
    std::string csv_labels;  // comma-separated label column names (CSV inputs)
};

core::LabelSpec resolve_label_spec(const std::string& labels) {
    if (labels.empty()) throw contract_error("--labels is required for ARFF datasets");
    if (const auto k = parse_int(labels); k && *k > 0)
        return core::LabelSpec::last_k(static_cast<std::size_t>(*k));
    return core::LabelSpec::from_xml_file(labels);
}

core::MlcDataset load_dataset(const std::string& path, const DatasetArgs& args,
                              core::DatasetRole role) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : to_lower(path.substr(dot));
    if (ext == ".csv") {
        if (args.csv_labels.empty())
            throw contract_error("--csv-labels is required for CSV datasets");
        std::vector<std::string> names;
        for (auto& part : split(args.csv_labels, ','))
            if (!trim(part).empty()) names.push_back(std::string(trim(part)));
        return core::parse_csv_file(path, names, {}, role);
    }
    return core::parse_mulan_file(path, resolve_label_spec(args.labels), role);
}

core::Registry load_registry(const std::string& path) {
    return path.empty() ? core::Registry::defaults() : core::Registry::parse_file(path);
}

meta::FeatureCatalogue load_catalogue(const std::string& path) {
    return path.empty() ? meta::FeatureCatalogue::defaults()
                        : meta::FeatureCatalogue::parse_file(path);
}

std::vector<std::string> parse_name_list(const std::string& csv) {
    std::vector<std::string> out;
    for (auto& part : split(csv, ','))
        if (!trim(part).empty()) out.push_back(std::string(trim(part)));
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    for (auto& part : split(csv, ',')) {
        if (trim(part).empty()) continue;
        const auto v = parse_double(part);
        if (!v) throw contract_error("bad numeric list entry: " + part);
        out.push_back(*v);
    }
    return out;
}

eval::PredictionSet load_predictions(const std::string& path) {
    const auto dot = path.find_last_of('.');
    const std::string ext = dot == std::string::npos ? "" : to_lower(path.substr(dot));
    if (ext == ".json") {
        std::ifstream in(path);
        if (!in) throw parse_error("cannot open predictions file: " + path);
        json doc = json::parse(in, nullptr, true, true);
        eval::PredictionSet pred;
        const auto truth = doc.at("truth").get<std::vector<std::vector<int>>>();
        pred.truth.n = truth.size();
        pred.truth.l = truth.empty() ? 0 : truth.front().size();
        for (const auto& row : truth)
            for (int v : row) pred.truth.cells.push_back(static_cast<std::uint8_t>(v));
        if (doc.contains("scores")) {
            const auto scores = doc["scores"].get<std::vector<std::vector<double>>>();
            eval::ScoreMatrix m;
            m.n = scores.size();
            m.l = scores.empty() ? 0 : scores.front().size();
            for (const auto& row : scores)
                for (double v : row) m.cells.push_back(v);
            pred.scores = std::move(m);
        }
        if (doc.contains("bipartition")) {
            const auto bip = doc["bipartition"].get<std::vector<std::vector<int>>>();
            eval::BinaryMatrix m;
            m.n = bip.size();
            m.l = bip.empty() ? 0 : bip.front().size();
            for (const auto& row : bip)
                for (int v : row) m.cells.push_back(static_cast<std::uint8_t>(v));
            pred.bipartition = std::move(m);
        }
        pred.validate();
        return pred;
    }
    return eval::read_predictions_csv_file(path);
}

// ---- serialization helpers --------------------------------------------

std::string meta_vectors_to_csv(const meta::FeatureCatalogue& cat,
                                const std::vector<meta::MetaFeatureVector>& vectors) {
    std::ostringstream out;
    std::vector<std::string> header = {"dataset"};
    for (const auto& e : cat.entries) header.push_back(e.id);
    write_csv_row(out, header);
    for (const auto& v : vectors) {
        std::vector<std::string> row = {v.dataset};
        for (const auto& [id, value] : v.values) row.push_back(format_double(value));
        write_csv_row(out, row);
    }
    return out.str();
}

json catalogue_to_json(const meta::FeatureCatalogue& cat) {
    json entries = json::array();
    for (const auto& e : cat.entries) {
        json entry;
        entry["id"] = e.id;
        entry["group"] = e.group;
        entry["name"] = e.name;
        entry["provenance"] = e.provenance;
        entry["lo"] = std::isinf(e.lo) ? json() : json(e.lo);
        entry["hi"] = std::isinf(e.hi) ? json() : json(e.hi);
        entries.push_back(entry);
    }
    return json{{"version", cat.version}, {"entries", entries}};
}

std::string metadataset_to_csv(const pipeline::MetaDataset& md) {
    std::ostringstream out;
    std::vector<std::string> header = {"dataset"};
    for (const auto& d : md.descriptor_names) header.push_back(d);
    if (md.kind == pipeline::TargetKind::scores) {
        for (const auto& m : md.method_names) header.push_back("target." + m);
    } else if (md.kind == pipeline::TargetKind::best) {
        header.push_back("best_method");
        header.push_back("tie");
    } else {
        header.push_back("tune_label");
    }
    write_csv_row(out, header);
    const std::size_t d = md.descriptor_names.size();
    for (std::size_t r = 0; r < md.rows(); ++r) {
        std::vector<std::string> row = {md.dataset_names[r]};
        for (std::size_t c = 0; c < d; ++c) row.push_back(format_double(md.descriptors[r * d + c]));
        if (md.kind == pipeline::TargetKind::scores) {
            for (std::size_t m = 0; m < md.method_names.size(); ++m)
                row.push_back(format_double(md.score_targets[r * md.method_names.size() + m]));
        } else if (md.kind == pipeline::TargetKind::best) {
            row.push_back(md.labels[r]);
            row.push_back(md.tie_flags[r] ? "1" : "0");
        } else {
            row.push_back(md.labels[r]);
        }
        write_csv_row(out, row);
    }
    return out.str();
}

json metadataset_to_json(const pipeline::MetaDataset& md) {
    json doc;
    doc["target_kind"] = pipeline::to_string(md.kind);
    doc["measure"] = md.measure;
    doc["descriptors"] = md.descriptor_names;
    json rows = json::array();
    const std::size_t d = md.descriptor_names.size();
    for (std::size_t r = 0; r < md.rows(); ++r) {
        json row;
        row["dataset"] = md.dataset_names[r];
        json values = json::object();
        for (std::size_t c = 0; c < d; ++c)
            values[md.descriptor_names[c]] = md.descriptors[r * d + c];
        row["features"] = values;
        if (md.kind == pipeline::TargetKind::scores) {
            json targets = json::object();
            for (std::size_t m = 0; m < md.method_names.size(); ++m)
                targets[md.method_names[m]] = md.score_targets[r * md.method_names.size() + m];
            row["targets"] = targets;
        } else {
            row["label"] = md.labels[r];
            if (md.kind == pipeline::TargetKind::best) row["tie"] = static_cast<bool>(md.tie_flags[r]);
        }
        rows.push_back(row);
    }
    doc["rows"] = rows;
    return doc;
}

std::string loo_report_to_csv(const pipeline::LooReport& report) {
    std::ostringstream out;
    if (report.kind == pipeline::TargetKind::scores) {
        write_csv_row(out, {"f_level", "target", "mae"});
        for (const auto& p : report.per_f) {
            for (const auto& [target, mae] : p.per_target_mae)
                write_csv_row(out, {format_double(p.f_level), target, format_double(mae)});
            write_csv_row(out, {format_double(p.f_level), "mean", format_double(p.mean_mae)});
        }
        for (const auto& [target, mae] : report.baseline_per_target_mae)
            write_csv_row(out, {"baseline", target, format_double(mae)});
        write_csv_row(out, {"baseline", "mean", format_double(report.baseline_mean_mae)});
    } else {
        write_csv_row(out, {"f_level", "accuracy"});
        for (const auto& p : report.per_f)
            write_csv_row(out, {format_double(p.f_level), format_double(p.accuracy)});
        write_csv_row(out, {"baseline", format_double(report.baseline_accuracy)});
    }
    return out.str();
}

json loo_report_to_json(const pipeline::LooReport& report) {
    json doc;
    doc["target_kind"] = pipeline::to_string(report.kind);
    doc["f_grid"] = report.f_grid;
    doc["min_leaf"] = report.min_leaf;
    json per_f = json::array();
    for (const auto& p : report.per_f) {
        json e;
        e["f_level"] = p.f_level;
        if (report.kind == pipeline::TargetKind::scores) {
            e["per_target_mae"] = p.per_target_mae;
            e["mean_mae"] = p.mean_mae;
        } else {
            e["accuracy"] = p.accuracy;
        }
        per_f.push_back(e);
    }
    doc["per_f"] = per_f;
    if (report.kind == pipeline::TargetKind::scores) {
        doc["baseline"] = {{"per_target_mae", report.baseline_per_target_mae},
                           {"mean_mae", report.baseline_mean_mae}};
    } else {
        doc["baseline"] = {{"accuracy", report.baseline_accuracy}};
    }
    doc["chosen_f"] = report.chosen_f;
    doc["notes"] = report.notes;
    return doc;
}

json assemble_report_to_json(const pipeline::AssembleReport& rep) {
    return json{{"missing_cells", rep.missing_cells},
                {"dropped_rows", rep.dropped_rows},
                {"notes", rep.notes}};
}

std::string landscape_dot(const pipeline::LandscapeResult& result) {
    // tree DOT with family-count tables appended to the leaf labels
    std::map<std::size_t, const pipeline::LeafAnnotation*> by_leaf;
    for (const auto& leaf : result.leaves) by_leaf[leaf.leaf] = &leaf;
    std::ostringstream out;
    out << "digraph landscape {\n  node [shape=box];\n";
    for (std::size_t i = 0; i < result.tree.nodes.size(); ++i) {
        const auto& node = result.tree.nodes[i];
        std::string label;
        if (node.is_leaf()) {
            label = "cluster " + std::to_string(i) + " (n=" + std::to_string(node.n_rows) + ")";
            if (const auto it = by_leaf.find(i); it != by_leaf.end()) {
                for (const auto& [measure, counts] : it->second->family_counts) {
                    label += "\\n" + measure + ":";
                    for (const auto& [family, count] : counts)
                        label += " " + family + "=" + std::to_string(count);
                }
            }
        } else {
            label = node.split.numeric
                        ? result.tree.column_names[node.split.column] + " <= " +
                              format_double(node.split.threshold)
                        : result.tree.column_names[node.split.column] + " = " +
                              result.tree.categories[node.split.column][node.split.category];
        }
        std::string escaped;
        for (char c : label) {
            if (c == '"') escaped.push_back('\\');
            escaped.push_back(c);
        }
        out << "  n" << i << " [label=\"" << escaped << "\"];\n";
    }
    for (std::size_t i = 0; i < result.tree.nodes.size(); ++i) {
        const auto& node = result.tree.nodes[i];
        if (node.is_leaf()) continue;
        out << "  n" << i << " -> n" << node.left << " [label=\"yes\"];\n";
        out << "  n" << i << " -> n" << node.right << " [label=\"no\"];\n";
    }
    out << "}\n";
    return out.str();
}

json measure_report_to_json(const eval::MeasureReport& report) {
    json doc;
    doc["measures"] = report.measures;
    json counts = json::array();
    for (std::size_t j = 0; j < report.label_counts.size(); ++j) {
        const auto& c = report.label_counts[j];
        counts.push_back(json{{"label", j}, {"tp", c.tp}, {"fp", c.fp}, {"fn", c.fn}, {"tn", c.tn}});
    }
    doc["label_counts"] = counts;
    doc["notes"] = report.notes;
    return doc;
}

// ---- subcommand implementations -----------------------------------------

void run_meta_features(RunContext& ctx, const DatasetArgs& data, const std::string& catalogue_path,
                       double alpha, std::size_t small_set_threshold) {
    const auto catalogue = load_catalogue(catalogue_path);
    ctx.catalogue_version_tag = catalogue.version;
    meta::MetaFeatureParams params;
    params.dependence_alpha = alpha;
    params.small_set_threshold = small_set_threshold;

    std::vector<meta::MetaFeatureVector> vectors;
    json diags = json::object();
    for (const auto& path : data.paths) {
        const auto ds = load_dataset(path, data, core::DatasetRole::train);
        auto result = meta::compute_all(ds, catalogue, params);
        diags[result.vector.dataset] = result.diagnostics;
        vectors.push_back(std::move(result.vector));
    }
    ctx.add_csv("meta_features.csv", meta_vectors_to_csv(catalogue, vectors));

    json doc;
    doc["catalogue"] = catalogue_to_json(catalogue);
    doc["parameters"] = {{"dependence_alpha", params.dependence_alpha},
                         {"small_set_threshold", params.small_set_threshold}};
    json rows = json::array();
    for (const auto& v : vectors) {
        json row;
        row["dataset"] = v.dataset;
        json values = json::object();
        for (const auto& [id, value] : v.values) values[id] = value;
        row["features"] = values;
        rows.push_back(row);
    }
    doc["datasets"] = rows;
    doc["diagnostics"] = diags;
    ctx.add_json("meta_features.json", doc);
}

void run_summarize(RunContext& ctx, const DatasetArgs& data, const std::string& test_path) {
    if (data.paths.size() != 1)
        throw contract_error("summarize takes exactly one --dataset");
    const auto train = load_dataset(data.paths.front(), data, core::DatasetRole::train);
    std::optional<core::MlcDataset> test;
    if (!test_path.empty()) test = load_dataset(test_path, data, core::DatasetRole::test);
    const auto summary = core::dataset_summary(train, test ? &*test : nullptr);

    std::ostringstream out;
    write_csv_row(out, {"dataset", "part", "n_instances", "n_features", "n_labels",
                        "cardinality", "density", "n_distinct_labelsets"});
    for (const auto& part : summary.parts) {
        write_csv_row(out, {train.name, part.part, std::to_string(part.n_instances),
                            std::to_string(summary.n_features), std::to_string(summary.n_labels),
                            format_fixed(part.cardinality, 4), format_fixed(part.density, 4),
                            std::to_string(part.n_distinct_labelsets)});
    }
    ctx.add_csv("summary.csv", out.str());

    json doc;
    doc["dataset"] = train.name;
    doc["n_features"] = summary.n_features;
    doc["n_labels"] = summary.n_labels;
    json parts = json::array();
    for (const auto& part : summary.parts) {
        parts.push_back(json{{"part", part.part},
                             {"n_instances", part.n_instances},
                             {"cardinality", part.cardinality},
                             {"density", part.density},
                             {"n_distinct_labelsets", part.n_distinct_labelsets}});
    }
    doc["parts"] = parts;
    ctx.add_json("summary.json", doc);
}

void run_evaluate(RunContext& ctx, const std::string& predictions_path,
                  const std::string& measures_csv, std::optional<double> train_cardinality) {
    const auto pred = load_predictions(predictions_path);
    std::vector<std::string> measures = parse_name_list(measures_csv);
    if (measures.empty()) {
        // every measure computable from the available parts
        const bool bipartition_possible =
            pred.bipartition.has_value() || (pred.scores.has_value() && train_cardinality);
        std::size_t positives = 0;
        for (auto v : pred.truth.cells) positives += v;
        const bool auroc_possible = pred.scores.has_value() && positives > 0 &&
                                    positives < pred.truth.cells.size();
        for (const auto& name : eval::known_measures()) {
            if (name.rfind("AUROC", 0) == 0) {
                if (!auroc_possible) continue;
                if (name == "AUROC.macro") {
                    bool any_two_class = false;
                    for (std::size_t j = 0; j < pred.truth.l; ++j) {
                        std::size_t pos = 0;
                        for (std::size_t i = 0; i < pred.truth.n; ++i)
                            pos += pred.truth.at(i, j);
                        if (pos > 0 && pos < pred.truth.n) any_two_class = true;
                    }
                    if (!any_two_class) continue;
                }
                measures.push_back(name);
            } else if (bipartition_possible) {
                measures.push_back(name);
            }
        }
    }
    const auto report = eval::evaluate_all(pred, train_cardinality, measures);
    ctx.add_json("measures.json", measure_report_to_json(report));

    std::ostringstream out;
    write_csv_row(out, {"measure", "value"});
    for (const auto& [name, value] : report.measures)
        write_csv_row(out, {name, format_double(value)});
    ctx.add_csv("measures.csv", out.str());
}

void run_pcut(RunContext& ctx, const std::string& predictions_path, double train_cardinality,
              const std::string& grid_csv) {
    if (!(train_cardinality >= 0.0))
        throw contract_error("--train-cardinality must be non-negative");
    const auto pred = load_predictions(predictions_path);
    if (!pred.scores) throw contract_error("pcut needs a predictions file with scores");
    std::vector<double> grid = parse_double_list(grid_csv);
    if (grid.empty()) grid = eval::default_pcut_grid(*pred.scores);
    const double t = eval::pcut_threshold(train_cardinality, *pred.scores, grid);
    const auto bipartition = eval::apply_threshold(*pred.scores, t);

    json doc;
    doc["threshold"] = t;
    doc["train_cardinality"] = train_cardinality;
    doc["predicted_cardinality"] = eval::cardinality_at(*pred.scores, t);
    ctx.add_json("pcut.json", doc);

    std::ostringstream out;
    std::vector<std::string> header;
    for (std::size_t j = 0; j < bipartition.l; ++j) header.push_back("pred_l" + std::to_string(j + 1));
    write_csv_row(out, header);
    for (std::size_t i = 0; i < bipartition.n; ++i) {
        std::vector<std::string> row;
        for (std::size_t j = 0; j < bipartition.l; ++j)
            row.push_back(bipartition.at(i, j) ? "1" : "0");
        write_csv_row(out, row);
    }
    ctx.add_csv("bipartition.csv", out.str());
}

void run_stratify(RunContext& ctx, const DatasetArgs& data, std::size_t k, std::size_t subsample,
                  bool labelset_quotas) {
    if (data.paths.size() != 1)
        throw contract_error("stratify takes exactly one --dataset");
    const auto ds = load_dataset(data.paths.front(), data, core::DatasetRole::train);
    if (subsample > 0) {
        const auto idx = stratify::stratified_subsample(ds, subsample, ctx.seed, labelset_quotas);
        std::ostringstream out;
        write_csv_row(out, {"example_index"});
        for (std::size_t i : idx) write_csv_row(out, {std::to_string(i)});
        ctx.add_csv("subsample_indices.csv", out.str());
        return;
    }
    const auto fa = stratify::iterative_stratified_folds(ds, k, ctx.seed);
    std::ostringstream out;
    stratify::write_folds_csv(out, fa);
    ctx.add_csv("folds.csv", out.str());
}

void run_tree_learn(RunContext& ctx, const std::string& data_path, const std::string& roles_path,
                    const std::string& mode, double f_level, std::size_t min_leaf) {
    const auto table = pct::load_data_table(data_path, roles_path);
    const auto tree = pct::learn(table, pct::tree_mode_from(mode), {f_level, min_leaf});
    ctx.add_json("tree.json", pct::tree_to_json(tree));
    ctx.add_text("tree.txt", pct::export_text(tree));
    ctx.add_text("tree.dot", pct::export_dot(tree));
}

void run_tree_predict(RunContext& ctx, const std::string& tree_path, const std::string& data_path) {
    std::ifstream in(tree_path);
    if (!in) throw parse_error("cannot open tree file: " + tree_path);
    const auto tree = pct::tree_from_json(json::parse(in, nullptr, true, true));

    const auto csv = read_csv_table_file(data_path);
    std::vector<std::size_t> cols;
    for (const auto& name : tree.column_names) {
        const auto c = csv.find(name);
        if (!c) throw contract_error("prediction data is missing column '" + name + "'");
        cols.push_back(*c);
    }

    std::ostringstream out;
    std::vector<std::string> header = {"row", "leaf"};
    if (tree.mode == pct::TreeMode::classification) {
        header.push_back("prediction");
    } else {
        for (const auto& t : tree.target_names) header.push_back("pred." + t);
    }
    write_csv_row(out, header);

    for (std::size_t i = 0; i < csv.rows.size(); ++i) {
        std::vector<double> row(tree.column_names.size());
        for (std::size_t q = 0; q < cols.size(); ++q) {
            const std::string& cell = csv.rows[i].fields[cols[q]];
            if (tree.column_types[q] == pct::ColumnType::numeric) {
                const auto v = parse_double(cell);
                if (!v)
                    throw contract_error("non-numeric value '" + cell + "' for column " +
                                         tree.column_names[q]);
                row[q] = *v;
            } else {
                // unseen categories take a sentinel code that fails every
                // equality test and routes to the "no" branch
                const auto& cats = tree.categories[q];
                std::size_t code = cats.size();
                for (std::size_t c = 0; c < cats.size(); ++c)
                    if (cats[c] == cell) code = c;
                row[q] = static_cast<double>(code);
            }
        }
        const auto p = pct::predict(tree, row);
        std::vector<std::string> fields = {std::to_string(i), std::to_string(p.leaf)};
        if (tree.mode == pct::TreeMode::classification) {
            fields.push_back(tree.class_values[p.class_code]);
        } else {
            for (double v : p.values) fields.push_back(format_double(v));
        }
        write_csv_row(out, fields);
    }
    ctx.add_csv("predictions.csv", out.str());
}

void run_landscape(RunContext& ctx, const std::string& meta_path, const std::string& results_path,
                   const std::string& measures_csv, std::size_t k_top,
                   const std::string& registry_path, double f_level, std::size_t min_leaf) {
    const auto meta = pipeline::MetaMatrix::from_csv_file(meta_path);
    const auto results = core::ResultsTable::scores_from_csv_file(results_path);
    const auto registry = load_registry(registry_path);
    auto measures = parse_name_list(measures_csv);
    if (measures.empty())
        measures = std::vector<std::string>(results.measures().begin(), results.measures().end());

    const auto result =
        pipeline::landscape(meta, results, measures, k_top, registry, {f_level, min_leaf});

    json doc;
    doc["tree"] = pct::tree_to_json(result.tree);
    json leaves = json::array();
    for (const auto& leaf : result.leaves) {
        json entry;
        entry["leaf"] = leaf.leaf;
        entry["datasets"] = leaf.datasets;
        json per_measure = json::object();
        for (const auto& [measure, counts] : leaf.family_counts) {
            json fams = json::object();
            for (const auto& [family, count] : counts) fams[family] = count;
            per_measure[measure] = fams;
        }
        entry["family_counts"] = per_measure;
        leaves.push_back(entry);
    }
    doc["leaves"] = leaves;
    doc["excluded_datasets"] = result.excluded_datasets;
    doc["notes"] = result.notes;
    ctx.add_json("landscape.json", doc);
    ctx.add_text("landscape.dot", landscape_dot(result));
}

void run_perf_model(RunContext& ctx, const std::string& meta_path, const std::string& results_path,
                    const std::string& measure, const std::string& methods_csv,
                    const std::string& target, const std::string& f_grid_csv,
                    std::size_t min_leaf, const std::string& registry_path, bool allow_missing) {
    const auto meta = pipeline::MetaMatrix::from_csv_file(meta_path);
    const auto results = core::ResultsTable::scores_from_csv_file(results_path);
    const auto registry = load_registry(registry_path);
    auto methods = parse_name_list(methods_csv);
    if (methods.empty())
        methods = std::vector<std::string>(results.methods().begin(), results.methods().end());

    pipeline::TargetKind kind;
    if (target == "scores") kind = pipeline::TargetKind::scores;
    else if (target == "best") kind = pipeline::TargetKind::best;
    else throw contract_error("--target must be scores or best");

    pipeline::AssembleReport assemble_report;
    const auto md = pipeline::assemble(meta, results, measure, methods, kind, registry,
                                       allow_missing, &assemble_report);
    auto f_grid = parse_double_list(f_grid_csv);
    const auto report = pipeline::loo_evaluate(md, f_grid, min_leaf);

    ctx.add_csv("metadataset.csv", metadataset_to_csv(md));
    ctx.add_json("metadataset.json", metadataset_to_json(md));
    json loo = loo_report_to_json(report);
    loo["assemble_report"] = assemble_report_to_json(assemble_report);
    loo["measure"] = measure;
    loo["methods"] = methods;
    ctx.add_json("loo_report.json", loo);
    ctx.add_csv("loo_report.csv", loo_report_to_csv(report));

    const auto table = md.to_table();
    const auto mode = kind == pipeline::TargetKind::scores ? pct::TreeMode::regression
                                                           : pct::TreeMode::classification;
    const auto tree = pct::learn(table, mode, {report.chosen_f, min_leaf});
    ctx.add_json("model_tree.json", pct::tree_to_json(tree));
    ctx.add_text("model_tree.txt", pct::export_text(tree));
}

void run_tune_or_not(RunContext& ctx, const std::string& meta_path,
                     const std::string& results_path, const std::string& measure,
                     const std::string& methods_csv, const std::string& registry_path,
                     double f_level, std::size_t min_leaf,
                     const std::string& difference_measures_csv, bool allow_missing) {
    const auto meta = pipeline::MetaMatrix::from_csv_file(meta_path);
    const auto results = core::ResultsTable::scores_from_csv_file(results_path);
    const auto registry = load_registry(registry_path);
    auto methods = parse_name_list(methods_csv);
    if (methods.empty())
        methods = std::vector<std::string>(results.methods().begin(), results.methods().end());

    const auto r = pipeline::tune_or_not(meta, results, measure, registry, methods,
                                         {f_level, min_leaf}, allow_missing);

    ctx.add_csv("tune_metadataset.csv", metadataset_to_csv(r.meta_dataset));
    ctx.add_json("tune_metadataset.json", metadataset_to_json(r.meta_dataset));
    ctx.add_json("tune_tree.json", pct::tree_to_json(r.tree));
    ctx.add_text("tune_tree.txt", pct::export_text(r.tree));

    json quality;
    quality["measure"] = measure;
    quality["loo_accuracy"] = r.loo_accuracy;
    quality["baseline_accuracy"] = r.baseline_accuracy;
    if (r.loo_auroc) quality["loo_auroc"] = *r.loo_auroc;
    if (r.loo_auprc) quality["loo_auprc"] = *r.loo_auprc;
    quality["notes"] = r.notes;
    quality["assemble_report"] = assemble_report_to_json(r.assemble_report);
    ctx.add_json("tune_loo.json", quality);

    const auto diff_measures = parse_name_list(difference_measures_csv);
    if (!diff_measures.empty()) {
        const auto diffs =
            pipeline::difference_boxplot_data(results, diff_measures, registry, methods);
        json doc;
        json entries = json::array();
        for (const auto& s : diffs) {
            json e;
            e["measure"] = s.measure;
            json values = json::array();
            for (const auto& [ds, v] : s.differences)
                values.push_back(json{{"dataset", ds}, {"difference", v}});
            e["differences"] = values;
            e["quartiles"] = {{"min", s.min}, {"q1", s.q1}, {"median", s.median},
                              {"q3", s.q3}, {"max", s.max}};
            e["excluded"] = s.excluded;
            entries.push_back(e);
        }
        doc["measures"] = entries;
        ctx.add_json("differences.json", doc);
    }
}

void run_rsed(RunContext& ctx, const std::string& results_path, const std::string& success_path) {
    core::ResultsTable results;
    if (!results_path.empty()) results = core::ResultsTable::scores_from_csv_file(results_path);
    results.success_from_csv_file(success_path);
    const auto r = pipeline::rsed(results);

    json doc;
    doc["method_rsed"] = r.method_rsed;
    doc["ds_rsed"] = r.ds_rsed;
    json dist = json::object();
    for (const auto& [key, value] : r.cells) {
        if (!dist.contains(key.second)) dist[key.second] = json::array();
        dist[key.second].push_back(json{{"dataset", key.first}, {"rsed", value}});
    }
    doc["per_method_distribution"] = dist;
    doc["excluded"] = r.excluded;
    ctx.add_json("rsed.json", doc);

    std::ostringstream out;
    write_csv_row(out, {"dataset", "method", "rsed"});
    for (const auto& [key, value] : r.cells)
        write_csv_row(out, {key.first, key.second, format_double(value)});
    ctx.add_csv("rsed_cells.csv", out.str());
}

void run_improvement(RunContext& ctx, const std::string& results_path,
                     const std::string& default_measure, const std::string& tuned_measure,
                     std::size_t bins) {
    const auto results = core::ResultsTable::scores_from_csv_file(results_path);
    const auto h = pipeline::improvement_histograms(results, default_measure, tuned_measure, bins);

    json doc;
    doc["bins"] = h.bins;
    doc["default_measure"] = h.default_measure;
    doc["tuned_measure"] = h.tuned_measure;
    json methods = json::array();
    for (const auto& m : h.methods) {
        json e;
        e["method"] = m.method;
        e["counts"] = m.counts;
        e["n"] = m.n;
        e["skewness"] = m.skewness;
        e["flags"] = m.flags;
        json edges = json::array();
        for (std::size_t b = 0; b <= h.bins; ++b)
            edges.push_back(static_cast<double>(b) / static_cast<double>(h.bins));
        e["bin_edges"] = edges;
        methods.push_back(e);
    }
    doc["methods"] = methods;
    doc["excluded"] = h.excluded;
    ctx.add_json("improvement.json", doc);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"mlcmeta: multi-label classification meta-analysis toolkit"};
    app.require_subcommand(1);
    // config files mirror the flags under a [subcommand] section and are
    // given before the subcommand: mlcmeta --config run.toml summarize
    app.set_config("--config", "", "TOML-style config file mirroring the flags");

    RunContext ctx;
    DatasetArgs data;
    std::string registry_path, catalogue_path;
    double alpha = 0.01;
    std::size_t small_set_threshold = 2;
    std::string test_path, predictions_path, measures_csv, grid_csv;
    double train_cardinality = -1.0;
    std::size_t k_folds = 3, subsample = 0;
    bool labelset_quotas = false;
    std::string data_path, roles_path, tree_mode = "mtr", tree_path;
    double f_level = 0.125;
    std::size_t min_leaf = 2;
    std::string meta_path, results_path, measure, methods_csv, target = "scores", f_grid_csv;
    std::size_t k_top = 3;
    std::string success_path, default_measure = "hamming.loss.default",
                              tuned_measure = "hamming.loss.tuned", difference_measures_csv;
    std::size_t bins = 20;
    bool allow_missing = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", ctx.out_dir, "output directory")->envname("MLCMETA_OUT");
        sub->add_option("--seed", ctx.seed, "seed for all randomized steps");
    };

    auto* mf = app.add_subcommand("meta-features", "compute the meta-feature vector of datasets");
    mf->add_option("--dataset", data.paths, "dataset file (.arff or .csv); repeatable")->required();
    mf->add_option("--labels", data.labels, "label count or MULAN XML path (ARFF)");
    mf->add_option("--csv-labels", data.csv_labels, "comma-separated label columns (CSV)");
    mf->add_option("--catalogue", catalogue_path, "catalogue file (defaults to the built-in)");
    mf->add_option("--alpha", alpha, "chi-square significance for label-pair dependence");
    mf->add_option("--small-set-threshold", small_set_threshold,
                   "labelset size cutoff for the small-labelset proportion");
    add_common(mf);

    auto* su = app.add_subcommand("summarize", "label-space summary of a dataset");
    su->add_option("--dataset", data.paths, "training part (.arff or .csv)")->required();
    su->add_option("--labels", data.labels, "label count or MULAN XML path (ARFF)");
    su->add_option("--csv-labels", data.csv_labels, "comma-separated label columns (CSV)");
    su->add_option("--test", test_path, "optional test part");
    add_common(su);

    auto* ev = app.add_subcommand("evaluate", "evaluation measures for stored predictions");
    ev->add_option("--predictions", predictions_path, "prediction file (.csv or .json)")->required();
    ev->add_option("--measures", measures_csv, "comma-separated measure names (default: all computable)");
    ev->add_option("--train-cardinality", train_cardinality,
                   "training label cardinality (enables PCut-derived bipartitions)");
    add_common(ev);

    auto* pc = app.add_subcommand("pcut", "PCut threshold selection and bipartition");
    pc->add_option("--predictions", predictions_path, "prediction file with scores")->required();
    pc->add_option("--train-cardinality", train_cardinality, "training label cardinality")
        ->required();
    pc->add_option("--grid", grid_csv, "comma-separated thresholds (default: distinct scores)");
    add_common(pc);

    auto* st = app.add_subcommand("stratify", "iterative stratified folds or subsample");
    st->add_option("--dataset", data.paths, "dataset file (.arff or .csv)")->required();
    st->add_option("--labels", data.labels, "label count or MULAN XML path (ARFF)");
    st->add_option("--csv-labels", data.csv_labels, "comma-separated label columns (CSV)");
    st->add_option("--k", k_folds, "number of folds");
    st->add_option("--subsample", subsample, "stratified subsample of this many examples");
    st->add_flag("--labelset-quotas", labelset_quotas,
                 "stratify on labelset frequencies instead of per-label quotas");
    add_common(st);

    auto* tl = app.add_subcommand("tree-learn", "learn a predictive clustering tree");
    tl->add_option("--data", data_path, "data table CSV")->required();
    tl->add_option("--roles", roles_path, "column-role manifest")->required();
    tl->add_option("--mode", tree_mode, "mtr | classify | cluster");
    tl->add_option("--f-level", f_level, "F-test stopping level");
    tl->add_option("--min-leaf", min_leaf, "minimum examples per leaf");
    add_common(tl);

    auto* tp = app.add_subcommand("tree-predict", "predict with a learned tree");
    tp->add_option("--tree", tree_path, "tree JSON document")->required();
    tp->add_option("--data", data_path, "CSV with the tree's descriptive columns")->required();
    add_common(tp);

    auto* la = app.add_subcommand("landscape", "divisive clustering of the dataset landscape");
    la->add_option("--meta", meta_path, "meta-feature matrix CSV")->required();
    la->add_option("--results", results_path, "results table CSV")->required();
    la->add_option("--measures", measures_csv, "comma-separated measures (default: all present)");
    la->add_option("--k-top", k_top, "top-k methods per dataset");
    la->add_option("--registry", registry_path, "registry file (defaults to the built-in)");
    la->add_option("--f-level", f_level, "F-test stopping level");
    la->add_option("--min-leaf", min_leaf, "minimum datasets per cluster");
    add_common(la);

    auto* pm = app.add_subcommand("perf-model", "meta models predicting method performance");
    pm->add_option("--meta", meta_path, "meta-feature matrix CSV")->required();
    pm->add_option("--results", results_path, "results table CSV")->required();
    pm->add_option("--measure", measure, "evaluation measure")->required();
    pm->add_option("--methods", methods_csv, "comma-separated methods (default: all present)");
    pm->add_option("--target", target, "scores (multi-target regression) | best (classification)");
    pm->add_option("--f-grid", f_grid_csv, "comma-separated F-test candidates");
    pm->add_option("--min-leaf", min_leaf, "minimum meta examples per leaf");
    pm->add_option("--registry", registry_path, "registry file");
    pm->add_flag("--allow-missing", allow_missing, "drop rows with missing score cells");
    add_common(pm);

    auto* bm = app.add_subcommand("best-method", "classification meta model of the best method");
    bm->add_option("--meta", meta_path, "meta-feature matrix CSV")->required();
    bm->add_option("--results", results_path, "results table CSV")->required();
    bm->add_option("--measure", measure, "evaluation measure")->required();
    bm->add_option("--methods", methods_csv, "comma-separated methods (default: all present)");
    bm->add_option("--f-grid", f_grid_csv, "comma-separated F-test candidates");
    bm->add_option("--min-leaf", min_leaf, "minimum meta examples per leaf");
    bm->add_option("--registry", registry_path, "registry file");
    bm->add_flag("--allow-missing", allow_missing, "drop rows with missing score cells");
    add_common(bm);

    auto* tn = app.add_subcommand("tune-or-not", "reliable-defaults vs hyper-tuned decision model");
    tn->add_option("--meta", meta_path, "meta-feature matrix CSV")->required();
    tn->add_option("--results", results_path, "results table CSV")->required();
    tn->add_option("--measure", measure, "evaluation measure")->required();
    tn->add_option("--methods", methods_csv, "comma-separated methods (default: all present)");
    tn->add_option("--registry", registry_path, "registry file");
    tn->add_option("--f-level", f_level, "F-test stopping level");
    tn->add_option("--min-leaf", min_leaf, "minimum meta examples per leaf");
    tn->add_option("--difference-measures", difference_measures_csv,
                   "also emit tuned-vs-defaults difference data for these measures");
    tn->add_flag("--allow-missing", allow_missing, "drop rows with missing score cells");
    add_common(tn);

    auto* rs = app.add_subcommand("rsed", "ratio of successful experiments");
    rs->add_option("--success", success_path, "success-log CSV")->required();
    rs->add_option("--results", results_path, "optional results table CSV");
    add_common(rs);

    auto* im = app.add_subcommand("improvement", "relative-improvement histograms");
    im->add_option("--results", results_path, "results table CSV")->required();
    im->add_option("--default-measure", default_measure, "measure holding default-setting scores");
    im->add_option("--tuned-measure", tuned_measure, "measure holding tuned scores");
    im->add_option("--bins", bins, "histogram bins over [0,1]");
    add_common(im);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        ctx.subcommand = sub->get_name();
        for (const auto* opt : sub->get_options()) {
            if (opt->count() == 0) continue;
            if (opt->get_name() == "--out" || opt->get_name() == "--config") continue;
            std::string joined;
            for (const auto& r : opt->results()) joined += (joined.empty() ? "" : ",") + r;
            ctx.option(opt->get_name(), joined);
        }

        if (sub == mf) {
            run_meta_features(ctx, data, catalogue_path, alpha, small_set_threshold);
        } else if (sub == su) {
            run_summarize(ctx, data, test_path);
        } else if (sub == ev) {
            run_evaluate(ctx, predictions_path, measures_csv,
                         train_cardinality >= 0 ? std::optional<double>(train_cardinality)
                                                : std::nullopt);
        } else if (sub == pc) {
            run_pcut(ctx, predictions_path, train_cardinality, grid_csv);
        } else if (sub == st) {
            run_stratify(ctx, data, k_folds, subsample, labelset_quotas);
        } else if (sub == tl) {
            run_tree_learn(ctx, data_path, roles_path, tree_mode, f_level, min_leaf);
        } else if (sub == tp) {
            run_tree_predict(ctx, tree_path, data_path);
        } else if (sub == la) {
            run_landscape(ctx, meta_path, results_path, measures_csv, k_top, registry_path,
                          f_level, min_leaf);
        } else if (sub == pm) {
            run_perf_model(ctx, meta_path, results_path, measure, methods_csv, target, f_grid_csv,
                           min_leaf, registry_path, allow_missing);
        } else if (sub == bm) {
            run_perf_model(ctx, meta_path, results_path, measure, methods_csv, "best", f_grid_csv,
                           min_leaf, registry_path, allow_missing);
        } else if (sub == tn) {
            run_tune_or_not(ctx, meta_path, results_path, measure, methods_csv, registry_path,
                            f_level, min_leaf, difference_measures_csv, allow_missing);
        } else if (sub == rs) {
            run_rsed(ctx, results_path, success_path);
        } else if (sub == im) {
            run_improvement(ctx, results_path, default_measure, tuned_measure, bins);
        }
        ctx.write_all();
    } catch (const mlcmeta::error& e) {
        json err;
        err["error"] = {{"type", "mlcmeta"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const json::exception& e) {
        json err;
        err["error"] = {{"type", "json"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        json err;
        err["error"] = {{"type", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
    return 0;
}
