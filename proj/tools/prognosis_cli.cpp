// Command-line entry point wiring the library into the full pipeline:
// synth/ingest -> split -> snapshot/build-datasets -> train -> evaluate ->
// predict, plus artifact verification and the one-shot `pipeline` command.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "prognosis/csv.hpp"
#include "prognosis/parallel.hpp"
#include "prognosis/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace prognosis;

namespace {

struct GlobalOptions {
    std::string config_path;
    PipelineConfig config;  // defaults, overlaid with --config when given
};

void load_global_config(GlobalOptions& global) {
    if (global.config_path.empty()) return;
    std::ifstream in(global.config_path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + global.config_path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw CLI::ValidationError("--config", std::string("invalid JSON: ") + e.what());
    }
    global.config = PipelineConfig::from_json(j);
}

LabRegistry registry_or_default(const std::string& path) {
    return path.empty() ? LabRegistry::defaults() : LabRegistry::load(path);
}

int boundary_from(const std::string& date) {
    const auto day = parse_iso_date(date);
    if (!day) throw std::runtime_error("boundary must be an ISO date (yyyy-mm-dd), got " + date);
    return *day;
}

// Infers (phase, day, form) hints from dataset file names such as
// hcp_day6_num_test.csv; explicit flags win.
void tag_dataset(Dataset& d, const std::string& path, const std::string& phase,
                 const std::string& day, const std::string& form) {
    const std::string name = fs::path(path).filename().string();
    auto sniff = [&](const std::string& token) { return name.find(token) != std::string::npos; };
    if (!phase.empty()) d.phase = phase == "hcp" ? Phase::Hcp : Phase::Mcp;
    else if (sniff("hcp")) d.phase = Phase::Hcp;
    else if (sniff("mcp")) d.phase = Phase::Mcp;
    if (!day.empty()) {
        if (auto v = day_config_from_string(day)) d.day = *v;
    } else {
        for (DayConfig dc : all_day_configs()) {
            if (sniff("day" + to_string(dc) + "_")) d.day = dc;
        }
    }
    if (!form.empty()) {
        if (auto v = feature_form_from_string(form)) d.form = *v;
    } else if (sniff("_cat")) {
        d.form = FeatureForm::Categorical;
    } else if (sniff("_num")) {
        d.form = FeatureForm::Numerical;
    }
}

int cmd_synth(const GlobalOptions& global, int patients, double drift, double mortality,
              double phase_mix, std::uint64_t seed, const std::string& spec_path,
              const std::string& out) {
    GeneratorSpec spec =
        spec_path.empty() ? GeneratorSpec::defaults() : generator_spec_from_json_file(spec_path);
    spec.n_patients = patients;
    spec.drift_factor = drift;
    spec.base_mortality = mortality;
    spec.phase_mix = phase_mix;
    spec.boundary_day = boundary_from(global.config.boundary_date);
    spec.seed = seed;
    write_cohort(out, generate(spec));
    std::cout << "wrote " << patients << " synthetic patients to " << out << '\n';
    return 0;
}

int cmd_ingest(const GlobalOptions& global, const std::string& input,
               const std::string& registry_path, const std::string& boundary,
               const std::string& out) {
    const LabRegistry registry = registry_or_default(registry_path);
    const int boundary_day =
        boundary_from(boundary.empty() ? global.config.boundary_date : boundary);
    const auto report = ingest_cohort(input, registry);
    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    for (const auto& r : report.rejected_rows) std::cerr << "rejected: " << r << '\n';
    if (report.records.empty()) {
        std::cerr << "error: no valid patients in " << input << '\n';
        return 1;
    }
    write_cohort(out, report.records);
    const auto stats = cohort_stats(report.records, boundary_day);
    std::cout << "patients: " << stats.n_total << " (excluded " << stats.n_excluded << ")\n"
              << "hcp: " << stats.hcp.n_patients << " patients, mortality "
              << csv::format_double(stats.hcp.mortality_rate) << ", median stay "
              << stats.hcp.median_stay << '\n'
              << "mcp: " << stats.mcp.n_patients << " patients, mortality "
              << csv::format_double(stats.mcp.mortality_rate) << ", median stay "
              << stats.mcp.median_stay << '\n';
    return 0;
}

int cmd_split(const GlobalOptions& global, const std::string& cohort_path, double test_fraction,
              std::uint64_t seed, const std::string& boundary, const std::string& registry_path,
              const std::string& out) {
    const LabRegistry registry = registry_or_default(registry_path);
    const int boundary_day =
        boundary_from(boundary.empty() ? global.config.boundary_date : boundary);
    const auto records = ingest_cohort(cohort_path, registry).records;
    const auto split = stratified_split(records, boundary_day, test_fraction, seed);
    write_split(out, split);
    std::cout << "assigned " << split.by_patient.size() << " patients\n";
    return 0;
}

int cmd_snapshot(const GlobalOptions& global, const std::string& cohort_path,
                 const std::string& day, const std::string& form,
                 const std::string& registry_path, double trend_t, const std::string& out) {
    const LabRegistry registry = registry_or_default(registry_path);
    const auto day_config = day_config_from_string(day);
    const auto feature_form = feature_form_from_string(form);
    if (!day_config) throw std::runtime_error("unknown --day: " + day);
    if (!feature_form) throw std::runtime_error("unknown --form: " + form);
    (void)global;

    const auto records = ingest_cohort(cohort_path, registry).records;
    Dataset d;
    d.day = *day_config;
    d.form = *feature_form;
    d.feature_names = feature_names(registry, *day_config, *feature_form);
    for (const auto& r : records) {
        if (r.outcome.excluded()) continue;
        auto snap = build_snapshot(r, *day_config, *feature_form, trend_t, registry);
        if (!snap) continue;
        d.rows.push_back(std::move(snap->features));
        d.labels.push_back(snap->label);
        d.patient_ids.push_back(r.patient_id);
    }
    write_dataset(out, d);
    std::cout << "wrote " << d.size() << " snapshots to " << out << '\n';
    return 0;
}

int cmd_build_datasets(const GlobalOptions& global, const std::string& cohort_path,
                       const std::string& split_path, const std::string& phase_name,
                       const std::string& form_name, const std::string& boundary,
                       const std::string& registry_path, double trend_t,
                       const std::string& out_dir) {
    const LabRegistry registry = registry_or_default(registry_path);
    const int boundary_day =
        boundary_from(boundary.empty() ? global.config.boundary_date : boundary);
    if (phase_name != "hcp" && phase_name != "mcp") {
        throw std::runtime_error("--phase must be hcp or mcp");
    }
    const auto form = feature_form_from_string(form_name);
    if (!form) throw std::runtime_error("unknown --form: " + form_name);

    const auto records = ingest_cohort(cohort_path, registry).records;
    const auto split = load_split(split_path);
    const Phase phase = phase_name == "hcp" ? Phase::Hcp : Phase::Mcp;
    const auto pairs = build_day_datasets(records, split, boundary_day, phase, *form,
                                          all_day_configs(), registry, trend_t);
    fs::create_directories(out_dir);
    const auto days = all_day_configs();
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const std::string base = phase_name + "_day" + to_string(days[i]) + "_" + form_name;
        write_dataset((fs::path(out_dir) / (base + "_train.csv")).string(), pairs[i].train);
        write_dataset((fs::path(out_dir) / (base + "_test.csv")).string(), pairs[i].test);
    }
    std::cout << "wrote " << 2 * pairs.size() << " dataset files to " << out_dir << '\n';
    return 0;
}

int cmd_train(const std::string& dataset_path, int configs, double max_u,
              const std::string& folds, int thresholds, const std::string& space_name,
              std::uint64_t seed, int threads, const std::string& out,
              const std::string& log_path) {
    const Dataset train_ds = load_dataset(dataset_path);
    SearchSpec spec;
    spec.n_configs = configs;
    spec.max_u = max_u;
    spec.n_thresholds = thresholds;
    if (folds != "auto") spec.k_folds = std::stoi(folds);
    const auto space = search_space_from_string(space_name);
    if (!space) throw std::runtime_error("unknown --space: " + space_name);
    spec.space = *space;
    spec.seed = seed;

    const int n_threads = threads > 0 ? threads : default_threads();
    const auto trained = random_search(train_ds, spec, n_threads);

    json config_json = {{"command", "train"},        {"dataset", dataset_path},
                        {"configs", configs},        {"max_u", max_u},
                        {"folds", folds},            {"thresholds", thresholds},
                        {"space", space_name},       {"seed", seed}};
    save_forest(trained.forest, out, make_provenance(config_json, seed));
    if (!log_path.empty()) write_search_log(log_path, trained.search);

    std::cout << "best config: " << to_string(trained.search.best_config.kind) << " with "
              << trained.search.best_config.n_trees << " trees, cv macro-F2 "
              << csv::format_double(trained.search.best_score) << ", threshold "
              << csv::format_double(trained.search.best_threshold) << '\n'
              << "model written to " << out << '\n';
    return 0;
}

int cmd_evaluate(const std::string& model_path, const std::string& dataset_path,
                 const std::string& out, const std::string& markdown, const std::string& phase,
                 const std::string& day, const std::string& form, int threads) {
    Provenance prov;
    const Forest forest = load_forest(model_path, &prov);
    Dataset test = load_dataset(dataset_path);
    tag_dataset(test, dataset_path, phase, day, form);
    const int n_threads = threads > 0 ? threads : default_threads();
    const EvalReport report = evaluate(forest, test, n_threads);
    write_report_json(out, report, prov);
    if (!markdown.empty()) write_report_markdown(markdown, report);
    std::cout << "macro F2 " << csv::format_double(report.complete.macro_f2) << " -> "
              << csv::format_double(report.no_uncertain.macro_f2) << " without the "
              << csv::format_double(report.uncertain_fraction * 100.0) << "% uncertain\n";
    return 0;
}

int cmd_predict(const std::string& model_path, const std::string& input, const std::string& out,
                int threads) {
    const Forest forest = load_forest(model_path);
    if (!forest.threshold) {
        std::cerr << "error: model carries no uncertainty threshold\n";
        return 1;
    }

    // snapshot CSV with or without the label column
    std::ifstream in(input);
    if (!in) throw std::runtime_error("cannot open " + input);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error(input + ": empty file");
    const auto header = csv::split_line(line);
    const bool labeled = header.size() >= 2 && header[1] == "label";
    const std::size_t feature_start = labeled ? 2 : 1;
    if (header.empty() || header[0] != "patient_id") {
        throw std::runtime_error(input + ": expected a patient_id column first");
    }

    Dataset data;
    data.feature_names.assign(header.begin() + static_cast<long>(feature_start), header.end());
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line == "\r") continue;
        const auto f = csv::split_line(line);
        if (f.size() != header.size()) {
            throw std::runtime_error(input + ":" + std::to_string(line_no) +
                                     ": wrong column count");
        }
        std::vector<double> row;
        for (std::size_t i = feature_start; i < f.size(); ++i) {
            const auto v = csv::parse_double(f[i]);
            if (!v) {
                throw std::runtime_error(input + ":" + std::to_string(line_no) +
                                         ": bad number '" + f[i] + "'");
            }
            row.push_back(*v);
        }
        data.patient_ids.push_back(f[0]);
        data.labels.push_back(Label::Alive);  // unused by prediction
        data.rows.push_back(std::move(row));
    }

    const int n_threads = threads > 0 ? threads : default_threads();
    const auto predictions = apply_threshold(forest, data, n_threads);
    std::ofstream os(out);
    if (!os) throw std::runtime_error("cannot write " + out);
    os << "patient_id,p_alive,p_dead,label\n";
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        os << data.patient_ids[i] << ',' << csv::format_double(predictions[i].p_alive) << ','
           << csv::format_double(predictions[i].p_dead) << ','
           << to_string(predictions[i].label) << '\n';
    }
    std::cout << "wrote " << predictions.size() << " predictions to " << out << '\n';
    return 0;
}

int cmd_verify(const std::string& dir) {
    const auto problems = verify_artifacts(dir);
    if (problems.empty()) {
        std::cout << "ok: all artifacts under " << dir << " match their run config\n";
        return 0;
    }
    for (const auto& p : problems) std::cerr << "verify: " << p << '\n';
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"prognosis: mortality-risk prediction from longitudinal lab findings"};
    app.set_version_flag("--version", kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();  // global flags remain valid after the subcommand name

    GlobalOptions global;
    app.add_option("--config", global.config_path, "pipeline config JSON with defaults")
        ->envname("PROGNOSIS_CONFIG");

    int threads = 0;
    app.add_option("--threads", threads, "worker thread cap (0 = hardware)");

    // --- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "generate a synthetic cohort CSV");
    int patients = 2000;
    double drift = 2.0, mortality = 0.11, phase_mix = 0.5;
    std::uint64_t synth_seed = 0;
    std::string synth_out, synth_spec;
    synth->add_option("--patients", patients);
    synth->add_option("--drift", drift, "HCP mortality multiplier");
    synth->add_option("--mortality", mortality, "MCP death rate");
    synth->add_option("--phase-mix", phase_mix, "fraction of HCP admissions");
    synth->add_option("--spec", synth_spec, "generator spec JSON");
    synth->add_option("--seed", synth_seed)->required();
    synth->add_option("--out", synth_out)->required();

    // --- ingest --------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "parse and validate an event file");
    std::string ingest_in, ingest_registry, ingest_boundary, ingest_out;
    ingest->add_option("--input", ingest_in)->required();
    ingest->add_option("--registry", ingest_registry, "test registry JSON (default: built-in)");
    ingest->add_option("--boundary", ingest_boundary, "HCP/MCP boundary date");
    ingest->add_option("--out", ingest_out)->required();

    // --- split ----------------------------------------------------------
    auto* split = app.add_subcommand("split", "one-time stratified patient split");
    std::string split_cohort, split_boundary, split_registry, split_out;
    double test_fraction = 0.2;
    std::uint64_t split_seed = 0;
    split->add_option("--cohort", split_cohort)->required();
    split->add_option("--test-fraction", test_fraction);
    split->add_option("--boundary", split_boundary);
    split->add_option("--registry", split_registry);
    split->add_option("--seed", split_seed)->required();
    split->add_option("--out", split_out)->required();

    // --- snapshot --------------------------------------------------------
    auto* snapshot = app.add_subcommand("snapshot", "build a per-day snapshot dataset");
    std::string snap_cohort, snap_day, snap_form = "num", snap_registry, snap_out;
    double trend_t = 0.15;
    snapshot->add_option("--cohort", snap_cohort)->required();
    snapshot->add_option("--day", snap_day, "2|4|6|8|10|end")->required();
    snapshot->add_option("--form", snap_form, "num|cat");
    snapshot->add_option("--registry", snap_registry);
    snapshot->add_option("--trend-t", trend_t);
    snapshot->add_option("--out", snap_out)->required();

    // --- build-datasets -----------------------------------------------------
    auto* build = app.add_subcommand("build-datasets",
                                     "per-day train/test dataset pairs for one phase");
    std::string bd_cohort, bd_split, bd_phase, bd_form = "num", bd_boundary, bd_registry,
                bd_out_dir;
    double bd_trend_t = 0.15;
    build->add_option("--cohort", bd_cohort)->required();
    build->add_option("--split", bd_split)->required();
    build->add_option("--phase", bd_phase, "hcp|mcp")->required();
    build->add_option("--form", bd_form, "num|cat");
    build->add_option("--boundary", bd_boundary);
    build->add_option("--registry", bd_registry);
    build->add_option("--trend-t", bd_trend_t);
    build->add_option("--out-dir", bd_out_dir)->required();

    // --- train -----------------------------------------------------------
    auto* train = app.add_subcommand("train", "random hyperparameter search with CV");
    std::string train_dataset, train_folds = "auto", train_space = "full", train_out,
                train_log;
    int train_configs = 4096, train_thresholds = 100;
    double train_max_u = 0.25;
    std::uint64_t train_seed = 0;
    train->add_option("--dataset", train_dataset)->required();
    train->add_option("--configs", train_configs);
    train->add_option("--max-u", train_max_u);
    train->add_option("--folds", train_folds, "auto|<k>");
    train->add_option("--thresholds", train_thresholds);
    train->add_option("--space", train_space, "full|smoke");
    train->add_option("--seed", train_seed)->required();
    train->add_option("--out", train_out)->required();
    train->add_option("--log", train_log, "per-config CSV log");

    // --- evaluate -----------------------------------------------------------
    auto* evaluate_cmd = app.add_subcommand("evaluate", "score a model on a test dataset");
    std::string eval_model, eval_dataset, eval_out, eval_md, eval_phase, eval_day, eval_form;
    evaluate_cmd->add_option("--model", eval_model)->required();
    evaluate_cmd->add_option("--dataset", eval_dataset)->required();
    evaluate_cmd->add_option("--out", eval_out)->required();
    evaluate_cmd->add_option("--markdown", eval_md);
    evaluate_cmd->add_option("--phase", eval_phase);
    evaluate_cmd->add_option("--day", eval_day);
    evaluate_cmd->add_option("--form", eval_form);

    // --- predict -------------------------------------------------------------
    auto* predict = app.add_subcommand("predict", "triage predictions for snapshot rows");
    std::string pred_model, pred_input, pred_out;
    predict->add_option("--model", pred_model)->required();
    predict->add_option("--input", pred_input)->required();
    predict->add_option("--out", pred_out)->required();

    // --- verify ---------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "check artifact provenance hashes");
    std::string verify_dir;
    verify->add_option("--dir", verify_dir)->required();

    // --- pipeline ---------------------------------------------------------------
    auto* pipeline = app.add_subcommand("pipeline", "run every stage end to end");
    std::string pipe_out_dir, pipe_input, pipe_registry, pipe_boundary, pipe_space;
    int pipe_patients = -1, pipe_configs = -1;
    double pipe_drift = -1.0, pipe_mortality = -1.0;
    std::uint64_t pipe_seed = 0;
    bool pipe_seed_given = false;
    pipeline->add_option("--out-dir", pipe_out_dir);
    pipeline->add_option("--input", pipe_input, "event CSV (default: synthesize)");
    pipeline->add_option("--registry", pipe_registry);
    pipeline->add_option("--boundary", pipe_boundary);
    pipeline->add_option("--space", pipe_space, "full|smoke");
    pipeline->add_option("--patients", pipe_patients);
    pipeline->add_option("--configs", pipe_configs);
    pipeline->add_option("--drift", pipe_drift);
    pipeline->add_option("--mortality", pipe_mortality);
    pipeline->add_option("--seed", pipe_seed)->each([&](const std::string&) {
        pipe_seed_given = true;
    });

    CLI11_PARSE(app, argc, argv);

    try {
        load_global_config(global);
        if (synth->parsed()) {
            return cmd_synth(global, patients, drift, mortality, phase_mix, synth_seed,
                             synth_spec, synth_out);
        }
        if (ingest->parsed()) {
            return cmd_ingest(global, ingest_in, ingest_registry, ingest_boundary, ingest_out);
        }
        if (split->parsed()) {
            return cmd_split(global, split_cohort, test_fraction, split_seed, split_boundary,
                             split_registry, split_out);
        }
        if (snapshot->parsed()) {
            return cmd_snapshot(global, snap_cohort, snap_day, snap_form, snap_registry, trend_t,
                                snap_out);
        }
        if (build->parsed()) {
            return cmd_build_datasets(global, bd_cohort, bd_split, bd_phase, bd_form, bd_boundary,
                                      bd_registry, bd_trend_t, bd_out_dir);
        }
        if (train->parsed()) {
            return cmd_train(train_dataset, train_configs, train_max_u, train_folds,
                             train_thresholds, train_space, train_seed, threads, train_out,
                             train_log);
        }
        if (evaluate_cmd->parsed()) {
            return cmd_evaluate(eval_model, eval_dataset, eval_out, eval_md, eval_phase, eval_day,
                                eval_form, threads);
        }
        if (predict->parsed()) return cmd_predict(pred_model, pred_input, pred_out, threads);
        if (verify->parsed()) return cmd_verify(verify_dir);
        if (pipeline->parsed()) {
            PipelineConfig config = global.config;
            if (!pipe_out_dir.empty()) config.out_dir = pipe_out_dir;
            if (!pipe_input.empty()) config.input_path = pipe_input;
            if (!pipe_registry.empty()) config.registry_path = pipe_registry;
            if (!pipe_boundary.empty()) config.boundary_date = pipe_boundary;
            if (!pipe_space.empty()) config.space = pipe_space;
            if (pipe_patients > 0) config.synth_patients = pipe_patients;
            if (pipe_configs > 0) config.n_configs = pipe_configs;
            if (pipe_drift > 0) config.synth_drift = pipe_drift;
            if (pipe_mortality > 0) config.synth_mortality = pipe_mortality;
            if (pipe_seed_given) {
                config.seed = pipe_seed;
                config.seed_set = true;
            }
            if (threads > 0) config.threads = threads;
            const auto result = run_pipeline(config);
            std::cout << "pipeline finished: " << result.rows.size() << " models under "
                      << result.out_dir << '\n';
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
