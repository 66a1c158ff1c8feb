#include "prognosis/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "prognosis/csv.hpp"
#include "prognosis/parallel.hpp"

namespace prognosis {

namespace fs = std::filesystem;
using nlohmann::json;

PipelineConfig PipelineConfig::from_json(const json& j) {
    PipelineConfig c;
    c.registry_path = j.value("registry", c.registry_path);
    c.boundary_date = j.value("boundary", c.boundary_date);
    c.test_fraction = j.value("test_fraction", c.test_fraction);
    c.trend_t = j.value("trend_t", c.trend_t);
    if (j.contains("days")) {
        c.days.clear();
        for (const auto& d : j.at("days")) {
            auto day = day_config_from_string(d.get<std::string>());
            if (!day) throw PipelineError("config: unknown day '" + d.get<std::string>() + "'");
            c.days.push_back(*day);
        }
    }
    if (j.contains("forms")) {
        c.forms.clear();
        for (const auto& f : j.at("forms")) {
            auto form = feature_form_from_string(f.get<std::string>());
            if (!form) throw PipelineError("config: unknown form '" + f.get<std::string>() + "'");
            c.forms.push_back(*form);
        }
    }
    if (j.contains("search")) {
        const auto& s = j.at("search");
        c.n_configs = s.value("configs", c.n_configs);
        if (s.contains("folds") && !s.at("folds").is_string()) {
            c.k_folds = s.at("folds").get<int>();
        }
        c.max_u = s.value("max_u", c.max_u);
        c.n_thresholds = s.value("thresholds", c.n_thresholds);
        c.space = s.value("space", c.space);
    }
    c.input_path = j.value("input", c.input_path);
    if (j.contains("synth")) {
        const auto& s = j.at("synth");
        c.synth_patients = s.value("patients", c.synth_patients);
        c.synth_drift = s.value("drift", c.synth_drift);
        c.synth_mortality = s.value("mortality", c.synth_mortality);
    }
    c.out_dir = j.value("out_dir", c.out_dir);
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_set = true;
    }
    c.threads = j.value("threads", c.threads);
    return c;
}

json PipelineConfig::to_json() const {
    json j;
    j["registry"] = registry_path;
    j["boundary"] = boundary_date;
    j["test_fraction"] = test_fraction;
    j["trend_t"] = trend_t;
    json days_j = json::array();
    for (DayConfig d : days) days_j.push_back(to_string(d));
    j["days"] = std::move(days_j);
    json forms_j = json::array();
    for (FeatureForm f : forms) forms_j.push_back(to_string(f));
    j["forms"] = std::move(forms_j);
    j["search"] = {{"configs", n_configs},
                   {"folds", k_folds ? json(*k_folds) : json("auto")},
                   {"max_u", max_u},
                   {"thresholds", n_thresholds},
                   {"space", space}};
    j["input"] = input_path;
    j["synth"] = {{"patients", synth_patients},
                  {"drift", synth_drift},
                  {"mortality", synth_mortality}};
    j["out_dir"] = out_dir;
    j["seed"] = seed;
    // threads deliberately left out: parallelism must not change any artifact
    return j;
}

void PipelineConfig::validate() const {
    if (!seed_set) throw PipelineError("config: a seed is required for reproducible runs");
    if (out_dir.empty()) throw PipelineError("config: out_dir is required");
    if (!registry_path.empty() && !fs::exists(registry_path)) {
        throw PipelineError("config: registry file does not exist: " + registry_path);
    }
    if (!input_path.empty() && !fs::exists(input_path)) {
        throw PipelineError("config: input file does not exist: " + input_path);
    }
    if (!parse_iso_date(boundary_date)) {
        throw PipelineError("config: boundary must be an ISO date, got '" + boundary_date + "'");
    }
    if (!search_space_from_string(space)) {
        throw PipelineError("config: unknown search space '" + space + "'");
    }
    if (days.empty() || forms.empty()) {
        throw PipelineError("config: at least one day config and one form are required");
    }
}

namespace {

struct Stage {
    const char* name;
};

[[noreturn]] void stage_fail(const char* stage, const std::string& what) {
    throw PipelineError(std::string("stage '") + stage + "': " + what);
}

std::string model_tag(EnsembleKind kind, FeatureForm form) {
    return std::string(kind == EnsembleKind::RandomForest ? "RF" : "ET") + "-" +
           (form == FeatureForm::Numerical ? "N" : "C");
}

json stats_to_json(const CohortStats& stats) {
    auto phase_json = [](const PhaseStats& p) {
        json j;
        j["patients"] = p.n_patients;
        j["dead"] = p.n_dead;
        j["mortality_rate"] = p.mortality_rate;
        j["median_stay"] = p.median_stay;
        json med = json::object();
        for (const auto& [test, m] : p.median_values) med[to_string(test)] = m;
        j["median_values"] = std::move(med);
        return j;
    };
    json j;
    j["total_patients"] = stats.n_total;
    j["excluded_patients"] = stats.n_excluded;
    j["overall"] = phase_json(stats.overall);
    j["hcp"] = phase_json(stats.hcp);
    j["mcp"] = phase_json(stats.mcp);
    return j;
}

}  // namespace

PipelineResult run_pipeline(const PipelineConfig& config) {
    config.validate();
    const int threads = config.threads > 0 ? config.threads : default_threads();
    const int boundary_day = *parse_iso_date(config.boundary_date);
    const LabRegistry registry = config.registry_path.empty()
                                     ? LabRegistry::defaults()
                                     : LabRegistry::load(config.registry_path);

    const fs::path out(config.out_dir);
    fs::create_directories(out);
    fs::create_directories(out / "datasets");
    fs::create_directories(out / "logs");
    fs::create_directories(out / "models");
    fs::create_directories(out / "reports");

    const json config_json = config.to_json();
    const Provenance prov = make_provenance(config_json, config.seed);
    {
        std::ofstream f(out / "run_config.json");
        f << config_json.dump(2) << '\n';
    }

    // --- cohort ---------------------------------------------------------
    Cohort records;
    if (config.input_path.empty()) {
        GeneratorSpec gen = GeneratorSpec::defaults();
        gen.n_patients = config.synth_patients;
        gen.drift_factor = config.synth_drift;
        gen.base_mortality = config.synth_mortality;
        gen.boundary_day = boundary_day;
        gen.seed = derive_seed(config.seed, 1);
        try {
            records = generate(gen);
        } catch (const std::exception& e) {
            stage_fail("synth", e.what());
        }
        write_cohort((out / "cohort.csv").string(), records);
        // round-trip through ingest so downstream sees exactly what the file says
        records = ingest_cohort((out / "cohort.csv").string(), registry).records;
    } else {
        try {
            auto report = ingest_cohort(config.input_path, registry);
            records = std::move(report.records);
            for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
            for (const auto& r : report.rejected_rows) std::cerr << "rejected: " << r << '\n';
        } catch (const std::exception& e) {
            stage_fail("ingest", e.what());
        }
        write_cohort((out / "cohort.csv").string(), records);
    }
    {
        json stats = stats_to_json(cohort_stats(records, boundary_day));
        stats["provenance"] = provenance_to_json(prov);
        std::ofstream f(out / "cohort_stats.json");
        f << stats.dump(2) << '\n';
    }

    // --- split ----------------------------------------------------------
    SplitAssignment split;
    try {
        split = stratified_split(records, boundary_day, config.test_fraction,
                                 derive_seed(config.seed, 2));
    } catch (const std::exception& e) {
        stage_fail("split", e.what());
    }
    write_split((out / "split.csv").string(), split);

    // --- datasets ---------------------------------------------------------
    // pairs[phase][form][day index]
    std::map<std::pair<Phase, FeatureForm>, std::vector<DatasetPair>> pairs;
    for (Phase phase : {Phase::Hcp, Phase::Mcp}) {
        for (FeatureForm form : config.forms) {
            try {
                pairs[{phase, form}] = build_day_datasets(records, split, boundary_day, phase,
                                                          form, config.days, registry,
                                                          config.trend_t);
            } catch (const std::exception& e) {
                stage_fail("build-datasets", e.what());
            }
            const auto& built = pairs[{phase, form}];
            for (std::size_t d = 0; d < config.days.size(); ++d) {
                const std::string base = to_string(phase) + "_day" +
                                         to_string(config.days[d]) + "_" + to_string(form);
                write_dataset((out / "datasets" / (base + "_train.csv")).string(),
                              built[d].train);
                write_dataset((out / "datasets" / (base + "_test.csv")).string(), built[d].test);
            }
        }
    }

    // --- train + evaluate -------------------------------------------------
    PipelineResult result;
    result.out_dir = config.out_dir;
    const SearchSpace space = *search_space_from_string(config.space);

    for (Phase phase : {Phase::Hcp, Phase::Mcp}) {
        for (std::size_t d = 0; d < config.days.size(); ++d) {
            const DayConfig day = config.days[d];

            struct Cell {
                EnsembleKind kind;
                FeatureForm form;
                const ConfigLogEntry* entry = nullptr;
            };
            std::vector<Cell> cells;
            std::map<FeatureForm, SearchResult> searches;

            for (FeatureForm form : config.forms) {
                SearchSpec spec;
                spec.n_configs = config.n_configs;
                spec.k_folds = config.k_folds;
                spec.max_u = config.max_u;
                spec.n_thresholds = config.n_thresholds;
                spec.space = space;
                spec.seed = derive_seed(config.seed,
                                        0x100ull + (phase == Phase::Hcp ? 0 : 1) * 0x1000ull +
                                            d * 0x10ull + (form == FeatureForm::Numerical ? 0 : 1));
                const Dataset& train_ds = pairs.at({phase, form})[d].train;
                try {
                    searches[form] = run_search(train_ds, spec, threads);
                } catch (const std::exception& e) {
                    stage_fail("train", e.what());
                }
                write_search_log((out / "logs" /
                                  ("search_" + to_string(phase) + "_day" + to_string(day) + "_" +
                                   to_string(form) + ".csv"))
                                     .string(),
                                 searches[form]);
            }

            // best log entry per (algorithm, form) candidate
            for (EnsembleKind kind : {EnsembleKind::RandomForest, EnsembleKind::ExtraTrees}) {
                for (FeatureForm form : config.forms) {
                    const ConfigLogEntry* best = nullptr;
                    for (const auto& entry : searches.at(form).log) {
                        if (entry.config.kind != kind) continue;
                        if (!best || entry.cv.mean_score > best->cv.mean_score) best = &entry;
                    }
                    if (best) cells.push_back({kind, form, best});
                }
            }
            if (cells.empty()) stage_fail("train", "no successful configuration");

            // winner: highest CV score; ties prefer RF over ET, then num over
            // cat — cells are already in that preference order
            const Cell* winner = &cells.front();
            for (const auto& c : cells) {
                if (c.entry->cv.mean_score > winner->entry->cv.mean_score) winner = &c;
            }

            const Dataset& train_ds = pairs.at({phase, winner->form})[d].train;
            const Dataset& test_ds = pairs.at({phase, winner->form})[d].test;
            Forest forest;
            try {
                forest = fit(train_ds, winner->entry->config, threads);
            } catch (const std::exception& e) {
                stage_fail("train", e.what());
            }
            forest.threshold = winner->entry->cv.mean_threshold;

            const std::string base = to_string(phase) + "_day" + to_string(day);
            save_forest(forest, (out / "models" / (base + ".model.json")).string(), prov);

            EvalReport report;
            try {
                report = evaluate(forest, test_ds, threads);
            } catch (const std::exception& e) {
                stage_fail("evaluate", e.what());
            }
            write_report_json((out / "reports" / (base + ".report.json")).string(), report, prov);
            write_report_markdown((out / "reports" / (base + ".report.md")).string(), report);

            PipelineSummaryRow row;
            row.phase = phase;
            row.day = day;
            row.model_tag = model_tag(winner->kind, winner->form);
            row.cv_score = winner->entry->cv.mean_score;
            row.report = report;
            result.rows.push_back(std::move(row));
        }
    }

    // --- summary ----------------------------------------------------------
    json summary;
    summary["provenance"] = provenance_to_json(prov);
    json rows = json::array();
    for (const auto& row : result.rows) {
        json r;
        r["phase"] = to_string(row.phase);
        r["day"] = to_string(row.day);
        r["model"] = row.model_tag;
        r["cv_macro_f2"] = row.cv_score;
        r["f2"] = row.report.complete.macro_f2;
        r["roc_auc"] = row.report.complete.roc_auc ? json(*row.report.complete.roc_auc)
                                                   : json(nullptr);
        r["f2_no_uncertain"] = row.report.no_uncertain.macro_f2;
        r["roc_auc_no_uncertain"] = row.report.no_uncertain.roc_auc
                                        ? json(*row.report.no_uncertain.roc_auc)
                                        : json(nullptr);
        r["uncertain_fraction"] = row.report.uncertain_fraction;
        rows.push_back(std::move(r));
    }
    summary["rows"] = std::move(rows);
    {
        std::ofstream f(out / "summary.json");
        f << summary.dump(2) << '\n';
    }
    {
        std::ofstream f(out / "summary.md");
        f << "# Pipeline summary\n\n";
        auto pct = [](double v) {
            char buf[16];
            std::snprintf(buf, sizeof(buf), "%.1f", v * 100.0);
            return std::string(buf);
        };
        for (Phase phase : {Phase::Hcp, Phase::Mcp}) {
            f << "## " << (phase == Phase::Hcp ? "High" : "Moderate")
              << " Contagion Phase\n\n";
            f << "| day | F2 | ROC | F2-U | ROC-U | % Unc | Model |\n";
            f << "|---|---|---|---|---|---|---|\n";
            for (const auto& row : result.rows) {
                if (row.phase != phase) continue;
                f << "| " << to_string(row.day) << " | " << pct(row.report.complete.macro_f2)
                  << " | "
                  << (row.report.complete.roc_auc ? pct(*row.report.complete.roc_auc) : "n/a")
                  << " | " << pct(row.report.no_uncertain.macro_f2) << " | "
                  << (row.report.no_uncertain.roc_auc ? pct(*row.report.no_uncertain.roc_auc)
                                                      : "n/a")
                  << " | " << pct(row.report.uncertain_fraction) << " | " << row.model_tag
                  << " |\n";
            }
            f << '\n';
        }
    }
    return result;
}

std::vector<std::string> verify_artifacts(const std::string& dir) {
    std::vector<std::string> problems;
    const fs::path root(dir);
    const fs::path config_path = root / "run_config.json";
    if (!fs::exists(config_path)) {
        problems.push_back("missing run_config.json under " + dir);
        return problems;
    }
    json config_json;
    try {
        std::ifstream in(config_path);
        in >> config_json;
    } catch (const std::exception& e) {
        problems.push_back(std::string("cannot parse run_config.json: ") + e.what());
        return problems;
    }
    const std::string expected = config_hash(config_json);

    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
        if (entry.path().filename() == "run_config.json") continue;
        json j;
        try {
            std::ifstream in(entry.path());
            in >> j;
        } catch (const std::exception& e) {
            problems.push_back(entry.path().string() + ": unreadable JSON: " + e.what());
            continue;
        }
        if (!j.contains("provenance")) {
            problems.push_back(entry.path().string() + ": missing provenance block");
            continue;
        }
        const auto& p = j.at("provenance");
        if (!p.contains("config_hash") || p.at("config_hash").get<std::string>() != expected) {
            problems.push_back(entry.path().string() + ": config hash mismatch");
        }
    }
    return problems;
}

}  // namespace prognosis
