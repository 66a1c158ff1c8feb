#include "prognosis/evaluation.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "prognosis/csv.hpp"

namespace prognosis {

using nlohmann::json;

namespace {

ViewMetrics view_metrics(const std::vector<Label>& truth, const std::vector<Label>& predicted,
                         const std::vector<double>& p_dead) {
    ViewMetrics v;
    v.confusion = confusion(truth, predicted);
    v.f2_dead = f_beta_for_class(v.confusion, Label::Dead, 2.0);
    v.f2_alive = f_beta_for_class(v.confusion, Label::Alive, 2.0);
    v.macro_f2 = 0.5 * (v.f2_dead + v.f2_alive);
    bool has_dead = false, has_alive = false;
    for (Label l : truth) (l == Label::Dead ? has_dead : has_alive) = true;
    if (has_dead && has_alive) v.roc_auc = roc_auc(p_dead, truth);
    return v;
}

}  // namespace

EvalReport evaluate(const Forest& forest, const Dataset& test, int n_threads) {
    if (test.rows.empty()) throw std::invalid_argument("evaluate: empty test set");
    if (!forest.threshold) {
        throw std::invalid_argument(
            "evaluate: model has no uncertainty threshold; train with threshold optimization");
    }
    const auto probs = predict_proba_all(forest, test, n_threads);

    EvalReport report;
    report.phase = test.phase ? to_string(*test.phase) : "";
    report.day = to_string(test.day);
    report.form = to_string(test.form);
    report.n_samples = test.size();

    std::vector<Label> truth_all(test.labels.begin(), test.labels.end());
    std::vector<Label> pred_all;
    std::vector<double> p_dead_all;
    std::vector<Label> truth_kept, pred_kept;
    std::vector<double> p_dead_kept;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        pred_all.push_back(probs[i].argmax());
        p_dead_all.push_back(probs[i].dead);
        if (probs[i].max() > *forest.threshold) {
            truth_kept.push_back(truth_all[i]);
            pred_kept.push_back(pred_all[i]);
            p_dead_kept.push_back(probs[i].dead);
        }
    }
    report.uncertain_fraction =
        1.0 - static_cast<double>(truth_kept.size()) / static_cast<double>(test.size());
    report.complete = view_metrics(truth_all, pred_all, p_dead_all);
    if (!truth_kept.empty()) {
        report.no_uncertain = view_metrics(truth_kept, pred_kept, p_dead_kept);
    }
    return report;
}

namespace {

json view_to_json(const ViewMetrics& v) {
    json j;
    j["f2_dead"] = v.f2_dead;
    j["f2_alive"] = v.f2_alive;
    j["macro_f2"] = v.macro_f2;
    j["roc_auc"] = v.roc_auc ? json(*v.roc_auc) : json(nullptr);
    j["confusion"] = {{"tp", v.confusion.tp},
                      {"fp", v.confusion.fp},
                      {"fn", v.confusion.fn},
                      {"tn", v.confusion.tn}};
    return j;
}

ViewMetrics view_from_json(const json& j) {
    ViewMetrics v;
    v.f2_dead = j.at("f2_dead").get<double>();
    v.f2_alive = j.at("f2_alive").get<double>();
    v.macro_f2 = j.at("macro_f2").get<double>();
    if (!j.at("roc_auc").is_null()) v.roc_auc = j.at("roc_auc").get<double>();
    const auto& c = j.at("confusion");
    v.confusion.tp = c.at("tp").get<long long>();
    v.confusion.fp = c.at("fp").get<long long>();
    v.confusion.fn = c.at("fn").get<long long>();
    v.confusion.tn = c.at("tn").get<long long>();
    return v;
}

}  // namespace

void write_report_json(const std::string& path, const EvalReport& report,
                       const Provenance& provenance) {
    json j;
    j["dataset"] = {{"phase", report.phase}, {"day", report.day}, {"form", report.form}};
    j["n_samples"] = report.n_samples;
    j["uncertain_fraction"] = report.uncertain_fraction;
    j["complete"] = view_to_json(report.complete);
    j["no_uncertain"] = view_to_json(report.no_uncertain);
    j["provenance"] = provenance_to_json(provenance);
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << j.dump(2) << '\n';
}

EvalReport load_report_json(const std::string& path, Provenance* provenance) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open report: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("report " + path + " is not valid JSON: " + e.what());
    }
    if (!j.contains("provenance")) {
        throw std::runtime_error("report " + path + ": missing provenance block");
    }
    EvalReport r;
    r.phase = j.at("dataset").at("phase").get<std::string>();
    r.day = j.at("dataset").at("day").get<std::string>();
    r.form = j.at("dataset").at("form").get<std::string>();
    r.n_samples = j.at("n_samples").get<std::size_t>();
    r.uncertain_fraction = j.at("uncertain_fraction").get<double>();
    r.complete = view_from_json(j.at("complete"));
    r.no_uncertain = view_from_json(j.at("no_uncertain"));
    if (provenance) *provenance = provenance_from_json(j.at("provenance"));
    return r;
}

namespace {

void render_view(std::ostringstream& os, const std::string& title, const ViewMetrics& v) {
    os << "### " << title << "\n\n";
    os << "| metric | value |\n|---|---|\n";
    os << "| F2 (dead) | " << csv::format_double(v.f2_dead) << " |\n";
    os << "| F2 (alive) | " << csv::format_double(v.f2_alive) << " |\n";
    os << "| macro F2 | " << csv::format_double(v.macro_f2) << " |\n";
    os << "| ROC-AUC | " << (v.roc_auc ? csv::format_double(*v.roc_auc) : "n/a") << " |\n\n";
    os << "|  | pred. alive | pred. dead |\n|---|---|---|\n";
    os << "| **alive** | " << v.confusion.tn << " | " << v.confusion.fp << " |\n";
    os << "| **dead** | " << v.confusion.fn << " | " << v.confusion.tp << " |\n\n";
}

}  // namespace

std::string report_markdown(const EvalReport& report) {
    std::ostringstream os;
    os << "## Evaluation";
    if (!report.phase.empty()) os << " — " << report.phase;
    os << " — day " << report.day << " (" << report.form << ")\n\n";
    os << "Samples: " << report.n_samples << ", uncertain fraction: "
       << csv::format_double(report.uncertain_fraction) << "\n\n";
    render_view(os, "Complete", report.complete);
    render_view(os, "No Unc", report.no_uncertain);
    return os.str();
}

void write_report_markdown(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write report: " + path);
    out << report_markdown(report);
}

}  // namespace prognosis
