#include "neuroauth/report.hpp"

#include <charconv>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <functional>
#include <sstream>

#include "neuroauth/config.hpp"
#include "neuroauth/error.hpp"

namespace neuroauth {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

json stats_json(const DatasetStats& s) {
  return {{"stage", to_string(s.stage)},
          {"entries", s.entries},
          {"total", s.total},
          {"average", s.average},
          {"median", s.median},
          {"minimum", s.minimum},
          {"maximum", s.maximum},
          {"std_population", s.std_population},
          {"std_sample", s.std_sample}};
}

json user_json(const UserResult& r) {
  json trials = json::array();
  for (const auto& t : r.threshold_trials) {
    trials.push_back({{"threshold", t.threshold},
                      {"n_selected", t.n_selected},
                      {"val_accuracy", t.score},
                      {"evaluated", t.evaluated}});
  }
  json grid = json::array();
  for (const auto& c : r.grid) {
    json cell = {{"spec", c.spec}, {"trained", c.trained}, {"val_accuracy", c.val_accuracy}, {"converged", c.converged}};
    if (!c.error.empty()) cell["error"] = c.error;
    grid.push_back(std::move(cell));
  }
  return {{"user_id", r.user_id},
          {"best", r.best_spec},
          {"threshold", r.threshold},
          {"selected_features", r.selected_features},
          {"selected_indices", r.selected_indices},
          {"threshold_trials", trials},
          {"grid", grid},
          {"val_accuracy", r.val_accuracy},
          {"test_accuracy", r.test_accuracy},
          {"test_f1", r.test_metrics.f1},
          {"test_precision", r.test_metrics.precision},
          {"test_recall", r.test_metrics.recall},
          {"confusion", {{"tp", r.test_confusion.tp}, {"fp", r.test_confusion.fp}, {"fn", r.test_confusion.fn}, {"tn", r.test_confusion.tn}}},
          {"rows", {{"train", r.train_rows}, {"validation", r.val_rows}, {"test", r.test_rows}}},
          {"converged", r.converged}};
}

HypothesisEntry guarded(const std::string& name, const std::function<TestResult()>& fn) {
  HypothesisEntry e;
  try {
    e.result = fn();
  } catch (const Error& err) {
    e.error = err.what();
  }
  e.result.name = name;
  return e;
}

json entry_json(const HypothesisEntry& e) {
  json j = to_json(e.result);
  if (!e.error.empty()) {
    j = {{"name", e.result.name}, {"error", e.error}};
  }
  return j;
}

}  // namespace

std::map<std::string, Summary> summarize_metrics(std::span<const UserResult> users) {
  std::vector<double> val, acc, f1, sel;
  for (const auto& u : users) {
    val.push_back(u.val_accuracy);
    acc.push_back(u.test_accuracy);
    f1.push_back(u.test_metrics.f1);
    sel.push_back(static_cast<double>(u.selected_features));
  }
  if (users.empty()) return {};
  return {{"val_accuracy", summarize(val)},
          {"test_accuracy", summarize(acc)},
          {"test_f1", summarize(f1)},
          {"selected_features", summarize(sel)}};
}

FamilyReport make_family_report(ClassifierFamily family, std::vector<UserResult> users) {
  FamilyReport f;
  f.family = family;
  f.users = std::move(users);
  f.aggregates = summarize_metrics(f.users);
  return f;
}

HypothesisBlock compute_hypotheses(std::span<const FamilyMetrics> families, bool welch) {
  HypothesisBlock h;
  for (const auto& f : families) {
    h.normality.push_back(guarded("ks_normality:" + f.family + ":test_accuracy",
                                  [&] { return ks_normality_test(f.accuracy); }));
    h.normality.push_back(guarded("ks_normality:" + f.family + ":test_f1", [&] { return ks_normality_test(f.f1); }));
  }
  for (std::size_t a = 0; a < families.size(); ++a) {
    for (std::size_t b = a + 1; b < families.size(); ++b) {
      const auto& fa = families[a];
      const auto& fb = families[b];
      const std::string pair = fa.family + "_vs_" + fb.family;
      h.t_tests.push_back(guarded("t_test:" + pair + ":test_accuracy",
                                  [&] { return t_test_independent(fa.accuracy, fb.accuracy, welch); }));
      h.t_tests.push_back(
          guarded("t_test:" + pair + ":test_f1", [&] { return t_test_independent(fa.f1, fb.f1, welch); }));
    }
  }
  return h;
}

std::vector<FamilyMetrics> metrics_from_report(const json& report) {
  if (!report.is_object() || !report.contains("families")) {
    throw Error(ErrorKind::kMalformedDocument, "report has no 'families' block");
  }
  std::vector<FamilyMetrics> out;
  try {
    for (const auto& f : report.at("families")) {
      FamilyMetrics m;
      m.family = f.at("family").get<std::string>();
      for (const auto& u : f.at("users")) {
        m.accuracy.push_back(u.at("test_accuracy").get<double>());
        m.f1.push_back(u.at("test_f1").get<double>());
      }
      out.push_back(std::move(m));
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, std::string("report: ") + e.what());
  }
  return out;
}

json to_json(const Summary& s) {
  return {{"mean", s.mean},
          {"maximum", s.maximum},
          {"minimum", s.minimum},
          {"median", s.median},
          {"std_population", s.std_population},
          {"std_sample", s.std_sample}};
}

json to_json(const TestResult& t) {
  json j = {{"name", t.name},       {"statistic", t.statistic}, {"p_value", t.p_value},
            {"n1", t.n1},           {"n2", t.n2},               {"alpha", kSignificanceLevel},
            {"reject_null", t.reject_null}};
  if (t.df > 0.0) j["df"] = t.df;
  if (!t.note.empty()) j["note"] = t.note;
  return j;
}

json to_json(const HypothesisBlock& h) {
  json j = {{"normality", json::array()}, {"t_tests", json::array()}};
  for (const auto& e : h.normality) j["normality"].push_back(entry_json(e));
  for (const auto& e : h.t_tests) j["t_tests"].push_back(entry_json(e));
  return j;
}

json to_json(const PilotReport& p) {
  return {{"classifier", to_string(p.classifier)},
          {"classes", p.classes},
          {"confusion", p.confusion},
          {"accuracy", p.accuracy},
          {"train_rows", p.train_rows},
          {"test_rows", p.test_rows},
          {"projection_dims", p.projection_dims}};
}

json report_to_json(const EvaluationReport& r) {
  json j;
  j["schema_version"] = kReportSchemaVersion;
  j["provenance"] = {{"seed", r.seed},
                     {"config_hash", r.config_hash},
                     {"started_at", r.started_at},
                     {"finished_at", r.finished_at}};
  j["config"] = r.config;
  json dataset = json::object();
  if (r.pre_processing) dataset["pre_processing"] = stats_json(*r.pre_processing);
  if (r.post_processing) dataset["post_processing"] = stats_json(*r.post_processing);
  json counts = json::array();
  for (const auto& c : r.window_counts) {
    counts.push_back({{"user_id", c.user_id}, {"session_id", c.session_id}, {"windows", c.count}});
  }
  dataset["window_counts"] = counts;
  dataset["split_sizes"] = {{"train", r.split_sizes.train},
                            {"validation", r.split_sizes.validation},
                            {"test", r.split_sizes.test}};
  j["dataset"] = dataset;

  j["families"] = json::array();
  for (const auto& f : r.families) {
    json users = json::array();
    for (const auto& u : f.users) users.push_back(user_json(u));
    json agg = json::object();
    for (const char* m : kAggregateMetrics) {
      auto it = f.aggregates.find(m);
      if (it != f.aggregates.end()) agg[m] = to_json(it->second);
    }
    j["families"].push_back({{"family", to_string(f.family)}, {"users", users}, {"aggregates", agg}});
  }
  if (!r.permutation_control.empty()) {
    json pc = json::object();
    for (const auto& [family, summaries] : r.permutation_control) {
      for (const auto& [metric, s] : summaries) pc[to_string(family)][metric] = to_json(s);
    }
    j["permutation_control"] = pc;
  }
  if (r.hypotheses) j["hypotheses"] = to_json(*r.hypotheses);
  j["pilot"] = json::array();
  for (const auto& p : r.pilots) j["pilot"].push_back(to_json(p));
  j["failures"] = json::array();
  for (const auto& f : r.failures) {
    j["failures"].push_back({{"user_id", f.user_id}, {"kind", to_string(f.kind)}, {"message", f.message}});
  }
  j["notes"] = r.notes;
  j["complete"] = r.complete;
  return j;
}

json strip_timestamps(json report) {
  if (report.contains("provenance")) {
    report["provenance"].erase("started_at");
    report["provenance"].erase("finished_at");
  }
  return report;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const json& j, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIo, "cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error(ErrorKind::kIo, "write failed: " + path.string());
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kMissingFile, "file not found: " + path.string());
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, path.string() + " is not valid JSON: " + e.what());
  }
}

std::vector<std::filesystem::path> write_plot_tables(const json& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto open = [&](const std::string& name) {
    written.push_back(dir / name);
    std::ofstream out(written.back(), std::ios::binary);
    if (!out) throw Error(ErrorKind::kIo, "cannot write " + written.back().string());
    return out;
  };
  try {
    auto sel = open("selected_features.csv");
    auto val = open("validation_accuracy.csv");
    auto test = open("test_performance.csv");
    sel << "family,user_id,threshold,selected_features\n";
    val << "family,user_id,val_accuracy\n";
    test << "family,user_id,test_accuracy,test_f1\n";
    for (const auto& f : report.at("families")) {
      const std::string fam = f.at("family").get<std::string>();
      for (const auto& u : f.at("users")) {
        const std::string id = std::to_string(u.at("user_id").get<int>());
        sel << fam << ',' << id << ',' << num(u.at("threshold").get<double>()) << ','
            << u.at("selected_features").get<std::size_t>() << '\n';
        val << fam << ',' << id << ',' << num(u.at("val_accuracy").get<double>()) << '\n';
        test << fam << ',' << id << ',' << num(u.at("test_accuracy").get<double>()) << ','
             << num(u.at("test_f1").get<double>()) << '\n';
      }
    }
    if (report.contains("pilot")) {
      for (const auto& p : report.at("pilot")) {
        auto out = open("pilot_confusion_" + p.at("classifier").get<std::string>() + ".csv");
        const auto classes = p.at("classes").get<std::vector<int>>();
        out << "true_user";
        for (int c : classes) out << ",pred_" << c;
        out << '\n';
        const auto cm = p.at("confusion").get<std::vector<std::vector<std::size_t>>>();
        for (std::size_t r = 0; r < classes.size(); ++r) {
          out << classes[r];
          for (std::size_t v : cm.at(r)) out << ',' << v;
          out << '\n';
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, std::string("report: ") + e.what());
  }
  return written;
}

std::string format_report_table(const json& report) {
  std::ostringstream os;
  char line[256];
  try {
    for (const auto& f : report.at("families")) {
      os << "classifier " << f.at("family").get<std::string>() << '\n';
      std::snprintf(line, sizeof line, "  %-6s %8s %8s %8s %5s  %s\n", "user", "val_acc", "test_acc", "test_f1",
                    "feat", "chosen");
      os << line;
      for (const auto& u : f.at("users")) {
        std::snprintf(line, sizeof line, "  %-6d %8.4f %8.4f %8.4f %5zu  ", u.at("user_id").get<int>(),
                      u.at("val_accuracy").get<double>(), u.at("test_accuracy").get<double>(),
                      u.at("test_f1").get<double>(), u.at("selected_features").get<std::size_t>());
        os << line << u.at("best").dump() << '\n';
      }
      for (const char* m : kAggregateMetrics) {
        if (!f.at("aggregates").contains(m)) continue;
        const auto& a = f.at("aggregates").at(m);
        std::snprintf(line, sizeof line, "  %-18s mean %.4f  max %.4f  min %.4f  median %.4f  std %.4f\n", m,
                      a.at("mean").get<double>(), a.at("maximum").get<double>(), a.at("minimum").get<double>(),
                      a.at("median").get<double>(), a.at("std_population").get<double>());
        os << line;
      }
    }
    if (report.contains("hypotheses")) {
      os << "hypothesis tests (alpha 0.05)\n";
      for (const char* block : {"normality", "t_tests"}) {
        for (const auto& t : report.at("hypotheses").at(block)) {
          if (t.contains("error")) {
            os << "  " << t.at("name").get<std::string>() << ": " << t.at("error").get<std::string>() << '\n';
            continue;
          }
          std::snprintf(line, sizeof line, "  %-44s stat %9.4f  p %.4f\n", t.at("name").get<std::string>().c_str(),
                        t.at("statistic").get<double>(), t.at("p_value").get<double>());
          os << line;
        }
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kMalformedDocument, std::string("report: ") + e.what());
  }
  return os.str();
}

}  // namespace neuroauth
