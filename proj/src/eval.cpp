#include "chatmem/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace chatmem {

namespace {

using nlohmann::json;

json aggregate_to_json(const TestAggregate& a) {
    return json{{"questions", a.questions}, {"recall", a.recall},   {"precision", a.precision},
                {"f2", a.f2},               {"f2_std", a.f2_std}};
}

std::string fixed(double v, int width = 7) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%*.2f", width, v);
    return buf;
}

}  // namespace

double f2_score(double precision, double recall) {
    double denom = 4.0 * precision + recall;
    if (denom <= 0.0) return 0.0;
    return 5.0 * precision * recall / denom;
}

RetrievalScore score_retrieval(const std::vector<int>& relevant,
                               const std::vector<int>& retrieved) {
    std::set<int> want(relevant.begin(), relevant.end());
    std::set<int> got(retrieved.begin(), retrieved.end());
    size_t hits = 0;
    for (int id : got)
        if (want.count(id)) ++hits;

    RetrievalScore s;
    s.precision = got.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(got.size());
    s.recall = want.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(want.size());
    s.f2 = f2_score(s.precision, s.recall);
    return s;
}

QuestionScore score_trace(const TraceRecord& trace) {
    QuestionScore q;
    q.question_id = trace.question_id;
    q.test_name = trace.test_name;
    q.score = score_retrieval(trace.relevant, trace.retrieved);
    q.degraded = trace.degraded;
    return q;
}

TestAggregate aggregate_scores(const std::vector<QuestionScore>& scores) {
    TestAggregate a;
    a.questions = static_cast<int>(scores.size());
    if (scores.empty()) return a;
    double sum_r = 0, sum_p = 0, sum_f = 0;
    for (const QuestionScore& s : scores) {
        sum_r += s.score.recall;
        sum_p += s.score.precision;
        sum_f += s.score.f2;
    }
    double n = static_cast<double>(scores.size());
    a.recall = 100.0 * sum_r / n;
    a.precision = 100.0 * sum_p / n;
    a.f2 = 100.0 * sum_f / n;
    double var = 0;
    for (const QuestionScore& s : scores) {
        double d = 100.0 * s.score.f2 - a.f2;
        var += d * d;
    }
    a.f2_std = std::sqrt(var / n);
    return a;
}

bool expected_meta(const std::string& test_name) {
    if (test_name == kTimeContentTest) return true;
    const auto& names = time_test_names();
    return std::find(names.begin(), names.end(), test_name) != names.end();
}

bool expected_semantic(const std::string& test_name) { return test_name == kTimeContentTest; }

ClassifierStats classifier_stats(const std::vector<TraceRecord>& traces) {
    ClassifierStats st;
    for (const TraceRecord& t : traces) {
        if (!t.classified) continue;
        ++st.classified;
        if (t.meta == expected_meta(t.test_name)) ++st.meta_correct;
        if (t.semantic == expected_semantic(t.test_name)) ++st.semantic_correct;
    }
    return st;
}

Report build_report(const std::vector<TraceRecord>& traces) {
    Report report;
    std::map<std::string, std::vector<QuestionScore>> per_test;
    for (const TraceRecord& t : traces) {
        if (report.mode.empty())
            report.mode = t.mode;
        else if (report.mode != t.mode)
            throw std::invalid_argument("build_report got mixed modes: " + report.mode + " and " +
                                        t.mode);
        per_test[t.test_name].push_back(score_trace(t));
        if (t.degraded) ++report.degraded;
        ++report.questions;
    }

    for (const auto& [test, scores] : per_test) report.by_test[test] = aggregate_scores(scores);

    // Unweighted mean over the time tests present.
    TestAggregate overall;
    std::vector<double> f2_means;
    for (const std::string& test : time_test_names()) {
        auto it = report.by_test.find(test);
        if (it == report.by_test.end()) continue;
        overall.questions += it->second.questions;
        overall.recall += it->second.recall;
        overall.precision += it->second.precision;
        overall.f2 += it->second.f2;
        f2_means.push_back(it->second.f2);
    }
    if (!f2_means.empty()) {
        double n = static_cast<double>(f2_means.size());
        overall.recall /= n;
        overall.precision /= n;
        overall.f2 /= n;
        double var = 0;
        for (double f : f2_means) var += (f - overall.f2) * (f - overall.f2);
        overall.f2_std = std::sqrt(var / n);
    }
    report.time_overall = overall;

    auto tc = report.by_test.find(kTimeContentTest);
    if (tc != report.by_test.end()) report.time_content = tc->second;

    report.classifier = classifier_stats(traces);
    return report;
}

std::vector<Report> build_reports(const std::vector<TraceRecord>& traces) {
    std::map<std::string, std::vector<TraceRecord>> by_mode;
    for (const TraceRecord& t : traces) by_mode[t.mode].push_back(t);
    std::vector<Report> reports;
    for (const auto& [mode, group] : by_mode) reports.push_back(build_report(group));
    return reports;
}

std::string format_report(const Report& report) {
    std::ostringstream out;
    out << "mode: " << report.mode << "  (" << report.questions << " questions";
    if (report.degraded > 0) out << ", " << report.degraded << " degraded";
    out << ")\n";
    out << "  test            n   recall   precis       F2   F2 std\n";
    auto row = [&](const std::string& name, const TestAggregate& a) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "  %-14s %4d  %s  %s  %s  %s\n", name.c_str(), a.questions,
                      fixed(a.recall).c_str(), fixed(a.precision).c_str(), fixed(a.f2).c_str(),
                      fixed(a.f2_std).c_str());
        out << buf;
    };
    for (const std::string& test : time_test_names()) {
        auto it = report.by_test.find(test);
        if (it != report.by_test.end()) row(test, it->second);
    }
    row("time (mean)", report.time_overall);
    if (report.time_content) row(kTimeContentTest, *report.time_content);
    if (report.classifier.classified > 0) {
        char buf[120];
        std::snprintf(buf, sizeof buf,
                      "  classifier: meta %.2f%%, semantic %.2f%% over %d queries\n",
                      report.classifier.meta_accuracy(), report.classifier.semantic_accuracy(),
                      report.classifier.classified);
        out << buf;
    }
    return out.str();
}

std::string format_report_tsv(const Report& report) {
    std::ostringstream out;
    out << "test\tn\trecall\tprecision\tf2\tf2_std\n";
    auto row = [&](const std::string& name, const TestAggregate& a) {
        out << name << "\t" << a.questions << "\t" << a.recall << "\t" << a.precision << "\t"
            << a.f2 << "\t" << a.f2_std << "\n";
    };
    for (const std::string& test : time_test_names()) {
        auto it = report.by_test.find(test);
        if (it != report.by_test.end()) row(test, it->second);
    }
    row("time_mean", report.time_overall);
    if (report.time_content) row(kTimeContentTest, *report.time_content);
    return out.str();
}

void write_report_json(const std::vector<Report>& reports, const std::string& path) {
    json out = json::array();
    for (const Report& r : reports) {
        json by_test = json::object();
        for (const auto& [test, agg] : r.by_test) by_test[test] = aggregate_to_json(agg);
        json entry = {
            {"mode", r.mode},
            {"questions", r.questions},
            {"degraded", r.degraded},
            {"by_test", by_test},
            {"time_overall", aggregate_to_json(r.time_overall)},
            {"classifier",
             {{"classified", r.classifier.classified},
              {"meta_accuracy", r.classifier.meta_accuracy()},
              {"semantic_accuracy", r.classifier.semantic_accuracy()}}},
        };
        if (r.time_content) entry["time_content"] = aggregate_to_json(*r.time_content);
        out.push_back(std::move(entry));
    }
    std::ofstream file(path);
    if (!file) throw std::runtime_error("cannot open " + path + " for writing");
    file << out.dump(2) << "\n";
    if (!file) throw std::runtime_error("failed writing " + path);
}

}  // namespace chatmem
