/*
 * chatmem - scoring and reporting: precision / recall / F2 per question,
 * per-test aggregates with an unweighted mean over the time tests,
 * classifier accuracy against the known labels, and the report writers
 * (text table, JSON, TSV for plotting).
 */
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "chatmem/pipeline.hpp"

namespace chatmem {

struct RetrievalScore {
    double precision = 0.0;
    double recall = 0.0;
    double f2 = 0.0;
};

// Recall-weighted F: 5PR / (4P + R); zero when both inputs are zero.
double f2_score(double precision, double recall);

// Duplicates on either side are collapsed before counting.
RetrievalScore score_retrieval(const std::vector<int>& relevant,
                               const std::vector<int>& retrieved);

struct QuestionScore {
    std::string question_id;
    std::string test_name;
    RetrievalScore score;
    bool degraded = false;
};

QuestionScore score_trace(const TraceRecord& trace);

// Percentages (0-100). `f2_std` is the population standard deviation of the
// per-question F2 values behind the mean.
struct TestAggregate {
    int questions = 0;
    double recall = 0.0;
    double precision = 0.0;
    double f2 = 0.0;
    double f2_std = 0.0;
};

TestAggregate aggregate_scores(const std::vector<QuestionScore>& scores);

// GT classifier labels: every time test is metadata-only; the
// speaker/topic/date test needs both routes.
bool expected_meta(const std::string& test_name);
bool expected_semantic(const std::string& test_name);

struct ClassifierStats {
    int classified = 0;  // traces that actually ran the classifiers
    int meta_correct = 0;
    int semantic_correct = 0;

    double meta_accuracy() const { return classified ? 100.0 * meta_correct / classified : 0.0; }
    double semantic_accuracy() const {
        return classified ? 100.0 * semantic_correct / classified : 0.0;
    }
};

ClassifierStats classifier_stats(const std::vector<TraceRecord>& traces);

struct Report {
    std::string mode;
    std::map<std::string, TestAggregate> by_test;
    // Unweighted mean over the time tests that are present; the combined
    // speaker/topic/date test is reported separately.
    TestAggregate time_overall;
    std::optional<TestAggregate> time_content;
    ClassifierStats classifier;
    int degraded = 0;
    int questions = 0;
};

// Traces of a single mode; throws if the records disagree on the label.
Report build_report(const std::vector<TraceRecord>& traces);
// Groups mixed traces by mode label, one report per label, in label order.
std::vector<Report> build_reports(const std::vector<TraceRecord>& traces);

std::string format_report(const Report& report);               // fixed-width text
std::string format_report_tsv(const Report& report);           // test\tn\trecall\tprecision\tf2\tf2_std
void write_report_json(const std::vector<Report>& reports, const std::string& path);

}  // namespace chatmem
