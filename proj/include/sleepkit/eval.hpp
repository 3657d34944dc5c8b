#pragma once

#include <array>
#include <map>
#include <string>
#include <vector>

#include "sleepkit/records.hpp"

namespace sleepkit {

struct ConfusionMatrix {
    // rows = ground truth, cols = prediction
    std::array<std::array<long, 4>, 4> counts{};
    long total() const;
};

// Pad windows (in truth) are excluded from every metric.
ConfusionMatrix confusion_matrix(const Hypnogram& truth, const Hypnogram& pred);
double accuracy(const Hypnogram& truth, const Hypnogram& pred);
double cohens_kappa(const Hypnogram& truth, const Hypnogram& pred);
double kappa_from_confusion(const ConfusionMatrix& cm);

struct RecordScore {
    std::string id;
    double kappa = 0.0;
    double acc = 0.0;
};

struct PatientSummary {
    double median_kappa = 0.0, kappa_q1 = 0.0, kappa_q3 = 0.0;
    double median_acc = 0.0, acc_q1 = 0.0, acc_q3 = 0.0;
    std::vector<RecordScore> per_record;
    // "0.75 (0.69 to 0.81)" style
    std::string format_kappa() const;
};

PatientSummary per_patient_summary(const std::vector<std::string>& ids,
                                   const std::vector<Hypnogram>& truth,
                                   const std::vector<Hypnogram>& pred);

struct GroupSummary {
    PatientSummary summary;
    bool low_n = false;  // fewer than 2 records
};

std::map<std::string, GroupSummary> grouped_summary(const std::vector<Record>& records,
                                                    const std::vector<Hypnogram>& pred,
                                                    const std::string& group_key);

// Stage-depth ordering used when counting deeper-to-lighter transitions.
enum class TransitionOrder {
    RemShallow,   // Wake < REM < Light < Deep (default)
    RemExcluded,  // Wake < Light < Deep; pairs involving REM are skipped
};

struct SleepMetrics {
    double tst_hours = 0.0;
    double se_percent = 0.0;
    double fr_light = 0.0, fr_deep = 0.0, fr_rem = 0.0;  // percent of TST
    long transitions = 0;
    double transitions_per_hour = 0.0;
};

// Throws DataError when TST is zero (stage fractions undefined).
SleepMetrics sleep_metrics(const Hypnogram& h, TransitionOrder order = TransitionOrder::RemShallow);

struct MetricAgreement {
    double mse = 0.0;
    double r2 = 0.0;
};

MetricAgreement metric_agreement(const std::vector<double>& truth, const std::vector<double>& pred);

}  // namespace sleepkit
