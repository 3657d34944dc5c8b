#include "sleepkit/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace sleepkit {

namespace {

void check_pair(const Hypnogram& truth, const Hypnogram& pred) {
    if (truth.size() != pred.size())
        throw DataError("metrics: truth/prediction length mismatch (" +
                        std::to_string(truth.size()) + " vs " + std::to_string(pred.size()) + ")");
}

double quantile(std::vector<double> v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double f = pos - static_cast<double>(lo);
    return (1.0 - f) * v[lo] + f * v[lo + 1];
}

}  // namespace

long ConfusionMatrix::total() const {
    long t = 0;
    for (const auto& row : counts)
        for (long c : row) t += c;
    return t;
}

ConfusionMatrix confusion_matrix(const Hypnogram& truth, const Hypnogram& pred) {
    check_pair(truth, pred);
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth.stages[i] == SleepStage::Pad) continue;
        if (pred.stages[i] == SleepStage::Pad)
            throw DataError("confusion_matrix: Pad prediction inside scored region at window " +
                            std::to_string(i));
        ++cm.counts[static_cast<int>(truth.stages[i])][static_cast<int>(pred.stages[i])];
    }
    return cm;
}

double accuracy(const Hypnogram& truth, const Hypnogram& pred) {
    const auto cm = confusion_matrix(truth, pred);
    const long total = cm.total();
    if (total == 0) throw DataError("accuracy: no unpadded windows");
    long correct = 0;
    for (int c = 0; c < 4; ++c) correct += cm.counts[c][c];
    return static_cast<double>(correct) / static_cast<double>(total);
}

double kappa_from_confusion(const ConfusionMatrix& cm) {
    const long total = cm.total();
    if (total == 0) throw DataError("cohens_kappa: no unpadded windows");
    long correct = 0;
    double qe = 0.0;
    for (int c = 0; c < 4; ++c) {
        correct += cm.counts[c][c];
        long n1 = 0, n2 = 0;
        for (int k = 0; k < 4; ++k) {
            n1 += cm.counts[c][k];
            n2 += cm.counts[k][c];
        }
        qe += static_cast<double>(n1) * static_cast<double>(n2);
    }
    qe /= static_cast<double>(total) * static_cast<double>(total);
    const double q = static_cast<double>(correct) / static_cast<double>(total);
    if (qe >= 1.0) return 1.0;  // both raters constant and equal
    return (q - qe) / (1.0 - qe);
}

double cohens_kappa(const Hypnogram& truth, const Hypnogram& pred) {
    return kappa_from_confusion(confusion_matrix(truth, pred));
}

std::string PatientSummary::format_kappa() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f (%.2f to %.2f)", median_kappa, kappa_q1, kappa_q3);
    return buf;
}

PatientSummary per_patient_summary(const std::vector<std::string>& ids,
                                   const std::vector<Hypnogram>& truth,
                                   const std::vector<Hypnogram>& pred) {
    if (truth.empty() || truth.size() != pred.size() || ids.size() != truth.size())
        throw DataError("per_patient_summary: empty or mismatched inputs");
    PatientSummary s;
    std::vector<double> kappas, accs;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        RecordScore r;
        r.id = ids[i];
        r.kappa = cohens_kappa(truth[i], pred[i]);
        r.acc = accuracy(truth[i], pred[i]);
        kappas.push_back(r.kappa);
        accs.push_back(r.acc);
        s.per_record.push_back(r);
    }
    s.median_kappa = quantile(kappas, 0.5);
    s.kappa_q1 = quantile(kappas, 0.25);
    s.kappa_q3 = quantile(kappas, 0.75);
    s.median_acc = quantile(accs, 0.5);
    s.acc_q1 = quantile(accs, 0.25);
    s.acc_q3 = quantile(accs, 0.75);
    return s;
}

std::map<std::string, GroupSummary> grouped_summary(const std::vector<Record>& records,
                                                    const std::vector<Hypnogram>& pred,
                                                    const std::string& group_key) {
    if (records.size() != pred.size())
        throw DataError("grouped_summary: record/prediction count mismatch");
    std::map<std::string, std::vector<std::size_t>> buckets;
    for (std::size_t i = 0; i < records.size(); ++i) {
        auto it = records[i].groups.find(group_key);
        if (it == records[i].groups.end())
            throw DataError("grouped_summary: record '" + records[i].id + "' lacks group key '" +
                            group_key + "'");
        buckets[it->second].push_back(i);
    }
    std::map<std::string, GroupSummary> out;
    for (const auto& [cat, idx] : buckets) {
        std::vector<std::string> ids;
        std::vector<Hypnogram> t, p;
        for (auto i : idx) {
            ids.push_back(records[i].id);
            t.push_back(records[i].hypnogram);
            p.push_back(pred[i]);
        }
        GroupSummary g;
        g.summary = per_patient_summary(ids, t, p);
        g.low_n = idx.size() < 2;
        out[cat] = g;
    }
    return out;
}

SleepMetrics sleep_metrics(const Hypnogram& h, TransitionOrder order) {
    long counts[4] = {0, 0, 0, 0};
    std::vector<SleepStage> scored;
    for (auto s : h.stages) {
        if (s == SleepStage::Pad) continue;
        ++counts[static_cast<int>(s)];
        scored.push_back(s);
    }
    if (scored.empty()) throw DataError("sleep_metrics: empty unpadded region");
    const long sleep_windows =
        counts[1] + counts[2] + counts[3];  // Light + Deep + REM
    if (sleep_windows == 0) throw DataError("sleep_metrics: zero TST, stage fractions undefined");

    SleepMetrics m;
    m.tst_hours = static_cast<double>(sleep_windows) * kWindowSeconds / 3600.0;
    m.se_percent = 100.0 * static_cast<double>(sleep_windows) /
                   static_cast<double>(sleep_windows + counts[0]);
    m.fr_light = 100.0 * static_cast<double>(counts[1]) / static_cast<double>(sleep_windows);
    m.fr_deep = 100.0 * static_cast<double>(counts[2]) / static_cast<double>(sleep_windows);
    m.fr_rem = 100.0 * static_cast<double>(counts[3]) / static_cast<double>(sleep_windows);

    auto depth = [order](SleepStage s) -> int {
        switch (s) {
            case SleepStage::Wake: return 0;
            case SleepStage::REM: return order == TransitionOrder::RemShallow ? 1 : -1;
            case SleepStage::Light: return 2;
            case SleepStage::Deep: return 3;
            default: return -1;
        }
    };
    for (std::size_t i = 0; i + 1 < scored.size(); ++i) {
        const int a = depth(scored[i]), b = depth(scored[i + 1]);
        if (a < 0 || b < 0) continue;
        if (b < a) ++m.transitions;
    }
    m.transitions_per_hour = static_cast<double>(m.transitions) / m.tst_hours;
    return m;
}

MetricAgreement metric_agreement(const std::vector<double>& truth,
                                 const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw DataError("metric_agreement: empty or mismatched metric lists");
    double mse = 0.0, mean = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        const double d = pred[i] - truth[i];
        mse += d * d;
        mean += truth[i];
    }
    mse /= static_cast<double>(truth.size());
    mean /= static_cast<double>(truth.size());
    double ss_tot = 0.0;
    for (double t : truth) ss_tot += (t - mean) * (t - mean);
    MetricAgreement a;
    a.mse = mse;
    a.r2 = ss_tot > 0 ? 1.0 - mse * static_cast<double>(truth.size()) / ss_tot
                      : (mse == 0 ? 1.0 : 0.0);
    return a;
}

}  // namespace sleepkit
