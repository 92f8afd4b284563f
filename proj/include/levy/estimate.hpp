#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "levy/measure.hpp"

namespace levy {

/// A Monte Carlo estimate with its standard error. The diverging flag means
/// "no stabilization across the cap ladder", the operational stand-in for an
/// infinite expectation.
struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    long n = 0;
    bool diverging = false;
};

inline Estimate mean_se(const std::vector<double>& v) {
    Estimate e;
    e.n = static_cast<long>(v.size());
    if (v.empty()) return e;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s2 = 0.0;
    for (double x : v) s2 += (x - m) * (x - m);
    e.value = m;
    e.std_error = v.size() > 1
                      ? std::sqrt(s2 / (static_cast<double>(v.size()) - 1.0) /
                                  static_cast<double>(v.size()))
                      : 0.0;
    return e;
}

/// Capped-mean ladder E[min{v, n}] for n in {1e2, 1e4, 1e6, 1e8}. The verdict
/// is finite iff the last rung gained less than 3 standard errors of the
/// rung-to-rung difference (the Fatou-style stabilization test); the returned
/// estimate is the top-cap mean.
inline Estimate capped_ladder(const std::vector<double>& values) {
    static const double caps[] = {1e2, 1e4, 1e6, 1e8};
    Estimate top;
    top.n = static_cast<long>(values.size());
    std::vector<double> capped(values.size());
    Estimate prev;
    bool diverging = false;
    for (int ci = 0; ci < 4; ++ci) {
        for (std::size_t i = 0; i < values.size(); ++i)
            capped[i] = std::min(values[i], caps[ci]);
        Estimate cur = mean_se(capped);
        if (ci > 0) {
            std::vector<double> diff(values.size());
            for (std::size_t i = 0; i < values.size(); ++i)
                diff[i] = std::min(values[i], caps[ci]) - std::min(values[i], caps[ci - 1]);
            Estimate d = mean_se(diff);
            if (ci == 3 && d.value > 3.0 * d.std_error + 1e-12 * cur.value)
                diverging = true;
        }
        prev = cur;
    }
    top = prev;
    top.diverging = diverging;
    return top;
}

/// Structured outcome of one theorem check.
struct VerificationReport {
    std::string check_id;
    std::uint64_t inputs_digest = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, Estimate>> estimates;
    std::vector<std::pair<std::string, double>> thresholds;
    std::string verdict = "inconclusive";  // pass | fail | inconclusive
    std::vector<std::string> notes;

    void add(const std::string& name, const Estimate& e) { estimates.emplace_back(name, e); }
    void threshold(const std::string& name, double v) { thresholds.emplace_back(name, v); }
    bool passed() const { return verdict == "pass"; }
};

}  // namespace levy
