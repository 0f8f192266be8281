#pragma once

#include <functional>
#include <string>
#include <vector>

namespace metascreen {

// One line of the invariant suite.
struct CriterionResult {
    int id = 0;
    std::string name;
    bool passed = false;
    std::string detail;  // measured values next to their thresholds
    double seconds = 0.0;
};

struct ValidationOptions {
    unsigned seed = 20240607;
    int n_scan = 64;  // boundary nodes for the frequency scans of criteria 6 to 8
    // Called with the criterion id and name before it starts.
    std::function<void(int, const std::string&)> progress;
    // Called with each result as soon as it is available.
    std::function<void(const CriterionResult&)> on_result;
};

constexpr int kCriterionCount = 10;

std::string criterion_name(int id);

// Runs the listed criteria (ids 1..10) in the given order. Criterion 7 reuses the resonances
// predicted by criterion 6 and predicts them itself when 6 is not in the list.
std::vector<CriterionResult> run_validation(const std::vector<int>& ids, const ValidationOptions& opt = {});

// "criterion 6 PASS  <name>: <detail>"
std::string format_result(const CriterionResult& r);

}  // namespace metascreen
