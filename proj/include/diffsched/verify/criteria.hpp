#pragma once

// Acceptance checks, each returning a single verdict with a short detail
// line. Shared by the acceptance binary and `diffsched selfcheck`.

#include <functional>
#include <string>
#include <vector>

namespace diffsched::verify {

struct CheckResult {
    std::string id;
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

CheckResult check_coefficient_normalization();
CheckResult check_generic_vs_concrete();
CheckResult check_degeneracy_identity();
CheckResult check_noise_contract();
CheckResult check_convergence_orders();
CheckResult check_scheduler_identities();
CheckResult check_oracle_correctness();

struct TrendOptions {
    std::string gmm_path;
    int n = 4;  // NFE = 6N
    int seeds = 32;
    int samples = 10000;
    int projections = 64;
    int jobs = 1;
};
CheckResult check_scheduling_trend(const TrendOptions& options);

CheckResult check_sweep_determinism();

struct SuiteOptions {
    bool include_trend = true;
    TrendOptions trend;
    std::function<void(const CheckResult&)> on_result;
};
std::vector<CheckResult> run_suite(const SuiteOptions& options);

/// `PASS [AC1] name (0.12 s): detail`
std::string format_result(const CheckResult& result);

}  // namespace diffsched::verify
