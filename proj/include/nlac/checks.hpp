#pragma once

#include <string>
#include <vector>

namespace nlac {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Invariant suites behind `nlac check <suite>`.
std::vector<CheckResult> check_geometry();
std::vector<CheckResult> check_kernels();
std::vector<CheckResult> check_femspace();
std::vector<CheckResult> check_assembly();
std::vector<CheckResult> check_convolution();
std::vector<CheckResult> check_inequalities();
std::vector<CheckResult> run_check_suite(const std::string& suite);

}  // namespace nlac
