#pragma once

// Oracle and property checks over the whole library, each reported as one
// pass/fail line. Shared by the `verify` subcommand and the acceptance test.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "chaosssl/config.hpp"

namespace chaosssl {

struct CheckResult {
    int id = 0;
    std::string name;
    bool property_ok = false;
    double seconds = 0.0;
    double limit_seconds = 0.0;  // 0: no runtime bound
    std::string detail;

    bool passed() const { return property_ok && (limit_seconds <= 0.0 || seconds < limit_seconds); }
};

std::string format_result(const CheckResult& r);

CheckResult check_nt_xent_oracle();
CheckResult check_gradient_fidelity();
CheckResult check_chaotic_maps();
CheckResult check_schedule_and_metrics();

struct ExperimentOptions {
    ExperimentConfig base;  // seed and output_dir are overridden per run
    std::vector<std::uint64_t> seeds{0, 1, 2};
    std::filesystem::path work_dir = "chaosssl-verify";
    // Used for every pipeline run; defaults to run_pipeline.
    std::function<void(const ExperimentConfig&)> runner;
    // Used for the second determinism run; defaults to runner.
    std::function<void(const ExperimentConfig&)> rerun;
    std::ostream* log = nullptr;
};

// Per seed: SSL tiny > random-init tiny, fusion >= max(tiny, large) - 2pp.
// Runs land in work_dir/seed_<s>.
CheckResult check_end_to_end(const ExperimentOptions& opts);
// Runs the first seed into work_dir/determinism_a (reusing work_dir/seed_<s>
// when present) and work_dir/determinism_b, then compares every file byte
// for byte.
CheckResult check_determinism(const ExperimentOptions& opts);
CheckResult check_persistence(const std::filesystem::path& work_dir);

// Byte-level comparison of two run directories; empty on equality, else a
// description of the first difference.
std::string compare_trees(const std::filesystem::path& a, const std::filesystem::path& b);

struct VerifyOptions {
    std::filesystem::path work_dir = "chaosssl-verify";
    bool include_experiment = false;
};

// Runs the checks, printing one line per check to out as it completes.
std::vector<CheckResult> run_verify(const VerifyOptions& opts, std::ostream& out);

}  // namespace chaosssl
