#pragma once

#include <string>
#include <vector>

namespace anderson {

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail; // measured vs target vs tolerance
    double seconds = 0.0;
};

struct AcceptanceOptions {
    unsigned threads = 2;
    int only = 0; // nonzero: run a single criterion
};

/// Runs the acceptance criteria; one result per criterion (never throws for
/// a failed criterion, only for infrastructure faults).
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options);

/// Formats "[ k/13] PASS name  detail".
std::string format_criterion(const CriterionResult& r);

} // namespace anderson
