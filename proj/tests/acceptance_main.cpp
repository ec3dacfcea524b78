// Acceptance gate: runs every criterion at its pinned tolerance and prints
// one pass/fail line per criterion. Exit status is nonzero on any failure.

#include <iostream>

#include "geoflow/acceptance.hpp"

int main() {
    const auto results = geoflow::run_acceptance(std::cout);
    int failures = 0;
    for (const auto& r : results)
        if (!r.pass) ++failures;
    if (failures > 0) {
        std::cout << failures << " criterion(s) failed\n";
        return 1;
    }
    std::cout << "all " << results.size() << " acceptance criteria passed\n";
    return 0;
}
