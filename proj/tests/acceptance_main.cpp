// Acceptance gate: runs every verification criterion at its pinned tolerance
// and prints one pass/fail line per criterion.

#include <cstdio>
#include <exception>

#include "fch/suites.hpp"

int main() {
    try {
        const auto results = fch::suites::run_all_criteria();
        bool all_pass = true;
        for (const auto& r : results) {
            std::printf("%s\n", fch::suites::format_result_line(r).c_str());
            all_pass = all_pass && r.pass;
        }
        std::printf("%s\n", all_pass ? "acceptance: all criteria passed"
                                     : "acceptance: FAILURES above");
        return all_pass ? 0 : 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "acceptance: aborted: %s\n", e.what());
        return 2;
    }
}
