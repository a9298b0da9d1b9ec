#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lrbandit {

struct RegretTrace {
    std::string algo;
    int run_id = 0;
    std::uint64_t seed = 0;
    std::vector<double> instant;
    std::vector<double> cumulative;

    void push(double r) {
        instant.push_back(r);
        cumulative.push_back((cumulative.empty() ? 0.0 : cumulative.back()) + r);
    }
    int horizon() const { return static_cast<int>(instant.size()); }
};

}  // namespace lrbandit
