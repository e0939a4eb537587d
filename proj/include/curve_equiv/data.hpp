// Two-group dose-response data: container, CSV round trip, design summaries.
#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "curve_equiv/errors.hpp"

namespace curve_equiv {

// One group's observations, grouped by distinct dose level.
struct GroupSample {
    std::vector<double> levels;             // distinct, ascending
    std::vector<std::vector<double>> obs;   // obs[i]: responses at levels[i]

    std::size_t n_levels() const { return levels.size(); }
    std::size_t n_total() const;
    std::vector<double> weights() const;      // n_i / n
    std::vector<double> level_means() const;
    double within_level_ss() const;           // sum_i sum_j (Y_ij - mean_i)^2
    void add(double dose, double y);          // merges doses equal to 1e-9 rel. tol
    void validate() const;
};

struct TwoGroupData {
    GroupSample group1, group2;

    std::size_t n() const { return group1.n_total() + group2.n_total(); }
    void validate() const;
};

// n / n1; requires both groups non-empty (kappa must lie in (1, inf)).
double kappa_hat(const TwoGroupData& d);

// CSV with header `group,dose,response`, one observation per row,
// group labels restricted to {1,2}.
TwoGroupData parse_csv(std::istream& in, const std::string& origin = "<stream>");
TwoGroupData load_csv(const std::string& path);
void write_csv(const TwoGroupData& d, std::ostream& out);
void save_csv(const TwoGroupData& d, const std::string& path);

}  // namespace curve_equiv
