#include "curve_equiv/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

namespace curve_equiv {

namespace {

bool doses_equal(double a, double b) {
    return std::abs(a - b) <= 1e-9 * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string strip(std::string s) {
    const auto notspace = [](unsigned char c) { return !std::isspace(c); };
    s.erase(s.begin(), std::find_if(s.begin(), s.end(), notspace));
    s.erase(std::find_if(s.rbegin(), s.rend(), notspace).base(), s.end());
    return s;
}

double parse_number(const std::string& field, std::size_t row, const char* what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(field, &pos);
        if (pos != field.size() || !std::isfinite(v)) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw input_error("row " + std::to_string(row) + ": non-numeric " + what + " '" +
                          field + "'");
    }
}

}  // namespace

std::size_t GroupSample::n_total() const {
    std::size_t n = 0;
    for (const auto& o : obs) n += o.size();
    return n;
}

std::vector<double> GroupSample::weights() const {
    const double n = static_cast<double>(n_total());
    std::vector<double> w(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) w[i] = static_cast<double>(obs[i].size()) / n;
    return w;
}

std::vector<double> GroupSample::level_means() const {
    std::vector<double> m(obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        double s = 0.0;
        for (double y : obs[i]) s += y;
        m[i] = s / static_cast<double>(obs[i].size());
    }
    return m;
}

double GroupSample::within_level_ss() const {
    const auto means = level_means();
    double ss = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i)
        for (double y : obs[i]) ss += (y - means[i]) * (y - means[i]);
    return ss;
}

void GroupSample::add(double dose, double y) {
    // Insertion keeping levels sorted; doses within tolerance share a level.
    auto it = std::lower_bound(levels.begin(), levels.end(), dose);
    std::size_t i = static_cast<std::size_t>(it - levels.begin());
    if (i < levels.size() && doses_equal(levels[i], dose)) {
        obs[i].push_back(y);
        return;
    }
    if (i > 0 && doses_equal(levels[i - 1], dose)) {
        obs[i - 1].push_back(y);
        return;
    }
    levels.insert(it, dose);
    obs.insert(obs.begin() + static_cast<std::ptrdiff_t>(i), std::vector<double>{y});
}

void GroupSample::validate() const {
    if (levels.empty()) throw input_error("group has no observations");
    if (levels.size() != obs.size())
        throw input_error("group sample: levels/observations size mismatch");
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!std::isfinite(levels[i])) throw input_error("non-finite dose level");
        if (i > 0 && !(levels[i - 1] < levels[i]))
            throw input_error("dose levels not strictly ascending");
        if (obs[i].empty()) throw input_error("dose level with no observations");
        for (double y : obs[i])
            if (!std::isfinite(y)) throw input_error("non-finite response value");
    }
}

void TwoGroupData::validate() const {
    group1.validate();
    group2.validate();
}

double kappa_hat(const TwoGroupData& d) {
    const std::size_t n1 = d.group1.n_total(), n2 = d.group2.n_total();
    if (n1 == 0 || n2 == 0)
        throw input_error("degenerate design: both groups need observations (kappa = n/n1 "
                          "must lie strictly between 1 and infinity)");
    return static_cast<double>(n1 + n2) / static_cast<double>(n1);
}

TwoGroupData parse_csv(std::istream& in, const std::string& origin) {
    std::string line;
    std::size_t row = 0;
    if (!std::getline(in, line)) throw input_error(origin + ": empty file");
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Tolerate a UTF-8 BOM.
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    {
        std::istringstream hs(line);
        std::string c1, c2, c3;
        std::getline(hs, c1, ',');
        std::getline(hs, c2, ',');
        std::getline(hs, c3);
        if (strip(c1) != "group" || strip(c2) != "dose" || strip(c3) != "response")
            throw input_error(origin + ": expected header 'group,dose,response', got '" + line +
                              "'");
    }

    TwoGroupData d;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (strip(line).empty()) continue;
        std::istringstream ls(line);
        std::string f1, f2, f3;
        if (!std::getline(ls, f1, ',') || !std::getline(ls, f2, ',') ||
            !std::getline(ls, f3, ','))
            throw input_error("row " + std::to_string(row) + ": expected 3 columns, got '" +
                              line + "'");
        if (std::string rest; std::getline(ls, rest))
            throw input_error("row " + std::to_string(row) + ": expected 3 columns, got '" +
                              line + "'");
        const double g = parse_number(strip(f1), row, "group label");
        const double dose = parse_number(strip(f2), row, "dose");
        const double y = parse_number(strip(f3), row, "response");
        if (g == 1.0)
            d.group1.add(dose, y);
        else if (g == 2.0)
            d.group2.add(dose, y);
        else
            throw input_error("row " + std::to_string(row) + ": unknown group label " +
                              strip(f1));
    }
    if (d.group1.levels.empty()) throw input_error(origin + ": group 1 has no observations");
    if (d.group2.levels.empty()) throw input_error(origin + ": group 2 has no observations");
    d.validate();
    return d;
}

TwoGroupData load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw input_error("cannot open data file '" + path + "'");
    return parse_csv(in, path);
}

void write_csv(const TwoGroupData& d, std::ostream& out) {
    out << "group,dose,response\n";
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    const GroupSample* groups[2] = {&d.group1, &d.group2};
    for (int g = 0; g < 2; ++g)
        for (std::size_t i = 0; i < groups[g]->levels.size(); ++i)
            for (double y : groups[g]->obs[i])
                out << (g + 1) << ',' << groups[g]->levels[i] << ',' << y << '\n';
}

void save_csv(const TwoGroupData& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw input_error("cannot write data file '" + path + "'");
    write_csv(d, out);
}

}  // namespace curve_equiv
