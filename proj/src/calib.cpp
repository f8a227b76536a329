#include "tdc/calib.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "tdc/iti.hpp"
#include "tdc/textio.hpp"

namespace tdc {

LinearityReport linearity(const std::vector<double>& widths, double clock_period_ps) {
    if (widths.empty()) throw std::invalid_argument("linearity: empty width vector");
    double total = 0.0;
    for (double w : widths) {
        if (w < 0.0) throw std::invalid_argument("linearity: negative width");
        total += w;
    }
    if (total == 0.0) throw std::invalid_argument("linearity: all widths are zero");

    LinearityReport r;
    const std::size_t n = widths.size();
    r.lsb_ps = clock_period_ps / static_cast<double>(n);
    r.dnl.resize(n);
    r.inl.resize(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        r.dnl[i] = (widths[i] - r.lsb_ps) / r.lsb_ps;
        acc += r.dnl[i];
        r.inl[i] = acc;
    }

    auto stats = [](const std::vector<double>& v, double& mn, double& mx, double& pkpk, double& sigma) {
        mn = std::numeric_limits<double>::infinity();
        mx = -std::numeric_limits<double>::infinity();
        double sum = 0.0, sum2 = 0.0;
        for (double x : v) {
            mn = std::min(mn, x);
            mx = std::max(mx, x);
            sum += x;
        }
        double mean = sum / static_cast<double>(v.size());
        for (double x : v) sum2 += (x - mean) * (x - mean);
        pkpk = mx - mn;
        sigma = std::sqrt(sum2 / static_cast<double>(v.size()));
    };
    stats(r.dnl, r.dnl_min, r.dnl_max, r.dnl_pkpk, r.dnl_sigma);
    stats(r.inl, r.inl_min, r.inl_max, r.inl_pkpk, r.inl_sigma);

    double cubes = 0.0;
    int tapped = 0;
    double tapped_sum = 0.0;
    for (double w : widths) {
        cubes += w * w * w;
        if (w > 0.0) {
            ++tapped;
            tapped_sum += w;
        }
    }
    r.w_eq_ps = std::sqrt(cubes / total);
    r.sigma_eq_ps = r.w_eq_ps / std::sqrt(12.0);
    r.resolution_ps = tapped_sum / static_cast<double>(tapped);
    return r;
}

LinearityReport linearity_of_counts(const std::vector<double>& counts, double clock_period_ps) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) throw std::invalid_argument("linearity: counts sum to zero");
    std::vector<double> w(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        w[i] = counts[i] / total * clock_period_ps;
    return linearity(w, clock_period_ps);
}

std::vector<double> weights(const std::vector<double>& widths, double clock_period_ps) {
    if (widths.empty()) throw std::invalid_argument("weights: empty width vector");
    const double lsb = clock_period_ps / static_cast<double>(widths.size());
    std::vector<double> nu(widths.size());
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (widths[i] <= 0.0)
            throw std::invalid_argument(
                "weights: zero-width bin " + std::to_string(i + 1) +
                "; weight factors require a line without missing codes");
        nu[i] = lsb / widths[i];
    }
    return nu;
}

std::vector<double> apply_calibration(const std::vector<double>& raw_counts,
                                      const std::vector<double>& nu) {
    if (raw_counts.size() != nu.size())
        throw std::invalid_argument("apply_calibration: histogram and weights cover different bin sets");
    std::vector<double> out(raw_counts.size());
    for (std::size_t i = 0; i < raw_counts.size(); ++i) out[i] = raw_counts[i] * nu[i];
    return out;
}

std::vector<double> apply_calibration(const std::vector<std::uint64_t>& raw_counts,
                                      const std::vector<double>& nu) {
    std::vector<double> raw(raw_counts.begin(), raw_counts.end());
    return apply_calibration(raw, nu);
}

CalibrationTable make_calibration_table(const DensityHistogram& hist) {
    CalibrationTable table;
    table.clock_period_ps = hist.clock_period_ps;
    table.width_ps = folded_widths(hist);
    table.lsb_ps = hist.clock_period_ps / static_cast<double>(table.width_ps.size());
    table.nu = weights(table.width_ps, hist.clock_period_ps);
    table.start_ps = start_times(table.width_ps);
    table.fine_time_ps.resize(table.width_ps.size());
    for (std::size_t i = 0; i < table.width_ps.size(); ++i)
        table.fine_time_ps[i] = table.start_ps[i] + table.width_ps[i] / 2.0;
    return table;
}

double fine_time(int bin, const CalibrationTable& table) {
    if (bin < 0 || bin >= table.bin_count())
        throw std::out_of_range("fine_time: bin " + std::to_string(bin + 1) + " not in table");
    return table.fine_time_ps[static_cast<std::size_t>(bin)];
}

void write_table_csv(std::ostream& out, const CalibrationTable& table) {
    out << "# clock_period_ps=" << format_double(table.clock_period_ps) << '\n';
    out << "# lsb_ps=" << format_double(table.lsb_ps) << '\n';
    out << "bin,start_ps,width_ps,nu,fine_time_ps\n";
    for (int i = 0; i < table.bin_count(); ++i) {
        std::size_t k = static_cast<std::size_t>(i);
        out << (i + 1) << ',' << format_double(table.start_ps[k]) << ','
            << format_double(table.width_ps[k]) << ',' << format_double(table.nu[k]) << ','
            << format_double(table.fine_time_ps[k]) << '\n';
    }
}

CalibrationTable read_table_csv(std::istream& in) {
    CalibrationTable table;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::size_t eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(line.substr(1, eq - 1));
            std::string value = trim(line.substr(eq + 1));
            if (key == "clock_period_ps") table.clock_period_ps = std::stod(value);
            else if (key == "lsb_ps") table.lsb_ps = std::stod(value);
            continue;
        }
        if (line.rfind("bin,", 0) == 0) continue;
        std::vector<std::string> fields = split(line, ',');
        if (fields.size() != 5) throw std::runtime_error("calibration csv: malformed row '" + line + "'");
        table.start_ps.push_back(std::stod(trim(fields[1])));
        table.width_ps.push_back(std::stod(trim(fields[2])));
        table.nu.push_back(std::stod(trim(fields[3])));
        table.fine_time_ps.push_back(std::stod(trim(fields[4])));
    }
    if (table.clock_period_ps <= 0.0) throw std::runtime_error("calibration csv: missing metadata");
    return table;
}

void write_linearity_csv(std::ostream& out, const LinearityReport& r) {
    out << "# lsb_ps=" << format_double(r.lsb_ps) << '\n';
    out << "metric,value\n";
    out << "dnl_min_lsb," << format_double(r.dnl_min) << '\n';
    out << "dnl_max_lsb," << format_double(r.dnl_max) << '\n';
    out << "dnl_pkpk_lsb," << format_double(r.dnl_pkpk) << '\n';
    out << "dnl_sigma_lsb," << format_double(r.dnl_sigma) << '\n';
    out << "inl_min_lsb," << format_double(r.inl_min) << '\n';
    out << "inl_max_lsb," << format_double(r.inl_max) << '\n';
    out << "inl_pkpk_lsb," << format_double(r.inl_pkpk) << '\n';
    out << "inl_sigma_lsb," << format_double(r.inl_sigma) << '\n';
    out << "w_eq_ps," << format_double(r.w_eq_ps) << '\n';
    out << "sigma_eq_ps," << format_double(r.sigma_eq_ps) << '\n';
    out << "resolution_ps," << format_double(r.resolution_ps) << '\n';
}

}  // namespace tdc
