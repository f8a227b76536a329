#include <doctest.h>

#include <cmath>
#include <sstream>

#include "tdc/calib.hpp"
#include "tdc/rng.hpp"

using namespace tdc;

namespace {

// Monte Carlo quantization oracle: RMS error of uniform hits mapped to bin
// centers, independent of the closed-form path it checks.
double mc_quantization_rms(const std::vector<double>& widths, std::uint64_t samples,
                           std::uint64_t seed) {
    std::vector<double> edges(widths.size() + 1, 0.0);
    for (std::size_t i = 0; i < widths.size(); ++i) edges[i + 1] = edges[i] + widths[i];
    const double total = edges.back();
    CounterRng rng(seed);
    double sq = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        double t = rng.uniform(s) * total;
        auto it = std::upper_bound(edges.begin(), edges.end(), t);
        std::size_t bin = static_cast<std::size_t>(it - edges.begin()) - 1;
        if (bin >= widths.size()) bin = widths.size() - 1;
        double center = edges[bin] + widths[bin] / 2.0;
        sq += (center - t) * (center - t);
    }
    return std::sqrt(sq / static_cast<double>(samples));
}

std::vector<double> random_widths(int n, std::uint64_t seed, double total = 4000.0) {
    CounterRng rng(seed);
    std::vector<double> w(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (int i = 0; i < n; ++i) {
        w[static_cast<std::size_t>(i)] = 0.05 + rng.uniform(static_cast<std::uint64_t>(i));
        sum += w[static_cast<std::size_t>(i)];
    }
    for (double& x : w) x *= total / sum;
    return w;
}

}  // namespace

TEST_CASE("uniform widths collapse every metric") {
    std::vector<double> w(16, 250.0);
    LinearityReport r = linearity(w, 4000.0);
    CHECK(r.lsb_ps == 250.0);
    for (double d : r.dnl) CHECK(d == 0.0);
    for (double i : r.inl) CHECK(i == 0.0);
    CHECK(r.w_eq_ps == doctest::Approx(250.0).epsilon(1e-12));
    CHECK(r.sigma_eq_ps == doctest::Approx(250.0 / std::sqrt(12.0)).epsilon(1e-12));
    CHECK(r.resolution_ps == 250.0);
}

TEST_CASE("a missing bin reports DNL of minus one") {
    std::vector<double> w = {500, 0.0, 500, 1000, 1000, 1000};
    LinearityReport r = linearity(w, 4000.0);
    CHECK(r.dnl[1] == -1.0);
    CHECK(r.dnl_min == -1.0);
    CHECK_THROWS_AS(linearity({0.0, 0.0}, 4000.0), std::invalid_argument);
}

TEST_CASE("dnl sums to zero when widths partition the period") {
    std::vector<double> w = random_widths(512, 99);
    LinearityReport r = linearity(w, 4000.0);
    double sum = 0.0;
    for (double d : r.dnl) sum += d;
    CHECK(std::abs(sum) < 1e-9);
    // INL is the prefix sum of DNL
    for (std::size_t i = 1; i < r.inl.size(); ++i)
        CHECK(r.inl[i] - r.inl[i - 1] == doctest::Approx(r.dnl[i]).epsilon(1e-12));
}

TEST_CASE("sigma_eq matches the Monte Carlo quantization oracle within 1 percent") {
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        std::vector<double> w = random_widths(64, seed);
        LinearityReport r = linearity(w, 4000.0);
        double mc = mc_quantization_rms(w, 2'000'000, seed * 17);
        CHECK(std::abs(mc - r.sigma_eq_ps) / r.sigma_eq_ps < 0.01);
    }
}

TEST_CASE("splitting any bin strictly lowers sigma_eq") {
    CounterRng rng(5);
    std::vector<double> w = random_widths(32, 44);
    LinearityReport before = linearity(w, 4000.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t pick = static_cast<std::size_t>(rng.bits(static_cast<std::uint64_t>(trial)) % w.size());
        double f = 0.1 + 0.8 * rng.uniform(1000 + static_cast<std::uint64_t>(trial));
        std::vector<double> split = w;
        double a = split[pick] * f;
        double b = split[pick] - a;
        split[pick] = a;
        split.insert(split.begin() + static_cast<std::ptrdiff_t>(pick) + 1, b);
        LinearityReport after = linearity(split, 4000.0);
        CHECK(after.sigma_eq_ps < before.sigma_eq_ps);
    }
}

TEST_CASE("weights invert the relative widths") {
    std::vector<double> w = {250.0, 500.0, 125.0, 3125.0};
    std::vector<double> nu = weights(w, 4000.0);
    const double lsb = 1000.0;
    CHECK(nu[0] == lsb / 250.0);
    CHECK(nu[1] == doctest::Approx(2.0));
    LinearityReport r = linearity(w, 4000.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(nu[i] == doctest::Approx(1.0 / (r.dnl[i] + 1.0)).epsilon(1e-12));
    CHECK(weights({1000.0}, 1000.0)[0] == 1.0);
    CHECK(weights({2000.0, 2000.0}, 4000.0)[0] == doctest::Approx(1.0));
    CHECK_THROWS_WITH_AS(static_cast<void>(weights({100.0, 0.0}, 4000.0)),
                         doctest::Contains("missing codes"), std::invalid_argument);
}

TEST_CASE("weight identity holds for random vectors") {
    std::vector<double> w = random_widths(128, 314);
    std::vector<double> nu = weights(w, 4000.0);
    LinearityReport r = linearity(w, 4000.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        CHECK(std::abs(nu[i] - 1.0 / (r.dnl[i] + 1.0)) <= 1e-12 * nu[i]);
}

TEST_CASE("calibration flattens exact expected counts to zero DNL") {
    std::vector<double> w = random_widths(256, 2718);
    std::vector<double> nu = weights(w, 4000.0);
    // expectation-level counts are proportional to widths
    std::vector<double> expected(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) expected[i] = w[i] * 12345.0;
    std::vector<double> calibrated = apply_calibration(expected, nu);
    LinearityReport r = linearity_of_counts(calibrated, 4000.0);
    for (double d : r.dnl) CHECK(std::abs(d) < 1e-9);
}

TEST_CASE("apply_calibration is linear and checks the bin set") {
    std::vector<std::uint64_t> counts = {10, 20, 30};
    std::vector<double> nu = {1.0, 1.0, 1.0};
    std::vector<double> same = apply_calibration(counts, nu);
    CHECK(same == std::vector<double>{10, 20, 30});
    std::vector<std::uint64_t> doubled = {20, 40, 60};
    std::vector<double> twice = apply_calibration(doubled, nu);
    for (std::size_t i = 0; i < same.size(); ++i) CHECK(twice[i] == 2.0 * same[i]);
    CHECK_THROWS_AS(apply_calibration(counts, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("fine time uses the bin-center convention") {
    DensityHistogram hist;
    hist.clock_period_ps = 4000.0;
    hist.total_shots = 4000;
    hist.counts = {1000, 1000, 1000, 1000};
    CalibrationTable table = make_calibration_table(hist);
    CHECK(table.lsb_ps == 1000.0);
    CHECK(fine_time(0, table) == 500.0);
    CHECK(fine_time(1, table) == 1500.0);
    CHECK(fine_time(2, table) == 2500.0);
    CHECK(fine_time(3, table) == 3500.0);
    CHECK(table.fine_time_ps.back() == doctest::Approx(4000.0 - table.width_ps.back() / 2.0));
    CHECK_THROWS_AS(fine_time(4, table), std::out_of_range);
    for (std::size_t i = 0; i < table.nu.size(); ++i)
        CHECK(table.nu[i] * table.width_ps[i] == doctest::Approx(table.lsb_ps).epsilon(1e-12));
}

TEST_CASE("first bin of a table absorbs the head range") {
    DensityHistogram hist;
    hist.clock_period_ps = 4000.0;
    hist.total_shots = 4000;
    hist.counts = {900, 1000, 1000, 1000};
    hist.underflow = 100;
    CalibrationTable table = make_calibration_table(hist);
    CHECK(table.width_ps[0] == 1000.0);
    CHECK(table.start_ps[0] == 0.0);
    CHECK(fine_time(0, table) == 500.0);
}

TEST_CASE("calibration table csv round trip") {
    DensityHistogram hist;
    hist.clock_period_ps = 4000.0;
    hist.total_shots = 1000;
    hist.counts = {125, 250, 125, 500};
    CalibrationTable table = make_calibration_table(hist);
    std::ostringstream out;
    write_table_csv(out, table);
    std::istringstream in(out.str());
    CalibrationTable back = read_table_csv(in);
    CHECK(back.lsb_ps == table.lsb_ps);
    CHECK(back.width_ps == table.width_ps);
    CHECK(back.nu == table.nu);
    CHECK(back.fine_time_ps == table.fine_time_ps);
}
