#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "mvq/measure_io.hpp"
#include "mvq/point_measure.hpp"
#include "mvq/rng.hpp"

using namespace mvq;

namespace {

double norm_of(std::span<const double> x) {
    double sq = 0.0;
    for (double v : x) sq += v * v;
    return std::sqrt(sq);
}

PointMeasure random_measure(SplitMix64& rng, std::size_t dim, std::size_t n_atoms) {
    std::vector<double> coords;
    std::vector<double> weights;
    for (std::size_t k = 0; k < n_atoms; ++k) {
        for (std::size_t i = 0; i < dim; ++i) coords.push_back(rng.next_in(-5.0, 5.0));
        weights.push_back(rng.next_in(0.0, 3.0));
    }
    return {dim, std::move(coords), std::move(weights)};
}

std::filesystem::path temp_path(const char* name) {
    return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_CASE("integrate on the empty measure is zero") {
    auto m = PointMeasure::empty(3);
    CHECK(m.integrate([](std::span<const double>) { return 42.0; }) == 0.0);
    CHECK(m.mass() == 0.0);
}

TEST_CASE("integrate single dirac") {
    PointMeasure m(2, {1.0, 0.0}, {1.0});
    double v = m.integrate([](std::span<const double> x) { return x[0] * x[0] + x[1] * x[1]; });
    CHECK(v == 1.0);
}

TEST_CASE("integrate two weighted atoms") {
    PointMeasure m(2, {0.0, 0.0, 3.0, 4.0}, {2.0, 0.5});
    double v = m.integrate(norm_of);
    CHECK(v == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("integrate is linear") {
    SplitMix64 rng(7);
    auto f = [](std::span<const double> x) { return x[0] * x[0] - x[1]; };
    auto g = norm_of;
    for (int trial = 0; trial < 20; ++trial) {
        auto m = random_measure(rng, 2, 1 + trial);
        double alpha = rng.next_in(-2.0, 2.0);
        double beta = rng.next_in(-2.0, 2.0);
        double combined = m.integrate(
            [&](std::span<const double> x) { return alpha * f(x) + beta * g(x); });
        double separate = alpha * m.integrate(f) + beta * m.integrate(g);
        CHECK(combined == doctest::Approx(separate).epsilon(1e-12));
    }
}

TEST_CASE("zero-weight atoms are integration neutral") {
    PointMeasure with(1, {0.0, 7.0}, {2.0, 0.0});
    PointMeasure without(1, {0.0}, {2.0});
    auto f = [](std::span<const double> x) { return 3.0 * x[0] + 1.0; };
    CHECK(with.integrate(f) == without.integrate(f));
}

TEST_CASE("merging duplicate atoms changes no integral") {
    SplitMix64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        // Build a measure with deliberate duplicates.
        std::vector<double> coords;
        std::vector<double> weights;
        for (int k = 0; k < 6; ++k) {
            double x = std::floor(rng.next_in(0.0, 3.0));
            double y = std::floor(rng.next_in(0.0, 3.0));
            coords.insert(coords.end(), {x, y});
            weights.push_back(rng.next_in(0.0, 2.0));
        }
        PointMeasure m(2, coords, weights);
        PointMeasure merged = m.merged();
        CHECK(merged.size() <= m.size());
        CHECK(m.integrate(norm_of) == doctest::Approx(merged.integrate(norm_of)).epsilon(1e-12));
        CHECK(m.mass() == doctest::Approx(merged.mass()).epsilon(1e-12));
    }
}

TEST_CASE("constructor rejects bad input") {
    CHECK_THROWS(PointMeasure(2, {1.0}, {1.0}));           // coords not multiple of dim
    CHECK_THROWS(PointMeasure(2, {1.0, 2.0}, {-0.5}));     // negative weight
    CHECK_THROWS(PointMeasure(0, {}, {}));                 // zero dim
    CHECK_THROWS(PointMeasure(1, {std::nan("")}, {1.0}));  // non-finite coordinate
}

TEST_CASE("within_bounds checks radius and mass on demand") {
    PointMeasure m(2, {3.0, 4.0}, {2.0});
    CHECK(m.within_bounds(5.0, 2.0));
    CHECK_FALSE(m.within_bounds(4.9, 2.0));
    CHECK_FALSE(m.within_bounds(5.0, 1.9));
}

TEST_CASE("empirical mean of a single measure is that measure") {
    PointMeasure m(2, {0.25, 0.75, 0.5, 0.5}, {1.0, 2.0});
    MeasureCollection c({m});
    auto mean = empirical_mean_support(c);
    CHECK(mean.coords() == m.coords());
    CHECK(mean.weights() == m.weights());
}

TEST_CASE("empirical mean of two diracs halves the weights") {
    MeasureCollection c({PointMeasure::diracs(2, {0.0, 0.0}), PointMeasure::diracs(2, {1.0, 0.0})});
    auto mean = empirical_mean_support(c);
    REQUIRE(mean.size() == 2);
    CHECK(mean.weight(0) == 0.5);
    CHECK(mean.weight(1) == 0.5);
}

TEST_CASE("empirical mean keeps zero-weight atoms but mass is right") {
    MeasureCollection c({PointMeasure(1, {4.0}, {2.0}), PointMeasure(1, {4.0}, {0.0})});
    auto mean = empirical_mean_support(c);
    CHECK(mean.mass() == doctest::Approx(1.0).epsilon(1e-15));
    auto merged = mean.merged();
    REQUIRE(merged.size() == 1);
    CHECK(merged.weight(0) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(merged.point(0)[0] == 4.0);
}

TEST_CASE("empirical mean mass equals mean of member masses") {
    SplitMix64 rng(3);
    std::vector<PointMeasure> ms;
    double total = 0.0;
    for (int i = 0; i < 7; ++i) {
        ms.push_back(random_measure(rng, 3, 1 + i));
        total += ms.back().mass();
    }
    MeasureCollection c(std::move(ms));
    CHECK(empirical_mean_support(c).mass() ==
          doctest::Approx(total / 7.0).epsilon(1e-12));
}

TEST_CASE("empirical mean rejects the empty collection") {
    MeasureCollection c;
    CHECK_THROWS_WITH_AS(empirical_mean_support(c), "empty collection", std::invalid_argument);
}

TEST_CASE("collection rejects inhomogeneous dimensions and bad labels") {
    std::vector<PointMeasure> ms;
    ms.push_back(PointMeasure::diracs(2, {0.0, 0.0}));
    ms.push_back(PointMeasure::diracs(3, {0.0, 0.0, 0.0}));
    CHECK_THROWS(MeasureCollection(std::move(ms)));

    std::vector<PointMeasure> ok;
    ok.push_back(PointMeasure::diracs(2, {0.0, 0.0}));
    CHECK_THROWS(MeasureCollection(std::move(ok), std::vector<int>{0, 1}));
}

TEST_CASE("csv: header-only file loads as empty collection") {
    auto path = temp_path("mvq_empty.csv");
    { std::ofstream(path) << "measure_id,weight,x1,x2\n"; }
    auto c = load_measures_csv(path.string());
    CHECK(c.empty());
}

TEST_CASE("csv: single row parses") {
    auto path = temp_path("mvq_one.csv");
    { std::ofstream(path) << "measure_id,weight,x1,x2\n0,1.0,0.25,0.75\n"; }
    auto c = load_measures_csv(path.string());
    REQUIRE(c.size() == 1);
    REQUIRE(c[0].size() == 1);
    CHECK(c[0].weight(0) == 1.0);
    CHECK(c[0].point(0)[0] == 0.25);
    CHECK(c[0].point(0)[1] == 0.75);
}

TEST_CASE("csv: save then load reproduces a random collection bit-exactly") {
    SplitMix64 rng(99);
    std::vector<PointMeasure> ms;
    for (int i = 0; i < 3; ++i) ms.push_back(random_measure(rng, 2, 2 + i));
    MeasureCollection original(std::move(ms));
    auto path = temp_path("mvq_roundtrip.csv");
    save_measures_csv(original, path.string());
    auto loaded = load_measures_csv(path.string());
    REQUIRE(loaded.size() == original.size());
    for (std::size_t i = 0; i < original.size(); ++i) {
        CHECK(loaded[i].coords() == original[i].coords());
        CHECK(loaded[i].weights() == original[i].weights());
    }
}

TEST_CASE("csv: malformed rows name their line number") {
    auto path = temp_path("mvq_bad.csv");
    { std::ofstream(path) << "measure_id,weight,x1,x2\n0,1.0,0.25,0.75\n0,oops,0.1,0.2\n"; }
    CHECK_THROWS_WITH_AS(load_measures_csv(path.string()),
                         doctest::Contains(":3:"), std::runtime_error);

    { std::ofstream(path) << "measure_id,weight,x1,x2\n0,1.0,0.25\n"; }
    CHECK_THROWS_WITH_AS(load_measures_csv(path.string()),
                         doctest::Contains(":2:"), std::runtime_error);
}

TEST_CASE("csv: ids order the collection, rows may interleave") {
    auto path = temp_path("mvq_order.csv");
    {
        std::ofstream out(path);
        out << "measure_id,weight,x1\n5,1,50\n2,1,20\n5,2,51\n";
    }
    auto c = load_measures_csv(path.string());
    REQUIRE(c.size() == 2);
    CHECK(c[0].point(0)[0] == 20.0);  // id 2 first
    REQUIRE(c[1].size() == 2);
    CHECK(c[1].weight(1) == 2.0);
}

TEST_CASE("labels sidecar round-trips") {
    MeasureCollection c({PointMeasure::diracs(1, {0.0}), PointMeasure::diracs(1, {1.0})},
                        {3, -1});
    auto data = temp_path("mvq_lbl_data.csv");
    auto labels = temp_path("mvq_lbl.csv");
    save_measures_csv(c, data.string());
    save_labels_csv(c, labels.string());
    auto loaded = attach_labels_csv(load_measures_csv(data.string()), labels.string());
    CHECK(loaded.labels() == std::vector<int>{3, -1});
}

TEST_CASE("superpose scales and concatenates") {
    PointMeasure a(1, {0.0}, {1.0});
    PointMeasure b(1, {2.0}, {4.0});
    auto s = superpose(a, 2.0, b, 0.25);
    CHECK(s.mass() == doctest::Approx(3.0));
    auto f = [](std::span<const double> x) { return x[0]; };
    CHECK(s.integrate(f) == doctest::Approx(2.0 * a.integrate(f) + 0.25 * b.integrate(f)));
}
