#include <doctest.h>

#include <cmath>

#include "darkchain/errors.hpp"
#include "darkchain/experiments.hpp"
#include "support.hpp"

using namespace darkchain;
using testing::cell;
using testing::point;

namespace {

double num(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) return *d;
    return static_cast<double>(std::get<std::int64_t>(c));
}

SweepSpec small(std::vector<CellShape> shapes, std::vector<int> n, std::vector<double> jb) {
    SweepSpec s;
    s.geometries.clear();
    for (auto sh : shapes) s.geometries.push_back(cell(sh));
    s.n_cells = std::move(n);
    s.jb = std::move(jb);
    return s;
}

}  // namespace

TEST_SUITE("experiments") {

TEST_CASE("exponential fit recovers synthetic data") {
    std::vector<int> n;
    std::vector<double> i;
    for (int k = 2; k <= 40; ++k) {
        n.push_back(k);
        i.push_back(3.5e-7 * std::exp(-0.31 * k));
    }
    const auto f = fit_exponential(n, i);
    CHECK(std::abs(f.beta - 0.31) < 1e-10);
    CHECK(testing::rel(f.alpha, 3.5e-7) < 1e-10);
    CHECK(f.residual < 1e-10);
    CHECK(f.n_min == 2);
    CHECK(f.n_max == 40);
    // a global rescale shifts alpha only
    for (auto& v : i) v *= 1e3;
    CHECK(std::abs(fit_exponential(n, i).beta - 0.31) < 1e-10);
    i[3] = 0.0;
    const auto g = fit_exponential(n, i);
    CHECK(g.n_excluded == 1);
    CHECK(g.n_used == 38);
    CHECK_THROWS_AS(fit_exponential({2, 2}, {1.0, 2.0}), InvalidParameter);
}

TEST_CASE("ensemble statistics") {
    const auto s = ensemble_stats(1.0, {0.5, 1.0, 2.0, 4.0, 100.0, NAN}, 1.0);
    CHECK(s.n_ok == 5);
    CHECK(s.n_failed == 1);
    CHECK(s.median == 2.0);
    CHECK(s.q1 == 1.0);
    CHECK(s.q3 == 4.0);
    CHECK(s.fraction_within == doctest::Approx(0.8));
    CHECK(s.log10_iqr == doctest::Approx(std::log10(4.0)));
}

TEST_CASE("ensemble seeds split by Jb index") {
    CHECK(ensemble_seed(7, 0) == ensemble_seed(7, 0));
    CHECK(ensemble_seed(7, 0) != ensemble_seed(7, 1));
    CHECK(ensemble_seed(7, 0) != ensemble_seed(8, 0));
}

TEST_CASE("parallel_for captures failures per index") {
    std::vector<int> done(10, 0);
    const auto f = parallel_for(10, 2, [&](int i) {
        if (i == 4) throw InvalidParameter("boom");
        done[i] = 1;
    });
    CHECK(f[4].find("boom") != std::string::npos);
    CHECK(f[3].empty());
    CHECK(done[9] == 1);
}

TEST_CASE("eigen report shape") {
    const auto out = eigen_report(point(CellShape::Dimer, 10, 1.0));
    CHECK(out.table("eigen_states.csv").size() == 21);
    CHECK(out.table("eigen_amplitudes.csv").size() == 21 * 20);
    CHECK(out.summary.at("bright").get<int>() + out.summary.at("dark").get<int>() == 20);
}

TEST_CASE("population profile: lossless limit and radiative trend") {
    SweepSpec s = small({CellShape::Mono}, {10}, {1.0});
    s.gamma_rad_grid = {0.0};
    s.env.gamma_nr = 0.0;
    const auto lossless = population_profile(s).summary.at("decay")[0].at("last_over_first").get<double>();

    s.gamma_rad_grid = {1e-4, 1e-3, 1e-2, 1e-1};
    const auto out = population_profile(s);
    double last = lossless;
    for (const auto& d : out.summary.at("decay")) {
        const double r = d.at("last_over_first").get<double>();
        CHECK(r < last);
        last = r;
    }
    // normalization against the ground population
    const auto& t = out.table("population_profile.csv");
    const int pc = t.column("population"), gc = t.column("ground_population");
    double sum = 0.0;
    for (int k = 0; k < 10; ++k) sum += num(t.rows[k][pc]);
    CHECK(sum + num(t.rows[0][gc]) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("length sweep fits one exponent per geometry, Jb and method") {
    SweepSpec s = small({CellShape::Mono, CellShape::Prism}, {2, 3, 4, 5, 6}, {0.1, 10.0});
    s.method = Method::Both;
    s.brme_max_n = 4;
    const auto out = length_sweep(s);
    CHECK(out.table("length_fits.csv").size() == 8);
    // BRME rows only up to brme_max_n
    const auto& t = out.table("length_sweep.csv");
    CHECK(t.size() == 2 * 2 * 5 + 2 * 2 * 3);
    s.n_cells = {2, 3, 4};
    CHECK_THROWS_AS(length_sweep(s), ConfigError);
}

TEST_CASE("sweeps are deterministic and independent of the worker count") {
    SweepSpec s = small({CellShape::Dimer, CellShape::Prism}, {8}, {1.0, 10.0});
    s.sigma = 0.9;
    s.n_realizations = 12;
    s.base_seed = 99;
    s.jobs = 1;
    const auto a = disorder_ensemble(s);
    s.jobs = 3;
    const auto b = disorder_ensemble(s);
    CHECK(to_csv(a.table("disorder_raw.csv")) == to_csv(b.table("disorder_raw.csv")));
    CHECK(to_csv(a.table("disorder_stats.csv")) == to_csv(b.table("disorder_stats.csv")));
    s.base_seed = 100;
    CHECK(to_csv(disorder_ensemble(s).table("disorder_raw.csv")) != to_csv(a.table("disorder_raw.csv")));
}

TEST_CASE("zero disorder reproduces the clean system") {
    SweepSpec s = small({CellShape::Prism}, {6}, {10.0});
    s.n_realizations = 5;
    const auto out = disorder_ensemble(s);
    const auto& st = out.summary.at("stats")[0];
    CHECK(st.at("min").get<double>() == st.at("clean").get<double>());
    CHECK(st.at("max").get<double>() == st.at("clean").get<double>());

    const auto br = brightness_robustness(s);
    const auto& q = br.table("brightness_quantiles.csv");
    const int lo = q.column("min"), hi = q.column("max"), c0 = q.column("clean_brightness");
    for (const auto& row : q.rows) {
        CHECK(num(row[lo]) == num(row[c0]));
        CHECK(num(row[hi]) == num(row[c0]));
    }
}

TEST_CASE("regime grid without nonradiative loss matches the clean Jb sweep") {
    SweepSpec s = small({CellShape::Prism}, {8}, {0.5, 2.0, 6.0});
    s.gamma_nr_factors = {0.0};
    const auto rg = regime_grid(s);
    const auto js = jb_sweep(s);
    const auto& a = rg.table("regime_grid.csv");
    const auto& b = js.table("jb_sweep.csv");
    const int ca = a.column("clean"), cb = b.column("current"), da = a.column("dipoles");
    int k = 0;
    for (const auto& row : a.rows) {
        if (num(row[da]) != 0.0) continue;
        CHECK(num(row[ca]) == num(b.rows[k][cb]));
        ++k;
    }
    CHECK(k == 3);
}

TEST_CASE("regime grid gain ratios pair dipole-on with dipole-off") {
    SweepSpec s = small({CellShape::Mono, CellShape::Prism}, {6}, {1.0, 4.0});
    s.gamma_nr_factors = {0.1, 10.0};
    const auto out = regime_grid(s);
    CHECK(out.table("regime_grid.csv").size() == 2 * 2 * 2 * 2);
    CHECK(out.summary.at("dipole_gain").size() == 2 * 2 * 2);
    CHECK(out.summary.at("curves").size() == 2 * 2 * 2);
    CHECK_FALSE(out.summary.at("ensemble").get<bool>());
}

TEST_CASE("stronger nonradiative loss degrades transport") {
    for (auto shape : {CellShape::Mono, CellShape::Prism}) {
        PointSpec lo = point(shape, 20, 10.0), hi = lo;
        lo.env.gamma_nr = 0.1 * lo.env.gamma_rad;
        hi.env.gamma_nr = 10.0 * hi.env.gamma_rad;
        CHECK(solve_point(hi, Method::PME).pme->current < solve_point(lo, Method::PME).pme->current);
    }
}

TEST_CASE("dark-chain geometries outperform the mono chain at length 40") {
    const double mono = solve_point(point(CellShape::Mono, 40), Method::PME).pme->current;
    const double dimer = solve_point(point(CellShape::Dimer, 40, 10.0), Method::PME).pme->current;
    const double prism = solve_point(point(CellShape::Prism, 40, 10.0), Method::PME).pme->current;
    CHECK(prism > dimer);
    CHECK(dimer > mono);
}

TEST_CASE("eigen-basis injection on a single cell") {
    SweepSpec s = small({CellShape::Mono, CellShape::Prism}, {1, 2, 3, 4}, {10.0});
    const auto out = eigenbasis_injection_sweep(s);
    const auto& t = out.table("length_sweep.csv");
    const int c = t.column("current");
    for (const auto& row : t.rows) {
        CHECK(std::isfinite(num(row[c])));
        CHECK(num(row[c]) > 0.0);
    }
}

TEST_CASE("brme check table") {
    SweepSpec s = small({CellShape::Dimer}, {2, 3, 30}, {1.0});
    s.method = Method::Both;
    const auto out = brme_check(s);
    CHECK(out.table("brme_check.csv").size() == 2);
    CHECK(out.summary.at("max_rel_diff").get<double>() < 0.1);
}

TEST_CASE("sweep failures name the failing point") {
    SweepSpec s = small({CellShape::Dimer}, {3}, {1.0, 300.0});
    try {
        jb_sweep(s);
        FAIL("expected failure");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("Jb=300") != std::string::npos);
        CHECK(e.kind() == "numerical-error");
    }
}

TEST_CASE("sweep validation") {
    SweepSpec s;
    s.n_realizations = 0;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.jb.clear();
    CHECK_THROWS_AS(s.validate(), ConfigError);
    s = {};
    s.sigma = -0.1;
    CHECK_THROWS_AS(s.validate(), ConfigError);
    CHECK(parse_method("both") == Method::Both);
    CHECK_FALSE(parse_method("lindblad").has_value());
    CHECK(std::string(to_string(Method::BRME)) == "BRME");
}

TEST_CASE("dimer dark states mix more under disorder than prism dark states") {
    SweepSpec s = small({CellShape::Dimer, CellShape::Prism}, {20}, {10.0});
    s.sigma = 0.9;
    s.n_realizations = 100;
    s.base_seed = 1;
    const auto out = brightness_robustness(s);
    const auto& cases = out.summary.at("cases");
    REQUIRE(cases.size() == 2);
    CHECK(cases[0].at("clean_dark").get<int>() == 20);
    CHECK(cases[1].at("clean_dark").get<int>() == 40);
    // the dimer's upper dark states mix more strongly with the bright band
    CHECK(cases[0].at("top_dark_relative_brightness_median").get<double>() >
          cases[1].at("top_dark_relative_brightness_median").get<double>());
}

}

// Counting with the absolute 1e-6 cut under sigma = 0.9 disorder. Kept as a
// property check even though it does not hold, see README.
TEST_SUITE("census") {

TEST_CASE("dark:bright census at threshold 1e-6 survives disorder") {
    SweepSpec s = small({CellShape::Dimer, CellShape::Prism}, {20}, {10.0});
    s.sigma = 0.9;
    s.n_realizations = 100;
    s.base_seed = 1;
    const auto out = brightness_robustness(s);
    for (const auto& c : out.summary.at("cases")) CHECK(c.at("census_preserved_fraction").get<double>() >= 0.9);
}

}
