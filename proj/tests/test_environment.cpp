#include <doctest.h>

#include <cmath>
#include <random>

#include "darkchain/environment.hpp"
#include "darkchain/errors.hpp"
#include "support.hpp"

using namespace darkchain;
using testing::cell;

namespace {

DrudeLorentzParams defaults() {
    EnvironmentParams env;
    return phonon_params(env, 1.0);
}

// Same closed form written with exp and coth instead of expm1:
// n + 1 = (coth(w/2T) + 1) / 2 for w > 0.
double dl_independent(double w, double Gamma, double w0, double gv, double T) {
    const double lor = M_PI * w * Gamma * gv / (Gamma * Gamma + (w - w0) * (w - w0));
    const double coth = std::cosh(w / (2 * T)) / std::sinh(w / (2 * T));
    return lor * 0.5 * (coth + 1.0);
}

}  // namespace

TEST_SUITE("environment") {

TEST_CASE("detailed balance of the phonon spectrum") {
    const auto p = defaults();
    CHECK(drude_lorentz(0.7, p) / drude_lorentz(-0.7, p) == doctest::Approx(std::exp(0.7 / 2.5875)).epsilon(1e-13));
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(1e-3, 40.0);
    for (int k = 0; k < 200; ++k) {
        const double w = u(rng);
        const double r = drude_lorentz(w, p) / drude_lorentz(-w, p);
        CHECK(std::abs(r / std::exp(w / p.T_ph) - 1.0) < 1e-12);
    }
}

TEST_CASE("spontaneous part peaks at dE") {
    const auto p = defaults();
    CHECK(p.omega0 == doctest::Approx(std::sqrt(0.84)).epsilon(1e-15));
    // analytic stationary point sqrt(w0^2 + Gamma^2), confirmed on a fine grid
    const double analytic = std::sqrt(p.omega0 * p.omega0 + p.Gamma * p.Gamma);
    CHECK(analytic == doctest::Approx(1.0).epsilon(1e-15));
    double best_w = 0.0, best = -1.0;
    for (int k = 1; k <= 2'000'000; ++k) {
        const double w = k * 2e-6;
        const double v = M_PI * w * p.Gamma * p.gamma_vib / (p.Gamma * p.Gamma + (w - p.omega0) * (w - p.omega0));
        if (v > best) best = v, best_w = w;
    }
    CHECK(std::abs(best_w - analytic) < 4e-6);
}

TEST_CASE("spectrum at w=1 from two independent evaluations") {
    const auto p = defaults();
    const double a = drude_lorentz(1.0, p);
    const double b = dl_independent(1.0, 0.4, std::sqrt(0.84), 0.01, 2.5875);
    CHECK(std::abs(a - b) / b < 1e-12);
    CHECK(a == doctest::Approx(0.2348).epsilon(5e-4));
}

TEST_CASE("finite zero-frequency limit") {
    const auto p = defaults();
    const double s0 = drude_lorentz(0.0, p);
    CHECK(std::isfinite(s0));
    CHECK(drude_lorentz(1e-7, p) == doctest::Approx(s0).epsilon(1e-6));
    CHECK(drude_lorentz(-1e-7, p) == doctest::Approx(s0).epsilon(1e-6));
}

TEST_CASE("step spectra") {
    CHECK(step_spectrum(1.0, 0.021, StepDirection::Up) == 0.021);
    CHECK(step_spectrum(-1.0, 0.021, StepDirection::Up) == 0.0);
    CHECK(step_spectrum(0.0, 0.021, StepDirection::Up) == 0.0);
    CHECK(step_spectrum(-1.0, 0.5, StepDirection::Down) == 0.5);
    CHECK(step_spectrum(0.0, 0.5, StepDirection::Down) == 0.0);
    const auto s = SpectralDensity::step(0.3, StepDirection::Up);
    CHECK(s.plateau() == 0.3);
    CHECK(SpectralDensity::step(0.0, StepDirection::Up).identically_zero());
}

TEST_CASE("channel set, site basis") {
    HamiltonianParams hp;
    EnvironmentParams env;
    const Geometry g = build_geometry(cell(CellShape::Prism), 4);
    const auto ch = build_channels(g, hp, env, InjectionMode::SiteBasis);
    const auto inj = testing::only(ch, ChannelKind::Injection);
    REQUIRE(inj.size() == 3);
    for (const auto& c : inj) {
        CHECK(c.spectral.plateau() == doctest::Approx(1e-6 / 3).epsilon(1e-15));
        CHECK(c.site < 3);
        CHECK(c.spectral(-1.0) > 0.0);
        CHECK(c.spectral(1.0) == 0.0);
    }
    const auto ext = testing::only(ch, ChannelKind::Extraction);
    REQUIRE(ext.size() == 3);
    for (const auto& c : ext) CHECK(c.site >= 9);
    CHECK(testing::only(ch, ChannelKind::Phonon).size() == 12);
    CHECK(testing::only(ch, ChannelKind::NonRadiative).size() == 12);
    const auto rad = testing::only(ch, ChannelKind::Radiative);
    REQUIRE(rad.size() == 1);
    const auto x = rad[0].excited_vector(13);
    CHECK(x(0) == 0.0);
    CHECK(x.tail(12).isOnes());
}

TEST_CASE("zero nonradiative rate keeps the channels with zero weight") {
    HamiltonianParams hp;
    EnvironmentParams env;
    env.gamma_nr = 0.0;
    const auto ch = build_channels(build_geometry(cell(CellShape::Mono), 5), hp, env, InjectionMode::SiteBasis);
    const auto nr = testing::only(ch, ChannelKind::NonRadiative);
    CHECK(nr.size() == 5);
    for (const auto& c : nr) CHECK(c.spectral.identically_zero());
}

TEST_CASE("dipole-weighted radiative channels") {
    HamiltonianParams hp;
    hp.dipole_mode = true;
    EnvironmentParams env;
    std::vector<Vec3> d;
    for (int s = 0; s < 6; ++s) d.push_back(Vec3(1.0 + s, -2.0, 0.5 * s));
    Geometry g = assign_dipoles(build_geometry(cell(CellShape::Dimer), 3), PerSite{d});
    const auto rad = testing::only(build_channels(g, hp, env, InjectionMode::SiteBasis), ChannelKind::Radiative);
    REQUIRE(rad.size() == 3);
    for (const auto& c : rad) {
        const auto x = c.excited_vector(7);
        for (int s = 0; s < 6; ++s) CHECK(x(s + 1) == doctest::Approx((*g.dipoles)[s](c.axis)));
    }
}

TEST_CASE("channel operators are Hermitian") {
    HamiltonianParams hp;
    EnvironmentParams env;
    for (auto mode : {InjectionMode::SiteBasis}) {
        const auto ch = build_channels(build_geometry(cell(CellShape::Cuboid), 3), hp, env, mode);
        for (const auto& c : ch) {
            const auto A = c.dense(13);
            CHECK((A - A.transpose()).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("eigenbasis injection targets need resolution") {
    HamiltonianParams hp;
    EnvironmentParams env;
    const auto ch = build_channels(build_geometry(cell(CellShape::Dimer), 3), hp, env, InjectionMode::EigenBasis);
    const auto inj = testing::only(ch, ChannelKind::Injection);
    REQUIRE(inj.size() == 1);
    CHECK(inj[0].target == EigenTarget::Highest);
    CHECK_FALSE(inj[0].resolved());
    CHECK_THROWS_AS(inj[0].dense(7), InvalidParameter);
    CHECK(testing::only(ch, ChannelKind::Extraction)[0].target == EigenTarget::Lowest);
}

TEST_CASE("environment validation") {
    EnvironmentParams env;
    env.gamma_rad = -1.0;
    CHECK_THROWS_AS(validate(env), InvalidParameter);
    env = {};
    env.T_ph = 0.0;
    CHECK_THROWS_AS(validate(env), InvalidParameter);
    CHECK_THROWS_AS(optimal_omega0(0.3, 0.4), InvalidParameter);
}

}
