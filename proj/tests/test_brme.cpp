#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>
#include <set>

#include "darkchain/brme.hpp"
#include "darkchain/errors.hpp"
#include "support.hpp"

using namespace darkchain;
using testing::point;

namespace {

NetworkModel model(CellShape s, int n, double jb = 1.0) { return build_point_model(point(s, n, jb)); }

Eigen::MatrixXcd unvec(const Eigen::VectorXcd& v, int D) {
    Eigen::MatrixXcd m(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) m(a, b) = v(a * D + b);
    return m;
}

Eigen::VectorXcd vec(const Eigen::MatrixXcd& m) {
    const int D = static_cast<int>(m.rows());
    Eigen::VectorXcd v(D * D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) v(a * D + b) = m(a, b);
    return v;
}

}  // namespace

TEST_SUITE("brme") {

TEST_CASE("frequency decomposition is complete") {
    const auto m = model(CellShape::Dimer, 2, 3.0);
    for (const auto& c : m.channels) {
        const auto parts = frequency_decompose(m.es, c);
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(m.es.dim(), m.es.dim());
        for (const auto& p : parts) sum += p.op;
        const Eigen::MatrixXd A = m.es.vectors.transpose() * c.dense(m.es.dim()) * m.es.vectors;
        CHECK((sum - A).cwiseAbs().maxCoeff() < 1e-12);
    }
}

TEST_CASE("site projector on a two-level chain has three frequencies") {
    const auto m = model(CellShape::Mono, 2);
    const auto parts = frequency_decompose(m.es, m.channels[0]);
    REQUIRE(parts.size() == 3);
    const double gap = m.es.energies(2) - m.es.energies(1);
    CHECK(parts[0].omega == doctest::Approx(-gap).epsilon(1e-14));
    CHECK(parts[1].omega == 0.0);
    CHECK(parts[2].omega == doctest::Approx(gap).epsilon(1e-14));
}

TEST_CASE("distinct frequencies match brute-force enumeration") {
    const auto m = model(CellShape::Mono, 3);
    const auto& e = m.es.energies;
    std::vector<double> brute;
    for (int a = 0; a < e.size(); ++a)
        for (int b = 0; b < e.size(); ++b) {
            const double w = e(a) - e(b);
            bool seen = false;
            for (double x : brute) seen |= std::abs(x - w) < 1e-9;
            if (!seen) brute.push_back(w);
        }
    CHECK(distinct_frequencies(e).size() == brute.size());
    CHECK(brute.size() == 13);
}

TEST_CASE("frequency grid is exactly antisymmetric and snaps degeneracies") {
    const auto m = model(CellShape::Prism, 3, 10.0);
    const auto g = frequency_grid(m.es.energies);
    CHECK((g + g.transpose()).cwiseAbs().maxCoeff() == 0.0);
    int snapped = 0;
    for (int a = 0; a < g.rows(); ++a)
        for (int b = 0; b < g.rows(); ++b)
            if (a != b && std::abs(m.es.energies(a) - m.es.energies(b)) < 1e-9) {
                CHECK(g(a, b) == 0.0);
                ++snapped;
            }
    CHECK(snapped > 0);  // the prism dark band is pairwise degenerate
}

TEST_CASE("closed system: degenerate null space is reported") {
    const auto m = model(CellShape::Mono, 2);
    const Liouvillian l = build_liouvillian(m.es, {});
    try {
        brme_steady_state(l, m.es, {});
        FAIL("expected MultipleSteadyStates");
    } catch (const MultipleSteadyStates& e) {
        CHECK(e.null_dimension == 3);
    }
}

TEST_CASE("trace and hermiticity are preserved") {
    const auto m = model(CellShape::Prism, 5, 10.0);
    const Liouvillian l = build_liouvillian(m.es, m.channels);
    const int D = l.D;
    Eigen::VectorXcd tr = Eigen::VectorXcd::Zero(D * D);
    for (int a = 0; a < D; ++a) tr(a * D + a) = 1.0;
    const double scale = l.L.cwiseAbs().maxCoeff();
    CHECK((tr.transpose() * l.L).cwiseAbs().maxCoeff() < 1e-10 * std::max(1.0, scale));

    std::mt19937_64 rng(3);
    std::normal_distribution<double> n;
    Eigen::MatrixXcd r(D, D);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) r(a, b) = {n(rng), n(rng)};
    const Eigen::MatrixXcd h = r + r.adjoint();
    const Eigen::MatrixXcd out = unvec(l.L * vec(h), D);
    CHECK((out - out.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * std::max(1.0, out.cwiseAbs().maxCoeff()));
}

TEST_CASE("radiative decay alone empties the excited manifold") {
    const auto m = model(CellShape::Mono, 2);
    const auto rad = testing::only(m.channels, ChannelKind::Radiative);
    const auto rep = brme_steady_state(build_liouvillian(m.es, rad), m.es, rad);
    CHECK(rep.rho(0, 0).real() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK((rep.rho.cwiseAbs().sum() - 1.0) < 1e-12);
}

TEST_CASE("steady state is a normalized density matrix") {
    const auto m = model(CellShape::Dimer, 4, 2.0);
    const auto rep = solve_brme(m);
    CHECK(std::abs(rep.rho.trace().real() - 1.0) < 1e-12);
    CHECK(std::abs(rep.rho.trace().imag()) < 1e-15);
    CHECK((rep.rho - rep.rho.adjoint()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rep.min_rho_eigenvalue > -1e-8);
    CHECK(rep.flux_imbalance() < 1e-8);
    CHECK(testing::rel(rep.current, rep.current_from_flux) < 1e-6);
    CHECK(rep.residual <= rep.residual_bound);
    CHECK(rep.coherence_ratio < 0.05);
}

TEST_CASE("reference and parallel Redfield kernels agree") {
    for (auto s : {CellShape::Mono, CellShape::Prism}) {
        const auto m = model(s, 4, 10.0);
        LiouvillianOptions ser;
        ser.exec = Exec::Serial;
        const auto a = build_liouvillian(m.es, m.channels, ser);
        const auto b = build_liouvillian(m.es, m.channels);
        CHECK((a.L - b.L).cwiseAbs().maxCoeff() <= 1e-13 * a.L.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("per-kind ground rows reproduce the (g, g) row of L") {
    const auto m = model(CellShape::Dimer, 3, 2.0);
    const auto l = build_liouvillian(m.es, m.channels);
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(l.D * l.D);
    for (const auto& r : l.ground_rows) sum += r;
    CHECK((sum.cast<std::complex<double>>() - l.L.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("small chains agree with the rate equation") {
    const auto m = model(CellShape::Mono, 2);
    CHECK(testing::rel(solve_brme(m).current, solve_pme(m).current) < 0.05);
    for (auto s : {CellShape::Dimer, CellShape::Prism})
        for (double jb : {0.1, 10.0}) {
            const auto mm = model(s, 5, jb);
            CHECK(testing::rel(solve_brme(mm).current, solve_pme(mm).current) < 0.1);
        }
}

TEST_CASE("dimension cap") {
    const auto m = model(CellShape::Prism, 21, 10.0);
    CHECK_THROWS_AS(build_liouvillian(m.es, m.channels), InvalidParameter);
    try {
        build_liouvillian(m.es, m.channels);
    } catch (const InvalidParameter& e) {
        CHECK(std::string(e.what()).find("brme_max_dim2") != std::string::npos);
    }
}

}
