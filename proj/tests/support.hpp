#pragma once

// Shared fixtures and independent oracles for the test suites.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "darkchain/experiments.hpp"

namespace testing {

using namespace darkchain;

inline UnitCellKind cell(CellShape s) {
    UnitCellKind k;
    k.shape = s;
    return k;
}

inline PointSpec point(CellShape s, int n, double jb = 1.0) {
    PointSpec p;
    p.cell = cell(s);
    p.n_cells = n;
    p.hparams.Jb = jb;
    return p;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

// Grassmann-Taksar-Heyman elimination: stationary vector of a rate matrix
// W(n, m) (m -> n) without subtractions, so tiny populations stay accurate.
inline Eigen::VectorXd gth_stationary(const Eigen::MatrixXd& w) {
    const int d = static_cast<int>(w.rows());
    // Q(i, j) = rate i -> j
    Eigen::MatrixXd q = w.transpose();
    for (int i = 0; i < d; ++i) q(i, i) = 0.0;
    std::vector<double> out(static_cast<std::size_t>(d), 0.0);
    for (int k = d - 1; k > 0; --k) {
        double s = 0.0;
        for (int j = 0; j < k; ++j) s += q(k, j);
        out[k] = s;
        for (int i = 0; i < k; ++i)
            for (int j = 0; j < k; ++j)
                if (i != j) q(i, j) += q(i, k) * q(k, j) / s;
    }
    Eigen::VectorXd p = Eigen::VectorXd::Zero(d);
    p(0) = 1.0;
    for (int k = 1; k < d; ++k) {
        double acc = 0.0;
        for (int i = 0; i < k; ++i) acc += p(i) * q(i, k);
        p(k) = acc / out[k];
    }
    return p / p.sum();
}

struct IntegrationResult {
    Eigen::VectorXd p;
    double t = 0.0;
    double rate = 0.0;  // ||dP/dt|| at the end
    long steps = 0;
};

// Dormand-Prince 5(4) integration of dP/dt = chi P up to t_end. The default
// horizon is ~50 e-folds of the slowest relaxation of the test networks.
inline IntegrationResult integrate_to_steady(const Eigen::MatrixXd& chi, Eigen::VectorXd p, double t_end = 2e4,
                                             double rtol = 1e-12, double atol = 1e-22, long max_steps = 50'000'000) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                        a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                        e6 = 22.0 / 525, e7 = -1.0 / 40;
    (void)c2, (void)c3, (void)c4, (void)c5;

    IntegrationResult r;
    double h = 1e-3;
    Eigen::VectorXd k1 = chi * p;
    while (r.steps < max_steps) {
        r.rate = k1.norm();
        if (r.t >= t_end) break;
        h = std::min(h, t_end - r.t);
        const Eigen::VectorXd k2 = chi * (p + h * a21 * k1);
        const Eigen::VectorXd k3 = chi * (p + h * (a31 * k1 + a32 * k2));
        const Eigen::VectorXd k4 = chi * (p + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Eigen::VectorXd k5 = chi * (p + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Eigen::VectorXd k6 = chi * (p + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Eigen::VectorXd next = p + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        const Eigen::VectorXd k7 = chi * next;
        const Eigen::VectorXd err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        double en = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            const double sc = atol + rtol * std::max(std::abs(p(i)), std::abs(next(i)));
            en = std::max(en, std::abs(err(i)) / sc);
        }
        if (en <= 1.0) {
            r.t += h;
            p = next;
            k1 = k7;
        }
        ++r.steps;
        const double fac = en == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(en, -0.2), 0.2, 5.0);
        h *= fac;
    }
    r.p = p;
    return r;
}

inline std::vector<Channel> only(const std::vector<Channel>& cs, ChannelKind k) {
    std::vector<Channel> out;
    for (const auto& c : cs)
        if (c.kind == k) out.push_back(c);
    return out;
}

}  // namespace testing
