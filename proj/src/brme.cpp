#include "darkchain/brme.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "darkchain/errors.hpp"

namespace darkchain {

Eigen::MatrixXd frequency_grid(const Eigen::VectorXd& energies, double tol) {
    const Eigen::Index D = energies.size();
    const Eigen::Index n = D * D;
    std::vector<double> w(static_cast<std::size_t>(n));
    for (Eigen::Index c = 0; c < D; ++c)
        for (Eigen::Index a = 0; a < D; ++a) w[c * D + a] = energies(c) - energies(a);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::sort(order.begin(), order.end(), [&](Eigen::Index x, Eigen::Index y) { return w[x] < w[y]; });

    Eigen::MatrixXd grid(D, D);
    std::size_t start = 0;
    while (start < order.size()) {
        std::size_t end = start + 1;
        double sum = w[order[start]];
        while (end < order.size() && w[order[end]] - w[order[end - 1]] < tol) sum += w[order[end++]];
        double rep = sum / static_cast<double>(end - start);
        if (std::abs(rep) < tol) rep = 0.0;
        for (std::size_t k = start; k < end; ++k) grid(order[k] / D, order[k] % D) = rep;
        start = end;
    }
    return 0.5 * (grid - grid.transpose());
}

std::vector<double> distinct_frequencies(const Eigen::VectorXd& energies, double tol) {
    const Eigen::MatrixXd g = frequency_grid(energies, tol);
    std::vector<double> out(g.data(), g.data() + g.size());
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end(), [tol](double x, double y) { return y - x < tol; }), out.end());
    return out;
}

std::vector<FrequencyComponent> frequency_decompose(const EigenSystem& es, const Channel& c, double tol) {
    if (!c.resolved()) throw InvalidParameter("channel " + c.label() + " needs eigen data");
    const Eigen::MatrixXd A = kernels::eigenbasis_operator(c, es.vectors);
    const Eigen::MatrixXd grid = frequency_grid(es.energies, tol);
    const int D = es.dim();
    std::vector<FrequencyComponent> out;
    for (double omega : distinct_frequencies(es.energies, tol)) {
        Eigen::MatrixXd part = Eigen::MatrixXd::Zero(D, D);
        bool any = false;
        // element (n, m) belongs to omega = e_m - e_n
        for (int m = 0; m < D; ++m)
            for (int n = 0; n < D; ++n)
                if (grid(m, n) == omega && A(n, m) != 0.0) {
                    part(n, m) = A(n, m);
                    any = true;
                }
        if (any) out.push_back({omega, std::move(part)});
    }
    return out;
}

Liouvillian build_liouvillian(const EigenSystem& es, const std::vector<Channel>& channels,
                              const LiouvillianOptions& opt) {
    const int D = es.dim();
    const long D2 = static_cast<long>(D) * D;
    if (D2 > opt.max_dim2) {
        std::ostringstream os;
        os << "BRME superoperator needs D^2 = " << D2 << " > cap " << opt.max_dim2
           << "; use a shorter chain or raise the cap (brme_max_dim2)";
        throw InvalidParameter(os.str());
    }
    const auto resolved = resolve_channels(channels, es);
    const Eigen::MatrixXd grid = frequency_grid(es.energies, opt.freq_tol);

    std::vector<kernels::RedfieldGroup> groups;
    std::vector<SpectralDensity> keys;
    for (const auto& c : resolved) {
        if (c.spectral.identically_zero()) continue;
        std::size_t g = 0;
        while (g < groups.size() && !(groups[g].kind == c.kind && keys[g] == c.spectral)) ++g;
        if (g == groups.size()) {
            kernels::RedfieldGroup grp;
            grp.kind = c.kind;
            grp.spectrum = grid.unaryExpr([&](double w) { return c.spectral(w); });
            groups.push_back(std::move(grp));
            keys.push_back(c.spectral);
        }
        groups[g].ops.push_back(kernels::eigenbasis_operator(c, es.vectors));
    }

    Liouvillian l;
    l.D = D;
    l.options = opt;
    for (auto& r : l.ground_rows) r = Eigen::VectorXd::Zero(D2);
    for (const auto& g : groups) l.ground_rows[static_cast<int>(g.kind)] += kernels::redfield_ground_row(g, D);
    l.L = opt.exec == Exec::Serial ? kernels::redfield_reference(es.energies, groups)
                                   : kernels::redfield_parallel(es.energies, groups);
    return l;
}

SteadyStateReport brme_steady_state(const Liouvillian& l, const EigenSystem& es,
                                    const std::vector<Channel>& channels) {
    using cd = std::complex<double>;
    const int D = l.D;
    const Eigen::Index D2 = static_cast<Eigen::Index>(D) * D;
    if (es.dim() != D) throw InvalidParameter("Liouvillian does not match the eigen system");

    // trace condition replaces the (g, g) balance row, which is redundant
    Eigen::MatrixXcd M = l.L;
    M.row(0).setZero();
    for (int a = 0; a < D; ++a) M(0, static_cast<Eigen::Index>(a) * D + a) = 1.0;
    Eigen::VectorXcd rhs = Eigen::VectorXcd::Zero(D2);
    rhs(0) = 1.0;

    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    const double rcond = lu.rcond();
    // the rcond estimate misses exact zero pivots (uncoupled populations), so
    // the pivots are checked too
    const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
    const double eps = std::numeric_limits<double>::epsilon();
    Eigen::VectorXcd x;
    bool ok = std::isfinite(rcond) && rcond > 1e-14 &&
              piv.minCoeff() > static_cast<double>(D2) * eps * piv.maxCoeff();
    if (ok) {
        x = lu.solve(rhs);
        ok = x.allFinite() && (M * x - rhs).norm() < 1e-8 * std::max(1.0, x.norm());
    }
    if (!ok) {
        Eigen::FullPivLU<Eigen::MatrixXcd> full(l.L);
        full.setThreshold(1e-12);
        const int null_dim = static_cast<int>(full.dimensionOfKernel());
        std::ostringstream os;
        os << "BRME steady state is not unique: null space dimension " << null_dim << " (rcond " << rcond << ")";
        throw MultipleSteadyStates(os.str(), null_dim);
    }

    Eigen::MatrixXcd rho = Eigen::Map<const Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        x.data(), D, D);
    rho = (0.5 * (rho + rho.adjoint())).eval();
    rho /= rho.trace().real();

    SteadyStateReport r;
    r.method = "BRME";
    r.rcond = rcond;
    r.rho = rho;
    r.populations = rho.diagonal().real();
    r.ground_population = r.populations(0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(rho, Eigen::EigenvaluesOnly);
    r.min_rho_eigenvalue = eig.eigenvalues().minCoeff();
    if (r.min_rho_eigenvalue < l.options.positivity_fail) {
        std::ostringstream os;
        os << "BRME steady state violates positivity: eigenvalue " << r.min_rho_eigenvalue;
        throw NumericalError(os.str());
    }
    if (r.min_rho_eigenvalue < l.options.positivity_warn) {
        std::ostringstream os;
        os << "mild positivity violation, min eigenvalue " << r.min_rho_eigenvalue;
        r.warnings.push_back(os.str());
    }

    const Eigen::MatrixXd& V = es.vectors;
    const Eigen::MatrixXcd rho_site = V * rho * V.transpose();
    r.site_populations = rho_site.diagonal().real().tail(D - 1);

    for (const auto& c : channels) {
        if (c.kind != ChannelKind::Extraction || c.spectral.plateau() == 0.0) continue;
        const Eigen::VectorXd u = V.transpose() * c.excited_vector(D);
        r.current += c.spectral.plateau() * (u.transpose().cast<cd>() * rho * u.cast<cd>())(0).real();
    }

    Eigen::VectorXcd vr(D2);
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < D; ++b) vr(static_cast<Eigen::Index>(a) * D + b) = rho(a, b);
    for (int k = 0; k < kChannelKinds; ++k) r.fluxes[k] = (l.ground_rows[k].cast<cd>().transpose() * vr)(0).real();
    r.current_from_flux = r.fluxes[static_cast<int>(ChannelKind::Extraction)];

    r.residual = (l.L * vr).norm();
    r.residual_bound = 1e-10 * l.L.cwiseAbs().colwise().sum().maxCoeff();

    const double diag = rho.diagonal().norm();
    const double off = std::sqrt(std::max(0.0, rho.squaredNorm() - diag * diag));
    r.coherence_ratio = off / diag;
    if (r.ground_population <= 0.95) r.warnings.push_back("ground population below 0.95");
    return r;
}

SteadyStateReport solve_brme(const NetworkModel& model, const LiouvillianOptions& opt) {
    const Liouvillian l = build_liouvillian(model.es, model.channels, opt);
    return brme_steady_state(l, model.es, model.channels);
}

}  // namespace darkchain
