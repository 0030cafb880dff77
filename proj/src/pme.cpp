#include "darkchain/pme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/SVD>

#include "darkchain/errors.hpp"

namespace darkchain {

Generator build_generator(const Eigen::MatrixXd& w) {
    if (w.rows() != w.cols()) throw InvalidParameter("rate matrix must be square");
    const Eigen::Index d = w.rows();
    Generator g;
    g.chi = w;
    for (Eigen::Index m = 0; m < d; ++m) {
        double out = 0.0;
        for (Eigen::Index n = 0; n < d; ++n) {
            if (n == m) continue;
            if (w(n, m) < 0.0) throw InvalidParameter("rate matrix has a negative off-diagonal entry");
            out += w(n, m);
        }
        g.chi(m, m) = -out;
    }
    return g;
}

std::vector<std::vector<int>> closed_classes(const Generator& g) {
    const int d = g.dim();
    std::vector<std::vector<char>> reach(d, std::vector<char>(d, 0));
    std::vector<int> stack;
    for (int s = 0; s < d; ++s) {
        auto& r = reach[s];
        r[s] = 1;
        stack.assign(1, s);
        while (!stack.empty()) {
            const int m = stack.back();
            stack.pop_back();
            for (int n = 0; n < d; ++n)
                if (!r[n] && n != m && g.chi(n, m) > 0.0) {
                    r[n] = 1;
                    stack.push_back(n);
                }
        }
    }
    std::vector<std::vector<int>> out;
    std::vector<char> seen(d, 0);
    for (int s = 0; s < d; ++s) {
        if (seen[s]) continue;
        std::vector<int> cls;
        bool closed = true;
        for (int n = 0; n < d; ++n) {
            if (!reach[s][n]) continue;
            if (reach[n][s]) cls.push_back(n);
            else closed = false;
        }
        for (int n : cls) seen[n] = 1;
        if (closed) out.push_back(std::move(cls));
    }
    return out;
}

NullSpaceSolution steady_state(const Generator& g) {
    const int d = g.dim();
    if (d == 0) throw InvalidParameter("empty generator");
    const auto classes = closed_classes(g);
    if (classes.size() > 1) {
        std::ostringstream os;
        os << classes.size() << " disconnected closed components:";
        for (const auto& c : classes) {
            os << " {";
            for (std::size_t i = 0; i < c.size(); ++i) os << (i ? "," : "") << c[i];
            os << "}";
        }
        throw MultipleSteadyStates(os.str(), static_cast<int>(classes.size()));
    }

    NullSpaceSolution s;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(g.chi, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    s.chi_norm = sv(0);
    s.sigma_min = sv(d - 1);
    s.sigma_next = d > 1 ? sv(d - 2) : 0.0;
    Eigen::VectorXd p = svd.matrixV().col(d - 1);
    const double total = p.sum();
    if (!(std::abs(total) > 0.0) || !std::isfinite(total))
        throw NumericalError("null vector has zero total weight");
    p /= total;

    // Mixed-precision refinement: residual accumulated in long double, the
    // correction solved on chi with its redundant ground row replaced by the
    // normalization. Recovers the small populations the SVD only resolves to
    // absolute round-off.
    Eigen::MatrixXd bordered = g.chi;
    bordered.row(0).setOnes();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(bordered);
    Eigen::VectorXd r(d);
    for (int it = 0; it < 3; ++it) {
        for (int i = 0; i < d; ++i) {
            long double acc = 0.0L;
            for (int j = 0; j < d; ++j)
                acc += static_cast<long double>(i == 0 ? 1.0 : g.chi(i, j)) * static_cast<long double>(p(j));
            r(i) = static_cast<double>(i == 0 ? 1.0L - acc : -acc);
        }
        const Eigen::VectorXd dp = lu.solve(r);
        if (!dp.allFinite()) break;
        p += dp;
        if (dp.cwiseAbs().maxCoeff() == 0.0) break;
    }

    const double lowest = p.minCoeff();
    if (lowest < -1e-12) {
        std::ostringstream os;
        os << "steady state has population " << lowest << " below the clipping tolerance";
        throw NumericalError(os.str());
    }
    s.clipped = std::min(0.0, lowest);
    p = p.cwiseMax(0.0);
    p /= p.sum();
    s.populations = p;
    s.residual = (g.chi * p).norm();
    return s;
}

double SteadyStateReport::flux_imbalance() const {
    const double inj = -fluxes[static_cast<int>(ChannelKind::Injection)];
    const double out = fluxes[static_cast<int>(ChannelKind::Extraction)] +
                       fluxes[static_cast<int>(ChannelKind::Radiative)] +
                       fluxes[static_cast<int>(ChannelKind::NonRadiative)];
    if (inj == 0.0) return std::abs(out);
    return std::abs(inj - out) / std::abs(inj);
}

double steady_current(const Eigen::VectorXd& populations, const EigenSystem& es,
                      const std::vector<Channel>& channels) {
    const int D = es.dim();
    if (populations.size() != D) throw InvalidParameter("population vector does not match the eigen system");
    double I = 0.0;
    for (const auto& c : channels) {
        if (c.kind != ChannelKind::Extraction) continue;
        const double g = c.spectral.plateau();
        if (g == 0.0) continue;
        const Eigen::VectorXd overlap = es.vectors.transpose() * c.excited_vector(D);
        I += g * populations.dot(overlap.cwiseAbs2());
    }
    return I;
}

KindFluxes flux_report(const Eigen::VectorXd& populations, const RateMatrix& w) {
    KindFluxes f{};
    const int D = w.dim();
    for (int k = 0; k < kChannelKinds; ++k) {
        const auto& W = w.by_kind[k];
        double acc = 0.0;
        for (int n = 1; n < D; ++n) acc += W(0, n) * populations(n) - W(n, 0) * populations(0);
        f[k] = acc;
    }
    return f;
}

Eigen::VectorXd site_populations(const Eigen::VectorXd& populations, const EigenSystem& es) {
    return es.site_amplitudes().cwiseAbs2() * populations;
}

NetworkModel build_model(const Hamiltonian& h, const EnvironmentParams& env, InjectionMode mode) {
    NetworkModel m;
    m.es = diagonalize(h);
    m.channels = resolve_channels(build_channels(h.geometry, h.params, env, mode), m.es);
    m.es.brightness = brightness(m.es, m.channels);
    return m;
}

SteadyStateReport solve_pme(const NetworkModel& model, Exec exec) {
    const auto& es = model.es;
    const RateMatrix w = transition_matrix(es, model.channels, exec);
    const Generator g = build_generator(w);
    const NullSpaceSolution ns = steady_state(g);

    SteadyStateReport r;
    r.method = "PME";
    r.populations = ns.populations;
    r.site_populations = site_populations(ns.populations, es);
    r.ground_population = ns.populations(0);
    r.residual = ns.residual;
    r.residual_bound = 1e-10 * ns.chi_norm;
    r.sigma_min = ns.sigma_min;
    r.sigma_next = ns.sigma_next;
    r.current = steady_current(ns.populations, es, model.channels);
    r.fluxes = flux_report(ns.populations, w);
    r.current_from_flux = r.fluxes[static_cast<int>(ChannelKind::Extraction)];

    if (r.residual > r.residual_bound) {
        std::ostringstream os;
        os << "residual " << r.residual << " exceeds " << r.residual_bound;
        r.warnings.push_back(os.str());
    }
    if (std::abs(r.current - r.current_from_flux) > 1e-12 * std::max(std::abs(r.current), 1e-300))
        r.warnings.push_back("site-formula current and extraction flux disagree");
    if (r.ground_population <= 0.95) r.warnings.push_back("ground population below 0.95");
    if (ns.sigma_next <= 10.0 * ns.sigma_min) r.warnings.push_back("weak singular-value gap");
    return r;
}

nlohmann::json report_to_json(const SteadyStateReport& r) {
    nlohmann::json fl;
    for (int k = 0; k < kChannelKinds; ++k) fl[to_string(static_cast<ChannelKind>(k))] = r.fluxes[k];
    nlohmann::json j = {{"method", r.method},
                        {"current", r.current},
                        {"current_from_flux", r.current_from_flux},
                        {"ground_population", r.ground_population},
                        {"fluxes", fl},
                        {"flux_imbalance", r.flux_imbalance()},
                        {"residual", r.residual},
                        {"residual_bound", r.residual_bound},
                        {"sigma_min", r.sigma_min},
                        {"sigma_next", r.sigma_next},
                        {"populations", std::vector<double>(r.populations.data(), r.populations.data() + r.populations.size())},
                        {"site_populations", std::vector<double>(r.site_populations.data(),
                                                                 r.site_populations.data() + r.site_populations.size())},
                        {"warnings", r.warnings}};
    if (r.method == "BRME") {
        j["rcond"] = r.rcond;
        j["coherence_ratio"] = r.coherence_ratio;
        j["min_rho_eigenvalue"] = r.min_rho_eigenvalue;
    }
    return j;
}

}  // namespace darkchain
