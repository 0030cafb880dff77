#include "darkchain/kernels.hpp"

#include <algorithm>
#include <complex>
#include <map>

#include "darkchain/errors.hpp"

namespace darkchain::kernels {

Eigen::MatrixXd spectral_matrix(const SpectralDensity& s, const Eigen::VectorXd& energies, double tol) {
    const Eigen::Index d = energies.size();
    Eigen::MatrixXd out(d, d);
    for (Eigen::Index j = 0; j < d; ++j)
        for (Eigen::Index i = 0; i < d; ++i) {
            double w = energies(i) - energies(j);
            if (std::abs(w) < tol) w = 0.0;
            out(i, j) = s(w);
        }
    return out;
}

Eigen::MatrixXd eigenbasis_operator(const Channel& c, const Eigen::MatrixXd& vectors) {
    if (!c.resolved()) throw InvalidParameter("channel " + c.label() + " needs eigen data before rates can be built");
    const Eigen::Index d = vectors.cols();
    // A = sum_r |r> t_r with t_r = sum_{entries in row r} value <col|
    std::map<int, Eigen::RowVectorXd> rows;
    for (const auto& e : c.entries) {
        auto [it, fresh] = rows.try_emplace(e.row, Eigen::RowVectorXd::Zero(d));
        it->second += e.value * vectors.row(e.col);
    }
    Eigen::MatrixXd Vr(static_cast<Eigen::Index>(rows.size()), d);
    Eigen::MatrixXd Tr(static_cast<Eigen::Index>(rows.size()), d);
    Eigen::Index k = 0;
    for (const auto& [r, t] : rows) {
        Vr.row(k) = vectors.row(r);
        Tr.row(k) = t;
        ++k;
    }
    return Vr.transpose() * Tr;
}

namespace {

void zero_kinds(KindMatrices& out, Eigen::Index d) {
    for (auto& m : out)
        if (m.rows() != d || m.cols() != d) m = Eigen::MatrixXd::Zero(d, d);
}

// Unique spectral densities and the index each channel maps to.
struct SpectrumCache {
    std::vector<SpectralDensity> unique;
    std::vector<int> index_of;
};

SpectrumCache cache_spectra(const std::vector<Channel>& channels) {
    SpectrumCache c;
    c.index_of.reserve(channels.size());
    for (const auto& ch : channels) {
        auto it = std::find(c.unique.begin(), c.unique.end(), ch.spectral);
        if (it == c.unique.end()) {
            c.unique.push_back(ch.spectral);
            c.index_of.push_back(static_cast<int>(c.unique.size() - 1));
        } else {
            c.index_of.push_back(static_cast<int>(it - c.unique.begin()));
        }
    }
    return c;
}

}  // namespace

void accumulate_rates_reference(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& energies,
                                const std::vector<Channel>& channels, double tol, KindMatrices& out) {
    const Eigen::Index d = vectors.cols();
    zero_kinds(out, d);
    for (const auto& c : channels) {
        const Eigen::MatrixXd At = vectors.transpose() * c.dense(static_cast<int>(d)) * vectors;
        auto& W = out[static_cast<int>(c.kind)];
        for (Eigen::Index m = 0; m < d; ++m)
            for (Eigen::Index n = 0; n < d; ++n) {
                if (n == m) continue;
                double w = energies(m) - energies(n);
                if (std::abs(w) < tol) w = 0.0;
                W(n, m) += c.spectral(w) * At(m, n) * At(m, n);
            }
    }
}

void accumulate_rates_parallel(const Eigen::MatrixXd& vectors, const Eigen::VectorXd& energies,
                               const std::vector<Channel>& channels, double tol, KindMatrices& out) {
    const Eigen::Index d = vectors.cols();
    zero_kinds(out, d);
    const auto cache = cache_spectra(channels);
    std::vector<Eigen::MatrixXd> spectra(cache.unique.size());
    const int n_unique = static_cast<int>(cache.unique.size());
#pragma omp parallel for schedule(static)
    for (int u = 0; u < n_unique; ++u) spectra[u] = spectral_matrix(cache.unique[u], energies, tol);

    std::vector<int> active;
    for (int a = 0; a < static_cast<int>(channels.size()); ++a) {
        if (!channels[a].resolved())
            throw InvalidParameter("channel " + channels[a].label() + " needs eigen data before rates can be built");
        if (!channels[a].spectral.identically_zero()) active.push_back(a);
    }

    const int n_active = static_cast<int>(active.size());
    std::vector<Eigen::MatrixXd> ops(active.size());
#pragma omp parallel for schedule(dynamic)
    for (int k = 0; k < n_active; ++k) ops[k] = eigenbasis_operator(channels[active[k]], vectors);

    // one output column per iteration keeps the summation order independent
    // of the thread count
    const int dim = static_cast<int>(d);
#pragma omp parallel for schedule(static)
    for (int m = 0; m < dim; ++m) {
        for (int k = 0; k < n_active; ++k) {
            const auto& c = channels[active[k]];
            const auto& S = spectra[cache.index_of[active[k]]];
            const auto& At = ops[k];
            auto& W = out[static_cast<int>(c.kind)];
            for (int n = 0; n < dim; ++n) {
                if (n == m) continue;
                const double a = At(m, n);
                W(n, m) += S(m, n) * a * a;
            }
        }
    }
}

Eigen::MatrixXcd redfield_reference(const Eigen::VectorXd& energies, const std::vector<RedfieldGroup>& groups) {
    const Eigen::Index D = energies.size();
    const std::complex<double> I(0.0, 1.0);
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(D * D, D * D);
    for (Eigen::Index a = 0; a < D; ++a)
        for (Eigen::Index b = 0; b < D; ++b) L(a * D + b, a * D + b) += -I * (energies(a) - energies(b));

    for (const auto& g : groups) {
        const auto& S = g.spectrum;
        for (const auto& A : g.ops) {
            const Eigen::MatrixXd G = A * A.cwiseProduct(S.transpose());
            for (Eigen::Index a = 0; a < D; ++a)
                for (Eigen::Index b = 0; b < D; ++b)
                    for (Eigen::Index c = 0; c < D; ++c)
                        for (Eigen::Index d = 0; d < D; ++d) {
                            double v = 0.5 * A(a, c) * A(d, b) * (S(c, a) + S(d, b));
                            if (b == d) v -= 0.5 * G(a, c);
                            if (a == c) v -= 0.5 * G(b, d);
                            L(a * D + b, c * D + d) += v;
                        }
        }
    }
    return L;
}

Eigen::MatrixXcd redfield_parallel(const Eigen::VectorXd& energies, const std::vector<RedfieldGroup>& groups) {
    const Eigen::Index D = energies.size();
    const Eigen::Index D2 = D * D;
    const int dim = static_cast<int>(D);
    Eigen::MatrixXcd L = Eigen::MatrixXcd::Zero(D2, D2);
    for (Eigen::Index a = 0; a < D; ++a)
        for (Eigen::Index b = 0; b < D; ++b)
            L(a * D + b, a * D + b) = std::complex<double>(0.0, -(energies(a) - energies(b)));

    Eigen::MatrixXd T;
    for (const auto& g : groups) {
        if (g.ops.empty() || g.spectrum.isZero(0.0)) continue;
        const auto& S = g.spectrum;
        const Eigen::Index k = static_cast<Eigen::Index>(g.ops.size());
        // F(a*D + c, alpha) = A_alpha(a, c); T = F F^T pairs (a c) with (d b)
        Eigen::MatrixXd F(D2, k);
        Eigen::MatrixXd G = Eigen::MatrixXd::Zero(D, D);
        for (Eigen::Index al = 0; al < k; ++al) {
            const auto& A = g.ops[al];
            for (Eigen::Index a = 0; a < D; ++a)
                for (Eigen::Index c = 0; c < D; ++c) F(a * D + c, al) = A(a, c);
            G.noalias() += A * A.cwiseProduct(S.transpose());
        }
        T.noalias() = F * F.transpose();

#pragma omp parallel for schedule(static)
        for (int a = 0; a < dim; ++a) {
            for (Eigen::Index c = 0; c < D; ++c)
                for (Eigen::Index d = 0; d < D; ++d) {
                    const Eigen::Index col = c * D + d;
                    for (Eigen::Index b = 0; b < D; ++b)
                        L(a * D + b, col) += 0.5 * T(a * D + c, d * D + b) * (S(c, a) + S(d, b));
                }
            for (Eigen::Index b = 0; b < D; ++b) {
                for (Eigen::Index c = 0; c < D; ++c) L(a * D + b, c * D + b) -= 0.5 * G(a, c);
                for (Eigen::Index d = 0; d < D; ++d) L(a * D + b, a * D + d) -= 0.5 * G(b, d);
            }
        }
    }
    return L;
}

Eigen::VectorXd redfield_ground_row(const RedfieldGroup& group, int dim) {
    const Eigen::Index D = dim;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(D * D);
    const auto& S = group.spectrum;
    for (const auto& A : group.ops) {
        const Eigen::MatrixXd G = A * A.cwiseProduct(S.transpose());
        for (Eigen::Index c = 0; c < D; ++c)
            for (Eigen::Index d = 0; d < D; ++d) {
                double v = 0.5 * A(0, c) * A(d, 0) * (S(c, 0) + S(d, 0));
                if (d == 0) v -= 0.5 * G(0, c);
                if (c == 0) v -= 0.5 * G(0, d);
                row(c * D + d) += v;
            }
    }
    return row;
}

}  // namespace darkchain::kernels
