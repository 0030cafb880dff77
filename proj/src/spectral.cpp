#include "darkchain/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "darkchain/errors.hpp"

namespace darkchain {

namespace {

// Rotates a block of degenerate eigenvectors onto the eigenbasis of the site
// position operator along `axis`, recursing into y then z while degeneracies
// remain. Makes exports reproducible and orders the block by centroid.
void canonicalize_block(Eigen::Ref<Eigen::MatrixXd> block, const Geometry& g, int axis, double tol) {
    const Eigen::Index k = block.cols();
    if (k < 2 || axis > 2) return;
    Eigen::VectorXd coord(block.rows());
    for (Eigen::Index s = 0; s < block.rows(); ++s) coord(s) = g.positions[static_cast<std::size_t>(s)](axis);
    const Eigen::MatrixXd X = block.transpose() * coord.asDiagonal() * block;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(X);
    if (solver.info() != Eigen::Success) throw NumericalError("degenerate-block canonicalization failed");
    block = block * solver.eigenvectors();
    const auto& ev = solver.eigenvalues();
    Eigen::Index start = 0;
    while (start < k) {
        Eigen::Index end = start + 1;
        while (end < k && ev(end) - ev(end - 1) < tol) ++end;
        if (end - start > 1) canonicalize_block(block.middleCols(start, end - start), g, axis + 1, tol);
        start = end;
    }
}

void fix_sign(Eigen::Ref<Eigen::VectorXd> v) {
    const double top = v.cwiseAbs().maxCoeff();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (std::abs(v(i)) >= top - 1e-12) {
            if (v(i) < 0.0) v = -v;
            return;
        }
}

}  // namespace

EigenSystem diagonalize(const Hamiltonian& h, double degeneracy_tol) {
    const Eigen::MatrixXd& H = h.matrix;
    const Eigen::Index D = H.rows();
    if (D < 2 || H.cols() != D) throw InvalidParameter("Hamiltonian must be square with at least one site");
    const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
    if ((H - H.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw InvalidParameter("Hamiltonian is not symmetric");
    if (H.row(0).tail(D - 1).cwiseAbs().maxCoeff() != 0.0)
        throw InvalidParameter("ground state must be decoupled from the excited manifold");

    const Eigen::Index M = D - 1;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H.bottomRightCorner(M, M));
    if (solver.info() != Eigen::Success) {
        std::ostringstream os;
        os << "symmetric eigensolver failed (dim " << M << ", max|H| " << scale << ")";
        throw NumericalError(os.str());
    }
    Eigen::VectorXd eval = solver.eigenvalues();
    Eigen::MatrixXd evec = solver.eigenvectors();

    Eigen::Index start = 0;
    while (start < M) {
        Eigen::Index end = start + 1;
        while (end < M && eval(end) - eval(end - 1) < degeneracy_tol) ++end;
        if (end - start > 1)
            canonicalize_block(evec.middleCols(start, end - start), h.geometry, 0, degeneracy_tol);
        start = end;
    }
    for (Eigen::Index c = 0; c < M; ++c) fix_sign(evec.col(c));

    if (!(eval(0) > h.params.Eg)) {
        std::ostringstream os;
        os << "lowest excited eigenvalue " << eval(0) << " is not above Eg = " << h.params.Eg
           << "; increase E0";
        throw NumericalError(os.str());
    }

    EigenSystem es;
    es.geometry = h.geometry;
    es.params = h.params;
    es.energies.resize(D);
    es.energies(0) = H(0, 0);
    es.energies.tail(M) = eval;
    es.vectors = Eigen::MatrixXd::Zero(D, D);
    es.vectors(0, 0) = 1.0;
    es.vectors.bottomRightCorner(M, M) = evec;
    es.brightness = Eigen::VectorXd::Zero(D);

    const double ortho = (es.vectors.transpose() * es.vectors - Eigen::MatrixXd::Identity(D, D)).cwiseAbs().maxCoeff();
    const double recon =
        (es.vectors * es.energies.asDiagonal() * es.vectors.transpose() - H).cwiseAbs().maxCoeff();
    if (ortho > 1e-10 || recon > 1e-8 * scale) {
        std::ostringstream os;
        os << "eigendecomposition check failed: orthonormality " << ortho << ", reconstruction " << recon;
        throw NumericalError(os.str());
    }
    return es;
}

Eigen::VectorXd brightness(const EigenSystem& es, const std::vector<Channel>& channels) {
    const int D = es.dim();
    Eigen::VectorXd B = Eigen::VectorXd::Zero(D);
    bool found = false;
    for (const auto& c : channels) {
        if (c.kind != ChannelKind::Radiative) continue;
        found = true;
        const double g = c.spectral.plateau();
        const Eigen::RowVectorXd u = c.excited_vector(D).transpose() * es.vectors;
        B += (g * g) * u.transpose().cwiseAbs2();
    }
    if (!found) throw InvalidParameter("brightness needs a radiative channel");
    B(0) = 0.0;
    return B;
}

std::vector<Channel> resolve_channels(const std::vector<Channel>& channels, const EigenSystem& es) {
    std::vector<Channel> out = channels;
    const int D = es.dim();
    for (auto& c : out) {
        if (c.target == EigenTarget::None) continue;
        const int state = c.target == EigenTarget::Highest ? D - 1 : 1;
        c.entries.clear();
        for (int s = 1; s < D; ++s) {
            const double v = es.vectors(s, state);
            if (v == 0.0) continue;
            c.entries.push_back({0, s, v});
            c.entries.push_back({s, 0, v});
        }
    }
    return out;
}

RateMatrix transition_matrix(const EigenSystem& es, const std::vector<Channel>& channels, Exec exec) {
    const int D = es.dim();
    for (const auto& c : channels)
        for (const auto& e : c.entries)
            if (e.row < 0 || e.col < 0 || e.row >= D || e.col >= D)
                throw InvalidParameter("channel " + c.label() + " does not match the Hamiltonian dimension");
    const auto resolved = resolve_channels(channels, es);

    RateMatrix w;
    if (exec == Exec::Serial)
        kernels::accumulate_rates_reference(es.vectors, es.energies, resolved, kDegeneracyTol, w.by_kind);
    else
        kernels::accumulate_rates_parallel(es.vectors, es.energies, resolved, kDegeneracyTol, w.by_kind);
    w.total = Eigen::MatrixXd::Zero(D, D);
    for (const auto& m : w.by_kind) w.total += m;
    return w;
}

RelaxationProfile relaxation_profile(const RateMatrix& w, const EigenSystem& es) {
    const int D = es.dim();
    const auto& ph = w.of(ChannelKind::Phonon);
    RelaxationProfile p;
    p.downhill = Eigen::VectorXd::Zero(D);
    for (int n = 0; n < D; ++n)
        for (int m = 0; m < D; ++m)
            if (es.energies(m) < es.energies(n) - kDegeneracyTol) p.downhill(n) += ph(m, n);
    double best = std::numeric_limits<double>::infinity();
    for (int n = 2; n < D; ++n)
        if (p.downhill(n) < best) {
            best = p.downhill(n);
            p.bottleneck = n;
        }
    return p;
}

BrightDarkCensus classify_bright_dark(const EigenSystem& es, double threshold_fraction) {
    if (!(threshold_fraction > 0.0 && threshold_fraction < 1.0))
        throw InvalidParameter("threshold fraction must lie in (0, 1)");
    const int D = es.dim();
    BrightDarkCensus c;
    const double bmax = es.brightness.tail(D - 1).maxCoeff();
    c.threshold = threshold_fraction * bmax;
    double min_bright = std::numeric_limits<double>::infinity();
    double max_dark = -std::numeric_limits<double>::infinity();
    for (int n = 1; n < D; ++n) {
        if (es.brightness(n) < c.threshold) {
            c.dark_states.push_back(n);
            max_dark = std::max(max_dark, es.energies(n));
        } else {
            c.bright_states.push_back(n);
            min_bright = std::min(min_bright, es.energies(n));
        }
    }
    c.bright = static_cast<int>(c.bright_states.size());
    c.dark = static_cast<int>(c.dark_states.size());
    c.band_gap = (c.bright && c.dark) ? min_bright - max_dark : std::numeric_limits<double>::quiet_NaN();
    return c;
}

}  // namespace darkchain
