#include "darkchain/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <omp.h>

#include "darkchain/errors.hpp"
#include "darkchain/rng.hpp"

namespace darkchain {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Failure {
    std::string kind;
    std::string what;
    bool failed() const { return !kind.empty(); }
};

std::vector<Failure> run_tasks(int n, int jobs, const std::function<void(int)>& fn) {
    std::vector<Failure> out(static_cast<std::size_t>(std::max(n, 0)));
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int i = 0; i < n; ++i) {
        try {
            fn(i);
        } catch (const Error& e) {
            out[i] = {e.kind(), e.what()};
        } catch (const std::exception& e) {
            out[i] = {"internal-error", e.what()};
        }
    }
    return out;
}

std::string context(const PointSpec& p) {
    std::ostringstream os;
    os << "geometry=" << p.cell.name() << " N=" << p.n_cells << " Jb=" << p.hparams.Jb;
    if (p.disorder.sigma > 0.0) os << " seed=" << p.disorder.seed << " realization=" << p.disorder.realization_index;
    return os.str();
}

// Rethrows the first failure of a sweep that must not lose points.
void require_all(const std::vector<Failure>& fails, const std::vector<PointSpec>& points) {
    for (std::size_t i = 0; i < fails.size(); ++i)
        if (fails[i].failed()) throw Error(fails[i].kind, context(points[i]) + ": " + fails[i].what);
}

PointSpec point_from(const SweepSpec& s, const UnitCellKind& cell, int n, double jb) {
    PointSpec p;
    p.cell = cell;
    p.n_cells = n;
    p.hparams = s.hparams;
    p.hparams.Jb = jb;
    p.hparams.dipole_mode = s.dipoles;
    p.env = s.env;
    p.injection = s.injection;
    return p;
}

double quantile(std::vector<double> v, double q) {
    if (v.empty()) return kNaN;
    std::sort(v.begin(), v.end());
    const double h = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

std::int64_t i64(int v) { return static_cast<std::int64_t>(v); }

nlohmann::json fit_to_json(const FitResult& f) {
    return {{"alpha", f.alpha},   {"beta", f.beta},     {"residual", f.residual},     {"n_min", f.n_min},
            {"n_max", f.n_max},   {"n_used", f.n_used}, {"n_excluded", f.n_excluded}};
}

nlohmann::json stats_to_json(const EnsembleStats& s) {
    return {{"clean", s.clean},       {"median", s.median},     {"q1", s.q1},
            {"q3", s.q3},             {"min", s.min},           {"max", s.max},
            {"log10_iqr", s.log10_iqr}, {"fraction_within", s.fraction_within},
            {"n_ok", s.n_ok},         {"n_failed", s.n_failed}};
}

// Interior maximum of y over an ordered grid: argmax strictly inside and
// strictly above both endpoints.
nlohmann::json peak_info(const std::vector<double>& x, const std::vector<double>& y) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] > y[best]) best = i;
    const bool interior = y.size() >= 3 && best > 0 && best + 1 < y.size() && y[best] > y.front() && y[best] > y.back();
    return {{"argmax_jb", y.empty() ? kNaN : x[best]}, {"max_current", y.empty() ? kNaN : y[best]},
            {"interior_maximum", interior}};
}

}  // namespace

const char* to_string(Method m) {
    switch (m) {
        case Method::PME: return "PME";
        case Method::BRME: return "BRME";
        case Method::Both: return "both";
    }
    return "unknown";
}

std::optional<Method> parse_method(const std::string& s) {
    if (s == "PME" || s == "pme") return Method::PME;
    if (s == "BRME" || s == "brme") return Method::BRME;
    if (s == "both") return Method::Both;
    return std::nullopt;
}

Hamiltonian build_point_hamiltonian(const PointSpec& p) {
    Geometry g = build_geometry(p.cell, p.n_cells);
    if (p.hparams.dipole_mode || p.dipoles) g = assign_dipoles(std::move(g), p.dipoles.value_or(AllAlongTransport{}));
    return apply_disorder(build_hamiltonian(g, p.hparams), p.disorder);
}

NetworkModel build_point_model(const PointSpec& p) {
    return build_model(build_point_hamiltonian(p), p.env, p.injection);
}

PointResult solve_point(const PointSpec& p, Method method, const LiouvillianOptions& brme) {
    PointResult r;
    r.spec = p;
    const NetworkModel m = build_point_model(p);
    if (method != Method::BRME) r.pme = solve_pme(m, Exec::Serial);
    if (method != Method::PME) r.brme = solve_brme(m, brme);
    return r;
}

void SweepSpec::validate() const {
    if (geometries.empty()) throw ConfigError("geometry list is empty");
    if (n_cells.empty()) throw ConfigError("n_cells grid is empty");
    if (jb.empty()) throw ConfigError("Jb grid is empty");
    for (int n : n_cells)
        if (n < 1) throw ConfigError("n_cells entries must be >= 1");
    for (double j : jb)
        if (!std::isfinite(j)) throw ConfigError("Jb entries must be finite");
    if (n_realizations < 1) throw ConfigError("n_realizations must be >= 1");
    if (!(sigma >= 0.0)) throw ConfigError("sigma must be >= 0");
    if (!(dark_threshold > 0.0 && dark_threshold < 1.0)) throw ConfigError("dark_threshold must lie in (0, 1)");
    if (!(robustness_decades > 0.0)) throw ConfigError("robustness_decades must be > 0");
    darkchain::validate(env);
    darkchain::validate(hparams);
}

nlohmann::json sweep_to_json(const SweepSpec& s) {
    std::vector<std::string> geoms;
    for (const auto& g : s.geometries) geoms.push_back(g.name());
    return {{"geometries", geoms},
            {"n_cells", s.n_cells},
            {"jb", s.jb},
            {"hamiltonian", params_to_json(s.hparams)},
            {"environment", env_to_json(s.env)},
            {"injection_mode", s.injection == InjectionMode::SiteBasis ? "site" : "eigen"},
            {"dipoles", s.dipoles},
            {"sigma", s.sigma},
            {"n_realizations", s.n_realizations},
            {"base_seed", s.base_seed},
            {"method", to_string(s.method)},
            {"brme_max_n", s.brme_max_n},
            {"brme_max_dim2", s.brme.max_dim2},
            {"gamma_rad_grid", s.gamma_rad_grid},
            {"gamma_nr_factors", s.gamma_nr_factors},
            {"dark_threshold", s.dark_threshold},
            {"robustness_decades", s.robustness_decades}};
}

FitResult fit_exponential(const std::vector<int>& n, const std::vector<double>& current) {
    if (n.size() != current.size()) throw InvalidParameter("fit inputs differ in length");
    FitResult f;
    std::vector<double> x, y;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (current[i] > 0.0 && std::isfinite(current[i])) {
            x.push_back(n[i]);
            y.push_back(std::log(current[i]));
        } else {
            ++f.n_excluded;
        }
    }
    f.n_used = static_cast<int>(x.size());
    if (f.n_used < 2) throw InvalidParameter("exponential fit needs at least two positive currents");
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / f.n_used;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / f.n_used;
    double sxx = 0.0, sxy = 0.0;
    for (int i = 0; i < f.n_used; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw InvalidParameter("exponential fit needs at least two distinct chain lengths");
    const double slope = sxy / sxx;
    f.beta = -slope;
    f.alpha = std::exp(my - slope * mx);
    double rss = 0.0;
    for (int i = 0; i < f.n_used; ++i) {
        const double r = y[i] - (my + slope * (x[i] - mx));
        rss += r * r;
    }
    f.residual = std::sqrt(rss);
    f.n_min = static_cast<int>(*std::min_element(x.begin(), x.end()));
    f.n_max = static_cast<int>(*std::max_element(x.begin(), x.end()));
    return f;
}

std::uint64_t ensemble_seed(std::uint64_t base_seed, std::uint64_t jb_index) { return hash_combine(base_seed, jb_index); }

EnsembleStats ensemble_stats(double clean, const std::vector<double>& currents, double decades) {
    EnsembleStats s;
    s.clean = clean;
    s.raw = currents;
    std::vector<double> ok;
    int within = 0;
    for (double c : currents) {
        if (!std::isfinite(c)) {
            ++s.n_failed;
            continue;
        }
        ok.push_back(c);
        if (c > 0.0 && clean > 0.0 && std::abs(std::log10(c / clean)) <= decades) ++within;
    }
    s.n_ok = static_cast<int>(ok.size());
    if (ok.empty()) {
        s.median = s.q1 = s.q3 = s.min = s.max = s.log10_iqr = kNaN;
        return s;
    }
    s.median = quantile(ok, 0.5);
    s.q1 = quantile(ok, 0.25);
    s.q3 = quantile(ok, 0.75);
    s.min = *std::min_element(ok.begin(), ok.end());
    s.max = *std::max_element(ok.begin(), ok.end());
    s.log10_iqr = s.q1 > 0.0 ? std::log10(s.q3 / s.q1) : kNaN;
    s.fraction_within = static_cast<double>(within) / static_cast<double>(s.n_ok);
    return s;
}

const Table& ExperimentOutput::table(const std::string& n) const {
    for (const auto& [k, t] : tables)
        if (k == n) return t;
    throw InvalidParameter("experiment " + name + " has no table " + n);
}

std::vector<std::string> parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    std::vector<std::string> out;
    for (const auto& f : run_tasks(n, jobs, fn)) out.push_back(f.failed() ? f.kind + ": " + f.what : "");
    return out;
}

ExperimentOutput eigen_report(const PointSpec& p, double dark_threshold) {
    const NetworkModel m = build_point_model(p);
    const auto& es = m.es;
    const RateMatrix w = transition_matrix(es, m.channels);
    const auto relax = relaxation_profile(w, es);
    const auto census = classify_bright_dark(es, dark_threshold);
    std::vector<char> dark(static_cast<std::size_t>(es.dim()), 0);
    for (int n : census.dark_states) dark[n] = 1;

    Table states({"state_index", "energy", "brightness", "class", "downhill_phonon_rate", "bottleneck"});
    Table amps({"state_index", "energy", "brightness", "site_index", "cell", "slot", "amplitude"});
    const int nsite = es.n_sites();
    const int n = es.geometry.sites_per_cell;
    for (int k = 0; k < es.dim(); ++k) {
        const std::string cls = k == 0 ? "ground" : (dark[k] ? "dark" : "bright");
        states.add({i64(k), es.energies(k), es.brightness(k), cls, relax.downhill(k), i64(k == relax.bottleneck)});
        for (int s = 0; s < nsite; ++s) {
            const SiteIndex si = site_of(s, n);
            amps.add({i64(k), es.energies(k), es.brightness(k), i64(s + 1), i64(si.cell), i64(si.slot),
                      es.vectors(s + 1, k)});
        }
    }
    ExperimentOutput out;
    out.name = "eigen";
    out.tables.emplace_back("eigen_states.csv", std::move(states));
    out.tables.emplace_back("eigen_amplitudes.csv", std::move(amps));
    const double sum_b = es.brightness.sum();
    out.summary = {{"bright", census.bright},
                   {"dark", census.dark},
                   {"threshold", census.threshold},
                   {"band_gap", census.band_gap},
                   {"bottleneck_state", relax.bottleneck},
                   {"brightness_sum", sum_b},
                   {"geometry", geometry_to_json(es.geometry)},
                   {"channels", channels_summary(m.channels)}};
    return out;
}

ExperimentOutput steady_point(const PointSpec& p, Method method, const LiouvillianOptions& brme) {
    PointResult r;
    try {
        r = solve_point(p, method, brme);
    } catch (const Error& e) {
        throw Error(e.kind(), context(p) + ": " + e.what());
    }
    ExperimentOutput out;
    out.name = "steady";
    Table rows({"method", "current", "ground_population", "flux_injection", "flux_extraction", "flux_radiative",
                "flux_nonradiative", "flux_imbalance", "residual"});
    Table pops({"method", "state_index", "energy", "population"});
    Table sites({"method", "site_index", "cell", "slot", "population"});
    const Eigen::VectorXd energies = build_point_model(p).es.energies;
    for (const auto* rep : {r.pme ? &*r.pme : nullptr, r.brme ? &*r.brme : nullptr}) {
        if (!rep) continue;
        const auto& f = rep->fluxes;
        rows.add({rep->method, rep->current, rep->ground_population, -f[static_cast<int>(ChannelKind::Injection)],
                  f[static_cast<int>(ChannelKind::Extraction)], f[static_cast<int>(ChannelKind::Radiative)],
                  f[static_cast<int>(ChannelKind::NonRadiative)], rep->flux_imbalance(), rep->residual});
        for (int k = 0; k < rep->populations.size(); ++k)
            pops.add({rep->method, i64(k), energies(k), rep->populations(k)});
        for (int s = 0; s < rep->site_populations.size(); ++s) {
            const SiteIndex si = site_of(s, p.cell.sites());
            sites.add({rep->method, i64(s + 1), i64(si.cell), i64(si.slot), rep->site_populations(s)});
        }
        nlohmann::json j = report_to_json(*rep);
        out.summary[rep->method] = j;
        for (const auto& w : rep->warnings) out.warnings.push_back(rep->method + ": " + w);
    }
    out.tables.emplace_back("steady.csv", std::move(rows));
    out.tables.emplace_back("steady_populations.csv", std::move(pops));
    out.tables.emplace_back("steady_sites.csv", std::move(sites));
    return out;
}

ExperimentOutput population_profile(const SweepSpec& s) {
    s.validate();
    std::vector<PointSpec> points;
    for (const auto& g : s.geometries)
        for (double gr : s.gamma_rad_grid) {
            PointSpec p = point_from(s, g, s.n_cells.front(), s.jb.front());
            p.env.gamma_rad = gr;
            points.push_back(p);
        }
    std::vector<SteadyStateReport> reps(points.size());
    require_all(run_tasks(static_cast<int>(points.size()), s.jobs,
                          [&](int i) { reps[i] = *solve_point(points[i], Method::PME).pme; }),
                points);

    Table t({"geometry", "gamma_rad", "site_index", "cell", "slot", "population", "relative", "ground_population"});
    nlohmann::json decay = nlohmann::json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& sp = reps[i].site_populations;
        const double p1 = sp(0);
        for (int k = 0; k < sp.size(); ++k) {
            const SiteIndex si = site_of(k, points[i].cell.sites());
            t.add({points[i].cell.name(), points[i].env.gamma_rad, i64(k + 1), i64(si.cell), i64(si.slot), sp(k),
                   p1 > 0.0 ? sp(k) / p1 : kNaN, reps[i].ground_population});
        }
        decay.push_back({{"geometry", points[i].cell.name()},
                         {"gamma_rad", points[i].env.gamma_rad},
                         {"last_over_first", p1 > 0.0 ? sp(sp.size() - 1) / p1 : kNaN}});
    }
    ExperimentOutput out;
    out.name = "population-profile";
    out.tables.emplace_back("population_profile.csv", std::move(t));
    out.summary = {{"decay", decay}};
    return out;
}

namespace {

struct SweepRow {
    PointSpec spec;
    std::optional<SteadyStateReport> pme, brme;
};

std::vector<SweepRow> run_grid(const SweepSpec& s, const std::vector<PointSpec>& points) {
    std::vector<SweepRow> rows(points.size());
    require_all(run_tasks(static_cast<int>(points.size()), s.jobs,
                          [&](int i) {
                              const auto& p = points[i];
                              Method m = s.method;
                              if (m != Method::PME && p.n_cells > s.brme_max_n) m = Method::PME;
                              const PointResult r = solve_point(p, m, s.brme);
                              rows[i] = {p, r.pme, r.brme};
                          }),
                points);
    return rows;
}

Table currents_table(const std::vector<SweepRow>& rows) {
    Table t({"geometry", "jb", "n_cells", "method", "current", "ground_population", "flux_imbalance", "residual"});
    for (const auto& r : rows)
        for (const auto* rep : {r.pme ? &*r.pme : nullptr, r.brme ? &*r.brme : nullptr})
            if (rep)
                t.add({r.spec.cell.name(), r.spec.hparams.Jb, i64(r.spec.n_cells), rep->method, rep->current,
                       rep->ground_population, rep->flux_imbalance(), rep->residual});
    return t;
}

}  // namespace

ExperimentOutput length_sweep(const SweepSpec& s) {
    s.validate();
    if (s.n_cells.size() < 4) throw ConfigError("length sweep needs at least 4 chain lengths");
    std::vector<PointSpec> points;
    for (const auto& g : s.geometries)
        for (double jb : s.jb)
            for (int n : s.n_cells) points.push_back(point_from(s, g, n, jb));
    const auto rows = run_grid(s, points);

    ExperimentOutput out;
    out.name = "length-sweep";
    Table fits({"geometry", "jb", "method", "alpha", "beta", "fit_residual", "n_min", "n_max", "n_used",
                "n_excluded"});
    nlohmann::json jf = nlohmann::json::array();
    const std::size_t per = s.n_cells.size();
    for (std::size_t b = 0; b < rows.size(); b += per) {
        for (const std::string method : {"PME", "BRME"}) {
            std::vector<int> ns;
            std::vector<double> is;
            for (std::size_t k = b; k < b + per; ++k) {
                const auto& rep = method == "PME" ? rows[k].pme : rows[k].brme;
                if (!rep) continue;
                ns.push_back(rows[k].spec.n_cells);
                is.push_back(rep->current);
            }
            if (ns.size() < 2) continue;
            const FitResult f = fit_exponential(ns, is);
            if (f.n_excluded) out.warnings.push_back(method + " fit excluded non-positive currents");
            fits.add({rows[b].spec.cell.name(), rows[b].spec.hparams.Jb, method, f.alpha, f.beta, f.residual,
                      i64(f.n_min), i64(f.n_max), i64(f.n_used), i64(f.n_excluded)});
            nlohmann::json j = fit_to_json(f);
            j["geometry"] = rows[b].spec.cell.name();
            j["jb"] = rows[b].spec.hparams.Jb;
            j["method"] = method;
            jf.push_back(j);
        }
    }
    out.tables.emplace_back("length_sweep.csv", currents_table(rows));
    out.tables.emplace_back("length_fits.csv", std::move(fits));
    out.summary = {{"fits", jf}};
    return out;
}

ExperimentOutput eigenbasis_injection_sweep(const SweepSpec& s) {
    SweepSpec e = s;
    e.injection = InjectionMode::EigenBasis;
    ExperimentOutput out = length_sweep(e);
    out.name = "eigeninj-sweep";
    return out;
}

ExperimentOutput jb_sweep(const SweepSpec& s) {
    s.validate();
    std::vector<PointSpec> points;
    for (const auto& g : s.geometries)
        for (int n : s.n_cells)
            for (double jb : s.jb) points.push_back(point_from(s, g, n, jb));
    const auto rows = run_grid(s, points);
    ExperimentOutput out;
    out.name = "jb-sweep";
    nlohmann::json peaks = nlohmann::json::array();
    const std::size_t per = s.jb.size();
    for (std::size_t b = 0; b < rows.size(); b += per) {
        std::vector<double> y;
        for (std::size_t k = b; k < b + per; ++k) y.push_back(rows[k].pme ? rows[k].pme->current : rows[k].brme->current);
        nlohmann::json j = peak_info(s.jb, y);
        j["geometry"] = rows[b].spec.cell.name();
        j["n_cells"] = rows[b].spec.n_cells;
        peaks.push_back(j);
    }
    out.tables.emplace_back("jb_sweep.csv", currents_table(rows));
    out.summary = {{"peaks", peaks}};
    return out;
}

namespace {

// Clean current plus seeded ensemble for every point; order is preserved.
std::vector<EnsembleStats> run_ensembles(const SweepSpec& s, const std::vector<PointSpec>& points,
                                         const std::vector<std::size_t>& jb_index, int realizations,
                                         std::vector<std::string>& warnings) {
    const int np = static_cast<int>(points.size());
    std::vector<double> clean(points.size(), kNaN);
    require_all(run_tasks(np, s.jobs, [&](int i) { clean[i] = solve_point(points[i], Method::PME).pme->current; }),
                points);

    const int total = np * realizations;
    std::vector<double> cur(static_cast<std::size_t>(total), kNaN);
    std::vector<PointSpec> perturbed(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        PointSpec p = points[t / realizations];
        p.disorder = {s.sigma, ensemble_seed(s.base_seed, jb_index[t / realizations]),
                      static_cast<std::uint64_t>(t % realizations)};
        perturbed[t] = p;
    }
    const auto fails = run_tasks(total, s.jobs, [&](int t) { cur[t] = solve_point(perturbed[t], Method::PME).pme->current; });
    for (int t = 0; t < total; ++t)
        if (fails[t].failed()) warnings.push_back(context(perturbed[t]) + ": " + fails[t].kind + ": " + fails[t].what);

    std::vector<EnsembleStats> out;
    for (int i = 0; i < np; ++i) {
        std::vector<double> c(cur.begin() + static_cast<std::ptrdiff_t>(i) * realizations,
                              cur.begin() + static_cast<std::ptrdiff_t>(i + 1) * realizations);
        out.push_back(ensemble_stats(clean[i], c, s.robustness_decades));
    }
    return out;
}

}  // namespace

ExperimentOutput disorder_ensemble(const SweepSpec& s) {
    s.validate();
    std::vector<PointSpec> points;
    std::vector<std::size_t> jbi;
    for (const auto& g : s.geometries)
        for (std::size_t j = 0; j < s.jb.size(); ++j) {
            points.push_back(point_from(s, g, s.n_cells.front(), s.jb[j]));
            jbi.push_back(j);
        }
    ExperimentOutput out;
    out.name = "disorder";
    const auto stats = run_ensembles(s, points, jbi, s.n_realizations, out.warnings);

    Table st({"geometry", "jb", "n_cells", "sigma", "clean", "median", "q1", "q3", "min", "max", "log10_iqr",
              "fraction_within", "n_ok", "n_failed"});
    Table raw({"geometry", "jb", "realization", "seed", "current", "status"});
    nlohmann::json js = nlohmann::json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& e = stats[i];
        const auto& p = points[i];
        st.add({p.cell.name(), p.hparams.Jb, i64(p.n_cells), s.sigma, e.clean, e.median, e.q1, e.q3, e.min, e.max,
                e.log10_iqr, e.fraction_within, i64(e.n_ok), i64(e.n_failed)});
        if (s.keep_raw) {
            const auto seed = ensemble_seed(s.base_seed, jbi[i]);
            for (std::size_t r = 0; r < e.raw.size(); ++r)
                raw.add({p.cell.name(), p.hparams.Jb, static_cast<std::int64_t>(r), std::to_string(seed), e.raw[r],
                         std::string(std::isfinite(e.raw[r]) ? "ok" : "failed")});
        }
        nlohmann::json j = stats_to_json(e);
        j["geometry"] = p.cell.name();
        j["jb"] = p.hparams.Jb;
        js.push_back(j);
    }
    out.tables.emplace_back("disorder_stats.csv", std::move(st));
    if (s.keep_raw) out.tables.emplace_back("disorder_raw.csv", std::move(raw));
    out.summary = {{"stats", js}, {"robustness_decades", s.robustness_decades}};
    return out;
}

ExperimentOutput regime_grid(const SweepSpec& s) {
    s.validate();
    struct Key {
        double factor;
        bool dip;
        std::size_t g;
    };
    std::vector<PointSpec> points;
    std::vector<std::size_t> jbi;
    std::vector<Key> keys;
    for (double f : s.gamma_nr_factors)
        for (bool dip : {false, true})
            for (std::size_t g = 0; g < s.geometries.size(); ++g)
                for (std::size_t j = 0; j < s.jb.size(); ++j) {
                    SweepSpec v = s;
                    v.dipoles = dip;
                    PointSpec p = point_from(v, s.geometries[g], s.n_cells.front(), s.jb[j]);
                    p.env.gamma_nr = f * s.env.gamma_rad;
                    points.push_back(p);
                    jbi.push_back(j);
                    keys.push_back({f, dip, g});
                }
    ExperimentOutput out;
    out.name = "regime-grid";
    const bool ensemble = s.sigma > 0.0;
    std::vector<EnsembleStats> stats;
    if (ensemble) {
        stats = run_ensembles(s, points, jbi, s.n_realizations, out.warnings);
    } else {
        std::vector<double> clean(points.size());
        require_all(run_tasks(static_cast<int>(points.size()), s.jobs,
                              [&](int i) { clean[i] = solve_point(points[i], Method::PME).pme->current; }),
                    points);
        for (double c : clean) stats.push_back(ensemble_stats(c, {c}, s.robustness_decades));
    }

    Table t({"gamma_nr_factor", "gamma_nr", "dipoles", "geometry", "jb", "clean", "median", "q1", "q3", "n_ok",
             "n_failed"});
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& p = points[i];
        const auto& e = stats[i];
        t.add({keys[i].factor, p.env.gamma_nr, i64(keys[i].dip), p.cell.name(), p.hparams.Jb, e.clean, e.median,
               e.q1, e.q3, i64(e.n_ok), i64(e.n_failed)});
    }

    nlohmann::json curves = nlohmann::json::array();
    const std::size_t per = s.jb.size();
    for (std::size_t b = 0; b < points.size(); b += per) {
        std::vector<double> clean, med;
        for (std::size_t k = b; k < b + per; ++k) {
            clean.push_back(stats[k].clean);
            med.push_back(stats[k].median);
        }
        curves.push_back({{"gamma_nr_factor", keys[b].factor},
                          {"dipoles", keys[b].dip},
                          {"geometry", s.geometries[keys[b].g].name()},
                          {"clean_peak", peak_info(s.jb, clean)},
                          {"median_peak", peak_info(s.jb, med)}});
    }
    // dipole-on over dipole-off median, matched factor / geometry / Jb
    nlohmann::json gain = nlohmann::json::array();
    const std::size_t block = s.geometries.size() * per;
    for (std::size_t fi = 0; fi < s.gamma_nr_factors.size(); ++fi)
        for (std::size_t k = 0; k < block; ++k) {
            const std::size_t off = fi * 2 * block + k;
            const std::size_t on = off + block;
            gain.push_back({{"gamma_nr_factor", s.gamma_nr_factors[fi]},
                            {"geometry", points[off].cell.name()},
                            {"jb", points[off].hparams.Jb},
                            {"median_off", stats[off].median},
                            {"median_on", stats[on].median},
                            {"ratio", stats[on].median / stats[off].median}});
        }
    out.tables.emplace_back("regime_grid.csv", std::move(t));
    out.summary = {{"curves", curves}, {"dipole_gain", gain}, {"ensemble", ensemble}};
    return out;
}

ExperimentOutput brightness_robustness(const SweepSpec& s) {
    s.validate();
    struct Case {
        std::size_t g, j;
    };
    std::vector<Case> cases;
    for (std::size_t g = 0; g < s.geometries.size(); ++g)
        for (std::size_t j = 0; j < s.jb.size(); ++j) cases.push_back({g, j});
    const int R = s.n_realizations;
    const int per = R + 1;  // index 0 is the clean system
    const int total = static_cast<int>(cases.size()) * per;
    std::vector<Eigen::VectorXd> bright(static_cast<std::size_t>(total));
    std::vector<Eigen::VectorXd> energy(static_cast<std::size_t>(total));
    std::vector<int> dark_count(static_cast<std::size_t>(total), -1);
    std::vector<PointSpec> specs(static_cast<std::size_t>(total));
    for (int t = 0; t < total; ++t) {
        const auto& c = cases[t / per];
        PointSpec p = point_from(s, s.geometries[c.g], s.n_cells.front(), s.jb[c.j]);
        if (t % per) p.disorder = {s.sigma, ensemble_seed(s.base_seed, c.j), static_cast<std::uint64_t>(t % per - 1)};
        specs[t] = p;
    }
    ExperimentOutput out;
    out.name = "brightness-robustness";
    const auto fails = run_tasks(total, s.jobs, [&](int t) {
        const Hamiltonian h = build_point_hamiltonian(specs[t]);
        EigenSystem es = diagonalize(h);
        const auto ch = build_channels(h.geometry, h.params, specs[t].env, InjectionMode::SiteBasis);
        es.brightness = brightness(es, ch);
        dark_count[t] = classify_bright_dark(es, s.dark_threshold).dark;
        bright[t] = es.brightness;
        energy[t] = es.energies;
    });
    for (int t = 0; t < total; ++t)
        if (fails[t].failed()) {
            if (t % per == 0) throw Error(fails[t].kind, context(specs[t]) + ": " + fails[t].what);
            out.warnings.push_back(context(specs[t]) + ": " + fails[t].what);
        }

    Table q({"geometry", "jb", "state_index", "clean_energy", "clean_brightness", "min", "q1", "median", "q3", "max",
             "clean_class"});
    Table census({"geometry", "jb", "realization", "bright", "dark", "matches_clean"});
    nlohmann::json js = nlohmann::json::array();
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const int base = static_cast<int>(ci) * per;
        const PointSpec& p = specs[base];
        const Eigen::VectorXd& B0 = bright[base];
        const int D = static_cast<int>(B0.size());
        const double cut = s.dark_threshold * B0.tail(D - 1).maxCoeff();
        int matched = 0, ok = 0;
        std::vector<double> top_dark;
        // highest-energy dark states of the clean system
        std::vector<int> dark_idx;
        for (int k = 1; k < D; ++k)
            if (B0(k) < cut) dark_idx.push_back(k);
        const std::size_t n_top = std::min<std::size_t>(dark_idx.size(), static_cast<std::size_t>(p.n_cells));
        for (int r = 1; r < per; ++r) {
            const int t = base + r;
            if (dark_count[t] < 0) continue;
            ++ok;
            const int bright_n = D - 1 - dark_count[t];
            const bool same = dark_count[t] == dark_count[base];
            matched += same;
            census.add({p.cell.name(), p.hparams.Jb, i64(r - 1), i64(bright_n), i64(dark_count[t]), i64(same)});
            double m = 0.0;
            const double bmax = bright[t].tail(D - 1).maxCoeff();
            for (std::size_t k = dark_idx.size() - n_top; k < dark_idx.size(); ++k)
                m = std::max(m, bright[t](dark_idx[k]) / bmax);
            if (n_top) top_dark.push_back(m);
        }
        for (int k = 1; k < D; ++k) {
            std::vector<double> v;
            for (int r = 1; r < per; ++r)
                if (dark_count[base + r] >= 0) v.push_back(bright[base + r](k));
            const double mn = v.empty() ? kNaN : *std::min_element(v.begin(), v.end());
            const double mx = v.empty() ? kNaN : *std::max_element(v.begin(), v.end());
            q.add({p.cell.name(), p.hparams.Jb, i64(k), energy[base](k), B0(k), mn, quantile(v, 0.25),
                   quantile(v, 0.5), quantile(v, 0.75), mx, std::string(B0(k) < cut ? "dark" : "bright")});
        }
        js.push_back({{"geometry", p.cell.name()},
                      {"jb", p.hparams.Jb},
                      {"clean_dark", dark_count[base]},
                      {"clean_bright", D - 1 - dark_count[base]},
                      {"census_preserved_fraction", ok ? static_cast<double>(matched) / ok : kNaN},
                      {"top_dark_relative_brightness_median", quantile(top_dark, 0.5)},
                      {"n_ok", ok}});
    }
    out.tables.emplace_back("brightness_quantiles.csv", std::move(q));
    out.tables.emplace_back("brightness_census.csv", std::move(census));
    out.summary = {{"cases", js}};
    return out;
}

ExperimentOutput brme_check(const SweepSpec& s) {
    s.validate();
    std::vector<PointSpec> points;
    for (const auto& g : s.geometries)
        for (double jb : s.jb)
            for (int n : s.n_cells)
                if (n <= s.brme_max_n) points.push_back(point_from(s, g, n, jb));
    if (points.empty()) throw ConfigError("no chain length within brme_max_n");
    struct Row {
        double pme = kNaN, brme = kNaN, coh = kNaN, mineig = kNaN, secs = kNaN;
    };
    std::vector<Row> rows(points.size());
    require_all(run_tasks(static_cast<int>(points.size()), s.jobs,
                          [&](int i) {
                              const NetworkModel m = build_point_model(points[i]);
                              rows[i].pme = solve_pme(m, Exec::Serial).current;
                              const auto t0 = std::chrono::steady_clock::now();
                              const auto b = solve_brme(m, s.brme);
                              rows[i].secs =
                                  std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
                              rows[i].brme = b.current;
                              rows[i].coh = b.coherence_ratio;
                              rows[i].mineig = b.min_rho_eigenvalue;
                          }),
                points);
    Table t({"geometry", "jb", "n_cells", "pme_current", "brme_current", "rel_diff", "coherence_ratio",
             "min_rho_eigenvalue", "brme_seconds"});
    double worst = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const auto& r = rows[i];
        const double rel = std::abs(r.brme - r.pme) / r.pme;
        worst = std::max(worst, rel);
        t.add({points[i].cell.name(), points[i].hparams.Jb, i64(points[i].n_cells), r.pme, r.brme, rel, r.coh,
               r.mineig, r.secs});
    }
    ExperimentOutput out;
    out.name = "brme-check";
    out.tables.emplace_back("brme_check.csv", std::move(t));
    out.summary = {{"max_rel_diff", worst}};
    return out;
}

}  // namespace darkchain
