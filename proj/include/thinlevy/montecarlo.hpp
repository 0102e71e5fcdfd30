#pragma once

// Path simulation under the original or tilted measure and the estimators built on it.
//
// Indicators with c_i u above head_y are drawn one by one. The remaining infinitely many
// small ones are replaced by a Gaussian vector on the grid with their exact mean and
// covariance; a Lyapunov ratio certifies that this replacement is accurate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>

#include "thinlevy/errors.hpp"
#include "thinlevy/model.hpp"
#include "thinlevy/params.hpp"
#include "thinlevy/rate.hpp"
#include "thinlevy/rng.hpp"
#include "thinlevy/tilt.hpp"

namespace thinlevy {

struct MeasureSpec {
    bool tilted = false;
    double u = 1.0;       // horizon of the tilt
    double theta = 0.0;

    static MeasureSpec original() { return {}; }
    static MeasureSpec tilt(double u, double theta) { return {true, u, theta}; }
    static MeasureSpec tilt(const RefinedTilt& rt) { return {true, rt.u, rt.theta_star_u}; }
};

// Exact draw of T_i from a uniform U in (0,1).
inline double sample_indicator_time(std::int64_t i, const MeasureSpec& m, const ModelParams& p, double U) {
    if (!(U > 0 && U < 1)) throw DomainError("montecarlo", "uniform must lie in (0,1)");
    if (!m.tilted) return -std::log(U) / coeff(i, p);
    return TiltedIndicatorLaw::make(i, m.u, m.theta, p).quantile(U);
}

inline double sample_indicator_time(std::int64_t i, const MeasureSpec& m, const ModelParams& p,
                                    std::uint64_t seed, std::uint64_t sample) {
    Substream s(seed, sample, StreamDomain::indicators);
    return sample_indicator_time(i, m, p, s.uniform(static_cast<std::uint64_t>(i - 2)));
}

struct PathSample {
    std::vector<double> grid;
    std::vector<double> values;
    double weight;          // e^{-theta u S_u}, 1 under the original measure
    double log_weight;
    bool hit_positive;      // S at the last grid time > 0
};

struct SimulationSpec {
    double head_y = 2.0;              // draw indicators with c_i u >= head_y exactly
    std::int64_t min_head = 1024;
    double max_lyapunov = 0.05;       // certification limit for the Gaussian remainder
    TruncationPolicy trunc{};
};

class PathSimulator {
public:
    PathSimulator(const MeasureSpec& m, double u, std::vector<double> grid, const ModelParams& p,
                  const SimulationSpec& spec = {})
        : m_(m), u_(u), grid_(std::move(grid)), p_(p), spec_(spec) {
        if (!(u > 0)) throw DomainError("montecarlo", "u must be positive");
        if (grid_.empty()) throw DomainError("montecarlo", "empty time grid");
        if (!std::is_sorted(grid_.begin(), grid_.end()) || grid_.front() < 0 || grid_.back() > u)
            throw DomainError("montecarlo", "grid must be sorted inside [0,u]");
        if (m.tilted && !(m.u >= grid_.back())) throw DomainError("montecarlo", "grid extends past the tilt horizon");
        if (!(spec.head_y > 0)) throw DomainError("montecarlo", "head_y must be positive");
        const double th = m.tilted ? m.theta : 0.0;
        const double uref = m.tilted ? m.u : u;
        const double n_head = std::ceil(std::pow(u / spec.head_y, p.tau - 1.0));
        if (n_head > static_cast<double>(spec.trunc.max_terms))
            throw TruncationError("montecarlo", "head would need more than max_terms indicators");
        N_ = std::max<std::int64_t>(spec.min_head, static_cast<std::int64_t>(n_head));
        const std::size_t G = grid_.size();

        // per-indicator CDF at each grid time: T_i <= t_g iff U <= thr[i][g]
        c_.resize(N_ - 1);
        thr_.resize((N_ - 1) * G);
        NeumaierSum<> c2;
        for (std::int64_t i = 2; i <= N_; ++i) {
            double c = coeff(i, p);
            c_[i - 2] = c;
            c2 += c * c;
            for (std::size_t g = 0; g < G; ++g)
                thr_[(i - 2) * G + g] = grid_[g] > 0 ? kernel_h(c * uref, grid_[g] / uref, th) : 0.0;
        }

        MomentSums rem{th, p, spec.trunc, N_ + 1};
        drift_.resize(G);
        for (std::size_t g = 0; g < G; ++g) {
            double t = grid_[g];
            drift_[g] = t > 0 ? 1.0 + p.beta_tilde * t - c2.value() * t + rem.mean_part(t, uref) : 1.0;
        }
        Eigen::MatrixXd C = Eigen::MatrixXd::Zero(G, G);
        for (std::size_t a = 0; a < G; ++a)
            for (std::size_t b = a; b < G; ++b)
                if (grid_[a] > 0) C(a, b) = C(b, a) = rem.cov_part(grid_[a], grid_[b], uref);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(C);
        Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
        L_ = es.eigenvectors() * ev.asDiagonal();
        for (std::size_t g = 0; g < G; ++g)
            if (grid_[g] == 0) L_.row(g).setZero();

        double tl = grid_.back();
        double v = tl > 0 ? rem.cov_part(tl, tl, uref) : 0.0;
        lyapunov_ = v > 0 ? rem.third_abs_moment(tl, uref) / std::pow(v, 1.5) : 0.0;
        remainder_var_ = v;
        if (lyapunov_ > spec.max_lyapunov)
            throw TruncationError("montecarlo", "Gaussian remainder not certified (Lyapunov ratio above limit)");
    }

    std::int64_t head_size() const { return N_; }
    double lyapunov_ratio() const { return lyapunov_; }
    double remainder_variance() const { return remainder_var_; }
    const std::vector<double>& grid() const { return grid_; }

    // values at the grid for one sample, written into out (size = grid size)
    void simulate_values(std::uint64_t seed, std::uint64_t sample, double* out) const {
        const std::size_t G = grid_.size();
        std::vector<double> bins(G + 1, 0.0);
        Substream us(seed, sample, StreamDomain::indicators);
        for (std::int64_t i = 2; i <= N_; ++i) {
            double U = us.uniform(static_cast<std::uint64_t>(i - 2));
            const double* th = &thr_[(i - 2) * G];
            if (U > th[G - 1]) continue;
            std::size_t g = 0;
            while (U > th[g]) ++g;
            bins[g] += c_[i - 2];
        }
        Substream ns(seed, sample, StreamDomain::normals);
        Eigen::VectorXd z(G);
        for (std::size_t g = 0; g < G; ++g) z[g] = ns.normal(g);
        Eigen::VectorXd r = L_ * z;
        double cum = 0;
        for (std::size_t g = 0; g < G; ++g) {
            cum += bins[g];
            out[g] = grid_[g] > 0 ? drift_[g] + cum + r[g] : 1.0;
        }
    }

    PathSample simulate(std::uint64_t seed, std::uint64_t sample) const {
        PathSample ps;
        ps.grid = grid_;
        ps.values.resize(grid_.size());
        simulate_values(seed, sample, ps.values.data());
        double su = ps.values.back();
        ps.log_weight = m_.tilted ? -m_.theta * m_.u * su : 0.0;
        ps.weight = std::exp(ps.log_weight);
        ps.hit_positive = su > 0;
        return ps;
    }

    // values for samples [0, n) as an n x G row-major array; deterministic for any thread count
    std::vector<double> simulate_many(std::uint64_t seed, std::uint64_t n, int threads) const {
        const std::size_t G = grid_.size();
        std::vector<double> out(n * G);
        parallel_for(n, threads, [&](std::uint64_t m) { simulate_values(seed, m, &out[m * G]); });
        return out;
    }

    static void parallel_for(std::uint64_t n, int threads, const std::function<void(std::uint64_t)>& body) {
        threads = std::max(1, threads);
        if (threads == 1 || n < 2) {
            for (std::uint64_t m = 0; m < n; ++m) body(m);
            return;
        }
        std::vector<std::thread> pool;
        std::uint64_t chunk = (n + threads - 1) / threads;
        for (int w = 0; w < threads; ++w) {
            std::uint64_t lo = w * chunk, hi = std::min<std::uint64_t>(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([lo, hi, &body] {
                for (std::uint64_t m = lo; m < hi; ++m) body(m);
            });
        }
        for (auto& t : pool) t.join();
    }

private:
    MeasureSpec m_;
    double u_;
    std::vector<double> grid_;
    ModelParams p_;
    SimulationSpec spec_;
    std::int64_t N_ = 0;
    std::vector<double> c_, thr_, drift_;
    Eigen::MatrixXd L_;
    double lyapunov_ = 0, remainder_var_ = 0;
};

inline PathSample simulate_path(const MeasureSpec& m, double u, const std::vector<double>& grid, const ModelParams& p,
                                std::uint64_t seed, std::uint64_t sample, const SimulationSpec& spec = {}) {
    return PathSimulator(m, u, grid, p, spec).simulate(seed, sample);
}

struct Estimate {
    double value = 0;
    double std_error = 0;
    std::uint64_t n = 0;
    double ci_lo = 0, ci_hi = 0;          // value -/+ 1.96 std_error
    double log_value = -std::numeric_limits<double>::infinity();
    double rel_error = std::numeric_limits<double>::infinity();  // std_error / value
    bool degenerate = false;              // no sample hit the event
    double cp_lo = 0, cp_hi = 1;          // Clopper-Pearson interval (binomial estimates only)
    double ess = 0;                       // effective sample size (weighted estimates only)
};

namespace detail {

inline void fill_ci(Estimate& e) {
    e.ci_lo = e.value - 1.96 * e.std_error;
    e.ci_hi = e.value + 1.96 * e.std_error;
}

// mean and sample standard deviation, summed in index order
inline std::pair<double, double> mean_sd(const std::vector<double>& x) {
    NeumaierSum<> s;
    for (double v : x) s += v;
    double mean = s.value() / static_cast<double>(x.size());
    NeumaierSum<> q;
    for (double v : x) q += (v - mean) * (v - mean);
    double var = x.size() > 1 ? q.value() / static_cast<double>(x.size() - 1) : 0.0;
    return {mean, std::sqrt(var)};
}

} // namespace detail

// P(S_u > 0) = phi(u; theta) E~[e^{-theta u S_u} 1{S_u > 0}] sampled at theta = theta*_u
inline Estimate estimate_tail_is(const RefinedTilt& rt, const ModelParams& p, std::uint64_t n, std::uint64_t seed,
                                 int threads = 1, const SimulationSpec& spec = {}) {
    if (n < 2) throw DomainError("montecarlo", "need at least two samples");
    const double u = rt.u, th = rt.theta_star_u;
    PathSimulator sim(MeasureSpec::tilt(rt), u, {u}, p, spec);
    const double log_phi = log_mgf_exact(u, th, p, spec.trunc).value;
    std::vector<double> su = sim.simulate_many(seed, n, threads);
    std::vector<double> x(n);
    for (std::uint64_t m = 0; m < n; ++m) x[m] = su[m] > 0 ? std::exp(-th * u * su[m]) : 0.0;
    auto [mean, sd] = detail::mean_sd(x);
    Estimate e;
    e.n = n;
    if (mean == 0) {
        e.degenerate = true;
        return e;
    }
    e.log_value = log_phi + std::log(mean);
    e.rel_error = sd / (mean * std::sqrt(static_cast<double>(n)));
    e.value = std::exp(e.log_value);
    e.std_error = e.value * e.rel_error;
    detail::fill_ci(e);
    return e;
}

// binomial proportion of S_u > 0 under the original measure
inline Estimate estimate_tail_naive(double u, const ModelParams& p, std::uint64_t n, std::uint64_t seed, int threads = 1,
                                    const SimulationSpec& spec = {}) {
    if (n < 2) throw DomainError("montecarlo", "need at least two samples");
    PathSimulator sim(MeasureSpec::original(), u, {u}, p, spec);
    std::vector<double> su = sim.simulate_many(seed, n, threads);
    std::uint64_t k = 0;
    for (double v : su) k += v > 0;
    Estimate e;
    e.n = n;
    double nn = static_cast<double>(n);
    e.value = k / nn;
    e.std_error = std::sqrt(e.value * (1 - e.value) / nn);
    e.log_value = k > 0 ? std::log(e.value) : -std::numeric_limits<double>::infinity();
    e.rel_error = k > 0 ? e.std_error / e.value : std::numeric_limits<double>::infinity();
    e.degenerate = k == 0;
    e.cp_lo = k == 0 ? 0.0 : boost::math::ibeta_inv(static_cast<double>(k), nn - k + 1, 0.025);
    e.cp_hi = k == n ? 1.0 : boost::math::ibeta_inv(k + 1.0, nn - k, 0.975);
    detail::fill_ci(e);
    return e;
}

struct ProfilePoint {
    double a;
    Estimate est;
};

inline constexpr double min_profile_ess = 50.0;
inline constexpr int bootstrap_replicates = 200;

// Self-normalized estimate of E[S_{au} | S_u > 0] from tilted paths with weights
// e^{-theta u S_u} 1{S_u > 0}; bootstrap standard errors.
inline std::vector<ProfilePoint> conditional_profile(const RefinedTilt& rt, const ModelParams& p,
                                                     const std::vector<double>& a_grid, std::uint64_t n,
                                                     std::uint64_t seed, int threads = 1,
                                                     const SimulationSpec& spec = {}) {
    if (a_grid.empty()) throw DomainError("montecarlo", "empty a-grid");
    for (double a : a_grid)
        if (!(a >= 0 && a <= 1)) throw DomainError("montecarlo", "profile points must lie in [0,1]");
    const double u = rt.u, th = rt.theta_star_u;
    std::vector<double> times;
    for (double a : a_grid) times.push_back(a * u);
    times.push_back(u);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    const std::size_t G = times.size();
    PathSimulator sim(MeasureSpec::tilt(rt), u, times, p, spec);
    std::vector<double> vals = sim.simulate_many(seed, n, threads);

    // log weights, shifted so the largest is 0
    std::vector<double> lw(n, -std::numeric_limits<double>::infinity());
    double lmax = -std::numeric_limits<double>::infinity();
    for (std::uint64_t m = 0; m < n; ++m) {
        double su = vals[m * G + G - 1];
        if (su > 0) lmax = std::max(lmax, lw[m] = -th * u * su);
    }
    if (!std::isfinite(lmax)) throw EffectiveSampleError("montecarlo", "no tilted path ended above zero");
    std::vector<double> w(n);
    NeumaierSum<> wsum;
    for (std::uint64_t m = 0; m < n; ++m) wsum += (w[m] = std::exp(lw[m] - lmax));
    const double ess = wsum.value();   // sum w / max w, max w = 1
    if (ess < min_profile_ess) throw EffectiveSampleError("montecarlo", "effective sample size below 50");

    std::vector<std::size_t> col;
    for (double a : a_grid) col.push_back(std::lower_bound(times.begin(), times.end(), a * u) - times.begin());
    const std::size_t A = a_grid.size();
    auto ratios = [&](auto&& index, double* dst) {
        std::vector<NeumaierSum<>> num(A);
        NeumaierSum<> den;
        for (std::uint64_t m = 0; m < n; ++m) {
            std::uint64_t j = index(m);
            den += w[j];
            for (std::size_t k = 0; k < A; ++k) num[k] += w[j] * vals[j * G + col[k]];
        }
        for (std::size_t k = 0; k < A; ++k) dst[k] = num[k].value() / den.value();
    };
    std::vector<double> point(A);
    ratios([](std::uint64_t m) { return m; }, point.data());
    // bootstrap replicate b resamples with its own substream
    std::vector<double> reps(static_cast<std::size_t>(bootstrap_replicates) * A);
    PathSimulator::parallel_for(bootstrap_replicates, threads, [&](std::uint64_t b) {
        Substream s(seed, b, StreamDomain::bootstrap);
        ratios([&](std::uint64_t m) {
            return static_cast<std::uint64_t>(std::min<double>(n - 1, std::floor(s.uniform(m) * n)));
        }, &reps[b * A]);
    });

    std::vector<ProfilePoint> out;
    for (std::size_t k = 0; k < A; ++k) {
        ProfilePoint pp{a_grid[k], {}};
        pp.est.n = n;
        pp.est.ess = ess;
        pp.est.value = point[k];
        std::vector<double> r(bootstrap_replicates);
        for (int b = 0; b < bootstrap_replicates; ++b) r[b] = reps[b * A + k];
        pp.est.std_error = detail::mean_sd(r).second;
        pp.est.log_value = pp.est.value > 0 ? std::log(pp.est.value) : std::numeric_limits<double>::quiet_NaN();
        pp.est.rel_error = pp.est.std_error / std::abs(pp.est.value);
        detail::fill_ci(pp.est);
        out.push_back(pp);
    }
    return out;
}

} // namespace thinlevy
