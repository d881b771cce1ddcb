#pragma once

// Measurement operator (random masking plus noise), the quadrature-weighted
// discrete TV norm with its gradient/divergence machinery, and metrics.

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sphtv/grid.hpp"
#include "sphtv/rng.hpp"
#include "sphtv/signal.hpp"

namespace sphtv {

/// The mask defining Phi, the noisy values y taken at those nodes, the noise
/// level, and the fidelity radius epsilon.
struct MeasurementSet {
    std::vector<long> indices;  // distinct node indices, ascending
    Eigen::VectorXd values;     // y, length M
    double sigma = 0.0;
    double epsilon = 0.0;

    long M() const { return static_cast<long>(indices.size()); }

    void validate(long node_count) const {
        if (indices.empty()) throw std::invalid_argument("MeasurementSet: M must be >= 1");
        if (values.size() != M())
            throw std::invalid_argument("MeasurementSet: |values| != M");
        if (epsilon < 0) throw std::invalid_argument("MeasurementSet: epsilon < 0");
        for (size_t i = 0; i < indices.size(); ++i) {
            if (indices[i] < 0 || indices[i] >= node_count)
                throw std::out_of_range("MeasurementSet: index out of range");
            if (i > 0 && indices[i] <= indices[i - 1])
                throw std::invalid_argument("MeasurementSet: indices must be distinct ascending");
        }
    }
};

/// Forward differences on the grid, as per-radian rates. dtheta is zero on
/// the final ring (Neumann closure); dphi is wrapped periodically and scaled
/// by 1/sin(theta), except on a pole ring (sin theta = 0) where the nodes
/// coincide and the phi direction carries no information.
struct GradientField {
    SphereGrid grid;
    Eigen::VectorXd dtheta;
    Eigen::VectorXd dphi_scaled;
};

namespace detail {
/// 1/(dphi * sin theta_t) per ring, zero on pole rings.
inline std::vector<double> phi_scales(const SphereGrid& grid) {
    std::vector<double> s(grid.ring_count());
    for (int t = 0; t < grid.ring_count(); ++t) {
        const double st = std::sin(grid.thetas[t]);
        s[t] = st < 1e-12 ? 0.0 : 1.0 / (grid.delta_phi() * st);
    }
    return s;
}
inline double theta_spacing(const SphereGrid& grid) {
    return grid.ring_count() > 1 ? grid.thetas[1] - grid.thetas[0] : kPi;
}
}  // namespace detail

inline GradientField spherical_gradient(const SphereGrid& grid, const Eigen::VectorXd& x) {
    if (x.size() != grid.node_count())
        throw std::invalid_argument("spherical_gradient: size mismatch");
    const int T = grid.ring_count();
    const int P = grid.phi_count();
    const double inv_dtheta = 1.0 / detail::theta_spacing(grid);
    const auto scales = detail::phi_scales(grid);

    GradientField g{grid, Eigen::VectorXd::Zero(x.size()), Eigen::VectorXd::Zero(x.size())};
    for (int t = 0; t < T; ++t) {
        const double c = scales[t];
        for (int p = 0; p < P; ++p) {
            const long j = grid.node_index(t, p);
            if (t + 1 < T) g.dtheta(j) = (x(grid.node_index(t + 1, p)) - x(j)) * inv_dtheta;
            g.dphi_scaled(j) = (x(grid.node_index(t, (p + 1) % P)) - x(j)) * c;
        }
    }
    return g;
}

inline GradientField spherical_gradient(const SphericalSignal& x) {
    if (x.max_imag() > 0.0)
        throw std::invalid_argument("spherical_gradient: signal must be real");
    return spherical_gradient(x.grid, x.real_values());
}

/// Exact adjoint of spherical_gradient under unweighted Euclidean inner
/// products (the negative discrete divergence).
inline Eigen::VectorXd adjoint_gradient(const GradientField& g) {
    const SphereGrid& grid = g.grid;
    if (g.dtheta.size() != grid.node_count() || g.dphi_scaled.size() != grid.node_count())
        throw std::invalid_argument("adjoint_gradient: size mismatch");
    const int T = grid.ring_count();
    const int P = grid.phi_count();
    const double inv_dtheta = 1.0 / detail::theta_spacing(grid);
    const auto scales = detail::phi_scales(grid);

    Eigen::VectorXd out = Eigen::VectorXd::Zero(grid.node_count());
    for (int t = 0; t < T; ++t) {
        const double c = scales[t];
        for (int p = 0; p < P; ++p) {
            const long j = grid.node_index(t, p);
            double acc = 0.0;
            if (t + 1 < T) acc -= g.dtheta(j) * inv_dtheta;
            if (t > 0) acc += g.dtheta(grid.node_index(t - 1, p)) * inv_dtheta;
            acc -= g.dphi_scaled(j) * c;
            acc += g.dphi_scaled(grid.node_index(t, (p + P - 1) % P)) * c;
            out(j) = acc;
        }
    }
    return out;
}

/// Steradian area element per node of ring t: ring weight x phi spacing.
inline Eigen::VectorXd tv_node_weights(const SphereGrid& grid, const QuadratureWeights& w) {
    Eigen::VectorXd q(grid.node_count());
    for (int t = 0; t < grid.ring_count(); ++t)
        q.segment(static_cast<long>(t) * grid.phi_count(), grid.phi_count())
            .setConstant(w.node_weight(grid, t));
    return q;
}

/// Discrete TV norm: sum_j q_j sqrt(dtheta_j^2 + dphi_scaled_j^2). This is
/// the quadrature approximation of the continuous integral of |grad x|.
inline double tv_norm(const SphereGrid& grid, const QuadratureWeights& weights,
                      const Eigen::VectorXd& x) {
    const GradientField g = spherical_gradient(grid, x);
    const Eigen::VectorXd q = tv_node_weights(grid, weights);
    double acc = 0.0;
    for (long j = 0; j < x.size(); ++j)
        acc += q(j) * std::hypot(g.dtheta(j), g.dphi_scaled(j));
    return acc;
}

inline double tv_norm(const SphericalSignal& x, const QuadratureWeights& weights) {
    if (x.max_imag() > 0.0) throw std::invalid_argument("tv_norm: signal must be real");
    return tv_norm(x.grid, weights, x.real_values());
}

/// M distinct node indices, uniform without replacement, ascending.
inline std::vector<long> draw_mask(long N, long M, std::uint64_t seed) {
    if (M < 1 || M > N) throw std::invalid_argument("draw_mask: need 1 <= M <= N");
    RngStream rng = RngStream::derive(seed, {rng_tag::mask});
    std::vector<long> pool(N);
    for (long i = 0; i < N; ++i) pool[i] = i;
    for (long i = 0; i < M; ++i) {
        const long j = i + static_cast<long>(rng.next_below(static_cast<std::uint64_t>(N - i)));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(M);
    std::sort(pool.begin(), pool.end());
    return pool;
}

/// Phi: gather of x at the mask indices.
inline Eigen::VectorXd apply_measurement(const std::vector<long>& indices,
                                         const Eigen::VectorXd& x) {
    Eigen::VectorXd out(static_cast<long>(indices.size()));
    for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= x.size())
            throw std::out_of_range("apply_measurement: index out of range");
        out(static_cast<long>(i)) = x(indices[i]);
    }
    return out;
}

/// Phi-dagger: scatter of v to the mask indices, zero elsewhere.
inline Eigen::VectorXd adjoint_measurement(const std::vector<long>& indices,
                                           const Eigen::VectorXd& v, long N) {
    if (v.size() != static_cast<long>(indices.size()))
        throw std::invalid_argument("adjoint_measurement: |v| != M");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(N);
    for (size_t i = 0; i < indices.size(); ++i) {
        if (indices[i] < 0 || indices[i] >= N)
            throw std::out_of_range("adjoint_measurement: index out of range");
        out(indices[i]) = v(static_cast<long>(i));
    }
    return out;
}

/// Add iid N(0, sigma^2) noise, deterministic per seed.
inline Eigen::VectorXd add_noise(const Eigen::VectorXd& values, double sigma,
                                 std::uint64_t seed) {
    if (sigma < 0) throw std::invalid_argument("add_noise: sigma < 0");
    if (sigma == 0.0) return values;
    RngStream rng = RngStream::derive(seed, {rng_tag::noise});
    Eigen::VectorXd out = values;
    for (long i = 0; i < out.size(); ++i) out(i) += sigma * rng.next_gaussian();
    return out;
}

/// Fidelity radius: two-standard-deviation upper quantile surrogate of the
/// chi^2_M norm of the noise, epsilon = sigma sqrt(M + 2 sqrt(2M)).
inline double epsilon_bound(long M, double sigma) {
    if (M < 1) throw std::invalid_argument("epsilon_bound: M < 1");
    if (sigma < 0) throw std::invalid_argument("epsilon_bound: sigma < 0");
    return sigma * std::sqrt(static_cast<double>(M) + 2.0 * std::sqrt(2.0 * M));
}

/// 10 log10(||true||^2 / ||true - rec||^2); +inf when the error norm is zero.
inline double snr_db(const Eigen::VectorXcd& x_true, const Eigen::VectorXcd& x_rec) {
    if (x_true.size() != x_rec.size()) throw std::invalid_argument("snr_db: size mismatch");
    const double err = (x_true - x_rec).squaredNorm();
    if (err == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(x_true.squaredNorm() / err);
}

inline double snr_db(const HarmonicVector& x_true, const HarmonicVector& x_rec) {
    if (x_true.L != x_rec.L) throw std::invalid_argument("snr_db: band-limit mismatch");
    return snr_db(x_true.coeffs, x_rec.coeffs);
}

inline double snr_db(const Eigen::VectorXd& x_true, const Eigen::VectorXd& x_rec) {
    return snr_db(Eigen::VectorXcd(x_true.cast<std::complex<double>>()),
                  Eigen::VectorXcd(x_rec.cast<std::complex<double>>()));
}

}  // namespace sphtv
