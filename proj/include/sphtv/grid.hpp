#pragma once

// Equiangular sampling grids on the sphere (DH and MW schemes) and the
// ring quadrature weights that make discrete sums of band-limited
// integrands equal their continuous integrals.

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace sphtv {

inline constexpr double kPi = std::numbers::pi_v<double>;
inline constexpr double kFourPi = 4.0 * std::numbers::pi_v<double>;

/// Harmonic band-limit: coefficients exist for degrees 0 <= l < L.
/// The harmonic dimension of a band-limited signal is L^2.
struct BandLimit {
    int L;
    explicit BandLimit(int band_limit) : L(band_limit) {
        if (band_limit < 1)
            throw std::invalid_argument("BandLimit: L must be >= 1, got " +
                                        std::to_string(band_limit));
    }
    int dimension() const { return L * L; }
};

enum class SamplingScheme { DH, MW };

inline const char* scheme_name(SamplingScheme s) {
    return s == SamplingScheme::DH ? "DH" : "MW";
}

inline SamplingScheme parse_scheme(const std::string& name) {
    if (name == "DH" || name == "dh") return SamplingScheme::DH;
    if (name == "MW" || name == "mw") return SamplingScheme::MW;
    throw std::invalid_argument("unknown sampling scheme: " + name);
}

/// Number of grid nodes: L(2L-1) for MW, 4L^2 for DH.
inline long node_count(SamplingScheme scheme, BandLimit L) {
    const long l = L.L;
    return scheme == SamplingScheme::MW ? l * (2 * l - 1) : 4 * l * l;
}

/// An equiangular node set. Nodes are ordered row-major, theta outer,
/// phi inner: node j = t * phi_count + p.
struct SphereGrid {
    SamplingScheme scheme;
    int L;
    std::vector<double> thetas;  // ring colatitudes, strictly increasing, in (0, pi]
    std::vector<double> phis;    // equally spaced longitudes in [0, 2pi)

    int ring_count() const { return static_cast<int>(thetas.size()); }
    int phi_count() const { return static_cast<int>(phis.size()); }
    long node_count() const { return static_cast<long>(thetas.size()) * phis.size(); }

    double delta_phi() const { return 2.0 * kPi / phi_count(); }
    /// Ring spacing; the grids are equiangular so this is constant.
    double delta_theta() const {
        return scheme == SamplingScheme::MW ? 2.0 * kPi / (2 * L - 1) : kPi / (2 * L);
    }

    long node_index(int t, int p) const { return static_cast<long>(t) * phi_count() + p; }
    double theta(long node) const { return thetas[node / phi_count()]; }
    double phi(long node) const { return phis[node % phi_count()]; }
};

/// Build the equiangular grid of the given scheme.
///   MW: theta_t = pi(2t+1)/(2L-1), t in 0..L-1;  phi_p = 2pi p/(2L-1).
///   DH: theta_t = pi(2t+1)/(4L),   t in 0..2L-1; phi_p = 2pi p/(2L).
/// Both exclude the north pole; MW includes theta = pi.
inline SphereGrid build_grid(SamplingScheme scheme, BandLimit L) {
    SphereGrid g;
    g.scheme = scheme;
    g.L = L.L;
    const int l = L.L;
    if (scheme == SamplingScheme::MW) {
        g.thetas.resize(l);
        for (int t = 0; t < l; ++t) g.thetas[t] = kPi * (2 * t + 1) / (2 * l - 1);
        g.phis.resize(2 * l - 1);
        for (int p = 0; p < 2 * l - 1; ++p) g.phis[p] = 2.0 * kPi * p / (2 * l - 1);
    } else {
        g.thetas.resize(2 * l);
        for (int t = 0; t < 2 * l; ++t) g.thetas[t] = kPi * (2 * t + 1) / (4 * l);
        g.phis.resize(2 * l);
        for (int p = 0; p < 2 * l; ++p) g.phis[p] = 2.0 * kPi * p / (2 * l);
    }
    return g;
}

/// Per-ring quadrature weights, in the measure sense of sin(theta) dtheta:
/// sum_t w_t P_l(cos theta_t) = 2 delta_{l0}. The full steradian weight of a
/// node is ring weight x phi spacing. MW weights may be signed.
struct QuadratureWeights {
    std::vector<double> ring;

    double node_weight(const SphereGrid& grid, int t) const {
        return ring[t] * grid.delta_phi();
    }
};

/// Solve the exactness system defining the ring weights.
///   DH: sum_t w_t P_l(cos theta_t) = 2 delta_{l0} for l = 0..2L-1 (square).
///   MW: same system for l = 0..L-1, solved in the least-squares sense.
/// One step of iterative refinement keeps the residual near machine level.
inline QuadratureWeights ring_quadrature_weights(const SphereGrid& grid) {
    const int rings = grid.ring_count();
    const int n_eq = grid.scheme == SamplingScheme::DH ? 2 * grid.L : grid.L;

    Eigen::MatrixXd A(n_eq, rings);
    for (int t = 0; t < rings; ++t) {
        const double x = std::cos(grid.thetas[t]);
        for (int l = 0; l < n_eq; ++l) A(l, t) = std::legendre(l, x);
    }
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_eq);
    b(0) = 2.0;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    if (qr.rank() < rings)
        throw std::runtime_error("ring_quadrature_weights: singular exactness system");
    Eigen::VectorXd w = qr.solve(b);
    w += qr.solve(b - A * w);

    if (!w.allFinite())
        throw std::runtime_error("ring_quadrature_weights: non-finite weights");

    QuadratureWeights out;
    out.ring.assign(w.data(), w.data() + rings);
    return out;
}

/// Weighted sum over all nodes: sum_j (ring weight x phi spacing) x sample_j.
/// Exact for band-limited integrands; the constant 1 integrates to 4pi.
inline std::complex<double> integrate(const SphereGrid& grid, const QuadratureWeights& weights,
                                      const Eigen::VectorXcd& samples) {
    if (samples.size() != grid.node_count())
        throw std::invalid_argument("integrate: sample count does not match grid");
    if (static_cast<int>(weights.ring.size()) != grid.ring_count())
        throw std::invalid_argument("integrate: weight count does not match grid rings");
    const int P = grid.phi_count();
    std::complex<double> acc = 0.0;
    for (int t = 0; t < grid.ring_count(); ++t) {
        std::complex<double> ring_sum = 0.0;
        for (int p = 0; p < P; ++p) ring_sum += samples(grid.node_index(t, p));
        acc += weights.ring[t] * ring_sum;
    }
    return acc * grid.delta_phi();
}

inline double integrate(const SphereGrid& grid, const QuadratureWeights& weights,
                        const Eigen::VectorXd& samples) {
    return integrate(grid, weights, Eigen::VectorXcd(samples.cast<std::complex<double>>()))
        .real();
}

}  // namespace sphtv
