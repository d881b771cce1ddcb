#pragma once

// Spherical harmonic transforms for DH and MW grids.
//
// The synthesis operator (inverse transform) separates into a Legendre stage
// over rings followed by a Fourier stage over longitudes:
//   x(t, p) = sum_m [ sum_l x_hat_{lm} Pbar_{lm}(cos theta_t) s_m ] e^{i m phi_p} / sqrt(2 pi)
// Its adjoint is the exact conjugate-transpose of the same factorization.
//
// The forward (analysis) transform is scheme-specific:
//   DH: weighted quadrature sum, exact for band-limited signals by the
//       exactness of the ring weights up to degree 2L-1.
//   MW: ring quadrature is not exact at band-limit L, so analysis is the
//       linear inverse of synthesis: an inverse Fourier stage per ring, then
//       a least-squares solve against the per-order Legendre blocks with
//       precomputed factorizations.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "sphtv/grid.hpp"
#include "sphtv/legendre.hpp"
#include "sphtv/signal.hpp"

namespace sphtv {

class ShtPlan {
public:
    explicit ShtPlan(const SphereGrid& grid)
        : grid_(grid), L_(grid.L), table_(legendre_table(grid)) {
        const int L = L_;
        const int P = grid_.phi_count();
        exp_re_.resize(2 * L - 1, P);
        exp_im_.resize(2 * L - 1, P);
        const double scale = 1.0 / std::sqrt(2.0 * kPi);
        for (int mi = 0; mi < 2 * L - 1; ++mi) {
            const int m = mi - (L - 1);
            for (int p = 0; p < P; ++p) {
                const double a = m * grid_.phis[p];
                exp_re_(mi, p) = scale * std::cos(a);
                exp_im_(mi, p) = scale * std::sin(a);
            }
        }
        if (grid_.scheme == SamplingScheme::DH) {
            weights_ = ring_quadrature_weights(grid_);
        } else {
            mw_solvers_.reserve(L);
            for (int m = 0; m < L; ++m) mw_solvers_.emplace_back(table_.per_order[m]);
        }
    }

    const SphereGrid& grid() const { return grid_; }
    const LegendreTable& table() const { return table_; }
    int band_limit() const { return L_; }

    /// Synthesis: coefficients (length L^2) to node values (length N).
    Eigen::VectorXcd inverse(const Eigen::VectorXcd& coeffs) const {
        check_coeff_size(coeffs);
        const int rings = grid_.ring_count();
        const int L = L_;
        Eigen::MatrixXd f_re = Eigen::MatrixXd::Zero(rings, 2 * L - 1);
        Eigen::MatrixXd f_im = Eigen::MatrixXd::Zero(rings, 2 * L - 1);
        Eigen::VectorXd seg_re(L), seg_im(L);
        for (int m = 0; m < L; ++m) {
            const auto& pm = table_.per_order[m];
            gather(coeffs, m, seg_re, seg_im);
            f_re.col(L - 1 + m) = pm * seg_re.head(L - m);
            f_im.col(L - 1 + m) = pm * seg_im.head(L - m);
            if (m > 0) {
                const double sign = (m & 1) ? -1.0 : 1.0;
                gather(coeffs, -m, seg_re, seg_im);
                f_re.col(L - 1 - m) = sign * (pm * seg_re.head(L - m));
                f_im.col(L - 1 - m) = sign * (pm * seg_im.head(L - m));
            }
        }
        Eigen::MatrixXd v_re = f_re * exp_re_ - f_im * exp_im_;
        Eigen::MatrixXd v_im = f_re * exp_im_ + f_im * exp_re_;
        return interleave(v_re, v_im);
    }

    /// Exact conjugate-transpose of inverse(): x_hat_{lm} = sum_j conj(Y_{lm}(j)) x_j.
    Eigen::VectorXcd adjoint_inverse(const Eigen::VectorXcd& values) const {
        check_value_size(values);
        const int L = L_;
        auto [x_re, x_im] = deinterleave(values);
        // conj(E) applied from the right: G = X conj(E)^T
        Eigen::MatrixXd g_re = x_re * exp_re_.transpose() + x_im * exp_im_.transpose();
        Eigen::MatrixXd g_im = x_im * exp_re_.transpose() - x_re * exp_im_.transpose();
        Eigen::VectorXcd coeffs(static_cast<long>(L) * L);
        for (int m = 0; m < L; ++m) {
            const auto& pm = table_.per_order[m];
            scatter(coeffs, m, pm.transpose() * g_re.col(L - 1 + m),
                    pm.transpose() * g_im.col(L - 1 + m), 1.0);
            if (m > 0) {
                const double sign = (m & 1) ? -1.0 : 1.0;
                scatter(coeffs, -m, pm.transpose() * g_re.col(L - 1 - m),
                        pm.transpose() * g_im.col(L - 1 - m), sign);
            }
        }
        return coeffs;
    }

    /// Analysis: node values to coefficients. Round-trips inverse() to
    /// near machine precision on both schemes.
    Eigen::VectorXcd forward(const Eigen::VectorXcd& values) const {
        check_value_size(values);
        if (grid_.scheme == SamplingScheme::DH) {
            Eigen::VectorXcd weighted = values;
            const int P = grid_.phi_count();
            for (int t = 0; t < grid_.ring_count(); ++t)
                weighted.segment(static_cast<long>(t) * P, P) *= weights_.node_weight(grid_, t);
            return adjoint_inverse(weighted);
        }
        const int L = L_;
        const int P = grid_.phi_count();
        auto [x_re, x_im] = deinterleave(values);
        const double scale = 2.0 * kPi / P;
        Eigen::MatrixXd f_re = scale * (x_re * exp_re_.transpose() + x_im * exp_im_.transpose());
        Eigen::MatrixXd f_im = scale * (x_im * exp_re_.transpose() - x_re * exp_im_.transpose());
        Eigen::VectorXcd coeffs(static_cast<long>(L) * L);
        for (int m = 0; m < L; ++m) {
            const auto& solver = mw_solvers_[m];
            scatter(coeffs, m, solver.solve(f_re.col(L - 1 + m)),
                    solver.solve(f_im.col(L - 1 + m)), 1.0);
            if (m > 0) {
                const double sign = (m & 1) ? -1.0 : 1.0;
                scatter(coeffs, -m, solver.solve(f_re.col(L - 1 - m)),
                        solver.solve(f_im.col(L - 1 - m)), sign);
            }
        }
        if (!coeffs.allFinite()) throw std::runtime_error("forward: analysis solve failed");
        return coeffs;
    }

private:
    void check_coeff_size(const Eigen::VectorXcd& c) const {
        if (c.size() != static_cast<long>(L_) * L_)
            throw std::invalid_argument("ShtPlan: coefficient dimension must be L^2");
    }
    void check_value_size(const Eigen::VectorXcd& v) const {
        if (v.size() != grid_.node_count())
            throw std::invalid_argument("ShtPlan: value dimension must match grid");
    }

    void gather(const Eigen::VectorXcd& coeffs, int m, Eigen::VectorXd& re,
                Eigen::VectorXd& im) const {
        const int am = m < 0 ? -m : m;
        for (int l = am; l < L_; ++l) {
            const auto c = coeffs(HarmonicVector::index(l, m));
            re(l - am) = c.real();
            im(l - am) = c.imag();
        }
    }
    void scatter(Eigen::VectorXcd& coeffs, int m, const Eigen::VectorXd& re,
                 const Eigen::VectorXd& im, double sign) const {
        const int am = m < 0 ? -m : m;
        for (int l = am; l < L_; ++l)
            coeffs(HarmonicVector::index(l, m)) = sign * std::complex<double>{re(l - am), im(l - am)};
    }

    Eigen::VectorXcd interleave(const Eigen::MatrixXd& re, const Eigen::MatrixXd& im) const {
        const int P = grid_.phi_count();
        Eigen::VectorXcd out(grid_.node_count());
        for (int t = 0; t < grid_.ring_count(); ++t)
            for (int p = 0; p < P; ++p) out(grid_.node_index(t, p)) = {re(t, p), im(t, p)};
        return out;
    }
    std::pair<Eigen::MatrixXd, Eigen::MatrixXd> deinterleave(const Eigen::VectorXcd& v) const {
        const int P = grid_.phi_count();
        Eigen::MatrixXd re(grid_.ring_count(), P), im(grid_.ring_count(), P);
        for (int t = 0; t < grid_.ring_count(); ++t)
            for (int p = 0; p < P; ++p) {
                const auto c = v(grid_.node_index(t, p));
                re(t, p) = c.real();
                im(t, p) = c.imag();
            }
        return {std::move(re), std::move(im)};
    }

    SphereGrid grid_;
    int L_;
    LegendreTable table_;
    Eigen::MatrixXd exp_re_, exp_im_;  // (2L-1) x P, includes 1/sqrt(2 pi)
    QuadratureWeights weights_;        // DH analysis quadrature
    std::vector<Eigen::ColPivHouseholderQR<Eigen::MatrixXd>> mw_solvers_;
};

/// The operator Psi applied to a coefficient vector.
inline SphericalSignal inverse_sht(const HarmonicVector& xhat, const SphereGrid& grid) {
    if (xhat.L != grid.L)
        throw std::invalid_argument("inverse_sht: band-limit mismatch between coefficients and grid");
    ShtPlan plan(grid);
    return {grid, plan.inverse(xhat.coeffs)};
}

/// Recover coefficients from samples of a band-limited signal.
inline HarmonicVector forward_sht(const SphericalSignal& signal) {
    ShtPlan plan(signal.grid);
    return {signal.grid.L, plan.forward(signal.values)};
}

/// The operator Psi-dagger (no quadrature weights).
inline HarmonicVector adjoint_inverse_sht(const SphericalSignal& signal) {
    ShtPlan plan(signal.grid);
    return {signal.grid.L, plan.adjoint_inverse(signal.values)};
}

}  // namespace sphtv
