#pragma once

// Signal containers: harmonic coefficient vectors and sampled signals on a
// grid, plus the text coefficient-file format.

#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

#include "sphtv/grid.hpp"
#include "sphtv/rng.hpp"

namespace sphtv {

/// Complex spherical-harmonic coefficients x_hat_{lm} for 0 <= l < L,
/// -l <= m <= l, flat-indexed by l^2 + l + m; dimension L^2.
struct HarmonicVector {
    int L = 0;
    Eigen::VectorXcd coeffs;

    HarmonicVector() = default;
    explicit HarmonicVector(BandLimit band_limit)
        : L(band_limit.L), coeffs(Eigen::VectorXcd::Zero(band_limit.dimension())) {}
    HarmonicVector(int band_limit, Eigen::VectorXcd c) : L(band_limit), coeffs(std::move(c)) {
        if (coeffs.size() != static_cast<long>(L) * L)
            throw std::invalid_argument("HarmonicVector: dimension must be L^2");
    }

    static long index(int l, int m) { return static_cast<long>(l) * l + l + m; }

    std::complex<double>& at(int l, int m) { return coeffs(index(l, m)); }
    std::complex<double> at(int l, int m) const { return coeffs(index(l, m)); }

    /// Max deviation from the reality condition x_{l,-m} = (-1)^m conj(x_{l,m}).
    double reality_defect() const {
        double worst = 0.0;
        for (int l = 0; l < L; ++l) {
            worst = std::max(worst, std::abs(at(l, 0).imag()));
            for (int m = 1; m <= l; ++m) {
                const double sign = (m & 1) ? -1.0 : 1.0;
                worst = std::max(worst,
                                 std::abs(at(l, -m) - sign * std::conj(at(l, m))));
            }
        }
        return worst;
    }

    bool satisfies_reality(double tol = 1e-12) const { return reality_defect() <= tol; }

    /// Project onto the reality-conditioned subspace (exact symmetrization).
    void symmetrize_real() {
        for (int l = 0; l < L; ++l) {
            at(l, 0) = at(l, 0).real();
            for (int m = 1; m <= l; ++m) {
                const double sign = (m & 1) ? -1.0 : 1.0;
                const std::complex<double> avg =
                    0.5 * (at(l, m) + sign * std::conj(at(l, -m)));
                at(l, m) = avg;
                at(l, -m) = sign * std::conj(avg);
            }
        }
    }
};

/// Random reality-conditioned coefficients with unit-variance real degrees of
/// freedom; handy for round-trip and adjoint tests and the CLI diagnostics.
inline HarmonicVector random_real_harmonic(BandLimit L, RngStream& rng) {
    HarmonicVector h(L);
    for (int l = 0; l < L.L; ++l) {
        h.at(l, 0) = rng.next_gaussian();
        for (int m = 1; m <= l; ++m) {
            const double a = rng.next_gaussian() / std::sqrt(2.0);
            const double b = rng.next_gaussian() / std::sqrt(2.0);
            const double sign = (m & 1) ? -1.0 : 1.0;
            h.at(l, m) = {a, b};
            h.at(l, -m) = sign * std::complex<double>{a, -b};
        }
    }
    return h;
}

/// Sample values of a function at the nodes of one grid, row-major,
/// theta outer. Values are stored complex; real signals carry zero
/// imaginary parts.
struct SphericalSignal {
    SphereGrid grid;
    Eigen::VectorXcd values;

    SphericalSignal() = default;
    SphericalSignal(SphereGrid g, Eigen::VectorXcd v) : grid(std::move(g)), values(std::move(v)) {
        if (values.size() != grid.node_count())
            throw std::invalid_argument("SphericalSignal: value count does not match grid");
    }

    double max_imag() const { return values.size() ? values.imag().cwiseAbs().maxCoeff() : 0.0; }

    /// Real parts, for consumers that require a real signal.
    Eigen::VectorXd real_values() const { return values.real(); }
};

/// Coefficient file format: first line "L <value>", then one line per
/// coefficient "l m re im" in flat-index order, 17 significant digits.
inline void save_coefficients(const std::string& path, const HarmonicVector& h) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "L " << h.L << "\n";
    char buf[128];
    for (int l = 0; l < h.L; ++l)
        for (int m = -l; m <= l; ++m) {
            const auto c = h.at(l, m);
            std::snprintf(buf, sizeof(buf), "%d %d %.17g %.17g\n", l, m, c.real(), c.imag());
            out << buf;
        }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline HarmonicVector load_coefficients(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::string tag;
    int L = 0;
    if (!(in >> tag >> L) || tag != "L" || L < 1)
        throw std::runtime_error("bad coefficient header in " + path);
    HarmonicVector h{BandLimit(L)};
    for (long i = 0; i < h.coeffs.size(); ++i) {
        int l, m;
        double re, im;
        if (!(in >> l >> m >> re >> im))
            throw std::runtime_error("truncated coefficient file: " + path);
        if (HarmonicVector::index(l, m) != i)
            throw std::runtime_error("coefficient file out of order: " + path);
        h.coeffs(i) = {re, im};
    }
    return h;
}

}  // namespace sphtv
