#pragma once

// Orthonormalized associated Legendre functions Pbar_{lm}, normalized so
// that the integral of Pbar_{lm}^2 over [-1, 1] is 1 and the Condon-Shortley
// phase is included. The spherical harmonics then split as
//   Y_{lm}(theta, phi) = Pbar_{l|m|}(cos theta) * s_m * e^{i m phi} / sqrt(2 pi)
// with s_m = (-1)^m for m < 0 and 1 otherwise, which makes Y_{00} = 1/sqrt(4 pi)
// and the basis orthonormal.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "sphtv/grid.hpp"

namespace sphtv {

/// Precomputed Pbar_{lm}(cos theta_t) for every ring of a grid, packed per
/// order m as a rings x (L - m) matrix (column l - m).
struct LegendreTable {
    int L = 0;
    int rings = 0;
    std::vector<Eigen::MatrixXd> per_order;

    /// Pbar_{lm}(cos theta_t) for m >= 0.
    double value(int t, int l, int m) const { return per_order[m](t, l - m); }

    /// Includes the (-1)^m factor that extends the table to negative orders.
    double value_signed(int t, int l, int m) const {
        const int am = m < 0 ? -m : m;
        const double v = per_order[am](t, l - am);
        return (m < 0 && (am & 1)) ? -v : v;
    }
};

/// Build the table with the ascending three-term recurrence
///   Pbar_{mm}   = -sqrt((2m+1)/(2m)) sqrt(1-x^2) Pbar_{m-1,m-1}
///   Pbar_{m+1,m} = sqrt(2m+3) x Pbar_{mm}
///   Pbar_{lm}   = a_{lm} (x Pbar_{l-1,m} - b_{lm} Pbar_{l-2,m})
/// which is stable in double precision well past L = 1024.
inline LegendreTable legendre_table(const SphereGrid& grid) {
    LegendreTable tab;
    tab.L = grid.L;
    tab.rings = grid.ring_count();
    const int L = grid.L;
    tab.per_order.resize(L);
    for (int m = 0; m < L; ++m) tab.per_order[m].resize(tab.rings, L - m);

    for (int t = 0; t < tab.rings; ++t) {
        const double x = std::cos(grid.thetas[t]);
        const double sx = std::sin(grid.thetas[t]);  // >= 0 on (0, pi]
        double pmm = std::sqrt(0.5);
        for (int m = 0; m < L; ++m) {
            if (m > 0) pmm *= -std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sx;
            tab.per_order[m](t, 0) = pmm;
            if (m + 1 < L) {
                double prev = pmm;
                double cur = std::sqrt(2.0 * m + 3.0) * x * pmm;
                tab.per_order[m](t, 1) = cur;
                for (int l = m + 2; l < L; ++l) {
                    const double a =
                        std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
                    const double b = std::sqrt(
                        ((static_cast<double>(l) - 1) * (l - 1) - static_cast<double>(m) * m) /
                        (4.0 * (static_cast<double>(l) - 1) * (l - 1) - 1.0));
                    const double next = a * (x * cur - b * prev);
                    tab.per_order[m](t, l - m) = next;
                    prev = cur;
                    cur = next;
                }
            }
        }
    }
    return tab;
}

}  // namespace sphtv
