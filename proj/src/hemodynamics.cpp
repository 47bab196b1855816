#include "cmv/hemodynamics.hpp"

#include "cmv/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cmv {

double wall_shear(double q, double a, double mu) {
    if (!(a > 0.0)) throw GeometryError("wall_shear needs a positive radius");
    return 4.0 * mu * q / (std::numbers::pi * a * a * a);
}

std::vector<double> pressure_field(const std::vector<double>& radii, const std::vector<double>& lengths, double q,
                                   double mu, double r_outlet) {
    if (radii.size() != lengths.size()) throw InvalidArgument("pressure_field: radii and lengths differ in size");
    std::vector<double> p(radii.size());
    double downstream = r_outlet * q;
    for (std::size_t k = radii.size(); k-- > 0;) {
        const double a = radii[k];
        if (!(a > 0.0)) throw GeometryError("pressure_field needs positive radii");
        const double drop = 8.0 * mu * lengths[k] * q / (std::numbers::pi * a * a * a * a);
        p[k] = downstream + 0.5 * drop;
        downstream += drop;
    }
    return p;
}

std::vector<double> smooth_axial(const std::vector<double>& values, const std::vector<double>& z, double window) {
    if (window < 0.0) throw InvalidArgument("smoothing window must be >= 0");
    if (values.size() != z.size()) throw InvalidArgument("smooth_axial: values and positions differ in size");
    if (window == 0.0) return values;
    const std::size_t n = values.size();
    // Symmetric normalized weights: each pair (i, j) uses the same kernel value
    // divided by the larger of the two row sums, with the remainder kept on the
    // diagonal, so the weight matrix is doubly stochastic and the mean is kept.
    std::vector<double> row(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) row[i] += std::max(0.0, 1.0 - std::abs(z[i] - z[j]) / window);
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = 1.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double k = std::max(0.0, 1.0 - std::abs(z[i] - z[j]) / window);
            if (k == 0.0) continue;
            const double wij = k / std::max(row[i], row[j]);
            out[i] += wij * values[j];
            diag -= wij;
        }
        out[i] += diag * values[i];
    }
    return out;
}

HemodynamicField evaluate_hemodynamics(const std::vector<double>& radii, const std::vector<double>& lengths,
                                       const std::vector<double>& z, double q, double mu, double r_outlet,
                                       double window) {
    HemodynamicField f;
    f.q = q;
    f.mu = mu;
    f.r_outlet = r_outlet;
    f.pressure = pressure_field(radii, lengths, q, mu, r_outlet);
    std::vector<double> wss(radii.size());
    for (std::size_t k = 0; k < radii.size(); ++k) wss[k] = wall_shear(q, radii[k], mu);
    f.wss = smooth_axial(wss, z, window);
    return f;
}

} // namespace cmv
