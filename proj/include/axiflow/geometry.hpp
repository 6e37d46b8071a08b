#pragma once

#include "axiflow/mesh.hpp"

#include <vector>

namespace axiflow {

struct EnergyBreakdown {
    double area = 0.0;     // 2 pi (r, |X_rho|)
    double cylinder = 0.0; // contact terms on r = const walls
    double plane = 0.0;    // contact terms on z = const walls
    double total() const { return area + cylinder + plane; }
};

EnergyBreakdown discrete_energy(const DiscreteCurve& curve);

/// pi * sum of exact element integrals of r^2 dz. Positive for counter-clockwise
/// closed curves and for open curves running from the lower to the upper pole.
/// Throws OpenSurface unless the curve is closed or both endpoints lie on the axis.
double enclosed_volume(const DiscreteCurve& curve);

struct CurvatureDiagnostics {
    std::vector<Vec2> vector;        // lumped curvature vector
    std::vector<double> in_plane;    // kappa
    std::vector<double> ratio;       // (omega . e1) / r, replaced by -kappa on the axis
    std::vector<double> azimuthal;   // -ratio
    std::vector<double> mean;        // kappa - ratio
    std::vector<double> gauss;       // -kappa * ratio
};

CurvatureDiagnostics curvature_diagnostics(const DiscreteCurve& curve);

/// Residual of the endpoint angle conditions; zero entries for Fixed ends
/// and for closed curves.
std::vector<double> contact_angle_residual(const DiscreteCurve& curve);
double max_contact_residual(const DiscreteCurve& curve);

double min_radius(const DiscreteCurve& curve); // over nodes off the axis
/// Largest length ratio of consecutive elements whose tangents differ by more
/// than angle_tol radians (1 if there is no such pair).
double adjacent_length_ratio(const DiscreteCurve& curve, double angle_tol = 1e-3);
double min_element_length(const DiscreteCurve& curve);

struct DiagnosticsRow {
    double time = 0.0;
    double energy_total = 0.0;
    double energy_area = 0.0;
    double volume = 0.0; // NaN for surfaces with boundary
    double ratio = 0.0;
    double min_r = 0.0;
    double min_element_length = 0.0;
    double max_contact_residual = 0.0;
};

DiagnosticsRow diagnostics(const DiscreteCurve& curve, double time);

} // namespace axiflow
