#pragma once

#include "lplab/dynamics.hpp"
#include "lplab/grid.hpp"

namespace lplab {

// -depth * sech^2(x - center)
RealField sech_well(const Grid& g, double depth, double center = 0.0);

// amplitude * x * exp(-x^2)
RealField odd_gaussian_velocity(const Grid& g, double amplitude = 0.2);

// (1 + x^2)^{-2}, normalized to unit L2 mass
RealField lorentzian_bump(const Grid& g);

// exp(-x^2/2) as a complex field (free-dispersion baseline datum)
Field gaussian_packet(const Grid& g);

// Standard polaron initial data: phi0 = -depth*sech^2, phi_dot0 odd gaussian,
// psi0 the mass-normalized ground state of phi0.
PolaronState standard_polaron_state(const Grid& g, double depth = 1.5,
                                    double phi_dot_amplitude = 0.2, double mass = 1.0);

}  // namespace lplab
