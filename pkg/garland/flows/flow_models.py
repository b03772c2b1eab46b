""" Truncated flow normal forms near a p:q resonance.

All evaluators accept numpy arrays and broadcast. Polar quantities use
r = |z|^2 and the rotated angle psi - omega in the 2q-fold terms, so a
general phase theta of the leading non-identical coefficient is handled
without a separate rotation step.
"""
import logging
import math

import numpy as np
from numpy.polynomial import Polynomial
from scipy.integrate import solve_ivp

from gkit.errors import ConfigurationError, DomainError
from gkit.utils import DEFAULTS
from garland.flows.flow_core import (FlowModel, FlowParams, PolarState,
                                     Trajectory)
from garland.series.series_core import TruncatedSeries

ODE_TOL_FLOOR = 1e-13


def _phi(params: FlowParams) -> Polynomial:
    return Polynomial([0.0, *params.phi_coeffs])


def _as_polar_arrays(s) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(s, PolarState):
        return np.asarray(s.r, dtype=float), np.asarray(s.psi, dtype=float)
    r, psi = s
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise DomainError('r must be nonnegative')
    return r, np.asarray(psi, dtype=float)


# --- Cartesian form ---

def vector_field_cartesian(params: FlowParams, z):
    z = np.asarray(z, dtype=complex)
    q = params.q
    zc = np.conj(z)
    r = (z * zc).real
    out = 1j * (params.mu1 + _phi(params)(r)) * z
    out = out + params.alpha * np.exp(1j * params.theta) * zc ** (2 * q - 1)
    if params.mu2:
        out = out + 1j * params.mu2 * zc ** (q - 1)
        if params.A:
            out = out + 1j * params.A * params.mu2 * z ** (q + 1)
        if params.B:
            out = out + 1j * params.B * params.mu2 * z * zc ** q
    return out


def divergence(params: FlowParams, z):
    """ Trace of the linearisation; only the A, B terms contribute. """
    z = np.asarray(z, dtype=complex)
    q = params.q
    weight = (q + 1) * params.A - params.B
    return -2.0 * params.mu2 * weight * (z ** q).imag


def as_series(params: FlowParams, max_degree: int | None = None,
              include_linear: bool = True) -> TruncatedSeries:
    """ The truncated model as a series in (z, z*). """
    q = params.q
    n = max_degree or 2 * q + 1
    coeffs = {(0, 2 * q - 1): params.alpha * np.exp(1j * params.theta)}
    if include_linear:
        coeffs[(1, 0)] = 1j * params.mu1
    for j, lj in enumerate(params.phi_coeffs, start=1):
        coeffs[(j + 1, j)] = coeffs.get((j + 1, j), 0j) + 1j * lj
    if params.mu2:
        coeffs[(0, q - 1)] = 1j * params.mu2
        coeffs[(q + 1, 0)] = 1j * params.A * params.mu2
        coeffs[(1, q)] = 1j * params.B * params.mu2
    return TruncatedSeries(coeffs, n)


# --- Polar form ---

def polar_field(params: FlowParams, r, psi) -> tuple[np.ndarray, np.ndarray]:
    """ (dr, dpsi) at r = |z|^2, angle psi; vectorised. """
    r, psi = _as_polar_arrays((r, psi))
    q, a, mu2 = params.q, params.alpha, params.mu2
    h = q / 2
    rot = 2 * q * (psi - params.omega)
    s2, c2 = np.sin(rot), np.cos(rot)
    s1, c1 = np.sin(q * psi), np.cos(q * psi)

    dr = 2 * a * r ** q * s2
    dpsi = params.mu1 + _phi(params)(r) + a * r ** (q - 1) * c2
    if mu2:
        dr = dr + 2 * mu2 * r ** h * s1 \
            + 2 * mu2 * (params.B - params.A) * r ** (h + 1) * s1
        dpsi = dpsi + mu2 * r ** (h - 1) * c1 \
            + mu2 * (params.A + params.B) * r ** h * c1
    return dr, dpsi


def vector_field_polar(params: FlowParams, s: PolarState) -> tuple[float, float]:
    dr, dpsi = polar_field(params, s.r, s.psi)
    return float(dr), float(dpsi)


def polar_jacobian(params: FlowParams, r, psi) -> np.ndarray:
    """ Analytic d(dr, dpsi)/d(r, psi), shape (..., 2, 2). Needs r > 0. """
    r, psi = _as_polar_arrays((r, psi))
    q, a, mu2 = params.q, params.alpha, params.mu2
    h = q / 2
    rot = 2 * q * (psi - params.omega)
    s2, c2 = np.sin(rot), np.cos(rot)
    s1, c1 = np.sin(q * psi), np.cos(q * psi)

    drr = 2 * a * q * r ** (q - 1) * s2
    drp = 4 * a * q * r ** q * c2
    dpr = _phi(params).deriv()(r) + a * (q - 1) * r ** (q - 2) * c2
    dpp = -2 * q * a * r ** (q - 1) * s2
    if mu2:
        ba, ab = params.B - params.A, params.A + params.B
        drr = drr + mu2 * q * r ** (h - 1) * s1 \
            + 2 * mu2 * ba * (h + 1) * r ** h * s1
        drp = drp + 2 * mu2 * q * r ** h * c1 + 2 * mu2 * ba * q * r ** (h + 1) * c1
        dpr = dpr + mu2 * (h - 1) * r ** (h - 2) * c1 + mu2 * ab * h * r ** (h - 1) * c1
        dpp = dpp - q * mu2 * r ** (h - 1) * s1 - q * mu2 * ab * r ** h * s1
    drr, drp, dpr, dpp = np.broadcast_arrays(drr, drp, dpr, dpp)
    return np.stack([np.stack([drr, drp], axis=-1),
                     np.stack([dpr, dpp], axis=-1)], axis=-2)


def polar_jacobian_fd(params: FlowParams, r: float, psi: float,
                      rel_step: float = 1e-6) -> np.ndarray:
    """ Central finite-difference counterpart of polar_jacobian. """
    hr = rel_step * r
    hp = rel_step
    fr_p = np.array(polar_field(params, r + hr, psi))
    fr_m = np.array(polar_field(params, r - hr, psi))
    fp_p = np.array(polar_field(params, r, psi + hp))
    fp_m = np.array(polar_field(params, r, psi - hp))
    return np.column_stack([(fr_p - fr_m) / (2 * hr), (fp_p - fp_m) / (2 * hp)])


# --- Hamiltonian ---

def is_hamiltonian(params: FlowParams) -> bool:
    return params.conservative


def hamiltonian_rpsi(params: FlowParams, r, psi):
    if not is_hamiltonian(params):
        raise DomainError('non-Hamiltonian model: B != A(q+1)')
    r, psi = _as_polar_arrays((r, psi))
    q, a, mu2 = params.q, params.alpha, params.mu2
    h = q / 2
    H = params.mu1 * r + _phi(params).integ()(r) \
        + (a / q) * r ** q * np.cos(2 * q * (psi - params.omega))
    if mu2:
        H = H + (2 / q) * mu2 * r ** h * np.cos(q * psi) \
            + 2 * mu2 * (params.A + params.B) / (q + 2) * r ** (h + 1) * np.cos(q * psi)
    return H


def hamiltonian(params: FlowParams, s: PolarState) -> float:
    """ H with dr = -dH/dpsi and dpsi = dH/dr. """
    return float(hamiltonian_rpsi(params, s.r, s.psi))


def hamiltonian_z(params: FlowParams, z):
    z = np.asarray(z, dtype=complex)
    return hamiltonian_rpsi(params, np.abs(z) ** 2, np.angle(z))


# --- Rotation reduction ---

def rotate_to_reversible(theta: float, q: int) -> float:
    return (theta - math.pi / 2) / (2 * q)


def rotate_field(field: TruncatedSeries, omega: float) -> TruncatedSeries:
    """ Field in the coordinate w with z = w e^(i omega). """
    return TruncatedSeries(
        {(m, k): c * np.exp(1j * omega * (m - k - 1))
         for (m, k), c in field.coeffs.items()},
        field.max_degree)


def rotate_params(params: FlowParams) -> tuple[FlowParams, float]:
    """ Reversible model (theta = pi/2) equivalent to params, and omega. """
    if params.mu2:
        raise DomainError('Rotation reduction needs mu2 = 0')
    omega = rotate_to_reversible(params.theta, params.q)
    return FlowParams(params.model, params.q, params.mu1, 0.0,
                      params.phi_coeffs, params.alpha, math.pi / 2), omega


# --- Trajectories ---

def integrate(params: FlowParams, z0: complex, t_end: float,
              tol: float = DEFAULTS['ode_tol'],
              radius: float = DEFAULTS['validity_radius'],
              n_samples: int = 1001) -> Trajectory:
    """ Embedded 4(5) Runge-Kutta trajectory, stopped at the validity radius. """
    if tol < ODE_TOL_FLOOR:
        raise ConfigurationError(f'ODE tolerance {tol:g} below {ODE_TOL_FLOOR:g}')
    z0 = complex(z0)
    if abs(z0) >= radius:
        logging.warning(f'Initial condition {z0} outside validity radius {radius}')
        return Trajectory(np.array([0.0]), np.array([z0]), escaped=True,
                          notes=['initial condition outside validity radius'])
    if t_end == 0:
        return Trajectory(np.array([0.0]), np.array([z0]))

    def rhs(_, y):
        dz = vector_field_cartesian(params, complex(y[0], y[1]))
        return [dz.real, dz.imag]

    def escape(_, y):
        return math.hypot(y[0], y[1]) - radius
    escape.terminal = True
    escape.direction = 1

    t_eval = np.linspace(0.0, t_end, n_samples)
    sol = solve_ivp(rhs, (0.0, t_end), [z0.real, z0.imag], method='RK45',
                    rtol=tol, atol=tol, t_eval=t_eval, events=escape,
                    dense_output=True)
    if sol.status == -1:
        raise DomainError(f'Integration failed: {sol.message}')

    escaped = sol.status == 1
    t, z = sol.t, sol.y[0] + 1j * sol.y[1]
    notes = []
    if escaped:
        t_hit = float(sol.t_events[0][0])
        y_hit = sol.sol(t_hit)
        t = np.append(t, t_hit)
        z = np.append(z, y_hit[0] + 1j * y_hit[1])
        notes.append(f'escaped validity radius at t={t_hit:.6g}')
        logging.warning(f'Trajectory from {z0} escaped at t={t_hit:.6g}')
    return Trajectory(t, z, escaped=escaped, notes=notes)


def integrate_many(params: FlowParams, z0s, t_end: float,
                   tol: float = DEFAULTS['ode_tol'],
                   radius: float = DEFAULTS['validity_radius'],
                   n_samples: int = 1001) -> list[Trajectory]:
    return [integrate(params, z0, t_end, tol, radius, n_samples) for z0 in z0s]
