""" Truncated power series in the conjugate pair (z, z*).

A series is a sparse table of complex coefficients A[m, k] of z^m (z*)^k with
m + k bounded by max_degree. Arithmetic goes through dense numpy arrays
indexed [m, k]; products are 2-D convolutions followed by truncation.
"""
import logging
import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping

import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.signal import convolve2d

from gkit.errors import ConfigurationError, SchemaError

Monomial = tuple[int, int]

DROPOUT_TOL = 1e-15
MAX_LIE_TERMS = 200


def degree(mon: Monomial) -> int:
    return mon[0] + mon[1]


def _mask(max_degree: int) -> np.ndarray:
    idx = np.arange(max_degree + 1)
    return np.add.outer(idx, idx) <= max_degree


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """ Immutable truncated series; absent monomials read as exactly zero. """

    coeffs: Mapping[Monomial, complex]
    max_degree: int

    def __post_init__(self):
        if int(self.max_degree) < 1:
            raise ConfigurationError(
                f'max_degree must be positive, got {self.max_degree}')
        object.__setattr__(self, 'max_degree', int(self.max_degree))

        clean = {}
        for (m, k), c in dict(self.coeffs).items():
            m, k = int(m), int(k)
            if m < 0 or k < 0:
                raise ConfigurationError(f'Negative exponent in ({m}, {k})')
            c = complex(c)
            if m + k <= self.max_degree and abs(c) >= DROPOUT_TOL:
                clean[(m, k)] = c
        object.__setattr__(self, 'coeffs', MappingProxyType(clean))

    # -------------------------------------------------------------------------
    # Factory
    # -------------------------------------------------------------------------
    @staticmethod
    def zero(max_degree: int) -> "TruncatedSeries":
        return TruncatedSeries({}, max_degree)

    @staticmethod
    def identity(max_degree: int) -> "TruncatedSeries":
        return TruncatedSeries({(1, 0): 1.0}, max_degree)

    @staticmethod
    def monomial(m: int, k: int, c: complex,
                 max_degree: int) -> "TruncatedSeries":
        return TruncatedSeries({(m, k): c}, max_degree)

    @staticmethod
    def from_dense(arr: np.ndarray, max_degree: int) -> "TruncatedSeries":
        rows, cols = np.nonzero(arr)
        return TruncatedSeries(
            {(int(m), int(k)): arr[m, k] for m, k in zip(rows, cols)},
            max_degree)

    # -------------------------------------------------------------------------
    # Access
    # -------------------------------------------------------------------------
    def __getitem__(self, mon: Monomial) -> complex:
        return self.coeffs.get((int(mon[0]), int(mon[1])), 0j)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return (self.max_degree == other.max_degree
                and dict(self.coeffs) == dict(other.coeffs))

    def __repr__(self) -> str:
        terms = ', '.join(f'{m},{k}: {c:.6g}' for (m, k), c in self.terms())
        return f'TruncatedSeries({{{terms}}}, max_degree={self.max_degree})'

    @property
    def linear_part(self) -> complex:
        return self[(1, 0)]

    def support(self) -> list[Monomial]:
        """ Stored monomials sorted by (degree, m). """
        return sorted(self.coeffs, key=lambda mk: (mk[0] + mk[1], mk[0]))

    def terms(self) -> list[tuple[Monomial, complex]]:
        return [(mon, self.coeffs[mon]) for mon in self.support()]

    def is_zero(self) -> bool:
        return not self.coeffs

    def to_dense(self, size: int | None = None) -> np.ndarray:
        n = self.max_degree + 1 if size is None else size
        arr = np.zeros((n, n), dtype=complex)
        for (m, k), c in self.coeffs.items():
            if m < n and k < n:
                arr[m, k] = c
        return arr

    # -------------------------------------------------------------------------
    # Arithmetic
    # -------------------------------------------------------------------------
    def _check_degree(self, other: "TruncatedSeries") -> None:
        if self.max_degree != other.max_degree:
            raise ConfigurationError(
                f'Mismatched max_degree: {self.max_degree} vs {other.max_degree}')

    def __add__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        self._check_degree(other)
        out = dict(self.coeffs)
        for mon, c in other.coeffs.items():
            out[mon] = out.get(mon, 0j) + c
        return TruncatedSeries(out, self.max_degree)

    def __neg__(self) -> "TruncatedSeries":
        return self.scale(-1.0)

    def __sub__(self, other: "TruncatedSeries") -> "TruncatedSeries":
        return self + (-other)

    def scale(self, c: complex) -> "TruncatedSeries":
        return TruncatedSeries(
            {mon: c * v for mon, v in self.coeffs.items()}, self.max_degree)

    def __mul__(self, other):
        if isinstance(other, TruncatedSeries):
            self._check_degree(other)
            return TruncatedSeries.from_dense(
                _dense_product(self.to_dense(), other.to_dense(),
                               self.max_degree), self.max_degree)
        return self.scale(other)

    __rmul__ = __mul__

    def nonlinear(self) -> "TruncatedSeries":
        return TruncatedSeries(
            {mon: c for mon, c in self.coeffs.items() if degree(mon) >= 2},
            self.max_degree)

    def with_max_degree(self, n: int) -> "TruncatedSeries":
        return TruncatedSeries(dict(self.coeffs), n)

    def without(self, mons: Iterable[Monomial]) -> "TruncatedSeries":
        drop = set(mons)
        return TruncatedSeries(
            {mon: c for mon, c in self.coeffs.items() if mon not in drop},
            self.max_degree)

    def chop(self, tol: float, up_to_degree: int | None = None) -> "TruncatedSeries":
        """ Drop coefficients below tol, optionally only up to a degree. """
        limit = self.max_degree if up_to_degree is None else up_to_degree
        return TruncatedSeries(
            {mon: c for mon, c in self.coeffs.items()
             if abs(c) >= tol or degree(mon) > limit},
            self.max_degree)

    def derivative_z(self) -> "TruncatedSeries":
        return TruncatedSeries(
            {(m - 1, k): m * c for (m, k), c in self.coeffs.items() if m > 0},
            self.max_degree)

    def derivative_zstar(self) -> "TruncatedSeries":
        return TruncatedSeries(
            {(m, k - 1): k * c for (m, k), c in self.coeffs.items() if k > 0},
            self.max_degree)

    # -------------------------------------------------------------------------
    # Evaluation
    # -------------------------------------------------------------------------
    def evaluate(self, z):
        """ Nested Horner evaluation, vectorised over z. """
        z = np.asarray(z, dtype=complex)
        if not self.coeffs:
            return np.zeros_like(z)
        return npoly.polyval2d(z, np.conj(z), self.to_dense())

    __call__ = evaluate

    def evaluate_terms(self, z):
        """ Direct sum over the coefficient table. """
        z = np.asarray(z, dtype=complex)
        zc = np.conj(z)
        out = np.zeros_like(z)
        for (m, k), c in self.coeffs.items():
            out = out + c * z ** m * zc ** k
        return out

    # -------------------------------------------------------------------------
    # Serialization
    # -------------------------------------------------------------------------
    def to_json(self) -> dict:
        return {
            'max_degree': self.max_degree,
            'terms': [
                {'m': m, 'k': k, 're': c.real, 'im': c.imag}
                for (m, k), c in self.terms()
            ],
        }

    @staticmethod
    def from_json(d: dict, pointer: str = '') -> "TruncatedSeries":
        unknown = set(d) - {'max_degree', 'terms'}
        if unknown:
            key = sorted(unknown)[0]
            raise SchemaError(f'Unknown field {key!r}', f'{pointer}/{key}')
        if 'max_degree' not in d:
            raise SchemaError('Missing field', f'{pointer}/max_degree')
        coeffs = {}
        for i, term in enumerate(d.get('terms', [])):
            here = f'{pointer}/terms/{i}'
            extra = set(term) - {'m', 'k', 're', 'im'}
            if extra:
                key = sorted(extra)[0]
                raise SchemaError(f'Unknown field {key!r}', f'{here}/{key}')
            try:
                mon = (int(term['m']), int(term['k']))
                c = complex(float(term.get('re', 0.0)),
                            float(term.get('im', 0.0)))
            except (KeyError, TypeError, ValueError) as e:
                raise SchemaError(f'Bad term: {e}', here)
            coeffs[mon] = coeffs.get(mon, 0j) + c
        return TruncatedSeries(coeffs, int(d['max_degree']))


def _dense_product(a: np.ndarray, b: np.ndarray, max_degree: int) -> np.ndarray:
    n = max_degree + 1
    out = convolve2d(a, b)[:n, :n]
    out[~_mask(max_degree)] = 0
    return out


def _powers(base: np.ndarray, count: int, max_degree: int) -> list[np.ndarray]:
    n = max_degree + 1
    one = np.zeros((n, n), dtype=complex)
    one[0, 0] = 1.0
    out = [one]
    for _ in range(count):
        out.append(_dense_product(out[-1], base, max_degree))
    return out


# --- Operations ---

def compose(outer: TruncatedSeries, inner_z: TruncatedSeries,
            inner_zstar: TruncatedSeries) -> TruncatedSeries:
    """ outer(inner_z, inner_zstar) truncated at the shared max_degree. """
    n = outer.max_degree
    for s in (inner_z, inner_zstar):
        outer._check_degree(s)
        if abs(s[(0, 0)]) > 0:
            raise ConfigurationError(
                'Inner series of a composition must have zero constant term')
    if outer.is_zero():
        return TruncatedSeries.zero(n)

    c = outer.to_dense()
    m_max = max(m for m, _ in outer.coeffs)
    k_max = max(k for _, k in outer.coeffs)
    pz = _powers(inner_z.to_dense(), m_max, n)
    pzs = _powers(inner_zstar.to_dense(), k_max, n)

    acc = np.zeros((n + 1, n + 1), dtype=complex)
    for m in range(m_max + 1):
        row = np.zeros_like(acc)
        for k in range(min(k_max, n - m) + 1):
            if c[m, k] != 0:
                row += c[m, k] * pzs[k]
        if np.any(row):
            acc += _dense_product(pz[m], row, n)
    return TruncatedSeries.from_dense(acc, n)


def substitute(outer: TruncatedSeries, inner: TruncatedSeries) -> TruncatedSeries:
    """ outer(inner, conj(inner)), the composition of maps of the plane. """
    return compose(outer, inner, conjugate_series(inner))


def conjugate_series(s: TruncatedSeries) -> TruncatedSeries:
    return TruncatedSeries(
        {(k, m): c.conjugate() for (m, k), c in s.coeffs.items()},
        s.max_degree)


def is_centrally_symmetric(s: TruncatedSeries) -> bool:
    return all(degree(mon) % 2 == 1 for mon in s.coeffs)


def invert_near_identity(psi: TruncatedSeries) -> TruncatedSeries:
    """ Inverse of a change z = w + O(|w|^2), up to truncation.

    Fixed-point iteration phi <- w - (psi(phi) - phi); each pass fixes at
    least one more degree.
    """
    n = psi.max_degree
    if abs(psi.linear_part - 1) > 1e-12 or psi[(0, 1)] != 0 or psi[(0, 0)] != 0:
        raise ConfigurationError('Change of variables is not near-identity')
    w = TruncatedSeries.identity(n)
    h = psi - w
    phi = w
    for _ in range(n):
        nxt = w - substitute(h, phi)
        if np.max(np.abs(nxt.to_dense() - phi.to_dense())) == 0:
            break
        phi = nxt
    return phi


def lie_derivative(field: TruncatedSeries, h: TruncatedSeries) -> TruncatedSeries:
    """ L_F h = F dh/dz + F* dh/dz* """
    return (field * h.derivative_z()
            + conjugate_series(field) * h.derivative_zstar())


def flow_exp(field: TruncatedSeries, t: float = 1.0) -> TruncatedSeries:
    """ Time-t map of the vector field as a truncated Lie series exp(t L_F) z. """
    n = field.max_degree
    result = TruncatedSeries.identity(n)
    term = result
    for j in range(1, MAX_LIE_TERMS):
        term = lie_derivative(field, term).scale(t / j)
        if term.is_zero():
            break
        result = result + term
    else:
        logging.warning(f'Lie series not converged after {MAX_LIE_TERMS} terms')
    return result


def flow_log(tmap: TruncatedSeries, max_iter: int | None = None) -> TruncatedSeries:
    """ Vector field whose time-1 map is the near-identity map tmap. """
    n = tmap.max_degree
    if abs(tmap.linear_part - 1) > 1e-12 or abs(tmap[(0, 1)]) > 1e-12:
        raise ConfigurationError('Vector field logarithm needs a near-identity map')
    field = tmap.nonlinear()
    for _ in range(max_iter or n):
        defect = (tmap - flow_exp(field)).nonlinear()
        if np.max(np.abs(defect.to_dense()), initial=0.0) < 1e-15:
            break
        field = field + defect
    return field


def fitted_order(series: TruncatedSeries, radii, n_points: int = 20,
                 rng: np.random.Generator | None = None) -> float:
    """ Log-log slope of max |series| over circles of the given radii.

    Returns inf when the series vanishes on every circle.
    """
    radii = np.asarray(radii, dtype=float)
    if rng is None:
        angles = 2 * np.pi * np.arange(n_points) / n_points
    else:
        angles = rng.uniform(0.0, 2 * np.pi, n_points)
    pts = np.exp(1j * angles)
    peaks = np.array([np.max(np.abs(series.evaluate(r * pts))) for r in radii])
    good = peaks > 0
    if good.sum() < 2:
        return math.inf
    slope, _ = np.polyfit(np.log(radii[good]), np.log(peaks[good]), 1)
    return float(slope)
