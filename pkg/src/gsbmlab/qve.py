"""Self-consistent resolvent equations for two-block variance profiles.

The limiting resolvent diagonal of a symmetric random matrix with entry
variances S_ij solves

    -1/m_i(z) = z + sum_j S_ij m_j(z),        Im m_i(z) >= 0 for Im z > 0.

For the two-block profile the ansatz m_1 = ... = m_{N1}, m_{N1+1} = ... = m_N
reduces this to the pair

    -1 = z m1 + alpha1 gamma m1^2 + (1-gamma) m1 mN
    -1 = z mN + gamma m1 mN + alpha2 (1-gamma) mN^2.

Eliminating mN (solve the first line, substitute, clear denominators) leaves
a quartic in m1 whose coefficients are polynomial in (z, alpha1, alpha2,
gamma); see docs/reduced_system_elimination.md for the derivation.  The
reduced solver finds all quartic roots via the companion matrix, selects the
unique pair with both imaginary parts nonnegative (the physical branch for
Im z > 0), and polishes with Newton steps on the 2x2 system.  On the real
axis outside the spectrum the branch is selected by continuity with a
solution slightly off the axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, QveConvergenceError, ValidationError
from .model import GsbmSpec

#: imaginary offset used to seed real-axis branch selection
_SEED_ETA = 1e-12
#: Im(m_avg) above this at the seed point means z sits inside the spectrum
_INSIDE_IM_THRESHOLD = 1e-6

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 10_000
DEFAULT_DAMPING = 0.5
DEFAULT_GRID_POINTS = 600
DEFAULT_ETA = 1e-4


@dataclass(frozen=True)
class QveSolution:
    """Block values of the self-consistent resolvent at one spectral point."""

    z: complex
    m1: complex
    mN: complex
    m_avg: complex
    residual: float


@dataclass(frozen=True)
class DensityCurve:
    """Smoothed spectral density rho(x) = Im(m_avg(x + i eta)) / pi."""

    grid: np.ndarray
    rho: np.ndarray
    eta: float

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=np.float64)
        rho = np.asarray(self.rho, dtype=np.float64)
        if grid.ndim != 1 or grid.shape != rho.shape:
            raise ValidationError("grid and rho must be 1-d arrays of equal length")
        if np.any(np.diff(grid) <= 0):
            raise ValidationError("grid must be strictly ascending")
        if np.any(rho < 0):
            raise ValidationError("density values must be nonnegative")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "rho", rho)

    def integral(self) -> float:
        return float(np.trapezoid(self.rho, self.grid))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            f.write("x,rho\n")
            for x, r in zip(self.grid, self.rho):
                f.write(f"{x:.17g},{r:.17g}\n")


def reduced_coefficients(alpha1: float, alpha2: float, gamma: float,
                         z: complex) -> np.ndarray:
    """Coefficients [c4, c3, c2, c1, c0] of the eliminated quartic in m1."""
    c4 = alpha1 * gamma * gamma * (alpha1 * alpha2 - 1.0)
    c3 = gamma * z * (2.0 * alpha1 * alpha2 - alpha1 - 1.0)
    c2 = (1.0 - 2.0 * gamma) + z * z * (alpha2 - 1.0) + 2.0 * alpha1 * alpha2 * gamma
    c1 = z * (2.0 * alpha2 - 1.0)
    c0 = alpha2 + 0.0 * z
    return np.array([c4, c3, c2, c1, c0], dtype=complex)


def _mn_from_m1(alpha1: float, gamma: float, z: complex, m1: complex) -> complex:
    return -(1.0 + z * m1 + alpha1 * gamma * m1 * m1) / ((1.0 - gamma) * m1)


def _system_residual(alpha1: float, alpha2: float, gamma: float, z: complex,
                     m1: complex, mn: complex) -> float:
    r1 = z * m1 + alpha1 * gamma * m1 * m1 + (1.0 - gamma) * m1 * mn + 1.0
    r2 = z * mn + gamma * m1 * mn + alpha2 * (1.0 - gamma) * mn * mn + 1.0
    return max(abs(r1), abs(r2))


def _newton_polish(alpha1: float, alpha2: float, gamma: float, z: complex,
                   m1: complex, mn: complex, steps: int = 4) -> tuple[complex, complex]:
    """A few Newton steps on the 2x2 system; keeps the best iterate."""
    best = (m1, mn, _system_residual(alpha1, alpha2, gamma, z, m1, mn))
    for _ in range(steps):
        f1 = z * m1 + alpha1 * gamma * m1 * m1 + (1.0 - gamma) * m1 * mn + 1.0
        f2 = z * mn + gamma * m1 * mn + alpha2 * (1.0 - gamma) * mn * mn + 1.0
        j11 = z + 2.0 * alpha1 * gamma * m1 + (1.0 - gamma) * mn
        j12 = (1.0 - gamma) * m1
        j21 = gamma * mn
        j22 = z + gamma * m1 + 2.0 * alpha2 * (1.0 - gamma) * mn
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        m1 = m1 - (f1 * j22 - f2 * j12) / det
        mn = mn - (f2 * j11 - f1 * j21) / det
        res = _system_residual(alpha1, alpha2, gamma, z, m1, mn)
        if res < best[2]:
            best = (m1, mn, res)
        if res < 1e-15 * max(1.0, abs(z) ** 2):
            break
    return best[0], best[1]


def _candidate_pairs(alpha1: float, alpha2: float, gamma: float,
                     z: complex) -> list[tuple[complex, complex, float]]:
    coeffs = reduced_coefficients(alpha1, alpha2, gamma, z)
    mags = np.abs(coeffs)
    keep = mags > 1e-14 * mags.max()
    first = int(np.argmax(keep))
    trimmed = coeffs[first:]
    if trimmed.size < 3:
        raise NumericalError("reduced system degenerated below a quadratic")
    roots = np.roots(trimmed)
    pairs = []
    for r in roots:
        if abs(r) < 1e-14:
            continue  # spurious root from clearing the 1/m1 denominator
        mn = _mn_from_m1(alpha1, gamma, z, r)
        res = _system_residual(alpha1, alpha2, gamma, z, r, mn)
        if res < 1e-6 * max(1.0, abs(z) ** 2):
            pairs.append((r, mn, res))
    if not pairs:
        raise NumericalError(f"no consistent solution pair at z={z}")
    return pairs


def _solve_upper(alpha1: float, alpha2: float, gamma: float, z: complex,
                 tol: float) -> tuple[complex, complex, float]:
    pairs = _candidate_pairs(alpha1, alpha2, gamma, z)
    m1, mn, _ = max(pairs, key=lambda p: min(p[0].imag, p[1].imag))
    m1, mn = _newton_polish(alpha1, alpha2, gamma, z, m1, mn)
    res = _system_residual(alpha1, alpha2, gamma, z, m1, mn)
    if res > tol:
        raise QveConvergenceError(f"reduced solve at z={z} above tolerance {tol}",
                                  residual=res)
    if min(m1.imag, mn.imag) < -1e-12:
        raise NumericalError(f"selected branch is not Herglotz at z={z}")
    return m1, mn, res


def _solve_real_outside(alpha1: float, alpha2: float, gamma: float, x: float,
                        tol: float) -> tuple[complex, complex, float]:
    seed_m1, seed_mn, _ = _solve_upper(alpha1, alpha2, gamma,
                                       complex(x, _SEED_ETA), tol=1e-6)
    m_avg_im = gamma * seed_m1.imag + (1.0 - gamma) * seed_mn.imag
    if m_avg_im > _INSIDE_IM_THRESHOLD:
        raise NumericalError(
            f"no real Herglotz continuation: z={x} lies inside the spectrum "
            f"(Im m_avg = {m_avg_im:.3e} at eta = {_SEED_ETA:g})")
    pairs = _candidate_pairs(alpha1, alpha2, gamma, complex(x, 0.0))
    real_pairs = [p for p in pairs
                  if abs(p[0].imag) < 1e-7 * (1.0 + abs(p[0]))
                  and abs(p[1].imag) < 1e-7 * (1.0 + abs(p[1]))]
    if not real_pairs:
        raise NumericalError(f"no real solution branch found at z={x}")
    m1, mn, _ = min(real_pairs, key=lambda p: abs(p[0] - seed_m1))
    m1, mn = _newton_polish(alpha1, alpha2, gamma, complex(x, 0.0),
                            complex(m1.real), complex(mn.real))
    m1, mn = complex(m1.real), complex(mn.real)
    res = _system_residual(alpha1, alpha2, gamma, complex(x, 0.0), m1, mn)
    if res > tol:
        raise QveConvergenceError(f"real-axis solve at z={x} above tolerance {tol}",
                                  residual=res)
    return m1, mn, res


def solve_reduced(spec: GsbmSpec, z: complex, tol: float = DEFAULT_TOL) -> QveSolution:
    """Solve the two-block system at one spectral point.

    For Im z > 0 returns the unique pair with Im m1, Im mN >= 0.  For real z
    outside the spectrum returns the real branch continuous with m ~ -1/z at
    infinity; real z inside the spectrum raises NumericalError.
    """
    z = complex(z)
    if z.imag < 0:
        raise ValidationError("lower half-plane evaluation is not supported")
    a1, a2, g = spec.alpha1, spec.alpha2, spec.gamma
    if z.imag > 0:
        m1, mn, res = _solve_upper(a1, a2, g, z, tol)
    else:
        m1, mn, res = _solve_real_outside(a1, a2, g, z.real, tol)
    return QveSolution(z=z, m1=m1, mN=mn, m_avg=g * m1 + (1.0 - g) * mn,
                       residual=res)


def solve_full(profile: np.ndarray, z: complex, tol: float = DEFAULT_TOL,
               max_iter: int = DEFAULT_MAX_ITER,
               damping: float = DEFAULT_DAMPING) -> np.ndarray:
    """Solve the full N-component system by damped fixed-point iteration.

    ``profile`` holds the entry variances S_ij.  Iterates
    m <- (1-d) m - d / (z + S m) from m = -1/z; the map preserves the upper
    half-plane, so the limit is the physical branch.
    """
    s = np.asarray(getattr(profile, "data", profile), dtype=np.float64)
    if s.ndim != 2 or s.shape[0] != s.shape[1]:
        raise ValidationError("variance profile must be square")
    if np.any(s < 0):
        raise ValidationError("variance profile entries must be nonnegative")
    z = complex(z)
    if z.imag <= 0:
        raise ValidationError("full solve requires Im z > 0")
    n = s.shape[0]
    m = np.full(n, -1.0 / z, dtype=complex)
    residual = np.inf
    for iteration in range(max_iter):
        denom = z + s @ m
        m_next = (1.0 - damping) * m - damping / denom
        m = m_next
        residual = float(np.max(np.abs(1.0 / m + z + s @ m)))
        if residual < tol:
            break
    else:
        raise QveConvergenceError("full solve did not converge",
                                  residual=residual, iterations=max_iter)
    if np.any(m.imag < -1e-12):
        raise NumericalError(f"full solve left the upper half-plane at z={z}")
    return m


def density(spec: GsbmSpec, grid: np.ndarray, eta: float = DEFAULT_ETA) -> DensityCurve:
    """Smoothed limiting density on a real grid: rho = Im(m_avg(x + i eta)) / pi."""
    if eta <= 0:
        raise ValidationError(f"eta must be positive, got {eta}")
    grid = np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or not np.all(np.isfinite(grid)):
        raise ValidationError("grid must be a finite 1-d array")
    rho = np.empty_like(grid)
    for k, x in enumerate(grid):
        try:
            sol = solve_reduced(spec, complex(x, eta))
        except (NumericalError, ValidationError) as exc:
            raise NumericalError(f"density evaluation failed at grid point "
                                 f"{x}: {exc}") from exc
        rho[k] = sol.m_avg.imag / np.pi
    return DensityCurve(grid=grid, rho=np.maximum(rho, 0.0), eta=eta)


def default_grid(lo: float = -3.0, hi: float = 3.0,
                 points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(lo, hi, points)
