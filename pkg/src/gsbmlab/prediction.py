"""Deterministic spectral predictions: support edge, outlier location,
critical spike strength, and the closed forms for the two named block models.

The upper edge of the limiting density is the largest real z at which the
eliminated quartic (see qve.reduced_coefficients) acquires a real double
root on the physical branch.  Double roots are located as sign changes of
the polynomial discriminant, computed as the determinant of the Sylvester
matrix of (f, df/dm); a density-support bisection serves as fallback.

Above the edge, the top eigenvalue of the spiked model converges to the
real z > L+ solving the weighted constraint

    gamma t1 m1(z) + (1-gamma) t2 mN(z) = -1/lambda,

with (t1, t2) = (N theta1^2, N theta2^2).  The critical spike strength is
the lambda at which that z reaches the edge, i.e. -1/phi evaluated at the
edge double root.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import NumericalError, ValidationError
from .model import GsbmSpec, validate_spec
from .qve import (_candidate_pairs, _mn_from_m1, reduced_coefficients,
                  solve_reduced)

log = logging.getLogger(__name__)

#: bracket offset above the edge when searching for the outlier
_EDGE_OFFSET = 1e-9
#: outliers closer to the edge than this are reported as marginal/subcritical
MARGINAL_GAP = 1e-6
#: bisection width targets
_EDGE_TOL = 1e-13
_OUTLIER_TOL = 1e-12


class EdgeMethod(str, Enum):
    DISCRIMINANT = "discriminant"
    DENSITY_SUPPORT_SCAN = "density_support_scan"


@dataclass(frozen=True)
class EdgeResult:
    """Upper edge of the limiting spectral density."""

    l_plus: float
    double_root_m: tuple[float, float]   # (m1, mN) at the edge
    method: EdgeMethod
    certified_window: float


@dataclass(frozen=True)
class OutlierPrediction:
    """Predicted top-eigenvalue location for one spike strength."""

    lam: float
    lambda_c: float
    l_plus: float
    z: float | None
    gap: float | None
    method: EdgeMethod
    marginal: bool = False

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "lambda_c": self.lambda_c,
                "l_plus": self.l_plus, "z": self.z, "gap": self.gap,
                "method": self.method.value, "marginal": self.marginal}


def _discriminant(alpha1: float, alpha2: float, gamma: float, z: float) -> float:
    """det of the Sylvester matrix of (f, f') in m; zero iff a double root."""
    coeffs = reduced_coefficients(alpha1, alpha2, gamma, complex(z, 0.0)).real
    mags = np.abs(coeffs)
    keep = mags > 1e-13 * mags.max()
    coeffs = coeffs[int(np.argmax(keep)):]
    deg = len(coeffs) - 1
    if deg < 2:
        raise NumericalError("reduced system degenerated below a quadratic")
    dcoeffs = coeffs[:-1] * np.arange(deg, 0, -1)
    size = 2 * deg - 1
    syl = np.zeros((size, size))
    for i in range(deg - 1):
        syl[i, i:i + deg + 1] = coeffs
    for i in range(deg):
        syl[deg - 1 + i, i:i + deg] = dcoeffs
    return float(np.linalg.det(syl))


def _support_bound(spec: GsbmSpec) -> float:
    """Safe real point beyond the spectral support (max-row-sum bound)."""
    r1 = spec.gamma * spec.alpha1 + (1.0 - spec.gamma)
    r2 = spec.gamma + (1.0 - spec.gamma) * spec.alpha2
    return 2.0 * math.sqrt(max(r1, r2)) + 1.0


def _double_root_at(spec: GsbmSpec, z: float) -> tuple[float, float]:
    """Closest pair of quartic roots at z, midpointed; with its mN partner."""
    pairs = _candidate_pairs(spec.alpha1, spec.alpha2, spec.gamma, complex(z, 0.0))
    roots = [p[0] for p in pairs]
    best = None
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            d = abs(roots[i] - roots[j])
            if best is None or d < best[0]:
                best = (d, 0.5 * (roots[i] + roots[j]))
    if best is None:
        raise NumericalError(f"no root pair at z={z}")
    m1 = best[1]
    mn = _mn_from_m1(spec.alpha1, spec.gamma, complex(z, 0.0), m1)
    return float(m1.real), float(mn.real)


def _reachable(spec: GsbmSpec, z: float, m1_star: float) -> bool:
    sol = solve_reduced(spec, complex(z, 1e-6), tol=1e-5)
    return abs(sol.m1 - m1_star) < 0.05 * (1.0 + abs(m1_star))


def _edge_by_discriminant(spec: GsbmSpec, z_hi: float) -> EdgeResult:
    a1, a2, g = spec.alpha1, spec.alpha2, spec.gamma
    step = 0.01
    z_prev = z_hi
    d_prev = _discriminant(a1, a2, g, z_prev)
    z = z_hi - step
    while z > 1e-3:
        d = _discriminant(a1, a2, g, z)
        if d_prev != 0.0 and np.sign(d) != np.sign(d_prev):
            lo, hi = z, z_prev
            d_lo = d
            while hi - lo > _EDGE_TOL:
                mid = 0.5 * (lo + hi)
                d_mid = _discriminant(a1, a2, g, mid)
                if np.sign(d_mid) == np.sign(d_lo):
                    lo, d_lo = mid, d_mid
                else:
                    hi = mid
            z_star = 0.5 * (lo + hi)
            m1_star, mn_star = _double_root_at(spec, z_star)
            if _reachable(spec, z_star, m1_star):
                return EdgeResult(l_plus=z_star, double_root_m=(m1_star, mn_star),
                                  method=EdgeMethod.DISCRIMINANT,
                                  certified_window=hi - lo)
            log.debug("discriminant root at z=%g not on the physical branch", z_star)
        z_prev, d_prev = z, d
        z -= step
    raise NumericalError("discriminant scan found no physical double root")


def _extrapolated_density_positive(spec: GsbmSpec, x: float) -> bool:
    sol = solve_reduced(spec, complex(x, 1e-12), tol=1e-5)
    return sol.m_avg.imag / np.pi > 1e-6


def _edge_by_support_scan(spec: GsbmSpec, z_hi: float) -> EdgeResult:
    step = 0.05
    x = z_hi
    while x > 1e-3 and not _extrapolated_density_positive(spec, x):
        x -= step
    if x <= 1e-3:
        raise NumericalError("support scan found no positive-density region")
    lo, hi = x, x + step
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if _extrapolated_density_positive(spec, mid):
            lo = mid
        else:
            hi = mid
    z_star = 0.5 * (lo + hi)
    m1_star, mn_star = _double_root_at(spec, z_star)
    return EdgeResult(l_plus=z_star, double_root_m=(m1_star, mn_star),
                      method=EdgeMethod.DENSITY_SUPPORT_SCAN,
                      certified_window=hi - lo)


def find_upper_edge(spec: GsbmSpec) -> EdgeResult:
    """Locate the upper edge of the limiting density."""
    validate_spec(spec)
    z_hi = _support_bound(spec)
    try:
        return _edge_by_discriminant(spec, z_hi)
    except NumericalError:
        log.warning("discriminant method failed to bracket; "
                    "falling back to density support scan")
        return _edge_by_support_scan(spec, z_hi)


def _spike_constraint(spec: GsbmSpec, z: float) -> float:
    t1, t2 = spec.spike_weights()
    sol = solve_reduced(spec, complex(z, 0.0))
    return spec.gamma * t1 * sol.m1.real + (1.0 - spec.gamma) * t2 * sol.mN.real


def critical_lambda(spec: GsbmSpec, edge: EdgeResult | None = None) -> float:
    """Spike strength at which the outlier location meets the edge.

    Evaluates the constraint weight phi at the edge double root, where the
    outlier equation phi(z) = -1/lambda crosses; lambda_c = -1/phi(L+).
    """
    validate_spec(spec)
    if edge is None:
        edge = find_upper_edge(spec)
    t1, t2 = spec.spike_weights()
    m1e, mne = edge.double_root_m
    phi_edge = spec.gamma * t1 * m1e + (1.0 - spec.gamma) * t2 * mne
    if phi_edge >= 0.0:
        raise NumericalError("constraint weight is not negative at the edge; "
                             "no finite critical spike strength")
    return -1.0 / phi_edge


def predict_outlier(spec: GsbmSpec, lam: float) -> OutlierPrediction:
    """Predicted limit of the top eigenvalue at spike strength lam.

    Searches real z > L+ for phi(z) = -1/lam.  Returns z and the gap to the
    edge when the crossing exists; otherwise a subcritical prediction (with
    the marginal flag when the crossing sits within MARGINAL_GAP of the edge).
    """
    validate_spec(spec)
    if lam < 0:
        raise ValidationError(f"negative spike strength: {lam}")
    edge = find_upper_edge(spec)
    lam_c = critical_lambda(spec, edge)

    def subcritical(marginal: bool = False) -> OutlierPrediction:
        return OutlierPrediction(lam=lam, lambda_c=lam_c, l_plus=edge.l_plus,
                                 z=None, gap=None, method=edge.method,
                                 marginal=marginal)

    if lam == 0.0:
        return subcritical()
    lo = edge.l_plus + _EDGE_OFFSET
    hi = max(edge.l_plus + 100.0, 2.0 * lam + 2.0)
    g_lo = _spike_constraint(spec, lo) + 1.0 / lam
    if g_lo >= 0.0:
        return subcritical(marginal=lam > lam_c)

    # phi is nondecreasing above the edge (each block value is a Stieltjes
    # transform of a positive measure), so a single sign change is expected;
    # a coarse scan guards against numerical surprises.
    scan = np.geomspace(_EDGE_OFFSET, hi - edge.l_plus, 48) + edge.l_plus
    signs = [g_lo] + [_spike_constraint(spec, x) + 1.0 / lam for x in scan[1:]]
    crossings = [k for k in range(1, len(signs))
                 if np.sign(signs[k]) != np.sign(signs[k - 1]) and signs[k - 1] != 0]
    if len(crossings) > 1:
        log.warning("multiple sign changes of the outlier constraint above the "
                    "edge at lambda=%g; returning the smallest root", lam)
    if crossings:
        lo, hi = float(scan[crossings[0] - 1]), float(scan[crossings[0]])
        g_lo = signs[crossings[0] - 1]
    while hi - lo > _OUTLIER_TOL:
        mid = 0.5 * (lo + hi)
        g_mid = _spike_constraint(spec, mid) + 1.0 / lam
        if np.sign(g_mid) == np.sign(g_lo):
            lo, g_lo = mid, g_mid
        else:
            hi = mid
    z = 0.5 * (lo + hi)
    gap = z - edge.l_plus
    if gap < MARGINAL_GAP:
        return subcritical(marginal=True)
    return OutlierPrediction(lam=lam, lambda_c=lam_c, l_plus=edge.l_plus,
                             z=z, gap=gap, method=edge.method)


# ---------------------------------------------------------------------------
# closed forms for the two named Bernoulli block models, in terms of the raw
# edge probabilities (p = q + w/sqrt(N))
# ---------------------------------------------------------------------------

def _check_q(q: float) -> None:
    if not 0.0 < q < 1.0:
        raise ValidationError(f"q={q} must lie in (0,1)")


def hidden_threshold(q: float, gamma: float, n: int) -> float:
    """Edge probability above which the planted-community outlier appears."""
    _check_q(q)
    if not 0.0 < gamma < 1.0:
        raise ValidationError(f"gamma out of range (0,1): {gamma}")
    return q + math.sqrt(q * (1.0 - q)) / (gamma * math.sqrt(n))


def unbalanced_threshold(q: float, n: int) -> float:
    """Outlier threshold for the equal-intra-probability model; gamma-free."""
    _check_q(q)
    return q + 2.0 * math.sqrt(q * (1.0 - q)) / math.sqrt(n)


def hidden_lambda1(w: float, q: float, gamma: float) -> float:
    """Limiting top eigenvalue of the planted-community model at signal w."""
    _check_q(q)
    if w <= 0:
        raise ValidationError(f"signal strength w={w} must be positive")
    lam = gamma * w / math.sqrt(q * (1.0 - q))
    return lam + 1.0 / lam if lam > 1.0 else 2.0


def unbalanced_lambda1(w: float, q: float) -> float:
    """Limiting top eigenvalue of the equal-intra-probability model."""
    _check_q(q)
    if w <= 0:
        raise ValidationError(f"signal strength w={w} must be positive")
    lam = w / (2.0 * math.sqrt(q * (1.0 - q)))
    return lam + 1.0 / lam if lam > 1.0 else 2.0
