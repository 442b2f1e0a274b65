"""Parameter types for the two-block spiked matrix model.

The limiting model is M = H + lam * u u^T where H is a symmetric random
matrix with a two-block variance profile (alpha1/N on the first diagonal
block, alpha2/N on the second, 1/N off-diagonal) and u is the block-constant
unit spike (theta1 on the first gamma*N indices, theta2 on the rest).

Raw Bernoulli block models are converted into this form by ``from_sbm``:
subtract a constant shift matrix, divide by sqrt(N q (1-q)).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .errors import ValidationError

#: absolute tolerance for the unit-norm check on the spike vector
NORMALIZATION_ATOL = 1e-12


class Shift(str, Enum):
    """Which constant matrix is subtracted from the raw adjacency matrix."""

    HIDDEN_COMMUNITY = "hidden"   # all entries q (requires p2 == q)
    BALANCED = "balanced"         # all entries (p+q)/2 (requires p1 == p2)


class NoiseFamily(str, Enum):
    GAUSSIAN = "gaussian"
    RADEMACHER = "rademacher"
    CENTERED_BERNOULLI = "bernoulli"


@dataclass(frozen=True)
class NoiseKind:
    """Entry distribution for the noise matrix H.

    All families produce centered entries with variance alpha_i/N on the
    diagonal blocks and 1/N off-diagonal.  CENTERED_BERNOULLI realizes the
    entries as (Bernoulli(p) - p) / sqrt(N q (1-q)) with ``ref_q`` playing
    the role of q and the block p implied by the block's alpha.
    """

    family: NoiseFamily = NoiseFamily.GAUSSIAN
    ref_q: float = 0.5

    @classmethod
    def gaussian(cls) -> "NoiseKind":
        return cls(NoiseFamily.GAUSSIAN)

    @classmethod
    def rademacher(cls) -> "NoiseKind":
        return cls(NoiseFamily.RADEMACHER)

    @classmethod
    def centered_bernoulli(cls, ref_q: float = 0.5) -> "NoiseKind":
        if not 0.0 < ref_q < 1.0:
            raise ValidationError(f"reference probability must lie in (0,1), got {ref_q}")
        return cls(NoiseFamily.CENTERED_BERNOULLI, ref_q)

    def implied_p(self, alpha: float) -> float:
        """Block probability p with p(1-p) = alpha * q(1-q); error if none in (0,1)."""
        c = alpha * self.ref_q * (1.0 - self.ref_q)
        disc = 1.0 - 4.0 * c
        if disc < 0.0:
            raise ValidationError(
                f"no Bernoulli p in (0,1) has variance {alpha}*q(1-q) with q={self.ref_q}")
        root = 0.5 * (1.0 - math.sqrt(disc))
        p = root if self.ref_q <= 0.5 else 1.0 - root
        if not 0.0 < p < 1.0:
            raise ValidationError(f"implied Bernoulli p={p} lies outside (0,1)")
        return p


@dataclass(frozen=True)
class GsbmSpec:
    """Limiting model parameters.

    ``theta1``/``theta2`` are the per-entry spike values.  When ``n`` is set
    they carry the 1/sqrt(N) scale and must satisfy the unit-norm condition
    gamma*n*theta1^2 + (1-gamma)*n*theta2^2 = 1.  When ``n`` is None the
    thetas are interpreted as the sqrt(N)-rescaled weights, normalized so
    that gamma*theta1^2 + (1-gamma)*theta2^2 = 1 (the default 1, 1 works for
    any gamma).
    """

    gamma: float
    alpha1: float
    alpha2: float
    theta1: float = 1.0
    theta2: float = 1.0
    lam: float = 0.0
    n: int | None = None

    @property
    def n1(self) -> int:
        """Size of the first block (requires n)."""
        if self.n is None:
            raise ValidationError("spec has no matrix dimension n")
        return int(round(self.gamma * self.n))

    def spike_weights(self) -> tuple[float, float]:
        """(t1, t2) = (N theta1^2, N theta2^2), the O(1) spike weights."""
        scale = self.n if self.n is not None else 1
        return scale * self.theta1 ** 2, scale * self.theta2 ** 2

    def spike_vector(self) -> np.ndarray:
        """The unit spike vector u (requires n); renormalized after rounding n1."""
        n, n1 = self.n, self.n1
        if abs(self.gamma * n - n1) > 1e-9:
            warnings.warn(
                f"gamma*n = {self.gamma * n} is not an integer; rounding the block "
                f"size to {n1} and renormalizing the spike vector",
                stacklevel=2)
        u = np.empty(n)
        u[:n1] = self.theta1
        u[n1:] = self.theta2
        norm = np.linalg.norm(u)
        if norm == 0.0:
            raise ValidationError("spike vector is identically zero")
        u /= norm
        u.setflags(write=False)
        return u

    def variance_profile(self) -> np.ndarray:
        """The n x n matrix of entry variances E[H_ij^2] (requires n)."""
        n, n1 = self.n, self.n1
        s = np.full((n, n), 1.0 / n)
        s[:n1, :n1] = self.alpha1 / n
        s[n1:, n1:] = self.alpha2 / n
        return s

    def swapped(self) -> "GsbmSpec":
        """The same model with the two blocks exchanged."""
        return replace(self, gamma=1.0 - self.gamma, alpha1=self.alpha2,
                       alpha2=self.alpha1, theta1=self.theta2, theta2=self.theta1)

    def to_json(self) -> str:
        return json.dumps({"gamma": self.gamma, "alpha1": self.alpha1,
                           "alpha2": self.alpha2, "theta1": self.theta1,
                           "theta2": self.theta2, "lambda": self.lam, "n": self.n})

    @classmethod
    def from_json(cls, text: str) -> "GsbmSpec":
        d = json.loads(text)
        return cls(gamma=d["gamma"], alpha1=d["alpha1"], alpha2=d["alpha2"],
                   theta1=d["theta1"], theta2=d["theta2"], lam=d["lambda"],
                   n=d.get("n"))


def validate_spec(spec: GsbmSpec) -> GsbmSpec:
    """Return the spec unchanged if every invariant holds, else raise.

    Checks the gamma range, the block sizes implied by n, nonnegativity of
    the variance ratios and the spike strength, and the unit-norm condition
    on the spike.
    """
    if not 0.0 < spec.gamma < 1.0:
        raise ValidationError(f"gamma out of range (0,1): {spec.gamma}")
    if spec.alpha1 < 0.0 or spec.alpha2 < 0.0:
        raise ValidationError(
            f"negative variance ratio: alpha1={spec.alpha1}, alpha2={spec.alpha2}")
    if spec.lam < 0.0:
        raise ValidationError(f"negative spike strength: lambda={spec.lam}")
    if spec.n is not None:
        if spec.n < 4:
            raise ValidationError(f"n={spec.n} too small; need min block size >= 2")
        n1 = int(round(spec.gamma * spec.n))
        if min(n1, spec.n - n1) < 2:
            raise ValidationError(
                f"block sizes ({n1}, {spec.n - n1}) too small; need both >= 2")
        norm = spec.gamma * spec.n * spec.theta1 ** 2 \
            + (1.0 - spec.gamma) * spec.n * spec.theta2 ** 2
    else:
        norm = spec.gamma * spec.theta1 ** 2 + (1.0 - spec.gamma) * spec.theta2 ** 2
    if abs(norm - 1.0) > NORMALIZATION_ATOL:
        raise ValidationError(
            f"spike normalization violated: gamma*N*theta1^2 + (1-gamma)*N*theta2^2 "
            f"= {norm!r}, expected 1")
    return spec


@dataclass(frozen=True)
class SbmParams:
    """Raw Bernoulli block-model parameters.

    Entries are Bernoulli(p1) on the first n1 x n1 block, Bernoulli(p2) on
    the trailing block, Bernoulli(q) off-diagonal.  The probability ranges
    are only restricted to [0,1] here; the strict 0 < q < 1 requirement
    belongs to the rescaling step, which divides by sqrt(N q (1-q)).
    """

    n: int
    n1: int
    p1: float
    p2: float
    q: float
    zero_diagonal: bool = True
    shift: Shift = Shift.HIDDEN_COMMUNITY

    @property
    def gamma(self) -> float:
        return self.n1 / self.n

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "n1": self.n1, "p1": self.p1,
                           "p2": self.p2, "q": self.q,
                           "zero_diagonal": self.zero_diagonal,
                           "shift": self.shift.value})

    @classmethod
    def from_json(cls, text: str) -> "SbmParams":
        d = json.loads(text)
        return cls(n=d["n"], n1=d["n1"], p1=d["p1"], p2=d["p2"], q=d["q"],
                   zero_diagonal=d["zero_diagonal"], shift=Shift(d["shift"]))


def validate_sbm(params: SbmParams) -> SbmParams:
    """Structural validation of raw block-model parameters."""
    if not 2 <= params.n1 <= params.n - 2:
        raise ValidationError(
            f"n1={params.n1} out of range [2, n-2] for n={params.n}")
    for name, p in (("p1", params.p1), ("p2", params.p2), ("q", params.q)):
        if not 0.0 <= p <= 1.0:
            raise ValidationError(f"{name}={p} is not a probability")
    if params.shift is Shift.HIDDEN_COMMUNITY and params.p2 != params.q:
        raise ValidationError(
            f"hidden-community shift requires p2 == q, got p2={params.p2}, q={params.q}")
    if params.shift is Shift.BALANCED and params.p1 != params.p2:
        raise ValidationError(
            f"balanced shift requires p1 == p2, got p1={params.p1}, p2={params.p2}")
    return params


@dataclass(frozen=True)
class ShiftMatrix:
    """Constant matrix subtracted from the adjacency matrix (all entries equal)."""

    entry: float
    kind: Shift


def rescale_factor(params: SbmParams) -> float:
    """1/sqrt(N q (1-q)); error when q makes the scale degenerate."""
    if params.q <= 0.0 or params.q >= 1.0:
        raise ValidationError(f"degenerate scale: q={params.q} must lie in (0,1)")
    return 1.0 / math.sqrt(params.n * params.q * (1.0 - params.q))


def shift_matrix_for(params: SbmParams) -> ShiftMatrix:
    if params.shift is Shift.HIDDEN_COMMUNITY:
        return ShiftMatrix(entry=params.q, kind=params.shift)
    return ShiftMatrix(entry=0.5 * (params.p1 + params.q), kind=params.shift)


def from_sbm(params: SbmParams) -> tuple[GsbmSpec, ShiftMatrix, float]:
    """Convert Bernoulli block-model parameters into the limiting form.

    Returns the limiting spec, the constant shift matrix descriptor, and the
    scale 1/sqrt(N q (1-q)).  The variance ratios are
    alpha_i = p_i(1-p_i)/(q(1-q)); the spike is theta1 = 1/sqrt(n1),
    theta2 = 0 with lam = n1 (p1-q) * scale for the hidden-community shift,
    and theta1 = -theta2 = 1/sqrt(n) with lam = n (p1-q)/2 * scale for the
    balanced shift.
    """
    validate_sbm(params)
    scale = rescale_factor(params)
    qvar = params.q * (1.0 - params.q)
    alpha1 = params.p1 * (1.0 - params.p1) / qvar
    alpha2 = params.p2 * (1.0 - params.p2) / qvar
    if params.shift is Shift.HIDDEN_COMMUNITY:
        theta1 = 1.0 / math.sqrt(params.n1)
        theta2 = 0.0
        lam = params.n1 * (params.p1 - params.q) * scale
    else:
        theta1 = 1.0 / math.sqrt(params.n)
        theta2 = -theta1
        lam = params.n * (params.p1 - params.q) / 2.0 * scale
    if lam < 0.0:
        raise ValidationError(
            f"p1={params.p1} < q={params.q} gives negative spike strength {lam}")
    spec = GsbmSpec(gamma=params.gamma, alpha1=alpha1, alpha2=alpha2,
                    theta1=theta1, theta2=theta2, lam=lam, n=params.n)
    return validate_spec(spec), shift_matrix_for(params), scale
