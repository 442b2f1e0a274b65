"""Finite-N realizations: Bernoulli adjacency matrices and spiked noise matrices.

All randomness flows through a counter-based Philox generator keyed by
(master_seed, stream_id); entries are drawn in canonical row-major
upper-triangle order, so equal seeds reproduce equal matrices bit-for-bit.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .model import (GsbmSpec, NoiseFamily, NoiseKind, SbmParams,
                    shift_matrix_for, rescale_factor, validate_sbm,
                    validate_spec)


class SymMatrix:
    """Dense symmetric matrix; the upper triangle is authoritative."""

    __slots__ = ("_data",)

    def __init__(self, data: np.ndarray):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValidationError(f"expected a square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValidationError("matrix contains non-finite entries")
        upper = np.triu(arr)
        full = upper + np.triu(arr, 1).T
        full.setflags(write=False)
        self._data = full

    @property
    def n(self) -> int:
        return self._data.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Read-only dense array (exactly symmetric)."""
        return self._data

    def to_binary(self, path) -> None:
        """Header: n as little-endian int64, then the n(n+1)/2 upper-triangle
        float64 entries in row-major order."""
        iu = np.triu_indices(self.n)
        payload = self._data[iu].astype("<f8").tobytes()
        with open(path, "wb") as f:
            f.write(struct.pack("<q", self.n))
            f.write(payload)

    @classmethod
    def from_binary(cls, path) -> "SymMatrix":
        with open(path, "rb") as f:
            header = f.read(8)
            if len(header) != 8:
                raise ValidationError(f"{path}: truncated header")
            (n,) = struct.unpack("<q", header)
            flat = np.frombuffer(f.read(), dtype="<f8")
        if n < 0 or flat.size != n * (n + 1) // 2:
            raise ValidationError(f"{path}: payload does not match n={n}")
        full = np.zeros((n, n))
        full[np.triu_indices(n)] = flat
        return cls(full)

    def to_csv(self, path) -> None:
        np.savetxt(path, self._data, delimiter=",", fmt="%.17g")


@dataclass(frozen=True)
class SampleSeed:
    """Reproducible stream key: (master_seed, stream_id) -> one matrix."""

    master_seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence([abs(int(self.master_seed)), int(self.stream_id)])
        return np.random.Generator(np.random.Philox(seq))


def _mirror_upper(h: np.ndarray) -> SymMatrix:
    return SymMatrix(np.triu(h))


def _block_probs_row(i: int, n: int, n1: int, p1: float, p2: float, q: float) -> np.ndarray:
    """Probabilities for row i, columns i..n-1."""
    row = np.full(n - i, q)
    if i < n1:
        row[: n1 - i] = p1
    else:
        row[:] = p2
    return row


def sample_sbm_adjacency(params: SbmParams, seed: SampleSeed) -> SymMatrix:
    """Draw the raw 0/1 adjacency matrix with block probabilities (p1, p2, q)."""
    validate_sbm(params)
    rng = seed.generator()
    n, n1 = params.n, params.n1
    h = np.zeros((n, n))
    for i in range(n):
        probs = _block_probs_row(i, n, n1, params.p1, params.p2, params.q)
        h[i, i:] = (rng.random(n - i) < probs).astype(np.float64)
        if params.zero_diagonal:
            h[i, i] = 0.0
    return _mirror_upper(h)


def shift_and_rescale(adj: SymMatrix, params: SbmParams) -> SymMatrix:
    """scale * (adj - E) with E the constant shift matrix for params.shift."""
    scale = rescale_factor(params)
    shift = shift_matrix_for(params)
    return SymMatrix(scale * (adj.data - shift.entry))


def _noise_sigmas(spec: GsbmSpec) -> tuple[float, float, float]:
    n = spec.n
    return (np.sqrt(spec.alpha1 / n), np.sqrt(spec.alpha2 / n), np.sqrt(1.0 / n))


def sample_noise(spec: GsbmSpec, kind: NoiseKind, seed: SampleSeed,
                 zero_diagonal: bool | None = None) -> SymMatrix:
    """Draw the centered noise matrix H with the spec's variance profile.

    ``zero_diagonal`` defaults to True for Bernoulli noise (adjacency-style
    matrices have an empty diagonal) and False otherwise; when the diagonal
    is kept it follows the same block rule as the off-diagonal entries.
    """
    validate_spec(spec)
    if spec.n is None:
        raise ValidationError("sampling requires the spec to carry n")
    if zero_diagonal is None:
        zero_diagonal = kind.family is NoiseFamily.CENTERED_BERNOULLI
    rng = seed.generator()
    n, n1 = spec.n, spec.n1
    s1, s2, soff = _noise_sigmas(spec)
    h = np.zeros((n, n))

    if kind.family is NoiseFamily.CENTERED_BERNOULLI:
        p1 = kind.implied_p(spec.alpha1)
        p2 = kind.implied_p(spec.alpha2)
        poff = kind.implied_p(1.0)
        scale = 1.0 / np.sqrt(n * kind.ref_q * (1.0 - kind.ref_q))
        for i in range(n):
            probs = _block_probs_row(i, n, n1, p1, p2, poff)
            draws = (rng.random(n - i) < probs).astype(np.float64)
            h[i, i:] = (draws - probs) * scale
    else:
        for i in range(n):
            sigma = np.full(n - i, soff)
            if i < n1:
                sigma[: n1 - i] = s1
            else:
                sigma[:] = s2
            if kind.family is NoiseFamily.GAUSSIAN:
                h[i, i:] = rng.standard_normal(n - i) * sigma
            else:  # Rademacher
                h[i, i:] = (2.0 * rng.integers(0, 2, n - i) - 1.0) * sigma

    if zero_diagonal:
        np.fill_diagonal(h, 0.0)
    return _mirror_upper(h)


def sample_gsbm(spec: GsbmSpec, kind: NoiseKind, seed: SampleSeed,
                zero_diagonal: bool | None = None
                ) -> tuple[SymMatrix, SymMatrix, np.ndarray]:
    """Draw (M, H, u) with M = H + lam * u u^T exactly."""
    h = sample_noise(spec, kind, seed, zero_diagonal=zero_diagonal)
    u = spec.spike_vector()
    m = h.data + spec.lam * np.outer(u, u)
    return SymMatrix(m), h, u
