"""Shared fixtures and independent oracles for the test suite."""

import numpy as np
import pytest

import gsbmlab as g


# ---------------------------------------------------------------------------
# closed-form oracles for the homogeneous (flat) variance profile
# ---------------------------------------------------------------------------

def semicircle_m(z: complex) -> complex:
    """Stieltjes transform of the semicircle on [-2, 2], upper-half-plane branch."""
    root = np.sqrt(complex(z) ** 2 - 4.0)
    if (complex(z).imag > 0 and root.imag < 0) or (complex(z).imag == 0 and complex(z).real > 0 and root.real < 0):
        root = -root
    return (-z + root) / 2.0


def semicircle_density(x: np.ndarray) -> np.ndarray:
    return np.sqrt(np.maximum(4.0 - x ** 2, 0.0)) / (2.0 * np.pi)


def semicircle_cdf(x: np.ndarray) -> np.ndarray:
    x = np.clip(x, -2.0, 2.0)
    return 0.5 + x * np.sqrt(4.0 - x ** 2) / (4.0 * np.pi) + np.arcsin(x / 2.0) / np.pi


# ---------------------------------------------------------------------------
# standard specs
# ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def balanced_spec():
    n = 400
    return g.GsbmSpec(gamma=0.5, alpha1=1.0, alpha2=1.0,
                      theta1=1.0 / np.sqrt(n), theta2=1.0 / np.sqrt(n),
                      lam=0.0, n=n)


@pytest.fixture(scope="session")
def hidden_params_2500():
    return g.SbmParams(n=2500, n1=625, p1=0.25, p2=0.2, q=0.2)


@pytest.fixture(scope="session")
def hidden_spec_2500(hidden_params_2500):
    spec, _, _ = g.from_sbm(hidden_params_2500)
    return spec


@pytest.fixture(scope="session")
def asym_spec():
    """Two-block profile with distinct variance ratios and a one-sided spike."""
    n = 1000
    n1 = 300
    return g.GsbmSpec(gamma=0.3, alpha1=2.0, alpha2=1.0,
                      theta1=1.0 / np.sqrt(n1), theta2=0.0, lam=0.0, n=n)


# ---------------------------------------------------------------------------
# structural checks applied to sampled instances across the suite
# ---------------------------------------------------------------------------

def assert_structural(m: g.SymMatrix, h: g.SymMatrix, u: np.ndarray, lam: float):
    """Interlacing, norm bounds and eigenpair residuals for one instance."""
    report = g.eigen_symmetric(m, want_vectors=1)
    report = g.attach_noise_spectrum(report, h)
    ok, margin = g.check_interlacing(report)
    assert ok, f"interlacing violated, worst margin {margin}"

    lam1 = report.eigenvalues_m[0]
    mu1 = report.eigenvalues_h[0]
    assert lam - mu1 - 1e-9 <= lam1 <= lam + mu1 + 1e-9

    norm = float(np.max(np.abs(report.eigenvalues_m)))
    res = g.eigen_residuals(m, report.eigenvalues_m[:1],
                            report.top_vector.reshape(-1, 1), norm=norm)
    assert res[0] <= 1e-10

    trace_gap = abs(report.eigenvalues_m.sum() - np.trace(m.data))
    assert trace_gap <= 1e-8 * m.n
    return report
