import numpy as np
import pytest

import gsbmlab as g
from gsbmlab.errors import NumericalError, ValidationError
from gsbmlab.qve import reduced_coefficients

from conftest import semicircle_density, semicircle_m


def _flat_spec(gamma=0.5):
    return g.GsbmSpec(gamma=gamma, alpha1=1.0, alpha2=1.0)


def _system_defect(spec, sol):
    a1, a2, gam, z = spec.alpha1, spec.alpha2, spec.gamma, sol.z
    r1 = z * sol.m1 + a1 * gam * sol.m1 ** 2 + (1 - gam) * sol.m1 * sol.mN + 1
    r2 = z * sol.mN + gam * sol.m1 * sol.mN + a2 * (1 - gam) * sol.mN ** 2 + 1
    return max(abs(r1), abs(r2))


# ---------------------------------------------------------------------------
# reduced solver against closed forms
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.8])
def test_flat_profile_at_2i(gamma):
    sol = g.solve_reduced(_flat_spec(gamma), 2j)
    expected = (np.sqrt(2) - 1) * 1j
    assert sol.m1 == pytest.approx(expected, abs=1e-12)
    assert sol.mN == pytest.approx(expected, abs=1e-12)
    assert sol.m_avg == pytest.approx(expected, abs=1e-12)


def test_flat_profile_real_point_outside():
    sol = g.solve_reduced(_flat_spec(), 3.0)
    expected = (-3 + np.sqrt(5)) / 2
    assert sol.m1.imag == 0.0
    assert sol.m1.real == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("z", [0.5 + 1e-3j, -1.2 + 0.05j, 2.5j, 1.9 + 1e-4j])
def test_flat_profile_matches_semicircle_transform(z):
    sol = g.solve_reduced(_flat_spec(0.4), z)
    assert sol.m_avg == pytest.approx(semicircle_m(z), abs=1e-10)


def test_real_point_inside_support_rejected():
    with pytest.raises(NumericalError, match="no real Herglotz continuation"):
        g.solve_reduced(_flat_spec(), 1.0)


def test_lower_half_plane_rejected():
    with pytest.raises(ValidationError):
        g.solve_reduced(_flat_spec(), -1j)


def test_residual_contract_on_grid(asym_spec):
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = complex(rng.uniform(-3, 3), rng.uniform(1e-4, 2.0))
        sol = g.solve_reduced(asym_spec, z)
        assert sol.residual <= 1e-10
        assert _system_defect(asym_spec, sol) <= 1e-10
        assert sol.m1.imag >= 0 and sol.mN.imag >= 0


def test_block_swap_symmetry():
    rng = np.random.default_rng(1)
    for _ in range(20):
        a1, a2 = rng.uniform(0.1, 3.0, 2)
        gamma = rng.uniform(0.05, 0.95)
        z = complex(rng.uniform(-2, 2), rng.uniform(0.05, 1.5))
        spec = g.GsbmSpec(gamma=gamma, alpha1=a1, alpha2=a2)
        sw = spec.swapped()
        sol = g.solve_reduced(spec, z)
        sol_sw = g.solve_reduced(sw, z)
        assert sol.m1 == pytest.approx(sol_sw.mN, abs=1e-9)
        assert sol.mN == pytest.approx(sol_sw.m1, abs=1e-9)


def test_large_z_asymptotics():
    # |m_avg(iy) + 1/(iy)| <= C / y^2 with C = 0.5 frozen for alpha <= 2
    for spec in (_flat_spec(), g.GsbmSpec(gamma=0.3, alpha1=2.0, alpha2=1.0),
                 g.GsbmSpec(gamma=0.7, alpha1=0.5, alpha2=1.5)):
        for y in (10.0, 20.0, 50.0, 100.0):
            sol = g.solve_reduced(spec, 1j * y)
            assert abs(sol.m_avg + 1.0 / (1j * y)) <= 0.5 / y ** 2


def test_quartic_collapses_to_flat_equation():
    coeffs = reduced_coefficients(1.0, 1.0, 0.37, 1.7 + 0.3j)
    assert coeffs[0] == 0 and coeffs[1] == 0
    assert coeffs[2] == pytest.approx(1.0)


@pytest.mark.parametrize("alpha1,alpha2", [(0.5, 2.0), (0.0, 1.0)])
def test_cubic_degenerations_still_solve(alpha1, alpha2):
    # alpha1*alpha2 = 1 (or alpha1 = 0) kills the quartic coefficient
    spec = g.GsbmSpec(gamma=0.4, alpha1=alpha1, alpha2=alpha2)
    assert reduced_coefficients(alpha1, alpha2, 0.4, 1.0 + 1.0j)[0] == 0
    rng = np.random.default_rng(6)
    for _ in range(20):
        z = complex(rng.uniform(-2.5, 2.5), rng.uniform(0.01, 1.5))
        sol = g.solve_reduced(spec, z)
        assert sol.residual <= 1e-10
        assert sol.m1.imag >= 0 and sol.mN.imag >= 0
    curve = g.density(spec, np.linspace(-3.5, 3.5, 1401), eta=1e-4)
    assert curve.integral() == pytest.approx(1.0, abs=2e-3)


# ---------------------------------------------------------------------------
# full N-component solver
# ---------------------------------------------------------------------------

def test_full_flat_profile_reduces_to_semicircle():
    n = 50
    profile = np.full((n, n), 1.0 / n)
    m = g.solve_full(profile, 2j)
    assert np.allclose(m, (np.sqrt(2) - 1) * 1j, atol=1e-9)


def test_full_matches_reduced_on_block_profile():
    n = 200
    spec = g.GsbmSpec(gamma=0.3, alpha1=2.0, alpha2=1.0, n=n,
                      theta1=1.0 / np.sqrt(60), theta2=0.0)
    profile = spec.variance_profile()
    for z in (2j, 0.5 + 0.3j, -1.0 + 0.2j):
        m = g.solve_full(profile, z, tol=1e-12)
        sol = g.solve_reduced(spec, z)
        n1 = spec.n1
        assert np.max(np.abs(m[:n1] - sol.m1)) < 1e-8
        assert np.max(np.abs(m[n1:] - sol.mN)) < 1e-8
        # block-constant structure of the solution itself
        assert np.max(np.abs(m[:n1] - m[0])) < 1e-10
        assert np.max(np.abs(m[n1:] - m[-1])) < 1e-10


def test_full_random_profile_satisfies_equation():
    rng = np.random.default_rng(4)
    n = 8
    raw = rng.uniform(0.2, 1.0, (n, n))
    profile = (raw + raw.T) / (2 * n)
    z = 0.7 + 0.9j
    m = g.solve_full(profile, z, tol=1e-11)
    defect = np.abs(1.0 / m + z + profile @ m)
    assert np.max(defect) < 1e-11
    assert np.all(m.imag > 0)


def test_full_solver_input_validation():
    with pytest.raises(ValidationError, match="Im z > 0"):
        g.solve_full(np.full((4, 4), 0.25), 2.0)
    with pytest.raises(ValidationError, match="nonnegative"):
        g.solve_full(np.array([[0.1, -0.2], [-0.2, 0.1]]), 1j)


# ---------------------------------------------------------------------------
# density curves
# ---------------------------------------------------------------------------

def test_density_matches_semicircle():
    grid = np.linspace(-1.9, 1.9, 381)
    curve = g.density(_flat_spec(), grid, eta=1e-4)
    assert np.max(np.abs(curve.rho - semicircle_density(grid))) < 0.01


def test_density_far_field_below_eta():
    eta = 1e-4
    curve = g.density(_flat_spec(), np.array([10.0]), eta=eta)
    assert curve.rho[0] < eta


def test_density_integrates_to_one():
    spec = g.GsbmSpec(gamma=0.3, alpha1=2.0, alpha2=1.0)
    grid = np.linspace(-3.3, 3.3, 4001)
    curve = g.density(spec, grid, eta=1e-5)
    assert curve.integral() == pytest.approx(1.0, abs=1e-3)


def test_density_normalization_invariant_at_default_eta():
    # support is [-2, 2]; the grid covers it with margin 1
    eta = 1e-4
    curve = g.density(_flat_spec(), np.linspace(-3.0, 3.0, 600), eta=eta)
    assert 1 - 20 * eta <= curve.integral() <= 1 + 20 * eta


def test_density_csv_schema(tmp_path):
    curve = g.density(_flat_spec(), np.linspace(-1, 1, 5), eta=1e-3)
    path = tmp_path / "density.csv"
    curve.to_csv(path)
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "x,rho"
    assert len(lines) == 6
    x0 = float(lines[1].split(",")[0])
    assert x0 == -1.0


def test_density_input_validation():
    with pytest.raises(ValidationError, match="eta"):
        g.density(_flat_spec(), np.linspace(-1, 1, 5), eta=0.0)
    with pytest.raises(ValidationError, match="finite"):
        g.density(_flat_spec(), np.array([0.0, np.inf]))
