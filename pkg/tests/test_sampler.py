import numpy as np
import pytest

import gsbmlab as g
from gsbmlab.errors import ValidationError


def test_all_ones_and_zero_matrices():
    ones = g.SbmParams(n=30, n1=10, p1=1.0, p2=1.0, q=1.0, zero_diagonal=False)
    mat = g.sample_sbm_adjacency(ones, g.SampleSeed(0))
    assert np.all(mat.data == 1.0)

    zeros = g.SbmParams(n=30, n1=10, p1=0.0, p2=0.0, q=0.0, zero_diagonal=False)
    mat = g.sample_sbm_adjacency(zeros, g.SampleSeed(0))
    assert np.all(mat.data == 0.0)


def test_zero_diagonal_flag():
    params = g.SbmParams(n=50, n1=20, p1=1.0, p2=1.0, q=1.0, zero_diagonal=True)
    mat = g.sample_sbm_adjacency(params, g.SampleSeed(0))
    assert np.all(np.diag(mat.data) == 0.0)
    assert np.all(mat.data[np.triu_indices(50, 1)] == 1.0)


def test_block_mean_law_of_large_numbers(hidden_params_2500):
    mat = g.sample_sbm_adjacency(hidden_params_2500, g.SampleSeed(7))
    n1 = hidden_params_2500.n1
    block = mat.data[:n1, :n1][np.triu_indices(n1, 1)]
    k = block.size
    tol = 3.0 * np.sqrt(0.25 * 0.75 / k)
    assert abs(block.mean() - 0.25) < tol


def test_determinism_and_stream_independence(hidden_params_2500):
    a = g.sample_sbm_adjacency(hidden_params_2500, g.SampleSeed(3, 1))
    b = g.sample_sbm_adjacency(hidden_params_2500, g.SampleSeed(3, 1))
    c = g.sample_sbm_adjacency(hidden_params_2500, g.SampleSeed(3, 2))
    assert np.array_equal(a.data, b.data)
    assert not np.array_equal(a.data, c.data)


def test_exact_symmetry():
    spec = g.GsbmSpec(gamma=0.3, alpha1=2.0, alpha2=1.0,
                      theta1=1.0 / np.sqrt(60), theta2=0.0, lam=1.3, n=200)
    m, h, u = g.sample_gsbm(spec, g.NoiseKind.gaussian(), g.SampleSeed(5))
    assert np.array_equal(m.data, m.data.T)
    assert np.array_equal(h.data, h.data.T)


def test_zero_spike_means_m_equals_h():
    spec = g.GsbmSpec(gamma=0.5, alpha1=1.0, alpha2=1.0,
                      theta1=0.1, theta2=0.1, lam=0.0, n=100)
    m, h, u = g.sample_gsbm(spec, g.NoiseKind.gaussian(), g.SampleSeed(1))
    assert np.array_equal(m.data, h.data)


@pytest.mark.parametrize("kind", [g.NoiseKind.gaussian(),
                                  g.NoiseKind.rademacher(),
                                  g.NoiseKind.centered_bernoulli(0.2)])
def test_variance_profile(kind):
    n, n1 = 600, 180
    spec = g.GsbmSpec(gamma=0.3, alpha1=1.171875, alpha2=1.0,
                      theta1=1.0 / np.sqrt(n1), theta2=0.0, lam=0.0, n=n)
    h = g.sample_noise(spec, kind, g.SampleSeed(11))
    blocks = {
        "b11": (h.data[:n1, :n1][np.triu_indices(n1, 1)], spec.alpha1 / n),
        "b22": (h.data[n1:, n1:][np.triu_indices(n - n1, 1)], spec.alpha2 / n),
        "off": (h.data[:n1, n1:].ravel(), 1.0 / n),
    }
    for name, (entries, target) in blocks.items():
        assert entries.size >= 1000
        sample_var = entries.var()
        # 5 standard errors of the sample variance (4th-moment based)
        m4 = np.mean((entries - entries.mean()) ** 4)
        se = np.sqrt(max(m4 - sample_var ** 2, 0.0) / entries.size)
        assert abs(sample_var - target) < 5 * se + 1e-12, name


@pytest.mark.parametrize("kind", [g.NoiseKind.gaussian(),
                                  g.NoiseKind.rademacher(),
                                  g.NoiseKind.centered_bernoulli(0.2)])
def test_fourth_moment_bounded(kind):
    n = 400
    spec = g.GsbmSpec(gamma=0.5, alpha1=1.171875, alpha2=1.0,
                      theta1=1.0 / np.sqrt(n // 2), theta2=0.0, lam=0.0, n=n)
    h = g.sample_noise(spec, kind, g.SampleSeed(2))
    entries = h.data[np.triu_indices(n, 1)]
    assert np.mean(entries ** 4) * n ** 2 < 50.0


def test_bernoulli_requires_feasible_p():
    spec = g.GsbmSpec(gamma=0.5, alpha1=3.0, alpha2=1.0,
                      theta1=1.0 / np.sqrt(50), theta2=0.0, lam=0.0, n=100)
    with pytest.raises(ValidationError, match="Bernoulli"):
        g.sample_noise(spec, g.NoiseKind.centered_bernoulli(0.4), g.SampleSeed(0))


def test_shift_and_rescale_exact_values():
    # subtracting the exact shift matrix gives zero
    params = g.SbmParams(n=25, n1=5, p1=0.2, p2=0.2, q=0.2)
    e0 = g.SymMatrix(np.full((25, 25), 0.2))
    assert np.all(g.shift_and_rescale(e0, params).data == 0.0)

    # all-ones adjacency: every entry (1-q) * scale = 0.4 at N=25, q=0.2
    ones = g.SymMatrix(np.ones((25, 25)))
    out = g.shift_and_rescale(ones, params)
    assert np.allclose(out.data, 0.4, atol=1e-15)


def test_figure_pipeline_isolates_outlier(hidden_params_2500):
    adj = g.sample_sbm_adjacency(hidden_params_2500, g.SampleSeed(0))
    m = g.shift_and_rescale(adj, hidden_params_2500)
    top = g.top_eigenpairs(m, k=2)[0]
    assert top[0] > 2.1
    assert top[1] < 2.1


def test_two_construction_paths_match_in_distribution(hidden_params_2500):
    """Shifted Bernoulli adjacency vs direct spiked-noise construction."""
    params = hidden_params_2500
    spec, _, scale = g.from_sbm(params)
    n1 = params.n1

    adj = g.sample_sbm_adjacency(params, g.SampleSeed(21))
    m_a = g.shift_and_rescale(adj, params).data
    m_b, _, _ = g.sample_gsbm(spec, g.NoiseKind.centered_bernoulli(params.q),
                              g.SampleSeed(22))
    m_b = m_b.data

    for sl in [(slice(None, n1), slice(None, n1)),
               (slice(n1, None), slice(n1, None)),
               (slice(None, n1), slice(n1, None))]:
        a = m_a[sl][np.triu_indices_from(m_a[sl], 1)] if sl[0] == sl[1] \
            else m_a[sl].ravel()
        b = m_b[sl][np.triu_indices_from(m_b[sl], 1)] if sl[0] == sl[1] \
            else m_b[sl].ravel()
        se_mean = np.sqrt(a.var() / a.size + b.var() / b.size)
        assert abs(a.mean() - b.mean()) < 5 * se_mean + 1e-12
        se_var = np.sqrt(2.0 / a.size) * max(a.var(), b.var())
        assert abs(a.var() - b.var()) < 5 * se_var + 1e-12


def test_binary_round_trip(tmp_path):
    spec = g.GsbmSpec(gamma=0.5, alpha1=1.0, alpha2=1.0, theta1=0.1,
                      theta2=0.1, lam=2.0, n=100)
    m, _, _ = g.sample_gsbm(spec, g.NoiseKind.gaussian(), g.SampleSeed(9))
    path = tmp_path / "mat.bin"
    m.to_binary(path)
    back = g.SymMatrix.from_binary(path)
    assert np.array_equal(back.data, m.data)


def test_csv_export(tmp_path):
    mat = g.SymMatrix(np.array([[1.0, 2.0], [2.0, 3.0]]))
    path = tmp_path / "mat.csv"
    mat.to_csv(path)
    loaded = np.loadtxt(path, delimiter=",")
    assert np.allclose(loaded, mat.data)


def test_sym_matrix_rejects_bad_input():
    with pytest.raises(ValidationError, match="square"):
        g.SymMatrix(np.zeros((2, 3)))
    with pytest.raises(ValidationError, match="finite"):
        g.SymMatrix(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_upper_triangle_is_authoritative():
    mat = g.SymMatrix(np.array([[1.0, 5.0], [-99.0, 2.0]]))
    assert mat.data[1, 0] == 5.0
