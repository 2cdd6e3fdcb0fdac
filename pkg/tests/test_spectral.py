import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import jacobi_eigh
from sglab.errors import InsufficientDataError, ParameterError, RangeError
from sglab.grid import Grid, OperatorSpec, assemble_operator, direct_norm
from sglab.spectral import (NORM_EQUIVALENCE_C, EigenDecomposition, agreement_count, analyze,
                            boundary_decay, certified_window, counting_function, eigendecompose,
                            norm_ratio_sweep, orthonormality_defect, reconstruction_error, schwartz_diagnostic,
                            series_norm, synthesize, weyl_fit)


def test_fixture_eigenvalues():
    eig = eigendecompose(assemble_operator(Grid(1.0, 3), OperatorSpec()))
    assert np.allclose(eig.eigenvalues, [2.0, 6.0, 7.0], rtol=0, atol=1e-12)


@pytest.mark.parametrize("m, mu", [(2, 2), (4, 2), (2, 4), (6, 6)])
def test_against_jacobi_oracle(m, mu):
    op = assemble_operator(Grid(3.0, 21), OperatorSpec(m, mu))
    eig = eigendecompose(op)
    w, v = jacobi_eigh(op.toarray())
    scale = np.abs(w).max()
    assert np.max(np.abs(eig.eigenvalues - w)) <= 1e-12 * scale
    # vectors agree up to sign where the spectral gap is clear; the top of the
    # spectrum holds nearly degenerate pairs localised at x = +-L, compared as subspaces
    v = v / np.sqrt(eig.spacing)
    gap = np.minimum(np.diff(w, prepend=-np.inf), np.diff(w, append=np.inf))
    clear = gap > 1e-6 * scale
    overlap = np.abs(np.sum(v * eig.eigenvectors, axis=0)) * eig.spacing
    assert clear[:3].all()
    assert np.allclose(overlap[clear], 1.0, atol=1e-8)
    proj = eig.spacing * (v.T @ eig.eigenvectors)
    assert np.allclose(proj.T @ proj, np.eye(len(w)), atol=1e-8)


def test_default_decomposition_basic_properties(default_eig):
    eig = default_eig
    assert len(eig) == eig.points == 801
    # the top of the spectrum pairs up (modes pinned at x = +-L), so only weakly increasing
    assert np.all(np.diff(eig.eigenvalues) >= 0)
    assert np.all(np.diff(eig.eigenvalues[:100]) > 0)
    assert orthonormality_defect(eig) <= 1e-8
    assert eig.eigenvalues[0] >= 1.0
    assert not eig.eigenvalues.flags.writeable and not eig.eigenvectors.flags.writeable


def test_reconstruction(default_eig):
    op = assemble_operator(default_eig.grid, default_eig.spec)
    assert reconstruction_error(op, default_eig) <= 1e-9 * np.abs(default_eig.eigenvalues).max()


def test_sign_convention_is_deterministic():
    op = assemble_operator(Grid(6.0, 121), OperatorSpec())
    a, b = eigendecompose(op), eigendecompose(op)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    for col in a.eigenvectors.T:
        mag = np.abs(col)
        first = np.argmax(mag >= (1 - 1e-6) * mag.max())
        assert col[first] > 0


@pytest.mark.parametrize("mu", [2, 4])
def test_partial_banded_matches_dense(mu):
    # N above the dense limit is not needed: count < N takes the banded path
    op = assemble_operator(Grid(8.0, 1201), OperatorSpec(2, mu))
    full, part = eigendecompose(op), eigendecompose(op, count=40)
    assert np.allclose(part.eigenvalues, full.eigenvalues[:40], rtol=1e-6)
    assert np.max(np.abs(part.eigenvectors - full.eigenvectors[:, :40])) * np.sqrt(full.spacing) < 1e-6
    assert orthonormality_defect(part) <= 1e-12


def test_raw_matrix_input():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    eig = eigendecompose(a, spacing=1.0)
    assert np.allclose(eig.eigenvalues, [1.0, 3.0])
    with pytest.raises(ParameterError, match="spacing"):
        eigendecompose(a)
    with pytest.raises(ParameterError, match="symmetric"):
        eigendecompose(np.array([[1.0, 2.0], [0.0, 1.0]]), spacing=1.0)
    with pytest.raises(ParameterError):
        eigendecompose(np.ones((2, 3)), spacing=1.0)


def test_count_validation():
    op = assemble_operator(Grid(1.0, 5), OperatorSpec())
    with pytest.raises(ParameterError):
        eigendecompose(op, count=0)
    with pytest.raises(ParameterError):
        eigendecompose(op, count=6)


def test_trusted_count_from_boundary_decay(default_eig):
    decay = boundary_decay(default_eig.eigenvectors)
    t = default_eig.trusted_count
    assert np.all(decay[:t] <= 1e-6)
    assert t == len(default_eig) or decay[t] > 1e-6


def test_counting_function():
    lam = np.array([1.0, 2.0, 2.0, 5.0])
    assert [counting_function(lam, v) for v in (0.5, 1.0, 2.0, 4.9, 5.0, 9.0)] == [0, 1, 3, 3, 4, 4]


@given(st.integers(0, 10_000))
def test_parseval_and_round_trip(seed):
    eig = _small_eig()
    v = np.random.default_rng(seed).standard_normal(eig.points)
    u = analyze(v, eig, len(eig), trusted_only=False)
    assert np.sum(u**2) == pytest.approx(eig.spacing * np.sum(v**2), rel=1e-11)
    assert np.allclose(synthesize(u, eig), v, atol=1e-10)


_cache = {}


def _small_eig():
    if "e" not in _cache:
        _cache["e"] = eigendecompose(assemble_operator(Grid(6.0, 121), OperatorSpec()))
    return _cache["e"]


def test_analyze_respects_trusted_range(default_eig):
    with pytest.raises(RangeError):
        analyze(np.ones(801), default_eig, default_eig.trusted_count + 1)
    assert analyze(np.ones(801), default_eig, 0).shape == (0,)
    with pytest.raises(RangeError):
        synthesize(np.ones(802), default_eig)


@pytest.mark.parametrize("r", [-2, 0, 1, 2.5])
def test_series_norm_on_unit_vectors_is_exact(default_eig, r):
    powered = default_eig.eigenvalues ** float(r)
    for j in (0, 5, 100):
        e = np.zeros(j + 1)
        e[j] = 1.0
        assert series_norm(e, default_eig, r) == powered[j]
        if r == 1:
            assert series_norm(e, default_eig, r) == default_eig.eigenvalues[j]


def test_series_norm_range():
    with pytest.raises(ParameterError):
        series_norm(np.ones(3), np.ones(3), 7)
    assert series_norm(np.zeros(5), np.arange(1.0, 6.0), 1) == 0.0


def test_norm_equivalence_sweep(default_eig):
    ratios = norm_ratio_sweep(default_eig, vectors=50, seed=7)
    c = NORM_EQUIVALENCE_C
    assert np.all((ratios >= 1 / c) & (ratios <= c))


def test_frozen_constant_covers_every_vector():
    # extreme singular values of A B^-1, B = <x>^2 (I+K): the ratio over all vectors
    grid = Grid(12.0, 801)
    a = assemble_operator(grid, OperatorSpec()).toarray()
    basis = np.eye(801)
    b = np.column_stack([_direct_rows(grid, basis[:, i]) for i in range(801)])
    s = np.linalg.svd(a @ np.linalg.inv(b), compute_uv=False)
    assert 1 / NORM_EQUIVALENCE_C < s.min() and s.max() < NORM_EQUIVALENCE_C


def _direct_rows(grid, v):
    h = grid.spacing
    w = v.copy()
    w[1:-1] = v[1:-1] + (2 * v[1:-1] - v[:-2] - v[2:]) / h**2
    w[0] = v[0] + (2 * v[0] - v[1]) / h**2
    w[-1] = v[-1] + (2 * v[-1] - v[-2]) / h**2
    return (1 + grid.nodes**2) * w


def test_direct_rows_helper_matches_direct_norm(rng):
    grid = Grid(3.0, 31)
    v = rng.standard_normal(31)
    assert np.sqrt(grid.spacing) * np.linalg.norm(_direct_rows(grid, v)) == pytest.approx(
        direct_norm(v, 2, 2, grid), rel=1e-12)


@given(st.floats(0.5, 4.0), st.floats(0.1, 10.0))
def test_weyl_fit_recovers_synthetic_exponent(rho, a):
    lam = a * np.arange(1, 301, dtype=float) ** rho
    fit = weyl_fit(lam, OperatorSpec(2, 4), (10, 300))
    assert abs(fit.slope_plain - rho) <= 1e-6
    assert not fit.log_corrected and fit.slope == fit.slope_plain
    assert fit.predicted_exponent == 2


def test_weyl_fit_log_corrected_variant():
    j = np.arange(1, 301, dtype=float)
    lam = (j / np.log(j + (j == 1))) ** 2
    fit = weyl_fit(lam, OperatorSpec(2, 2), (20, 300))
    assert fit.log_corrected and abs(fit.slope - 2.0) <= 1e-9


@pytest.mark.parametrize("window", [(5, 60), (20, 30), (20, 400)])
def test_weyl_fit_range_errors(window):
    with pytest.raises(RangeError):
        weyl_fit(np.arange(1.0, 301.0), OperatorSpec(), window, trusted_count=300)


def test_agreement_and_window():
    a = np.arange(1.0, 11.0)
    b = a.copy()
    b[6:] *= 1.05
    assert agreement_count(a, b) == 6
    ea = EigenDecomposition(a, np.zeros((3, 10)), 1.0, 8)
    eb = EigenDecomposition(b, np.zeros((3, 10)), 1.0, 4)
    assert certified_window(ea, eb) == 4


def test_schwartz_diagnostic_verdicts(default_eig):
    lam = default_eig.eigenvalues[:40]
    assert schwartz_diagnostic(lam**-5.0, default_eig, 3).verdict == "super-polynomial"
    assert schwartz_diagnostic(np.ones(40), default_eig, 3).verdict == "non-decaying"
    d = schwartz_diagnostic(lam**-2.0, default_eig, 3)
    assert d.verdict == "polynomial-order-2.00" and d.slope == pytest.approx(-2.0)
    with pytest.raises(InsufficientDataError):
        schwartz_diagnostic(np.r_[np.ones(5), np.zeros(35)], default_eig, 3)
