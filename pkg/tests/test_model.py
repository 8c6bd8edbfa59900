import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gaussbath import measures
from gaussbath.model import (
    CovarianceMatrix,
    DiffusionMatrix,
    InvalidDiffusionError,
    PhysParams,
    UnphysicalStateError,
    coth_factor,
    cp_matrix,
    drift_matrix,
    from_upper_triangle,
    max_cp_cross_diffusion,
    random_diffusion,
    random_physical_state,
    scale_quadratures,
    theta_from_coth,
    thermal_diffusion,
    thermal_product_state,
    two_mode_squeezed_vacuum,
    unscale_quadratures,
    vacuum,
    validate_diffusion,
)

GMEMS = PhysParams.from_c_t(1.0, 1.0, 1.2, 2.0)
GMEMS_D = 0.75 * GMEMS.big_lambda


# ---------------------------------------------------------------------------
# parameters and temperature

def test_coth_factor_matches_definition():
    for omega, theta in [(1.0, 0.3), (2.0, 5.0), (0.5, 0.01)]:
        assert coth_factor(omega, theta) == pytest.approx(1 / math.tanh(omega / (2 * theta)), rel=1e-14)


def test_coth_factor_low_temperature_limits():
    assert coth_factor(1.0, 0.0) == 1.0
    assert coth_factor(1.0, 1e-6) == 1.0
    assert coth_factor(1.0, 1.0 / 60) == pytest.approx(1.0, abs=1e-25)


def test_coth_factor_rejects_negative_temperature():
    with pytest.raises(ValueError):
        coth_factor(1.0, -0.1)


@given(st.floats(1.0 + 1e-6, 50.0), st.floats(0.1, 5.0))
def test_theta_from_coth_roundtrip(c_t, omega):
    assert coth_factor(omega, theta_from_coth(omega, c_t)) == pytest.approx(c_t, rel=1e-12)


def test_theta_from_coth_edges():
    assert theta_from_coth(1.0, 1.0) == 0.0
    with pytest.raises(ValueError):
        theta_from_coth(1.0, 0.9)


@pytest.mark.parametrize("kw", [dict(m=0.0), dict(omega=-1.0), dict(lam=-0.1), dict(theta=-1.0),
                                dict(m=float("nan")), dict(omega=float("inf"))])
def test_physparams_rejects_invalid(kw):
    with pytest.raises(ValueError):
        PhysParams(**kw)


def test_big_lambda():
    assert PhysParams(omega=1.0, lam=1.2).big_lambda == pytest.approx(math.sqrt(2.44), rel=1e-15)


# ---------------------------------------------------------------------------
# drift

def test_drift_matrix_example():
    Y = drift_matrix(PhysParams(m=1.0, omega=1.0, lam=0.1))
    block = np.array([[-0.1, 1.0], [-1.0, -0.1]])
    assert np.array_equal(Y[:2, :2], block) and np.array_equal(Y[2:, 2:], block)
    assert not Y[:2, 2:].any() and not Y[2:, :2].any()


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(0.0, 3))
def test_drift_trace_and_spectrum(m, omega, lam):
    Y = drift_matrix(PhysParams(m=m, omega=omega, lam=lam))
    assert np.trace(Y) == pytest.approx(-4 * lam, abs=1e-12)
    assert np.allclose(np.linalg.eigvals(Y).real, -lam, atol=1e-9)


def test_drift_zero_dissipation_constructs():
    from gaussbath.linalg import is_hurwitz
    assert not is_hurwitz(drift_matrix(PhysParams(lam=0.0)))


# ---------------------------------------------------------------------------
# diffusion

def test_thermal_diffusion_zero_temperature():
    p = PhysParams(m=2.0, omega=1.5, lam=0.4, theta=0.0)
    D = thermal_diffusion(p)
    assert p.m * p.omega * D.D_xx == pytest.approx(p.lam / 2, rel=1e-15)


def test_thermal_diffusion_symmetric_fields(rng):
    for _ in range(20):
        p = PhysParams(m=rng.uniform(0.5, 2), omega=rng.uniform(0.5, 2),
                       lam=rng.uniform(0.1, 1), theta=rng.uniform(0, 2))
        D = thermal_diffusion(p, rng.uniform(-0.01, 0.01), rng.uniform(0, 0.05))
        assert D.D_xx == D.D_yy
        assert D.D_p_xp_x == D.D_p_yp_y
        assert D.D_xp_y == D.D_yp_x
        assert D.D_p_xp_y == pytest.approx(p.m**2 * p.omega**2 * D.D_xy, rel=1e-15)


def test_thermal_diffusion_uncorrelated_is_block_diagonal():
    D = thermal_diffusion(PhysParams(lam=0.3, theta=1.0))
    assert not D.d[:2, 2:].any()


def test_thermal_diffusion_gmems_example_passes_pairwise_conditions():
    D = thermal_diffusion(GMEMS, 0.0, 1.1716)
    rep = validate_diffusion(D, GMEMS.lam)
    assert rep.ok and not rep.violations
    # the pairwise inequalities are necessary but not sufficient here
    assert not rep.completely_positive
    with pytest.raises(InvalidDiffusionError, match="minor"):
        thermal_diffusion(GMEMS, 0.0, 1.1716, strict=True)


def test_validate_zero_diffusion_fails():
    rep = validate_diffusion(DiffusionMatrix(np.zeros((4, 4))), 0.5)
    assert not rep.ok
    assert "x-p_x" in rep.violations and "y-p_y" in rep.violations
    assert rep.slack["x-p_x"] == pytest.approx(-0.0625)


def test_validate_cross_coefficient_above_cap_names_x_py():
    p = PhysParams.from_c_t(1.0, 1.0, 0.8, 1.5)
    cap = p.lam * p.c_t / 2
    assert validate_diffusion(thermal_diffusion(p, 0.0, cap), p.lam).ok
    with pytest.raises(InvalidDiffusionError, match="x-p_y"):
        thermal_diffusion(p, 0.0, cap * (1 + 1e-6))
    D = DiffusionMatrix(thermal_diffusion(p).d + np.eye(4) * 0)
    d = D.d.copy()
    d[0, 3] = d[3, 0] = d[1, 2] = d[2, 1] = cap * 1.001
    rep = validate_diffusion(DiffusionMatrix(d), p.lam)
    assert "x-p_y" in rep.violations and "y-p_x" in rep.violations


def test_max_cp_cross_diffusion_is_sharp():
    p = PhysParams.from_c_t(1.0, 1.0, 1.2, 2.0)
    d = max_cp_cross_diffusion(p)
    assert d == pytest.approx(0.6 * math.sqrt(3), rel=1e-14)
    assert validate_diffusion(thermal_diffusion(p, 0, d * (1 - 1e-9)), p.lam).completely_positive
    assert not validate_diffusion(thermal_diffusion(p, 0, d * (1 + 1e-6)), p.lam).completely_positive


def test_cp_matrix_is_hermitian(rng):
    p = PhysParams(lam=0.7)
    H = cp_matrix(random_diffusion(p, rng), p.lam)
    assert np.allclose(H, H.conj().T)
    assert np.linalg.eigvalsh(H).min() == pytest.approx(0.05, abs=1e-12)


def test_cp_implies_pairwise(rng):
    for _ in range(200):
        p = PhysParams(lam=rng.uniform(0.05, 2))
        rep = validate_diffusion(random_diffusion(p, rng, margin=0.0), p.lam)
        assert rep.completely_positive and rep.ok
        assert min(rep.slack.values()) >= -1e-12


def test_diffusion_from_coefficients():
    D = DiffusionMatrix.from_coefficients(D_xx=1.0, D_xp_y=0.3)
    assert D.d[0, 3] == D.d[3, 0] == 0.3
    with pytest.raises(ValueError):
        DiffusionMatrix.from_coefficients(D_zz=1.0)
    with pytest.raises(AttributeError):
        D.D_zz


def test_diffusion_must_be_symmetric():
    d = np.eye(4)
    d[0, 1] = 0.1
    with pytest.raises(ValueError):
        DiffusionMatrix(d)


def test_diffusion_is_read_only():
    D = DiffusionMatrix(np.eye(4))
    with pytest.raises(ValueError):
        D.d[0, 0] = 2.0


# ---------------------------------------------------------------------------
# states

def test_vacuum():
    s = vacuum()
    assert s.nu_minus() == pytest.approx(0.5, abs=1e-15)
    assert s.det() == pytest.approx(1 / 16, abs=1e-16)


@pytest.mark.parametrize("r", [0.0, 0.1, 0.5, math.log(2) / 2, 1.0, 2.0])
def test_two_mode_squeezed_vacuum_is_pure(r):
    s = two_mode_squeezed_vacuum(r)
    assert s.det() == pytest.approx(1 / 16, abs=1e-12)
    assert np.allclose(s.block_A, s.block_B)
    assert s.block_C[0, 0] == pytest.approx(math.sinh(2 * r) / 2)
    assert s.block_C[1, 1] == pytest.approx(-math.sinh(2 * r) / 2)


def test_two_mode_squeezed_vacuum_at_zero_is_vacuum():
    assert np.array_equal(two_mode_squeezed_vacuum(0.0).sigma, vacuum().sigma)


def test_two_mode_squeezed_vacuum_rejects_bad_r():
    for r in (-0.1, float("nan"), float("inf")):
        with pytest.raises(ValueError):
            two_mode_squeezed_vacuum(r)


def test_thermal_product_state():
    assert np.array_equal(thermal_product_state(1.0).sigma, vacuum().sigma)
    s = thermal_product_state(2.0)
    assert s.nu_minus() == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(UnphysicalStateError):
        thermal_product_state(0.99)


def test_covariance_rejects_unphysical():
    with pytest.raises(UnphysicalStateError):
        CovarianceMatrix(0.4 * np.eye(4))
    with pytest.raises(UnphysicalStateError):
        CovarianceMatrix(-np.eye(4))
    s = np.eye(4)
    s[0, 1] = 0.2
    with pytest.raises(UnphysicalStateError):
        CovarianceMatrix(s)


def test_covariance_rejects_negative_definite():
    # det(-I) = 1 and the invariants mimic nu = 1, but -I is not a state
    with pytest.raises(UnphysicalStateError):
        CovarianceMatrix(-np.eye(4))
    assert not CovarianceMatrix(-np.eye(4), check=False).is_physical()


def test_covariance_tolerates_roundoff_below_half():
    CovarianceMatrix((0.5 - 1e-10) * np.eye(4))
    assert not CovarianceMatrix(0.45 * np.eye(4), check=False).is_physical()


def test_upper_triangle_roundtrip(rng):
    s = random_physical_state(rng)
    back = from_upper_triangle(s.upper_triangle())
    assert np.array_equal(back.sigma, s.sigma)
    with pytest.raises(ValueError):
        from_upper_triangle(np.ones(9))


def test_random_states_are_physical(rng):
    for _ in range(500):
        s = random_physical_state(rng, max_squeeze=1.5)
        assert s.nu_minus() >= 0.5 - 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.2, 5), st.floats(0.2, 5))
def test_local_scaling_invariance(seed, m, omega):
    s = random_physical_state(np.random.default_rng(seed))
    t = unscale_quadratures(s, m, omega)
    assert np.allclose(scale_quadratures(t, m, omega), s.sigma, rtol=1e-12, atol=1e-13)
    a = measures.invariants(s)
    b = measures.invariants(t)
    for x, y in zip(a, b):
        assert y == pytest.approx(x, rel=1e-10, abs=1e-10)
    ts = CovarianceMatrix(t)
    assert measures.simon_function(ts) == pytest.approx(measures.simon_function(s), rel=1e-10, abs=1e-10)
    assert measures.log_negativity(ts) == pytest.approx(measures.log_negativity(s), abs=1e-10)
    assert measures.von_neumann_entropy(ts) == pytest.approx(measures.von_neumann_entropy(s), abs=1e-10)
    assert measures.mutual_information(ts) == pytest.approx(measures.mutual_information(s), abs=1e-10)
