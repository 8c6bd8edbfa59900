import math
import warnings

import numpy as np
import pytest

from gaussbath import measures as ms
from gaussbath.dynamics import (
    AccuracyWarning,
    EvolutionSpec,
    integrate_ode,
    integrate_ode_array,
    propagate,
    propagate_array,
    separability_transitions,
    steady_state,
)
from gaussbath.linalg import NotHurwitzError
from gaussbath.model import (
    CovarianceMatrix,
    DiffusionMatrix,
    InvalidDiffusionError,
    PhysParams,
    random_diffusion,
    random_physical_state,
    scale_quadratures,
    thermal_diffusion,
    thermal_product_state,
    two_mode_squeezed_vacuum,
    unscale_quadratures,
    vacuum,
)


def analytic_steady(p, d_xy, d_xpy):
    m, w, lam = p.m, p.omega, p.lam
    L2 = lam**2 + w**2
    return {
        "xx": p.c_t / (2 * m * w),
        "xpx": 0.0,
        "xy": (m**2 * L2 * d_xy + m * lam * d_xpy) / (m**2 * lam * L2),
        "xpy": lam * d_xpy / L2,
        "pxpy": (m**2 * w**2 * L2 * d_xy - m * w**2 * lam * d_xpy) / (lam * L2),
    }


def random_spec(rng, n_t=50, t_max=None):
    p = PhysParams(m=rng.uniform(0.5, 2), omega=rng.uniform(0.5, 2), lam=rng.uniform(0.1, 1))
    D = random_diffusion(p, rng)
    s0 = random_physical_state(rng, max_squeeze=0.8)
    t_max = t_max if t_max is not None else 10 / p.lam
    return EvolutionSpec(p, D, s0, np.linspace(0, t_max, n_t))


# ---------------------------------------------------------------------------
# EvolutionSpec validation

def test_spec_validation():
    p = PhysParams(lam=0.3, theta=0.5)
    D = thermal_diffusion(p)
    for grid in ([], [0.0, 0.0], [1.0, 0.5], [-1.0, 0.0], [0.0, np.nan]):
        with pytest.raises(ValueError):
            EvolutionSpec(p, D, vacuum(), grid)
    with pytest.raises(InvalidDiffusionError):
        EvolutionSpec(p, DiffusionMatrix(np.zeros((4, 4))), vacuum(), [0.0, 1.0])


# ---------------------------------------------------------------------------
# steady state

@pytest.mark.parametrize("m,omega,lam,c_t,d_xy,d_xpy", [
    (1.0, 1.0, 0.2, 1.5, 0.01, 0.05),
    (2.3, 0.7, 0.5, 3.0, -0.02, 0.2),
    (0.6, 1.8, 1.1, 1.1, 0.0, 0.3),
])
def test_steady_state_matches_analytic(m, omega, lam, c_t, d_xy, d_xpy):
    p = PhysParams.from_c_t(m, omega, lam, c_t)
    s = steady_state(p, thermal_diffusion(p, d_xy, d_xpy), check=False).sigma
    ref = analytic_steady(p, d_xy, d_xpy)
    assert s[0, 0] == pytest.approx(ref["xx"], abs=1e-10)
    assert s[2, 2] == pytest.approx(ref["xx"], abs=1e-10)
    assert s[0, 1] == pytest.approx(ref["xpx"], abs=1e-10)
    assert s[0, 2] == pytest.approx(ref["xy"], abs=1e-10)
    assert s[0, 3] == pytest.approx(ref["xpy"], abs=1e-10)
    assert s[1, 3] == pytest.approx(ref["pxpy"], abs=1e-10)


def test_steady_state_uncorrelated_is_gibbs():
    p = PhysParams(m=1.7, omega=0.6, lam=0.3, theta=0.9)
    s = steady_state(p, thermal_diffusion(p))
    assert np.allclose(scale_quadratures(s, p.m, p.omega), thermal_product_state(p.c_t).sigma,
                       rtol=0, atol=1e-12)


def test_steady_state_block_determinants():
    p = PhysParams.from_c_t(1.0, 1.3, 0.9, 2.5)
    d = 0.6
    s = steady_state(p, thermal_diffusion(p, 0.0, d))
    inv = ms.invariants(s)
    assert inv.det_a == pytest.approx(p.c_t**2 / 4, rel=1e-12)
    assert inv.det_c == pytest.approx(-(d / p.big_lambda) ** 2, rel=1e-12)
    assert inv.det_sigma == pytest.approx((p.c_t**2 / 4 - (d / p.big_lambda) ** 2) ** 2, rel=1e-12)


def test_steady_state_requires_dissipation():
    with pytest.raises(NotHurwitzError):
        steady_state(PhysParams(lam=0.0), np.eye(4))


# ---------------------------------------------------------------------------
# closed-form propagation

def test_initial_state_bit_identical(rng):
    spec = random_spec(rng)
    out = propagate(spec)
    assert out[0][0] == 0.0
    assert np.array_equal(out[0][1].sigma, spec.initial.sigma)


def test_long_time_limit(rng):
    for _ in range(5):
        spec = random_spec(rng)
        late = EvolutionSpec(spec.params, spec.diffusion, spec.initial, [40 / spec.params.lam])
        inf = steady_state(spec.params, spec.diffusion).sigma
        assert np.abs(propagate_array(late)[0] - inf).max() <= 1e-10


def test_fixed_point(rng):
    for _ in range(10):
        spec = random_spec(rng)
        inf = steady_state(spec.params, spec.diffusion)
        fixed = EvolutionSpec(spec.params, spec.diffusion, inf, spec.t_grid)
        assert np.abs(propagate_array(fixed) - inf.sigma).max() <= 1e-10


def test_composition(rng):
    for _ in range(20):
        spec = random_spec(rng, n_t=2)
        t1, t2 = rng.uniform(0, 5 / spec.params.lam, 2)
        first = EvolutionSpec(spec.params, spec.diffusion, spec.initial, [t1])
        mid = CovarianceMatrix(propagate_array(first)[0])
        second = EvolutionSpec(spec.params, spec.diffusion, mid, [t2])
        direct = EvolutionSpec(spec.params, spec.diffusion, spec.initial, [t1 + t2])
        assert np.abs(propagate_array(second)[0] - propagate_array(direct)[0]).max() <= 1e-10


def test_propagation_symmetric(rng):
    spec = random_spec(rng, n_t=200)
    out = propagate_array(spec)
    assert np.abs(out - out.transpose(0, 2, 1)).max() == 0.0


def test_decay_envelope_at_periods():
    p = PhysParams(m=1.0, omega=1.5, lam=0.2, theta=0.4)
    D = thermal_diffusion(p, 0.0, 0.05)
    s0 = two_mode_squeezed_vacuum(0.8)
    period = 2 * math.pi / p.omega
    spec = EvolutionSpec(p, D, s0, np.arange(0, 8) * period)
    inf = steady_state(p, D).sigma
    dev = np.abs(propagate_array(spec) - inf).max(axis=(1, 2))
    assert np.all(np.diff(dev) < 0)
    # at full periods M(t) = e^{-lambda t} I, so the deviation decays exactly like e^{-2 lambda t}
    assert np.allclose(dev, dev[0] * np.exp(-2 * p.lam * spec.t_grid), rtol=1e-8)


def test_propagation_invariant_under_local_scaling():
    # measures along a trajectory do not depend on the quadrature units
    p = PhysParams(m=2.5, omega=0.8, lam=0.3, theta=0.6)
    D = thermal_diffusion(p, 0.0, 0.08)
    s0 = CovarianceMatrix(unscale_quadratures(two_mode_squeezed_vacuum(0.4), p.m, p.omega))
    spec = EvolutionSpec(p, D, s0, np.linspace(0, 20, 41))
    out = propagate_array(spec)
    scaled = np.array([scale_quadratures(s, p.m, p.omega) for s in out])
    a = ms.batch_measures(out)
    b = ms.batch_measures(scaled)
    for key in ("simon", "log_negativity", "von_neumann_entropy", "mutual_information"):
        assert np.allclose(a[key], b[key], rtol=1e-10, atol=1e-10)


# ---------------------------------------------------------------------------
# RK4 oracle

def test_rk4_agrees_with_closed_form(rng):
    for _ in range(5):
        spec = random_spec(rng, n_t=40)
        p = spec.params
        dt = 0.01 / (p.lam + p.omega)
        ode = integrate_ode_array(spec, dt)
        assert np.abs(ode - propagate_array(spec)).max() <= 1e-6


@pytest.mark.filterwarnings("ignore::gaussbath.dynamics.AccuracyWarning")
def test_rk4_fourth_order():
    p = PhysParams(m=1.0, omega=1.0, lam=0.3, theta=0.5)
    D = thermal_diffusion(p, 0.01, 0.05)
    spec = EvolutionSpec(p, D, two_mode_squeezed_vacuum(0.5), np.linspace(0, 5, 11))
    exact = propagate_array(spec)
    errs = [np.abs(integrate_ode_array(spec, dt) - exact).max() for dt in (0.1, 0.05, 0.025)]
    ratios = [errs[0] / errs[1], errs[1] / errs[2]]
    for r in ratios:
        assert 13 < r < 19


def test_rk4_fixed_point_and_symmetry(rng):
    p = PhysParams(m=1.0, omega=1.0, lam=0.2, theta=0.7)
    D = thermal_diffusion(p, 0.0, 0.02)
    inf = steady_state(p, D)
    spec = EvolutionSpec(p, D, inf, np.linspace(0, 20, 21))
    out = integrate_ode_array(spec, 0.01 / 1.2)
    assert np.abs(out - inf.sigma).max() <= 1e-10
    spec = random_spec(rng, n_t=10)
    out = integrate_ode_array(spec, 0.005)
    assert np.abs(out - out.transpose(0, 2, 1)).max() <= 1e-12


def test_rk4_warns_on_coarse_step():
    p = PhysParams(lam=0.5, omega=1.0, theta=0.3)
    spec = EvolutionSpec(p, thermal_diffusion(p), vacuum(), [0.0, 1.0])
    with pytest.warns(AccuracyWarning):
        integrate_ode(spec, 0.5)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        integrate_ode(spec, 0.01)
    with pytest.raises(ValueError):
        integrate_ode(spec, 0.0)


# ---------------------------------------------------------------------------
# physicality and separability

def test_physicality_preserved(rng):
    for _ in range(10):
        spec = random_spec(rng, n_t=100)
        b = ms.batch_measures(propagate_array(spec))
        assert np.all(b["nu_minus"] >= 0.5 - 1e-9)


def test_vacuum_without_cross_diffusion_stays_separable():
    p = PhysParams(lam=0.2, theta=0.3)
    spec = EvolutionSpec(p, thermal_diffusion(p), vacuum(), np.linspace(0, 50, 101))
    b = ms.batch_measures(propagate_array(spec))
    assert np.all(b["log_negativity"] == 0.0)
    assert separability_transitions(spec) == []


def test_entanglement_sudden_death_is_located():
    # squeezed vacuum in a hot uncorrelated bath loses entanglement in finite time
    p = PhysParams.from_c_t(1.0, 1.0, 0.1, 3.0)
    spec = EvolutionSpec(p, thermal_diffusion(p), two_mode_squeezed_vacuum(0.5), np.linspace(0, 30, 301))
    out = propagate_array(spec)
    simon = ms.batch_measures(out)["simon"]
    times = separability_transitions(spec, simon)
    assert len(times) >= 1
    scale = np.abs(simon).max()
    for t in times:
        one = EvolutionSpec(p, spec.diffusion, spec.initial, [t])
        s_t = ms.batch_measures(propagate_array(one))["simon"][0]
        assert abs(s_t) <= 1e-8 * scale
    assert simon[0] < 0 and simon[-1] > 0


def test_transitions_ignore_touching_zero():
    spec = EvolutionSpec(PhysParams(lam=0.2), thermal_diffusion(PhysParams(lam=0.2)), vacuum(),
                         np.linspace(0, 4, 5))
    assert separability_transitions(spec, np.array([0.0, 1.0, 0.0, 2.0, 3.0])) == []
    assert separability_transitions(spec, np.array([1.0, 0.0, -1.0, -2.0, -3.0])) == [1.0]


def test_entanglement_generation_is_located():
    # separable thermal input, bath cross-diffusion in the GMEMS window
    p = PhysParams.from_c_t(1.0, 1.0, 1.2, 2.0)
    d = 0.72 * p.big_lambda
    spec = EvolutionSpec(p, thermal_diffusion(p, 0.0, d), thermal_product_state(p.c_t),
                         np.linspace(0, 20, 201))
    simon = ms.batch_measures(propagate_array(spec))["simon"]
    times = separability_transitions(spec, simon)
    assert simon[0] > 0 and simon[-1] < 0
    assert len(times) % 2 == 1
