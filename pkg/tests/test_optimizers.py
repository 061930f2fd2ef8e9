import numpy as np
import pytest

from bsarelay.linalg import inv_sqrt_psd, kron, rayleigh_quotient, unvec, vec
from bsarelay.optimizers import (
    algorithm1,
    algorithm2,
    anmwon_bs_update,
    anmwon_problem,
    anomax_kernel,
    anomax_relay_update,
    ecg2engr_problem,
    ecg2engr_relay_update,
    extended_bs_geometry,
    mmse_bs_update,
)
from bsarelay.precoding import (
    UserLinkGeometry,
    bs_power,
    compute_geometry,
    effective_link,
    mutual_information,
    relay_power,
    signal_block,
)
from bsarelay.system import ChannelSet, RngSpec, SystemConfig, draw_channels
from conftest import crandn

S20 = 0.1
S15 = 10 ** (-15 / 20)


@pytest.fixture
def geom(channel):
    return compute_geometry(channel)


def _random_probes(rng, n, count):
    return crandn(rng, n, count)


def _quotients(A, B, V):
    num = np.real(np.einsum("ij,ij->j", V.conj(), A @ V))
    den = np.real(np.einsum("ij,ij->j", V.conj(), B @ V))
    return num / den


def _hermitian_start(g):
    return inv_sqrt_psd(g.T) / np.sqrt(g.k)


# -- MMSE ---------------------------------------------------------------

def test_mmse_power(geom):
    for g in geom:
        D = mmse_bs_update(g, np.eye(2), S20, S20)
        assert abs(np.trace(g.T @ D @ D.conj().T).real - 1) < 1e-9


def test_mmse_heavy_noise_still_unit_power(geom):
    g = geom[0]
    Dp = anomax_relay_update(g, _hermitian_start(g))
    D = mmse_bs_update(g, Dp, 1e4, 1e4)
    assert abs(bs_power(g, D) - 1) < 1e-9
    # direction approaches the matched filter Ft^H
    Ft = g.Tbar.conj().T @ Dp @ g.Tbar @ g.T
    mf = Ft.conj().T / np.sqrt(np.trace(g.T @ Ft.conj().T @ Ft).real)
    np.testing.assert_allclose(D, mf, atol=1e-6)


def _scaled_mse(Ft, D, Rn):
    # E||b (Ft D s + n) - s||^2 minimized over the receive scalar b
    E = Ft @ D
    k = E.shape[0]
    return k - abs(np.trace(E)) ** 2 / (np.linalg.norm(E) ** 2 + np.trace(Rn).real)


def test_mmse_beats_random_unit_power_alternatives(geom, rng):
    g = geom[1]
    Dp = anomax_relay_update(g, _hermitian_start(g))
    D = mmse_bs_update(g, Dp, S20, S20)
    Ft = g.Tbar.conj().T @ Dp @ g.Tbar @ g.T
    Rn = effective_link(g, D, Dp, "classic", S20, S20).Rn
    best = _scaled_mse(Ft, D, Rn)
    for _ in range(1000):
        X = crandn(rng, 2, 2)
        X /= np.sqrt(bs_power(g, X))
        assert _scaled_mse(Ft, X, Rn) >= best - 1e-12


# -- ANOMAX -------------------------------------------------------------

def test_anomax_kernel_identity(geom, rng):
    g = geom[0]
    A = g.T @ _hermitian_start(g)
    C = crandn(rng, 2, 2)
    np.testing.assert_allclose(anomax_kernel(g, A) @ vec(C),
                               vec(g.Tbar.conj().T @ C @ g.Tbar @ A), atol=1e-12)


def test_anomax_objective_and_normalization(geom):
    for g in geom:
        D = _hermitian_start(g)
        Dp = anomax_relay_update(g, D)
        A = g.T @ D
        K = anomax_kernel(g, A)
        smax = np.linalg.svd(K, compute_uv=False)[0]
        X = g.Tbar @ (A @ A.conj().T + np.eye(2)) @ g.Tbar.conj().T
        # recover gamma' from the power relation tr(C X C^H) = 1/gamma'
        C = Dp / np.linalg.norm(Dp)
        assert abs(np.linalg.norm(C) - 1) < 1e-12
        gamma = 1 / np.trace(C @ X @ C.conj().T).real
        np.testing.assert_allclose(Dp, np.sqrt(gamma) * C, atol=1e-12)
        obj = np.linalg.norm(g.Tbar.conj().T @ Dp @ g.Tbar @ A) ** 2
        assert obj == pytest.approx(gamma * smax ** 2, rel=1e-9)
        assert abs(relay_power(g, D, Dp) - 1) < 1e-9


def test_anomax_beats_random_unit_frobenius(geom, rng):
    g = geom[0]
    A = g.T @ _hermitian_start(g)
    Dp = anomax_relay_update(g, _hermitian_start(g))
    C = Dp / np.linalg.norm(Dp)
    best = np.linalg.norm(g.Tbar.conj().T @ C @ g.Tbar @ A) ** 2
    K = anomax_kernel(g, A)
    V = _random_probes(rng, 4, 10_000)
    V /= np.linalg.norm(V, axis=0)
    assert (np.linalg.norm(K @ V, axis=0) ** 2).max() <= best * (1 + 1e-12)


# -- Algorithm 1 --------------------------------------------------------

def test_algorithm1_infinite_tolerance(geom):
    tr = algorithm1(geom[0], S20, S20, tol=np.inf)
    assert tr.iterations == 1 and tr.converged and len(tr.mi_history) == 1


def test_algorithm1_trace_invariants(geom):
    tr = algorithm1(geom[0], S20, S20)
    assert len(tr.mi_history) == tr.iterations
    if tr.converged:
        prev = tr.mi_history[-2] if tr.iterations > 1 else tr.initial_mi
        assert abs(tr.mi_history[-1] - prev) < 1e-6
    assert abs(bs_power(geom[0], tr.D) - 1) < 1e-9
    assert abs(relay_power(geom[0], tr.D, tr.Dp) - 1) < 1e-9
    again = algorithm1(geom[0], S20, S20)
    np.testing.assert_array_equal(again.D, tr.D)
    assert again.mi_history == tr.mi_history


def test_algorithm1_starts_from_closed_form(geom):
    g = geom[0]
    tr = algorithm1(g, S15, S15)
    D = _hermitian_start(g)
    X = g.Tbar @ (g.T @ D @ D.conj().T @ g.T.conj().T + np.eye(2)) @ g.Tbar.conj().T
    Dp = inv_sqrt_psd(X) / np.sqrt(2)
    ref = mutual_information(effective_link(g, D, Dp, "classic", S15, S15))
    assert tr.initial_mi == pytest.approx(ref, abs=1e-12)


def test_algorithm1_convergence_rate():
    cfg = SystemConfig()
    ok = total = 0
    for t in range(200):
        for g in compute_geometry(draw_channels(cfg, RngSpec(11, t))):
            ok += algorithm1(g, S20, S20).converged
            total += 1
    assert ok / total >= 0.95


def test_algorithm1_improves_on_closed_form():
    cfg = SystemConfig()
    wins = total = 0
    for t in range(1000):
        for g in compute_geometry(draw_channels(cfg, RngSpec(12, t))):
            tr = algorithm1(g, S15, S15)
            wins += tr.mutual_information >= tr.initial_mi - 1e-12
            total += 1
    assert wins / total >= 0.9


# -- extended structure -------------------------------------------------

def test_extended_power_and_projection(channel, geom):
    for g in geom:
        U, Tbb, Db = extended_bs_geometry(g)
        assert abs(np.trace(Db.conj().T @ Db @ Tbb.conj().T @ Tbb).real - 1) < 1e-9
        np.testing.assert_allclose(Tbb, g.Gp @ U, atol=1e-15)
    assert np.linalg.norm(geom[0].Gp @ geom[1].Ubar1) < 1e-10
    assert np.linalg.norm(geom[1].Gp @ geom[0].Ubar1) < 1e-10


def test_extended_single_user(rng):
    ch = ChannelSet(crandn(rng, 2, 2), [crandn(rng, 2, 2)])
    (g,) = compute_geometry(ch)
    U, _, _ = extended_bs_geometry(g)
    np.testing.assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    np.testing.assert_allclose(U @ U.conj().T, np.eye(2), atol=1e-12)


def test_extended_start_matches_classic_start(geom):
    # Tbb Tbb^H = T, so the Hermitian starts give the same aligned block
    for g in geom:
        _, _, Db = extended_bs_geometry(g)
        np.testing.assert_allclose(signal_block(g, Db, "extended"),
                                   signal_block(g, _hermitian_start(g), "classic"), atol=1e-12)


# -- ANMwoN BS update ---------------------------------------------------

def test_anmwon_constraint_and_optimality(geom, rng):
    for g in geom:
        Dp = anomax_relay_update(g, _hermitian_start(g))
        Db = anmwon_bs_update(g, Dp)
        A, Rb = anmwon_problem(g, Dp)
        d = vec(Db)
        assert abs(np.vdot(d, Rb @ d).real - 1) < 1e-10
        assert abs(bs_power(g, Db, "extended") - 1) < 1e-10
        best = rayleigh_quotient(A, Rb, d)
        # quotient numerator is the effective gain of the extended structure
        gain = np.linalg.norm(g.Tbar.conj().T @ Dp @ g.Tbar @ g.Tbb @ Db @ g.Tbb.conj().T) ** 2
        assert gain == pytest.approx(best, rel=1e-9)
        assert _quotients(A, Rb, _random_probes(rng, 4, 10_000)).max() <= best * (1 + 1e-10)


def test_anmwon_reduction_case():
    eye = np.eye(2, dtype=complex)
    g = UserLinkGeometry(eye, eye, eye, eye, eye, eye, eye, eye)
    A, Rb = anmwon_problem(g, eye)
    np.testing.assert_allclose(Rb, np.eye(4))
    Db = anmwon_bs_update(g, eye)
    w, V = np.linalg.eigh(A)
    assert abs(abs(np.vdot(V[:, -1], vec(Db))) - 1) < 1e-10


def test_anmwon_printed_scaling(geom):
    g = geom[0]
    Dp = anomax_relay_update(g, _hermitian_start(g))
    A, Rb = anmwon_problem(g, Dp)
    fixed = vec(anmwon_bs_update(g, Dp))
    printed = vec(anmwon_bs_update(g, Dp, printed_scaling=True))
    # same direction, printed form divides a unit vector by d^H R d
    assert abs(abs(np.vdot(fixed, printed)) / (np.linalg.norm(fixed) * np.linalg.norm(printed)) - 1) < 1e-12
    u = printed / np.linalg.norm(printed)
    q = np.vdot(u, Rb @ u).real
    assert np.vdot(printed, Rb @ printed).real == pytest.approx(1 / q, rel=1e-9)


# -- ECG2ENGR relay update ----------------------------------------------

def test_ecg2engr_constraint_and_optimality(geom, rng):
    for g in geom:
        _, _, Db = extended_bs_geometry(g)
        Dp = ecg2engr_relay_update(g, Db, S20, S20)
        A, Kt, Rp = ecg2engr_problem(g, Db, S20, S20)
        d = vec(Dp)
        assert abs(np.vdot(d, Rp @ d).real - 1) < 1e-10
        assert abs(relay_power(g, Db, Dp, "extended") - 1) < 1e-10
        best = rayleigh_quotient(A, Kt, d)
        assert _quotients(A, Kt, _random_probes(rng, 4, 10_000)).max() <= best * (1 + 1e-10)


def test_ecg2engr_quotient_is_relaxed_gain_to_noise(geom, rng):
    g = geom[0]
    _, _, Db = extended_bs_geometry(g)
    A, Kt, Rp = ecg2engr_problem(g, Db, S15, S15)
    Dp = crandn(rng, 2, 2)
    Dp /= np.sqrt(np.vdot(vec(Dp), Rp @ vec(Dp)).real)  # power-feasible
    gain = np.linalg.norm(g.Tbar.conj().T @ Dp @ g.Tbar @ g.Tbb @ Db @ g.Tbb.conj().T) ** 2
    noise = S15 ** 2 * np.linalg.norm(g.Tbar.conj().T @ Dp) ** 2 + S15 ** 2
    assert rayleigh_quotient(A, Kt, vec(Dp)) == pytest.approx(gain / noise, rel=1e-10)


def test_ecg2engr_noiseless_relay_structure(geom):
    g = geom[0]
    _, _, Db = extended_bs_geometry(g)
    _, Kt, Rp = ecg2engr_problem(g, Db, 0.0, 0.5)
    np.testing.assert_allclose(Kt, 0.25 * Rp, atol=1e-14)


def test_ecg2engr_kernel_identity(geom, rng):
    g = geom[1]
    _, _, Db = extended_bs_geometry(g)
    Aext = g.Tbb @ Db @ g.Tbb.conj().T
    Kk = kron((g.Tbar @ Aext).T, g.Tbar.conj().T)
    C = crandn(rng, 2, 2)
    np.testing.assert_allclose(unvec(Kk @ vec(C), 2, 2),
                               g.Tbar.conj().T @ C @ g.Tbar @ Aext, atol=1e-12)


# -- Algorithm 2 --------------------------------------------------------

def test_algorithm2_infinite_tolerance(geom):
    tr = algorithm2(geom[0], S20, S20, tol=np.inf)
    assert tr.iterations == 1 and tr.converged


def test_algorithm2_powers_and_determinism(geom):
    for g in geom:
        tr = algorithm2(g, S20, S20)
        assert abs(bs_power(g, tr.D, "extended") - 1) < 1e-9
        assert abs(relay_power(g, tr.D, tr.Dp, "extended") - 1) < 1e-9
        again = algorithm2(g, S20, S20)
        assert again.mi_history == tr.mi_history


def test_algorithm2_convergence_rate():
    cfg = SystemConfig()
    ok = total = 0
    for t in range(200):
        for g in compute_geometry(draw_channels(cfg, RngSpec(13, t))):
            ok += algorithm2(g, S20, S20).converged
            total += 1
    assert ok / total >= 0.95


def test_non_unit_powers(geom):
    g = geom[0]
    tr1 = algorithm1(g, S20, S20, bs_power=2.0, relay_power=0.5)
    assert bs_power(g, tr1.D) == pytest.approx(2.0, abs=1e-9)
    assert relay_power(g, tr1.D, tr1.Dp) == pytest.approx(0.5, abs=1e-9)
    tr2 = algorithm2(g, S20, S20, bs_power=2.0, relay_power=0.5)
    assert bs_power(g, tr2.D, "extended") == pytest.approx(2.0, abs=1e-9)
    assert relay_power(g, tr2.D, tr2.Dp, "extended") == pytest.approx(0.5, abs=1e-9)
