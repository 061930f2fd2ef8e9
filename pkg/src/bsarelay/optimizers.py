"""Alternating outage optimization of one user's power matrices.

Two schemes are provided, both alternating between the relay matrix
``D'`` and the BS matrix:

* :func:`algorithm1` -- MMSE update of ``D`` and ANOMAX (norm-maximizing
  with normalized ``C'``) update of ``D'`` on the classic BS structure.
* :func:`algorithm2` -- generalized-eigenvector (norm-maximizing without
  normalization) update of ``D`` on the extended BS structure, and a
  gain-to-noise-ratio update of ``D'``.

None of the updates constrain the matrices to be Hermitian.
"""

import logging
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .linalg import (
    dominant_generalized_eigenvector,
    dominant_right_singular_vector,
    inv_sqrt_psd,
    kron,
    unvec,
    vec,
)
from .precoding import (
    _relay_input_cov,
    effective_link,
    mutual_information,
    signal_block,
)

__all__ = [
    "IterationTrace",
    "mmse_bs_update",
    "anomax_relay_update",
    "anomax_kernel",
    "algorithm1",
    "extended_bs_geometry",
    "anmwon_problem",
    "anmwon_bs_update",
    "ecg2engr_problem",
    "ecg2engr_relay_update",
    "algorithm2",
    "deterministic_relay",
]

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-6
DEFAULT_MAX_ITER = 50


@dataclass
class IterationTrace:
    """Result of one alternating optimization run.

    ``mi_history[i]`` is the mutual information after iteration ``i + 1``;
    ``initial_mi`` is the value at the starting point.
    """

    iterations: int
    mi_history: List[float]
    converged: bool
    D: np.ndarray
    Dp: np.ndarray
    variant: str
    initial_mi: float = float("nan")
    extra: dict = field(default_factory=dict)

    @property
    def mutual_information(self):
        return self.mi_history[-1]


def deterministic_relay(geom_m, A, relay_power=1.0):
    """Hermitian relay matrix for a given aligned BS block ``A``."""
    X = _relay_input_cov(geom_m, A)
    return np.sqrt(relay_power / geom_m.k) * inv_sqrt_psd(X)


# -- Algorithm 1 ---------------------------------------------------------

def mmse_bs_update(geom_m, Dp, sigma_r, sigma_m, bs_power=1.0):
    """MMSE BS matrix ``D = sqrt(gamma) C`` for fixed ``D'``.

    ``C = (Ft^H Ft + tr(Rn) I)^{-1} Ft^H`` with ``Ft = Tbar^H D' Tbar T``,
    scaled so ``tr(T D D^H) = bs_power``.
    """
    g = geom_m
    k = g.k
    Ft = g.Tbar.conj().T @ Dp @ g.Tbar @ g.T
    V = g.Tbar.conj().T @ Dp
    tr_rn = sigma_r ** 2 * np.real(np.trace(V @ V.conj().T)) + k * sigma_m ** 2
    C = np.linalg.solve(Ft.conj().T @ Ft + tr_rn * np.eye(k), Ft.conj().T)
    gamma = bs_power / np.real(np.trace(g.T @ C @ C.conj().T))
    return np.sqrt(gamma) * C


def anomax_kernel(geom_m, A):
    """``K = (Tbar A)^T kron Tbar^H`` so ``vec(Tbar^H C' Tbar A) = K vec(C')``."""
    return kron((geom_m.Tbar @ A).T, geom_m.Tbar.conj().T)


def anomax_relay_update(geom_m, D, relay_power=1.0, variant="classic"):
    """Relay matrix maximizing ``||Tbar^H D' Tbar A||_F`` under the power budget.

    ``C'`` is the unit-Frobenius matrix built from the dominant right
    singular vector of :func:`anomax_kernel`; ``D' = sqrt(gamma') C'`` with
    ``gamma'`` chosen so the high-SNR relay power equals `relay_power`.
    """
    A = signal_block(geom_m, D, variant)
    K = anomax_kernel(geom_m, A)
    k = geom_m.k
    C = unvec(dominant_right_singular_vector(K), k, k)
    X = _relay_input_cov(geom_m, A)
    gamma = relay_power / np.real(np.trace(C @ X @ C.conj().T))
    return np.sqrt(gamma) * C


def _run(step, init_D, init_Dp, evaluate, variant, tol, max_iter):
    D, Dp = init_D, init_Dp
    prev = evaluate(D, Dp)
    initial = prev
    history = []
    converged = False
    for _ in range(max_iter):
        D, Dp = step(D, Dp)
        mi = evaluate(D, Dp)
        history.append(mi)
        if abs(mi - prev) < tol:
            converged = True
            break
        prev = mi
    if not converged:
        logger.debug("%s: no convergence after %d iterations", variant, max_iter)
    return IterationTrace(len(history), history, converged, D, Dp, variant, initial)


def algorithm1(geom_m, sigma_r, sigma_m, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               bs_power=1.0, relay_power=1.0):
    """Alternate ANOMAX relay and MMSE BS updates until the rate settles.

    Starts from the Hermitian closed-form pair. One iteration is
    ANOMAX -> MMSE -> ANOMAX followed by a mutual-information evaluation;
    the loop stops when the change drops below `tol` bits.
    """
    g = geom_m
    D0 = np.sqrt(bs_power / g.k) * inv_sqrt_psd(g.T)
    Dp0 = deterministic_relay(g, g.T @ D0, relay_power)

    def evaluate(D, Dp):
        return mutual_information(effective_link(g, D, Dp, "classic", sigma_r, sigma_m))

    def step(D, Dp):
        Dp = anomax_relay_update(g, D, relay_power)
        D = mmse_bs_update(g, Dp, sigma_r, sigma_m, bs_power)
        Dp = anomax_relay_update(g, D, relay_power)
        return D, Dp

    return _run(step, D0, Dp0, evaluate, "classic", tol, max_iter)


# -- Algorithm 2 ---------------------------------------------------------

def extended_bs_geometry(geom_m, bs_power=1.0):
    """Extended BS structure and its Hermitian starting matrix.

    Returns ``(Ubar1, Tbb, Dbar0)`` with
    ``Dbar0 = sqrt(bs_power / K_m) (Tbb^H Tbb)^{-1/2}``.
    """
    g = geom_m
    Dbar0 = np.sqrt(bs_power / g.k) * inv_sqrt_psd(g.Tbb.conj().T @ g.Tbb)
    return g.Ubar1, g.Tbb, Dbar0


def _normalize(d, R, printed_scaling):
    q = np.real(np.vdot(d, R @ d))
    return d / q if printed_scaling else d / np.sqrt(q)


def anmwon_problem(geom_m, Dp):
    """Quotient matrices ``(Kb^H Kb, Rb)`` of the BS update.

    ``Kb vec(Dbar) = vec(Tbar^H D' Tbar Tbb Dbar Tbb^H)`` and
    ``vec(Dbar)^H Rb vec(Dbar)`` is the BS power.
    """
    g = geom_m
    k = g.k
    left = g.Tbar.conj().T @ Dp @ g.Tbar @ g.Tbb
    Kb = kron(g.Tbb.conj(), left)  # (Tbb^H)^T = conj(Tbb)
    Rb = kron((g.Tbb.conj().T @ g.Tbb).T, np.eye(k))
    return Kb.conj().T @ Kb, Rb


def anmwon_bs_update(geom_m, Dp, bs_power=1.0, printed_scaling=False):
    """BS matrix on the extended structure maximizing the effective gain.

    The dominant generalized eigenvector of ``(Kb^H Kb, Rb)`` is rescaled so
    ``d^H Rb d = bs_power``. With ``printed_scaling`` it is divided by
    ``d^H Rb d`` instead of its square root, which does not meet the
    constraint in general.
    """
    A, Rb = anmwon_problem(geom_m, Dp)
    d, _ = dominant_generalized_eigenvector(A, Rb)
    d = _normalize(d, Rb, printed_scaling) * np.sqrt(bs_power)
    k = geom_m.k
    return unvec(d, k, k)


def ecg2engr_problem(geom_m, Dbar, sigma_r, sigma_m):
    """Quotient matrices ``(Kk^H Kk, Kt, Rp)`` of the relay update.

    ``Kk vec(D') = vec(Tbar^H D' Tbar Tbb Dbar Tbb^H)``; ``Rp`` gives the
    relay power ``vec(D')^H Rp vec(D')`` and
    ``Kt = sigma_r^2 (I kron Tbar Tbar^H) + sigma_m^2 Rp``.
    """
    g = geom_m
    k = g.k
    A = g.Tbb @ Dbar @ g.Tbb.conj().T
    Kk = kron((g.Tbar @ A).T, g.Tbar.conj().T)
    Rp = kron(_relay_input_cov(g, A).T, np.eye(k))
    Kt = sigma_r ** 2 * kron(np.eye(k), g.Tbar @ g.Tbar.conj().T) + sigma_m ** 2 * Rp
    return Kk.conj().T @ Kk, Kt, Rp


def ecg2engr_relay_update(geom_m, Dbar, sigma_r, sigma_m, relay_power=1.0,
                          printed_scaling=False):
    """Relay matrix maximizing the effective gain-to-noise ratio.

    The dominant generalized eigenvector of ``(Kk^H Kk, Kt)`` is rescaled
    so that the relay power ``d'^H Rp d'`` equals `relay_power`.
    """
    A, Kt, Rp = ecg2engr_problem(geom_m, Dbar, sigma_r, sigma_m)
    d, _ = dominant_generalized_eigenvector(A, Kt)
    d = _normalize(d, Rp, printed_scaling) * np.sqrt(relay_power)
    k = geom_m.k
    return unvec(d, k, k)


def algorithm2(geom_m, sigma_r, sigma_m, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
               bs_power=1.0, relay_power=1.0, printed_scaling=False):
    """Alternate gain-to-noise relay and generalized-eigenvector BS updates.

    Starts from the Hermitian extended-structure BS matrix and the matching
    closed-form relay matrix. One iteration is relay -> BS -> relay followed
    by a mutual-information evaluation on the extended structure.
    """
    g = geom_m
    _, _, Db0 = extended_bs_geometry(g, bs_power)
    Dp0 = deterministic_relay(g, g.Tbb @ Db0 @ g.Tbb.conj().T, relay_power)

    def evaluate(D, Dp):
        return mutual_information(effective_link(g, D, Dp, "extended", sigma_r, sigma_m))

    def step(Db, Dp):
        Dp = ecg2engr_relay_update(g, Db, sigma_r, sigma_m, relay_power, printed_scaling)
        Db = anmwon_bs_update(g, Dp, bs_power, printed_scaling)
        Dp = ecg2engr_relay_update(g, Db, sigma_r, sigma_m, relay_power, printed_scaling)
        return Db, Dp

    return _run(step, Db0, Dp0, evaluate, "extended", tol, max_iter)
