"""Invariant checks on random channels, used by ``bsarelay verify``."""

from dataclasses import dataclass

import numpy as np

from .baselines import p2psa_precoders
from .estimators import BSAPrecoder
from .linalg import rayleigh_quotient, vec
from .optimizers import anmwon_bs_update, anmwon_problem, anomax_kernel, ecg2engr_problem
from .precoding import (
    bs_power,
    end_to_end_link,
    interference_leakage,
    mutual_information,
    relay_power,
    signal_block,
)
from .system import NoiseLevels, RngSpec, SystemConfig, draw_channels

__all__ = ["CheckResult", "run_checks"]


@dataclass
class CheckResult:
    name: str
    worst: float
    tol: float

    @property
    def ok(self):
        return bool(self.worst <= self.tol)

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        return f"{status}  {self.name:<34s} worst={self.worst:.3e}  tol={self.tol:.1e}"


def _probe_gap(A, B, d, rng, n_probe):
    """Largest amount by which a random probe beats the candidate quotient."""
    n = A.shape[0]
    V = rng.standard_normal((n, n_probe)) + 1j * rng.standard_normal((n, n_probe))
    num = np.real(np.einsum("ij,ij->j", V.conj(), A @ V))
    den = np.real(np.einsum("ij,ij->j", V.conj(), B @ V))
    best = rayleigh_quotient(A, B, d)
    return max(float(np.max(num / den) - best) / max(abs(best), 1e-300), 0.0)


def run_checks(trials=100, seed=0, snr_db=20.0, config=None, n_probe=1000):
    """Run leakage, power, optimality and model-equivalence checks."""
    config = config or SystemConfig()
    noise = NoiseLevels.from_snr_db(snr_db, config.m)
    rng = np.random.default_rng([seed, 0xB5A])
    worst = {
        "leakage (bsa schemes)": 0.0,
        "leakage (p2psa, diagonal)": 0.0,
        "bs power equality": 0.0,
        "relay power equality": 0.0,
        "end-to-end equivalence": 0.0,
        "anomax optimality": 0.0,
        "bs eigen-update optimality": 0.0,
        "relay eigen-update optimality": 0.0,
    }
    for t in range(trials):
        ch = draw_channels(config, RngSpec(seed, t))
        for method in ("deterministic", "alg1", "alg2"):
            est = BSAPrecoder(method, snr_db, config).fit(ch)
            st = est.state_
            worst["leakage (bsa schemes)"] = max(
                worst["leakage (bsa schemes)"],
                interference_leakage(ch, st.P, st.W, st.W_blocks))
            for m, g in enumerate(est.geometry_):
                worst["bs power equality"] = max(
                    worst["bs power equality"],
                    abs(bs_power(g, st.D[m], st.variant) - config.bs_power[m]))
                worst["relay power equality"] = max(
                    worst["relay power equality"],
                    abs(relay_power(g, st.D[m], st.Dp[m], st.variant) - config.relay_power[m]))
                direct = mutual_information(
                    end_to_end_link(ch, st.P, st.W, m, noise.relay, noise.users[m]))
                worst["end-to-end equivalence"] = max(
                    worst["end-to-end equivalence"], abs(direct - est.mutual_info_[m]))
                if method == "alg1":
                    K = anomax_kernel(g, signal_block(g, st.D[m]))
                    KK = K.conj().T @ K
                    cp = vec(st.Dp[m])
                    worst["anomax optimality"] = max(
                        worst["anomax optimality"],
                        _probe_gap(KK, np.eye(len(cp)), cp, rng, n_probe))
                elif method == "alg2":
                    # the final BS matrix answered the previous relay matrix,
                    # so re-run the update against the final one
                    Db = anmwon_bs_update(g, st.Dp[m], config.bs_power[m])
                    A, Rb = anmwon_problem(g, st.Dp[m])
                    worst["bs eigen-update optimality"] = max(
                        worst["bs eigen-update optimality"],
                        _probe_gap(A, Rb, vec(Db), rng, n_probe))
                    A, Kt, _ = ecg2engr_problem(g, st.D[m], noise.relay, noise.users[m])
                    worst["relay eigen-update optimality"] = max(
                        worst["relay eigen-update optimality"],
                        _probe_gap(A, Kt, vec(st.Dp[m]), rng, n_probe))
        ps = p2psa_precoders(ch, config)
        single = ch.regroup((1,) * config.n)
        worst["leakage (p2psa, diagonal)"] = max(
            worst["leakage (p2psa, diagonal)"],
            interference_leakage(single, ps.P, ps.W, ps.W_blocks))

    tols = {
        "leakage (bsa schemes)": 1e-9,
        "leakage (p2psa, diagonal)": 1e-9,
        "bs power equality": 1e-9,
        "relay power equality": 1e-9,
        "end-to-end equivalence": 1e-9,
        "anomax optimality": 1e-9,
        "bs eigen-update optimality": 1e-9,
        "relay eigen-update optimality": 1e-9,
    }
    return [CheckResult(k, v, tols[k]) for k, v in worst.items()]
