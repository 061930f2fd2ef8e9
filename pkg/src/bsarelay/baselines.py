"""Reference schemes: point-to-point signal alignment and time sharing."""

from enum import Enum

import numpy as np

from .linalg import hermitian_evd, inv_sqrt_psd
from .precoding import (
    EffectiveLink,
    PrecoderState,
    assemble_network_precoders,
    bs_mutual_information,
    bs_precoder_deterministic,
    compute_geometry,
    end_to_end_link,
    mutual_information,
    relay_precoder_deterministic,
)
from .system import SystemConfig

__all__ = [
    "BaselineKind",
    "p2psa_precoders",
    "p2psa_rates",
    "time_sharing_round",
    "time_sharing_rates",
]


class BaselineKind(str, Enum):
    P2PSA = "p2psa"
    TIME_SHARING = "time-sharing"


def _stream_config(config):
    bs, relay = [], []
    for m, km in enumerate(config.k):
        bs += [config.bs_power[m] / km] * km
        relay += [config.relay_power[m] / km] * km
    return SystemConfig(n=config.n, k=(1,) * config.n, bs_power=bs,
                        relay_power=relay, rate=config.rate)


def p2psa_precoders(ch, config):
    """Fully diagonalizing precoders.

    Every antenna is treated as its own size-one block, so ``H^{-1} G P``
    and ``H^H W H`` come out diagonal. Each user's BS and relay power is
    split equally over its streams.
    """
    scfg = _stream_config(config)
    geom = compute_geometry(ch.regroup(scfg.k))
    D, P_blocks = bs_precoder_deterministic(geom, scfg)
    Dp, W_blocks = relay_precoder_deterministic(geom, D, scfg)
    P, W = assemble_network_precoders(P_blocks, W_blocks)
    return PrecoderState("classic", D, Dp, P, W, P_blocks, W_blocks)


def p2psa_rates(ch, config, noise):
    """Per-user and BS-side mutual information of the P2PSA scheme."""
    state = p2psa_precoders(ch, config)
    mi = [
        mutual_information(end_to_end_link(ch, state.P, state.W, m, noise.relay,
                                           noise.users[m]))
        for m in range(config.m)
    ]
    return state, mi, bs_mutual_information(ch, state.W, noise.relay, noise.bs)


def _single_user_precoders(ch, config, m):
    Hm = ch.H_blocks[m]
    km = Hm.shape[1]
    # BS aligns onto the user's channel: G P = H_m D
    GinvH = np.linalg.solve(ch.G, Hm)
    D = np.sqrt(config.bs_power[m] / km) * inv_sqrt_psd(GinvH.conj().T @ GinvH)
    P = GinvH @ D
    U = hermitian_evd(Hm @ Hm.conj().T).rank_basis(km)
    Tb = U.conj().T @ Hm
    X = Tb @ (D @ D.conj().T + np.eye(km)) @ Tb.conj().T
    gamma = np.sqrt(config.relay_power[m] / np.real(np.trace(X)))
    W = gamma * (U @ U.conj().T)
    return P, W


def time_sharing_round(ch, config, m, noise):
    """Mutual information of user `m` when it alone exchanges with the BS.

    Returns ``(I_user, I_bs)`` in bits for that slot pair. The relay
    amplifies with a scaled projector onto ``range(H_m)`` so the high-SNR
    relay power meets the budget.
    """
    P, W = _single_user_precoders(ch, config, m)
    Hm = ch.H_blocks[m]
    V = Hm.conj().T @ W
    link = EffectiveLink(
        V @ ch.G @ P,
        noise.relay ** 2 * (V @ V.conj().T) + noise.users[m] ** 2 * np.eye(Hm.shape[1]),
    )
    i_user = mutual_information(link)
    i_bs = bs_mutual_information(ch, W, noise.relay, noise.bs, H=Hm)
    return i_user, i_bs


def time_sharing_rates(ch, config, noise):
    """Per-user rates and the time-averaged two-phase sum rate.

    Each user gets ``1/M`` of the time, so its outage threshold is
    ``2 M K_m R`` and the sum rate is averaged over the ``M`` rounds.
    """
    rounds = [time_sharing_round(ch, config, m, noise) for m in range(config.m)]
    mi = [r[0] for r in rounds]
    sum_rate = sum(0.5 * (iu + ib) for iu, ib in rounds) / config.m
    thresholds = [config.m * config.outage_threshold(m) for m in range(config.m)]
    return mi, sum_rate, thresholds
