"""Block signal alignment precoders at the base station and relay.

The BS precoder makes ``H^{-1} G P`` block diagonal and the relay precoder
makes ``H^H W H`` block diagonal, so after self-interference removal user
``m`` sees only its own ``K_m`` streams through the effective channel
``F_m = B_m A_m`` with ``A_m = T_m D_m`` and ``B_m = Tbar_m^H D'_m Tbar_m``.
"""

from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from .linalg import hermitian_evd, inv_sqrt_psd, null_projector

__all__ = [
    "UserLinkGeometry",
    "PrecoderState",
    "EffectiveLink",
    "compute_geometry",
    "bs_precoder_deterministic",
    "relay_precoder_deterministic",
    "relay_power",
    "bs_power",
    "signal_block",
    "bs_component",
    "relay_component",
    "assemble_network_precoders",
    "effective_link",
    "end_to_end_link",
    "mutual_information",
    "bs_mutual_information",
    "interference_leakage",
    "off_block_mass",
]

MAX_BLOCK_COND = 1e10


@dataclass(frozen=True)
class UserLinkGeometry:
    """Channel-derived matrices for one user.

    Attributes
    ----------
    Gp : ndarray
        ``K_m x N`` row block of ``G' = H^{-1} G``.
    Q : ndarray
        Projector removing the other users' rows of ``G'``.
    T : ndarray
        ``Gp Q Gp^H``.
    Qp : ndarray
        Projector removing the other users' channel columns.
    U1 : ndarray
        ``N x K_m`` orthonormal basis of ``range(Qp)``.
    Tbar : ndarray
        ``U1^H H_m``.
    Ubar1 : ndarray
        ``N x K_m`` orthonormal basis of ``range(Q)``.
    Tbb : ndarray
        ``Gp Ubar1``; the BS-side block of the extended structure.
    """

    Gp: np.ndarray
    Q: np.ndarray
    T: np.ndarray
    Qp: np.ndarray
    U1: np.ndarray
    Tbar: np.ndarray
    Ubar1: np.ndarray
    Tbb: np.ndarray

    @property
    def k(self):
        return self.T.shape[0]


@dataclass
class PrecoderState:
    """Power-normalization matrices plus the assembled network precoders.

    ``variant`` is ``"classic"`` (``P_m = Q_m G'_m^H D_m``) or
    ``"extended"`` (``P_m = Ubar_m1 D_m Ubar_m1^H G'_m^H``).
    """

    variant: str
    D: List[np.ndarray]
    Dp: List[np.ndarray]
    P: np.ndarray
    W: np.ndarray
    P_blocks: Optional[List[np.ndarray]] = None
    W_blocks: Optional[List[np.ndarray]] = None


@dataclass(frozen=True)
class EffectiveLink:
    """Desired-signal matrix and noise covariance seen by one user."""

    F: np.ndarray
    Rn: np.ndarray


def _check_block(M, name):
    if np.linalg.cond(M) > MAX_BLOCK_COND:
        raise np.linalg.LinAlgError(f"{name} is numerically singular")


def compute_geometry(ch):
    """Per-user alignment geometry for a channel realization."""
    G, H = ch.G, ch.H
    if np.linalg.cond(H) > 1e12 or np.linalg.cond(G) > 1e12:
        raise np.linalg.LinAlgError("G and H must be invertible")
    Gp_full = np.linalg.solve(H, G)
    ks = ch.k
    edges = np.concatenate([[0], np.cumsum(ks)])
    out = []
    for m, km in enumerate(ks):
        rows = slice(edges[m], edges[m + 1])
        Gp = Gp_full[rows]
        Gp_other = np.delete(Gp_full, np.arange(edges[m], edges[m + 1]), axis=0)
        Q = null_projector(Gp_other, side="row")
        T = Gp @ Q @ Gp.conj().T
        Qp = null_projector(ch.H_tilde(m), side="column")
        U1 = hermitian_evd(Qp).rank_basis(km)
        Tbar = U1.conj().T @ ch.H_blocks[m]
        Ubar1 = hermitian_evd(Q).rank_basis(km)
        Tbb = Gp @ Ubar1
        for name, M in (("T", T), ("Tbar", Tbar), ("Tbb", Tbb)):
            _check_block(M, f"{name}_{m}")
        out.append(UserLinkGeometry(Gp, Q, T, Qp, U1, Tbar, Ubar1, Tbb))
    return out


def signal_block(geom, D, variant="classic"):
    """Aligned BS-side block ``A_m`` for the given power matrix."""
    if variant == "classic":
        return geom.T @ D
    if variant == "extended":
        return geom.Tbb @ D @ geom.Tbb.conj().T
    raise ValueError(f"unknown variant {variant!r}")


def bs_power(geom, D, variant="classic"):
    """Transmit power ``tr(P_m P_m^H)`` spent on the user at the BS."""
    if variant == "classic":
        return float(np.real(np.trace(geom.T @ D @ D.conj().T)))
    S = geom.Tbb.conj().T @ geom.Tbb
    return float(np.real(np.trace(D.conj().T @ D @ S)))


def _relay_input_cov(geom, A):
    """``Tbar (A A^H + I) Tbar^H``, the high-SNR relay input covariance."""
    k = A.shape[0]
    return geom.Tbar @ (A @ A.conj().T + np.eye(k)) @ geom.Tbar.conj().T


def relay_power(geom, D, Dp, variant="classic"):
    """High-SNR relay power ``tr(D'^H D' Tbar (A A^H + I) Tbar^H)``."""
    X = _relay_input_cov(geom, signal_block(geom, D, variant))
    return float(np.real(np.trace(Dp.conj().T @ Dp @ X)))


def bs_precoder_deterministic(geom, config):
    """Hermitian power matrices ``D_m = sqrt(P_m / K_m) T_m^{-1/2}``.

    Returns the lists ``D`` and ``P_blocks``.
    """
    D, P_blocks = [], []
    for m, g in enumerate(geom):
        Dm = np.sqrt(config.bs_power[m] / g.k) * inv_sqrt_psd(g.T)
        D.append(Dm)
        P_blocks.append(bs_component(g, Dm, "classic"))
    return D, P_blocks


def relay_precoder_deterministic(geom, D, config, variant="classic"):
    """Hermitian relay power matrices meeting the high-SNR power budget.

    ``D'_m = sqrt(P_Rm / K_m) (Tbar (A A^H + I) Tbar^H)^{-1/2}``.
    Returns the lists ``Dp`` and ``W_blocks``.
    """
    Dp, W_blocks = [], []
    for m, g in enumerate(geom):
        X = _relay_input_cov(g, signal_block(g, D[m], variant))
        Dpm = np.sqrt(config.relay_power[m] / g.k) * inv_sqrt_psd(X)
        Dp.append(Dpm)
        W_blocks.append(relay_component(g, Dpm))
    return Dp, W_blocks


def bs_component(geom, D, variant="classic"):
    if variant == "classic":
        return geom.Q @ geom.Gp.conj().T @ D
    return geom.Ubar1 @ D @ geom.Ubar1.conj().T @ geom.Gp.conj().T


def relay_component(geom, Dp):
    return geom.U1 @ Dp @ geom.U1.conj().T


def assemble_network_precoders(P_blocks, W_blocks):
    """``P = [P_1 ... P_M]`` and ``W = sum_m W_m``."""
    if len(P_blocks) != len(W_blocks) or not P_blocks:
        raise ValueError("need one BS and one relay block per user")
    n = P_blocks[0].shape[0]
    if any(p.shape[0] != n for p in P_blocks) or any(w.shape != (n, n) for w in W_blocks):
        raise ValueError("precoder blocks are not conformable")
    return np.concatenate(P_blocks, axis=1), np.sum(W_blocks, axis=0)


def effective_link(geom, D, Dp, variant, sigma_r, sigma_m):
    """Factorized per-user link after self-interference removal."""
    B = geom.Tbar.conj().T @ Dp @ geom.Tbar
    F = B @ signal_block(geom, D, variant)
    V = geom.Tbar.conj().T @ Dp
    Rn = sigma_r ** 2 * (V @ V.conj().T) + sigma_m ** 2 * np.eye(geom.k)
    return EffectiveLink(F, Rn)


def end_to_end_link(ch, P, W, m, sigma_r, sigma_m, cols=None):
    """User `m`'s link evaluated directly from ``y_m = H_m^H W (G P s + ...)``.

    `cols` selects the columns of `P` that carry user `m`'s data; by default
    they are the user's own antenna block. Leakage from other users' data
    is not included, it is zero for aligned precoders.
    """
    Hm = ch.H_blocks[m]
    if cols is None:
        start = int(sum(ch.k[:m]))
        cols = slice(start, start + ch.k[m])
    V = Hm.conj().T @ W
    F = V @ ch.G @ P[:, cols]
    Rn = sigma_r ** 2 * (V @ V.conj().T) + sigma_m ** 2 * np.eye(Hm.shape[1])
    return EffectiveLink(F, Rn)


def mutual_information(link):
    """``log2 det(I + F F^H Rn^{-1})`` in bits."""
    try:
        L = np.linalg.cholesky(link.Rn)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError("noise covariance is not positive definite") from exc
    Fw = np.linalg.solve(L, link.F)
    k = Fw.shape[0]
    sign, logdet = np.linalg.slogdet(np.eye(k) + Fw @ Fw.conj().T)
    return max(float(logdet) / np.log(2.0), 0.0)


def bs_mutual_information(ch, W, sigma_r, sigma_bs, H=None):
    """Joint BS-side mutual information of all user uplink streams.

    ``log2 det(I + He He^H R^{-1})`` with ``He = G^H W H`` and
    ``R = sigma_r^2 G^H W W^H G + sigma_bs^2 I``; the BS's own echo is
    assumed cancelled.
    """
    H = ch.H if H is None else H
    V = ch.G.conj().T @ W
    He = V @ H
    Rn = sigma_r ** 2 * (V @ V.conj().T) + sigma_bs ** 2 * np.eye(V.shape[0])
    return mutual_information(EffectiveLink(He, Rn))


def off_block_mass(M, ks):
    """Frobenius mass outside the diagonal blocks relative to the mass inside."""
    edges = np.concatenate([[0], np.cumsum(ks)])
    mask = np.zeros(M.shape, dtype=bool)
    for a, b in zip(edges[:-1], edges[1:]):
        mask[a:b, a:b] = True
    on = np.linalg.norm(M[mask])
    off = np.linalg.norm(M[~mask])
    if off == 0:
        return 0.0
    return float(off / on) if on > 0 else np.inf


def interference_leakage(ch, P, W, W_blocks=None):
    """Worst relative inter-user leakage of a precoder pair.

    Considers the off-block parts of ``H^{-1} G P`` and ``H^H W H`` and, when
    the relay components are given, ``||W_i H_j||`` and ``||H_i^H W_j||``
    for ``i != j`` relative to ``||W_i H_i||`` and ``||H_i^H W_i||``.
    """
    ks = ch.k
    if len(ks) == 1:
        return 0.0
    vals = [
        off_block_mass(np.linalg.solve(ch.H, ch.G @ P), ks),
        off_block_mass(ch.H.conj().T @ W @ ch.H, ks),
    ]
    if W_blocks is not None:
        Hs = ch.H_blocks
        for i, Wi in enumerate(W_blocks):
            on_r = np.linalg.norm(Wi @ Hs[i])
            on_l = np.linalg.norm(Hs[i].conj().T @ Wi)
            for j, Hj in enumerate(Hs):
                if i == j:
                    continue
                vals.append(np.linalg.norm(Wi @ Hj) / on_r)
                vals.append(np.linalg.norm(Hj.conj().T @ Wi) / on_l)
    return float(max(vals))
