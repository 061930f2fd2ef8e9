"""Scikit-learn style wrappers around the precoding schemes.

Each scheme is an estimator whose hyper-parameters (method, SNR, system
configuration, stopping rule) are set in ``__init__`` and whose ``fit``
takes one :class:`~bsarelay.system.ChannelSet`. Fitted attributes carry a
trailing underscore, so ``clone``/``get_params`` work as usual:

>>> from bsarelay import BSAPrecoder, RngSpec, SystemConfig, draw_channels
>>> ch = draw_channels(SystemConfig(), RngSpec(0, 0))
>>> est = BSAPrecoder(method="alg2", snr_db=20).fit(ch)
>>> est.mutual_info_.shape
(2,)
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_channel_set, check_config, check_method
from .baselines import p2psa_rates, time_sharing_rates
from .optimizers import DEFAULT_MAX_ITER, DEFAULT_TOL, algorithm1, algorithm2
from .precoding import (
    PrecoderState,
    assemble_network_precoders,
    bs_component,
    bs_mutual_information,
    bs_precoder_deterministic,
    compute_geometry,
    effective_link,
    mutual_information,
    relay_component,
    relay_precoder_deterministic,
)
from .system import NoiseLevels

__all__ = ["BSAPrecoder", "P2PSAPrecoder", "TimeSharingScheme", "SCHEMES", "make_scheme"]


class _SchemeMixin:
    """Shared scoring for fitted schemes."""

    def _noise(self, config):
        return NoiseLevels.from_snr_db(self.snr_db, config.m)

    def outage(self):
        """Per-user outage indicators ``I_m < threshold_m``."""
        check_is_fitted(self, "mutual_info_")
        return self.mutual_info_ < self.thresholds_

    def score(self, X=None, y=None):
        """Two-phase sum rate (bits/channel use) of the fitted realization."""
        check_is_fitted(self, "sum_rate_")
        if X is not None and X is not self.channels_:
            return self.__class__(**self.get_params()).fit(X).sum_rate_
        return self.sum_rate_


class BSAPrecoder(_SchemeMixin, BaseEstimator):
    """Block signal alignment precoders for the BS and the relay.

    Parameters
    ----------
    method : {"deterministic", "alg1", "alg2"}
        ``"deterministic"`` uses the Hermitian closed-form power matrices,
        ``"alg1"`` the MMSE/ANOMAX iteration and ``"alg2"`` the
        generalized-eigenvector iteration on the extended BS structure.
    snr_db : float
        ``1 / sigma^2`` in dB, applied to every receiver.
    config : SystemConfig, optional
        Defaults to ``SystemConfig()``.
    tol, max_iter :
        Stopping rule of the iterative methods (absolute change in bits).
    printed_scaling : bool
        Use ``d / (d^H R d)`` instead of ``d / sqrt(d^H R d)`` when
        normalizing the ``alg2`` updates.

    Attributes
    ----------
    geometry_ : list of UserLinkGeometry
    state_ : PrecoderState
    traces_ : list of IterationTrace or None
    mutual_info_ : ndarray of shape (M,)
    bs_mutual_info_ : float
    sum_rate_ : float
    thresholds_ : ndarray of shape (M,)
    """

    _methods = {"deterministic", "alg1", "alg2"}

    def __init__(self, method="deterministic", snr_db=20.0, config=None,
                 tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER, printed_scaling=False):
        self.method = method
        self.snr_db = snr_db
        self.config = config
        self.tol = tol
        self.max_iter = max_iter
        self.printed_scaling = printed_scaling

    def fit(self, X, y=None):
        method = check_method(self.method, self._methods)
        config = check_config(self.config)
        X = check_channel_set(X, config)
        noise = self._noise(config)
        geom = compute_geometry(X)

        if method == "deterministic":
            variant = "classic"
            traces = None
            D, P_blocks = bs_precoder_deterministic(geom, config)
            Dp, W_blocks = relay_precoder_deterministic(geom, D, config)
        else:
            run = algorithm1 if method == "alg1" else algorithm2
            kwargs = {"printed_scaling": self.printed_scaling} if method == "alg2" else {}
            traces = [
                run(g, noise.relay, noise.users[m], tol=self.tol, max_iter=self.max_iter,
                    bs_power=config.bs_power[m], relay_power=config.relay_power[m], **kwargs)
                for m, g in enumerate(geom)
            ]
            variant = traces[0].variant
            D = [t.D for t in traces]
            Dp = [t.Dp for t in traces]
            P_blocks = [bs_component(g, d, variant) for g, d in zip(geom, D)]
            W_blocks = [relay_component(g, dp) for g, dp in zip(geom, Dp)]

        P, W = assemble_network_precoders(P_blocks, W_blocks)
        self.channels_ = X
        self.geometry_ = geom
        self.traces_ = traces
        self.state_ = PrecoderState(variant, D, Dp, P, W, P_blocks, W_blocks)
        self.mutual_info_ = np.array([
            mutual_information(effective_link(g, D[m], Dp[m], variant,
                                              noise.relay, noise.users[m]))
            for m, g in enumerate(geom)
        ])
        self.bs_mutual_info_ = bs_mutual_information(X, W, noise.relay, noise.bs)
        self.sum_rate_ = 0.5 * (self.mutual_info_.sum() + self.bs_mutual_info_)
        self.thresholds_ = np.array([config.outage_threshold(m) for m in range(config.m)])
        return self


class P2PSAPrecoder(_SchemeMixin, BaseEstimator):
    """Point-to-point signal alignment: fully diagonalizing precoders."""

    def __init__(self, snr_db=20.0, config=None):
        self.snr_db = snr_db
        self.config = config

    def fit(self, X, y=None):
        config = check_config(self.config)
        X = check_channel_set(X, config)
        state, mi, mi_bs = p2psa_rates(X, config, self._noise(config))
        self.channels_ = X
        self.state_ = state
        self.mutual_info_ = np.array(mi)
        self.bs_mutual_info_ = mi_bs
        self.sum_rate_ = 0.5 * (self.mutual_info_.sum() + mi_bs)
        self.thresholds_ = np.array([config.outage_threshold(m) for m in range(config.m)])
        return self


class TimeSharingScheme(_SchemeMixin, BaseEstimator):
    """Round-robin two-way exchange, one user at a time."""

    def __init__(self, snr_db=20.0, config=None):
        self.snr_db = snr_db
        self.config = config

    def fit(self, X, y=None):
        config = check_config(self.config)
        X = check_channel_set(X, config)
        mi, sum_rate, thresholds = time_sharing_rates(X, config, self._noise(config))
        self.channels_ = X
        self.mutual_info_ = np.array(mi)
        self.sum_rate_ = sum_rate
        self.thresholds_ = np.array(thresholds)
        return self


SCHEMES = ("bsa-deterministic", "bsa-alg1", "bsa-alg2", "p2psa", "time-sharing")


def make_scheme(name, snr_db, config=None, **params):
    """Estimator for a scheme name as used on the command line."""
    if name == "bsa-deterministic":
        return BSAPrecoder("deterministic", snr_db, config, **params)
    if name == "bsa-alg1":
        return BSAPrecoder("alg1", snr_db, config, **params)
    if name == "bsa-alg2":
        return BSAPrecoder("alg2", snr_db, config, **params)
    if name == "p2psa":
        return P2PSAPrecoder(snr_db, config)
    if name == "time-sharing":
        return TimeSharingScheme(snr_db, config)
    raise ValueError(f"unknown scheme {name!r}; choose from {', '.join(SCHEMES)}")
