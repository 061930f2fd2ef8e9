"""Experiment configuration, Rayleigh channel draws and noise bookkeeping."""

import json
from dataclasses import dataclass, field, fields
from typing import List, NamedTuple, Sequence

import numpy as np

__all__ = [
    "SystemConfig",
    "ChannelSet",
    "RngSpec",
    "NoiseLevels",
    "draw_channels",
    "snr_to_sigma",
    "load_config",
]

MAX_CHANNEL_COND = 1e12


@dataclass(frozen=True)
class SystemConfig:
    """Antenna counts, powers and target rate of one experiment.

    The base station and relay both have ``n`` antennas and the users'
    antenna counts must add up to ``n``. Defaults give the two-user,
    four-antenna setup with unit powers and a 1 bit/channel-use target.
    """

    n: int = 4
    k: Sequence[int] = (2, 2)
    bs_power: Sequence[float] = ()
    relay_power: Sequence[float] = ()
    rate: float = 1.0

    def __post_init__(self):
        k = tuple(int(x) for x in self.k)
        object.__setattr__(self, "k", k)
        m = len(k)
        bs = tuple(float(p) for p in self.bs_power) or (1.0,) * m
        relay = tuple(float(p) for p in self.relay_power) or (1.0,) * m
        object.__setattr__(self, "bs_power", bs)
        object.__setattr__(self, "relay_power", relay)
        if m == 0 or any(x < 1 for x in k):
            raise ValueError("every user needs at least one antenna")
        if sum(k) != self.n:
            raise ValueError(
                f"user antennas sum to {sum(k)} but n={self.n}; "
                "only the square case sum(k) == n is supported")
        if len(bs) != m or len(relay) != m:
            raise ValueError("need one BS power and one relay power per user")
        if min(bs + relay) <= 0:
            raise ValueError("powers must be strictly positive")
        if self.rate <= 0:
            raise ValueError("rate must be positive")

    @property
    def m(self):
        return len(self.k)

    @property
    def offsets(self):
        """Start index of each user's block in the stacked antenna axis."""
        return tuple(np.concatenate([[0], np.cumsum(self.k)[:-1]]).astype(int))

    def user_slice(self, m):
        start = self.offsets[m]
        return slice(start, start + self.k[m])

    def outage_threshold(self, m):
        """Mutual-information threshold ``2 K_m R`` in bits."""
        return 2.0 * self.k[m] * self.rate

    def to_dict(self):
        return {
            "n": self.n,
            "m": self.m,
            "k": list(self.k),
            "bs_power": list(self.bs_power),
            "relay_power": list(self.relay_power),
            "rate": self.rate,
        }


def load_config(path=None, **overrides):
    """Read a :class:`SystemConfig` from a JSON file.

    Recognised keys are ``n``, ``m``, ``k``, ``bs_power``, ``relay_power``
    and ``rate``; missing keys take the defaults. When only ``n`` and ``m``
    are given the antennas are split evenly.
    """
    raw = {}
    if path is not None:
        with open(path) as fh:
            raw = json.load(fh)
    raw.update(overrides)
    known = {f.name for f in fields(SystemConfig)} | {"m"}
    unknown = set(raw) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    m = raw.pop("m", None)
    if "k" not in raw:
        n = int(raw.get("n", 4))
        m = int(m) if m is not None else 2
        if n % m:
            raise ValueError(f"cannot split n={n} antennas evenly over m={m}")
        raw["k"] = [n // m] * m
        raw["n"] = n
    elif m is not None and int(m) != len(raw["k"]):
        raise ValueError("m does not match the length of k")
    if "n" not in raw:
        raw["n"] = int(sum(raw["k"]))
    return SystemConfig(**raw)


class NoiseLevels(NamedTuple):
    """Noise standard deviations at relay, base station and each user."""

    relay: float
    bs: float
    users: tuple

    @classmethod
    def from_snr_db(cls, snr_db, n_users):
        s = snr_to_sigma(snr_db)
        return cls(s, s, (s,) * n_users)


def snr_to_sigma(snr_db):
    """Noise standard deviation for ``SNR = 1 / sigma^2``."""
    return 10.0 ** (-float(snr_db) / 20.0)


class RngSpec(NamedTuple):
    master_seed: int
    trial_index: int

    def generator(self):
        ss = np.random.SeedSequence(
            entropy=int(self.master_seed), spawn_key=(int(self.trial_index),))
        return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization.

    Attributes
    ----------
    G : ndarray
        ``N x N`` base-station-to-relay channel.
    H_blocks : list of ndarray
        ``N x K_m`` user-to-relay channels.
    resamples : int
        Number of rejected (ill-conditioned) draws before this one.
    """

    G: np.ndarray
    H_blocks: List[np.ndarray]
    resamples: int = 0
    H: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "H", np.concatenate(self.H_blocks, axis=1))

    @property
    def k(self):
        return tuple(b.shape[1] for b in self.H_blocks)

    def H_tilde(self, m):
        """Column concatenation of all user channels except user `m`."""
        others = [b for i, b in enumerate(self.H_blocks) if i != m]
        if not others:
            return np.zeros((self.G.shape[0], 0), dtype=complex)
        return np.concatenate(others, axis=1)

    def regroup(self, k):
        """Same channels with the user axis split into blocks of sizes `k`."""
        if sum(k) != self.H.shape[1]:
            raise ValueError("block sizes must add up to the number of columns")
        edges = np.cumsum(k)[:-1]
        return ChannelSet(self.G, np.split(self.H, edges, axis=1), self.resamples)


def _crandn(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def draw_channels(config, rng):
    """Draw i.i.d. ``CN(0, 1)`` channels for one trial.

    Draws whose ``G`` or ``H`` has condition number above ``1e12`` are
    rejected and redrawn from the same stream.
    """
    gen = rng.generator() if isinstance(rng, RngSpec) else rng
    n = config.n
    resamples = 0
    while True:
        G = _crandn(gen, (n, n))
        H = _crandn(gen, (n, n))
        if np.linalg.cond(G) <= MAX_CHANNEL_COND and np.linalg.cond(H) <= MAX_CHANNEL_COND:
            break
        resamples += 1
    edges = np.cumsum(config.k)[:-1]
    return ChannelSet(G, np.split(H, edges, axis=1), resamples)
