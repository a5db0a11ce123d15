"""Sampling new departure events from a fitted bounded mixture.

Raw draws come from the unbounded Gaussian mixture (component chosen by
mixing weight, then a multivariate normal draw); draws strictly inside
the bounding box are kept, which reproduces the bounded density
exactly.  Accepted feature vectors are expanded back into full traces
on the original sample grid, optionally with the per-event noise levels
sigma_y and sigma_v applied.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .bgmm import BgmModel
from .errors import AcceptanceStall, InvalidFeature
from .traces import FeatureVector, Side, TrajectoryTrace

logger = logging.getLogger(__name__)

DEFAULT_N_GEN = 100_000

# consecutive all-rejected batches tolerated before giving up
STALL_LIMIT = 100

# sub-stream tags so every consumer derives independent deterministic
# generators from one top-level seed
_BATCH_STREAM = 0
_EVENT_STREAM = 1


@dataclass
class SampleBatchReport:
    """Acceptance bookkeeping for one rejection-sampling run."""

    requested: int
    accepted: int
    acceptance_rate: float
    seed: int

    def to_dict(self) -> dict:
        return {
            "requested": self.requested,
            "accepted": self.accepted,
            "acceptance_rate": self.acceptance_rate,
            "seed": self.seed,
        }


def sample_features(
    model: BgmModel,
    n_gen: int = DEFAULT_N_GEN,
    seed: int | np.random.Generator = 0,
) -> tuple[np.ndarray, SampleBatchReport]:
    """Draw from the unbounded mixture and keep in-box samples.

    :param n_gen: raw draws before rejection.
    :param seed: integer seed or an already-derived generator.
    :returns: (accepted samples with shape (n_accepted, d), report).
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    comp = rng.choice(model.K, size=n_gen, p=model.weights)
    z = rng.standard_normal((n_gen, model.dim))
    chol = np.stack([np.linalg.cholesky(c) for c in model.covariances])
    raw = model.means[comp] + np.einsum("nij,nj->ni", chol[comp], z)
    keep = model.bounds.contains(raw, strict=True)
    accepted = raw[keep]
    report = SampleBatchReport(
        requested=n_gen,
        accepted=accepted.shape[0],
        acceptance_rate=accepted.shape[0] / n_gen,
        seed=seed if isinstance(seed, (int, np.integer)) else -1,
    )
    return accepted, report


def regenerate_event(
    xi: FeatureVector | np.ndarray,
    ts: float = 0.1,
    noise: bool = True,
    seed: int | np.random.Generator = 0,
) -> TrajectoryTrace:
    """Expand a feature vector back into a full trace.

    The grid has floor(T / ts) + 1 samples.  Speed is the linear profile
    (plus iid noise of std sigma_v when ``noise``); lateral offset is
    the parabola over the travelled distance implied by that speed
    (plus iid noise of std sigma_y); curvature is the noise-free linear
    profile.
    """
    if not isinstance(xi, FeatureVector):
        xi = FeatureVector.from_array(np.asarray(xi, dtype=float))
    if ts <= 0:
        raise InvalidFeature(f"sample period must be positive, got {ts}")
    # guard against T/ts landing a hair under an integer
    L = int(np.floor(xi.T / ts + 1e-9)) + 1
    if L < 3:
        raise InvalidFeature(f"duration {xi.T} too short for sample period {ts}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    t = np.arange(L) * ts
    v = xi.v_bar + xi.a_bar * (t - xi.T / 2.0)
    if noise and xi.sigma_v > 0:
        v = v + rng.normal(0.0, xi.sigma_v, L)
    x = cumulative_trapezoid(v, dx=ts, initial=0.0)
    d_x = x[-1]
    if d_x <= 0:
        raise InvalidFeature("regenerated speed profile has no forward travel")
    y = xi.d_y * 4.0 * x * (d_x - x) / d_x**2
    if noise and xi.sigma_y > 0:
        y = y + rng.normal(0.0, xi.sigma_y, L)
    rho = xi.rho_0 + (xi.delta_rho / xi.T) * t
    return TrajectoryTrace(ts=ts, y=y, v=v, rho=rho, side=xi.side)


def rejection_sample(
    model: BgmModel,
    count: int,
    seed: int = 0,
    n_gen: int = DEFAULT_N_GEN,
) -> tuple[np.ndarray, SampleBatchReport]:
    """Accumulate at least ``count`` accepted samples in batches.

    Each batch draws from its own sub-stream of ``seed``, so for a fixed
    ``n_gen`` the accepted rows for a smaller ``count`` are a prefix of
    those for a larger one.

    :returns: (first ``count`` accepted rows, report over all batches).
    :raises AcceptanceStall: nothing accepted for 100 consecutive batches.
    """
    accepted: list[np.ndarray] = []
    n_acc = 0
    requested = 0
    stall = 0
    batch = 0
    while n_acc < count:
        rng = np.random.default_rng([seed, _BATCH_STREAM, batch])
        draws, rep = sample_features(model, n_gen=n_gen, seed=rng)
        requested += rep.requested
        if rep.accepted == 0:
            stall += 1
            if stall >= STALL_LIMIT:
                raise AcceptanceStall(
                    f"no accepted samples in {STALL_LIMIT} consecutive batches of {n_gen}"
                )
        else:
            stall = 0
            accepted.append(draws)
            n_acc += draws.shape[0]
        batch += 1
    report = SampleBatchReport(
        requested=requested,
        accepted=n_acc,
        acceptance_rate=n_acc / requested,
        seed=seed,
    )
    return np.concatenate(accepted, axis=0)[:count], report


def event_rng(seed: int, index: int) -> np.random.Generator:
    """Deterministic per-event noise stream derived from one seed."""
    return np.random.default_rng([seed, _EVENT_STREAM, index])


def sample_events(
    model: BgmModel,
    count: int,
    ts: float = 0.1,
    noise: bool = True,
    seed: int = 0,
    n_gen: int = DEFAULT_N_GEN,
) -> tuple[list[TrajectoryTrace], SampleBatchReport]:
    """Sample ``count`` accepted events and expand them into traces.

    :raises AcceptanceStall: nothing accepted for 100 consecutive batches.
    """
    xi_all, report = rejection_sample(model, count, seed=seed, n_gen=n_gen)
    traces = [
        regenerate_event(row, ts=ts, noise=noise, seed=event_rng(seed, i))
        for i, row in enumerate(xi_all)
    ]
    return traces, report
