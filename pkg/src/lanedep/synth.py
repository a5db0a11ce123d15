"""Synthetic corpora with known generating parameters.

A ground-truth spec is a bounded Gaussian mixture over the 8 event
features plus trace-synthesis settings.  Corpora drawn from it exercise
the full pipeline with a known answer: sampled feature vectors are
expanded into traces, and extraction of those traces recovers the
sampled vectors (exactly for noise-free synthesis, statistically
otherwise).  Durations are snapped to the trace grid when sampling so
the recorded ground-truth features match what a trace can represent.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .bgmm import BgmModel, HyperRectBounds
from .errors import LaneDepError
from .sampling import DEFAULT_N_GEN, event_rng, regenerate_event, rejection_sample
from .traces import FeatureVector, Side, TrajectoryTrace

logger = logging.getLogger(__name__)

# feature dimensions that change sign under a left/right mirror
_MIRROR_DIMS = (1, 6, 7)  # d_y, rho_0, delta_rho


@dataclass
class GroundTruthSpec:
    """Generating mixture and synthesis settings for one side's corpus."""

    side: Side
    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    bounds: HyperRectBounds
    n: int = 5000
    ts: float = 0.1
    noise: bool = True
    seed: int = 0

    def to_model(self) -> BgmModel:
        """Bounded mixture with the spec's true parameters."""
        return BgmModel(
            weights=np.asarray(self.weights, dtype=float),
            means=np.asarray(self.means, dtype=float),
            covariances=np.asarray(self.covariances, dtype=float),
            bounds=self.bounds,
            side=self.side,
        )

    def mirrored(self) -> "GroundTruthSpec":
        """The same population on the opposite departure side."""
        sign = np.ones(np.asarray(self.means).shape[1])
        sign[list(_MIRROR_DIMS)] = -1.0
        means = np.asarray(self.means, dtype=float) * sign
        covs = np.asarray(self.covariances, dtype=float) * np.outer(sign, sign)
        lower = np.where(sign < 0, -self.bounds.upper, self.bounds.lower)
        upper = np.where(sign < 0, -self.bounds.lower, self.bounds.upper)
        return GroundTruthSpec(
            side=Side.RIGHT if self.side is Side.LEFT else Side.LEFT,
            weights=np.asarray(self.weights, dtype=float).copy(),
            means=means,
            covariances=covs,
            bounds=HyperRectBounds(lower, upper),
            n=self.n,
            ts=self.ts,
            noise=self.noise,
            seed=self.seed,
        )

    def to_dict(self) -> dict:
        return {
            "side": self.side.value,
            "weights": np.asarray(self.weights, dtype=float).tolist(),
            "means": np.asarray(self.means, dtype=float).tolist(),
            "covariances": np.asarray(self.covariances, dtype=float).tolist(),
            "bounds": {
                "lower": self.bounds.lower.tolist(),
                "upper": self.bounds.upper.tolist(),
            },
            "n": self.n,
            "ts": self.ts,
            "noise": self.noise,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "GroundTruthSpec":
        try:
            return cls(
                side=Side(doc["side"]),
                weights=np.array(doc["weights"], dtype=float),
                means=np.array(doc["means"], dtype=float),
                covariances=np.array(doc["covariances"], dtype=float),
                bounds=HyperRectBounds(
                    np.array(doc["bounds"]["lower"], dtype=float),
                    np.array(doc["bounds"]["upper"], dtype=float),
                ),
                n=int(doc.get("n", 5000)),
                ts=float(doc.get("ts", 0.1)),
                noise=bool(doc.get("noise", True)),
                seed=int(doc.get("seed", 0)),
            )
        except KeyError as exc:
            raise LaneDepError(f"ground-truth spec missing field {exc}") from None


def load_synth_spec(path: str | Path) -> GroundTruthSpec:
    """Read a ground-truth spec from a JSON file."""
    path = Path(path)
    if not path.exists():
        raise LaneDepError(f"synth spec file not found: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise LaneDepError(f"{path}: invalid JSON ({exc})") from None
    return GroundTruthSpec.from_dict(doc)


def save_synth_spec(spec: GroundTruthSpec, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_dict(), fh, indent=2)
        fh.write("\n")


def default_synth_spec(side: Side = Side.LEFT) -> GroundTruthSpec:
    """The packaged default population (left side; right is its mirror)."""
    with resources.files("lanedep.data").joinpath("synth_default.json").open() as fh:
        spec = GroundTruthSpec.from_dict(json.load(fh))
    return spec if side is Side.LEFT else spec.mirrored()


def generate_corpus(
    spec: GroundTruthSpec,
    n: int | None = None,
    seed: int | None = None,
) -> tuple[list[TrajectoryTrace], list[FeatureVector]]:
    """Draw a corpus of events from the ground-truth mixture.

    :returns: (traces, features) where ``features`` are the sampled
        ground-truth vectors (durations snapped to the trace grid) in
        the same order as the traces.
    """
    n = spec.n if n is None else n
    seed = spec.seed if seed is None else seed
    if n < 1:
        raise LaneDepError(f"corpus size must be at least 1, got {n}")
    model = spec.to_model()
    rows, _ = rejection_sample(model, n, seed=seed, n_gen=DEFAULT_N_GEN)
    rows = rows.copy()
    rows[:, 0] = np.round(rows[:, 0] / spec.ts) * spec.ts
    traces = []
    features = []
    for i, row in enumerate(rows):
        traces.append(
            regenerate_event(row, ts=spec.ts, noise=spec.noise, seed=event_rng(seed, i))
        )
        features.append(FeatureVector.from_array(row))
    return traces, features
