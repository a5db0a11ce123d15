"""Shared fixtures: a known-truth mixture corpus and a cached CLI pipeline run."""

import contextlib
import io
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from lanedep import GroundTruthSpec, Side, rejection_sample
from lanedep.bgmm import HyperRectBounds
from lanedep.cli import main as cli_main

# ---------------------------------------------------------------------------
# known-truth K=3 mixture over the 8 event features
# [T, d_y, sigma_y, v_bar, a_bar, sigma_v, rho_0, delta_rho]

TRUE_WEIGHTS = np.array([0.5, 0.3, 0.2])

TRUE_MEANS = np.array(
    [
        [2.8, 0.35, 0.030, 15.0, 0.10, 0.15, 4e-4, 2e-4],
        [5.0, 0.55, 0.045, 22.0, -0.05, 0.22, -3e-4, -2e-4],
        [7.2, 0.75, 0.060, 28.0, 0.00, 0.30, 1e-4, 3e-4],
    ]
)

TRUE_STD = np.array(
    [
        [0.40, 0.050, 0.0040, 1.2, 0.05, 0.020, 2.5e-4, 2.0e-4],
        [0.50, 0.060, 0.0050, 1.5, 0.05, 0.025, 2.5e-4, 2.0e-4],
        [0.45, 0.055, 0.0045, 1.4, 0.05, 0.022, 2.5e-4, 2.0e-4],
    ]
)

BOUNDS_LOWER = np.array([1.0, 0.1, 0.01, 10.0, -0.35, 0.05, -1.2e-3, -1.0e-3])
BOUNDS_UPPER = np.array([9.5, 0.95, 0.08, 34.0, 0.35, 0.40, 1.2e-3, 1.0e-3])


def make_ground_truth() -> GroundTruthSpec:
    covs = np.array([np.diag(s**2) for s in TRUE_STD])
    # one mildly correlated pair exercises the full-covariance paths
    covs[0, 0, 1] = covs[0, 1, 0] = 0.25 * TRUE_STD[0, 0] * TRUE_STD[0, 1]
    return GroundTruthSpec(
        side=Side.LEFT,
        weights=TRUE_WEIGHTS.copy(),
        means=TRUE_MEANS.copy(),
        covariances=covs,
        bounds=HyperRectBounds(BOUNDS_LOWER.copy(), BOUNDS_UPPER.copy()),
    )


@pytest.fixture(scope="session")
def ground_truth():
    return make_ground_truth()


@pytest.fixture(scope="session")
def truth_model(ground_truth):
    return ground_truth.to_model()


@pytest.fixture(scope="session")
def corpus_5000(truth_model):
    """N=5000 draws from the known mixture, fixed seed."""
    X, _ = rejection_sample(truth_model, 5000, seed=42)
    return X


# ---------------------------------------------------------------------------
# CLI helpers and the shared end-to-end pipeline run


def run_cli(argv: list[str]) -> tuple[int, str]:
    """Invoke the CLI in-process, capturing stdout."""
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = cli_main(argv)
    return code, buf.getvalue()


def run_pipeline(root: Path) -> dict:
    """synth -> extract -> fit -> sample -> evaluate, timing each stage."""
    timings: dict[str, float] = {}

    def step(name: str, argv: list[str]) -> None:
        t0 = time.perf_counter()
        code, _ = run_cli(argv)
        timings[name] = time.perf_counter() - t0
        assert code == 0, f"pipeline stage {name} exited {code}"

    step("synth", ["synth", "--count", "300", "--side", "both", "--seed", "7",
                   "--out", str(root / "corpus")])
    for side in ("left", "right"):
        step(f"extract_{side}", ["extract", str(root / "corpus" / side / "traces"),
                                 "--out", str(root / f"features_{side}")])
        step(f"fit_{side}", ["fit", str(root / f"features_{side}" / "features.csv"),
                             "-K", "2", "--cov-floor", "1e-12",
                             "--out", str(root / f"model_{side}")])
    step("sample_left", ["sample", str(root / "model_left" / "model.json"),
                         "--count", "200", "--seed", "21", "--out", str(root / "events_left")])
    step("sample_right", ["sample", str(root / "model_right" / "model.json"),
                          "--count", "200", "--seed", "22", "--out", str(root / "events_right")])

    combined = root / "events"
    combined.mkdir()
    for f in sorted((root / "events_left").glob("event_*.csv")):
        shutil.copy(f, combined / f"left_{f.name}")
    for f in sorted((root / "events_right").glob("event_*.csv")):
        shutil.copy(f, combined / f"right_{f.name}")

    step("evaluate", ["evaluate", str(combined), "--threads", "2",
                      "--out", str(root / "report")])
    return timings


@pytest.fixture(scope="session")
def pipeline(tmp_path_factory):
    """One full pipeline run shared by the end-to-end assertions."""
    root = tmp_path_factory.mktemp("pipeline")
    timings = run_pipeline(root)
    return {"root": root, "timings": timings}
