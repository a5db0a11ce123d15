"""Bounded Gaussian mixture model over event features.

The density is a Gaussian mixture restricted to a hyper-rectangle:
inside the box it equals sum_k pi_k g_k(xi) divided by the mixture mass
inside the box, sum_k pi_k Z_k, and it is exactly zero outside.  Each
component's box mass Z_k, together with first/second truncated-moment
corrections, enters an extended EM update that de-biases the weighted
sample statistics for the missing probability mass outside the box.

Moment corrections follow the convention

    Z = integral of N(u; mu, Sigma) over the box
    m = mu - E[u | u in box]
    H = Sigma - Cov[u | u in box]

so the M-step update is mean = weighted_mean + m and covariance =
weighted_covariance + H, whose fixed point reproduces the generating
parameters of box-truncated data.
"""

from __future__ import annotations

import enum
import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import logsumexp, ndtr, ndtri
from scipy.stats import qmc

from .errors import (
    DegenerateBounds,
    EmptyComponent,
    EmptyCorpus,
    LaneDepError,
    NonFinite,
    NotEnoughData,
    NumericalUnderflow,
    OutOfBounds,
)
from .traces import Side, feature_matrix

logger = logging.getLogger(__name__)

LOG_2PI = math.log(2.0 * math.pi)

# mass below this is treated as "component has no support inside the box"
Z_UNDERFLOW = 1e-300

# fixed low-discrepancy point budget and scramble seed; both are part of
# the deterministic contract of the quasi-Monte-Carlo moment estimates.
# The budget is sized so that the residual quadrature inconsistency
# between the estimated normalizers and the estimated moment corrections
# stays well below the 1e-4 per-iteration likelihood slack.
QMC_POINTS = 2**16
_QMC_SEED = 20177
_qmc_cache: dict[int, np.ndarray] = {}

# correlations below this are treated as numerically diagonal
_DIAG_EPS = 1e-12


class MomentMethod(str, enum.Enum):
    """Estimator used for truncated moments of one component.

    Closed-form mode evaluates exact 1-D truncated-normal formulas per
    dimension, which is only exact for diagonal covariance; fits run
    with this method therefore constrain component covariances to stay
    diagonal so the likelihood ascent is exact.  QMC mode handles full
    covariance through a fixed deterministic point set.
    """

    CLOSED_FORM_DIAGONAL = "closed-form"
    QUASI_MONTE_CARLO = "qmc"


@dataclass
class HyperRectBounds:
    """Axis-aligned bounding box with strictly ordered edges."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        self.lower = np.atleast_1d(np.asarray(self.lower, dtype=float))
        self.upper = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise DegenerateBounds("bound arrays must be 1-D and equal length")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise NonFinite("bounds contain non-finite values")
        if np.any(self.lower >= self.upper):
            dim = int(np.argmax(self.lower >= self.upper))
            raise DegenerateBounds(
                f"dimension {dim} has empty width: [{self.lower[dim]}, {self.upper[dim]}]"
            )

    @property
    def dim(self) -> int:
        return self.lower.size

    def contains(self, x: np.ndarray, strict: bool = False) -> np.ndarray:
        """Row-wise containment test; closed box by default."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if strict:
            ok = (x > self.lower) & (x < self.upper)
        else:
            ok = (x >= self.lower) & (x <= self.upper)
        return np.all(ok, axis=1)


def compute_bounds(features) -> HyperRectBounds:
    """Component-wise min/max box of a feature corpus.

    :raises EmptyCorpus: fewer than 2 feature vectors.
    :raises DegenerateBounds: some dimension is constant.
    """
    X = feature_matrix(features) if not isinstance(features, np.ndarray) else np.atleast_2d(features)
    if X.shape[0] < 2:
        raise EmptyCorpus(f"bounds need at least 2 feature vectors, got {X.shape[0]}")
    lower = X.min(axis=0)
    upper = X.max(axis=0)
    if np.any(lower >= upper):
        dim = int(np.argmax(lower >= upper))
        raise DegenerateBounds(f"dimension {dim} is constant at {lower[dim]}")
    return HyperRectBounds(lower, upper)


def _std_normal_points(d: int) -> np.ndarray:
    """Cached deterministic low-discrepancy standard-normal point set."""
    if d not in _qmc_cache:
        sob = qmc.Sobol(d, scramble=True, seed=_QMC_SEED)
        p = sob.random(QMC_POINTS)
        p = np.clip(p, 1e-16, 1.0 - 1e-16)
        _qmc_cache[d] = ndtri(p)
    return _qmc_cache[d]


def _phi(z: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _interval_mass(alpha: np.ndarray, beta: np.ndarray) -> np.ndarray:
    """Phi(beta) - Phi(alpha), stable in both tails."""
    upper_tail = alpha > 0
    z = np.where(upper_tail, ndtr(-alpha) - ndtr(-beta), ndtr(beta) - ndtr(alpha))
    return z


def _cholesky(sigma: np.ndarray) -> np.ndarray:
    try:
        return np.linalg.cholesky(sigma)
    except np.linalg.LinAlgError:
        raise NumericalUnderflow("covariance is not positive definite") from None


def truncated_moments(
    mu: np.ndarray,
    sigma: np.ndarray,
    bounds: HyperRectBounds,
    method: MomentMethod = MomentMethod.CLOSED_FORM_DIAGONAL,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Box mass and first/second moment corrections of one Gaussian.

    Closed-form mode applies exact 1-D truncated-normal formulas per
    dimension (exact when Sigma is diagonal; off-diagonal covariance is
    kept but receives no correction).  Quasi-Monte-Carlo mode transforms
    a fixed scrambled low-discrepancy point set through the Gaussian and
    is deterministic for a given dimension.

    :returns: (Z, m, H) with Z the box mass, m = mu - E[u | box] and
        H = Sigma - Cov[u | box].
    :raises NumericalUnderflow: Z below the supported range.
    """
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    sigma = np.atleast_2d(np.asarray(sigma, dtype=float))
    d = mu.size
    if method is MomentMethod.CLOSED_FORM_DIAGONAL:
        var = np.diag(sigma)
        std = np.sqrt(var)
        alpha = (bounds.lower - mu) / std
        beta = (bounds.upper - mu) / std
        z_dim = _interval_mass(alpha, beta)
        if np.any(z_dim < Z_UNDERFLOW):
            raise NumericalUnderflow("component mass inside the box is negligible")
        Z = float(np.prod(z_dim))
        if Z < Z_UNDERFLOW:
            raise NumericalUnderflow("component mass inside the box is negligible")
        pa, pb = _phi(alpha), _phi(beta)
        cond_mean = mu + std * (pa - pb) / z_dim
        cond_var = var * (1.0 + (alpha * pa - beta * pb) / z_dim - ((pa - pb) / z_dim) ** 2)
        m = mu - cond_mean
        H = np.diag(var - cond_var)
        return Z, m, H
    # quasi-Monte-Carlo on the full covariance
    z = _std_normal_points(d)
    L = _cholesky(sigma)
    u = mu + z @ L.T
    inside = np.all((u >= bounds.lower) & (u <= bounds.upper), axis=1)
    n_in = int(inside.sum())
    if n_in < 2:
        raise NumericalUnderflow("component mass inside the box is negligible")
    Z = n_in / z.shape[0]
    u_in = u[inside]
    cond_mean = u_in.mean(axis=0)
    diff = u_in - cond_mean
    cond_cov = diff.T @ diff / n_in
    return float(Z), mu - cond_mean, sigma - cond_cov


@dataclass
class FitInfo:
    """Record of one EM run, stored in the model file's meta block."""

    seed: int
    tol: float
    iterations: int
    final_log_likelihood: float
    bic: float
    converged: bool = True


@dataclass
class BgmModel:
    """Bounded Gaussian mixture with box support.

    ``weights`` are the mixing weights pi_k of the underlying unbounded
    mixture; the bounded density divides by the total box mass
    sum_k pi_k Z_k.  Normalizers are recomputed deterministically from
    the stored parameters (closed form when a covariance is diagonal,
    fixed-point-set QMC otherwise), so a serialization round trip
    reproduces the density exactly.
    """

    weights: np.ndarray
    means: np.ndarray
    covariances: np.ndarray
    bounds: HyperRectBounds
    side: Side | None = None
    fit_info: FitInfo | None = None

    def __post_init__(self):
        self.weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        self.means = np.atleast_2d(np.asarray(self.means, dtype=float))
        self.covariances = np.asarray(self.covariances, dtype=float)
        if self.covariances.ndim == 2:
            self.covariances = self.covariances[None, :, :]
        K, d = self.means.shape
        if self.weights.shape != (K,) or self.covariances.shape != (K, d, d):
            raise LaneDepError(
                f"inconsistent mixture shapes: weights {self.weights.shape}, "
                f"means {self.means.shape}, covariances {self.covariances.shape}"
            )
        if self.bounds.dim != d:
            raise LaneDepError(f"bounds dimension {self.bounds.dim} != feature dimension {d}")
        if np.any(self.weights < 0) or abs(float(self.weights.sum()) - 1.0) > 1e-8:
            raise LaneDepError("mixing weights must be non-negative and sum to 1")
        self._chol = np.stack([_cholesky(c) for c in self.covariances])
        self._log_det = np.array([np.sum(np.log(np.diag(L))) for L in self._chol])
        self._Z = np.array(
            [_canonical_mass(self.means[k], self.covariances[k], self.bounds) for k in range(K)]
        )
        if np.any(self._Z < Z_UNDERFLOW):
            raise NumericalUnderflow("a component has negligible mass inside the box")
        self._log_box_mass = float(np.log(self.weights @ self._Z))

    @property
    def K(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def normalizers(self) -> np.ndarray:
        """Per-component box masses Z_k."""
        return self._Z.copy()

    def component_log_pdf(self, x: np.ndarray) -> np.ndarray:
        """Unbounded Gaussian log densities, shape (n, K)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        out = np.empty((x.shape[0], self.K))
        for k in range(self.K):
            diff = (x - self.means[k]).T
            sol = solve_triangular(self._chol[k], diff, lower=True)
            maha = np.sum(sol * sol, axis=0)
            out[:, k] = -0.5 * (self.dim * LOG_2PI + maha) - self._log_det[k]
        return out

    def log_pdf(self, x: np.ndarray) -> np.ndarray:
        """Log of the bounded density; -inf outside the box."""
        x2 = np.atleast_2d(np.asarray(x, dtype=float))
        log_g = self.component_log_pdf(x2)
        num = logsumexp(log_g + np.log(self.weights), axis=1)
        out = num - self._log_box_mass
        out = np.where(self.bounds.contains(x2), out, -np.inf)
        return out if np.asarray(x).ndim > 1 else float(out[0])

    def pdf(self, x: np.ndarray) -> np.ndarray:
        """Bounded mixture density; exactly 0 outside the box."""
        out = np.exp(self.log_pdf(np.atleast_2d(np.asarray(x, dtype=float))))
        return out if np.asarray(x).ndim > 1 else float(out[0])


def _canonical_mass(mu: np.ndarray, sigma: np.ndarray, bounds: HyperRectBounds) -> float:
    """Deterministic box mass: exact product form if diagonal, else QMC."""
    std = np.sqrt(np.diag(sigma))
    corr = sigma / np.outer(std, std)
    off = corr - np.diag(np.diag(corr))
    method = (
        MomentMethod.CLOSED_FORM_DIAGONAL
        if np.max(np.abs(off)) < _DIAG_EPS
        else MomentMethod.QUASI_MONTE_CARLO
    )
    return truncated_moments(mu, sigma, bounds, method)[0]


def bgm_pdf(xi: np.ndarray, model: BgmModel) -> np.ndarray:
    """Bounded mixture density at one or many points."""
    return model.pdf(xi)


def e_step(features, model: BgmModel) -> np.ndarray:
    """Posterior component responsibilities, one row per feature vector.

    :raises OutOfBounds: some vector lies outside the model box.
    """
    X = feature_matrix(features) if not isinstance(features, np.ndarray) else np.atleast_2d(features)
    ok = model.bounds.contains(X)
    if not np.all(ok):
        raise OutOfBounds(int(np.argmin(ok)))
    log_w = model.component_log_pdf(X) + np.log(model.weights)
    log_norm = logsumexp(log_w, axis=1, keepdims=True)
    return np.exp(log_w - log_norm)


# inner fixed-point settings for the self-consistent M-step
_INNER_TOL = 1e-12
_MAX_INNER = 60

# step halvings tried before an EM iteration falls back to a zero step
_MAX_BACKTRACK = 10


def _solve_component(
    xbar: np.ndarray,
    C: np.ndarray,
    mu0: np.ndarray,
    sigma0: np.ndarray,
    bounds: HyperRectBounds,
    method: MomentMethod,
    cov_floor: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Solve the truncated M-step moment equations for one component.

    The update mean = xbar + m, covariance = C + H is iterated to its
    fixed point, at which the component's truncated mean and covariance
    equal the weighted data moments (xbar, C).  A single application of
    the update is only a first-order step toward that point and can
    leave the likelihood non-monotone near convergence; iterating makes
    the surrounding EM a true ascent.  The corrections contract quickly
    in the well-inside-the-box regime, so the warm start from the
    previous parameters usually converges in a handful of passes.
    """
    mu, sigma = mu0, sigma0
    for _ in range(_MAX_INNER):
        _, m, H = truncated_moments(mu, sigma, bounds, method)
        mu_next = xbar + m
        sigma_next = _floor_covariance(C + H, cov_floor)
        scale = np.sqrt(np.diag(sigma_next))
        d_mu = np.max(np.abs(mu_next - mu) / scale)
        d_sig = np.max(np.abs(sigma_next - sigma) / np.outer(scale, scale))
        mu, sigma = mu_next, sigma_next
        if max(d_mu, d_sig) < _INNER_TOL:
            break
    return mu, sigma


def m_step(
    features,
    responsibilities: np.ndarray,
    bounds: HyperRectBounds,
    prev_means: np.ndarray,
    prev_covariances: np.ndarray,
    method: MomentMethod = MomentMethod.CLOSED_FORM_DIAGONAL,
    cov_floor: float = 1e-8,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Extended maximization step with truncated-moment corrections.

    Each component's mean = weighted mean + m and covariance = weighted
    scatter + H update is solved to self-consistency, warm-started at
    the previous iteration's parameters.  In the untruncated limit (box
    far from all mass) the corrections vanish and the update reduces to
    the classical mixture M-step.

    In closed-form mode the weighted scatter is projected onto its
    diagonal, keeping every covariance in the family for which the
    per-dimension formulas are exact.

    :returns: (eta, means, covariances); eta are bounded-mixture weights.
    :raises EmptyComponent: a component's responsibility mass collapsed.
    """
    X = feature_matrix(features) if not isinstance(features, np.ndarray) else np.atleast_2d(features)
    R = np.asarray(responsibilities, dtype=float)
    N, d = X.shape
    K = R.shape[1]
    w = R.sum(axis=0)
    if np.any(w < 1e-8 * N):
        raise EmptyComponent(f"component {int(np.argmin(w))} has vanishing mass")
    eta = w / N
    means = np.empty((K, d))
    covs = np.empty((K, d, d))
    for k in range(K):
        xbar = R[:, k] @ X / w[k]
        diff = X - xbar
        C = (R[:, k, None] * diff).T @ diff / w[k]
        if method is MomentMethod.CLOSED_FORM_DIAGONAL:
            C = np.diag(np.diag(C))
        means[k], covs[k] = _solve_component(
            xbar, C, prev_means[k], prev_covariances[k], bounds, method, cov_floor
        )
    return eta, means, covs


def _floor_covariance(sigma: np.ndarray, cov_floor: float) -> np.ndarray:
    """Symmetrize and clip eigenvalues from below."""
    sym = 0.5 * (sigma + sigma.T)
    vals, vecs = np.linalg.eigh(sym)
    if vals[0] >= cov_floor:
        return sym
    vals = np.maximum(vals, cov_floor)
    return (vecs * vals) @ vecs.T


def _kmeanspp_seed(X: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ style seeding of component means from the data."""
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Xs = X / scale
    idx = [int(rng.integers(X.shape[0]))]
    d2 = np.sum((Xs - Xs[idx[0]]) ** 2, axis=1)
    for _ in range(1, K):
        total = d2.sum()
        if total <= 0:
            idx.append(int(rng.integers(X.shape[0])))
            continue
        nxt = int(rng.choice(X.shape[0], p=d2 / total))
        idx.append(nxt)
        d2 = np.minimum(d2, np.sum((Xs - Xs[nxt]) ** 2, axis=1))
    return X[idx].copy()


@dataclass
class EmConfig:
    """Settings for one EM run."""

    K: int = 10
    tol: float = 1e-6
    max_iter: int = 500
    cov_floor: float = 1e-8
    seed: int = 0
    moment_method: MomentMethod = MomentMethod.CLOSED_FORM_DIAGONAL


def _mixture_loglik(
    X: np.ndarray,
    eta: np.ndarray,
    means: np.ndarray,
    covs: np.ndarray,
    bounds: HyperRectBounds,
    method: MomentMethod,
) -> tuple[float, np.ndarray]:
    """Bounded-mixture log-likelihood and per-point component log terms."""
    N, d = X.shape
    K = eta.size
    log_eta_gZ = np.empty((N, K))
    for k in range(K):
        Z = truncated_moments(means[k], covs[k], bounds, method)[0]
        L = _cholesky(covs[k])
        diff = (X - means[k]).T
        sol = solve_triangular(L, diff, lower=True)
        maha = np.sum(sol * sol, axis=0)
        log_g = -0.5 * (d * LOG_2PI + maha) - np.sum(np.log(np.diag(L)))
        log_eta_gZ[:, k] = np.log(eta[k]) - np.log(Z) + log_g
    row_norm = logsumexp(log_eta_gZ, axis=1)
    return float(row_norm.sum()), log_eta_gZ


def em_fit(
    features,
    config: EmConfig,
    bounds: HyperRectBounds | None = None,
    side: Side | None = None,
) -> tuple[BgmModel, np.ndarray]:
    """Fit a bounded mixture by the extended EM iteration.

    Bounds default to the component-wise min/max of the corpus.  The
    iteration stops when the log-likelihood changes by less than
    ``config.tol`` between successive iterations.  Closed-form moment
    mode fits diagonal component covariances (the regime in which its
    per-dimension formulas are exact); quasi-Monte-Carlo mode fits full
    covariances.

    :returns: (model, log-likelihood trace, one entry per iteration).
    """
    X = feature_matrix(features) if not isinstance(features, np.ndarray) else np.atleast_2d(features)
    X = np.asarray(X, dtype=float)
    N, d = X.shape
    K = config.K
    if N < K * (d + 1):
        raise NotEnoughData(f"{N} samples cannot support K={K} components in {d}-D")
    if bounds is None:
        bounds = compute_bounds(X)
    ok = bounds.contains(X)
    if not np.all(ok):
        raise OutOfBounds(int(np.argmin(ok)))

    rng = np.random.default_rng(config.seed)
    means = _kmeanspp_seed(X, K, rng)
    base_cov = np.cov(X.T).reshape(d, d)
    if config.moment_method is MomentMethod.CLOSED_FORM_DIAGONAL:
        base_cov = np.diag(np.diag(base_cov))
    base_cov = _floor_covariance(base_cov, config.cov_floor)
    covs = np.repeat(base_cov[None, :, :], K, axis=0)
    eta = np.full(K, 1.0 / K)

    ll, log_eta_gZ = _mixture_loglik(X, eta, means, covs, bounds, config.moment_method)
    if not np.isfinite(ll):
        raise NonFinite("log-likelihood is non-finite at initialization")
    trace: list[float] = [ll]
    converged = False
    while len(trace) < config.max_iter:
        resp = np.exp(log_eta_gZ - logsumexp(log_eta_gZ, axis=1, keepdims=True))
        eta_c, means_c, covs_c = m_step(
            X, resp, bounds, means, covs,
            method=config.moment_method, cov_floor=config.cov_floor,
        )
        # Guarded acceptance.  The self-consistent update solves the
        # moment equations of the configured estimator, which for QMC
        # are not exactly the stationarity conditions of the recorded
        # likelihood; when quadrature error would turn the step into a
        # descent, back the step off toward the current parameters (a
        # zero step reproduces the current likelihood and terminates
        # the iteration through the tolerance check).
        ll_c, lw_c = _mixture_loglik(X, eta_c, means_c, covs_c, bounds, config.moment_method)
        if not (np.isfinite(ll_c) and ll_c >= ll):
            alpha = 1.0
            for _ in range(_MAX_BACKTRACK):
                alpha *= 0.5
                eta_t = eta + alpha * (eta_c - eta)
                means_t = means + alpha * (means_c - means)
                covs_t = covs + alpha * (covs_c - covs)
                ll_t, lw_t = _mixture_loglik(X, eta_t, means_t, covs_t, bounds, config.moment_method)
                if np.isfinite(ll_t) and ll_t >= ll:
                    eta_c, means_c, covs_c, ll_c, lw_c = eta_t, means_t, covs_t, ll_t, lw_t
                    break
            else:
                eta_c, means_c, covs_c, ll_c, lw_c = eta, means, covs, ll, log_eta_gZ
        eta, means, covs = eta_c, means_c, covs_c
        ll, log_eta_gZ = ll_c, lw_c
        trace.append(ll)
        if abs(trace[-1] - trace[-2]) < config.tol:
            converged = True
            break

    if not converged:
        logger.warning("EM did not reach tol=%g within %d iterations", config.tol, config.max_iter)

    # convert bounded-mixture weights back to unbounded mixing weights
    Z_fin = np.array([_canonical_mass(means[k], covs[k], bounds) for k in range(K)])
    pi = eta / Z_fin
    pi = pi / pi.sum()
    model = BgmModel(weights=pi, means=means, covariances=covs, bounds=bounds, side=side)
    model.fit_info = FitInfo(
        seed=config.seed,
        tol=config.tol,
        iterations=len(trace),
        final_log_likelihood=trace[-1],
        bic=bic(model, X),
        converged=converged,
    )
    return model, np.asarray(trace)


def bic(model: BgmModel, features) -> float:
    """Bayesian information criterion -2 L + p ln N for the bounded fit."""
    X = feature_matrix(features) if not isinstance(features, np.ndarray) else np.atleast_2d(features)
    N, d = X.shape
    ll = float(np.sum(model.log_pdf(X)))
    p = (model.K - 1) + model.K * d + model.K * d * (d + 1) // 2
    return -2.0 * ll + p * math.log(N)


def save_model(model: BgmModel, path: str | Path) -> None:
    """Write a model as JSON with the documented field layout."""
    info = model.fit_info
    doc = {
        "side": model.side.value if model.side is not None else None,
        "K": model.K,
        "weights": model.weights.tolist(),
        "means": model.means.tolist(),
        "covariances": model.covariances.tolist(),
        "bounds": {"lower": model.bounds.lower.tolist(), "upper": model.bounds.upper.tolist()},
        "meta": {
            "seed": info.seed if info else None,
            "tol": info.tol if info else None,
            "iterations": info.iterations if info else None,
            "final_log_likelihood": info.final_log_likelihood if info else None,
            "bic": info.bic if info else None,
        },
    }
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def load_model(path: str | Path) -> BgmModel:
    """Read a model written by :func:`save_model`."""
    with open(path) as fh:
        doc = json.load(fh)
    try:
        bounds = HyperRectBounds(np.array(doc["bounds"]["lower"]), np.array(doc["bounds"]["upper"]))
        model = BgmModel(
            weights=np.array(doc["weights"]),
            means=np.array(doc["means"]),
            covariances=np.array(doc["covariances"]),
            bounds=bounds,
            side=Side(doc["side"]) if doc.get("side") else None,
        )
        if doc["K"] != model.K:
            raise LaneDepError(f"{path}: K field ({doc['K']}) disagrees with weights")
    except KeyError as exc:
        raise LaneDepError(f"{path}: missing model field {exc}") from None
    meta = doc.get("meta") or {}
    if meta.get("seed") is not None:
        model.fit_info = FitInfo(
            seed=meta["seed"],
            tol=meta["tol"],
            iterations=meta["iterations"],
            final_log_likelihood=meta["final_log_likelihood"],
            bic=meta["bic"],
        )
    return model
