"""Closed-form Gaussian machinery: normal conditioning, GP priors and posterior
updates (recursive and batch), additive noise, and parametric weight-space
models with their pushforward GPs.

Floating point throughout.  Linear solves go through Cholesky factors; a
single diagonal jitter of ``1e-10 * trace / n`` is tried before a matrix is
declared singular.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import LinAlgError, cho_factor, cho_solve

from .errors import (
    BadVariance,
    DegenerateGram,
    DegenerateUpdate,
    DependentBasis,
    InvalidGaussian,
    SingularBlock,
    SingularPrior,
)

SYM_RTOL = 1e-12
PSD_RTOL = 1e-10
PSD_ATOL = 1e-12
JITTER_SCALE = 1e-10
MAX_COND = 1e12
MIN_EFFECTIVE_VAR = 1e-12
DUPLICATE_DIST = 1e-12


def as_points(points) -> np.ndarray:
    """Inputs as an ``(n, d)`` float array; scalars count as 1-d points."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 0:
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        return arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"points must be at most 2-d, got shape {arr.shape}")
    return arr


def as_point(x) -> np.ndarray:
    return np.atleast_1d(np.asarray(x, dtype=float)).ravel()


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Gaussian:
    mean: np.ndarray
    cov: np.ndarray
    jitter: float = 0.0

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        n = mean.shape[0]
        if mean.ndim != 1 or cov.shape != (n, n):
            raise InvalidGaussian(f"mean shape {mean.shape} and cov shape {cov.shape} disagree")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise InvalidGaussian("non-finite entries")
        scale = max(1.0, float(np.max(np.abs(cov)))) if n else 1.0
        if np.max(np.abs(cov - cov.T), initial=0.0) > SYM_RTOL * scale:
            raise InvalidGaussian("covariance is not symmetric")
        cov = 0.5 * (cov + cov.T)
        if n:
            eig = np.linalg.eigvalsh(cov)
            norm = float(np.max(np.abs(eig)))
            if eig[0] < -(PSD_RTOL * norm + PSD_ATOL):
                raise InvalidGaussian(f"covariance not PSD (min eigenvalue {eig[0]:.3e})")
        object.__setattr__(self, "mean", _frozen(mean))
        object.__setattr__(self, "cov", _frozen(cov))

    @property
    def dim(self) -> int:
        return self.mean.shape[0]

    @property
    def var(self) -> np.ndarray:
        return np.diag(self.cov).copy()

    def marginal(self, idx: Sequence[int]) -> "Gaussian":
        idx = list(idx)
        return Gaussian(self.mean[idx], self.cov[np.ix_(idx, idx)])


def _cholesky(mat: np.ndarray, error, what: str):
    """Cholesky factor of ``mat``, retrying once with diagonal jitter.

    Returns ``(factor, jitter)``; raises ``error`` if both attempts fail or the
    matrix stays too ill conditioned.
    """
    n = mat.shape[0]

    def attempt(m):
        try:
            fac = cho_factor(m, lower=True, check_finite=True)
        except LinAlgError:
            return None
        if np.linalg.cond(m) >= MAX_COND:
            return None
        return fac

    fac = attempt(mat)
    if fac is not None:
        return fac, 0.0
    jitter = JITTER_SCALE * float(np.trace(mat)) / n
    if jitter > 0:
        fac = attempt(mat + jitter * np.eye(n))
        if fac is not None:
            return fac, jitter
    raise error(f"{what} is singular or not positive definite")


def gaussian_condition(joint: Gaussian, observed) -> Gaussian:
    """Condition ``joint`` on its leading block taking the value ``observed``.

    The joint is split as (block 1, block 2) with block 1 the first
    ``len(observed)`` coordinates; the result is the law of block 2.
    """
    x = as_point(observed)
    k = x.shape[0]
    if not 0 < k < joint.dim:
        raise ValueError(f"cannot observe {k} of {joint.dim} coordinates")
    mu1, mu2 = joint.mean[:k], joint.mean[k:]
    s11 = joint.cov[:k, :k]
    s12 = joint.cov[:k, k:]
    s22 = joint.cov[k:, k:]
    fac, jitter = _cholesky(s11, SingularBlock, "observed covariance block")
    solved = cho_solve(fac, np.column_stack([x - mu1, s12]))
    mean = mu2 + s12.T @ solved[:, 0]
    cov = s22 - s12.T @ solved[:, 1:]
    return Gaussian(mean, 0.5 * (cov + cov.T), jitter)


# ---------------------------------------------------------------------------
# basis functions


@dataclass(frozen=True)
class Monomial:
    """Product of the listed input coordinates; the empty product is 1."""

    indices: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(int(i) for i in self.indices))

    @property
    def dim(self) -> int:
        return max(self.indices, default=-1) + 1

    def __call__(self, x) -> float:
        x = as_point(x)
        return float(np.prod([x[i] for i in self.indices]))

    def design(self, X: np.ndarray) -> np.ndarray:
        X = as_points(X)
        out = np.ones(X.shape[0])
        for i in self.indices:
            out = out * X[:, i]
        return out

    def to_dict(self):
        return {"monomial": list(self.indices)}


def affine_basis(n: int) -> tuple:
    """``x_1, ..., x_n, 1``."""
    return tuple(Monomial((j,)) for j in range(n)) + (Monomial(()),)


def elliptic_basis(n: int, full: bool = False) -> tuple:
    """Linear terms, quadratic terms and a constant.

    With ``full=True`` every ordered pair ``x_j x_k`` appears, giving
    ``n**2 + n + 1`` functions; for ``n > 1`` the mixed terms then occur twice
    and the basis is linearly dependent.  The default keeps ``j <= k`` only.
    """
    quad = [
        Monomial((j, k))
        for j in range(n)
        for k in range(n)
        if full or j <= k
    ]
    return tuple(Monomial((j,)) for j in range(n)) + tuple(quad) + (Monomial(()),)


def design_matrix(basis: Sequence[Monomial], points) -> np.ndarray:
    X = as_points(points)
    return np.column_stack([f.design(X) for f in basis]) if basis else np.zeros((X.shape[0], 0))


def basis_from_dict(items) -> tuple:
    return tuple(Monomial(tuple(d["monomial"])) for d in items)


# ---------------------------------------------------------------------------
# mean functions


@dataclass(frozen=True)
class ZeroMean:
    def vector(self, X) -> np.ndarray:
        return np.zeros(as_points(X).shape[0])

    def __call__(self, x) -> float:
        return float(self.vector([as_point(x)])[0])

    def to_dict(self):
        return {"family": "zero"}


@dataclass(frozen=True)
class ConstantMean:
    c: float

    def vector(self, X) -> np.ndarray:
        return np.full(as_points(X).shape[0], float(self.c))

    def __call__(self, x) -> float:
        return float(self.c)

    def to_dict(self):
        return {"family": "constant", "c": float(self.c)}


@dataclass(frozen=True)
class LinearMean:
    w: tuple
    b: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "w", tuple(float(v) for v in np.atleast_1d(self.w)))

    def vector(self, X) -> np.ndarray:
        return as_points(X) @ np.asarray(self.w) + float(self.b)

    def __call__(self, x) -> float:
        return float(self.vector([as_point(x)])[0])

    def to_dict(self):
        return {"family": "linear", "w": list(self.w), "b": float(self.b)}


@dataclass(frozen=True)
class BasisMean:
    """``sum_j weights[j] * basis[j](x)``."""

    basis: tuple
    weights: tuple

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(v) for v in self.weights))

    def vector(self, X) -> np.ndarray:
        return design_matrix(self.basis, X) @ np.asarray(self.weights)

    def __call__(self, x) -> float:
        return float(self.vector([as_point(x)])[0])

    def to_dict(self):
        return {
            "family": "basis",
            "basis": [f.to_dict() for f in self.basis],
            "weights": list(self.weights),
        }


def mean_from_dict(d: dict):
    family = d.get("family")
    if family == "zero":
        return ZeroMean()
    if family == "constant":
        return ConstantMean(float(d["c"]))
    if family == "linear":
        return LinearMean(tuple(d["w"]), float(d.get("b", 0.0)))
    if family == "basis":
        return BasisMean(basis_from_dict(d["basis"]), tuple(d["weights"]))
    raise ValueError(f"unknown mean family {family!r}")


# ---------------------------------------------------------------------------
# covariance functions


class _Cov:
    def matrix(self, X, Z=None) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x, z) -> float:
        return float(self.matrix([as_point(x)], [as_point(z)])[0, 0])


@dataclass(frozen=True)
class SquaredExponential(_Cov):
    variance: float = 1.0
    lengthscale: float = 1.0

    def __post_init__(self):
        if not (self.variance > 0 and self.lengthscale > 0):
            raise BadVariance("squared-exponential parameters must be positive")

    def matrix(self, X, Z=None):
        X = as_points(X)
        Z = X if Z is None else as_points(Z)
        d2 = np.sum((X[:, None, :] - Z[None, :, :]) ** 2, axis=-1)
        return self.variance * np.exp(-0.5 * d2 / self.lengthscale**2)

    def to_dict(self):
        return {
            "family": "squared-exponential",
            "variance": float(self.variance),
            "lengthscale": float(self.lengthscale),
        }


@dataclass(frozen=True)
class DotProduct(_Cov):
    """``phi(x)^T weight_cov phi(z)`` with ``phi`` the basis evaluations."""

    basis: tuple
    weight_cov: tuple

    def __post_init__(self):
        cov = np.atleast_2d(np.asarray(self.weight_cov, dtype=float))
        p = len(self.basis)
        if cov.shape != (p, p):
            raise InvalidGaussian(f"weight covariance must be {p}x{p}")
        object.__setattr__(self, "weight_cov", tuple(tuple(r) for r in cov.tolist()))

    def matrix(self, X, Z=None):
        PX = design_matrix(self.basis, X)
        PZ = PX if Z is None else design_matrix(self.basis, Z)
        return PX @ np.asarray(self.weight_cov) @ PZ.T

    def to_dict(self):
        return {
            "family": "dot-product",
            "basis": [f.to_dict() for f in self.basis],
            "weight_cov": [list(r) for r in self.weight_cov],
        }


@dataclass(frozen=True)
class ConstantCov(_Cov):
    c: float

    def __post_init__(self):
        if not self.c >= 0:
            raise BadVariance("constant covariance must be non-negative")

    def matrix(self, X, Z=None):
        X = as_points(X)
        Z = X if Z is None else as_points(Z)
        return np.full((X.shape[0], Z.shape[0]), float(self.c))

    def to_dict(self):
        return {"family": "constant", "c": float(self.c)}


@dataclass(frozen=True)
class WhiteNoise(_Cov):
    """``variance`` when the two inputs are the same point, else 0."""

    variance: float

    def __post_init__(self):
        if not self.variance >= 0:
            raise BadVariance(f"noise variance must be >= 0, got {self.variance}")

    def matrix(self, X, Z=None):
        X = as_points(X)
        Z = X if Z is None else as_points(Z)
        same = np.all(X[:, None, :] == Z[None, :, :], axis=-1)
        return self.variance * same.astype(float)

    def to_dict(self):
        return {"family": "white-noise", "variance": float(self.variance)}


@dataclass(frozen=True)
class SumCov(_Cov):
    terms: tuple

    def matrix(self, X, Z=None):
        X = as_points(X)
        Z = X if Z is None else as_points(Z)
        out = np.zeros((X.shape[0], Z.shape[0]))
        for t in self.terms:
            out = out + t.matrix(X, Z)
        return out

    def to_dict(self):
        return {"family": "sum", "terms": [t.to_dict() for t in self.terms]}


def cov_from_dict(d: dict):
    family = d.get("family")
    if family == "squared-exponential":
        return SquaredExponential(float(d.get("variance", 1.0)), float(d.get("lengthscale", 1.0)))
    if family == "dot-product":
        return DotProduct(basis_from_dict(d["basis"]), tuple(map(tuple, d["weight_cov"])))
    if family == "constant":
        return ConstantCov(float(d["c"]))
    if family == "white-noise":
        return WhiteNoise(float(d["variance"]))
    if family == "sum":
        return SumCov(tuple(cov_from_dict(t) for t in d["terms"]))
    raise ValueError(f"unknown covariance family {family!r}")


def add_noise(cov, noise_var: float) -> SumCov:
    """``kappa = k + white noise``."""
    if noise_var < 0:
        raise BadVariance(f"noise variance must be >= 0, got {noise_var}")
    return SumCov((cov, WhiteNoise(float(noise_var))))


# ---------------------------------------------------------------------------
# Gaussian processes


@dataclass(frozen=True)
class GpState:
    """GP prior ``GP(mean, cov)`` with observation noise ``noise_var`` and the
    measurements absorbed so far.  Posterior queries replay ``data``."""

    mean: object = field(default_factory=ZeroMean)
    cov: object = field(default_factory=SquaredExponential)
    noise_var: float = 0.0
    data: tuple = ()

    def __post_init__(self):
        if self.noise_var < 0:
            raise BadVariance(f"noise variance must be >= 0, got {self.noise_var}")
        data = tuple((tuple(map(float, as_point(x))), float(y)) for x, y in self.data)
        object.__setattr__(self, "data", data)

    @property
    def inputs(self) -> np.ndarray:
        return np.array([x for x, _ in self.data], dtype=float)

    @property
    def outputs(self) -> np.ndarray:
        return np.array([y for _, y in self.data], dtype=float)

    def to_dict(self):
        return {
            "mean": self.mean.to_dict(),
            "cov": self.cov.to_dict(),
            "noise_var": float(self.noise_var),
            "data": [[list(x), y] for x, y in self.data],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            mean_from_dict(d.get("mean", {"family": "zero"})),
            cov_from_dict(d.get("cov", {"family": "squared-exponential"})),
            float(d.get("noise_var", 0.0)),
            tuple((x, y) for x, y in d.get("data", [])),
        )


def _has_duplicates(X: np.ndarray) -> bool:
    if X.shape[0] < 2:
        return False
    d = np.sqrt(np.sum((X[:, None, :] - X[None, :, :]) ** 2, axis=-1))
    d[np.diag_indices_from(d)] = np.inf
    return bool(np.min(d) <= DUPLICATE_DIST)


def gp_prior_marginal(gp: GpState, points, jitter: bool = False) -> Gaussian:
    """Law of the noisy values at ``points``: ``N(m(X), k(X, X) + noise I)``."""
    X = as_points(points)
    cov = gp.cov.matrix(X) + gp.noise_var * np.eye(X.shape[0])
    applied = 0.0
    if gp.noise_var == 0 and _has_duplicates(X):
        if not jitter:
            raise DegenerateGram("repeated input points without observation noise")
        applied = JITTER_SCALE * float(np.trace(cov)) / X.shape[0]
        cov = cov + applied * np.eye(X.shape[0])
    return Gaussian(gp.mean.vector(X), cov, applied)


def _latent_prior(gp: GpState, X: np.ndarray) -> Gaussian:
    return Gaussian(gp.mean.vector(X), gp.cov.matrix(X))


def gp_posterior_recursive(gp: GpState, query, observed: bool = False) -> Gaussian:
    """Posterior at ``query`` by absorbing measurements one at a time.

    Each step applies the rank-one update
    ``m(z) += k(z,x) / (k(x,x) + s2) * (y - m(x))`` and
    ``k(w,z) -= k(w,x) k(x,z) / (k(x,x) + s2)`` on the joint point set of
    measurement inputs and query points.
    """
    Z = as_points(query)
    n = len(gp.data)
    P = np.vstack([gp.inputs.reshape(n, Z.shape[1]), Z]) if n else Z
    m = gp.mean.vector(P)
    C = gp.cov.matrix(P)
    for i, (_, y) in enumerate(gp.data):
        denom = C[i, i] + gp.noise_var
        if denom <= MIN_EFFECTIVE_VAR:
            raise DegenerateUpdate(f"effective variance {denom:.3e} at measurement {i}")
        col = C[:, i].copy()
        m = m + col * ((y - m[i]) / denom)
        C = C - np.outer(col, col) / denom
    mean = m[n:]
    cov = C[n:, n:]
    cov = 0.5 * (cov + cov.T)
    if observed:
        cov = cov + gp.noise_var * np.eye(Z.shape[0])
    return Gaussian(mean, cov)


def gp_update_one(gp: GpState, x, y: float) -> GpState:
    """Absorb one measurement ``(x, y)``; the effective variance at ``x`` must be
    positive."""
    x = as_point(x)
    current = gp_posterior_recursive(gp, [x])
    eff = float(current.cov[0, 0]) + gp.noise_var
    if eff <= MIN_EFFECTIVE_VAR:
        raise DegenerateUpdate(f"effective variance {eff:.3e} at {x.tolist()}")
    return replace(gp, data=gp.data + ((tuple(x), float(y)),))


def gp_posterior_batch(gp: GpState, query, observed: bool = False) -> Gaussian:
    """Posterior at ``query`` from the closed-form batch expressions, solved
    through a Cholesky factor of ``K(X0, X0) + noise I``."""
    Z = as_points(query)
    if not gp.data:
        prior = _latent_prior(gp, Z)
        if observed:
            return Gaussian(prior.mean, prior.cov + gp.noise_var * np.eye(Z.shape[0]))
        return prior
    X0 = gp.inputs.reshape(len(gp.data), Z.shape[1])
    gram = gp.cov.matrix(X0) + gp.noise_var * np.eye(X0.shape[0])
    fac, jitter = _cholesky(gram, DegenerateGram, "Gram matrix")
    resid = gp.outputs - gp.mean.vector(X0)
    Kzx = gp.cov.matrix(Z, X0)
    solved = cho_solve(fac, np.column_stack([resid, Kzx.T]))
    mean = gp.mean.vector(Z) + Kzx @ solved[:, 0]
    cov = gp.cov.matrix(Z) - Kzx @ solved[:, 1:]
    cov = 0.5 * (cov + cov.T)
    if observed:
        cov = cov + gp.noise_var * np.eye(Z.shape[0])
    return Gaussian(mean, cov, jitter)


def gp_curve(gp: GpState, grid, method: str = "batch") -> np.ndarray:
    """Rows ``(z, mean, mean - 2 sd, mean + 2 sd)`` of the latent posterior."""
    Z = as_points(grid)
    post = (gp_posterior_batch if method == "batch" else gp_posterior_recursive)(gp, Z)
    sd = np.sqrt(np.clip(post.var, 0.0, None))
    return np.column_stack([Z[:, 0], post.mean, post.mean - 2 * sd, post.mean + 2 * sd])


# ---------------------------------------------------------------------------
# parametric models


def _check_independent(basis, dim: int):
    p = len(basis)
    rng = np.random.default_rng(0)
    probe = rng.uniform(-2.0, 2.0, size=(max(4 * p, 20), max(dim, 1)))
    Phi = design_matrix(basis, probe)
    s = np.linalg.svd(Phi, compute_uv=False)
    if s.size < p or s[-1] <= 1e-8 * s[0]:
        raise DependentBasis("basis functions are linearly dependent on the probe grid")


@dataclass(frozen=True)
class ParametricModel:
    """Weights ``a ~ prior`` on ``R^p`` define ``F_a(x) = sum_j a_j f_j(x)``;
    measurements add ``N(0, noise_var)``."""

    basis: tuple
    prior: Gaussian
    noise_var: float = 0.0
    check_independence: bool = True

    def __post_init__(self):
        object.__setattr__(self, "basis", tuple(self.basis))
        if self.prior.dim != len(self.basis):
            raise InvalidGaussian(
                f"prior has dimension {self.prior.dim} for {len(self.basis)} basis functions"
            )
        if self.noise_var < 0:
            raise BadVariance(f"noise variance must be >= 0, got {self.noise_var}")
        if self.check_independence:
            _check_independent(self.basis, self.input_dim)

    @property
    def p(self) -> int:
        return len(self.basis)

    @property
    def input_dim(self) -> int:
        return max((f.dim for f in self.basis), default=0) or 1


def parametric_pushforward(model: ParametricModel) -> GpState:
    """The GP obtained by pushing the weight prior through the basis expansion."""
    return GpState(
        BasisMean(model.basis, tuple(model.prior.mean)),
        DotProduct(model.basis, tuple(map(tuple, model.prior.cov))),
        model.noise_var,
    )


def parametric_update_one(model: ParametricModel, x, y: float) -> ParametricModel:
    """Weight posterior after one measurement, as a new model with that prior."""
    phi = design_matrix(model.basis, [as_point(x)])[0]
    m, S = model.prior.mean, model.prior.cov
    Sphi = S @ phi
    s = float(phi @ Sphi) + model.noise_var
    if s <= MIN_EFFECTIVE_VAR:
        raise DegenerateUpdate(f"effective variance {s:.3e} at {as_point(x).tolist()}")
    mean = m + Sphi * ((float(y) - float(phi @ m)) / s)
    cov = S - np.outer(Sphi, Sphi) / s
    return replace(model, prior=Gaussian(mean, 0.5 * (cov + cov.T)))


def parametric_posterior(model: ParametricModel, data) -> Gaussian:
    """Weight-space posterior for the measurements ``[(x, y), ...]``."""
    data = list(data)
    m0, S0 = model.prior.mean, model.prior.cov
    try:
        S0_fac = cho_factor(S0, lower=True)
    except LinAlgError:
        raise SingularPrior("prior covariance is singular") from None
    if not data:
        return model.prior
    X = as_points([as_point(x) for x, _ in data])
    y = np.array([float(v) for _, v in data])
    Phi = design_matrix(model.basis, X)
    s2 = model.noise_var
    if s2 > 0:
        precision = cho_solve(S0_fac, np.eye(model.p)) + Phi.T @ Phi / s2
        fac, _ = _cholesky(precision, DegenerateUpdate, "posterior precision")
        cov = cho_solve(fac, np.eye(model.p))
        mean = cov @ (cho_solve(S0_fac, m0) + Phi.T @ y / s2)
        return Gaussian(mean, 0.5 * (cov + cov.T))
    if len(data) > model.p or _has_duplicates(X):
        raise DegenerateUpdate("noise-free data must be distinct and at most p points")
    G = Phi @ S0 @ Phi.T
    try:
        fac = cho_factor(G, lower=True)
    except LinAlgError:
        raise DegenerateUpdate("noise-free measurements are linearly dependent") from None
    SPt = S0 @ Phi.T
    solved = cho_solve(fac, np.column_stack([y - Phi @ m0, SPt.T]))
    mean = m0 + SPt @ solved[:, 0]
    cov = S0 - SPt @ solved[:, 1:]
    return Gaussian(mean, 0.5 * (cov + cov.T))


def parametric_predict(weights: Gaussian, basis, query) -> Gaussian:
    """Law of ``F_a(z)`` at the query points when ``a ~ weights``."""
    Phi = design_matrix(basis, query)
    cov = Phi @ weights.cov @ Phi.T
    return Gaussian(Phi @ weights.mean, 0.5 * (cov + cov.T))

