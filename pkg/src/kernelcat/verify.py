"""Invariant suites run by ``kernelcat verify`` against a loaded model."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .bayes import infer, posterior, verify_product_rule
from .finite import ZERO, Dist, compose, identity_kernel, marginal
from .gaussian import (
    GpState,
    gaussian_condition,
    gp_posterior_batch,
    gp_posterior_recursive,
    parametric_posterior,
    parametric_predict,
    parametric_pushforward,
    parametric_update_one,
)
from .markov import chain_compose, kalman_joint, kalman_predict, kalman_step, run_filter
from .modelfile import Model, extended_joint, to_jsonable

RECURSION_TOL = 1e-8
NOISE_FREE_VAR_TOL = 1e-10
WEIGHT_FUNCTION_TOL = 1e-8
KALMAN_TOL = 1e-10
N_RANDOM = 20


@dataclass
class Check:
    name: str
    passed: bool
    detail: str

    def as_dict(self):
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def _random_dist_on_support(rng, dist: Dist) -> Dist:
    support = [i for i, w in enumerate(dist.weights) if w]
    raw = [int(v) for v in rng.integers(0, 5, size=len(support))]
    if not any(raw):
        raw[0] = 1
    total = sum(raw)
    weights = [ZERO] * len(dist.space)
    for i, r in zip(support, raw):
        weights[i] = Fraction(r, total)
    return Dist(dist.space, tuple(weights))


def _discrete_checks(objects, rng):
    model = objects["model"]
    claimed = objects["claimed_inference"]
    result = infer(model, objects["fallback"])
    inference = claimed if claimed is not None else result.inference
    resid = verify_product_rule(model, inference)
    yield Check("product_rule", resid == 0, f"max residual {resid}")

    if claimed is None:
        back = posterior(result, result.evidence)
        yield Check("posterior_of_evidence_is_prior", back == model.prior,
                    "posterior(infer(M), P_D) == P_H")
    else:
        zero_ok = all(result.evidence[b] == 0 or claimed.row(b) == result.inference.row(b)
                      for b in model.data.atoms)
        yield Check("claimed_inference_matches", zero_ok,
                    "claimed inference rows agree with the product-rule inverse on the support")

    identity = compose(model.sampling, identity_kernel(model.hypothesis))
    left = compose(identity_kernel(model.data), model.sampling)
    yield Check("identity_laws", identity == model.sampling == left, "S o id == S == id o S")

    worst = ZERO
    for _ in range(N_RANDOM):
        mu = _random_dist_on_support(rng, result.evidence)
        post = posterior(result, mu)
        for i, a in enumerate(model.hypothesis.atoms):
            direct = sum(
                (mu.weights[j] * model.sampling.rows[i][j] * model.prior.weights[i]
                 / result.evidence.weights[j]
                 for j in range(len(model.data)) if mu.weights[j]),
                ZERO,
            )
            worst = max(worst, abs(post[a] - direct))
    yield Check("random_measurements", worst == 0,
                f"{N_RANDOM} seeded measurements, max deviation {worst}")

    base = objects["joint"]
    for name, (domain, _, _) in objects["extensions"].items():
        if domain != base.space:
            continue
        ext = extended_joint(objects, [name])
        keep = list(range(len(base.space.factors)))
        ok = marginal(ext, keep).weights == base.weights
        yield Check(f"extension_marginal[{name}]", ok, "extended joint projects back to J")


def _gp_checks(objects, rng):
    gp: GpState = objects["gp"]
    if gp.data:
        X = gp.inputs
        lo, hi = float(X.min()) - 1.0, float(X.max()) + 1.0
    else:
        X, lo, hi = np.zeros((0, 1)), 0.0, 1.0
    dim = X.shape[1] if X.size else 1
    Z = rng.uniform(lo, hi, size=(N_RANDOM, dim))
    rec = gp_posterior_recursive(gp, Z)
    bat = gp_posterior_batch(gp, Z)
    diff = max(float(np.max(np.abs(rec.mean - bat.mean))), float(np.max(np.abs(rec.cov - bat.cov))))
    yield Check("recursion_vs_batch", diff <= RECURSION_TOL,
                f"max |recursive - batch| {diff:.3e} at {N_RANDOM} seeded points")
    if gp.data and gp.noise_var == 0:
        var = float(np.max(np.abs(gp_posterior_batch(gp, X).var)))
        yield Check("noise_free_interpolation", var <= NOISE_FREE_VAR_TOL,
                    f"max posterior variance at inputs {var:.3e}")
    eig = float(np.min(np.linalg.eigvalsh(bat.cov)))
    yield Check("posterior_psd", eig >= -1e-10, f"min eigenvalue {eig:.3e}")


def _parametric_checks(objects, rng):
    model, data = objects["model"], objects["data"]
    weights = parametric_posterior(model, data)
    gp = parametric_pushforward(model)
    gp = GpState(gp.mean, gp.cov, gp.noise_var, tuple(data))
    Z = rng.uniform(-2.0, 2.0, size=(N_RANDOM, model.input_dim))
    a = parametric_predict(weights, model.basis, Z)
    b = gp_posterior_batch(gp, Z)
    diff = max(float(np.max(np.abs(a.mean - b.mean))), float(np.max(np.abs(a.cov - b.cov))))
    yield Check("weight_space_vs_function_space", diff <= WEIGHT_FUNCTION_TOL,
                f"max deviation {diff:.3e} at {N_RANDOM} seeded points")
    seq = model
    for x, y in data:
        seq = parametric_update_one(seq, x, y)
    diff = max(float(np.max(np.abs(seq.prior.mean - weights.mean))),
               float(np.max(np.abs(seq.prior.cov - weights.cov))))
    yield Check("sequential_vs_batch_weights", diff <= WEIGHT_FUNCTION_TOL, f"max deviation {diff:.3e}")


def _hmm_joint_filter(spec, measurements):
    """Filtering by enumerating every state path (no use of the inference map)."""
    chain = spec.chain
    out = []
    for t in range(len(measurements)):
        weights = {a: ZERO for a in chain.spaces[t].atoms}
        for path in itertools.product(*(s.atoms for s in chain.spaces[: t + 1])):
            w = spec.initial[path[0]]
            for k in range(t):
                w *= chain.transitions[k].prob(path[k + 1], path[k])
            for k in range(t + 1):
                w *= spec.sensors[k].prob(measurements[k], path[k])
            weights[path[t]] += w
        total = sum(weights.values(), ZERO)
        out.append(Dist.from_mapping(chain.spaces[t], {a: w / total for a, w in weights.items()}))
    return out


def _hmm_checks(objects, rng):
    spec, meas = objects["spec"], objects["measurements"]
    chain = spec.chain
    n = len(chain.times)
    ok = all(chain_compose(chain, i, i) == identity_kernel(chain.spaces[i]) for i in range(n))
    for i in range(n):
        for j in range(i, n):
            fold = chain_compose(chain, i, j)
            ok = ok and all(chain_compose(chain, i, j, split=k) == fold for k in range(i, j + 1))
    yield Check("functoriality", ok, "every bracketing agrees and F(t,t) is the identity")
    if meas:
        got = run_filter(spec, meas)
        want = _hmm_joint_filter(spec, meas)
        yield Check("filter_vs_exhaustive_joint", got == want,
                    f"{len(meas)} steps compared exactly against path enumeration")


def _kalman_checks(objects, rng):
    model, meas = objects["model"], objects["measurements"]
    state = model.initial
    worst_cond = worst_text = 0.0
    for y in meas:
        pred = kalman_predict(state, model)
        step = kalman_step(state, model, y)
        cond = gaussian_condition(kalman_joint(pred, model), y)
        worst_cond = max(worst_cond, float(np.max(np.abs(step.mean - cond.mean))),
                         float(np.max(np.abs(step.cov - cond.cov))))
        S = model.H @ pred.cov @ model.H.T + model.R
        K = pred.cov @ model.H.T @ np.linalg.inv(S)
        mean = pred.mean + K @ (np.atleast_1d(y) - model.H @ pred.mean)
        cov = (np.eye(len(mean)) - K @ model.H) @ pred.cov
        worst_text = max(worst_text, float(np.max(np.abs(step.mean - mean))),
                         float(np.max(np.abs(step.cov - cov))))
        state = step
    yield Check("step_is_joint_conditioning", worst_cond <= KALMAN_TOL, f"max deviation {worst_cond:.3e}")
    yield Check("gain_form_agreement", worst_text <= KALMAN_TOL, f"max deviation {worst_text:.3e}")


SUITES = {
    "discrete-bayes": _discrete_checks,
    "gp": _gp_checks,
    "parametric": _parametric_checks,
    "hmm": _hmm_checks,
    "kalman": _kalman_checks,
}


def verify_model(model: Model, seed: int = 42, name: str | None = None) -> dict:
    rng = np.random.default_rng(seed)
    checks = [c.as_dict() for c in SUITES[model.kind](model.objects, rng)]
    report = {"verify_version": 1}
    if name is not None:
        report["model"] = name
    report.update({
        "kind": model.kind,
        "digest": model.digest,
        "seed": seed,
        "checks": to_jsonable(checks),
        "passed": all(c["passed"] for c in checks),
    })
    return report


__all__ = ["verify_model", "Check", "SUITES"]
