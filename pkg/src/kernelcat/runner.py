"""Query execution and report rendering for model files."""
from __future__ import annotations

import csv
import io
import json
from dataclasses import replace
from fractions import Fraction

import numpy as np

from .bayes import (
    conditional_query,
    event_mass,
    factor_event,
    infer,
    posterior,
)
from .errors import KernelcatError, ValidationError
from .finite import Dist
from .gaussian import (
    gp_curve,
    gp_posterior_batch,
    gp_posterior_recursive,
    gp_prior_marginal,
    parametric_posterior,
    parametric_predict,
)
from .markov import run_filter
from .modelfile import Model, _weights, extended_joint, point_list, to_jsonable

REPORT_VERSION = 1
DEFAULT_SEED = 42


class Diagnostics:
    """Collects zero-mass atoms and applied jitter while queries run."""

    def __init__(self):
        self.zero_mass_atoms = {}
        self.jitter = {}

    def note_jitter(self, qid, amount):
        if amount:
            self.jitter[qid] = float(amount)

    def as_dict(self):
        return {"zero_mass_atoms": self.zero_mass_atoms, "jitter": self.jitter}


# ---------------------------------------------------------------------------
# discrete-bayes


def _event(joint: Dist, spec, where):
    if not isinstance(spec, dict):
        raise ValidationError(where, "expected a factor name -> label(s) object")
    try:
        return factor_event(joint.space, spec)
    except KernelcatError as exc:
        raise ValidationError(where, str(exc)) from exc


def _joint_for(objects, q, where):
    return extended_joint(objects, q.get("extend", []), f"{where}.extend", q.get("fallback"))


def _discrete_value(objects, q, where, diag):
    kind = q["type"]
    model = objects["model"]
    if kind == "inference":
        policy = q.get("fallback", objects["fallback"])
        result = infer(model, policy)
        diag.zero_mass_atoms[q.get("id", where)] = list(result.zero_mass_atoms)
        return result.inference
    if kind == "evidence":
        return infer(model).evidence
    if kind == "posterior":
        meas = _weights(model.data, q.get("measurement"), f"{where}.measurement")
        return posterior(infer(model, q.get("fallback", objects["fallback"])), meas)
    if kind == "joint":
        return _joint_for(objects, q, where)
    if kind == "joint_mass":
        joint = _joint_for(objects, q, where)
        return event_mass(joint, _event(joint, q.get("event", {}), f"{where}.event"))
    if kind == "conditional":
        joint = _joint_for(objects, q, where)
        given = _event(joint, q.get("given", {}), f"{where}.given")
        target = _event(joint, q.get("target", {}), f"{where}.target")
        return conditional_query(joint, given, target)
    if kind == "conditional_dist":
        joint = _joint_for(objects, q, where)
        given = _event(joint, q.get("given", {}), f"{where}.given")
        names = [f.name for f in joint.space.factors]
        factor = q.get("factor")
        if names.count(factor) != 1:
            raise ValidationError(f"{where}.factor", f"unknown factor {factor!r}")
        space = joint.space.factors[names.index(factor)]
        labels = q.get("labels", list(space.atoms))
        return {
            a: conditional_query(joint, given, factor_event(joint.space, {factor: a}))
            for a in labels
        }
    if kind == "compare":
        options = q.get("options")
        if not isinstance(options, dict) or len(options) < 2:
            raise ValidationError(f"{where}.options", "need at least two named options")
        values = {
            name: _discrete_value(objects, sub, f"{where}.options.{name}", diag)
            for name, sub in options.items()
        }
        return {**values, "verdict": verdict(values)}
    raise ValidationError(f"{where}.type", f"unknown discrete query {kind!r}")


def verdict(values: dict) -> str:
    """Name of the best option, or a tie statement when every option agrees."""
    distinct = set(values.values())
    if len(distinct) == 1:
        return f"switching identical: {to_jsonable(next(iter(distinct)))}"
    return max(values, key=values.get)


# ---------------------------------------------------------------------------
# Gaussian kinds


def _grid(spec, where):
    if isinstance(spec, dict):
        try:
            start, stop, num = float(spec["start"]), float(spec["stop"]), int(spec["num"])
        except (KeyError, TypeError, ValueError):
            raise ValidationError(where, "grid needs start, stop and num") from None
        return np.linspace(start, stop, num).reshape(-1, 1)
    return np.vstack(point_list(spec, where))


def _gaussian_out(g, qid, diag):
    diag.note_jitter(qid, g.jitter)
    return {"mean": g.mean, "var": g.var, "cov": g.cov}


def _curve_rows(rows, panel):
    return [
        {"panel": panel, "z": r[0], "mean": r[1], "lower": r[2], "upper": r[3]} for r in rows
    ]


def _gp_value(objects, q, where, diag):
    gp = objects["gp"]
    kind = q["type"]
    qid = q.get("id", where)
    if kind == "prior_marginal":
        g = gp_prior_marginal(gp, point_list(q.get("points"), f"{where}.points"),
                              jitter=bool(q.get("jitter", False)))
        return _gaussian_out(g, qid, diag)
    if kind == "posterior":
        pts = point_list(q.get("points"), f"{where}.points")
        method = q.get("method", "batch")
        fn = {"batch": gp_posterior_batch, "recursive": gp_posterior_recursive}.get(method)
        if fn is None:
            raise ValidationError(f"{where}.method", "must be batch or recursive")
        return _gaussian_out(fn(gp, pts, observed=bool(q.get("observed", False))), qid, diag)
    if kind == "curve":
        panel = q.get("panel", "posterior")
        if panel not in ("prior", "posterior"):
            raise ValidationError(f"{where}.panel", "must be prior or posterior")
        state = replace(gp, data=()) if panel == "prior" else gp
        rows = gp_curve(state, _grid(q.get("grid"), f"{where}.grid"), q.get("method", "batch"))
        return {"curve": _curve_rows(rows, panel)}
    raise ValidationError(f"{where}.type", f"unknown gp query {kind!r}")


def _parametric_value(objects, q, where, diag):
    model, data = objects["model"], objects["data"]
    kind = q["type"]
    weights = parametric_posterior(model, data)
    if kind == "weights":
        return _gaussian_out(weights, q.get("id", where), diag)
    if kind == "predict":
        pts = point_list(q.get("points"), f"{where}.points")
        return _gaussian_out(parametric_predict(weights, model.basis, pts), q.get("id", where), diag)
    raise ValidationError(f"{where}.type", f"unknown parametric query {kind!r}")


def _hmm_value(objects, q, where, diag):
    if q["type"] != "filter":
        raise ValidationError(f"{where}.type", f"unknown hmm query {q['type']!r}")
    spec = objects["spec"]
    posts = run_filter(spec, objects["measurements"])
    return [{"time": t, "posterior": p} for t, p in zip(spec.chain.times, posts)]


def _kalman_value(objects, q, where, diag):
    if q["type"] != "filter":
        raise ValidationError(f"{where}.type", f"unknown kalman query {q['type']!r}")
    posts = run_filter(objects["model"], objects["measurements"])
    for k, p in enumerate(posts):
        diag.note_jitter(f"{q.get('id', where)}[{k}]", p.jitter)
    return [{"step": k + 1, "mean": p.mean, "cov": p.cov} for k, p in enumerate(posts)]


HANDLERS = {
    "discrete-bayes": _discrete_value,
    "gp": _gp_value,
    "parametric": _parametric_value,
    "hmm": _hmm_value,
    "kalman": _kalman_value,
}


def run_model(model: Model, seed: int = DEFAULT_SEED, name: str | None = None) -> dict:
    """Execute every query; failures are recorded per query and do not stop
    the remaining ones."""
    diag = Diagnostics()
    results = []
    for i, q in enumerate(model.queries):
        where = f"queries[{i}]"
        entry = {"id": q.get("id", where), "type": q["type"]}
        try:
            entry["value"] = to_jsonable(HANDLERS[model.kind](model.objects, q, where, diag))
        except ValidationError:
            raise
        except (KernelcatError, ValueError) as exc:
            entry["error"] = {"kind": type(exc).__name__, "message": str(exc)}
        results.append(entry)
    report = {"report_version": REPORT_VERSION}
    if name is not None:
        report["model"] = name
    report.update(
        {
            "kind": model.kind,
            "digest": model.digest,
            "seed": seed,
            "results": results,
            "diagnostics": to_jsonable(diag.as_dict()),
        }
    )
    return report


# ---------------------------------------------------------------------------
# rendering


def render_json(report: dict) -> str:
    return json.dumps(report, indent=2, ensure_ascii=False) + "\n"


def _flatten(prefix, value, out):
    if isinstance(value, dict):
        for k, v in value.items():
            _flatten(f"{prefix}.{k}" if prefix else str(k), v, out)
    elif isinstance(value, list):
        for k, v in enumerate(value):
            _flatten(f"{prefix}[{k}]", v, out)
    else:
        out.append((prefix, value))


def render_csv(report: dict) -> str:
    """Curve rows ``panel,z,mean,lower,upper`` when the report holds curves,
    otherwise one ``query,key,value`` row per scalar."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    curves = [
        row
        for r in report["results"]
        if isinstance(r.get("value"), dict) and "curve" in r["value"]
        for row in r["value"]["curve"]
    ]
    if curves:
        writer.writerow(["panel", "z", "mean", "lower", "upper"])
        for row in curves:
            writer.writerow([row["panel"], row["z"], row["mean"], row["lower"], row["upper"]])
        return buf.getvalue()
    writer.writerow(["query", "key", "value"])
    for r in report["results"]:
        flat = []
        _flatten("", r.get("value", r.get("error")), flat)
        for key, value in flat:
            writer.writerow([r["id"], key, value])
    return buf.getvalue()


def render(report: dict, fmt: str = "json") -> str:
    if fmt == "json":
        return render_json(report)
    if fmt == "csv":
        return render_csv(report)
    raise ValueError(f"unknown format {fmt!r}")


def as_fraction(text: str) -> Fraction:
    """Parse a rational string from a report back into a Fraction."""
    return Fraction(text)


__all__ = ["run_model", "render", "render_json", "render_csv", "verdict", "as_fraction"]
