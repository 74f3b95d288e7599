"""JSON model files: parsing, validation and construction of engine objects.

Every referenced label is resolved and every distribution checked before any
query runs.  Failures raise :class:`ParseError` (not JSON) or
:class:`ValidationError` naming the offending field.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

import numpy as np

from .bayes import FALLBACK_POLICIES, BayesModel
from .errors import KernelcatError, ParseError, ValidationError
from .finite import (
    ZERO,
    Dist,
    FiniteSpace,
    Kernel,
    joint_from_prior_and_kernel,
    make_space,
    product_space,
    pushforward,
    tensor_independent,
    to_fraction,
)
from .gaussian import (
    Gaussian,
    GpState,
    Monomial,
    ParametricModel,
    affine_basis,
    as_point,
    elliptic_basis,
)
from .markov import HmmSpec, LinearGaussianModel, MarkovChain

KINDS = ("discrete-bayes", "gp", "parametric", "hmm", "kalman")
FORMAT_VERSION = 1


@dataclass
class Model:
    kind: str
    doc: dict
    queries: list
    objects: dict = field(default_factory=dict)

    @property
    def digest(self) -> str:
        canon = json.dumps(self.doc, sort_keys=True, separators=(",", ":"))
        return "sha256:" + hashlib.sha256(canon.encode("utf-8")).hexdigest()


def _req(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise ValidationError(where, "expected an object")
    if key not in d:
        raise ValidationError(f"{where}.{key}" if where else key, "missing required field")
    return d[key]


def _rational(value, where: str) -> Fraction:
    if isinstance(value, float):
        raise ValidationError(where, f"use a rational string such as \"1/2\", not {value!r}")
    if isinstance(value, str) and "/" in value:
        num, _, den = value.partition("/")
        try:
            if int(den) <= 0:
                raise ValidationError(where, f"denominator must be positive in {value!r}")
        except ValueError:
            raise ValidationError(where, f"malformed rational {value!r}") from None
    try:
        return to_fraction(value)
    except (KernelcatError, TypeError) as exc:
        raise ValidationError(where, f"malformed rational {value!r}") from exc


def _real(value, where: str) -> float:
    if isinstance(value, bool):
        raise ValidationError(where, "expected a number")
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError(where, f"expected a decimal number, got {value!r}") from None
    if not np.isfinite(out):
        raise ValidationError(where, "number must be finite")
    return out


def _matrix(value, where: str) -> np.ndarray:
    if not isinstance(value, list) or not value:
        raise ValidationError(where, "expected a non-empty list")
    rows = value if isinstance(value[0], list) else [value]
    out = [[_real(v, f"{where}[{i}][{j}]") for j, v in enumerate(r)] for i, r in enumerate(rows)]
    if len({len(r) for r in out}) != 1:
        raise ValidationError(where, "ragged matrix")
    return np.array(out)


def _vector(value, where: str) -> np.ndarray:
    if isinstance(value, list):
        return np.array([_real(v, f"{where}[{i}]") for i, v in enumerate(value)])
    return np.array([_real(value, where)])


def _weights(space: FiniteSpace, mapping, where: str) -> Dist:
    if not isinstance(mapping, dict):
        raise ValidationError(where, "expected a label -> rational object")
    for a in mapping:
        if a not in space:
            raise ValidationError(f"{where}.{a}", f"unknown atom of {space.name!r}")
    weights = tuple(_rational(mapping.get(a, 0), f"{where}.{a}") for a in space.atoms)
    try:
        return Dist(space, weights)
    except KernelcatError as exc:
        raise ValidationError(where, str(exc)) from exc


def _space_ref(spaces: dict, ref, where: str) -> FiniteSpace:
    names = ref if isinstance(ref, list) else [ref]
    if not names:
        raise ValidationError(where, "empty space reference")
    for n in names:
        if n not in spaces:
            raise ValidationError(where, f"unknown space {n!r}")
    if isinstance(ref, list):
        return product_space(*(spaces[n] for n in names))
    return spaces[ref]


def _kernel_rows(domain, codomain, rows, where, weight: Dist | None = None, policy="uniform"):
    """Kernel from nested row maps.

    Rows may be omitted only for domain atoms that ``weight`` gives zero mass;
    those are filled according to ``policy``.
    """
    if not isinstance(rows, dict):
        raise ValidationError(where, "expected an atom -> row object")
    for a in rows:
        if a not in domain:
            raise ValidationError(f"{where}.{a}", f"unknown atom of {domain.name!r}")
    given = {a: _weights(codomain, rows[a], f"{where}.{a}") for a in rows}
    missing = [a for a in domain.atoms if a not in given]
    if missing:
        if weight is None:
            raise ValidationError(where, f"missing rows for {missing}")
        try:
            return complete_kernel(domain, codomain, given, weight, policy)
        except KernelcatError as exc:
            raise ValidationError(where, str(exc)) from exc
    return Kernel(domain, codomain, tuple(given[a].weights for a in domain.atoms))


def complete_kernel(domain, codomain, given: dict, weight: Dist, policy: str = "uniform") -> Kernel:
    """Fill kernel rows left unspecified at atoms where ``weight`` is zero.

    ``"uniform"`` uses the uniform row; ``"prior"`` uses the predictive
    marginal ``sum_w weight(w) row_w`` of the specified rows.
    """
    from .errors import IncompleteMap

    if policy not in FALLBACK_POLICIES:
        raise ValueError(f"unknown fallback policy {policy!r}")
    for a in domain.atoms:
        if a not in given and weight[a] != 0:
            raise IncompleteMap(f"row {a!r} has positive mass and must be given")
    if policy == "uniform":
        fill = Dist.uniform(codomain).weights
    else:
        acc = [ZERO] * len(codomain)
        for a, d in given.items():
            for k, v in enumerate(d.weights):
                acc[k] += weight[a] * v
        fill = tuple(acc)
    rows = tuple(given[a].weights if a in given else fill for a in domain.atoms)
    return Kernel(domain, codomain, rows)


# ---------------------------------------------------------------------------
# per-kind builders


def _build_spaces(doc, where="spaces") -> dict:
    raw = _req(doc, "spaces", "")
    if not isinstance(raw, dict) or not raw:
        raise ValidationError(where, "expected a non-empty name -> atoms object")
    spaces = {}
    for name, atoms in raw.items():
        if not isinstance(atoms, list):
            raise ValidationError(f"{where}.{name}", "expected a list of atom labels")
        try:
            spaces[name] = make_space(name, [str(a) for a in atoms])
        except KernelcatError as exc:
            raise ValidationError(f"{where}.{name}", str(exc)) from exc
    return spaces


def _build_prior(spaces, spec, where) -> Dist:
    if isinstance(spec, dict) and "tensor" in spec:
        parts = spec["tensor"]
        if not isinstance(parts, list) or not parts:
            raise ValidationError(f"{where}.tensor", "expected a non-empty list")
        dist = _build_prior(spaces, parts[0], f"{where}.tensor[0]")
        for i, part in enumerate(parts[1:], 1):
            dist = tensor_independent(dist, _build_prior(spaces, part, f"{where}.tensor[{i}]"))
        return dist
    space = _space_ref(spaces, _req(spec, "space", where), f"{where}.space")
    return _weights(space, _req(spec, "weights", where), f"{where}.weights")


def _build_discrete(doc):
    spaces = _build_spaces(doc)
    policy = doc.get("fallback", "uniform")
    if policy not in FALLBACK_POLICIES:
        raise ValidationError("fallback", f"must be one of {FALLBACK_POLICIES}")
    prior = _build_prior(spaces, _req(doc, "prior", ""), "prior")
    samp = _req(doc, "sampling", "")
    data = _space_ref(spaces, _req(samp, "codomain", "sampling"), "sampling.codomain")
    sampling = _kernel_rows(
        prior.space, data, _req(samp, "rows", "sampling"), "sampling.rows", prior, policy
    )
    model = BayesModel(prior, sampling)
    joint = joint_from_prior_and_kernel(prior, sampling)

    extensions = {}
    for name, ext in (doc.get("extensions") or {}).items():
        w = f"extensions.{name}"
        domain = _space_ref(spaces, _req(ext, "domain", w), f"{w}.domain")
        codomain = _space_ref(spaces, _req(ext, "codomain", w), f"{w}.codomain")
        extensions[name] = (domain, codomain, _req(ext, "rows", w))

    claimed = None
    if "inference" in doc:
        claimed = _kernel_rows(data, prior.space, doc["inference"], "inference")
    return {
        "spaces": spaces,
        "model": model,
        "joint": joint,
        "extensions": extensions,
        "fallback": policy,
        "claimed_inference": claimed,
    }


def extended_joint(objects: dict, chain: list, where: str = "extend", policy: str | None = None) -> Dist:
    """Extend the base joint through the named extension kernels in order."""
    from .bayes import extend_joint

    joint = objects["joint"]
    policy = policy or objects["fallback"]
    for k, name in enumerate(chain):
        if name not in objects["extensions"]:
            raise ValidationError(f"{where}[{k}]", f"unknown extension {name!r}")
        domain, codomain, rows = objects["extensions"][name]
        if domain != joint.space:
            raise ValidationError(
                f"{where}[{k}]", f"{name!r} expects {domain.name!r}, joint is {joint.space.name!r}"
            )
        kernel = _kernel_rows(domain, codomain, rows, f"extensions.{name}.rows", joint, policy)
        joint = extend_joint(joint, kernel)
    return joint


def _gp_data(items, where):
    if not isinstance(items, list):
        raise ValidationError(where, "expected a list of [x, y] pairs")
    out = []
    for i, item in enumerate(items):
        if not isinstance(item, list) or len(item) != 2:
            raise ValidationError(f"{where}[{i}]", "expected [x, y]")
        out.append((_vector(item[0], f"{where}[{i}][0]"), _real(item[1], f"{where}[{i}][1]")))
    return out


def _build_gp(doc):
    spec = _req(doc, "gp", "")
    try:
        gp = GpState.from_dict({k: v for k, v in spec.items() if k != "data"})
    except (KernelcatError, ValueError, KeyError, TypeError) as exc:
        raise ValidationError("gp", str(exc)) from exc
    data = _gp_data(spec.get("data", []), "gp.data")
    from dataclasses import replace

    return {"gp": replace(gp, data=tuple(data))}


def _build_basis(spec, where):
    if "monomials" in spec:
        return tuple(Monomial(tuple(int(i) for i in m)) for m in spec["monomials"])
    family = _req(spec, "family", where)
    dim = int(_req(spec, "dim", where))
    if family == "affine":
        return affine_basis(dim)
    if family == "elliptic":
        return elliptic_basis(dim, full=bool(spec.get("full", False)))
    raise ValidationError(f"{where}.family", f"unknown basis family {family!r}")


def _build_parametric(doc):
    basis = _build_basis(_req(doc, "basis", ""), "basis")
    prior = _req(doc, "prior", "")
    try:
        model = ParametricModel(
            basis,
            Gaussian(_vector(_req(prior, "mean", "prior"), "prior.mean"),
                     _matrix(_req(prior, "cov", "prior"), "prior.cov")),
            _real(doc.get("noise_var", 0.0), "noise_var"),
            check_independence=bool(doc.get("check_independence", True)),
        )
    except KernelcatError as exc:
        raise ValidationError("prior", str(exc)) from exc
    data = _gp_data(doc.get("data", []), "data")
    return {"model": model, "data": data}


def _build_hmm(doc):
    spaces = _build_spaces(doc)
    times = _req(doc, "times", "")
    states = _req(doc, "states", "")
    if not isinstance(times, list) or not isinstance(states, list) or len(times) != len(states):
        raise ValidationError("states", "need one state space name per time")
    chain_spaces = [_space_ref(spaces, s, f"states[{i}]") for i, s in enumerate(states)]
    trans_raw = _req(doc, "transitions", "")
    if not isinstance(trans_raw, list) or len(trans_raw) != len(times) - 1:
        raise ValidationError("transitions", "need one transition per adjacent pair of times")
    transitions = [
        _kernel_rows(chain_spaces[i], chain_spaces[i + 1], _req(t, "rows", f"transitions[{i}]"),
                     f"transitions[{i}].rows")
        for i, t in enumerate(trans_raw)
    ]
    sens_raw = _req(doc, "sensors", "")
    if not isinstance(sens_raw, list) or len(sens_raw) != len(times):
        raise ValidationError("sensors", "need one sensor per time")
    sensors = []
    for i, s in enumerate(sens_raw):
        w = f"sensors[{i}]"
        cod = _space_ref(spaces, _req(s, "codomain", w), f"{w}.codomain")
        sensors.append(_kernel_rows(chain_spaces[i], cod, _req(s, "rows", w), f"{w}.rows"))
    initial = _weights(chain_spaces[0], _req(doc, "initial", ""), "initial")
    try:
        spec = HmmSpec(MarkovChain(tuple(times), tuple(chain_spaces), tuple(transitions)),
                       tuple(sensors), initial)
    except KernelcatError as exc:
        raise ValidationError("times", str(exc)) from exc
    meas = doc.get("measurements", [])
    if not isinstance(meas, list) or len(meas) > len(times):
        raise ValidationError("measurements", "at most one measurement per time")
    for i, m in enumerate(meas):
        if m not in sensors[i].codomain:
            raise ValidationError(f"measurements[{i}]", f"unknown observation {m!r}")
    return {"spec": spec, "measurements": list(meas)}


def _build_kalman(doc):
    init = _req(doc, "initial", "")
    try:
        model = LinearGaussianModel(
            _matrix(_req(doc, "A", ""), "A"),
            _matrix(_req(doc, "Q", ""), "Q"),
            _matrix(_req(doc, "H", ""), "H"),
            _matrix(_req(doc, "R", ""), "R"),
            Gaussian(_vector(_req(init, "mean", "initial"), "initial.mean"),
                     _matrix(_req(init, "cov", "initial"), "initial.cov")),
        )
    except KernelcatError as exc:
        raise ValidationError("model", str(exc)) from exc
    meas = [
        _vector(m, f"measurements[{i}]") for i, m in enumerate(doc.get("measurements", []))
    ]
    return {"model": model, "measurements": meas}


BUILDERS = {
    "discrete-bayes": _build_discrete,
    "gp": _build_gp,
    "parametric": _build_parametric,
    "hmm": _build_hmm,
    "kalman": _build_kalman,
}


def parse_text(text: str, source: str = "<model>") -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError(f"{source}: top level must be a JSON object")
    return doc


def build_model(doc: dict) -> Model:
    version = _req(doc, "version", "")
    if version != FORMAT_VERSION:
        raise ValidationError("version", f"unsupported version {version!r}")
    kind = _req(doc, "kind", "")
    if kind not in KINDS:
        raise ValidationError("kind", f"must be one of {KINDS}")
    queries = doc.get("queries", [])
    if not isinstance(queries, list):
        raise ValidationError("queries", "expected a list")
    for i, q in enumerate(queries):
        _req(q, "type", f"queries[{i}]")
    objects = BUILDERS[kind](doc)
    return Model(kind, doc, queries, objects)


def load_model(path) -> Model:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from exc
    return build_model(parse_text(text, str(path)))


def point_list(value, where: str) -> list:
    if not isinstance(value, list):
        raise ValidationError(where, "expected a list of points")
    return [as_point(_vector(v, f"{where}[{i}]")) for i, v in enumerate(value)]


def evidence_of(objects: dict) -> Dist:
    m = objects["model"]
    return pushforward(m.prior, m.sampling)


def to_jsonable(value: Any):
    """Render engine values for reports: rationals as ``"p/q"`` strings and
    floats rounded to 12 significant digits."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, (float, np.floating)):
        out = float(f"{float(value):.12g}")
        return 0.0 if out == 0 else out
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, Dist):
        return to_jsonable(value.as_dict())
    if isinstance(value, Kernel):
        return to_jsonable(value.as_dict())
    if isinstance(value, Gaussian):
        return {"mean": to_jsonable(value.mean), "cov": to_jsonable(value.cov)}
    raise TypeError(f"cannot serialize {type(value).__name__}")
