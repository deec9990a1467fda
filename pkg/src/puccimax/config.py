"""Experiment configuration: flat ``key = value`` text with dotted sections.

Chosen for diff-friendliness; no parser dependencies.  Example::

    case = quadratic
    domain.kind = ball
    domain.center = 0,0
    domain.radius = 1
    params.lambda = 1
    params.Lambda = 2
    params.dim = 2
    eps_list = 0.2,0.1,0.05
    h_rule = list:0.05,0.025,0.0125
    search.mode = eigen
    tol = 1e-8
    mc.n_playouts = 2000
    mc.seed = 7
    mc.x0 = 0,0

``h_rule`` is either ``quadratic:<c>`` (h = c * eps^2) or an explicit
``list:<h1,h2,...>`` matching ``eps_list``.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dpp import SearchConfig
from .errors import ConfigError
from .fields import constant_field, quadratic_form_field
from .geometry import Annulus, Ball, Box
from .pucci import PucciParams

_KNOWN_KEYS = {
    "case",
    "case.q",
    "domain.kind",
    "domain.center",
    "domain.radius",
    "domain.r_inner",
    "domain.r_outer",
    "domain.lo",
    "domain.hi",
    "params.lambda",
    "params.Lambda",
    "params.dim",
    "eps_list",
    "h_rule",
    "search.mode",
    "search.step",
    "search.refine_iters",
    "tol",
    "max_iter",
    "mc.n_playouts",
    "mc.seed",
    "mc.x0",
    "mc.max_steps",
    "transcripts",
    "f",
    "g",
    "output_dir",
}

_CASES = ("quadratic", "saddle", "radial_annulus", "degenerate", "custom")


def parse_config_text(text):
    """Flat dict from ``key = value`` lines; '#' starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {lineno}: unknown key '{key}'")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key '{key}'")
        out[key] = value
    return out


def _floats(value):
    try:
        return [float(tok) for tok in value.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise ConfigError(f"cannot parse number list '{value}'") from exc


def _matrix(value):
    try:
        rows = [[float(tok) for tok in row.split(",")] for row in value.split(";")]
    except ValueError as exc:
        raise ConfigError(f"cannot parse matrix '{value}'") from exc
    m = np.asarray(rows, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ConfigError(f"matrix '{value}' is not square")
    return m


def _points(value):
    return [np.asarray(_floats(part), dtype=float) for part in value.split(";") if part.strip()]


def _bool(value):
    low = value.strip().lower()
    if low in ("true", "1", "yes"):
        return True
    if low in ("false", "0", "no"):
        return False
    raise ConfigError(f"cannot parse boolean '{value}'")


def parse_field_spec(spec, dim):
    """Payoff presets: ``const:<v>`` or ``quad:<matrix>`` (x -> <Qx, x>)."""
    kind, _, arg = spec.partition(":")
    if kind == "const":
        try:
            return constant_field(float(arg))
        except ValueError as exc:
            raise ConfigError(f"bad constant field '{spec}'") from exc
    if kind == "quad":
        q = _matrix(arg)
        if q.shape[0] != dim:
            raise ConfigError(f"field matrix dimension {q.shape[0]} != {dim}")
        return quadratic_form_field(q)
    raise ConfigError(f"unknown field spec '{spec}' (use const:<v> or quad:<matrix>)")


@dataclass
class ExperimentConfig:
    case: str
    domain: object
    params: PucciParams
    eps_list: list
    h_list: list
    search: SearchConfig
    tol: float
    max_iter: object  # int or None for the formula default
    mc_n: int
    mc_seed: int
    mc_x0: list
    mc_max_steps: object
    transcripts: bool
    q: object = None
    f_spec: str = None
    g_spec: str = None
    output_dir: str = "out"


def _build_domain(raw, dim):
    kind = raw.get("domain.kind")
    if kind is None:
        raise ConfigError("missing domain.kind")
    try:
        if kind == "ball":
            center = _floats(raw.get("domain.center", ",".join(["0"] * dim)))
            return Ball(center=tuple(center), radius=float(raw["domain.radius"]))
        if kind == "annulus":
            center = _floats(raw.get("domain.center", ",".join(["0"] * dim)))
            return Annulus(
                center=tuple(center),
                r_inner=float(raw["domain.r_inner"]),
                r_outer=float(raw["domain.r_outer"]),
            )
        if kind == "box":
            return Box(lo=tuple(_floats(raw["domain.lo"])), hi=tuple(_floats(raw["domain.hi"])))
    except KeyError as exc:
        raise ConfigError(f"missing domain field {exc}") from exc
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    raise ConfigError(f"unknown domain.kind '{kind}' (ball|annulus|box)")


def experiment_from_dict(raw):
    case = raw.get("case")
    if case not in _CASES:
        raise ConfigError(f"case must be one of {_CASES}, got '{case}'")
    try:
        dim = int(raw.get("params.dim", "2"))
        params = PucciParams(
            lam=float(raw.get("params.lambda", "1")),
            Lam=float(raw.get("params.Lambda", "1")),
            dim=dim,
        )
    except ValueError as exc:
        raise ConfigError(f"bad params: {exc}") from exc

    domain = _build_domain(raw, dim)
    if domain.dim != dim:
        raise ConfigError("domain dimension does not match params.dim")

    eps_list = _floats(raw.get("eps_list", ""))
    if not eps_list:
        raise ConfigError("eps_list must not be empty")
    if any(e <= 0 for e in eps_list):
        raise ConfigError("eps values must be positive")
    if any(b >= a for a, b in zip(eps_list, eps_list[1:])):
        raise ConfigError("eps_list must be strictly decreasing")

    h_rule = raw.get("h_rule")
    if h_rule is None:
        raise ConfigError("missing h_rule")
    kind, _, arg = h_rule.partition(":")
    if kind == "list":
        h_list = _floats(arg)
        if len(h_list) != len(eps_list):
            raise ConfigError("h_rule list length must match eps_list")
    elif kind == "quadratic":
        try:
            c = float(arg)
        except ValueError as exc:
            raise ConfigError(f"bad h_rule '{h_rule}'") from exc
        h_list = [c * e * e for e in eps_list]
    else:
        raise ConfigError(f"unknown h_rule '{h_rule}' (list:... or quadratic:<c>)")
    cap_scale = params.min_step_scale / 2.0
    for e, h in zip(eps_list, h_list):
        if not 0 < h <= e * cap_scale * (1 + 1e-12):
            raise ConfigError(f"h={h:.6g} violates h <= eps*mu_min/2 at eps={e:.6g}")

    mode = raw.get("search.mode", "hybrid")
    try:
        search = SearchConfig(
            mode=mode,
            step=float(raw.get("search.step", str(math.pi / 40))),
            refine_iters=int(raw.get("search.refine_iters", "12")),
        )
    except ValueError as exc:
        raise ConfigError(f"bad search config: {exc}") from exc

    if case == "degenerate":
        if params.lam != 0:
            raise ConfigError("degenerate case requires params.lambda = 0")
    elif params.lam <= 0:
        raise ConfigError(f"case '{case}' requires params.lambda > 0")
    if case == "radial_annulus" and not isinstance(domain, Annulus):
        raise ConfigError("radial_annulus case requires an annulus domain")

    q = _matrix(raw["case.q"]) if "case.q" in raw else None
    if q is not None and q.shape[0] != dim:
        raise ConfigError("case.q dimension does not match params.dim")

    f_spec = raw.get("f")
    g_spec = raw.get("g")
    if case == "custom" and (f_spec is None or g_spec is None):
        raise ConfigError("custom case requires f and g field specs")
    if f_spec is not None:
        parse_field_spec(f_spec, dim)  # validate early
    if g_spec is not None:
        parse_field_spec(g_spec, dim)

    mc_x0 = _points(raw.get("mc.x0", "")) if raw.get("mc.x0") else []
    for p in mc_x0:
        if p.shape != (dim,):
            raise ConfigError("mc.x0 points must match params.dim")

    try:
        tol = float(raw.get("tol", "1e-9"))
        max_iter = int(raw.get("max_iter", "0")) or None
        mc_n = int(raw.get("mc.n_playouts", "0"))
        mc_seed = int(raw.get("mc.seed", "0"))
        mc_max_steps = int(raw.get("mc.max_steps", "0")) or None
    except ValueError as exc:
        raise ConfigError(f"bad numeric option: {exc}") from exc
    if tol <= 0:
        raise ConfigError("tol must be positive")
    if mc_n > 0 and not mc_x0:
        raise ConfigError("mc.n_playouts > 0 requires mc.x0")

    return ExperimentConfig(
        case=case,
        domain=domain,
        params=params,
        eps_list=eps_list,
        h_list=h_list,
        search=search,
        tol=tol,
        max_iter=max_iter,
        mc_n=mc_n,
        mc_seed=mc_seed,
        mc_x0=mc_x0,
        mc_max_steps=mc_max_steps,
        transcripts=_bool(raw.get("transcripts", "false")),
        q=q,
        f_spec=f_spec,
        g_spec=g_spec,
        output_dir=raw.get("output_dir", "out"),
    )


def experiment_from_text(text):
    return experiment_from_dict(parse_config_text(text))
