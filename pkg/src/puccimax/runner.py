"""Experiment orchestration: sweeps over eps, artifact files, comparisons
and the oracle self-check battery.

Artifact formats
----------------
``summary.csv``      one row per eps with the declared column order
``values_eps*.csv``  node dump: two comment lines of lattice metadata, then
                     ``x1,...,xN,value,label`` rows for interior and strip
                     nodes, 17 significant digits
``slice_x*.csv``     axis-aligned 1-d slice through the domain center with
                     the oracle values alongside when one exists
``mc_eps*_x0*.txt``  flat key = value Monte Carlo summaries
``transcripts/...``  optional per-step playout dumps

All artifacts are deterministic for fixed seeds (no timestamps), so a
repeated run reproduces them byte for byte.
"""

import io
import math
import os
from dataclasses import dataclass

import numpy as np

from .config import parse_field_spec
from .dpp import GameConfig, interpolate, solve_dpp, solve_dpp_degenerate
from .errors import ConfigError, MismatchedSweep, NotConverged
from .fields import constant_field
from .game import GreedyFromValue, estimate_value, play_transcripts, transcript_csv
from .geometry import Region
from .oracles import make_quadratic_case, radial_barrier_margins, radial_coefficients, radial_eval
from .pucci import PucciParams, pucci_plus, sup_over_bases_bruteforce

SUMMARY_COLUMNS = (
    "eps",
    "h",
    "sup_error",
    "residual",
    "iterations",
    "mc_gap",
    "mean_tau",
    "bound_4R2_over_lambda_eps2",
)


def _fmt(v):
    return format(float(v), ".17g")


@dataclass
class ConvergenceRow:
    eps: float
    h: float
    sup_error: object = None
    residual: float = math.nan
    iterations: int = 0
    mc_gap: object = None
    mean_tau: object = None
    bound: object = None
    converged: bool = True

    def csv_cells(self):
        cells = [
            _fmt(self.eps),
            _fmt(self.h),
            "" if self.sup_error is None else _fmt(self.sup_error),
            _fmt(self.residual),
            str(int(self.iterations)),
            "" if self.mc_gap is None else _fmt(self.mc_gap),
            "" if self.mean_tau is None else _fmt(self.mean_tau),
            "" if self.bound is None else _fmt(self.bound),
        ]
        return cells


def summary_csv(rows):
    buf = io.StringIO()
    buf.write(",".join(SUMMARY_COLUMNS) + "\n")
    for row in rows:
        buf.write(",".join(row.csv_cells()) + "\n")
    return buf.getvalue()


def parse_summary_csv(text):
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].split(",") != list(SUMMARY_COLUMNS):
        raise MismatchedSweep("summary header does not match the declared columns")
    rows = []
    for ln in lines[1:]:
        cells = ln.split(",")
        opt = lambda s: None if s == "" else float(s)
        rows.append(
            ConvergenceRow(
                eps=float(cells[0]),
                h=float(cells[1]),
                sup_error=opt(cells[2]),
                residual=float(cells[3]),
                iterations=int(cells[4]),
                mc_gap=opt(cells[5]),
                mean_tau=opt(cells[6]),
                bound=opt(cells[7]),
            )
        )
    return rows


def values_csv(vf):
    """Interior and strip nodes with their values; far nodes are omitted."""
    buf = io.StringIO()
    buf.write("# dim,h,eps,lambda,Lambda\n")
    buf.write(f"# {vf.dim},{_fmt(vf.h)},{_fmt(vf.eps)},{_fmt(vf.lam)},{_fmt(vf.Lam)}\n")
    pts = vf.node_points()
    labels = vf.labels.reshape(-1)
    vals = vf.values.reshape(-1)
    keep = labels != Region.FAR_EXTERIOR
    names = {Region.INTERIOR: "interior", Region.STRIP: "strip"}
    for p, v, lab in zip(pts[keep], vals[keep], labels[keep]):
        coords = ",".join(_fmt(c) for c in p)
        buf.write(f"{coords},{_fmt(v)},{names[Region(int(lab))]}\n")
    return buf.getvalue()


def slice_csv(vf, cfg, axis, oracle=None):
    """1-d slice along ``axis`` through the node nearest the bbox center."""
    lo_d, hi_d = cfg.domain.bbox()
    center = (np.asarray(lo_d) + np.asarray(hi_d)) / 2.0
    idx = [int(round((center[i] - vf.lo[i]) / vf.h)) for i in range(vf.dim)]
    idx = [min(max(k, 0), vf.shape[i] - 1) for i, k in enumerate(idx)]
    buf = io.StringIO()
    buf.write("coordinate,u_eps" + (",u_oracle" if oracle is not None else "") + "\n")
    for k in range(vf.shape[axis]):
        sel = list(idx)
        sel[axis] = k
        sel = tuple(sel)
        if vf.labels[sel] == Region.FAR_EXTERIOR:
            continue
        coord = vf.lo[axis] + vf.h * k
        point = np.array([vf.lo[i] + vf.h * sel[i] for i in range(vf.dim)])
        line = f"{_fmt(coord)},{_fmt(vf.values[sel])}"
        if oracle is not None:
            line += f",{_fmt(float(oracle(point[None, :])[0]))}"
        buf.write(line + "\n")
    return buf.getvalue()


@dataclass
class CaseSetup:
    cfg: GameConfig
    oracle: object  # vectorised exact-solution field, or None
    degenerate: bool


def build_case(exp, eps):
    """GameConfig and oracle for one eps of the configured case."""
    params = exp.params
    n = params.dim
    if exp.case in ("quadratic", "saddle", "degenerate"):
        if exp.q is not None:
            q = exp.q
        elif exp.case == "saddle":
            q = np.diag([1.0] + [-1.0] * (n - 1))
        else:
            q = np.eye(n)
        case = make_quadratic_case(params, q)
        cfg = GameConfig(params=params, eps=eps, f=case.f, g=case.g, domain=exp.domain)
        return CaseSetup(cfg=cfg, oracle=case.g, degenerate=exp.case == "degenerate")
    if exp.case == "radial_annulus":
        # running payoff -2N/eps^2 makes the payoff equal the exit time, so
        # the solved value is the optimal expected exit time of the annulus
        cfg = GameConfig(
            params=params,
            eps=eps,
            f=constant_field(-2.0 * n / eps**2),
            g=constant_field(0.0),
            domain=exp.domain,
        )
        return CaseSetup(cfg=cfg, oracle=None, degenerate=False)
    if exp.case == "custom":
        cfg = GameConfig(
            params=params,
            eps=eps,
            f=parse_field_spec(exp.f_spec, n),
            g=parse_field_spec(exp.g_spec, n),
            domain=exp.domain,
        )
        return CaseSetup(cfg=cfg, oracle=None, degenerate=False)
    raise ConfigError(f"unknown case '{exp.case}'")


def _solve_case(setup, exp, h):
    solver = solve_dpp_degenerate if setup.degenerate else solve_dpp
    try:
        vf, report = solver(setup.cfg, h, search=exp.search, tol=exp.tol, max_iter=exp.max_iter)
        return vf, report, True
    except NotConverged as exc:
        return exc.value_function, exc.report, False


def sup_error_vs_oracle(vf, oracle):
    pts = vf.interior_points()
    if not len(pts):
        return 0.0
    return float(np.max(np.abs(vf.interior_values() - oracle(pts))))


@dataclass
class RunResult:
    rows: list
    artifacts: dict
    all_converged: bool
    values: dict  # eps -> ValueFunction


def _eps_tag(eps):
    return format(eps, "g")


def run_case(exp, seed_override=None):
    """Solve every eps of the sweep, attach Monte Carlo columns and emit
    deterministic artifacts.  Non-convergence is recorded per row instead
    of aborting the sweep."""
    rows = []
    artifacts = {}
    values = {}
    all_ok = True
    seed = exp.mc_seed if seed_override is None else int(seed_override)
    R = exp.domain.bounding_radius
    for row_idx, (eps, h) in enumerate(zip(exp.eps_list, exp.h_list)):
        setup = build_case(exp, eps)
        vf, report, ok = _solve_case(setup, exp, h)
        all_ok &= ok
        row = ConvergenceRow(
            eps=eps,
            h=h,
            residual=report.final_residual,
            iterations=report.iterations,
            converged=ok,
        )
        if setup.oracle is not None:
            row.sup_error = sup_error_vs_oracle(vf, setup.oracle)
        if exp.params.lam > 0:
            row.bound = 4.0 * R * R / (exp.params.lam * eps**2)
        if exp.mc_n > 0:
            strategy = GreedyFromValue(vf, setup.cfg, exp.search)
            for x0_idx, x0 in enumerate(exp.mc_x0):
                est = estimate_value(
                    setup.cfg,
                    strategy,
                    x0,
                    exp.mc_n,
                    seed=seed + 7919 * row_idx + 104729 * x0_idx,
                    max_steps=exp.mc_max_steps,
                )
                value_at = interpolate(vf, setup.cfg, x0)
                if x0_idx == 0:
                    row.mc_gap = est.mean - value_at
                    row.mean_tau = est.mean_tau
                artifacts[f"mc_eps{_eps_tag(eps)}_x0{x0_idx}.txt"] = (
                    f"x0 = {','.join(_fmt(c) for c in x0)}\n"
                    f"mean = {_fmt(est.mean)}\n"
                    f"std_error = {_fmt(est.std_error)}\n"
                    f"mean_tau = {_fmt(est.mean_tau)}\n"
                    f"tau_std_error = {_fmt(est.tau_std_error)}\n"
                    f"n_playouts = {est.n_playouts}\n"
                    f"dpp_value = {_fmt(value_at)}\n"
                    f"seed = {seed + 7919 * row_idx + 104729 * x0_idx}\n"
                )
            if exp.transcripts:
                sample = play_transcripts(
                    setup.cfg, strategy, exp.mc_x0[0], min(5, exp.mc_n), seed=seed + 7919 * row_idx
                )
                for j, tr in enumerate(sample):
                    artifacts[f"transcripts/eps{_eps_tag(eps)}_p{j}.csv"] = transcript_csv(tr, setup.cfg)
        rows.append(row)
        values[eps] = vf
        artifacts[f"values_eps{_eps_tag(eps)}.csv"] = values_csv(vf)
        for axis in range(exp.params.dim):
            artifacts[f"slice_x{axis + 1}.csv" if len(exp.eps_list) == 1 else f"slice_x{axis + 1}_eps{_eps_tag(eps)}.csv"] = (
                slice_csv(vf, setup.cfg, axis, oracle=setup.oracle)
            )
        artifacts[f"report_eps{_eps_tag(eps)}.txt"] = (
            f"iterations = {report.iterations}\n"
            f"final_residual = {_fmt(report.final_residual)}\n"
            f"converged = {str(ok).lower()}\n"
        )
    artifacts["summary.csv"] = summary_csv(rows)
    return RunResult(rows=rows, artifacts=artifacts, all_converged=all_ok, values=values)


def write_artifacts(artifacts, out_dir):
    for rel, content in artifacts.items():
        path = os.path.join(out_dir, rel)
        os.makedirs(os.path.dirname(path) or out_dir, exist_ok=True)
        with open(path, "w") as fh:
            fh.write(content)


def trend_non_increasing(vals, slack=1.10, floor=0.0):
    """Monotone-trend assertion with multiplicative slack and an absolute
    floor below which differences count as converged noise."""
    return all(b <= max(a * slack, floor) for a, b in zip(vals, vals[1:]))


def compare_runs(rows_a, rows_b, tolerance=0.10):
    """Side-by-side deltas of two sweeps on the same eps grid; flags
    error-like fields that regressed by more than ``tolerance``."""
    if len(rows_a) != len(rows_b) or any(
        not math.isclose(a.eps, b.eps, rel_tol=1e-12) for a, b in zip(rows_a, rows_b)
    ):
        raise MismatchedSweep("sweeps have different eps grids")
    lines = ["eps,field,a,b,delta"]
    regressions = []
    for a, b in zip(rows_a, rows_b):
        for name in ("sup_error", "residual", "mc_gap", "mean_tau"):
            va, vb = getattr(a, name), getattr(b, name)
            if va is None or vb is None or (isinstance(va, float) and math.isnan(va)):
                continue
            lines.append(f"{_fmt(a.eps)},{name},{_fmt(va)},{_fmt(vb)},{_fmt(vb - va)}")
            if name in ("sup_error", "residual") and abs(vb) > max(abs(va) * (1 + tolerance), 1e-12):
                regressions.append({"eps": a.eps, "field": name, "a": float(va), "b": float(vb)})
    report = "\n".join(lines) + "\n"
    if regressions:
        report += "regressions:\n" + "\n".join(
            f"  eps={_fmt(r['eps'])} {r['field']}: {_fmt(r['a'])} -> {_fmt(r['b'])}" for r in regressions
        ) + "\n"
    else:
        report += "no regressions above 10%\n"
    return report, regressions


# ---------------------------------------------------------------------------
# oracle self-checks


@dataclass
class OracleCheck:
    name: str
    passed: bool
    detail: str


def _radial_cases():
    return [
        PucciParams(lam=1.0, Lam=1.0, dim=2),  # resonance: lam = Lam (N-1)
        PucciParams(lam=1.0, Lam=2.0, dim=2),
        PucciParams(lam=1.0, Lam=4.0, dim=2),
        PucciParams(lam=1.0, Lam=2.0, dim=3),
        PucciParams(lam=1.0, Lam=4.0, dim=3),
    ]


def check_radial_solutions(n_radii=100):
    worst_ode = 0.0
    worst_bc = 0.0
    worst_pucci = 0.0
    signs_ok = True
    branches = []
    for params in _radial_cases():
        sol = radial_coefficients(params, delta=0.5, R=2.0)
        branches.append(sol.branch)
        radii = np.linspace(sol.delta, sol.R + sol.delta, n_radii)
        u, u_r, u_rr = radial_eval(sol, radii)
        res = params.lam * u_rr + (params.dim - 1) * params.Lam * u_r / radii + params.dim
        worst_ode = max(worst_ode, float(np.max(np.abs(res))))
        u_d = radial_eval(sol, sol.delta)[0]
        up_out = radial_eval(sol, sol.R + sol.delta)[1]
        worst_bc = max(worst_bc, abs(float(u_d)), abs(float(up_out)))
        inner = (radii > sol.delta) & (radii < sol.R + sol.delta)
        signs_ok &= bool(np.all(u_r[inner] > 0) and np.all(u_rr[inner] < 0))
        from .oracles import radial_pucci_consistency

        for r in np.linspace(sol.delta * 1.1, sol.R, 10):
            worst_pucci = max(worst_pucci, radial_pucci_consistency(sol, params, r))
    passed = worst_ode <= 1e-9 and worst_bc <= 1e-10 and signs_ok and worst_pucci <= 1e-9
    detail = (
        f"max ODE residual {worst_ode:.2e}, max BC defect {worst_bc:.2e}, "
        f"max operator defect {worst_pucci:.2e}, signs {'ok' if signs_ok else 'VIOLATED'}, "
        f"branches {branches}"
    )
    return OracleCheck("radial_solutions", passed, detail)


def check_radial_barrier(eps_list=(0.08, 0.04, 0.02, 0.01)):
    params = PucciParams(lam=1.0, Lam=2.0, dim=2)
    sol = radial_coefficients(params, delta=0.5, R=2.0)
    radii = np.linspace(sol.delta + 0.05, sol.R - 0.05, 9)
    holds = []
    for eps in eps_list:
        margins = radial_barrier_margins(sol, params, eps, radii)
        holds.append(bool(np.all(margins >= 0)))
    # the inequality must hold for the two smallest eps tested
    passed = all(holds[-2:])
    detail = ", ".join(f"eps={e:g}: {'holds' if h else 'fails'}" for e, h in zip(eps_list, holds))
    return OracleCheck("radial_barrier", passed, detail)


def check_quadratic_cases():
    params = PucciParams(lam=1.0, Lam=2.0, dim=2)
    expected = {
        "identity": (np.eye(2), 8.0),
        "saddle": (np.diag([1.0, -1.0]), 2.0),
        "zero": (np.zeros((2, 2)), 0.0),
    }
    worst = 0.0
    for _, (q, want) in expected.items():
        case = make_quadratic_case(params, q)
        worst = max(worst, abs(case.f_const - want), abs(pucci_plus(params, 2 * q) - case.f_const))
    return OracleCheck("quadratic_cases", worst <= 1e-12, f"max defect {worst:.2e}")


def check_pucci_bruteforce(n2=20, n3=6, seed=1234):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for dim, count, step in ((2, n2, 1e-3), (3, n3, 2e-2)):
        params = PucciParams(lam=1.0, Lam=2.0, dim=dim)
        for _ in range(count):
            a = rng.uniform(-1.0, 1.0, size=(dim, dim))
            a = 0.5 * (a + a.T)
            exact = pucci_plus(params, a)
            approx = sup_over_bases_bruteforce(params, a, step)
            worst = max(worst, abs(approx - exact) / (1.0 + abs(exact)))
    return OracleCheck("pucci_bruteforce", worst <= 1e-3, f"max relative gap {worst:.2e}")


def verify_oracles(level="quick"):
    if level not in ("quick", "full"):
        raise ConfigError("level must be 'quick' or 'full'")
    checks = [
        check_radial_solutions(),
        check_radial_barrier((0.04, 0.02) if level == "quick" else (0.08, 0.04, 0.02, 0.01)),
        check_quadratic_cases(),
        check_pucci_bruteforce(*((20, 6) if level == "quick" else (100, 100))),
    ]
    return checks
