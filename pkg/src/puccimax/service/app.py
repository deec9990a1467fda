"""FastAPI service wrapping the core solver, simulator and oracles.

Every endpoint takes the same flat config text the CLI reads from disk, so
the service and the file-based workflow share one parser.  Errors in the
config surface as HTTP 400; solver non-convergence is reported in-band via
``converged`` flags so sweeps can finish their remaining rows.
"""

import dataclasses

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..config import experiment_from_text
from ..dpp import interpolate
from ..errors import ConfigError, MismatchedSweep, PucciMaxError
from ..game import GreedyFromValue, estimate_value, exit_time_bound_check
from ..runner import (
    build_case,
    compare_runs,
    parse_summary_csv,
    run_case,
    verify_oracles,
)
from .schemas import (
    CheckModel,
    CompareRequest,
    CompareResponse,
    EstimateModel,
    RowModel,
    SimulateRequest,
    SimulateResponse,
    SolveRequest,
    SolveResponse,
    SweepRequest,
    SweepResponse,
    VerifyRequest,
    VerifyResponse,
)


def _experiment(config_text):
    try:
        return experiment_from_text(config_text)
    except ConfigError as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _row_model(row):
    return RowModel(
        eps=row.eps,
        h=row.h,
        sup_error=row.sup_error,
        residual=row.residual,
        iterations=row.iterations,
        mc_gap=row.mc_gap,
        mean_tau=row.mean_tau,
        bound_4R2_over_lambda_eps2=row.bound,
        converged=row.converged,
    )


def _restrict_to_eps(exp, eps_index):
    if eps_index >= len(exp.eps_list):
        raise HTTPException(status_code=400, detail="eps_index out of range")
    return dataclasses.replace(
        exp, eps_list=[exp.eps_list[eps_index]], h_list=[exp.h_list[eps_index]]
    )


def create_app():
    app = FastAPI(
        title="puccimax",
        version=__version__,
        description="Value-function solver and game simulator for the maximal Pucci Dirichlet problem.",
    )

    @app.get("/health")
    def health():
        return {"status": "ok", "version": __version__}

    @app.post("/solve", response_model=SolveResponse)
    def solve(req: SolveRequest):
        exp = _restrict_to_eps(_experiment(req.config_text), req.eps_index)
        result = run_case(exp, seed_override=req.seed)
        files = dict(result.artifacts)
        if not req.include_values:
            files = {k: v for k, v in files.items() if not k.startswith("values_")}
        eps = exp.eps_list[0]
        vf = result.values[eps]
        setup = build_case(exp, eps)
        value_at = [float(interpolate(vf, setup.cfg, x0)) for x0 in exp.mc_x0]
        return SolveResponse(
            row=_row_model(result.rows[0]),
            converged=result.all_converged,
            value_at=value_at,
            files=files,
        )

    @app.post("/sweep", response_model=SweepResponse)
    def sweep(req: SweepRequest):
        exp = _experiment(req.config_text)
        result = run_case(exp, seed_override=req.seed)
        files = dict(result.artifacts)
        if not req.include_values:
            files = {k: v for k, v in files.items() if not k.startswith("values_")}
        return SweepResponse(
            rows=[_row_model(r) for r in result.rows],
            all_converged=result.all_converged,
            files=files,
        )

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest):
        exp = _restrict_to_eps(_experiment(req.config_text), req.eps_index)
        if req.n_playouts is not None:
            exp = dataclasses.replace(exp, mc_n=req.n_playouts)
        if exp.mc_n < 2 or not exp.mc_x0:
            raise HTTPException(status_code=400, detail="simulate needs mc.n_playouts >= 2 and mc.x0")
        exp_nomc = dataclasses.replace(exp, mc_n=0, transcripts=False)
        result = run_case(exp_nomc, seed_override=None)
        eps = exp.eps_list[0]
        vf = result.values[eps]
        setup = build_case(exp, eps)
        seed = exp.mc_seed if req.seed is None else req.seed
        strategy = GreedyFromValue(vf, setup.cfg, exp.search)
        estimates = []
        R = exp.domain.bounding_radius
        for k, x0 in enumerate(exp.mc_x0):
            est = estimate_value(
                setup.cfg, strategy, x0, exp.mc_n, seed=seed + 104729 * k, max_steps=exp.mc_max_steps
            )
            bound = bound_ok = None
            if exp.params.lam > 0:
                bound_ok, _ = exit_time_bound_check(setup.cfg, est, R)
                bound = 4.0 * R * R / (exp.params.lam * eps**2)
            estimates.append(
                EstimateModel(
                    x0=[float(c) for c in x0],
                    mean=est.mean,
                    std_error=est.std_error,
                    mean_tau=est.mean_tau,
                    tau_std_error=est.tau_std_error,
                    n_playouts=est.n_playouts,
                    dpp_value=float(interpolate(vf, setup.cfg, x0)),
                    exit_bound=bound,
                    exit_bound_ok=bound_ok,
                )
            )
        files = {k: v for k, v in result.artifacts.items() if not k.startswith("values_")}
        return SimulateResponse(
            eps=eps,
            estimates=estimates,
            converged=result.all_converged,
            files=files,
        )

    @app.post("/verify-oracles", response_model=VerifyResponse)
    def verify(req: VerifyRequest):
        checks = verify_oracles(req.level)
        return VerifyResponse(
            checks=[CheckModel(name=c.name, passed=c.passed, detail=c.detail) for c in checks],
            all_passed=all(c.passed for c in checks),
        )

    @app.post("/compare", response_model=CompareResponse)
    def compare(req: CompareRequest):
        try:
            rows_a = parse_summary_csv(req.summary_a)
            rows_b = parse_summary_csv(req.summary_b)
            report, regressions = compare_runs(rows_a, rows_b)
        except (MismatchedSweep, ValueError, PucciMaxError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return CompareResponse(report=report, regressions=regressions)

    return app


app = create_app()
