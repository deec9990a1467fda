"""Pydantic request/response models for the HTTP surface."""

from typing import Optional

from pydantic import BaseModel, Field


class SolveRequest(BaseModel):
    config_text: str = Field(description="experiment config in key = value form")
    eps_index: int = Field(default=0, ge=0, description="which entry of eps_list to solve")
    seed: Optional[int] = Field(default=None, description="override mc.seed")
    include_values: bool = True


class RowModel(BaseModel):
    eps: float
    h: float
    sup_error: Optional[float] = None
    residual: float
    iterations: int
    mc_gap: Optional[float] = None
    mean_tau: Optional[float] = None
    bound_4R2_over_lambda_eps2: Optional[float] = None
    converged: bool


class SolveResponse(BaseModel):
    row: RowModel
    converged: bool
    value_at: list[float] = Field(default_factory=list, description="solved value at each mc.x0")
    files: dict[str, str] = Field(default_factory=dict)


class SweepRequest(BaseModel):
    config_text: str
    seed: Optional[int] = None
    include_values: bool = False


class SweepResponse(BaseModel):
    rows: list[RowModel]
    all_converged: bool
    files: dict[str, str]


class SimulateRequest(BaseModel):
    config_text: str
    eps_index: int = Field(default=0, ge=0)
    seed: Optional[int] = None
    n_playouts: Optional[int] = Field(default=None, ge=2)


class EstimateModel(BaseModel):
    x0: list[float]
    mean: float
    std_error: float
    mean_tau: float
    tau_std_error: float
    n_playouts: int
    dpp_value: float
    exit_bound: Optional[float] = None
    exit_bound_ok: Optional[bool] = None


class SimulateResponse(BaseModel):
    eps: float
    estimates: list[EstimateModel]
    converged: bool
    files: dict[str, str]


class VerifyRequest(BaseModel):
    level: str = Field(default="quick", pattern="^(quick|full)$")


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str


class VerifyResponse(BaseModel):
    checks: list[CheckModel]
    all_passed: bool


class CompareRequest(BaseModel):
    summary_a: str = Field(description="contents of the first summary.csv")
    summary_b: str = Field(description="contents of the second summary.csv")


class CompareResponse(BaseModel):
    report: str
    regressions: list[dict]
