"""Monte Carlo play of the single-player game.

Each step the player picks an orthonormal basis and per-direction scales;
one of the 2N points x +- eps mu_i v_i is then drawn uniformly.  Play stops
at the first position outside the domain (it lands in the boundary strip)
and pays g(x_tau) - (1/2N) eps^2 sum_{k < tau} f(x_k).

Randomness is split per playout: playout j consumes the stream of
``default_rng(SeedSequence(entropy=seed, spawn_key=(j,)))``, one uniform
per step, so playouts are order-independent and a single replayed playout
reproduces its row of a batched run bit for bit.
"""

import math
from dataclasses import dataclass

import numpy as np

from .dpp import BasisChoice, SearchConfig, _fd_hessians_from_eval, _interp_points, _search_best
from .errors import MaxStepsExceeded, MismatchedStart
from .geometry import contains


def _normalize_token(token):
    if isinstance(token, (tuple, list)):
        if len(token) != 2:
            raise ValueError("rng token must be an int or a (seed, stream) pair")
        return int(token[0]), int(token[1])
    return int(token), 0


def _stream(seed, j):
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed), spawn_key=(int(j),)))


def _outcome_from_uniform(u, ndim):
    """Map uniforms in [0,1) to (direction index, sign), 2N equiprobable."""
    out = np.minimum((np.asarray(u) * 2 * ndim).astype(np.int64), 2 * ndim - 1)
    idx = out // 2
    sign = np.where(out % 2 == 0, 1, -1).astype(np.int64)
    return idx, sign


@dataclass
class Transcript:
    """One playout: positions x_0..x_tau and everything needed to audit it."""

    positions: np.ndarray  # (tau+1, N)
    directions: np.ndarray  # (tau, N, N), rows are basis vectors
    mu2: np.ndarray  # (tau, N) squared scales
    outcomes: np.ndarray  # (tau, 2): direction index, sign
    tau: int
    payoff: float
    rng_seed: tuple

    def choice(self, k):
        return BasisChoice(directions=self.directions[k], mu2=self.mu2[k])


@dataclass
class McEstimate:
    mean: float
    std_error: float
    n_playouts: int
    mean_tau: float
    tau_std_error: float


class FixedBasis:
    """Play the same basis and scales at every step."""

    def __init__(self, choice):
        self.choice = choice

    def choices(self, pts):
        m = len(pts)
        ndim = self.choice.directions.shape[0]
        dirs = np.broadcast_to(self.choice.directions, (m, ndim, ndim))
        mu2 = np.broadcast_to(self.choice.mu2, (m, ndim))
        return dirs, mu2


class GreedyFromValue:
    """Recompute the maximising basis at the token's actual position."""

    def __init__(self, vf, cfg, search=None):
        if vf.eps != cfg.eps:
            raise ValueError("value function was built for a different eps")
        self.vf = vf
        self.cfg = cfg
        self.search = search or SearchConfig()

    def choices(self, pts):
        def eval_fn(q):
            return _interp_points(self.vf, self.cfg, q)

        hess = None
        if self.search.uses_eigen:
            hess = _fd_hessians_from_eval(eval_fn, pts, self.vf.h)
        _, dirs, mu2 = _search_best(
            eval_fn, pts, self.cfg.params, self.cfg.eps, self.search, hessians=hess, want_choice=True
        )
        return dirs, mu2


class CustomStrategy:
    """Adapt a per-point rule x -> BasisChoice to the batched interface."""

    def __init__(self, rule):
        self.rule = rule

    def choices(self, pts):
        m, ndim = pts.shape
        dirs = np.empty((m, ndim, ndim))
        mu2 = np.empty((m, ndim))
        for row, p in enumerate(pts):
            ch = self.rule(p)
            dirs[row] = ch.directions
            mu2[row] = ch.mu2
        return dirs, mu2


def step(x, choice, eps, rng):
    """One game move: draw (i, sign) uniformly over 2N outcomes and move to
    x + sign * eps * mu_i * v_i."""
    x = np.asarray(x, dtype=float)
    ndim = x.shape[0]
    idx, sign = _outcome_from_uniform(rng.random(), ndim)
    i = int(idx)
    s = int(sign)
    nxt = x + (s * eps * math.sqrt(choice.mu2[i])) * choice.directions[i]
    return nxt, (i, s)


def default_max_steps(cfg):
    R = cfg.domain.bounding_radius
    lam_eff = cfg.params.lam if cfg.params.lam > 0 else cfg.params.Lam / cfg.params.dim
    return 100 * int(math.ceil(4.0 * R * R / (lam_eff * cfg.eps**2)))


def _simulate(cfg, strategy, x0, seed, streams, max_steps, record):
    """Advance all requested streams until exit.

    Returns (taus, payoffs, final_positions, transcripts-or-None).
    """
    x0 = np.asarray(x0, dtype=float)
    if not contains(cfg.domain, x0):
        raise ValueError("x0 must lie inside the domain")
    n = len(streams)
    ndim = cfg.params.dim
    coef = cfg.eps**2 / (2.0 * ndim)

    gens = [_stream(seed, j) for j in streams]
    block = 256
    buf = np.empty((n, block))

    taus = np.zeros(n, dtype=np.int64)
    payoffs = np.zeros(n)
    finals = np.zeros((n, ndim))
    f_sum = np.zeros(n)

    if record:
        cap = block
        rec_pos = np.zeros((n, cap + 1, ndim))
        rec_pos[:, 0] = x0
        rec_dirs = np.zeros((n, cap, ndim, ndim))
        rec_mu2 = np.zeros((n, cap, ndim))
        rec_out = np.zeros((n, cap, 2), dtype=np.int64)

    alive = np.arange(n)
    pos = np.tile(x0, (n, 1))
    t = 0
    while alive.size:
        if t >= max_steps:
            raise MaxStepsExceeded(f"{alive.size} playouts alive after {max_steps} steps")
        if t % block == 0:
            for row in alive:
                buf[row] = gens[row].random(block)
        if record and t >= cap:
            grow = cap
            rec_pos = np.concatenate([rec_pos, np.zeros((n, grow, ndim))], axis=1)
            rec_dirs = np.concatenate([rec_dirs, np.zeros((n, grow, ndim, ndim))], axis=1)
            rec_mu2 = np.concatenate([rec_mu2, np.zeros((n, grow, ndim))], axis=1)
            rec_out = np.concatenate([rec_out, np.zeros((n, grow, 2), dtype=np.int64)], axis=1)
            cap += grow

        dirs, mu2 = strategy.choices(pos)
        u = buf[alive, t % block]
        idx, sign = _outcome_from_uniform(u, ndim)
        rows = np.arange(alive.size)
        v = dirs[rows, idx]
        m2 = mu2[rows, idx]
        new_pos = pos + (sign * cfg.eps * np.sqrt(m2))[:, None] * v

        f_sum[alive] += cfg.f(pos)
        if record:
            rec_dirs[alive, t] = dirs
            rec_mu2[alive, t] = mu2
            rec_out[alive, t, 0] = idx
            rec_out[alive, t, 1] = sign
            rec_pos[alive, t + 1] = new_pos

        inside = cfg.domain.contains_points(new_pos)
        if not inside.all():
            exited = alive[~inside]
            taus[exited] = t + 1
            finals[exited] = new_pos[~inside]
            payoffs[exited] = cfg.g(new_pos[~inside]) - coef * f_sum[exited]
        alive = alive[inside]
        pos = new_pos[inside]
        t += 1

    transcripts = None
    if record:
        transcripts = []
        for row in range(n):
            tau = int(taus[row])
            transcripts.append(
                Transcript(
                    positions=rec_pos[row, : tau + 1].copy(),
                    directions=rec_dirs[row, :tau].copy(),
                    mu2=rec_mu2[row, :tau].copy(),
                    outcomes=rec_out[row, :tau].copy(),
                    tau=tau,
                    payoff=float(payoffs[row]),
                    rng_seed=(int(seed), int(streams[row])),
                )
            )
    return taus, payoffs, finals, transcripts


def play(cfg, strategy, x0, rng_seed, max_steps=None):
    """One playout, fully recorded.  ``rng_seed`` is an int (stream 0 of
    that seed) or a (seed, stream) pair naming a row of a batched run."""
    seed, stream = _normalize_token(rng_seed)
    if max_steps is None:
        max_steps = default_max_steps(cfg)
    if max_steps < 1:
        raise ValueError("max_steps must be at least 1")
    _, _, _, transcripts = _simulate(cfg, strategy, x0, seed, [stream], max_steps, record=True)
    return transcripts[0]


def play_transcripts(cfg, strategy, x0, n, seed, max_steps=None, chunk=2000):
    """n recorded playouts on streams 0..n-1 of ``seed`` (chunked to bound
    the padded recording buffers)."""
    if max_steps is None:
        max_steps = default_max_steps(cfg)
    out = []
    for start in range(0, n, chunk):
        streams = range(start, min(start + chunk, n))
        _, _, _, transcripts = _simulate(cfg, strategy, x0, seed, list(streams), max_steps, record=True)
        out.extend(transcripts)
    return out


def estimate_value(cfg, strategy, x0, n, seed, max_steps=None):
    """Sample mean and standard error of the payoff over n playouts."""
    if n < 2:
        raise ValueError("need at least two playouts for a standard error")
    if max_steps is None:
        max_steps = default_max_steps(cfg)
    taus, payoffs, _, _ = _simulate(cfg, strategy, x0, seed, list(range(n)), max_steps, record=False)
    return McEstimate(
        mean=float(payoffs.mean()),
        std_error=float(payoffs.std(ddof=1) / math.sqrt(n)),
        n_playouts=n,
        mean_tau=float(taus.mean()),
        tau_std_error=float(taus.std(ddof=1) / math.sqrt(n)),
    )


def exit_time_bound_check(cfg, estimate, R):
    """Check mean_tau <= 4 R^2 / (lam eps^2) plus three standard errors.

    Returns (ok, margin); margin is the slack left under the bound.
    """
    bound = 4.0 * R * R / (cfg.params.lam * cfg.eps**2)
    limit = bound + 3.0 * estimate.tau_std_error
    return estimate.mean_tau <= limit, float(limit - estimate.mean_tau)


@dataclass
class MartingaleReport:
    """Per-step comparison of realised squared-radius increments against
    the exact conditional increment eps^2 (1/N) sum_i mu_i^2."""

    step_counts: np.ndarray
    step_mean_dev: np.ndarray
    step_se: np.ndarray
    pooled_mean_dev: float
    pooled_se: float
    max_abs_step_dev: float
    scales_exact: bool
    lower_bound_ok: bool


def martingale_diagnostic(transcripts, x0, params, eps):
    """Audit recorded playouts against the one-step conditional mean.

    The conditional mean of |x_{k+1} - x0|^2 - |x_k - x0|^2 given the
    choice at step k equals eps^2 (1/N) sum_i mu_i^2 exactly, and is at
    least lam * eps^2 for any admissible choice; the latter is checked
    deterministically from the recorded squared scales.
    """
    x0 = np.asarray(x0, dtype=float)
    devs = []
    step_ids = []
    scales_exact = True
    for tr in transcripts:
        if tr.positions.shape[0] < 1 or not np.array_equal(tr.positions[0], x0):
            raise MismatchedStart("transcript does not start at the given x0")
        if tr.tau == 0:
            continue
        sq = np.sum((tr.positions - x0) ** 2, axis=1)
        realized = np.diff(sq)
        exact = eps * eps * tr.mu2.sum(axis=1) / params.dim
        devs.append(realized - exact)
        step_ids.append(np.arange(tr.tau))
        if not np.isin(tr.mu2, (params.lam, params.Lam)).all():
            scales_exact = False
    if not devs:
        raise ValueError("no steps to audit")
    dev = np.concatenate(devs)
    ks = np.concatenate(step_ids)
    counts = np.bincount(ks)
    sums = np.bincount(ks, weights=dev)
    sqsums = np.bincount(ks, weights=dev * dev)
    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        var = np.where(counts > 1, (sqsums - counts * mean**2) / np.maximum(counts - 1, 1), np.nan)
        se = np.sqrt(np.maximum(var, 0.0) / np.maximum(counts, 1))
    multi = counts >= 2
    max_abs = float(np.max(np.abs(mean[multi]))) if multi.any() else 0.0
    pooled_se = float(dev.std(ddof=1) / math.sqrt(dev.size)) if dev.size > 1 else 0.0
    return MartingaleReport(
        step_counts=counts,
        step_mean_dev=mean,
        step_se=se,
        pooled_mean_dev=float(dev.mean()),
        pooled_se=pooled_se,
        max_abs_step_dev=max_abs,
        scales_exact=scales_exact,
        lower_bound_ok=scales_exact,  # mu_i^2 in {lam, Lam} forces the lam eps^2 floor
    )


def transcript_csv(tr, cfg):
    """Per-step export: k, coordinates, applied scale, sign, direction, f."""
    ndim = tr.positions.shape[1]
    header = "k," + ",".join(f"x{i+1}" for i in range(ndim)) + ",mu_applied,sign,dir_index,f_at_x"
    lines = [header]
    if tr.tau:
        f_vals = cfg.f(tr.positions[: tr.tau])
    for k in range(tr.tau):
        i = int(tr.outcomes[k, 0])
        coords = ",".join(format(c, ".17g") for c in tr.positions[k])
        mu = math.sqrt(tr.mu2[k, i])
        lines.append(
            f"{k},{coords},{format(mu, '.17g')},{int(tr.outcomes[k, 1])},{i},{format(float(f_vals[k]), '.17g')}"
        )
    return "\n".join(lines) + "\n"
