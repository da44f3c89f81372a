"""Critical-point solvers on the truncated lattice.

The workhorses:

    newton_solve        damped Newton on the residual, tridiagonal Jacobian
    mountain_pass       path-relaxation saddle search between two low points
    deflated_solve      Newton on the deflated residual to find new roots
    window_continuation re-solve on a wider window to vet truncation
    solution_sequence   assemble distinct solutions with increasing energy
    find_critical_points  deflation-based enumeration of all reachable roots

Convergence is always declared on the infinity norm of the residual, never
on step size (steps can stagnate near clamped Jacobian entries for p < 2).
Every returned result re-evaluates its diagnostics from scratch rather
than trusting the loop's last internal values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional, Sequence

import numpy as np
from scipy.linalg import solve_banded

from .lattice import (LatticeSeq, ProblemSpec, Window, cerami_metric, energy,
                      energy_many, phi_p, phi_p_prime, residual_many, sup_norm,
                      tail_mass)

__all__ = [
    "SolverConfig",
    "SolveResult",
    "SolutionSet",
    "ContinuationReport",
    "MountainPassError",
    "newton_solve",
    "mountain_pass",
    "deflated_solve",
    "window_continuation",
    "solution_sequence",
    "find_critical_points",
    "bump_amplitude",
]


class MountainPassError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    residual_tol: float = 1e-10
    max_iter: int = 100
    ls_shrink: float = 0.5
    ls_decrease: float = 1e-4
    max_backtracks: int = 40
    jacobian_cap: float = 1e8
    deflation_exponent: Optional[float] = None  # defaults to the problem's p
    path_points: int = 64
    max_path_sweeps: int = 4000
    handoff_residual: float = 1e-2
    stagnation_tol: float = 1e-9
    seed: int = 0
    tail_fraction: float = 0.8
    tail_tol: float = 1e-6
    drift_tol: float = 1e-6
    dedup_tol: float = 1e-6
    continuation_growth: int = 10

    def __post_init__(self):
        if self.residual_tol <= 0 or self.tail_tol <= 0 or self.drift_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not (0.0 < self.ls_shrink < 1.0):
            raise ValueError("line-search shrink factor must lie in (0, 1)")
        if self.path_points < 3:
            raise ValueError("a path needs at least 3 points")


class IterationRecord(NamedTuple):
    iteration: int
    residual_inf: float
    energy: float
    cerami: float


@dataclass(frozen=True)
class SolveResult:
    u: LatticeSeq
    energy: float
    residual_inf_norm: float
    cerami_metric: float
    tail_mass: float
    tail_threshold: int
    iterations: int
    converged: bool
    history: tuple = ()
    note: str = ""
    extras: dict = field(default_factory=dict, compare=False)


def _tail_threshold(window: Window, cfg: SolverConfig) -> int:
    return int(math.floor(cfg.tail_fraction * window.half_width))


def _finish(v: np.ndarray, prob: ProblemSpec, cfg: SolverConfig, iterations: int,
            history, note: str = "", extras: Optional[dict] = None) -> SolveResult:
    u = LatticeSeq(prob.window, v)
    r_inf = float(np.max(np.abs(residual_many(v, prob))))
    h = _tail_threshold(prob.window, cfg)
    return SolveResult(
        u=u,
        energy=energy(u, prob),
        residual_inf_norm=r_inf,
        cerami_metric=cerami_metric(u, prob),
        tail_mass=tail_mass(u, h, prob.p),
        tail_threshold=h,
        iterations=iterations,
        converged=bool(r_inf <= cfg.residual_tol),
        history=tuple(history),
        note=note,
        extras=extras or {},
    )


def _jacobian_bands(v: np.ndarray, prob: ProblemSpec, cfg: SolverConfig) -> np.ndarray:
    """Banded (ab) form of the tridiagonal residual Jacobian."""
    n = v.size
    a, b = prob.coeffs.a, prob.coeffs.b
    d = np.diff(v, prepend=0.0, append=0.0)
    w = phi_p_prime(prob.p, d, cap=cfg.jacobian_cap)          # length n+1
    wp = phi_p_prime(prob.p, v, cap=cfg.jacobian_cap)
    k = prob.window.indices
    main = a[:-1] * w[:-1] + a[1:] * w[1:] + b * wp - prob.lam * prob.nonlinearity.df_dt(k, v)
    ab = np.zeros((3, n))
    ab[0, 1:] = -(a[1:-1] * w[1:-1])   # superdiagonal: dr[i]/dv[i+1]
    ab[1, :] = main
    ab[2, :-1] = -(a[1:-1] * w[1:-1])  # subdiagonal: dr[i]/dv[i-1]
    return ab


def _newton_values(v0: np.ndarray, prob: ProblemSpec, cfg: SolverConfig):
    """Core damped Newton loop on raw values; returns (v, iters, history, note)."""
    v = np.array(v0, dtype=float)
    history = []

    def record(it, r):
        u = LatticeSeq(prob.window, v)
        history.append(IterationRecord(it, float(np.max(np.abs(r))),
                                       energy(u, prob), cerami_metric(u, prob)))

    r = residual_many(v, prob)
    note = ""
    it = 0
    record(it, r)
    while it < cfg.max_iter:
        r_inf = float(np.max(np.abs(r)))
        if r_inf <= cfg.residual_tol:
            break
        it += 1
        merit = float(r @ r)
        ab = _jacobian_bands(v, prob, cfg)
        delta = None
        try:
            cand = solve_banded((1, 1), ab, -r)
            if np.all(np.isfinite(cand)) and float(np.max(np.abs(cand))) < 1e14:
                delta = cand
        except np.linalg.LinAlgError:
            delta = None
        stepped = False
        if delta is not None:
            alpha = 1.0
            for _ in range(cfg.max_backtracks):
                v_try = v + alpha * delta
                r_try = residual_many(v_try, prob)
                m_try = float(r_try @ r_try)
                if np.isfinite(m_try) and m_try <= (1.0 - 2.0 * cfg.ls_decrease * alpha) * merit:
                    v, r = v_try, r_try
                    stepped = True
                    break
                alpha *= cfg.ls_shrink
        if not stepped:
            # Ill-conditioned or stalled Newton direction: steepest descent
            # on the merit function along -r.
            alpha = 1.0 / (1.0 + float(np.max(np.abs(r))))
            for _ in range(cfg.max_backtracks):
                v_try = v - alpha * r
                r_try = residual_many(v_try, prob)
                m_try = float(r_try @ r_try)
                if np.isfinite(m_try) and m_try < merit:
                    v, r = v_try, r_try
                    stepped = True
                    break
                alpha *= cfg.ls_shrink
        record(it, r)
        if not stepped:
            note = "no descent direction made progress"
            break
    else:
        note = "max_iter exceeded"
    return v, it, history, note


def newton_solve(u0: LatticeSeq, prob: ProblemSpec, cfg: SolverConfig) -> SolveResult:
    """Damped Newton refinement of a critical-point candidate."""
    if u0.window.half_width != prob.window.half_width:
        raise ValueError("initial guess lives on a different window than the problem")
    v, it, history, note = _newton_values(u0.values, prob, cfg)
    return _finish(v, prob, cfg, it, history, note)


def _reparametrize(path: np.ndarray) -> np.ndarray:
    """Redistribute path points uniformly by chord length (endpoints fixed).

    Keeps the discrete path a connected polyline; without this the points
    slide off into the basins on both sides of the separatrix and the
    discrete maximum leaks below the true pass level.
    """
    seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
    total = float(np.sum(seg))
    if total == 0.0:
        return path
    arc = np.concatenate([[0.0], np.cumsum(seg)])
    targets = np.linspace(0.0, total, path.shape[0])
    out = np.empty_like(path)
    out[0], out[-1] = path[0], path[-1]
    j = 0
    for i in range(1, path.shape[0] - 1):
        t = targets[i]
        while arc[j + 1] < t and j + 2 < arc.size:
            j += 1
        span = arc[j + 1] - arc[j]
        w = 0.0 if span == 0.0 else (t - arc[j]) / span
        out[i] = (1.0 - w) * path[j] + w * path[j + 1]
    return out


def mountain_pass(u_low: LatticeSeq, u_high: LatticeSeq, prob: ProblemSpec,
                  cfg: SolverConfig) -> SolveResult:
    """Relax a discrete path between two low-energy points onto a saddle.

    The segment from ``u_low`` to ``u_high`` is discretized into
    ``cfg.path_points`` configurations.  Each sweep moves the maximum-energy
    interior point one backtracked step along the negative residual, then
    redistributes the points along the polyline; once the maximum stagnates
    or its gradient is small the hump point is handed to ``newton_solve``
    and the polished result is accepted if it sits strictly above both
    endpoints.
    """
    n_pts = cfg.path_points
    s = np.linspace(0.0, 1.0, n_pts)[:, None]
    path = (1.0 - s) * u_low.values[None, :] + s * u_high.values[None, :]
    e_low = float(energy_many(u_low.values, prob))
    e_high = float(energy_many(u_high.values, prob))
    pass_floor = max(e_low, e_high)

    steps_log = []
    best_max = np.inf
    stall = 0
    handoff_residual = cfg.handoff_residual
    handoffs = 0
    for sweep in range(cfg.max_path_sweeps):
        energies = energy_many(path, prob)
        m = int(np.argmax(energies))
        if m == 0 or m == n_pts - 1:
            raise MountainPassError(
                "path maximum sits at an endpoint; no pass is bracketed "
                "(increase the amplitude of u_high)")
        e_max = float(energies[m])
        g = residual_many(path[m], prob)
        g_inf = float(np.max(np.abs(g)))
        if best_max - e_max < cfg.stagnation_tol * (1.0 + abs(e_max)):
            stall += 1
        else:
            stall = 0
        best_max = min(best_max, e_max)
        if g_inf <= handoff_residual or stall >= 40:
            handoffs += 1
            res = newton_solve(LatticeSeq(prob.window, path[m]), prob, cfg)
            if (res.converged and res.energy > pass_floor + 1e-12
                    and sup_norm(res.u) > 1e-9):
                extras = dict(res.extras)
                extras["mountain_pass"] = {"sweeps": sweep, "handoffs": handoffs,
                                           "steps": tuple(steps_log)}
                return replace(res, extras=extras)
            if handoffs >= 8:
                raise MountainPassError(
                    "repeated Newton handoffs failed to produce a point above "
                    "both endpoints; the pass geometry looks degenerate")
            handoff_residual *= 0.1
            stall = 0
        # Backtracked descent step on the hump point.
        gsq = float(g @ g)
        if gsq == 0.0:
            raise MountainPassError("zero gradient at an interior maximum that "
                                    "Newton could not certify as a pass point")
        alpha = 1.0 / (1.0 + g_inf)
        moved = False
        for _ in range(cfg.max_backtracks):
            cand = path[m] - alpha * g
            e_cand = float(energy_many(cand, prob))
            if e_cand <= e_max - cfg.ls_decrease * alpha * gsq:
                steps_log.append((sweep, e_max, e_cand))
                path[m] = cand
                moved = True
                break
            alpha *= cfg.ls_shrink
        if not moved:
            # Descent failed at machine precision: treat as stagnation.
            stall += 10
        path = _reparametrize(path)
    raise MountainPassError("path relaxation budget exhausted before a pass was found")


def _deflation_terms(v: np.ndarray, anchors: Sequence[np.ndarray], power: float):
    """Value and gradient of prod_i (1 + ||v - w_i||^(-power))."""
    value = 1.0
    grad = np.zeros_like(v)
    for w in anchors:
        dv = v - w
        s2 = float(dv @ dv)
        if s2 == 0.0:
            return np.inf, grad
        s = math.sqrt(s2)
        m = 1.0 + s ** (-power)
        value *= m
        grad += (-power * s ** (-power - 2.0) / m) * dv
    return value, value * grad


def deflated_solve(known, u0: LatticeSeq, prob: ProblemSpec,
                   cfg: SolverConfig) -> SolveResult:
    """Newton on the residual deflated at all known roots and their negations.

    Any root of the deflated residual away from the anchors is a root of the
    plain residual; the result is polished on the undeflated residual before
    it is returned.  A polished root that collapses back onto a known anchor
    is reported with ``converged=False``.
    """
    anchors = _anchor_values(known)
    if not anchors:
        raise ValueError("deflated_solve needs at least one known solution")
    power = cfg.deflation_exponent if cfg.deflation_exponent is not None else prob.p
    v = np.array(u0.values, dtype=float)
    n = v.size

    ok = True
    for _ in range(cfg.max_iter):
        r = residual_many(v, prob)
        M, gradM = _deflation_terms(v, anchors, power)
        if not np.isfinite(M):
            ok = False
            break
        rt = M * r
        if float(np.max(np.abs(rt))) <= cfg.residual_tol:
            break
        ab = _jacobian_bands(v, prob, cfg)
        J = np.zeros((n, n))
        J[np.arange(n), np.arange(n)] = ab[1]
        J[np.arange(n - 1), np.arange(1, n)] = ab[0, 1:]
        J[np.arange(1, n), np.arange(n - 1)] = ab[2, :-1]
        Jt = M * J + np.outer(r, gradM)
        try:
            delta = np.linalg.solve(Jt, -rt)
        except np.linalg.LinAlgError:
            ok = False
            break
        merit = float(rt @ rt)
        alpha, stepped = 1.0, False
        for _ in range(cfg.max_backtracks):
            v_try = v + alpha * delta
            r_try = residual_many(v_try, prob)
            M_try, _ = _deflation_terms(v_try, anchors, power)
            rt_try = M_try * r_try
            m_try = float(rt_try @ rt_try)
            if np.isfinite(m_try) and m_try < merit:
                v = v_try
                stepped = True
                break
            alpha *= cfg.ls_shrink
        if not stepped or not np.all(np.isfinite(v)) or float(np.max(np.abs(v))) > 1e14:
            ok = False
            break
    if not ok or not np.all(np.isfinite(v)):
        u = LatticeSeq(prob.window, np.where(np.isfinite(v), v, 0.0))
        return replace(newton_solve(u, prob, cfg), converged=False,
                       note="deflated iteration diverged")

    res = newton_solve(LatticeSeq(prob.window, v), prob, cfg)
    extras = dict(res.extras)
    extras["deflation"] = {"polish_move": float(np.max(np.abs(res.u.values - v)))}
    res = replace(res, extras=extras)
    if res.converged:
        dist = min(float(np.max(np.abs(res.u.values - w))) for w in anchors)
        if dist <= cfg.dedup_tol:
            return replace(res, converged=False,
                           note="polished root collapsed onto a known solution")
    return res


def _anchor_values(known) -> list:
    """Known roots plus their negations, deduplicated."""
    if isinstance(known, SolutionSet):
        items = [r.u.values for r in known]
    else:
        items = [np.asarray(getattr(w, "values", w), dtype=float) for w in known]
    anchors = []
    for w in items:
        for cand in (w, -w):
            if not any(np.array_equal(cand, a) for a in anchors):
                anchors.append(np.array(cand, dtype=float))
    return anchors


@dataclass(frozen=True)
class ContinuationReport:
    result: SolveResult
    drift: float
    boundary_peak: float
    truncation_artifact: bool


def window_continuation(result: SolveResult, prob: ProblemSpec, half_width_new: int,
                        cfg: SolverConfig) -> ContinuationReport:
    """Zero-pad onto a wider window, re-solve, and measure the drift."""
    K = prob.window.half_width
    if half_width_new <= K:
        raise ValueError(f"new half-width {half_width_new} must exceed {K}")
    boundary_peak = max(abs(result.u.value_at(-K)), abs(result.u.value_at(K)))
    prob_wide = prob.with_half_width(half_width_new)
    padded = result.u.padded_to(prob_wide.window)
    res_wide = newton_solve(padded, prob_wide, cfg)
    drift = float(np.max(np.abs(res_wide.u.values - padded.values)))
    return ContinuationReport(
        result=res_wide,
        drift=drift,
        boundary_peak=boundary_peak,
        truncation_artifact=bool(boundary_peak > 1e-3),
    )


def _canonical_values(values: np.ndarray, tol_rel: float = 1e-12) -> np.ndarray:
    """Flip the sign so the first significant entry is positive."""
    v = np.array(values, dtype=float)
    scale = float(np.max(np.abs(v)))
    if scale == 0.0:
        return v
    idx = np.argmax(np.abs(v) > tol_rel * scale)
    if v[idx] < 0.0:
        v = -v
    return v


@dataclass
class SolutionSet:
    """Solutions deduplicated up to sign, sorted by energy.

    Members are stored with a canonical sign (first significant entry
    positive), which makes merging order-independent; sign-dedup assumes an
    odd nonlinearity, where u and -u are the same physical solution.
    """

    tol: float = 1e-6
    warning: Optional[str] = None
    _items: list = field(default_factory=list)

    def add(self, result: SolveResult) -> bool:
        v = _canonical_values(result.u.values)
        for other in self._items:
            if other.u.values.shape == v.shape and np.max(np.abs(other.u.values - v)) <= self.tol:
                return False
        canon = replace(result, u=LatticeSeq(result.u.window, v))
        self._items.append(canon)
        self._items.sort(key=lambda r: (r.energy, tuple(r.u.values)))
        return True

    def contains_close(self, values: np.ndarray) -> bool:
        v = _canonical_values(values)
        return any(o.u.values.shape == v.shape and np.max(np.abs(o.u.values - v)) <= self.tol
                   for o in self._items)

    @property
    def results(self) -> tuple:
        return tuple(self._items)

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self._items])

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


def bump_amplitude(prob: ProblemSpec, site: int) -> Optional[float]:
    """Amplitude where the one-site stiffness balances the drive term.

    Solves a(j) + a(j+1) + b(j) times phi_p(c) = lambda f(j, c) for c > 0;
    spikes of this height are excellent Newton starts for one-bump states.
    """
    i = prob.window.position(site)
    stiff = float(prob.coeffs.a[i] + prob.coeffs.a[i + 1] + prob.coeffs.b[i])

    def gap(c):
        return prob.lam * float(prob.nonlinearity.f(site, c)) - stiff * phi_p(prob.p, c)

    grid = np.logspace(-3.0, 16.0, 640)
    vals = np.array([gap(c) for c in grid])
    sign_change = np.nonzero((vals[:-1] <= 0.0) & (vals[1:] > 0.0))[0]
    if sign_change.size == 0:
        return None
    lo, hi = grid[sign_change[0]], grid[sign_change[0] + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _profile(window: Window, pattern: dict) -> np.ndarray:
    v = np.zeros(window.size)
    for site, amp in pattern.items():
        v[window.position(site)] = amp
    return v


def _candidate_starts(prob: ProblemSpec, max_site: int = 3) -> list:
    """One-site balance spikes plus sign-pattern combinations of them."""
    K = prob.window.half_width
    sites = [s for s in range(0, min(max_site, K) + 1)]
    amp = {}
    for s in sites:
        c = bump_amplitude(prob, s)
        if c is not None:
            amp[s] = c
            if s > 0:
                amp[-s] = bump_amplitude(prob, -s) or c
    starts = []
    for s, c in amp.items():
        starts.append(_profile(prob.window, {s: c}))
    for s in sites[1:]:
        if s in amp and -s in amp:
            starts.append(_profile(prob.window, {s: amp[s], -s: -amp[-s]}))   # odd pair
            starts.append(_profile(prob.window, {s: amp[s], -s: amp[-s]}))    # even pair
    if 0 in amp and 1 in amp and -1 in amp:
        starts.append(_profile(prob.window, {0: amp[0], 1: amp[1], -1: amp[-1]}))
        starts.append(_profile(prob.window, {0: amp[0], 1: -amp[1], -1: -amp[-1]}))
        starts.append(_profile(prob.window, {0: -amp[0], 1: amp[1], -1: amp[-1]}))
    if 0 in amp and 1 in amp:
        starts.append(_profile(prob.window, {0: amp[0], 1: amp[1]}))
        starts.append(_profile(prob.window, {0: amp[0], 1: -amp[1]}))
    return starts


def find_critical_points(prob: ProblemSpec, cfg: SolverConfig, *,
                         random_starts: int = 0, amplitude: float = 2.0,
                         max_site: int = 3, max_rounds: int = 4,
                         deflation_starts: int = 200) -> SolutionSet:
    """Enumerate roots reachable by multistart Newton plus deflation rounds.

    The zero configuration is included whenever it is an exact root.  The
    set accepts every converged root (no decay or continuation filters);
    it is the raw critical-point inventory of the truncated problem.
    """
    rng = np.random.default_rng(cfg.seed)
    sols = SolutionSet(tol=cfg.dedup_tol)
    n = prob.window.size

    zero = LatticeSeq.zeros(prob.window)
    r0 = residual_many(zero.values, prob)
    if float(np.max(np.abs(r0))) <= cfg.residual_tol:
        sols.add(_finish(zero.values, prob, cfg, 0, []))

    starts = _candidate_starts(prob, max_site=max_site)
    if random_starts > 0:
        starts.extend(rng.uniform(-amplitude, amplitude, size=(random_starts, n)))

    for v in starts:
        res = newton_solve(LatticeSeq(prob.window, v), prob, cfg)
        if res.converged:
            sols.add(res)

    # Deflation rounds on a bounded start pool: enough to dig out roots the
    # plain multistart missed without re-running the full pool every round.
    pool = starts[: len(_candidate_starts(prob, max_site=max_site))]
    extra = min(deflation_starts, max(0, len(starts) - len(pool)))
    if extra > 0:
        pick = rng.choice(len(starts) - len(pool), size=extra, replace=False)
        pool = pool + [starts[len(pool) + i] for i in pick]
    for _ in range(max_rounds):
        if len(sols) == 0:
            break
        added = False
        for v in pool:
            res = deflated_solve(sols, LatticeSeq(prob.window, v), prob, cfg)
            if res.converged and not sols.contains_close(res.u.values):
                sols.add(res)
                added = True
        if not added:
            break
    return sols


def _sequence_accept(res: SolveResult, prob: ProblemSpec, cfg: SolverConfig):
    """Full acceptance for sequence members: residual, decay, continuation."""
    if not res.converged or res.residual_inf_norm > cfg.residual_tol:
        return None
    if res.energy <= 1e-8:  # excludes the zero solution and numerical ghosts
        return None
    if res.tail_mass > cfg.tail_tol:
        return None
    K = prob.window.half_width
    rep = window_continuation(res, prob, K + cfg.continuation_growth, cfg)
    if rep.truncation_artifact or not rep.result.converged or rep.drift >= cfg.drift_tol:
        return None
    extras = dict(res.extras)
    extras["continuation"] = {"drift": rep.drift, "half_width": K + cfg.continuation_growth,
                              "boundary_peak": rep.boundary_peak}
    return replace(res, extras=extras)


def _first_pass_state(prob: ProblemSpec, cfg: SolverConfig) -> Optional[SolveResult]:
    """Mountain pass from zero toward a large spike with negative energy."""
    zero = LatticeSeq.zeros(prob.window)
    shape = LatticeSeq.spike(prob.window, 0, 1.0)
    c = 1.0
    for _ in range(60):
        if float(energy_many(c * shape.values, prob)) < 0.0:
            break
        c *= 2.0
    else:
        return None
    try:
        return mountain_pass(zero, LatticeSeq(prob.window, c * shape.values), prob, cfg)
    except MountainPassError:
        return None


def solution_sequence(prob: ProblemSpec, cfg: SolverConfig, n_target: int) -> SolutionSet:
    """Collect ``n_target`` distinct solutions with strictly increasing energy.

    Mountain pass supplies the first excited state; one-site balance starts
    plus deflation supply the rest.  Every member passes the residual, tail,
    and window-continuation acceptance.  If the budget runs out first, the
    partial set is returned with a warning attached.
    """
    if n_target < 0:
        raise ValueError("n_target must be nonnegative")
    pool = SolutionSet(tol=cfg.dedup_tol)
    if n_target == 0:
        return pool
    rng = np.random.default_rng(cfg.seed)

    mp = _first_pass_state(prob, cfg)
    if mp is not None:
        acc = _sequence_accept(mp, prob, cfg)
        if acc is not None:
            pool.add(acc)

    starts = _candidate_starts(prob, max_site=min(4, prob.window.half_width))
    for v in starts:
        res = newton_solve(LatticeSeq(prob.window, v), prob, cfg)
        acc = _sequence_accept(res, prob, cfg)
        if acc is not None:
            pool.add(acc)

    anchors = SolutionSet(tol=cfg.dedup_tol)
    anchors.add(_finish(np.zeros(prob.window.size), prob, cfg, 0, []))
    for r in pool:
        anchors.add(r)

    round_idx = 0
    while len(_strict_ladder(pool)) < n_target and round_idx < 6:
        round_idx += 1
        added = False
        for v in starts:
            jitter = 1.0 + 0.05 * rng.standard_normal(v.shape)
            res = deflated_solve(anchors, LatticeSeq(prob.window, v * jitter), prob, cfg)
            if not res.converged or anchors.contains_close(res.u.values):
                continue
            anchors.add(res)
            acc = _sequence_accept(res, prob, cfg)
            if acc is not None and pool.add(acc):
                added = True
        if not added:
            break

    ladder = _strict_ladder(pool)
    out = SolutionSet(tol=cfg.dedup_tol)
    for r in ladder[:n_target] if n_target else []:
        out.add(r)
    if len(out) < n_target:
        out.warning = (f"found {len(out)} of {n_target} requested solutions "
                       f"before the search budget ran out")
    return out


def _strict_ladder(pool: SolutionSet, gap: float = 1e-8) -> list:
    """Greedy strictly-increasing-energy subsequence of the pool."""
    ladder = []
    last = -np.inf
    for r in pool:
        if r.energy > last + gap:
            ladder.append(r)
            last = r.energy
    return ladder
