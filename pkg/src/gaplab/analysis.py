"""Diagnostics: adiabatic-condition profiles, magnetization, fits, sweeps.

The transition matrix element for penalized models is never obtained by
differentiating the penalized operator numerically.  Because the
penalty is diagonal in the instantaneous bare eigenbasis, the identity
|<E1| dH/dt |E0>| = gap * |<E1| d/dt |E0>| lets us compute it from the
bare eigensystem and rescale by the penalized gap, which is exact.
"""

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import IntegrationError, evolve
from .linalg import eigendecompose
from .models import grover_angles, schedule_derivative, schedule_value


@dataclass(frozen=True)
class ConditionSample:
    """Gap, transition matrix and adiabatic-condition term at one s."""

    s: float
    gap: float
    transition: float
    eta: float
    eta_gen: float | None = None


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares fit of value = alpha * 2^(beta * L) in log2 space."""

    alpha: float
    beta: float
    points: tuple
    residual: float

    def predict(self, L):
        return self.alpha * 2.0 ** (self.beta * np.asarray(L, dtype=float))


@dataclass(frozen=True)
class AsymptoteFit:
    """Fit of F = 1 + a1/T + a2/T^2 against (T, F) samples."""

    a1: float
    a2: float
    points: tuple

    def predict(self, T):
        T = np.asarray(T, dtype=float)
        return 1.0 + self.a1 / T + self.a2 / T**2


@dataclass(frozen=True)
class SweepPoint:
    T: float
    fidelity: float | None
    cost: float | None
    flagged: bool = False
    error: str | None = None


@dataclass(frozen=True)
class MinTimeResult:
    """Smallest grid T whose final fidelity reaches the threshold.

    found=False carries the best (T, fidelity) seen instead.
    """

    found: bool
    T: float | None
    cost: float | None
    fidelity: float | None
    best_T: float | None
    best_fidelity: float | None


def _bare_sample(model, s):
    """(gap_bare, |<E1|dH/df|E0>|, f, df/ds) from the bare eigensystem."""
    f = schedule_value(model.schedule, s)
    df = schedule_derivative(model.schedule, s)
    dec = eigendecompose(model.qa_hamiltonian(f))
    gap = float(dec.eigenvalues[1] - dec.eigenvalues[0])
    if gap <= 1e-12:
        raise ValueError(f"level crossing at s={s}: bare gap {gap:.3e}")
    Hp, Hd = model.problem_driver()
    tm_f = abs(np.vdot(dec.vector(1), (Hp - Hd) @ dec.vector(0)))
    return gap, float(tm_f), float(f), float(df)


def condition_profile(model, s_grid):
    """ConditionSample per grid point, in physical time (1/T factors in).

    For penalized models the bare matrix element is rescaled by the
    pinned gap; eta_gen (the per-schedule form, without 1/T) is filled
    when the schedule is non-linear.
    """
    pinned_gap = None
    if model.penalty == "eq16":
        pinned_gap = model.pinned_gap()
    out = []
    for s in np.asarray(s_grid, dtype=float):
        gap_bare, tm_f, f, df = _bare_sample(model, s)
        if model.penalty == "none":
            gap, tm = gap_bare, tm_f
        elif model.penalty == "eq16":
            gap = pinned_gap
            tm = gap * tm_f / gap_bare
        else:  # opt: levels {0, max_j |E_j|}
            w = np.linalg.eigvalsh(model.qa_hamiltonian(f))
            gap = float(np.abs(w[1:]).max())
            tm = gap * tm_f / gap_bare
        transition = tm * abs(df) / model.T
        eta = transition / gap**2
        eta_gen = None
        if model.schedule.kind != "linear":
            eta_gen = abs(df) * tm / gap**2
        out.append(
            ConditionSample(
                s=float(s), gap=gap, transition=transition, eta=eta, eta_gen=eta_gen
            )
        )
    return out


def excited_condition_profile(model, s_grid, max_level=None):
    """Per-level terms eta_j = transition_j / gap_j^2 for j >= 1.

    Returns an (len(s_grid), n_levels) array ordered by excited level.
    Uses the same bare-eigenbasis rescaling as condition_profile.
    """
    rows = []
    pinned = model.pinned_spectrum() if model.penalty == "eq16" else None
    Hp, Hd = model.problem_driver()
    for s in np.asarray(s_grid, dtype=float):
        f = schedule_value(model.schedule, s)
        df = schedule_derivative(model.schedule, s)
        dec = eigendecompose(model.qa_hamiltonian(f))
        w, V = dec.eigenvalues, dec.eigenvectors
        n = w.size if max_level is None else min(max_level + 1, w.size)
        col = V[:, 0]
        elems = np.abs(V[:, 1:n].conj().T @ ((Hp - Hd) @ col))
        gaps_bare = w[1:n] - w[0]
        if model.penalty == "eq16":
            gaps = pinned[1:n] - pinned[0]
            elems = gaps * elems / gaps_bare
        else:
            gaps = gaps_bare
        rows.append(elems * abs(df) / model.T / gaps**2)
    return np.asarray(rows)


def transition_matrix_max(model, s_grid) -> float:
    """Max of the physical-time transition matrix over the grid."""
    return max(c.transition for c in condition_profile(model, s_grid))


def magnetization(L, s) -> float:
    """Normalized ground-state magnetization of the search model in [-1, 1]."""
    a = grover_angles(L, s)
    c2 = math.cos(0.5 * a.theta) ** 2
    return c2 - (1.0 - c2) / (2.0**L - 1.0)


def two_level_std(F) -> float:
    """Energy std sqrt(F (1 - F)) of a two-level superposition at fidelity F."""
    if not 0.0 <= F <= 1.0:
        raise ValueError("F must lie in [0, 1]")
    return math.sqrt(F * (1.0 - F))


def scaling_fit(points) -> ScalingFit:
    """Closed-form log2-space least squares of value = alpha 2^(beta L)."""
    pts = [(float(L), float(v)) for L, v in points]
    if len(pts) < 2:
        raise ValueError("need at least 2 points")
    L = np.array([p[0] for p in pts])
    v = np.array([p[1] for p in pts])
    if np.any(v <= 0.0):
        raise ValueError("all values must be positive")
    y = np.log2(v)
    A = np.column_stack([np.ones_like(L), L])
    (c0, c1), *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - (c0 + c1 * L)
    return ScalingFit(
        alpha=float(2.0**c0),
        beta=float(c1),
        points=tuple(pts),
        residual=float(np.sqrt(np.mean(res**2))),
    )


def fidelity_asymptote_fit(points) -> AsymptoteFit:
    """Exact least squares for (a1, a2) in F = 1 + a1/T + a2/T^2."""
    pts = [(float(T), float(F)) for T, F in points]
    T = np.array([p[0] for p in pts])
    F = np.array([p[1] for p in pts])
    if np.unique(T).size < 2:
        raise ValueError("need at least 2 distinct T values")
    A = np.column_stack([1.0 / T, 1.0 / T**2])
    sol, *_ = np.linalg.lstsq(A, F - 1.0, rcond=None)
    return AsymptoteFit(a1=float(sol[0]), a2=float(sol[1]), points=tuple(pts))


def _sweep_one(args):
    model, T, steps = args
    m = replace(model, T=float(T))
    try:
        traj = evolve(m, steps=steps)
    except IntegrationError as exc:
        return SweepPoint(T=float(T), fidelity=None, cost=None, error=str(exc))
    return SweepPoint(
        T=float(T),
        fidelity=traj.final_fidelity,
        cost=traj.cost,
        flagged=traj.flagged,
    )


def cost_fidelity_sweep(model, T_grid, steps=None, workers=1):
    """One evolve per T; returns SweepPoints ordered by T.

    Integration failures are recorded on their row and the sweep
    continues.  Deterministic for fixed inputs regardless of workers.
    """
    grid = sorted(float(T) for T in T_grid)
    tasks = [(model, T, steps) for T in grid]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def min_annealing_time(model, T_grid, threshold=0.5, steps=None) -> MinTimeResult:
    """Scan T_grid ascending; stop at the first final fidelity >= threshold."""
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    grid = sorted(float(T) for T in T_grid)
    if np.any(np.asarray(grid) <= 0.0):
        raise ValueError("annealing times must be positive")
    best_T, best_F = None, -1.0
    for T in grid:
        traj = evolve(replace(model, T=T), steps=steps)
        F = traj.final_fidelity
        if F > best_F:
            best_T, best_F = T, F
        if F >= threshold:
            return MinTimeResult(
                found=True, T=T, cost=traj.cost, fidelity=F, best_T=T, best_fidelity=F
            )
    return MinTimeResult(
        found=False, T=None, cost=None, fidelity=None, best_T=best_T, best_fidelity=best_F
    )
