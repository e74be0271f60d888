"""Fixed-step Schrodinger integration with cost and norm-drift tracking.

The integrator is classical 4th-order Runge-Kutta with no adaptive
stepping and no renormalization between steps: the norm drift is kept
as a free accuracy monitor.  The energy standard deviation of the
evolved state (the quantum-speed-limit integrand) is accumulated by
trapezoidal quadrature on the integration grid; states and fidelities
are recorded on a coarser output grid to keep memory bounded.
"""

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .models import ground_state_batch, hamiltonian_batch

NORM_DRIFT_LIMIT = 1e-7
DRIFT_TARGET = 1e-8
MAX_AUTO_STEPS = 4_000_000
_CHUNK = 4096


class IntegrationError(RuntimeError):
    """Non-finite amplitudes appeared during integration."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")


@dataclass(frozen=True)
class Trajectory:
    """Recorded time evolution of one annealing run.

    times/states/fidelities/running_cost live on the output grid;
    cost and norm_drift are accumulated over every integration step.
    A run whose norm drift exceeds NORM_DRIFT_LIMIT is flagged, not
    silently discarded.
    """

    times: np.ndarray
    s_values: np.ndarray
    states: np.ndarray
    fidelities: np.ndarray
    running_cost: np.ndarray
    cost: float
    norm_drift: float
    flagged: bool
    steps: int
    step_size: float

    @property
    def final_fidelity(self):
        return float(self.fidelities[-1])

    @property
    def final_state(self):
        return self.states[-1]


@njit(cache=True)
def _rk4_chunk(psi, Hs, h, sigma, norm2):  # pragma: no cover - jitted
    m = sigma.shape[0] - 1
    d = psi.shape[0]
    for n in range(m + 1):
        Hpsi = Hs[2 * n] @ psi
        n2 = 0.0
        me = 0.0
        m2 = 0.0
        for j in range(d):
            n2 += psi[j].real ** 2 + psi[j].imag ** 2
            me += (psi[j].conjugate() * Hpsi[j]).real
            m2 += Hpsi[j].real ** 2 + Hpsi[j].imag ** 2
        norm2[n] = n2
        var = m2 / n2 - (me / n2) ** 2
        sigma[n] = math.sqrt(var) if var > 0.0 else 0.0
        if n == m:
            break
        k1 = -1j * Hpsi
        k2 = -1j * (Hs[2 * n + 1] @ (psi + (0.5 * h) * k1))
        k3 = -1j * (Hs[2 * n + 1] @ (psi + (0.5 * h) * k2))
        k4 = -1j * (Hs[2 * n + 2] @ (psi + h * k3))
        psi = psi + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return psi


def norm_bound(model, samples=33):
    """Max |eigenvalue| of the total Hamiltonian over a coarse s grid."""
    s = np.linspace(0.0, 1.0, samples)
    H = hamiltonian_batch(model, s)
    w = np.linalg.eigvalsh(H)
    return float(np.abs(w).max())


def default_steps(model, k=1.0):
    """Step count meeting h*|H| <= 0.1 plus a norm-drift budget.

    The drift model is the RK4 per-step amplitude defect (h*E)^6/144
    summed over the run; the refinement is capped at MAX_AUTO_STEPS,
    so very long runs may come back flagged.
    """
    lam = max(k * norm_bound(model), 1e-12)
    T_eff = model.T / k
    floor = math.ceil(10.0 * T_eff * lam)
    h_drift = (144.0 * DRIFT_TARGET / (T_eff * lam**6)) ** 0.2
    drift = math.ceil(T_eff / h_drift)
    return max(floor, min(drift, MAX_AUTO_STEPS), 100)


def _record_nodes(steps, record_points):
    pts = min(record_points, steps + 1)
    return np.unique(np.round(np.linspace(0, steps, pts)).astype(int))


def _integrate(model, steps, k=1.0, s_span=(0.0, 1.0), psi0=None, record_points=501):
    s0, s1 = s_span
    if not 0.0 <= s0 < s1 <= 1.0:
        raise ValueError(f"bad s_span {s_span}")
    T_eff = model.T * (s1 - s0) / k
    h = T_eff / steps
    if psi0 is None:
        psi = ground_state_batch(model, np.array([s0]))[0].copy()
    else:
        psi = np.asarray(psi0, dtype=complex).copy()
        if psi.shape != (model.dim,):
            raise ValueError("psi0 has the wrong dimension")
    rec = _record_nodes(steps, record_points)
    sigma = np.empty(steps + 1)
    norm2 = np.empty(steps + 1)
    states = np.empty((rec.size, model.dim), dtype=complex)
    states[0] = psi
    for i in range(1, rec.size):
        for lo in range(rec[i - 1], rec[i], _CHUNK):
            hi = min(lo + _CHUNK, rec[i])
            sub = np.arange(2 * lo, 2 * hi + 1)
            s_sub = s0 + (s1 - s0) * sub * (0.5 / steps)
            Hs = hamiltonian_batch(model, s_sub)
            if k != 1.0:
                Hs *= k
            psi = _rk4_chunk(psi, Hs, h, sigma[lo : hi + 1], norm2[lo : hi + 1])
            if not np.all(np.isfinite(psi)):
                bad = lo + int(np.argmax(~np.isfinite(norm2[lo : hi + 1])))
                raise IntegrationError(bad)
        states[i] = psi
    s_rec = s0 + (s1 - s0) * rec / steps
    targets = ground_state_batch(model, s_rec)
    fid = np.abs(np.einsum("ij,ij->i", targets.conj(), states)) ** 2
    cum = np.concatenate(([0.0], np.cumsum(0.5 * h * (sigma[1:] + sigma[:-1]))))
    drift = float(np.abs(np.sqrt(norm2) - 1.0).max())
    return Trajectory(
        times=rec * h,
        s_values=s_rec,
        states=states,
        fidelities=fid,
        running_cost=cum[rec],
        cost=float(cum[-1]),
        norm_drift=drift,
        flagged=drift > NORM_DRIFT_LIMIT,
        steps=steps,
        step_size=h,
    )


def evolve(model, steps=None, record_points=501, s_span=(0.0, 1.0), psi0=None):
    """Integrate i dpsi/dt = H(t) psi from the instantaneous ground state.

    steps=None picks a step count via default_steps.  Fidelities are
    measured against the phase-fixed bare ground state, which the
    penalty leaves unchanged.  s_span/psi0 allow continuing a run from
    a stored state.
    """
    if steps is None:
        steps = default_steps(model)
    else:
        if steps < 1:
            raise ValueError("steps must be positive")
        h = model.T * (s_span[1] - s_span[0]) / steps
        if h * norm_bound(model) > 0.1 + 1e-9:
            raise ValueError("steps too coarse: need h*|H| <= 0.1")
    return _integrate(
        model, steps, s_span=s_span, psi0=psi0, record_points=record_points
    )


def cost_of(trajectory) -> float:
    """Accumulated quantum-speed-limit cost of a trajectory."""
    return trajectory.cost


def rescaling_check(model, k, steps=None):
    """Evolve H over [0, T] and k*H over [0, T/k]; compare endpoints.

    Returns (overlap squared of the final states, cost ratio); both are
    1 up to integrator round-off, independent of k.
    """
    if model.schedule.kind != "linear":
        raise ValueError("rescaling check requires a linear schedule")
    if k <= 0:
        raise ValueError("k must be positive")
    if steps is None:
        steps = default_steps(model)
    ref = _integrate(model, steps)
    scaled = _integrate(model, steps, k=k)
    a, b = ref.final_state, scaled.final_state
    overlap = float(
        np.abs(np.vdot(a, b)) ** 2 / (np.vdot(a, a).real * np.vdot(b, b).real)
    )
    return overlap, scaled.cost / ref.cost
