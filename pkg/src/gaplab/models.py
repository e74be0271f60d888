"""Hamiltonian families, schedules, and the spectrum-pinning penalty.

Two annealing families are constructed here, plus a non-stoquastic
baseline:

* ``grover`` -- database search, simulated in the invariant two
  dimensional subspace spanned by the marked state |m> and its
  orthogonal companion |m_perp>.  Never built in the full 2^L space.
* ``pspin`` -- the ferromagnetic p-spin model restricted to the
  maximal-spin sector (dimension L+1), where total spin is conserved.
* ``pspin-nonstoquastic`` -- the p-spin problem mixed with an
  antiferromagnetic transverse-squared term.

The penalty term shifts instantaneous eigenvalues without touching
eigenstates; mode ``eq16`` pins the whole spectrum to its s=0 values,
mode ``opt`` zeroes the ground level and lifts all excited levels to
the largest excited magnitude.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import SpectralDecomposition, eigendecompose

FAMILIES = ("grover", "pspin", "pspin-nonstoquastic")
PENALTY_MODES = ("none", "eq16", "opt")


# ---------------------------------------------------------------------------
# Schedules


@dataclass(frozen=True)
class Schedule:
    """Monotone scheduling function f on [0, 1] with f(0)=0, f(1)=1.

    kind is one of "linear", "grover-optimal" (needs L), "tabulated"
    (needs (s, f) knots covering [0, 1]).
    """

    kind: str = "linear"
    L: int | None = None
    knots: tuple = ()

    def __post_init__(self):
        if self.kind not in ("linear", "grover-optimal", "tabulated"):
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.kind == "grover-optimal":
            if self.L is None or self.L < 2:
                raise ValueError("grover-optimal schedule needs L >= 2")
        if self.kind == "tabulated":
            k = np.asarray(self.knots, dtype=float)
            if k.ndim != 2 or k.shape[1] != 2 or k.shape[0] < 2:
                raise ValueError("tabulated schedule needs >= 2 (s, f) knots")
            s, f = k[:, 0], k[:, 1]
            if s[0] != 0.0 or s[-1] != 1.0 or f[0] != 0.0 or f[-1] != 1.0:
                raise ValueError("tabulated knots must run from (0,0) to (1,1)")
            if np.any(np.diff(s) <= 0) or np.any(np.diff(f) < 0):
                raise ValueError("tabulated knots must be monotone")

    @staticmethod
    def linear():
        return Schedule("linear")

    @staticmethod
    def grover_optimal(L):
        return Schedule("grover-optimal", L=L)

    @staticmethod
    def tabulated(knots):
        return Schedule("tabulated", knots=tuple(map(tuple, knots)))


def schedule_value(schedule, s):
    """Evaluate f(s); accepts scalars or arrays."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0) or np.any(s > 1.0):
        raise ValueError("s must lie in [0, 1]")
    if schedule.kind == "linear":
        out = s
    elif schedule.kind == "grover-optimal":
        x = 2.0 ** (-schedule.L)
        amp = math.sqrt(x / (1.0 - x))
        half_angle = math.atan(1.0 / amp)
        out = 0.5 + 0.5 * amp * np.tan((2.0 * s - 1.0) * half_angle)
        # tan(atan(.)) round-off; endpoints are exact by definition
        out = np.where(s == 0.0, 0.0, np.where(s == 1.0, 1.0, out))
        out = np.clip(out, 0.0, 1.0)
    else:
        k = np.asarray(schedule.knots, dtype=float)
        out = np.interp(s, k[:, 0], k[:, 1])
    return out if out.ndim else float(out)


def schedule_derivative(schedule, s):
    """df/ds; piecewise slope for tabulated schedules."""
    s = np.asarray(s, dtype=float)
    if schedule.kind == "linear":
        out = np.ones_like(s)
    elif schedule.kind == "grover-optimal":
        x = 2.0 ** (-schedule.L)
        amp = math.sqrt(x / (1.0 - x))
        half_angle = math.atan(1.0 / amp)
        out = amp * half_angle / np.cos((2.0 * s - 1.0) * half_angle) ** 2
    else:
        k = np.asarray(schedule.knots, dtype=float)
        slopes = np.diff(k[:, 1]) / np.diff(k[:, 0])
        idx = np.clip(np.searchsorted(k[:, 0], s, side="right") - 1, 0, len(slopes) - 1)
        out = slopes[idx]
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Grover effective two-level model


@dataclass(frozen=True)
class GroverAngles:
    """Mixing angle and instantaneous gap of the effective search model."""

    cos_theta: float
    sin_theta: float
    gap: float
    theta: float


def grover_gap(L, s):
    """Bare instantaneous gap sqrt((1-2s)^2 + 2^(2-L) s (1-s)); vectorized."""
    s = np.asarray(s, dtype=float)
    x = 2.0 ** (-L)
    g = np.sqrt((1.0 - 2.0 * s) ** 2 + 4.0 * x * s * (1.0 - s))
    return g if g.ndim else float(g)


def _grover_trig(L, s):
    s = np.asarray(s, dtype=float)
    x = 2.0 ** (-L)
    gap = np.sqrt((1.0 - 2.0 * s) ** 2 + 4.0 * x * s * (1.0 - s))
    cos_t = (1.0 - 2.0 * (1.0 - s) * (1.0 - x)) / gap
    sin_t = 2.0 * (1.0 - s) * np.sqrt(x * (1.0 - x)) / gap
    return cos_t, sin_t, gap


def grover_angles(L, s) -> GroverAngles:
    """Mixing angle of the search Hamiltonian at normalized time s.

    theta = atan2(sin, cos) lies in [0, pi]; sin(theta) >= 0 always.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    cos_t, sin_t, gap = _grover_trig(L, float(s))
    return GroverAngles(
        cos_theta=float(cos_t),
        sin_theta=float(sin_t),
        gap=float(gap),
        theta=float(np.arctan2(sin_t, cos_t)),
    )


def grover_matrices(L):
    """Effective (problem, driver) pair in the {|m>, |m_perp>} basis."""
    x = 2.0 ** (-L)
    c = math.sqrt(x * (1.0 - x))
    Hp = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)
    Hd = np.array([[1.0 - x, -c], [-c, x]], dtype=complex)
    return Hp, Hd


def grover_hamiltonian(L, s, penalty="none"):
    """Effective 2x2 search Hamiltonian, optionally with the pinning penalty.

    penalty="eq16" replaces the gap prefactor by 1, so the spectrum is
    {0, 1} for every s.
    """
    if penalty not in ("none", "eq16"):
        raise ValueError(f"penalty must be 'none' or 'eq16', got {penalty!r}")
    a = grover_angles(L, s)
    g = 1.0 if penalty == "eq16" else a.gap
    return np.array(
        [
            [0.5 - 0.5 * g * a.cos_theta, -0.5 * g * a.sin_theta],
            [-0.5 * g * a.sin_theta, 0.5 + 0.5 * g * a.cos_theta],
        ],
        dtype=complex,
    )


def grover_eigen(L, s):
    """Closed-form eigensystem of the bare search model.

    Returns (E0, E1, v0, v1) in the {|m>, |m_perp>} basis with
    v0 = (cos(theta/2), sin(theta/2)) and v1 = (-sin(theta/2), cos(theta/2)).
    """
    a = grover_angles(L, s)
    half = 0.5 * a.theta
    c, d = math.cos(half), math.sin(half)
    v0 = np.array([c, d], dtype=complex)
    v1 = np.array([-d, c], dtype=complex)
    return 0.5 * (1.0 - a.gap), 0.5 * (1.0 + a.gap), v0, v1


def grover_ground_derivative_overlap(L, s):
    """Closed form |<E1| d/ds |E0>| for the search model; vectorized.

    Multiply by 1/T for the physical-time matrix element.
    """
    s = np.asarray(s, dtype=float)
    x = 2.0 ** (-L)
    num = np.sqrt((1.0 - x) * x)
    den = 1.0 + 4.0 * s * s * (1.0 - x) - 4.0 * s * (1.0 - x)
    out = num / den
    return out if out.ndim else float(out)


def grover_magnetization(L, s):
    """Normalized ground-state magnetization cos^2(t/2) - sin^2(t/2)/(2^L-1)."""
    a = grover_angles(L, s)
    c2 = math.cos(0.5 * a.theta) ** 2
    return c2 - (1.0 - c2) / (2.0**L - 1.0)


# ---------------------------------------------------------------------------
# p-spin family in the maximal-spin sector


def spin_operators(L):
    """(Sz, Sx) for total spin S = L/2 in the (L+1)-dim sector basis.

    Basis ordering is m = S, S-1, ..., -S, so Sz is diagonal descending.
    """
    if L < 2:
        raise ValueError("L must be >= 2")
    S = L / 2.0
    m = S - np.arange(L + 1)
    Sz = np.diag(m).astype(complex)
    # <m+1|Sx|m> couples basis index i+1 <-> i with m = m[i+1]
    off = 0.5 * np.sqrt(S * (S + 1.0) - m[1:] * (m[1:] + 1.0))
    Sx = np.zeros((L + 1, L + 1), dtype=complex)
    idx = np.arange(L)
    Sx[idx, idx + 1] = off
    Sx[idx + 1, idx] = off
    return Sz, Sx


def pspin_matrices(L, p):
    """(problem, driver) pair: -L ((2/L) Sz)^p and -2 Sx."""
    if p < 2:
        raise ValueError("p must be >= 2")
    Sz, Sx = spin_operators(L)
    m = np.real(np.diag(Sz))
    Hp = np.diag(-L * (2.0 * m / L) ** p).astype(complex)
    Hd = -2.0 * Sx
    return Hp, Hd


def pspin_qa_hamiltonian(L, p, s):
    """s H_p + (1-s) H_d in the maximal-spin sector."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    Hp, Hd = pspin_matrices(L, p)
    return s * Hp + (1.0 - s) * Hd


def nonstoquastic_matrices(L, p, lam):
    """(problem, driver) with the antiferromagnetic transverse-squared mix."""
    if not 0.0 < lam <= 1.0:
        raise ValueError("lambda must lie in (0, 1]")
    Hp, Hd = pspin_matrices(L, p)
    _, Sx = spin_operators(L)
    Hns = L * ((2.0 / L) * Sx) @ ((2.0 / L) * Sx)
    return lam * Hp + (1.0 - lam) * Hns, Hd


def nonstoquastic_hamiltonian(L, p, lam, s):
    """s (lam H_p + (1-lam) H_NS) + (1-s) H_d."""
    if not 0.0 <= s <= 1.0:
        raise ValueError("s must lie in [0, 1]")
    Hprob, Hd = nonstoquastic_matrices(L, p, lam)
    return s * Hprob + (1.0 - s) * Hd


# ---------------------------------------------------------------------------
# Penalty term


def penalty_term(H_qa_at_s, spectrum_at_0: SpectralDecomposition, mode="eq16"):
    """Eigenstate-preserving penalty for the instantaneous Hamiltonian.

    mode "eq16": coefficients E_i(0) - E_i(s) pin the spectrum to its
    s=0 values.  mode "opt": the ground level is shifted to 0 and every
    excited level to max_{j>=1} |E_j(s)|.  Either way the result
    commutes with H_qa_at_s (shared eigenbasis).
    """
    if mode in ("optimal-eq18",):
        mode = "opt"
    if mode not in ("eq16", "opt"):
        raise ValueError(f"unknown penalty mode {mode!r}")
    dec = eigendecompose(H_qa_at_s)
    if dec.dim != spectrum_at_0.dim:
        raise ValueError(
            f"dimension mismatch: {dec.dim} vs s=0 spectrum {spectrum_at_0.dim}"
        )
    w = dec.eigenvalues
    _check_pairing(w)
    if mode == "eq16":
        coeff = spectrum_at_0.eigenvalues - w
    else:
        top = np.abs(w[1:]).max()
        coeff = -w + top
        coeff[0] = -w[0]
    V = dec.eigenvectors
    return (V * coeff) @ V.conj().T


def _check_pairing(w):
    scale = max(np.abs(w).max(initial=0.0), 1e-300)
    gaps = np.diff(w)
    if gaps.size and gaps.min() < 1e-10 * scale:
        i = int(np.argmin(gaps))
        raise ValueError(
            f"degenerate levels ({i}, {i + 1}) make the penalty pairing "
            f"ambiguous: spacing {gaps[i]:.3e}"
        )


# ---------------------------------------------------------------------------
# Anneal model


@dataclass(frozen=True)
class AnnealModel:
    """A parameterized family s -> H(s) with schedule and penalty mode.

    The total Hamiltonian at normalized time s is
    H_QA(f(s)) + H_pena(f(s)); the penalty pins the spectrum to its
    f=0 values ("eq16") or applies the optimal level shifts ("opt").
    """

    family: str
    L: int
    p: int = 5
    lam: float = 0.1
    schedule: Schedule = field(default_factory=Schedule.linear)
    penalty: str = "none"
    T: float = 20.0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.L < 2:
            raise ValueError("L must be >= 2")
        if self.p < 2:
            raise ValueError("p must be >= 2")
        if not 0.0 < self.lam <= 1.0:
            raise ValueError("lambda must lie in (0, 1]")
        if self.penalty == "optimal-eq18":
            object.__setattr__(self, "penalty", "opt")
        if self.penalty not in PENALTY_MODES:
            raise ValueError(f"penalty must be one of {PENALTY_MODES}")
        if self.T <= 0.0:
            raise ValueError("T must be positive")

    @property
    def dim(self):
        return 2 if self.family == "grover" else self.L + 1

    def problem_driver(self):
        """Effective (problem, driver) matrices of the family."""
        if self.family == "grover":
            return grover_matrices(self.L)
        if self.family == "pspin":
            return pspin_matrices(self.L, self.p)
        return nonstoquastic_matrices(self.L, self.p, self.lam)

    def qa_hamiltonian(self, f):
        """Bare interpolated Hamiltonian at schedule value f."""
        Hp, Hd = self.problem_driver()
        return f * Hp + (1.0 - f) * Hd

    def pinned_spectrum(self):
        """Eigenvalues at f = 0 (the levels the eq16 penalty pins to)."""
        return eigendecompose(self.qa_hamiltonian(0.0)).eigenvalues

    def pinned_gap(self):
        """Ground-to-first gap of the penalized total Hamiltonian."""
        w = self.pinned_spectrum()
        if self.penalty == "opt":
            raise ValueError("opt penalty gap is time dependent; use total_hamiltonian")
        return float(w[1] - w[0])

    def total_hamiltonian(self, s):
        """H_QA(f(s)) plus the active penalty term."""
        f = schedule_value(self.schedule, s)
        H = self.qa_hamiltonian(f)
        if self.penalty == "none":
            return H
        spec0 = eigendecompose(self.qa_hamiltonian(0.0))
        return H + penalty_term(H, spec0, mode=self.penalty)

    def ground_state(self, s):
        """Phase-fixed instantaneous ground state of the bare Hamiltonian."""
        return ground_state_batch(self, np.atleast_1d(float(s)))[0]


def hamiltonian_batch(model, s_values):
    """Stacked total Hamiltonians, shape (len(s), dim, dim), complex.

    This is the hot path used by the integrator; the penalized p-spin
    variants go through a batched eigendecomposition.  A model object
    carrying its own ``hamiltonian_batch`` attribute is dispatched to
    directly (used for synthetic models in tests).
    """
    custom = getattr(model, "hamiltonian_batch", None)
    if custom is not None:
        return custom(np.asarray(s_values, dtype=float))
    s = np.asarray(s_values, dtype=float)
    f = np.asarray(schedule_value(model.schedule, s), dtype=float)
    if model.family == "grover":
        cos_t, sin_t, gap = _grover_trig(model.L, f)
        if model.penalty == "none":
            g0, g1 = gap * cos_t, gap * sin_t
        elif model.penalty == "eq16":
            g0, g1 = cos_t, sin_t
        else:
            # levels {0, E1}: H = E1 |E1><E1|
            return _grover_opt_batch(cos_t, sin_t, gap)
        H = np.empty((f.shape[0], 2, 2), dtype=complex)
        H[:, 0, 0] = 0.5 - 0.5 * g0
        H[:, 1, 1] = 0.5 + 0.5 * g0
        H[:, 0, 1] = -0.5 * g1
        H[:, 1, 0] = -0.5 * g1
        return H
    Hp, Hd = model.problem_driver()
    Hp, Hd = Hp.real, Hd.real
    H = f[:, None, None] * Hp + (1.0 - f)[:, None, None] * Hd
    if model.penalty == "none":
        return H.astype(complex)
    w, V = np.linalg.eigh(H)
    if model.penalty == "eq16":
        levels = np.linalg.eigvalsh(Hd)
        Ht = np.einsum("kij,j,klj->kil", V, levels, V)
    else:
        top = np.abs(w[:, 1:]).max(axis=1)
        levels = np.where(
            np.arange(w.shape[1]) == 0, 0.0, top[:, None] + np.zeros_like(w)
        )
        Ht = np.einsum("kij,kj,klj->kil", V, levels, V)
    return Ht.astype(complex)


def _grover_opt_batch(cos_t, sin_t, gap):
    e1 = 0.5 * (1.0 + gap)
    theta = np.arctan2(sin_t, cos_t)
    c, d = np.cos(0.5 * theta), np.sin(0.5 * theta)
    H = np.empty((gap.shape[0], 2, 2), dtype=complex)
    H[:, 0, 0] = e1 * d * d
    H[:, 1, 1] = e1 * c * c
    H[:, 0, 1] = -e1 * d * c
    H[:, 1, 0] = -e1 * d * c
    return H


def ground_state_batch(model, s_values):
    """Phase-fixed bare ground states at each s, shape (len(s), dim).

    The penalty shares the bare eigenbasis, so these are also the
    ground states of the penalized total Hamiltonian.
    """
    custom = getattr(model, "ground_state_batch", None)
    if custom is not None:
        return custom(np.asarray(s_values, dtype=float))
    s = np.asarray(s_values, dtype=float)
    f = np.asarray(schedule_value(model.schedule, s), dtype=float)
    if model.family == "grover":
        cos_t, sin_t, _ = _grover_trig(model.L, f)
        theta = np.arctan2(sin_t, cos_t)
        out = np.empty((f.shape[0], 2), dtype=complex)
        out[:, 0] = np.cos(0.5 * theta)
        out[:, 1] = np.sin(0.5 * theta)
        return out
    Hp, Hd = model.problem_driver()
    H = f[:, None, None] * Hp.real + (1.0 - f)[:, None, None] * Hd.real
    _, V = np.linalg.eigh(H)
    v0 = V[:, :, 0]
    lead = np.argmax(np.abs(v0), axis=1)
    sign = np.sign(v0[np.arange(v0.shape[0]), lead])
    return (v0 * sign[:, None]).astype(complex)


def counterdiabatic_norm(model, s):
    """Operator norm of the counter-diabatic term at normalized time s.

    Computed from the bare eigenbasis as the root-sum-square of
    <E_m| dH/dt |E_n> / (E_n - E_m) over all level pairs n != m, with
    the analytic dH/df = H_p - H_d scaled by (df/ds)/T.
    """
    f = schedule_value(model.schedule, float(s))
    df = schedule_derivative(model.schedule, float(s))
    dec = eigendecompose(model.qa_hamiltonian(f))
    w, V = dec.eigenvalues, dec.eigenvectors
    scale = max(np.abs(w).max(initial=0.0), 1e-300)
    spacing = np.diff(w)
    if spacing.size and spacing.min() < 1e-10 * scale:
        i = int(np.argmin(spacing))
        raise ValueError(
            f"levels ({i}, {i + 1}) are nearly degenerate at s={s}: "
            f"spacing {spacing[i]:.3e}"
        )
    Hp, Hd = model.problem_driver()
    M = V.conj().T @ ((Hp - Hd) * (df / model.T)) @ V
    diff = w[None, :] - w[:, None]
    np.fill_diagonal(diff, 1.0)
    ratio = M / diff
    np.fill_diagonal(ratio, 0.0)
    return float(np.sqrt(np.sum(np.abs(ratio) ** 2)))
