"""End-to-end acceptance checks, one test per headline result.

These are slower than the unit tests; the scaling fits (5, 7, 12)
dominate the runtime.  Each test prints a single PASS line with the
measured numbers so a full run reads as a scorecard.
"""

import numpy as np

from gaplab import (
    AnnealModel,
    Schedule,
    evolve,
    fidelity_asymptote_fit,
    grover_eigen,
    grover_gap,
    grover_ground_derivative_overlap,
    hamiltonian_batch,
    magnetization,
    min_annealing_time,
    operator_norm,
    rescaling_check,
    scaling_fit,
    schedule_value,
    transition_matrix_max,
    two_level_std,
    expectation_and_std,
)


def _grover(L, T=20.0, penalty="none", schedule=None):
    return AnnealModel(
        family="grover",
        L=L,
        schedule=schedule or Schedule.linear(),
        penalty=penalty,
        T=T,
    )


def _pspin(L, T=20.0, penalty="none", family="pspin"):
    return AnnealModel(
        family=family, L=L, schedule=Schedule.linear(), penalty=penalty, T=T
    )


def test_criterion_01_penalized_grover_gap_constant():
    s = np.linspace(0.0, 1.0, 1000)
    worst = 0.0
    for L in range(2, 15):
        w = np.linalg.eigvalsh(hamiltonian_batch(_grover(L, penalty="eq16"), s))
        worst = max(worst, float(np.abs(w[:, 1] - w[:, 0] - 1.0).max()))
    assert worst <= 1e-12
    print(f"PASS criterion 1: penalized search gap == 1, max |dev| = {worst:.2e}")


def test_criterion_02_bare_grover_minimum_gap():
    worst = 0.0
    for L in range(2, 15):
        worst = max(worst, abs(grover_gap(L, 0.5) - 2.0 ** (-L / 2.0)))
    assert worst <= 1e-12
    print(f"PASS criterion 2: min gap 2^(-L/2), max |dev| = {worst:.2e}")


def test_criterion_03_transition_matrix_closed_form():
    delta = 1e-7
    worst = 0.0
    for L in (4, 10, 14):
        for s in np.linspace(0.01, 0.99, 100):
            closed = grover_ground_derivative_overlap(L, s)
            vm = grover_eigen(L, s - delta)[2]
            vp = grover_eigen(L, s + delta)[2]
            v1 = grover_eigen(L, s)[3]
            fd = abs(np.vdot(v1, (vp - vm) / (2.0 * delta)))
            worst = max(worst, abs(fd - closed) / closed)
        T = 20.0
        peak = grover_ground_derivative_overlap(L, 0.5) / T
        assert abs(peak - np.sqrt(2.0**L - 1.0) / T) <= 1e-9 * peak
    assert worst < 1e-5
    print(f"PASS criterion 3: closed form vs finite difference, max rel err = {worst:.2e}")


def test_criterion_04_fidelity_ordering():
    Ls = range(4, 15)
    bare = [evolve(_grover(L)).final_fidelity for L in Ls]
    pen = [evolve(_grover(L, penalty="eq16")).final_fidelity for L in Ls]
    for b, p in zip(bare, pen):
        assert p > b
    assert all(x > y for x, y in zip(bare, bare[1:]))
    assert all(x > y for x, y in zip(pen, pen[1:]))
    print(
        "PASS criterion 4: penalized fidelity beats bare at every L, both decreasing "
        f"(bare {bare[0]:.3f}->{bare[-1]:.3f}, pen {pen[0]:.3f}->{pen[-1]:.3f})"
    )


def test_criterion_05_grover_cost_scaling():
    Ls = (4, 6, 8, 10, 12)
    bare_grid = [5 * n for n in range(1, 20)] + [100 + 50 * m for m in range(119)]
    pen_grid = [10 * n for n in range(1, 21)]

    pts_bare, pts_pen = [], []
    for L in Ls:
        r = min_annealing_time(_grover(L), bare_grid)
        assert r.found, f"bare L={L} never crossed threshold"
        pts_bare.append((L, r.cost))
        r = min_annealing_time(_grover(L, penalty="eq16"), pen_grid)
        assert r.found, f"penalized L={L} never crossed threshold"
        pts_pen.append((L, r.cost))

    beta_bare = scaling_fit(pts_bare).beta
    beta_pen = scaling_fit(pts_pen).beta
    assert 0.9 <= beta_bare <= 1.1
    assert 0.37 <= beta_pen <= 0.57
    print(
        f"PASS criterion 5: search cost exponents beta_bare = {beta_bare:.3f} "
        f"(band 0.9..1.1), beta_pen = {beta_pen:.3f} (band 0.37..0.57)"
    )


def test_criterion_06_pspin_penalized_gap():
    s = np.linspace(0.0, 1.0, 1001)
    worst = 0.0
    for L in range(8, 41, 4):
        w = np.linalg.eigvalsh(hamiltonian_batch(_pspin(L, penalty="eq16"), s))
        worst = max(worst, float(np.abs(w[:, 1] - w[:, 0] - 2.0).max()))
    assert worst <= 1e-9

    s_fine = np.linspace(0.0, 1.0, 4001)
    w = np.linalg.eigvalsh(hamiltonian_batch(_pspin(40), s_fine))
    s_min = float(s_fine[np.argmin(w[:, 1] - w[:, 0])])
    assert abs(s_min - 0.463) <= 0.005
    print(
        f"PASS criterion 6: p-spin penalized gap == 2 (max |dev| {worst:.2e}), "
        f"bare L=40 min gap at s = {s_min:.4f}"
    )


def test_criterion_07_pspin_cost_scaling():
    Ls = (8, 10, 12, 14, 16, 18, 20)
    bare_grid = [100 * m for m in range(1, 21)]
    pen_grid = [10 * n for n in range(1, 21)]

    pts_bare, pts_pen = [], []
    for L in Ls:
        r = min_annealing_time(_pspin(L), bare_grid)
        assert r.found, f"bare L={L} never crossed threshold"
        pts_bare.append((L, r.cost))
        r = min_annealing_time(_pspin(L, penalty="eq16"), pen_grid)
        assert r.found, f"penalized L={L} never crossed threshold"
        pts_pen.append((L, r.cost))

    beta_bare = scaling_fit(pts_bare).beta
    beta_pen = scaling_fit(pts_pen).beta
    assert 0.45 <= beta_bare <= 0.61
    assert 0.19 <= beta_pen <= 0.34
    print(
        f"PASS criterion 7: p-spin cost exponents beta_bare = {beta_bare:.3f} "
        f"(band 0.45..0.61), beta_pen = {beta_pen:.3f} (band 0.19..0.34)"
    )


def test_criterion_08_optimized_schedule():
    for L in range(4, 15):
        sched = Schedule.grover_optimal(L)
        assert schedule_value(sched, 0.0) == 0.0
        assert schedule_value(sched, 1.0) == 1.0
        assert schedule_value(sched, 0.5) == 0.5

    Ls = range(4, 15)
    opt = [
        evolve(_grover(L, penalty="eq16", schedule=Schedule.grover_optimal(L))).final_fidelity
        for L in Ls
    ]
    lin = [evolve(_grover(L, penalty="eq16")).final_fidelity for L in Ls]
    spread = max(opt) - min(opt)
    assert spread < 0.05
    assert lin[-1] < 0.5 * lin[0]
    print(
        f"PASS criterion 8: optimal-schedule fidelity spread {spread:.4f} < 0.05, "
        f"linear decays {lin[0]:.3f}->{lin[-1]:.3f}"
    )


def test_criterion_09_rescaling_invariance():
    models = (_grover(6, T=100.0, penalty="eq16"), _pspin(8, T=50.0, penalty="eq16"))
    worst_ov, worst_ratio = 1.0, 0.0
    for model in models:
        for k in (2.0, 4.0, 10.0):
            overlap, ratio = rescaling_check(model, k)
            worst_ov = min(worst_ov, overlap)
            worst_ratio = max(worst_ratio, abs(ratio - 1.0))
    assert worst_ov >= 1.0 - 1e-8
    assert worst_ratio <= 1e-6
    print(
        f"PASS criterion 9: rescaling k in {{2,4,10}}, min overlap {worst_ov:.12f}, "
        f"max |cost ratio - 1| = {worst_ratio:.2e}"
    )


def test_criterion_10_penalty_norm_bound():
    s_grid = np.linspace(0.0, 1.0, 100)
    models = [_grover(L, penalty="eq16") for L in (4, 10, 14)]
    models += [_pspin(L, penalty="eq16") for L in (8, 20)]
    margin = np.inf
    for model in models:
        H0 = model.qa_hamiltonian(0.0)
        for s in s_grid:
            f = schedule_value(model.schedule, s)
            Hqa = model.qa_hamiltonian(f)
            pena = model.total_hamiltonian(s) - Hqa
            bound = operator_norm(H0) + operator_norm(Hqa)
            margin = min(margin, bound - operator_norm(pena))
    assert margin >= -1e-12
    print(f"PASS criterion 10: |H_pena| <= |H(0)| + |H(s)|, min margin {margin:.3e}")


def test_criterion_11_two_level_sigma_and_asymptote():
    model = _grover(10, penalty="eq16")
    _, _, v0, v1 = grover_eigen(10, 0.3)
    H = model.total_hamiltonian(0.3)
    worst = 0.0
    for F in (0.1, 0.25, 0.5, 0.75, 0.9, 0.99):
        psi = np.sqrt(F) * v0 + np.sqrt(1.0 - F) * np.exp(0.7j) * v1
        _, std = expectation_and_std(H, psi)
        worst = max(worst, abs(std - two_level_std(F)))
    assert worst <= 1e-8

    pts = []
    for T in range(60, 201, 10):
        pts.append((T, evolve(_grover(10, T=float(T), penalty="eq16")).final_fidelity))
    a1 = fidelity_asymptote_fit(pts).a1
    assert a1 > 0.0
    assert abs(a1 - 4.31) <= 0.5 * 4.31
    print(
        f"PASS criterion 11: two-level std dev {worst:.2e}, asymptote a1 = {a1:.3f} "
        "(target 4.31 +/- 50%)"
    )


def test_criterion_12_nonstoquastic_baseline():
    s_grid = np.linspace(1e-4, 1.0 - 1e-4, 4001)
    pts_ns, pts_pen = [], []
    for L in range(8, 25, 2):
        pts_ns.append(
            (L, transition_matrix_max(_pspin(L, family="pspin-nonstoquastic"), s_grid))
        )
        pts_pen.append((L, transition_matrix_max(_pspin(L, penalty="eq16"), s_grid)))
    beta_ns = scaling_fit(pts_ns).beta
    beta_pen = scaling_fit(pts_pen).beta
    assert beta_ns < 0.1 < beta_pen
    print(
        f"PASS criterion 12: transition-matrix exponents beta_nonstoq = {beta_ns:.3f} "
        f"< 0.1 < beta_pen = {beta_pen:.3f}"
    )


def test_criterion_13_magnetization_step():
    assert magnetization(30, 1.0) == 1.0
    assert abs(magnetization(30, 0.0)) <= 1e-12
    lo = magnetization(30, 0.45)
    hi = magnetization(30, 0.55)
    assert lo < 0.1
    assert hi > 0.9
    print(
        f"PASS criterion 13: magnetization step m(0.45) = {lo:.2e}, m(0.55) = {hi:.8f}"
    )
