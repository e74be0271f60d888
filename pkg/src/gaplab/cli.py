"""Command-line front end: figure data as CSV/JSON plus bundled checks.

Every command writes a CSV whose first line carries the digest of the
run manifest's parameter block, and a JSON manifest alongside, so a
rerun with the same flags reproduces byte-identical output.  Exit
codes: 0 ok, 1 usage error, 2 numerical failure, 3 check failure.
"""

import hashlib
import json
import math
import sys
import time
from dataclasses import replace

import click
import numpy as np

from . import __version__
from .analysis import (
    fidelity_asymptote_fit,
    min_annealing_time,
    scaling_fit,
    transition_matrix_max,
    condition_profile,
)
from .dynamics import IntegrationError, evolve, rescaling_check
from .linalg import eigendecompose, expectation_and_std, operator_norm
from .models import (
    AnnealModel,
    Schedule,
    counterdiabatic_norm,
    grover_eigen,
    grover_hamiltonian,
    hamiltonian_batch,
    penalty_term,
)


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if x == 0.0:
        return "0"
    if abs(x) < 1e-3:
        return f"{x:.12e}"
    return f"{x:.12g}"


def _params_digest(command, params):
    blob = json.dumps({"command": command, "params": params}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()


def _write_outputs(command, params, header, rows, out, manifest_path, extra=None):
    digest = _params_digest(command, params)
    started = time.monotonic()
    lines = [f"# manifest_digest={digest}", ",".join(header)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    with open(out, "w", newline="") as fh:
        fh.write(text)
    manifest = {
        "tool": "gaplab",
        "version": __version__,
        "command": command,
        "argv": sys.argv[1:],
        "params": params,
        "params_digest": digest,
        "wall_clock_s": time.monotonic() - started,
        "outputs": {out: hashlib.sha256(text.encode()).hexdigest()},
    }
    if extra:
        manifest.update(extra)
    path = manifest_path or out + ".manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    click.echo(f"wrote {out} ({len(rows)} rows), manifest {path}")


def _parse_grid(text):
    """Parse '10:200:10' (inclusive) or '10,20,50' into floats."""
    if ":" in text:
        try:
            parts = [float(p) for p in text.split(":")]
        except ValueError as exc:
            raise click.UsageError(f"bad grid spec {text!r}") from exc
        if len(parts) != 3 or parts[2] <= 0:
            raise click.UsageError(f"bad grid spec {text!r}; want start:stop:step")
        lo, hi, step = parts
        n = int(round((hi - lo) / step))
        return [lo + i * step for i in range(n + 1) if lo + i * step <= hi + 1e-9]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise click.UsageError(f"bad grid spec {text!r}") from exc


def _build_model(family, L, p, lam, penalty, schedule, T):
    sched = (
        Schedule.grover_optimal(L) if schedule == "grover-optimal" else Schedule.linear()
    )
    try:
        return AnnealModel(
            family=family, L=L, p=p, lam=lam, schedule=sched, penalty=penalty, T=T
        )
    except ValueError as exc:
        raise click.UsageError(str(exc)) from exc


def _model_options(f):
    f = click.option("--family", type=click.Choice(["grover", "pspin", "pspin-nonstoquastic"]), required=True)(f)
    f = click.option("--L", "L", type=int, required=True, help="qubit count")(f)
    f = click.option("--p", type=int, default=5, show_default=True)(f)
    f = click.option("--lambda", "lam", type=float, default=0.1, show_default=True)(f)
    f = click.option("--penalty", type=click.Choice(["none", "eq16", "opt"]), default="none", show_default=True)(f)
    f = click.option("--schedule", type=click.Choice(["linear", "grover-optimal"]), default="linear", show_default=True)(f)
    return f


@click.group()
@click.version_option(version=__version__)
def cli():
    """Annealing-with-penalty numerical laboratory."""


@cli.command()
@_model_options
@click.option("--grid", type=int, default=1001, show_default=True, help="s grid points")
@click.option("--out", default="spectrum.csv", show_default=True)
@click.option("--manifest", default=None)
def spectrum(family, L, p, lam, penalty, schedule, grid, out, manifest):
    """Instantaneous energy levels E_0..E_{dim-1} on an s grid."""
    model = _build_model(family, L, p, lam, penalty, schedule, T=1.0)
    s = np.linspace(0.0, 1.0, grid)
    w = np.linalg.eigvalsh(hamiltonian_batch(model, s))
    header = ["s"] + [f"E_{i}" for i in range(model.dim)]
    rows = [[s[i], *w[i]] for i in range(grid)]
    params = dict(family=family, L=L, p=p, lam=lam, penalty=penalty,
                  schedule=schedule, grid=grid)
    _write_outputs("spectrum", params, header, rows, out, manifest)


@cli.command()
@_model_options
@click.option("--T", "T", type=float, default=20.0, show_default=True)
@click.option("--steps", type=int, default=None, help="integration steps (default: auto)")
@click.option("--out", default="dynamics.csv", show_default=True)
@click.option("--manifest", default=None)
def dynamics(family, L, p, lam, penalty, schedule, T, steps, out, manifest):
    """Evolve once; columns s, fidelity, norm, running_cost."""
    model = _build_model(family, L, p, lam, penalty, schedule, T)
    traj = evolve(model, steps=steps)
    norms = np.linalg.norm(traj.states, axis=1)
    header = ["s", "fidelity", "norm", "running_cost"]
    rows = list(zip(traj.s_values, traj.fidelities, norms, traj.running_cost))
    params = dict(family=family, L=L, p=p, lam=lam, penalty=penalty,
                  schedule=schedule, T=T, steps=traj.steps)
    extra = {"cost": traj.cost, "norm_drift": traj.norm_drift, "flagged": traj.flagged}
    _write_outputs("dynamics", params, header, rows, out, manifest, extra=extra)


@cli.command()
@_model_options
@click.option("--T", "T", type=float, default=20.0, show_default=True)
@click.option("--grid", type=int, default=1001, show_default=True)
@click.option("--out", default="condition.csv", show_default=True)
@click.option("--manifest", default=None)
def condition(family, L, p, lam, penalty, schedule, T, grid, out, manifest):
    """Adiabatic-condition profile: s, gap, transition, eta (, eta_gen)."""
    model = _build_model(family, L, p, lam, penalty, schedule, T)
    s = np.linspace(0.0, 1.0, grid)
    samples = condition_profile(model, s)
    nonlinear = schedule != "linear"
    header = ["s", "gap", "transition", "eta"] + (["eta_gen"] if nonlinear else [])
    rows = [
        [c.s, c.gap, c.transition, c.eta] + ([c.eta_gen] if nonlinear else [])
        for c in samples
    ]
    params = dict(family=family, L=L, p=p, lam=lam, penalty=penalty,
                  schedule=schedule, T=T, grid=grid)
    _write_outputs("condition", params, header, rows, out, manifest)


@cli.command()
@_model_options
@click.option("--L-list", "L_list", default=None,
              help="comma list of system sizes (overrides --L)")
@click.option("--T-grid", "T_grid", required=True, help="e.g. 100:6000:100 or 10,20,30")
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--steps", type=int, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--out", default="scaling.csv", show_default=True)
@click.option("--fit-out", default="scaling_fit.json", show_default=True)
@click.option("--manifest", default=None)
def scaling(family, L, p, lam, penalty, schedule, L_list, T_grid, threshold,
            steps, workers, out, fit_out, manifest):
    """Min annealing time and cost per L, plus the 2^(beta L) cost fit."""
    sizes = [int(v) for v in _parse_grid(L_list)] if L_list else [L]
    grid = _parse_grid(T_grid)
    tasks = [
        (_build_model(family, size, p, lam, penalty, schedule, T=grid[0]), grid,
         threshold, steps)
        for size in sizes
    ]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_scaling_one, tasks))
    else:
        results = [_scaling_one(t) for t in tasks]
    header = ["L", "found", "T_min", "cost", "fidelity"]
    rows, fit_points = [], []
    for size, r in zip(sizes, results):
        if r.found:
            rows.append([size, 1, r.T, r.cost, r.fidelity])
            fit_points.append((size, r.cost))
        else:
            rows.append([size, 0, r.best_T or 0.0, 0.0, r.best_fidelity or 0.0])
            click.echo(f"L={size}: threshold {threshold} not reached "
                       f"(best F={r.best_fidelity})", err=True)
    params = dict(family=family, L_list=sizes, p=p, lam=lam, penalty=penalty,
                  schedule=schedule, T_grid=grid, threshold=threshold, steps=steps)
    fit = scaling_fit(fit_points) if len(fit_points) >= 2 else None
    extra = {}
    if fit is not None:
        fit_blob = {"alpha": fit.alpha, "beta": fit.beta, "residual": fit.residual,
                    "points": fit.points}
        with open(fit_out, "w") as fh:
            json.dump(fit_blob, fh, indent=2, sort_keys=True)
        extra["fit"] = fit_blob
        click.echo(f"fit: alpha={fit.alpha:.4g} beta={fit.beta:.4g} -> {fit_out}")
    _write_outputs("scaling", params, header, rows, out, manifest, extra=extra)


def _scaling_one(args):
    model, grid, threshold, steps = args
    return min_annealing_time(model, grid, threshold=threshold, steps=steps)


@cli.command()
def checks():
    """Run the bundled consistency checks; exit 3 if any fails."""
    failures = 0
    for name, fn in _CHECKS:
        try:
            detail = fn()
            click.echo(f"PASS {name}: {detail}")
        except Exception as exc:  # noqa: BLE001 - report and keep going
            failures += 1
            click.echo(f"FAIL {name}: {exc}")
    if failures:
        click.echo(f"{failures} check(s) failed", err=True)
        sys.exit(3)
    click.echo("all checks passed")


def _check_rescaling():
    msgs = []
    for model, k in [
        (AnnealModel(family="grover", L=6, T=100.0), 4.0),
        (AnnealModel(family="pspin", L=8, p=5, T=50.0), 10.0),
    ]:
        overlap, ratio = rescaling_check(model, k)
        if overlap < 1.0 - 1e-8 or abs(ratio - 1.0) > 1e-6:
            raise AssertionError(
                f"{model.family} k={k}: overlap={overlap!r} cost_ratio={ratio!r}"
            )
        msgs.append(f"{model.family} k={k:g} ratio-1={ratio - 1.0:.1e}")
    return "; ".join(msgs)


def _check_penalty_norm_bound():
    for family, L in [("grover", 10), ("pspin", 12)]:
        model = AnnealModel(family=family, L=L, p=5)
        spec0 = eigendecompose(model.qa_hamiltonian(0.0))
        n0 = operator_norm(model.qa_hamiltonian(0.0))
        for s in np.linspace(0.0, 1.0, 100):
            H = model.qa_hamiltonian(s)
            pena = penalty_term(H, spec0, mode="eq16")
            if operator_norm(pena) > n0 + operator_norm(H) + 1e-9:
                raise AssertionError(f"{family} s={s}: norm bound violated")
    return "norm(H_pena) <= norm(H(0)) + norm(H(s)) at 100 points, both families"


def _check_two_level_std():
    H = grover_hamiltonian(10, 0.3, penalty="eq16")
    _, _, v0, v1 = grover_eigen(10, 0.3)
    for F in (0.1, 0.5, 0.9):
        psi = math.sqrt(F) * v0 + math.sqrt(1.0 - F) * v1
        _, sd = expectation_and_std(H, psi)
        if abs(sd - math.sqrt(F * (1.0 - F))) > 1e-8:
            raise AssertionError(f"F={F}: std={sd}")
    return "std matches sqrt(F(1-F)) on constructed superpositions"


def _check_cd_norm():
    model = AnnealModel(family="grover", L=10, T=20.0)
    got = counterdiabatic_norm(model, 0.5)
    want = math.sqrt(2.0) * math.sqrt(2.0**10 - 1.0) / 20.0
    if abs(got - want) > 1e-9 * want:
        raise AssertionError(f"CD norm {got} != {want}")
    return f"CD norm at L=10, T=20, s=1/2 is {got:.6g}"


def _check_asymptote_sign():
    T = np.array([40.0, 60.0, 80.0, 120.0, 160.0, 200.0])
    F = 1.0 + 4.31 / T - 976.0 / T**2
    fit = fidelity_asymptote_fit(list(zip(T, F)))
    if not (abs(fit.a1 - 4.31) < 1e-9 and abs(fit.a2 + 976.0) < 1e-6):
        raise AssertionError(f"synthetic recovery failed: {fit}")
    model = AnnealModel(family="grover", L=10, penalty="eq16")
    pts = [(T, evolve(replace(model, T=T)).final_fidelity)
           for T in (60.0, 80.0, 100.0, 120.0, 160.0, 200.0)]
    fit = fidelity_asymptote_fit(pts)
    if fit.a1 <= 0.0:
        raise AssertionError(f"a1={fit.a1} is not positive")
    return f"a1={fit.a1:.3g} > 0 on penalized search fidelities"


_CHECKS = [
    ("rescaling-invariance", _check_rescaling),
    ("penalty-norm-bound", _check_penalty_norm_bound),
    ("two-level-std-identity", _check_two_level_std),
    ("counterdiabatic-norm", _check_cd_norm),
    ("asymptote-fit-sign", _check_asymptote_sign),
]


def main(argv=None):
    try:
        rv = cli.main(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        click.echo(f"error: {exc.format_message()}", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except IntegrationError as exc:
        click.echo(f"numerical failure: {exc}", err=True)
        return 2
    except SystemExit as exc:
        return exc.code or 0
    return rv or 0


if __name__ == "__main__":
    sys.exit(main())
