"""Command line front end.

Wires the catalog, the descent optimizers, and the two certified
bounds into reproducible runs. Commands that produce files write them
into a run directory, and every file embeds the package version, the
functional id, the seed, and the full configuration, so any artifact
alone is enough to rerun its experiment. Numeric output is CSV-first;
figures are a thin rendering of the same data placed alongside.
"""

from __future__ import annotations

import json
import os
import sys
import time
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__

_PI_2 = "0:1.5707963267948966:25"


# ---------------------------------------------------------------------------
# run directories and file headers
# ---------------------------------------------------------------------------

def _meta_lines(cfg: dict) -> list[str]:
    return [
        f"# ticontext {__version__}",
        f"# functional: {cfg.get('functional')}",
        f"# seed: {cfg.get('seed')}",
        f"# config: {json.dumps(cfg, sort_keys=True, default=str)}",
    ]


def _write_csv(path: Path, cfg: dict, header: str,
               rows: list[str]) -> None:
    path.write_text("\n".join(_meta_lines(cfg) + [header] + rows) + "\n")


def _run_dir(out: str | None, slug: str) -> Path:
    base = Path(out) if out else Path("runs") / (
        f"{slug}-{time.strftime('%Y%m%d-%H%M%S')}")
    candidate = base
    k = 1
    while candidate.exists() and any(candidate.iterdir()):
        candidate = base.with_name(f"{base.name}-{k}")
        k += 1
    candidate.mkdir(parents=True, exist_ok=True)
    return candidate


def _write_config(run: Path, cfg: dict) -> None:
    cfg = dict(cfg, version=__version__)
    (run / "config.json").write_text(
        json.dumps(cfg, indent=1, sort_keys=True, default=str) + "\n")


def _plt():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def _parse_axis(spec: str) -> np.ndarray:
    try:
        lo, hi, num = spec.split(":")
        lo, hi, num = float(lo), float(hi), int(num)
    except ValueError:
        raise click.UsageError(
            f"axis {spec!r} is not of the form lo:hi:num") from None
    if num <= 0:
        raise click.UsageError("empty grid: axis point count must be >= 1")
    return np.linspace(lo, hi, num)


def _parse_signature(text: str | None) -> tuple[int, ...] | None:
    if text is None:
        return None
    return tuple(int(x) for x in text.split(","))


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

@click.group()
@click.version_option(__version__, prog_name="ticontext")
@click.option("--threads", type=int, default=None, metavar="N",
              help="Worker processes for seed fan-out "
                   "(default: TICONTEXT_THREADS or 1).")
def main(threads: int | None) -> None:
    """Variational optima and certified bounds for translation-invariant
    contextuality."""
    if threads is not None:
        os.environ["TICONTEXT_THREADS"] = str(threads)


# ---------------------------------------------------------------------------
# classical
# ---------------------------------------------------------------------------

@main.command()
@click.argument("selector")
def classical(selector: str) -> None:
    """Exact classical bound of SELECTOR (catalog id or JSON file)."""
    from .classical import classical_bound
    from .functionals import resolve

    click.echo(str(classical_bound(resolve(selector))))


# ---------------------------------------------------------------------------
# optimize
# ---------------------------------------------------------------------------

@main.command()
@click.argument("selector")
@click.option("--d", "dim", type=int, default=None,
              help="Local dimension (balanced signature unless --signature).")
@click.option("--D", "bond", type=int, default=5, help="Bond dimension.")
@click.option("--signature", "signature_text", default=None, metavar="A,B,..",
              help="Per-setting counts of -1 eigenvalues.")
@click.option("--seeds", type=int, default=16, show_default=True,
              help="Independent starts (ignored with --povm).")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Base seed; start k uses seed+k.")
@click.option("--povm", is_flag=True,
              help="Projected POVM descent at d=2 instead of the "
                   "parametrized-observable descent.")
@click.option("--kind", type=click.Choice(["real", "complex"]),
              default="real", show_default=True)
@click.option("--polish-tol", type=float, default=1e-8, show_default=True,
              help="Inner tolerance of the final re-solve.")
@click.option("--out", type=click.Path(), default=None,
              help="Run directory (default runs/<slug>-<stamp>).")
def optimize(selector: str, dim: int | None, bond: int,
             signature_text: str | None, seeds: int, seed: int, povm: bool,
             kind: str, polish_tol: float, out: str | None) -> None:
    """Minimize the chain energy density of SELECTOR; write the run's
    trace, final observables, and a uMPS checkpoint. Exit 0 iff the
    descent converged."""
    from .functionals import local_term, resolve
    from .optimizer import (descend_multistart, povm_descend,
                            povm_observables)
    from .umps import ground_state, save_checkpoint

    f = resolve(selector)
    signature = _parse_signature(signature_text)
    cfg = {"command": "optimize", "functional": selector,
           "scenario": f.scenario, "d": dim, "D": bond,
           "signature": signature, "seeds": seeds, "seed": seed,
           "povm": povm, "kind": kind, "polish_tol": polish_tol}
    run = _run_dir(out, f"optimize-{selector.replace('/', '-')}")
    _write_config(run, cfg)

    if povm:
        if dim not in (None, 2):
            raise click.UsageError("--povm works at d=2")
        params, energy, trace = povm_descend(f, seed=seed, D=bond if bond != 5
                                             else 3, inner_tol=polish_tol)
        pairs = povm_observables(params, len(f.settings))
        sigmas = [p.sigma for p in pairs]
        converged = not trace.flagged
        reason = "restart budget exhausted short of the target"
        runs_summary = [{"seed": seed, "energy": energy,
                         "status": trace.status}]
    else:
        best, all_runs = descend_multistart(
            f, dim, signature, seeds=range(seed, seed + seeds),
            D=bond, kind=kind, polish_tol=polish_tol)
        from .observables import Signature
        from .optimizer import _as_signature, build_observables

        sig = _as_signature(signature, dim, len(f.settings))
        sigmas = build_observables(f, sig, best.W, kind)
        energy, trace = best.energy, best.trace
        converged = trace.status == "converged"
        reason = f"best run stopped with status {trace.status!r}"
        runs_summary = [{"seed": r.seed, "energy": r.energy,
                         "status": r.trace.status} for r in all_runs]
        save_checkpoint(run / "umps.chk", best.state, seed=best.seed,
                        energy=energy)

    if povm:
        # the POVM path returns parameters, not a state; re-solve once
        # so the checkpoint matches the reported observables
        psi, rep = ground_state(local_term(f, sigmas), 3, tol=polish_tol,
                                rng=np.random.default_rng(seed))
        save_checkpoint(run / "umps.chk", psi, seed=seed, energy=rep.energy)

    _write_csv(run / "trace.csv", cfg, "k,e,grad_norm",
               [f"{s.k},{s.e:.17g},{s.grad_norm:.17g}" for s in trace.steps])
    np.savez(run / "observables.npz", meta=json.dumps(cfg, default=str),
             **{f"sigma{i}": np.asarray(s) for i, s in enumerate(sigmas)})
    (run / "result.json").write_text(json.dumps(
        {"energy": energy, "converged": converged, "status": trace.status,
         "restarts": trace.restarts, "seed": seed, "runs": runs_summary,
         "config": cfg, "version": __version__},
        indent=1, default=str) + "\n")

    plt = _plt()
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.plot([s.k for s in trace.steps], [s.e for s in trace.steps],
            marker=".", lw=1)
    if f.classical_bound is not None:
        ax.axhline(float(f.classical_bound), color="0.5", ls="--", lw=0.8,
                   label=f"classical bound {f.classical_bound}")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("energy density")
    ax.set_title(f"{selector} (seed {seed})", fontsize=9)
    fig.savefig(run / "trace.png", dpi=150, bbox_inches="tight")
    plt.close(fig)

    click.echo(f"run directory: {run}")
    click.echo(f"energy density: {energy:.9f}")
    click.echo(f"status: {trace.status}")
    if not converged:
        click.echo(f"not converged: {reason}", err=True)
        sys.exit(2)


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

@main.group()
def bound() -> None:
    """Certified lower bounds on the quantum value."""


@bound.command("ns")
@click.argument("selector")
@click.option("--n", "n_sites", type=int, required=True,
              help="Window length (smallest n of a sweep).")
@click.option("--n-max", type=int, default=None,
              help="Sweep windows n..n-max and fit the sequence.")
@click.option("--float", "use_float", is_flag=True,
              help="Floating-point solve only (no exact certificate).")
@click.option("--out", type=click.Path(), default=None,
              help="Write sequence.csv and sequence.png here.")
def bound_ns(selector: str, n_sites: int, n_max: int | None,
             use_float: bool, out: str | None) -> None:
    """No-signaling linear-program bound of SELECTOR on n sites, in
    exact rational arithmetic unless --float."""
    from .functionals import resolve
    from .relax_lp import build_ltins, fitted_sequence_check, solve_exact, \
        solve_float

    f = resolve(selector)
    ns = range(n_sites, (n_max if n_max is not None else n_sites) + 1)
    cfg = {"command": "bound ns", "functional": selector, "seed": None,
           "n": n_sites, "n_max": n_max, "float": use_float}
    values: dict[int, object] = {}
    rows = []
    for n in ns:
        lp = build_ltins(f, n)
        t0 = time.time()
        if use_float:
            val: object = solve_float(lp)
            method = "float"
        else:
            sol = solve_exact(lp)
            val, method = sol.value, sol.method
        dt = time.time() - t0
        values[n] = val
        shown = str(val) if isinstance(val, Fraction) else f"{val:.12g}"
        click.echo(f"n={n}: {shown}  ({float(val):.9f}, {method}, "
                   f"{lp.n_class_variables} variables, {dt:.2f}s)")
        rows.append((n, val, method))

    check = fitted_sequence_check(values) if selector == "222/1" else None
    if check is not None:
        for n, r in check.items():
            tag = "exact" if r["exact"] else f"residual {float(r['residual']):.3g}"
            click.echo(f"  fit at n={n}: {tag}")

    if out:
        run = _run_dir(out, "")
        lines = []
        for n, val, method in rows:
            resid = ""
            exact = ""
            if check is not None:
                resid = str(check[n]["residual"])
                exact = str(check[n]["exact"]).lower()
            lines.append(f"{n},{val},{float(val):.17g},{method},"
                         f"{resid},{exact}")
        _write_csv(run / "sequence.csv", cfg,
                   "n,value,value_float,method,fit_residual,fit_exact",
                   lines)
        plt = _plt()
        fig, ax = plt.subplots(figsize=(5, 3.2))
        xs = [r[0] for r in rows]
        ax.plot(xs, [float(r[1]) for r in rows], "o", label="LTI-NS bound")
        if check is not None:
            grid = np.linspace(min(xs), max(xs), 200)
            ax.plot(grid, -2 - 4 / (grid ** 2 - 3 * grid + 6), "-",
                    lw=1, label="-2 - 4/(n^2-3n+6)")
        ax.set_xlabel("window length n")
        ax.set_ylabel("bound")
        ax.legend(frameon=False, fontsize=8)
        fig.savefig(run / "sequence.png", dpi=150, bbox_inches="tight")
        plt.close(fig)
        click.echo(f"wrote {run / 'sequence.csv'}")


@bound.command("npa")
@click.argument("selector")
@click.option("--n", "n_sites", type=int, required=True,
              help="Window length.")
@click.option("--s", "order", type=int, default=1, show_default=True,
              help="Relaxation order (only 1 supported).")
@click.option("--tol", type=float, default=1e-7, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def bound_npa(selector: str, n_sites: int, order: int, tol: float,
              out: str | None) -> None:
    """Moment-matrix certified bound of SELECTOR on n sites."""
    from .functionals import resolve
    from .relax_sdp import build_ltinpa, solve_sdp

    f = resolve(selector)
    sdp = build_ltinpa(f, n_sites, order)
    t0 = time.time()
    res = solve_sdp(sdp, tol)
    dt = time.time() - t0
    click.echo(f"certified lower bound: {res.certified:.9f}")
    click.echo(f"duality gap: {res.gap:.3e}")
    click.echo(f"matrix size: {res.size}")
    click.echo(f"solver value: {res.primal:.9f} ({res.status}, {dt:.1f}s)")
    if out:
        run = _run_dir(out, "")
        cfg = {"command": "bound npa", "functional": selector, "seed": None,
               "n": n_sites, "s": order, "tol": tol}
        _write_csv(run / "npa.csv", cfg,
                   "n,s,certified,primal,gap,size,status",
                   [f"{n_sites},{order},{res.certified:.17g},"
                    f"{res.primal:.17g},{res.gap:.17g},{res.size},"
                    f"{res.status}"])
        click.echo(f"wrote {run / 'npa.csv'}")


# ---------------------------------------------------------------------------
# reproduce
# ---------------------------------------------------------------------------

def _cell(table: str, row: str, quantity: str, computed, reference,
          tol, ok: bool) -> dict:
    return {"table": table, "row": row, "quantity": quantity,
            "computed": computed, "reference": reference, "tol": tol,
            "ok": ok}


def _reproduce_I(n_max: int, _seed: int, _starts: int) -> list[dict]:
    from .relax_lp import build_ltins, solve_exact

    from .functionals import reference_values

    ref = reference_values()["lp_sequence_222_1"]
    cells = []
    for n in range(3, n_max + 1):
        want = Fraction(ref[str(n)])
        sol = solve_exact(build_ltins("222/1", n))
        cells.append(_cell("I", f"n={n}", "LTI-NS", str(sol.value),
                           str(want), "exact", sol.value == want))
    return cells


def _reproduce_II(rows: list[str], seed: int, starts: int) -> list[dict]:
    from .optimizer import descend_multistart

    cells = []
    for d in (int(r) for r in rows):
        best, _ = descend_multistart("222/1", d,
                                     seeds=range(seed, seed + starts),
                                     polish_tol=1e-8)
        ok = abs(best.energy - (-2.0)) <= 1e-4
        cells.append(_cell("II", f"d={d}", "Q", f"{best.energy:.7f}",
                           "-2", 1e-4, ok))
    return cells


def _reproduce_III(rows: list[str], seed: int, starts: int) -> list[dict]:
    from .functionals import reference_values
    from .optimizer import descend_multistart
    from .relax_sdp import build_ltinpa, solve_sdp

    table = {r["id"].split("/")[1]: r
             for r in reference_values()["matched_nnn"]}
    cells = []
    for row in rows:
        r = table[row]
        spec = r["best"]
        best, _ = descend_multistart(
            r["id"], spec["d"], tuple(spec["signature"]),
            seeds=range(seed, seed + starts), D=spec["D"], polish_tol=1e-8)
        res = solve_sdp(build_ltinpa(r["id"], 5))
        q_ref = r["Q"][str(spec["d"])]
        cells.append(_cell("III", r["id"], f"Q(d={spec['d']})",
                           f"{best.energy:.6f}", f"{q_ref:.5f}", 1e-3,
                           abs(best.energy - q_ref) <= 1e-3))
        cells.append(_cell("III", r["id"], "NPA(5,1)",
                           f"{res.certified:.6f}", f"{r['npa51']:.5f}", 1e-3,
                           abs(res.certified - r["npa51"]) <= 1e-3))
        cells.append(_cell("III", r["id"], "|Q - NPA|",
                           f"{abs(best.energy - res.certified):.2e}", "0",
                           2e-3, abs(best.energy - res.certified) <= 2e-3))
        cells.append(_cell("III", r["id"], "sandwich",
                           f"{res.certified:.6f} <= {best.energy:.6f}",
                           "certified <= Q + 1e-6", 1e-6,
                           res.certified <= best.energy + 1e-6))
    return cells


def _reproduce_VI(rows: list[str], seed: int, _starts: int,
                  column: str) -> list[dict]:
    from .functionals import reference_values
    from .optimizer import max_imaginary_part, povm_descend
    from .relax_sdp import build_ltinpa, solve_sdp

    table = {r["id"].split("/")[1]: r
             for r in reference_values()["three_observable"]}
    cells = []
    for row in rows:
        r = table[row]
        if column == "Q2":
            params, energy, trace = povm_descend(r["id"], seed=seed)
            imag = max_imaginary_part(params, 3)
            ok = (abs(energy - r["L"]) <= 1e-5
                  and energy >= r["L"] - 1e-5 and imag < 1e-10)
            cells.append(_cell("VI", r["id"], "Q2", f"{energy:.7f}",
                               str(r["L"]), 1e-5, ok))
        else:
            res = solve_sdp(build_ltinpa(r["id"], 4))
            cells.append(_cell("VI", r["id"], "NPA(4,1)",
                               f"{res.certified:.6f}", f"{r['npa41']:.5f}",
                               1e-3, abs(res.certified - r["npa41"]) <= 1e-3))
    return cells


@main.command()
@click.argument("table", type=click.Choice(["I", "II", "III", "VI"]))
@click.option("--seed", type=int, required=True,
              help="Base seed (recorded in every output).")
@click.option("--n-max", type=int, default=6, show_default=True,
              help="Table I: largest window length.")
@click.option("--rows", default=None, metavar="A,B,..",
              help="Subset of rows (Table II: d values; III/VI: row "
                   "numbers).")
@click.option("--column", type=click.Choice(["Q2", "npa41"]), default="Q2",
              show_default=True, help="Table VI: which column to recompute.")
@click.option("--starts", type=int, default=16, show_default=True,
              help="Seeds per variational cell.")
@click.option("--out", type=click.Path(), default=None,
              help="Write report.csv here.")
def reproduce(table: str, seed: int, n_max: int, rows: str | None,
              column: str, starts: int, out: str | None) -> None:
    """Recompute a results table and compare cell by cell. Exit status
    is the logical AND of all checks."""
    defaults = {"I": [], "II": ["2", "3", "4"],
                "III": [str(k) for k in range(1, 11)],
                "VI": [str(k) for k in range(1, 6)]}
    row_list = rows.split(",") if rows else defaults[table]
    if table == "I":
        cells = _reproduce_I(n_max, seed, starts)
    elif table == "II":
        cells = _reproduce_II(row_list, seed, starts)
    elif table == "III":
        cells = _reproduce_III(row_list, seed, starts)
    else:
        cells = _reproduce_VI(row_list, seed, starts, column)

    width = max(len(c["row"]) for c in cells)
    for c in cells:
        mark = "ok  " if c["ok"] else "FAIL"
        click.echo(f"{mark} {c['row']:<{width}} {c['quantity']:<12} "
                   f"computed {c['computed']}  reference {c['reference']} "
                   f"(tol {c['tol']})")
    n_bad = sum(not c["ok"] for c in cells)
    click.echo(f"{len(cells) - n_bad}/{len(cells)} checks passed")

    if out:
        run = _run_dir(out, "")
        cfg = {"command": f"reproduce {table}", "functional": None,
               "seed": seed, "rows": row_list, "n_max": n_max,
               "column": column, "starts": starts}
        _write_csv(run / "report.csv", cfg,
                   "table,row,quantity,computed,reference,tol,ok",
                   [",".join(str(c[k]).replace(",", ";") for k in
                             ("table", "row", "quantity", "computed",
                              "reference", "tol", "ok")) for c in cells])
        click.echo(f"wrote {run / 'report.csv'}")
    if n_bad:
        sys.exit(1)


# ---------------------------------------------------------------------------
# surface
# ---------------------------------------------------------------------------

@main.command()
@click.argument("selector")
@click.option("--d", "dim", type=int, default=2, show_default=True)
@click.option("--signature", "signature_text", default=None,
              metavar="A,B,..")
@click.option("--w1", default=_PI_2, show_default=True, metavar="LO:HI:NUM")
@click.option("--w2", default=_PI_2, show_default=True, metavar="LO:HI:NUM")
@click.option("--D", "bond", type=int, default=5, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", type=click.Path(), default=None)
def surface(selector: str, dim: int, signature_text: str | None, w1: str,
            w2: str, bond: int, seed: int, out: str | None) -> None:
    """Ground-state energy on a two-parameter observable grid."""
    from .functionals import resolve
    from .optimizer import scan_surface

    f = resolve(selector)
    w1v, w2v = _parse_axis(w1), _parse_axis(w2)
    signature = _parse_signature(signature_text)
    try:
        grid = scan_surface(f, dim, signature, w1v, w2v, D=bond, seed=seed)
    except ValueError as exc:
        raise click.UsageError(str(exc)) from None

    cfg = {"command": "surface", "functional": selector, "seed": seed,
           "d": dim, "signature": signature, "D": bond,
           "w1": w1, "w2": w2}
    run = _run_dir(out, f"surface-{selector.replace('/', '-')}")
    _write_config(run, cfg)
    lines = [f"{a:.17g},{b:.17g},{grid[i, j]:.17g}"
             for i, a in enumerate(w1v) for j, b in enumerate(w2v)]
    _write_csv(run / "surface.csv", cfg, "w1,w2,e", lines)

    plt = _plt()
    fig, ax = plt.subplots(figsize=(4.6, 3.6))
    mesh = ax.pcolormesh(w2v, w1v, grid, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="energy density")
    ax.set_xlabel("w2")
    ax.set_ylabel("w1")
    ax.set_title(selector, fontsize=9)
    fig.savefig(run / "surface.png", dpi=150, bbox_inches="tight")
    plt.close(fig)
    click.echo(f"wrote {run / 'surface.csv'}")
    click.echo(f"minimum {grid.min():.9f} at "
               f"w1={w1v[np.unravel_index(grid.argmin(), grid.shape)[0]]:.5f} "
               f"w2={w2v[np.unravel_index(grid.argmin(), grid.shape)[1]]:.5f}")


if __name__ == "__main__":
    main()
