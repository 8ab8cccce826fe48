"""Command-line front end.

Every command reads one JSON config (``--config``), optionally starting from a
named preset (``--preset``), and writes machine-readable outputs plus the
resolved config into ``--out``.  Timestamps live only in ``run.meta.json``.

Exit codes: 0 pass, 1 certified failure, 2 usage error, 3 internal error.
"""

from __future__ import annotations

import csv
import io
import json
import os
import random
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import click
import mpmath

from . import __version__
from .config import PRESETS, load_config
from .errors import BackshiftError, InternalError, PreconditionError

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


def write_atomic(path: Path, text: str):
    """Write to a temporary file in the target directory, then rename."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_json(path: Path, data):
    write_atomic(path, json.dumps(data, indent=2, sort_keys=True) + "\n")


def write_csv(path: Path, header, rows):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    write_atomic(path, buf.getvalue())


class Run:
    """The output directory of one command invocation."""

    def __init__(self, out: str, command: str, cfg=None):
        self.out = Path(out)
        self.command = command
        self.cfg = cfg
        self.started = time.time()
        self.files = []

    def path(self, name: str) -> Path:
        p = self.out / name
        self.files.append(name)
        return p

    def finish(self, passed: bool, summary: str):
        if self.cfg is not None:
            write_atomic(self.out / "config.resolved.json", self.cfg.to_json() + "\n")
        write_json(
            self.out / "run.meta.json",
            {
                "command": self.command,
                "version": __version__,
                "started": time.strftime("%Y-%m-%dT%H:%M:%S", time.gmtime(self.started)),
                "seconds": round(time.time() - self.started, 3),
                "files": sorted(set(self.files)),
                "passed": passed,
            },
        )
        click.echo(summary)
        click.echo("PASS" if passed else "FAIL")
        return EXIT_PASS if passed else EXIT_FAIL


def _config(config, preset, **overrides):
    return load_config(config, preset, overrides)


def guarded(fn):
    """Map package errors to exit codes."""

    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            code = fn(*args, **kwargs)
        except (PreconditionError, FileNotFoundError, json.JSONDecodeError) as exc:
            click.echo(f"usage error: {exc}", err=True)
            sys.exit(EXIT_USAGE)
        except InternalError as exc:
            click.echo(f"internal error: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)
        except BackshiftError as exc:
            click.echo(f"{type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_FAIL)
        except click.exceptions.Exit:
            raise
        except click.ClickException:
            raise
        except Exception as exc:  # noqa: BLE001
            click.echo(f"internal error: {type(exc).__name__}: {exc}", err=True)
            sys.exit(EXIT_INTERNAL)
        sys.exit(code or EXIT_PASS)

    return wrapper


config_opt = click.option("--config", "config", type=click.Path(dir_okay=False), default=None, help="JSON config file.")
preset_opt = click.option("--preset", type=click.Choice(sorted(PRESETS)), default=None, help="Start from a named preset.")
out_opt = click.option("--out", default="out", show_default=True, help="Output directory.")


@click.group()
@click.version_option(__version__)
def main():
    """Constructions and certificates for weighted backward shifts on l_p."""


@main.command("check-weight")
@click.option("--mu", default=None, help="Parametric weight 1 + mu/n.")
@click.option("--table", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON weight spec or list of values.")
@click.option("--dyadic", is_flag=True, help="Use the dyadic staircase weight.")
@click.option("--p", "p", default="2", show_default=True)
@click.option("--horizon", default=10**4, show_default=True, type=int)
@click.option("--kmax", default=10**5, show_default=True, type=int)
@out_opt
@guarded
def check_weight(mu, table, dyadic, p, horizon, kmax, out):
    """Series convergence and the window-product surrogate for one weight."""
    from .construct.aset import check_weight_condition
    from .core.weights import DyadicWeight, ParametricWeight, TabulatedWeight, weight_from_dict

    chosen = [x for x in (mu, table, dyadic or None) if x]
    if len(chosen) != 1:
        raise click.UsageError("give exactly one of --mu, --table, --dyadic")
    if mu is not None:
        w = ParametricWeight(Fraction(mu))
    elif table is not None:
        with open(table) as fh:
            spec = json.load(fh)
        w = TabulatedWeight([Fraction(str(v)) for v in spec]) if isinstance(spec, list) else weight_from_dict(spec)
    else:
        w = DyadicWeight()
    report = check_weight_condition(w, Fraction(p), horizon=horizon, kmax=kmax)
    run = Run(out, "check-weight")
    data = report.to_json()
    data["weight"] = w.to_dict()
    write_json(run.path("weight_report.json"), data)
    write_csv(run.path("weight_partial_sums.csv"), ["horizon", "partial_sum"], [(str(c), repr(float(s))) for c, s in zip(report.checkpoints, report.partial_sums)])
    return run.finish(report.passed, f"verdict {report.verdict}, surrogate {report.surrogate:.6g}")


@main.command("find-interval")
@click.option("--deltas", type=click.Path(exists=True, dir_okay=False), default=None, help="JSON list of 2**n values.")
@click.option("--n", "n", default=7, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int, help="Random instance when --deltas is absent.")
@out_opt
@guarded
def find_interval(deltas, n, seed, out):
    """Locate an interval whose suffix sums stay at most 1."""
    from .construct.good_interval import find_good_interval, is_good_interval

    if deltas is not None:
        with open(deltas) as fh:
            values = [Fraction(str(v)) for v in json.load(fh)]
    else:
        values = random_deltas(n, seed)
    interval = find_good_interval(values, n)
    ok = is_good_interval(values, n, interval)
    run = Run(out, "find-interval")
    write_json(run.path("interval.json"), {"n": n, "interval": interval.to_list(), "valid": ok})
    return run.finish(ok, f"interval {interval}")


def random_deltas(n: int, seed: int) -> list:
    """``2**n`` rationals in ``[-1, 1]`` with sum at most 1."""
    rng = random.Random(seed)
    values = [Fraction(rng.randint(-1000, 1000), 1000) for _ in range(2**n)]
    excess = sum(values) - 1
    i = 0
    while excess > 0:
        cut = min(excess, values[i] + 1)
        values[i] -= cut
        excess -= cut
        i += 1
    return values


@main.command("a-set")
@click.option("--mu", default="2", show_default=True)
@click.option("--n", "n", default=1, show_default=True, type=int)
@click.option("--beta", default=None, help="Defaults to max(sup, 1/inf).")
@click.option("--bound", default=10**5, show_default=True, type=int)
@click.option("--want", default=5, show_default=True, type=int)
@out_opt
@guarded
def a_set(mu, n, beta, bound, want, out):
    """Members of the bounded-suffix-product set for ``1 + mu/n``."""
    from .construct.aset import a_set_members, beta_for_weight
    from .core.weights import ParametricWeight
    from .errors import Insufficient

    w = ParametricWeight(Fraction(mu))
    b = Fraction(beta) if beta is not None else beta_for_weight(w).value
    run = Run(out, "a-set")
    try:
        members = a_set_members(w, n, b, bound, want)
        ok = True
    except Insufficient as exc:
        members, ok = exc.found, False
    write_json(run.path("a_set.json"), {"mu": mu, "N": n, "beta": str(b), "bound": bound, "members": [str(m) for m in members]})
    return run.finish(ok, f"beta {b}, members {members}")


@main.command()
@config_opt
@preset_opt
@click.option("--variant", type=click.Choice(["v1", "v2", "v3"]), default=None)
@click.option("--levels", type=int, default=None)
@click.option("--vectors/--no-vectors", default=True, help="Also write x_q for every realizable q.")
@out_opt
@guarded
def build(config, preset, variant, levels, vectors, out):
    """Build and validate a schedule; write schedule.json and the vectors."""
    from .construct.schedule import validate_schedule
    from .errors import HorizonTooSmall

    cfg = _config(config, preset, variant=variant, levels=levels)
    sched = cfg.build_schedule()
    violations = validate_schedule(sched)
    run = Run(out, "build", cfg)
    write_json(run.path("schedule.json"), sched.to_json())
    write_json(run.path("violations.json"), [str(v) for v in violations])
    if vectors:
        ctx = cfg.context(sched)
        out_vectors = {}
        for q in range(1, ctx.q_cap + 1):
            try:
                built = ctx.build(q)
            except HorizonTooSmall:
                break
            out_vectors[str(q)] = {"vector": built.vector.to_json(), "tail_bound": mpmath.nstr(built.tail_bound, 17)}
        write_json(run.path("vectors.json"), out_vectors)
    return run.finish(not violations, f"{sched.depth} levels, end {sched.end}, {len(violations)} violations")


@main.command()
@config_opt
@preset_opt
@click.option("--lambda", "lam", default=None, help="JSON array (from q = 1) or object of lambda values.")
@click.option("--s", "s_list", default=None, help="Comma-separated exponents; defaults to the visit exponents.")
@click.option("--mu", default=None, help="V3: shift weight parameter.")
@click.option("--gnuplot", is_flag=True, help="Also write a gnuplot script.")
@out_opt
@guarded
def orbit(config, preset, lam, s_list, mu, gnuplot, out):
    """Distances ||B^s x0 - y0||_p along chosen exponents."""
    from .core.weights import ParametricWeight
    from .shift import apply_shift
    from .vectors.context import apply_T

    cfg = _config(config, preset, **({"lambda": _parse_lambda(lam)} if lam else {}))
    ctx = cfg.context()
    x0 = apply_T(ctx, cfg.lam())
    if ctx.variant == "v3":
        w = ParametricWeight(Fraction(mu) if mu else cfg.mus()[0])
    else:
        w = ctx.schedule.weight
    if s_list:
        exps = [int(s) for s in s_list.split(",")]
    else:
        th = _thresholds(cfg, ctx, Fraction(mu) if mu else None)
        exps = th.admissible[: int(cfg["visits"])]
    y0 = cfg.y0()
    rows = [(str(s), mpmath.nstr((apply_shift(w, x0, s) - y0).p_norm_mp(), 17)) for s in exps]
    run = Run(out, "orbit", cfg)
    write_csv(run.path("orbit.csv"), ["s", "distance"], rows)
    if gnuplot:
        write_atomic(run.path("orbit.gp"), "set datafile separator ','\nset logscale y\nplot 'orbit.csv' using 1:2 skip 1 with points title 'distance'\n")
    return run.finish(True, f"{len(rows)} exponents")


def _parse_lambda(text: str) -> dict:
    data = json.loads(text)
    if isinstance(data, list):
        return {str(q): str(v) for q, v in enumerate(data, start=1)}
    if isinstance(data, dict):
        return {str(q): str(v) for q, v in data.items()}
    raise PreconditionError("lambda must be a JSON array or object")


def _visit_query(cfg, ctx, mu=None, v_sequence=()):
    from .analyze.visit import VisitQuery

    if ctx.variant == "v3":
        return VisitQuery(cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]), mu=mu or cfg.mus()[0], y1=cfg.y1(), v_sequence=v_sequence)
    return VisitQuery(cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]))


def _thresholds(cfg, ctx, mu=None):
    from .analyze.visit import visit_thresholds

    return visit_thresholds(ctx, _visit_query(cfg, ctx, mu))


@main.command()
@click.argument("kind", type=click.Choice(["visit", "nonfhc", "nonufhc", "family"]))
@config_opt
@preset_opt
@click.option("--s-index", type=int, default=None, help="Certify only the i-th admissible exponent (from 1).")
@click.option("--mu", default=None, help="V3 visit: shift weight parameter.")
@out_opt
@guarded
def certify(kind, config, preset, s_index, mu, out):
    """Visit, non-FHC, non-UFHC or family certificates."""
    cfg = _config(config, preset)
    ctx = cfg.context()
    run = Run(out, f"certify {kind}", cfg)
    if kind == "visit":
        return _certify_visit(cfg, ctx, run, s_index, Fraction(mu) if mu else None)
    if kind in ("nonfhc", "nonufhc"):
        return _certify_density(cfg, ctx, run, kind)
    return _certify_family(cfg, ctx, run)


def _certify_visit(cfg, ctx, run, s_index, mu):
    from .analyze.visit import cross_check, visit_certificate, visit_thresholds

    vq = _visit_query(cfg, ctx, mu)
    th = visit_thresholds(ctx, vq)
    if s_index is not None:
        if not 1 <= s_index <= len(th.admissible):
            raise PreconditionError(f"--s-index must lie in [1, {len(th.admissible)}]")
        chosen = [th.admissible[s_index - 1]]
    else:
        chosen = th.admissible[: int(cfg["visits"])]
    reports = [visit_certificate(ctx, vq, s, th) for s in chosen]
    agreed = cross_check(ctx, vq, reports)
    payload = {
        "thresholds": {"eta0": mpmath.nstr(th.eta0, 17), "n0": th.n0, "l0": th.l0, "l1": th.l1, "s0": str(th.s0)},
        "reports": [r.to_json() for r in reports],
        "return_set_agrees": agreed,
    }
    if len(reports) == 1:
        payload.update(reports[0].to_json())
    write_json(run.path("visit.json"), payload)
    write_csv(run.path("visit_distances.csv"), ["s", "distance"], [(str(r.s_prime), mpmath.nstr(r.final_distance, 17)) for r in reports])
    passed = bool(reports) and all(r.passed for r in reports) and agreed
    return run.finish(passed, f"{sum(r.passed for r in reports)}/{len(reports)} exponents certified above s0 = {th.s0}")


def _certify_density(cfg, ctx, run, kind):
    from .analyze.density_checks import non_fhc_certificate, non_ufhc_certificate
    from .core.weights import ParametricWeight
    from .vectors.context import apply_T

    x0 = apply_T(ctx, cfg.lam())
    samples = int(cfg["samples"])
    if kind == "nonfhc":
        ws = [ParametricWeight(m) for m in cfg.mus()] if ctx.variant == "v3" else [ctx.schedule.weight]
        reports = [non_fhc_certificate(ctx.schedule, x0, w=w, samples=samples, seed=int(cfg["seed"])) for w in ws]
    else:
        reports = [non_ufhc_certificate(ctx.schedule, x0, samples=samples, seed=int(cfg["seed"]))]
    write_json(run.path(f"{kind}.json"), [r.to_json() for r in reports])
    write_csv(run.path(f"{kind}_density.csv"), ["horizon", "count", "ratio"], reports[0].csv_rows())
    passed = all(r.passed for r in reports)
    return run.finish(passed, f"{kind}: {len(reports[0].densities)} checkpoints")


def _certify_family(cfg, ctx, run):
    from .analyze.family import family_certificate

    reports = family_certificate(ctx, cfg.lam(), cfg.y0(), cfg.delta, int(cfg["n_star"]), cfg.y1(), cfg.mus(), visits_per_mu=int(cfg["visits"]))
    write_json(run.path("family.json"), [r.to_json() for r in reports])
    lines = [f"mu = {r.mu}: {'pass' if r.passed else 'fail'}" + (f" ({r.error})" if r.error else "") for r in reports]
    return run.finish(all(r.passed for r in reports), "\n".join(lines))


@main.command()
@config_opt
@preset_opt
@out_opt
@guarded
def family(config, preset, out):
    """Windows delta_r and the rationals v_k for each configured mu."""
    from .analyze.family import _eta0_tilde, build_v_sequence
    from .errors import NeedDeeperSchedule, SearchFailed

    cfg = _config(config, preset)
    ctx = cfg.context()
    run = Run(out, "family", cfg)
    rows = []
    ok = True
    for mu in cfg.mus():
        vq = _visit_query(cfg, ctx, mu)
        try:
            seq = build_v_sequence(ctx, vq, mu, 1, _eta0_tilde(ctx, vq), grid=int(cfg["grid"]))
            rows.append({"mu": str(mu), "v_sequence": [c.to_json() for c in seq], "error": None})
            ok = ok and all(c.refinement_passed for c in seq)
        except (NeedDeeperSchedule, SearchFailed) as exc:
            rows.append({"mu": str(mu), "v_sequence": [], "error": f"{type(exc).__name__}: {exc}"})
            ok = False
    write_json(run.path("v_sequence.json"), rows)
    return run.finish(ok, "\n".join(f"mu = {r['mu']}: {r['error'] or r['v_sequence']}" for r in rows))


@main.command()
@config_opt
@preset_opt
@out_opt
@guarded
def verify(config, preset, out):
    """Run the invariant suite that applies to the configured variant."""
    from .analyze.density_checks import non_fhc_certificate, non_ufhc_certificate
    from .analyze.visit import certified_visits, cross_check
    from .construct.schedule import validate_schedule
    from .vectors.context import apply_T, isometry_report

    cfg = _config(config, preset)
    sched = cfg.build_schedule()
    ctx = cfg.context(sched)
    results = {}
    results["schedule"] = not validate_schedule(sched)
    cap = _realizable_cap(ctx)
    if cap >= 1:
        ctx.q_cap = cap
        rep = isometry_report(ctx, int(cfg["trials"]), min(int(cfg["support_cap"]), cap), int(cfg["seed"]))
        results["isometry"] = rep.passed
    x0 = apply_T(ctx, {q: v for q, v in cfg.lam().items() if q <= cap})
    mus = cfg.mus() if ctx.variant == "v3" else [None]
    from .core.weights import ParametricWeight

    results["nonfhc"] = all(non_fhc_certificate(sched, x0, w=ParametricWeight(m) if m else None, samples=int(cfg["samples"])).passed for m in mus)
    if ctx.variant == "v2":
        results["nonufhc"] = non_ufhc_certificate(sched, x0, samples=int(cfg["samples"])).passed
    if ctx.variant == "v1":
        vq = _visit_query(cfg, ctx)
        reps = certified_visits(ctx, vq, int(cfg["visits"]))
        results["visit"] = all(r.passed for r in reps) and cross_check(ctx, vq, reps)
    run = Run(out, "verify", cfg)
    write_json(run.path("verify.json"), results)
    return run.finish(all(results.values()), ", ".join(f"{k}: {'ok' if v else 'FAIL'}" for k, v in results.items()))


def _realizable_cap(ctx) -> int:
    """Largest ``q <= q_cap`` whose distinguished level is built."""
    return min(ctx.q_cap, (ctx.schedule.depth + 1) // 2)


if __name__ == "__main__":
    main()
