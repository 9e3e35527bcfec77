"""Batch-oriented command line interface.

Every command materializes a case specification, runs it, and writes its
reports (JSON, plus CSV where a table is natural) under an output directory.
Identical case + seed reproduces byte-identical JSON.  Exit codes: 0 success,
1 usage or parse error, 2 verdict unknown (or a stated claim failed), 3
construction infeasible, 4 resource cap exceeded.
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys as _sys
import time
from fractions import Fraction
from importlib import resources
from typing import Optional

import click

from .casespec import CaseSpec, parse_cases, serialize_cases
from .errors import (
    ConstructionError,
    DomainError,
    InfeasibleError,
    LimsupBranchError,
    ParseError,
    ResourceCapError,
)
from . import cantor as cantor_mod
from . import laws as laws_mod
from . import report as report_mod
from .funcs import parse_literal
from .geometry import IntervalUnion, StripUnion, region_measure
from .regions import build_delta
from .systems import enumerate_window
from .ubiquity import quasi_independence_table, verify_local_ubiquity

EXIT_OK, EXIT_USAGE, EXIT_UNKNOWN, EXIT_INFEASIBLE, EXIT_RESOURCE = 0, 1, 2, 3, 4


# ---------------------------------------------------------------------------
# deterministic artifact writing
# ---------------------------------------------------------------------------


def _schema(name: str) -> dict:
    with resources.files("limsuplab.schemas").joinpath(name).open() as fh:
        return json.load(fh)


def write_json(path: str, doc: dict, schema: Optional[str] = None) -> None:
    if schema is not None:
        import jsonschema

        jsonschema.validate(doc, _schema(schema))
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    payload = json.dumps(doc, sort_keys=True, indent=1) + "\n"
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def write_csv(path: str, header, rows) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# case runners
# ---------------------------------------------------------------------------


def run_case(spec: CaseSpec) -> dict:
    """Execute one case; returns a summary row dict (always) and writes
    artifacts under the case's output directory."""
    outdir = spec.out or os.path.join("out", spec.case_id)
    started = time.perf_counter()
    summary = {
        "case_id": spec.case_id,
        "status": "ok",
        "lebesgue": "",
        "hausdorff": "",
        "dimension": "",
        "kappa_min": "",
        "runtime_ms": 0,
    }
    code = EXIT_OK
    try:
        code = _dispatch(spec, outdir, summary)
    except (ParseError, DomainError) as e:
        summary["status"] = "usage-error"
        summary["error"] = str(e)
        code = EXIT_USAGE
    except (InfeasibleError, ConstructionError, LimsupBranchError) as e:
        summary["status"] = "infeasible"
        summary["error"] = str(e)
        code = EXIT_INFEASIBLE
    except ResourceCapError as e:
        summary["status"] = "resource-cap"
        summary["error"] = str(e)
        code = EXIT_RESOURCE
    summary["runtime_ms"] = int((time.perf_counter() - started) * 1000)
    summary["exit"] = code
    return summary


def _dispatch(spec: CaseSpec, outdir: str, summary: dict) -> int:
    system = spec.make_system()
    cmd = spec.command
    if cmd == "classify":
        psi = parse_literal(spec.psi)
        f = parse_literal(spec.f) if spec.f else None
        v = laws_mod.classify(system, psi, f)
        write_json(os.path.join(outdir, f"{spec.case_id}.verdict.json"), v.to_dict(), "verdict.schema.json")
        summary["lebesgue"] = v.lebesgue.value
        summary["hausdorff"] = v.hausdorff.value
        if v.dimension is not None:
            summary["dimension"] = f"{v.dimension.numerator}/{v.dimension.denominator}"
        unknown = v.lebesgue.value == "unknown" or (f is not None and v.hausdorff.value == "unknown")
        if unknown:
            summary["status"] = "unknown"
        return EXIT_UNKNOWN if unknown else EXIT_OK

    if cmd == "dimension":
        psi = parse_literal(spec.psi)
        res = laws_mod.critical_dimension(system, psi)
        doc = {
            "system": system.name,
            "psi": str(psi),
            "sigma": {"fraction": f"{res.sigma.numerator}/{res.sigma.denominator}", "value": float(res.sigma)},
            "dimension": {"fraction": f"{res.dimension.numerator}/{res.dimension.denominator}",
                          "value": float(res.dimension)},
            "hausdorff_at_d": res.hausdorff_at_d,
            "trace": [t.to_dict() for t in res.verdict.trace],
            "guards": list(res.verdict.guards),
        }
        write_json(os.path.join(outdir, f"{spec.case_id}.dimension.json"), doc, "dimension.schema.json")
        summary["dimension"] = doc["dimension"]["fraction"]
        summary["hausdorff"] = res.hausdorff_at_d
        return EXIT_OK

    if cmd == "verify-ubiquity":
        balls = spec.ball_list()
        claim = Fraction(spec.kappa_claim) if spec.kappa_claim else None
        rep = verify_local_ubiquity(system, balls, spec.n_values(), claim, seed=spec.seed or 0)
        write_json(os.path.join(outdir, f"{spec.case_id}.ubiquity.json"), rep.to_dict(), "ubiquity.schema.json")
        rows = []
        for c in rep.cases:
            lo, hi = c.ball.interval() if c.ball.ambient == "unit_interval" else (0, 0)
            rows.append([f"{float(lo):.6g}:{float(hi):.6g}", c.n, float(c.ratio), c.exact, c.small_ball_warning])
        write_csv(os.path.join(outdir, f"{spec.case_id}.ubiquity.csv"),
                  ["ball", "n", "ratio", "exact", "small_ball_warning"], rows)
        summary["kappa_min"] = f"{float(rep.kappa_min):.12g}"
        if rep.passed is False:
            summary["status"] = "claim-failed"
            return EXIT_UNKNOWN
        return EXIT_OK

    if cmd == "quasi-independence":
        psi = parse_literal(spec.psi)
        balls = spec.ball_list()
        ball = balls[0] if spec.balls else None
        table = quasi_independence_table(system, psi, ball, spec.Q or 4)
        doc = {"table": [r.to_dict() for r in table]}
        write_json(os.path.join(outdir, f"{spec.case_id}.quasi.json"), doc, "quasi.schema.json")
        write_csv(
            os.path.join(outdir, f"{spec.case_id}.quasi.csv"),
            ["Q", "single_sums", "pair_sums", "ratio", "borel_cantelli_bound"],
            [[r.Q, float(r.single_sums), float(r.pair_sums), float(r.ratio), float(r.borel_cantelli_bound)]
             for r in table],
        )
        return EXIT_OK

    if cmd == "build-cantor":
        psi = parse_literal(spec.psi)
        f = parse_literal(spec.f)
        plan = cantor_mod.plan_construction(
            system, psi, f,
            eta=Fraction(spec.eta or 2),
            mode=spec.mode or cantor_mod.MODE_RELAXED,
            varpi=Fraction(spec.varpi) if spec.varpi else None,
            kappa=Fraction(spec.kappa) if spec.kappa else Fraction(1, 2),
            depth=spec.depth or 2,
        )
        write_json(os.path.join(outdir, f"{spec.case_id}.plan.json"), plan.to_dict(), "plan.schema.json")
        tree = cantor_mod.build_levels(plan)
        cantor_mod.assign_mass(tree)
        audit = cantor_mod.audit_mass(tree, samples=spec.samples or 1000, seed=spec.seed or 0)
        os.makedirs(outdir, exist_ok=True)
        tree_path = os.path.join(outdir, f"{spec.case_id}.tree.jsonl")
        with open(tree_path + ".tmp", "w") as fh:
            tree.to_jsonl(fh)
        os.replace(tree_path + ".tmp", tree_path)
        write_json(os.path.join(outdir, f"{spec.case_id}.audit.json"), audit.to_dict(), "cantor_audit.schema.json")
        summary["kappa_min"] = ""
        return EXIT_OK

    if cmd == "measure":
        n = spec.n_values()[0]
        radius_fn = parse_literal(spec.radius) if spec.radius else parse_literal(spec.psi)
        within = spec.ball_list()[0] if spec.balls else None
        region = build_delta(system, n, radius_fn, within, seed=spec.seed or 0, samples=spec.samples or 10**6)
        value, err = region_measure(region, within if system.ambient == "unit_square" else None)
        if isinstance(region, IntervalUnion):
            method = "exact-arc" if region.circular else "exact-interval"
            rows = [[f"{lo.numerator}/{lo.denominator}", f"{hi.numerator}/{hi.denominator}"]
                    for lo, hi in region.intervals]
            write_csv(os.path.join(outdir, f"{spec.case_id}.region.csv"), ["lo", "hi"], rows)
            pieces = len(region.intervals)
        else:
            method = "exact-strip" if region.n_strips <= 1 else "monte-carlo"
            rows = [[s.p, s.q1, s.q2, s.halfwidth] for s in region.strips]
            write_csv(os.path.join(outdir, f"{spec.case_id}.region.csv"), ["p", "q1", "q2", "halfwidth"], rows)
            pieces = region.n_strips
        doc = {"value": float(value), "error_bound": float(err), "method": method,
               "seed": spec.seed, "pieces": pieces}
        write_json(os.path.join(outdir, f"{spec.case_id}.measure.json"), doc, "measure.schema.json")
        return EXIT_OK

    if cmd == "enumerate":
        n = spec.n_values()[0]
        within = spec.ball_list()[0] if spec.balls else None
        elements = enumerate_window(system, n, within)
        write_csv(
            os.path.join(outdir, f"{spec.case_id}.elements.csv"),
            ["provenance", "weight", "geometry"],
            [el.csv_row().split(",") for el in elements],
        )
        summary["count"] = len(elements)
        return EXIT_OK

    raise ParseError(f"unknown command {cmd}")


# ---------------------------------------------------------------------------
# click wiring
# ---------------------------------------------------------------------------


def _common(fn):
    fn = click.option("--out", default=None, help="output directory (default out/<case-id>)")(fn)
    fn = click.option("--case-id", default=None, help="case identifier used in artifact names")(fn)
    fn = click.option("--system", default="rationals",
                      help="rationals | prime_rationals | algebraic(d) | circle | lines21")(fn)
    fn = click.option("--k", default=None, help="sequence base (system default otherwise)")(fn)
    fn = click.option("--rho-coeff", default=None, help="locating function coefficient")(fn)
    fn = click.option("--degree", type=int, default=None, help="algebraic degree bound")(fn)
    fn = click.option("--seed", type=int, default=None, help="seed for any statistical path")(fn)
    return fn


def _spec(command, kw, **extra) -> CaseSpec:
    case_id = kw.pop("case_id") or command
    return CaseSpec(
        case_id=case_id,
        command=command,
        system=kw.pop("system"),
        k=kw.pop("k"),
        rho_coeff=kw.pop("rho_coeff"),
        degree=kw.pop("degree"),
        seed=kw.pop("seed"),
        out=kw.pop("out"),
        **extra,
    )


@click.group()
def cli():
    """Measure and dimension laws for limsup sets of resonant systems."""


@cli.command()
@_common
@click.option("--psi", required=True, help="approximating function literal, e.g. '1 * r^-2'")
@click.option("--f", "gauge", default=None, help="gauge literal, e.g. '1 * r^2/3'")
def classify(psi, gauge, **kw):
    """Ambient and generalized measure verdicts with a hypothesis trace."""
    _finish(_spec("classify", kw, psi=psi, f=gauge))


@cli.command()
@_common
@click.option("--psi", required=True)
def dimension(psi, **kw):
    """Exact critical exponent and the measure verdict at it."""
    _finish(_spec("dimension", kw, psi=psi))


@cli.command("verify-ubiquity")
@_common
@click.option("--n-range", required=True, help="window levels, e.g. 2:5")
@click.option("--balls", default=None, help="intervals lo:hi separated by ';'")
@click.option("--kappa-claim", default=None, help="claimed capture constant to check")
def verify_ubiquity(n_range, balls, kappa_claim, **kw):
    """Measure locating-capture ratios on sample balls."""
    _finish(_spec("verify-ubiquity", kw, n_range=n_range, balls=balls, kappa_claim=kappa_claim))


@cli.command("quasi-independence")
@_common
@click.option("--psi", required=True)
@click.option("--q", "horizon", type=int, required=True, help="horizon Q")
@click.option("--balls", default=None, help="restrict to one interval lo:hi")
def quasi_independence(psi, horizon, balls, **kw):
    """Exact pairwise-intersection table for the separated-ball skeletons."""
    _finish(_spec("quasi-independence", kw, psi=psi, Q=horizon, balls=balls))


@cli.command("build-cantor")
@_common
@click.option("--psi", required=True)
@click.option("--f", "gauge", required=True)
@click.option("--eta", default="2")
@click.option("--mode", type=click.Choice(["paper", "relaxed"]), default="relaxed")
@click.option("--varpi", default=None)
@click.option("--kappa", default=None)
@click.option("--depth", type=int, default=2)
@click.option("--samples", type=int, default=1000)
def build_cantor(psi, gauge, eta, mode, varpi, kappa, depth, samples, **kw):
    """Plan, build, weigh and audit a nested separated-ball tree."""
    _finish(_spec("build-cantor", kw, psi=psi, f=gauge, eta=eta, mode=mode,
                  varpi=varpi, kappa=kappa, depth=depth, samples=samples))


@cli.command()
@_common
@click.option("--n", type=int, required=True)
@click.option("--radius", default=None, help="radius literal (defaults to --psi)")
@click.option("--psi", default=None)
@click.option("--balls", default=None)
@click.option("--samples", type=int, default=None)
def measure(n, radius, psi, balls, samples, **kw):
    """Measure one window's neighbourhood union exactly or statistically."""
    _finish(_spec("measure", kw, n=n, radius=radius, psi=psi, balls=balls, samples=samples))


@cli.command("enumerate")
@_common
@click.option("--n", type=int, required=True)
@click.option("--balls", default=None)
def enumerate_cmd(n, balls, **kw):
    """Dump a window's elements as CSV."""
    _finish(_spec("enumerate", kw, n=n, balls=balls))


@cli.command()
@click.argument("case_file", type=click.Path(exists=True))
@click.option("--out", default="out", help="directory for summary.csv and per-case artifacts")
@click.option("--jobs", type=int, default=1)
def batch(case_file, out, jobs):
    """Run every case in a file; emit one summary row per case."""
    text = open(case_file).read()
    try:
        cases = parse_cases(text)
    except ParseError as e:
        click.echo(f"error: {e}", err=True)
        _sys.exit(EXIT_USAGE)
    for c in cases:
        if c.out is None:
            c.out = os.path.join(out, c.case_id)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as ex:
            summaries = list(ex.map(run_case, cases))
    else:
        summaries = [run_case(c) for c in cases]
    write_csv(
        os.path.join(out, "summary.csv"),
        ["case_id", "status", "lebesgue", "hausdorff", "dimension", "kappa_min", "runtime_ms"],
        [[s["case_id"], s["status"], s["lebesgue"], s["hausdorff"], s["dimension"],
          s["kappa_min"], s["runtime_ms"]] for s in summaries],
    )
    click.echo(f"{len(summaries)} cases -> {os.path.join(out, 'summary.csv')}")
    _sys.exit(EXIT_OK)


@cli.command("report")
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
def report_cmd(directory):
    """Render matplotlib figures next to the artifacts in a directory."""
    made = report_mod.render_all(directory)
    for p in made:
        click.echo(p)
    _sys.exit(EXIT_OK)


@cli.command("echo-cases")
@click.argument("case_file", type=click.Path(exists=True))
def echo_cases(case_file):
    """Parse a case file and print its canonical serialization."""
    try:
        click.echo(serialize_cases(parse_cases(open(case_file).read())), nl=False)
    except ParseError as e:
        click.echo(f"error: {e}", err=True)
        _sys.exit(EXIT_USAGE)


def _finish(spec: CaseSpec):
    summary = run_case(spec)
    if summary.get("error"):
        click.echo(f"{summary['status']}: {summary['error']}", err=True)
    else:
        click.echo(json.dumps({k: v for k, v in summary.items() if v != ""}, sort_keys=True))
    _sys.exit(summary["exit"])


def main():
    try:
        cli.main(standalone_mode=False)
    except click.exceptions.ClickException as e:
        e.show()
        _sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        _sys.exit(EXIT_USAGE)
    except (ParseError, DomainError) as e:
        click.echo(f"error: {e}", err=True)
        _sys.exit(EXIT_USAGE)


if __name__ == "__main__":
    main()
