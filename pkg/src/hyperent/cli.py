"""Command-line front end.

Subcommands: state, randomize, sweep, thresholds, overlap, catalog-validate.
Exit codes: 0 ok, 1 computation failure, 2 usage error.  ``HYPERENT_THREADS``
caps the number of worker processes used by ``sweep``.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .entmeasures import Bipartition, all_bipartitions, negativity
from .gmn import SdpError, SdpProblem, check_certificate, solve_sdp
from .hypercore import (
    FAMILIES,
    CapacityError,
    Hypergraph,
    HypergraphError,
    family,
    mask_to_vertices,
    parse_catalog,
    parse_hypergraph,
    popcount,
)
from .randomizer import (
    RandomizationParams,
    ensemble_to_density,
    randomize,
    randomized_density,
    symbolic_randomize,
)
from .statevec import (
    MAX_DENSE_QUBITS,
    build_state,
    check_stabilizers,
    stabilizer_projector,
)
from .witnesslab import (
    ThresholdError,
    critical_probability,
    overlap_polynomial,
    robustness_threshold,
    witness_alpha,
)

EXIT_OK, EXIT_FAILURE, EXIT_USAGE = 0, 1, 2
MEASURES = ("negativity", "gmn", "overlap", "witness")
THRESHOLD_FAMILIES = ("clover", "flower")


class UsageError(Exception):
    """Bad flags or inputs; exit code 2."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- selectors --------------------------------------------------------------

def _add_selector(p: argparse.ArgumentParser, n_help: str = "qubit count for --family"):
    g = p.add_argument_group("hypergraph selector (pick one)")
    g.add_argument("--family", help=f"generator: {', '.join(FAMILIES)}")
    g.add_argument("--n", help=n_help)
    g.add_argument("--catalog", help="catalog file (blank-line separated records)")
    g.add_argument("--name", help="record name inside --catalog")
    g.add_argument("--hypergraph", help='inline entry, e.g. "vertices=4; edges={1,2},{1,2,3,4}"')


def _read_catalog(path: str) -> list[Hypergraph]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read catalog {path!r}: {exc.strerror or exc}") from None
    try:
        return parse_catalog(text)
    except HypergraphError as exc:
        raise UsageError(f"{path}: {exc}") from None


def _parse_int(text: str | None, flag: str) -> int:
    if text is None:
        raise UsageError(f"{flag} is required")
    try:
        return int(text)
    except ValueError:
        raise UsageError(f"{flag} expects an integer, got {text!r}") from None


def resolve_hypergraph(args) -> Hypergraph:
    chosen = [f for f in ("family", "catalog", "hypergraph") if getattr(args, f)]
    if len(chosen) != 1:
        raise UsageError("select a hypergraph with exactly one of --family, --catalog, --hypergraph")
    if args.family:
        n = _parse_int(args.n, "--n")
        try:
            return family(args.family, n)
        except HypergraphError as exc:
            raise UsageError(str(exc)) from None
    if args.hypergraph:
        try:
            return parse_hypergraph(args.hypergraph)
        except HypergraphError as exc:
            raise UsageError(f"--hypergraph: {exc}") from None
    if not args.name:
        raise UsageError("--catalog needs --name")
    for h in _read_catalog(args.catalog):
        if h.name == args.name:
            return h
    raise UsageError(f"no record named {args.name!r} in {args.catalog}")


def _parse_number(text: str) -> Fraction:
    try:
        v = Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a probability: {text!r}") from None
    if not 0 <= v <= 1:
        raise UsageError(f"probability {text!r} outside [0, 1]")
    return v


def parse_probabilities(items: list[str] | None, h: Hypergraph) -> RandomizationParams | None:
    """``--p 1/2`` sets every order; ``--p 2=0.3 --p 3=0.9`` sets orders one by one."""
    if not items:
        return None
    orders = sorted({popcount(e) for e in h.randomizable_edges})
    p: dict[int, Fraction] = {}
    for item in items:
        for part in item.split(","):
            if "=" in part:
                k, v = part.split("=", 1)
                k = _parse_int(k.strip().lstrip("p"), "--p order")
                p[k] = _parse_number(v)
            else:
                value = _parse_number(part)
                p.update({k: value for k in orders})
    missing = [k for k in orders if k not in p]
    if missing:
        raise UsageError(f"no probability for edge order(s) {missing}")
    try:
        return RandomizationParams(p)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def parse_bipartitions(items: list[str] | None, n: int) -> list[Bipartition]:
    """Each item is ``all`` or ``;``-separated splits such as ``1|2,3,4``."""
    out: list[Bipartition] = []
    for item in items or []:
        for part in item.split(";"):
            part = part.strip()
            if not part:
                continue
            if part == "all":
                out.extend(all_bipartitions(n))
                continue
            try:
                out.append(Bipartition.parse(part, n))
            except ValueError as exc:
                raise UsageError(f"--bipartition: {exc}") from None
    seen, unique = set(), []
    for b in out:
        if b not in seen:
            seen.add(b)
            unique.append(b)
    return unique


def parse_n_range(text: str | None) -> tuple[list[int], bool]:
    """``3..8``, ``3,5,7`` or ``5``; the flag says whether a range was given."""
    if text is None:
        raise UsageError("--n is required")
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            lo, hi = int(a), int(b)
            if lo > hi:
                raise UsageError(f"empty range {text!r}")
            return list(range(lo, hi + 1)), True
        return [int(s) for s in text.split(",") if s.strip()], False
    except ValueError:
        raise UsageError(f"--n expects N, N1,N2,... or LO..HI, got {text!r}") from None


def _format_number(x) -> str:
    return repr(float(x))


def _amplitude_text(n: int) -> str:
    return f"1/{1 << (n // 2)}" if n % 2 == 0 else f"1/sqrt({1 << n})"


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _emit_table(meta: dict, columns: list[str], rows: list[list], fmt: str, out: str | None):
    if fmt == "json":
        payload = dict(meta)
        payload["columns"] = columns
        payload["rows"] = [dict(zip(columns, r)) for r in rows]
        _write(json.dumps(payload, indent=2) + "\n", out)
        return
    buf = io.StringIO()
    for k, v in meta.items():
        buf.write(f"# {k}: {v}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    _write(buf.getvalue(), out)


def _meta(h: Hypergraph, measure: str, normalization: str | None) -> dict:
    meta = {"tool": f"hyperent {__version__}", "hypergraph": h.serialize()}
    if h.name:
        meta["name"] = h.name
    meta["measure"] = measure
    meta["normalization"] = normalization or "n/a"
    return meta


# -- state --------------------------------------------------------------------

def cmd_state(args) -> int:
    h = resolve_hypergraph(args)
    state = build_state(h)
    order = sorted(range(1 << h.n), key=state.bitstring)
    signs = "".join("+" if state.signs[x] > 0 else "-" for x in order)
    lines = [f"# {h.serialize()}", f"# amplitude = sign * {_amplitude_text(h.n)}", f"signs: {signs}"]
    amp = _amplitude_text(h.n)
    for x in order:
        lines.append(f"{state.bitstring(x)}  {'+' if state.signs[x] > 0 else '-'}{amp}")
    status = EXIT_OK
    if args.check_stabilizers:
        bad = check_stabilizers(h)
        if bad:
            lines.append("stabilizer check FAILED on qubit(s) " + ",".join(map(str, bad)))
            status = EXIT_FAILURE
        else:
            lines.append("all stabilizers OK")
    _write("\n".join(lines) + "\n", args.out)
    return status


# -- randomize ----------------------------------------------------------------

def cmd_randomize(args) -> int:
    h = resolve_hypergraph(args)
    params = parse_probabilities(args.p, h)
    ens_meta = _meta(h, "branch weights", None)
    ens_meta.pop("normalization")
    columns = ["branch", "kept_edges", "weight"]
    rows = []
    if params is None:
        names = {k: f"p{k}" for k in range(2, h.n + 1)}
        for i, (w, f) in enumerate(symbolic_randomize(h)):
            rows.append([i, _edge_text(f), w.to_text(names)])
        ens_meta["weights"] = "symbolic"
    else:
        ens_meta["p"] = ",".join(f"p{k}={v}" for k, v in sorted(params.p.items()))
        ens = randomize(h, params)
        for i, b in enumerate(ens):
            rows.append([i, _edge_text(b.hypergraph), _format_number(b.weight)])
        ens_meta["weight_sum"] = _format_number(float(np.sum(ens.weights)))
        if h.n <= MAX_DENSE_QUBITS:
            rho = ensemble_to_density(ens)
            ens_meta["purity"] = _format_number(rho.purity())
            ens_meta["fidelity"] = _format_number(rho.expectation(build_state(h)))
    _emit_table(ens_meta, columns, rows, args.format, args.out)
    return EXIT_OK


def _edge_text(h: Hypergraph) -> str:
    return " ".join("{" + ",".join(map(str, mask_to_vertices(e))) + "}" for e in h.edges)


# -- sweep --------------------------------------------------------------------

@dataclass
class SweepConfig:
    hypergraph: Hypergraph
    measure: str
    resolution: int
    bipartitions: list[Bipartition] = field(default_factory=list)
    normalization: str | None = None
    path: str = "independent"
    out: str | None = None
    fmt: str = "csv"

    def __post_init__(self):
        if self.measure not in MEASURES:
            raise UsageError(f"unknown measure {self.measure!r}; choose from {', '.join(MEASURES)}")
        if self.resolution < 2:
            raise UsageError(f"grid resolution must be >= 2, got {self.resolution}")
        if self.measure == "negativity" and not self.bipartitions:
            raise UsageError("negativity sweeps need --bipartition")
        if self.measure != "negativity" and self.bipartitions:
            raise UsageError("--bipartition only applies to negativity sweeps")
        if self.measure == "gmn" and self.normalization is None:
            raise UsageError("gmn sweeps need an explicit --normalization (trace or bounded)")
        if self.measure != "gmn" and self.normalization is not None:
            raise UsageError("--normalization only applies to gmn sweeps")
        if self.path not in ("independent", "equal"):
            raise UsageError(f"unknown path {self.path!r}")

    @property
    def orders(self) -> list[int]:
        return sorted({popcount(e) for e in self.hypergraph.randomizable_edges})

    @property
    def variables(self) -> list[str]:
        if self.path == "equal":
            return ["p"] if self.orders else []
        return [f"p{k}" for k in self.orders]

    def grid(self) -> list[tuple[Fraction, ...]]:
        axis = [Fraction(i, self.resolution - 1) for i in range(self.resolution)]
        return list(itertools.product(axis, repeat=len(self.variables)))

    def params(self, point: tuple[Fraction, ...]) -> RandomizationParams:
        if self.path == "equal":
            return RandomizationParams({k: point[0] for k in self.orders})
        return RandomizationParams(dict(zip(self.orders, point)))

    def value_columns(self) -> list[str]:
        if self.measure == "negativity":
            return [f"negativity[{b}]" for b in self.bipartitions]
        if self.measure == "gmn":
            return ["gmn", "certified"]
        return [self.measure]


def _evaluate_point(task) -> tuple[list, str]:
    """Worker: measure values for one grid point (picklable for process pools)."""
    config, point = task
    try:
        rho = randomized_density(config.hypergraph, config.params(point))
        if config.measure == "negativity":
            return [_format_number(negativity(rho, b)) for b in config.bipartitions], "ok"
        sol = solve_sdp(SdpProblem.full(rho, config.normalization))
        cert = check_certificate(sol)
        return [_format_number(sol.gmn), "yes" if cert.ok else "no"], "ok" if cert.ok else "certificate failed"
    except (CapacityError, SdpError, ValueError, np.linalg.LinAlgError) as exc:
        return [""] * len(config.value_columns()), f"error: {exc}"


def _threads() -> int:
    raw = os.environ.get("HYPERENT_THREADS", "").strip()
    if not raw:
        return 1
    try:
        k = int(raw)
    except ValueError:
        raise UsageError(f"HYPERENT_THREADS must be a positive integer, got {raw!r}") from None
    if k < 1:
        raise UsageError(f"HYPERENT_THREADS must be a positive integer, got {raw!r}")
    return k


def run_sweep(config: SweepConfig, threads: int = 1) -> tuple[dict, list[str], list[list]]:
    grid = config.grid()
    h = config.hypergraph
    if config.measure in ("overlap", "witness"):
        poly = overlap_polynomial(h)
        alpha = witness_alpha(h.max_order) if config.measure == "witness" else None
        results = []
        for point in grid:
            pt = config.params(point).p
            value = poly({k: pt[k] for k in poly.variables()})
            if alpha is not None:
                value = alpha - value
            results.append(([_format_number(value)], "ok"))
    else:
        tasks = [(config, point) for point in grid]
        if threads > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=threads) as pool:
                # map preserves task order whatever the completion order
                results = list(pool.map(_evaluate_point, tasks, chunksize=1))
        else:
            results = [_evaluate_point(t) for t in tasks]
    columns = config.variables + config.value_columns() + ["status"]
    rows = [[_format_number(x) for x in point] + vals + [status]
            for point, (vals, status) in zip(grid, results)]
    meta = _meta(h, config.measure, config.normalization)
    if config.measure == "negativity":
        meta["bipartitions"] = " ".join(str(b) for b in config.bipartitions)
    if config.measure == "witness":
        meta["alpha"] = str(witness_alpha(h.max_order))
    meta["variables"] = ",".join(config.variables) or "none"
    meta["path"] = config.path if config.path == "independent" else "p = " + " = ".join(
        f"p{k}" for k in config.orders)
    meta["grid"] = f"{config.resolution} points per variable on [0, 1], lexicographic"
    return meta, columns, rows


def cmd_sweep(args) -> int:
    h = resolve_hypergraph(args)
    config = SweepConfig(
        hypergraph=h,
        measure=args.measure,
        resolution=args.grid,
        bipartitions=parse_bipartitions(args.bipartition, h.n),
        normalization=args.normalization,
        path=args.path,
        out=args.out,
        fmt=args.format,
    )
    meta, columns, rows = run_sweep(config, _threads())
    _emit_table(meta, columns, rows, config.fmt, config.out)
    failed = [r for r in rows if r[-1] != "ok"]
    for r in failed:
        print(f"row {dict(zip(columns, r))}: {r[-1]}", file=sys.stderr)
    return EXIT_FAILURE if failed else EXIT_OK


# -- thresholds ---------------------------------------------------------------

def cmd_thresholds(args) -> int:
    if args.family not in THRESHOLD_FAMILIES:
        raise UsageError(f"thresholds supports --family {' or '.join(THRESHOLD_FAMILIES)}")
    ns, is_range = parse_n_range(args.n)
    if args.family == "flower":
        even = [n for n in ns if n % 2 == 0]
        if even and not is_range:
            raise UsageError(f"flower requires odd n, got {even}")
        ns = [n for n in ns if n % 2 == 1]
    bad = [n for n in ns if n < 3]
    if bad or not ns:
        raise UsageError(f"no valid n >= 3 in {args.n!r}")
    rows = []
    for n in ns:
        h = family(args.family, n)
        cp = critical_probability(h)
        rows.append([n, f"{cp.value:.3f}", overlap_polynomial(h).bind(0).to_text({0: "p"})])
    alpha = witness_alpha(3)
    if args.format == "text":
        lines = [f"# {args.family}: critical probability of alpha*1 - |H><H|, alpha = {alpha}",
                 f"{'n':>3}  {'p_w':>5}  overlap O(p)"]
        lines += [f"{n:>3}  {pw:>5}  {poly}" for n, pw, poly in rows]
        _write("\n".join(lines) + "\n", args.out)
    else:
        meta = {"tool": f"hyperent {__version__}", "family": args.family,
                "measure": "critical probability", "alpha": str(alpha)}
        _emit_table(meta, ["n", "p_w", "overlap"], rows, args.format, args.out)
    return EXIT_OK


# -- overlap ------------------------------------------------------------------

def cmd_overlap(args) -> int:
    h = resolve_hypergraph(args)
    if not h.randomizable_edges:
        raise UsageError("hypergraph has no edge of order >= 2 to randomize")
    poly = overlap_polynomial(h)
    names = {k: f"p{k}" for k in poly.variables()}
    alpha = witness_alpha(h.max_order)
    info = {
        "hypergraph": h.serialize(),
        "kappa_max": h.max_order,
        "overlap": poly.to_text(names),
        "overlap_on_path": poly.bind(0).to_text({0: "p"}),
        "alpha": str(alpha),
        "robustness_threshold": str(robustness_threshold(h.n, h.max_order)),
    }
    try:
        info["critical_probability"] = f"{critical_probability(h).value:.6f}"
    except ThresholdError as exc:
        info["critical_probability"] = f"none ({exc})"
    params = parse_probabilities(args.p, h)
    if params is not None:
        pt = {k: params.p[k] for k in poly.variables()}
        value = poly(pt)
        info["p"] = ",".join(f"p{k}={v}" for k, v in sorted(pt.items()))
        info["overlap_value"] = str(value)
        info["witness_value"] = str(alpha - value)
    if args.format == "json":
        _write(json.dumps(info, indent=2) + "\n", args.out)
    else:
        _write("".join(f"{k}: {v}\n" for k, v in info.items()), args.out)
    return EXIT_OK


# -- catalog-validate ---------------------------------------------------------

def cmd_catalog_validate(args) -> int:
    if not args.catalog:
        raise UsageError("--catalog is required")
    try:
        text = Path(args.catalog).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read catalog {args.catalog!r}: {exc.strerror or exc}") from None
    try:
        records = parse_catalog(text)
    except HypergraphError as exc:
        print(f"{args.catalog}: INVALID: {exc}")
        return EXIT_FAILURE
    status = EXIT_OK
    for i, h in enumerate(records, start=1):
        label = h.name or f"<record {i}>"
        notes = []
        if h.n <= 8:
            bad = check_stabilizers(h)
            if bad:
                notes.append(f"stabilizer failure on qubits {bad}")
        if h.n <= 6:
            err = float(np.max(np.abs(stabilizer_projector(h).data - build_state(h).projector())))
            if err > 1e-12:
                notes.append(f"stabilizer projector off by {err:.2e}")
        if notes:
            status = EXIT_FAILURE
        print(f"{label}: {h.serialize()}: {'; '.join(notes) if notes else 'OK'}")
    print(f"{len(records)} record(s), {'all valid' if status == EXIT_OK else 'with failures'}")
    return status


# -- entry point --------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hyperent", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"hyperent {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("state", help="print the sign vector of a hypergraph state")
    _add_selector(p)
    p.add_argument("--check-stabilizers", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_state)

    p = sub.add_parser("randomize", help="list spanning-subhypergraph branches and weights")
    _add_selector(p)
    p.add_argument("--p", action="append", help="success probabilities: 0.5 or 2=0.3,3=0.9")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_randomize)

    p = sub.add_parser("sweep", help="evaluate a measure on a probability grid")
    _add_selector(p)
    p.add_argument("--measure", required=True, choices=MEASURES)
    p.add_argument("--bipartition", action="append",
                   help='"1|2,3,4"; several separated by ";", or "all"')
    p.add_argument("--grid", type=int, default=11, help="points per variable (>= 2)")
    p.add_argument("--path", choices=("independent", "equal"), default="independent",
                   help="vary each p_k separately, or set p = p2 = p3 = ...")
    p.add_argument("--normalization", choices=("trace", "bounded"))
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("thresholds", help="critical probabilities for clover or flower families")
    p.add_argument("--family", required=True)
    p.add_argument("--n", required=True, help="N, N1,N2,... or LO..HI")
    p.add_argument("--format", choices=("text", "csv", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("overlap", help="exact overlap polynomial and witness data")
    _add_selector(p)
    p.add_argument("--p", action="append", help="evaluate at these probabilities")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.add_argument("--out")
    p.set_defaults(func=cmd_overlap)

    p = sub.add_parser("catalog-validate", help="parse a catalog and check every record")
    p.add_argument("--catalog", required=True)
    p.set_defaults(func=cmd_catalog_validate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"hyperent: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, SdpError, ThresholdError, ValueError, np.linalg.LinAlgError) as exc:
        print(f"hyperent: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
