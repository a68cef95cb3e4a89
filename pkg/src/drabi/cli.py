"""
Command-line frontend.

    drabi verify-symbolic [--corrupt]
    drabi spectrum   --model rm --delta 0.5 --kappa 0.7 --count 20
    drabi crossings  --model rm --delta 0.5 --sweep kappa:0:1.5:151 --count 5
    drabi invariants --gamma 1 --mu 0.4 --sweep Lambda:0.1:1:5 --sweep alpha:0:1.5707963267948966:5
    drabi scan       --model grm --gamma 1 --mu 0.7 --k2 0.3 --sweep k1:0.1:1.5:50

Exit codes: 0 success, 1 invariant/identity failure, 2 convergence failure, 64 usage error.
Energies from the Dunkl route are in units of gamma (GRM, RM) or g (su(1,1) models);
the invariants command reports energies of H itself.
"""
from __future__ import annotations

import argparse
import dataclasses
import io
import json
import math
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from drabi.dunkl import blocks
from drabi.errors import ConvergenceFailure, JcmBoundary, SpectralCollapse
from drabi.identities import format_report, run_suite
from drabi.invariants import CouplingPolar, invariant_pattern
from drabi.models import GrmParams, RmParams, Su11Params, build_grm_full
from drabi.spectra import (
    N_CAP,
    Spectrum,
    Sweep,
    converged_levels,
    crossing_scan,
    crossing_violations,
    jcm_analytic,
    thread_count,
)

EXIT_OK, EXIT_INVARIANT, EXIT_CONVERGENCE, EXIT_USAGE = 0, 1, 2, 64
MODELS = ("grm", "rm", "two_photon", "two_mode")
PARAMS = ("gamma", "mu", "k1", "k2", "q", "delta", "kappa", "Lambda", "alpha")
REQUIRED = {
    "grm": ("gamma", "mu", "k1", "k2"),
    "rm": ("delta", "kappa"),
    "two_photon": ("gamma", "delta", "q"),
    "two_mode": ("gamma", "delta", "q"),
}


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    model: str = "grm"
    gamma: float | None = None
    mu: float | None = None
    k1: float | None = None
    k2: float | None = None
    q: str | None = None
    delta: float | None = None
    kappa: float | None = None
    Lambda: float | None = None
    alpha: float | None = None
    parity: int | None = None
    count: int = 20
    tol: float = 1e-10
    nmax_cap: int = N_CAP
    sweep: list[str] = field(default_factory=list)
    out: str | None = None
    format: str = "csv"

    @classmethod
    def from_mapping(cls, data: dict[str, Any]) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        if isinstance(cfg.sweep, str):
            cfg.sweep = [cfg.sweep]
        return cfg

    def validate(self, needs: tuple[str, ...] | None = None) -> None:
        if self.model not in MODELS:
            raise UsageError(f"--model must be one of {MODELS}")
        if self.format not in ("csv", "json"):
            raise UsageError("--format must be csv or json")
        if self.parity not in (None, 1, -1):
            raise UsageError("--parity must be +1 or -1")
        if not isinstance(self.count, int) or self.count < 1:
            raise UsageError("--count must be a positive integer")
        if not (isinstance(self.tol, (int, float)) and self.tol > 0):
            raise UsageError("--tol must be positive")
        missing = [k for k in (needs if needs is not None else REQUIRED[self.model]) if getattr(self, k) is None]
        if missing:
            raise UsageError(f"model {self.model} needs: {', '.join(missing)}")
        for s in self.sweep:
            try:
                Sweep.parse(s)
            except ValueError as exc:
                raise UsageError(str(exc)) from exc

    def with_value(self, name: str, value: float) -> "RunConfig":
        if name not in PARAMS:
            raise UsageError(f"cannot sweep {name!r}; choose one of {PARAMS}")
        return dataclasses.replace(self, **{name: value})

    def sweeps(self) -> list[Sweep]:
        return [Sweep.parse(s) for s in self.sweep]

    def describe(self) -> str:
        keys = ["model"] + [k for k in PARAMS if getattr(self, k) is not None]
        keys += ["parity", "count", "tol", "nmax_cap"]
        parts = [f"{k}={getattr(self, k)}" for k in keys if getattr(self, k) is not None]
        parts += [f"sweep={s}" for s in self.sweep]
        return " ".join(parts)


# ---------------------------------------------------------------------------
# model routing


def grm_params(cfg: RunConfig) -> GrmParams:
    try:
        return GrmParams(cfg.gamma, cfg.mu, cfg.k1, cfg.k2)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def su11_params(cfg: RunConfig) -> Su11Params:
    try:
        return Su11Params(cfg.gamma, cfg.delta, Fraction(str(cfg.q)), cfg.model)
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(str(exc)) from exc


def spectrum_builder(cfg: RunConfig) -> tuple[Callable[[int], Any], str]:
    """Return (builder, route note) for converged_levels."""
    parities = (cfg.parity,) if cfg.parity else (1, -1)
    if cfg.model == "grm":
        p = grm_params(cfg)
        if p.k1 * p.k2 == 0:
            raise JcmBoundary("k1*k2 = 0")
        if p.k1 * p.k2 < 0:
            raise UsageError("grm Dunkl route needs k1*k2 > 0")
        return blocks("grm", p, parities), "dunkl"
    if cfg.model == "rm":
        if cfg.kappa < 0:
            raise UsageError("kappa must be >= 0")
        return blocks("rm", RmParams(cfg.delta, cfg.kappa), parities), "dunkl"
    return blocks(cfg.model, su11_params(cfg), parities), "dunkl"


def compute_spectrum(cfg: RunConfig) -> tuple[Spectrum, list[str], int]:
    """Spectrum plus header notes and an exit code (0, 1 or 2)."""
    notes: list[str] = []
    try:
        builder, route = spectrum_builder(cfg)
    except JcmBoundary:
        return _jcm_route(cfg, notes)
    notes.append(f"route={route} units={'g' if cfg.model in ('two_photon', 'two_mode') else 'gamma'}")
    try:
        spec = converged_levels(builder, cfg.count, cfg.tol, n_cap=cfg.nmax_cap)
    except ConvergenceFailure as exc:
        notes.append(f"convergence failure: {exc}")
        return exc.best, notes, EXIT_CONVERGENCE
    return spec, notes, EXIT_OK


def _jcm_route(cfg: RunConfig, notes: list[str]):
    p = grm_params(cfg)
    notes.append("route=full-model (k1*k2=0: Dunkl branch refused) units=gamma")
    try:
        spec = converged_levels(lambda n: build_grm_full(p, n), cfg.count, cfg.tol, n_cap=min(cfg.nmax_cap, 4096))
    except ConvergenceFailure as exc:
        notes.append(f"convergence failure: {exc}")
        return _scale(exc.best, p.gamma), notes, EXIT_CONVERGENCE
    code = EXIT_OK
    if p.k1 * p.k2 == 0:
        # swapping k1 and k2 while flipping mu leaves the spectrum unchanged
        oracle = p if p.k2 == 0 else GrmParams(p.gamma, -p.mu, p.k2, p.k1)
        dev = float(np.max(np.abs(spec.energies - jcm_analytic(oracle, cfg.count))))
        notes.append(f"jcm_analytic max deviation={dev:.3e}")
        if dev > 1e-8:
            code = EXIT_INVARIANT
    if cfg.parity:
        spec = Spectrum(tuple(lv for lv in spec.levels if lv.parity == cfg.parity), spec.n_max_used, spec.tol)
    return _scale(spec, p.gamma), notes, code


def _scale(spec: Spectrum, gamma: float) -> Spectrum:
    levels = tuple(dataclasses.replace(lv, energy=lv.energy / gamma) for lv in spec.levels)
    return Spectrum(levels, spec.n_max_used, spec.tol)


# ---------------------------------------------------------------------------
# emission


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def emit(cfg: RunConfig, command: str, columns: list[str], rows: list[list], notes: list[str]) -> None:
    if cfg.format == "json":
        meta = {"command": command, "config": cfg.describe(), "notes": notes}
        doc = {"meta": meta, "columns": columns, "rows": [[_json_value(v) for v in r] for r in rows]}
        text = json.dumps(doc, indent=1) + "\n"
    else:
        buf = io.StringIO()
        buf.write(f"# drabi {command} {cfg.describe()}" + "".join(f"; {n}" for n in notes) + "\n")
        buf.write(",".join(columns) + "\n")
        for r in rows:
            buf.write(",".join(_fmt(v) for v in r) + "\n")
        text = buf.getvalue()
    if cfg.out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", newline="\n") as fh:
            fh.write(text)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


SPECTRUM_COLUMNS = ["index", "parity", "index_within_parity", "energy", "converged", "n_max_used"]


def _spectrum_rows(spec: Spectrum, prefix: list | None = None) -> list[list]:
    prefix = prefix or []
    return [
        prefix + [i, lv.parity, lv.index_within_parity, lv.energy, lv.converged, spec.n_max_used]
        for i, lv in enumerate(spec.levels)
    ]


# ---------------------------------------------------------------------------
# subcommands


def cmd_verify_symbolic(args) -> int:
    results = run_suite(corrupt=args.corrupt)
    print(format_report(results))
    return EXIT_OK if all(r.passed for r in results) else EXIT_INVARIANT


def cmd_spectrum(cfg: RunConfig) -> int:
    cfg.validate()
    spec, notes, code = compute_spectrum(cfg)
    emit(cfg, "spectrum", SPECTRUM_COLUMNS, _spectrum_rows(spec), notes)
    return code


def _first_sweep(cfg: RunConfig, command: str) -> Sweep:
    """Validate with the swept parameter set to its lower bound."""
    if not cfg.sweep:
        raise UsageError(f"{command} needs --sweep param:lo:hi:steps")
    try:
        sw = Sweep.parse(cfg.sweep[0])
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    cfg.with_value(sw.param, sw.lo).validate()
    return sw


def _family(cfg: RunConfig, name: str):
    def family(x: float):
        builder, _ = spectrum_builder(cfg.with_value(name, x))
        return builder

    return family


def cmd_crossings(cfg: RunConfig) -> int:
    sw = _first_sweep(cfg, "crossings")
    if cfg.parity:
        raise UsageError("crossings compares both parities; drop --parity")
    columns = ["parameter_value", "parityA", "indexA", "parityB", "indexB", "min_gap", "kind"]
    try:
        events = crossing_scan(_family(cfg, sw.param), sw, cfg.count, cfg.tol)
    except ConvergenceFailure as exc:
        emit(cfg, "crossings", columns, [], [f"convergence failure: {exc}"])
        return EXIT_CONVERGENCE
    except JcmBoundary as exc:
        raise UsageError(f"sweep reaches the JCM boundary: {exc}") from exc
    rows = [[e.parameter_value, *e.level_a, *e.level_b, e.min_gap, e.kind] for e in events]
    bad = crossing_violations(events)
    notes = [f"events={len(events)} equal_parity_true_crossings={len(bad)}"]
    emit(cfg, "crossings", columns, rows, notes)
    if bad:
        print(f"invariant breach: {len(bad)} equal-parity true crossing(s)", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def _polar_points(cfg: RunConfig) -> list[tuple[float, float]]:
    if cfg.Lambda is not None and cfg.alpha is not None:
        base = {"Lambda": [cfg.Lambda], "alpha": [cfg.alpha]}
    elif cfg.k1 is not None and cfg.k2 is not None:
        if cfg.k1 < 0 or cfg.k2 < 0:
            raise UsageError("invariants need k1, k2 >= 0 for the polar parametrization")
        base = {"Lambda": [math.hypot(cfg.k1, cfg.k2)], "alpha": [math.atan2(cfg.k2, cfg.k1)]}
    else:
        base = {"Lambda": [cfg.Lambda], "alpha": [cfg.alpha]}
    for sw in cfg.sweeps():
        if sw.param not in ("Lambda", "alpha"):
            raise UsageError("invariants sweeps Lambda and/or alpha only")
        base[sw.param] = sw.grid().tolist()
    if None in base["Lambda"] or None in base["alpha"]:
        raise UsageError("invariants need Lambda and alpha (or k1 and k2, or sweeps)")
    return [(L, a) for L in base["Lambda"] for a in base["alpha"]]


def cmd_invariants(cfg: RunConfig) -> int:
    if cfg.model != "grm":
        raise UsageError("invariants are defined for the grm model only")
    cfg.validate(needs=("gamma", "mu"))
    points = _polar_points(cfg)

    def one(la):
        L, a = la
        p = CouplingPolar(L, a).params(cfg.gamma, cfg.mu)
        return invariant_pattern(p, cfg.count, tol=cfg.tol)

    columns = ["Lambda", "alpha", "n", "parity", "energy", "t1", "t2", "imag_residual"]
    try:
        with ThreadPoolExecutor(max_workers=thread_count()) as pool:
            patterns = list(pool.map(one, points))
    except ConvergenceFailure as exc:
        emit(cfg, "invariants", columns, [], [f"convergence failure: {exc}"])
        return EXIT_CONVERGENCE
    rows = []
    for (L, a), pts in zip(points, patterns):
        rows += [[L, a, pt.n, pt.parity, pt.energy, pt.t1, pt.t2, pt.imag_residual] for pt in pts]
    worst = max((r[-1] for r in rows), default=0.0)
    emit(cfg, "invariants", columns, rows, [f"max_imag_residual={worst:.3e}"])
    if worst > 1e-8:
        print(f"non-real invariant: max imaginary part {worst:.3g}", file=sys.stderr)
        return EXIT_INVARIANT
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    sw = _first_sweep(cfg, "scan")
    grid = sw.grid()
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        results = list(pool.map(lambda x: compute_spectrum(cfg.with_value(sw.param, float(x))), grid))
    rows, notes, code = [], [], EXIT_OK
    for x, (spec, n, c) in zip(grid, results):
        rows += _spectrum_rows(spec, [float(x)])
        code = max(code, c)
        notes += [f"{sw.param}={x:.17g}: {m}" for m in n if "failure" in m or "deviation" in m]
    emit(cfg, "scan", ["parameter_value"] + SPECTRUM_COLUMNS, rows, notes)
    return code


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _signed_int(text: str) -> int:
    return int(text.replace("+", ""))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="drabi", description=__doc__.split("\n\n")[0].strip())
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    v = sub.add_parser("verify-symbolic", help="run the exact identity suite")
    v.add_argument("--corrupt", action="store_true", help="negative control: flip one expected sign")
    for name in ("spectrum", "crossings", "invariants", "scan"):
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--model", choices=MODELS)
        for k in ("gamma", "mu", "k1", "k2", "delta", "kappa", "Lambda", "alpha"):
            p.add_argument(f"--{k}", type=float)
        p.add_argument("--q", help="Bargmann index, e.g. 1/4")
        p.add_argument("--parity", type=_signed_int)
        p.add_argument("--count", type=int)
        p.add_argument("--tol", type=float)
        p.add_argument("--nmax-cap", dest="nmax_cap", type=int)
        p.add_argument("--sweep", action="append", help="param:lo:hi:steps (repeatable)")
        p.add_argument("--out")
        p.add_argument("--format", choices=("csv", "json"))
    return parser


def load_config(args) -> RunConfig:
    data: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config must be a JSON object")
    cfg = RunConfig.from_mapping(data)
    for f in dataclasses.fields(RunConfig):
        val = getattr(args, f.name, None)
        if val is not None:
            setattr(cfg, f.name, val)
    if cfg.q is not None:
        cfg.q = str(cfg.q)
    return cfg


COMMANDS = {"spectrum": cmd_spectrum, "crossings": cmd_crossings, "invariants": cmd_invariants, "scan": cmd_scan}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.command == "verify-symbolic":
            return cmd_verify_symbolic(args)
        cfg = load_config(args)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", SpectralCollapse)
            code = COMMANDS[args.command](cfg)
        for msg in sorted({str(w.message) for w in caught if issubclass(w.category, SpectralCollapse)}):
            print(f"warning: {msg}", file=sys.stderr)
        return code
    except UsageError as exc:
        print(f"drabi: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except TypeError as exc:
        print(f"drabi: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
