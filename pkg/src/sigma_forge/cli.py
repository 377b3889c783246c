"""Command-line batch runner for the verification suites.

Config files are JSON objects whose keys match the long flags with dashes
replaced by underscores (``quad_order``, ``tol_scale``, ``lambda`` ...).  An
optional ``phi`` entry holds a field literal::

    {"phi": {"kind": "trig", "dim": 2, "terms": [[[1, 0], 0.2, 0.0]]}}

which replaces the random torus potential of the conservation-law checks.
Flags given on the command line override config values.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields
from datetime import datetime, timezone

from . import __version__
from .geom import field_from_literal
from .suites import SUITES, Record, RunOptions, run_suite

__all__ = ["SuiteConfig", "ConfigError", "build_parser", "execute", "main", "run"]

COMMANDS = SUITES + ("all",)
FIELDNAMES = ["suite", "check_id", "anchor", "value", "reference", "residual", "tol", "pass"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SuiteConfig:
    suite: str = "all"
    backend: str | None = None
    n: int | None = None
    k: int | None = None
    tau: float | None = None
    mode: str | None = None
    lam: float | None = None
    quad_order: int | None = None
    grid: int | None = None
    seed: int = 0
    samples: int | None = None
    tol_scale: float = 1.0
    model: str | None = None
    out: str | None = None
    format: str = "jsonl"
    jobs: int = 1
    phi: dict | None = None

    def __post_init__(self):
        if self.suite not in COMMANDS:
            raise ConfigError(f"unknown suite {self.suite!r}")
        if self.backend not in (None, "euclidean", "torus", "sphere"):
            raise ConfigError(f"unknown backend {self.backend!r}")
        if self.mode not in (None, "shrinking", "steady", "expanding"):
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.model not in (None, "gaussian", "sphere"):
            raise ConfigError(f"unknown model {self.model!r}")
        if self.format not in ("jsonl", "csv"):
            raise ConfigError(f"unknown format {self.format!r}")
        for name in ("n", "k", "quad_order", "grid", "samples"):
            v = getattr(self, name)
            if v is not None and (not isinstance(v, int) or isinstance(v, bool) or v < 1):
                raise ConfigError(f"{name} must be a positive integer")
        if self.tau is not None and not self.tau > 0:
            raise ConfigError("tau must be positive")
        if not self.tol_scale > 0:
            raise ConfigError("tol_scale must be positive")
        if not isinstance(self.jobs, int) or self.jobs < 1:
            raise ConfigError("jobs must be a positive integer")
        if self.phi is not None:
            self.phi_field()

    # -- serialisation --------------------------------------------------------
    def to_json(self) -> str:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return json.dumps(d, sort_keys=True)

    @classmethod
    def from_mapping(cls, data: dict) -> "SuiteConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        data = {k.replace("-", "_"): v for k, v in data.items()}
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(str(e)) from None

    @classmethod
    def from_json(cls, text: str) -> "SuiteConfig":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config is not valid JSON: {e}") from None
        return cls.from_mapping(data)

    # -------------------------------------------------------------------------
    def phi_field(self):
        try:
            return field_from_literal(self.phi["kind"], int(self.phi["dim"]), self.phi["terms"])
        except (KeyError, TypeError, ValueError) as e:
            raise ConfigError(f"bad phi literal: {e}") from None

    def options(self) -> RunOptions:
        extra = {"phi": self.phi_field()} if self.phi is not None else {}
        return RunOptions(
            seed=self.seed, samples=self.samples, tol_scale=self.tol_scale, backend=self.backend,
            n=self.n, k=self.k, tau=self.tau, mode=self.mode, lam=self.lam,
            quad_order=self.quad_order, grid=self.grid, model=self.model, fields=extra,
        )

    def suites(self) -> tuple[str, ...]:
        return SUITES if self.suite == "all" else (self.suite,)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sigma-forge", description="Run the weighted sigma_k verification suites.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("suite", choices=COMMANDS)
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="JSON config file; flags override it")
    p.add_argument("--backend", choices=("euclidean", "torus", "sphere"), default=S)
    p.add_argument("--model", choices=("gaussian", "sphere"), default=S,
                   help="soliton model for the soliton and variation suites")
    p.add_argument("--n", type=int, default=S)
    p.add_argument("--k", type=int, default=S)
    p.add_argument("--tau", type=float, default=S)
    p.add_argument("--mode", choices=("shrinking", "steady", "expanding"), default=S)
    p.add_argument("--lambda", dest="lam", type=float, default=S, help="explicit lambda override")
    p.add_argument("--quad-order", dest="quad_order", type=int, default=S)
    p.add_argument("--grid", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--samples", type=int, default=S)
    p.add_argument("--tol-scale", dest="tol_scale", type=float, default=S)
    p.add_argument("--out", default=S, help="report path (default: stdout)")
    p.add_argument("--format", choices=("jsonl", "csv"), default=S)
    p.add_argument("--jobs", type=int, default=S, help="run suites in parallel processes")
    return p


def resolve_config(args: argparse.Namespace) -> SuiteConfig:
    data = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                data = SuiteConfig.from_json(fh.read()).__dict__.copy()
        except OSError as e:
            raise ConfigError(f"cannot read config: {e}") from None
    overrides = {k: v for k, v in vars(args).items() if k != "config"}
    data.update(overrides)
    return SuiteConfig(**data)


def _run_one(name: str, opts: RunOptions) -> list[Record]:
    return run_suite(name, opts)


def execute(cfg: SuiteConfig) -> list[Record]:
    opts = cfg.options()
    names = cfg.suites()
    if cfg.jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_one, names, [opts] * len(names)))
    else:
        results = [_run_one(name, opts) for name in names]
    return [r for batch in results for r in batch]


def format_report(records: list[Record], cfg: SuiteConfig, timestamp: str | None = None) -> str:
    buf = io.StringIO()
    if cfg.format == "csv":
        w = csv.DictWriter(buf, fieldnames=FIELDNAMES, lineterminator="\n")
        w.writeheader()
        for r in records:
            w.writerow(r.as_dict())
        return buf.getvalue()
    meta = {
        "meta": {
            "tool": "sigma-forge",
            "version": __version__,
            # the output path is not part of the experiment
            "config": {k: v for k, v in json.loads(cfg.to_json()).items() if k != "out"},
            "timestamp": timestamp or datetime.now(timezone.utc).isoformat(),
        }
    }
    buf.write(json.dumps(meta, sort_keys=True) + "\n")
    for r in records:
        buf.write(json.dumps(r.as_dict()) + "\n")
    return buf.getvalue()


def summary(records: list[Record]) -> str:
    lines = []
    for name in dict.fromkeys(r.suite for r in records):
        rs = [r for r in records if r.suite == name]
        failed = [r for r in rs if not r.passed]
        lines.append(f"{name}: {len(rs) - len(failed)}/{len(rs)} passed")
        for r in failed:
            lines.append(f"  FAIL {r.check_id} [{r.anchor}] residual={r.residual:.3e} "
                         f"tol={r.tol:.3e}")
    return "\n".join(lines)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        cfg = resolve_config(args)
    except (ConfigError, TypeError) as e:
        print(f"sigma-forge: config error: {e}", file=sys.stderr)
        return 2
    try:
        records = execute(cfg)
    except ValueError as e:
        print(f"sigma-forge: config error: {e}", file=sys.stderr)
        return 2
    report = format_report(records, cfg)
    if cfg.out:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(report)
        print(summary(records))
    else:
        sys.stdout.write(report)
        print(summary(records), file=sys.stderr)
    return 0 if all(r.passed for r in records) else 1


def run(argv: list[str] | None = None) -> int:
    """Alias of :func:`main`: parse ``argv``, run, return the exit code."""
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
