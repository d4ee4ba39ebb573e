"""Command-line experiment runner.

Subcommands::

    stablequad weights --weight cos20pix --d 10 --N 200 --method nnls
    stablequad sweep --measure stability --weight cos20pix --d 10 --N-range 50:1000:10
    stablequad sweep --measure accuracy --d-range 1:20          # N = N(d) per d
    stablequad ratio --method ls --weight one --d-range 0:40
    stablequad replay results.csv

Every CSV starts with ``# config: {...}`` (the validated configuration as
JSON) so ``replay`` can regenerate the file from its header alone. Floats
are written with 17 significant digits. Exit codes: 0 success, 2 usage
error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .core import (
    TEST_FUNCTIONS,
    Interval,
    Method,
    WeightFn,
    get_weight,
    make_equidistant,
    make_scattered,
)
from .diagnostics import (
    MinimalNCriterion,
    build_rule,
    integration_error,
    k_omega,
    kappa,
    ratio_study,
    reference_integral,
    sign_consistency_measure,
)
from .dop import n_of_d
from .errors import InvalidArgument, StableQuadError
from .moments import DEFAULT_J

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL = 0, 2, 3
MEASURES = ("stability", "sign", "exactness", "accuracy")
METHOD_ALIASES = {"ls": "ls", "nnls": "nnls", "trap": "trap", "trapezoid": "trap"}


@dataclass
class ExperimentConfig:
    command: str
    weight: str = "x_sqrt_one_minus_x3"
    interval: tuple = (-1.0, 1.0)
    d: int = 10
    N: Optional[int] = None
    N_range: Optional[tuple] = None
    d_range: Optional[tuple] = None
    nodes: str = "eq"
    seed: int = 0
    J: int = DEFAULT_J
    method: tuple = ("ls",)
    measure: Optional[str] = None
    confirm_window: int = 0
    cap: int = 5000

    def validate(self):
        if self.command not in ("weights", "sweep", "ratio"):
            raise InvalidArgument(f"unknown command {self.command!r}")
        Interval(*self.interval)
        self.weight_fn().check_interval(self.get_interval())
        if self.nodes not in ("eq", "sc"):
            raise InvalidArgument("--nodes must be 'eq' or 'sc'")
        if self.J < 1:
            raise InvalidArgument("--J must be >= 1")
        if self.d < 0:
            raise InvalidArgument("--d must be >= 0")
        for m in self.method:
            if m not in ("ls", "nnls", "trap"):
                raise InvalidArgument(f"unknown method {m!r}")
        if self.command == "weights":
            if self.N is None:
                raise InvalidArgument("weights needs --N")
            if len(self.method) != 1:
                raise InvalidArgument("weights takes a single --method")
            if self.method[0] != "trap" and self.N <= self.d:
                raise InvalidArgument(f"need more nodes than the degree: N > d (got N={self.N}, d={self.d})")
            if self.N < 2:
                raise InvalidArgument("need N >= 2 nodes")
        if self.command == "sweep":
            if self.measure not in MEASURES:
                raise InvalidArgument(f"--measure must be one of {MEASURES}")
            if (self.N_range is None) == (self.d_range is None):
                raise InvalidArgument("sweep needs exactly one of --N-range or --d-range")
            if self.d_range is not None and self.measure != "accuracy":
                raise InvalidArgument("--d-range sweeps (N = N(d)) are only defined for --measure accuracy")
        if self.command == "ratio":
            if self.d_range is None:
                raise InvalidArgument("ratio needs --d-range")
            lo, hi, _ = self.d_range
            if lo < 0 or hi > 40:
                raise InvalidArgument("--d-range for ratio must lie within 0..40")
            if any(m == "trap" for m in self.method) or len(self.method) != 1:
                raise InvalidArgument("ratio takes a single --method, ls or nnls")
        return self

    def get_interval(self) -> Interval:
        return Interval(*self.interval)

    def weight_fn(self) -> WeightFn:
        return get_weight(self.weight)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        names = {f.name for f in fields(cls)}
        unknown = set(raw) - names
        if unknown:
            raise InvalidArgument(f"unknown config keys {sorted(unknown)}")
        for key in ("interval", "N_range", "d_range", "method"):
            if raw.get(key) is not None:
                raw[key] = tuple(raw[key])
        return cls(**raw).validate()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return format(v, ".17g")
    return str(v)


class _Writer:
    def __init__(self, config: ExperimentConfig):
        self.buf = io.StringIO()
        self.buf.write(f"# config: {config.to_json()}\n")
        self._csv = csv.writer(self.buf, lineterminator="\n")

    def meta(self, **items):
        self.buf.write("# " + " ".join(f"{k}={_fmt(v)}" for k, v in items.items()) + "\n")

    def row(self, values):
        self._csv.writerow([_fmt(v) for v in values])

    def getvalue(self):
        return self.buf.getvalue()


def _nodeset(cfg: ExperimentConfig, N: int):
    interval = cfg.get_interval()
    if cfg.nodes == "sc":
        return make_scattered(interval, N, cfg.seed)
    return make_equidistant(interval, N)


def cmd_weights(cfg: ExperimentConfig) -> str:
    w = cfg.weight_fn()
    method = Method(cfg.method[0])
    rule = build_rule(_nodeset(cfg, cfg.N), cfg.d, w, method, cfg.J)
    out = _Writer(cfg)
    out.meta(
        method=method.value,
        d=cfg.d,
        N=cfg.N,
        seed=cfg.seed,
        residual=rule.exactness_residual,
        kappa=kappa(rule.weights),
        S_omega=sign_consistency_measure(rule, w),
    )
    out.row(["node", "weight"])
    for x, wt in zip(rule.nodes, rule.weights):
        out.row([float(x), float(wt)])
    return out.getvalue()


SWEEP_COLUMNS = {
    "stability": ["kappa", "K_omega", "kappa_minus_K"],
    "sign": ["S_omega"],
    "exactness": ["residual"],
    "accuracy": ["error_absx3", "error_expx"],
}


def _sweep_point(args):
    cfg, d, N, method = args
    cols = SWEEP_COLUMNS[cfg.measure]
    try:
        w = cfg.weight_fn()
        interval = cfg.get_interval()
        rule = build_rule(_nodeset(cfg, N), d, w, Method(method), cfg.J)
        values = {}
        if cfg.measure == "stability":
            K = k_omega(w, interval)
            values = {"kappa": kappa(rule.weights), "K_omega": K}
            values["kappa_minus_K"] = values["kappa"] - K
        elif cfg.measure == "sign":
            values = {"S_omega": sign_consistency_measure(rule, w)}
        elif cfg.measure == "exactness":
            values = {"residual": rule.exactness_residual}
        else:
            for name in ("absx3", "expx"):
                f = TEST_FUNCTIONS[name]
                values[f"error_{name}"] = integration_error(rule, f, reference_integral(f, w, interval))
        return [values[c] for c in cols], ""
    except StableQuadError as exc:
        return [None] * len(cols), f"{type(exc).__name__}: {exc}"


def _expand(r):
    lo, hi, step = r
    return list(range(lo, hi + 1, step))


def cmd_sweep(cfg: ExperimentConfig, jobs: int = 1) -> str:
    methods = list(cfg.method)
    if cfg.measure == "accuracy":
        methods = ["ls", "nnls", "trap"]
    if cfg.d_range is not None:
        grid = [(d, n_of_d(d)) for d in _expand(cfg.d_range)]
    else:
        grid = [(cfg.d, N) for N in _expand(cfg.N_range)]
    tasks = [(cfg, d, N, m) for d, N in grid for m in methods]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    rows = sorted(
        ((d, N, m, vals, err) for (_, d, N, m), (vals, err) in zip(tasks, results)),
        key=lambda r: (r[0], r[1], methods.index(r[2])),
    )
    out = _Writer(cfg)
    out.meta(measure=cfg.measure, weight=cfg.weight, nodes=cfg.nodes, seed=cfg.seed, J=cfg.J)
    out.row(["d", "N", "method", *SWEEP_COLUMNS[cfg.measure], "error"])
    for d, N, m, vals, err in rows:
        out.row([d, N, m, *vals, err])
    return out.getvalue()


def cmd_ratio(cfg: ExperimentConfig, jobs: int = 1) -> str:
    crit = MinimalNCriterion(
        cap=cfg.cap, confirm_window=cfg.confirm_window, J=cfg.J, interval=cfg.get_interval()
    )
    rows, fit = ratio_study(cfg.weight, Method(cfg.method[0]), _expand(cfg.d_range), crit, jobs)
    if fit is None:
        raise InvalidArgument("power-law fit needs at least 2 successful samples with distinct d >= 1")
    out = _Writer(cfg)
    out.row(["d", "minimal_N", "error"])
    for d, N, err in rows:
        out.row([d, N, err])
    out.meta(fit="N=C*d^s", space=fit.space, C=fit.C, s=fit.s, residual=fit.residual)
    return out.getvalue()


def run_config(cfg: ExperimentConfig, jobs: int = 1) -> str:
    cfg.validate()
    if cfg.command == "weights":
        return cmd_weights(cfg)
    if cfg.command == "sweep":
        return cmd_sweep(cfg, jobs)
    return cmd_ratio(cfg, jobs)


def read_config_header(path: str) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        first = fh.readline()
    prefix = "# config: "
    if not first.startswith(prefix):
        raise InvalidArgument(f"{path} does not start with a '# config:' header")
    return ExperimentConfig.from_json(first[len(prefix):])


def _parse_range(text: str):
    parts = text.split(":")
    try:
        nums = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"range {text!r} must be lo:hi[:step] integers") from None
    if len(nums) == 2:
        nums.append(1)
    if len(nums) != 3 or nums[2] < 1 or nums[0] > nums[1]:
        raise argparse.ArgumentTypeError(f"range {text!r} must be lo:hi[:step] with lo <= hi, step >= 1")
    return tuple(nums)


def _parse_interval(text: str):
    try:
        a, b = (float(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"interval {text!r} must look like a,b") from None
    return (a, b)


def _parse_methods(text: str):
    out = []
    for part in text.split(","):
        if part not in METHOD_ALIASES:
            raise argparse.ArgumentTypeError(f"unknown method {part!r}")
        out.append(METHOD_ALIASES[part])
    return tuple(out)


def _weight_arg(text: str) -> str:
    # a path to a file holding an expression becomes expr:<contents>
    if not text.startswith("expr:") and os.path.isfile(text):
        with open(text, encoding="utf-8") as fh:
            return "expr:" + " ".join(fh.read().split())
    return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stablequad", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--weight", type=_weight_arg, default="x_sqrt_one_minus_x3",
                        help="catalog name, expr:<expression>, or a file containing an expression")
    common.add_argument("--interval", type=_parse_interval, default=(-1.0, 1.0))
    common.add_argument("--d", type=int, default=10)
    common.add_argument("--nodes", choices=("eq", "sc"), default="eq")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--J", type=int, default=DEFAULT_J)
    common.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes (output is unaffected)")

    p = sub.add_parser("weights", parents=[common], help="print the weights of one rule")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--method", type=_parse_methods, default=("ls",))

    p = sub.add_parser("sweep", parents=[common], help="measure rules over a range of N (or d)")
    p.add_argument("--measure", choices=MEASURES, required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--N-range", dest="N_range", type=_parse_range)
    g.add_argument("--d-range", dest="d_range", type=_parse_range)
    p.add_argument("--method", type=_parse_methods, default=("ls", "nnls"))

    p = sub.add_parser("ratio", parents=[common], help="minimal stable N per d and the fit N = C d^s")
    p.add_argument("--d-range", dest="d_range", type=_parse_range, required=True)
    p.add_argument("--method", type=_parse_methods, default=("ls",))
    p.add_argument("--confirm-window", dest="confirm_window", type=int, default=0)
    p.add_argument("--cap", type=int, default=5000)

    p = sub.add_parser("replay", help="re-run the experiment recorded in a CSV header")
    p.add_argument("csv_path")
    p.add_argument("--out", default=None)
    p.add_argument("--jobs", type=int, default=1)
    return parser


def config_from_args(args) -> ExperimentConfig:
    kwargs = {f.name: getattr(args, f.name) for f in fields(ExperimentConfig) if hasattr(args, f.name)}
    return ExperimentConfig(**kwargs)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "replay":
            cfg = read_config_header(args.csv_path)
        else:
            cfg = config_from_args(args)
        text = run_config(cfg, jobs=max(1, args.jobs))
    except InvalidArgument as exc:
        print(f"stablequad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StableQuadError, ArithmeticError) as exc:
        print(f"stablequad: numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
