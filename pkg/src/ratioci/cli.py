"""Command-line front end: ``simulate``, ``analyze``, ``diagnose``, ``classify``, ``wage-mimic``."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from ratioci.ci_asymptotic import delta_ci
from ratioci.ci_bootstrap import BootstrapConfig, bootstrap_ci
from ratioci.ci_nonasymptotic import Method
from ratioci.core import MomentBounds, PairedSample, SupportBounds, ratio_estimate
from ratioci.dgp import DgpSpec
from ratioci.diagnostics import (
    ClassKind,
    RegimeInput,
    alpha_bar_bc,
    alpha_underline_bc,
    classify_regime,
    critical_bracket,
    length_lower_bound,
    n_bar_bc,
    plug_in_n_bar,
)
from ratioci.montecarlo import (
    BootstrapMethod,
    CountingMode,
    CoverageReport,
    DeltaMethod,
    NonasymptoticMethod,
    estimate_coverage,
)
from ratioci.rng import generator
from ratioci.svg import LineChart, Series

CSV_HEADER = (
    "experiment_id",
    "dgp",
    "n",
    "alpha",
    "method",
    "counting_mode",
    "coverage",
    "undefined_rate",
    "mc_se",
    "reps",
    "seed",
    "feasible",
)


class ConfigError(ValueError):
    pass


# -- experiment configs -------------------------------------------------------------


def _bounds_for(kind: str, raw: dict[str, Any] | None):
    if raw is None:
        raise ConfigError(f"method {kind} requires 'bounds'")
    try:
        if kind.startswith("bc_"):
            return MomentBounds(
                float(raw["l_y"]), float(raw["u_x"]), float(raw["u_y"]),
                None if raw.get("a_y") is None else float(raw["a_y"]),
            )
        return SupportBounds(
            float(raw["a_x"]), float(raw["b_x"]), float(raw["a_y"]), float(raw["b_y"]), float(raw["l_y"])
        )
    except KeyError as exc:
        raise ConfigError(f"method {kind}: bounds missing {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ConfigError(f"method {kind}: {exc}") from None


def parse_method(raw: dict[str, Any]):
    kind = raw.get("type")
    if kind == "delta":
        return DeltaMethod()
    if kind == "bootstrap":
        b = int(raw.get("B", 2000))
        if b < 2:
            raise ConfigError(f"method bootstrap needs B >= 2, got {b}")
        return BootstrapMethod(b)
    try:
        method = Method(kind)
    except ValueError:
        raise ConfigError(f"unknown method type {kind!r}") from None
    bounds = _bounds_for(kind, raw.get("bounds"))
    if method is Method.BC_EASY and bounds.a_y is None:
        raise ConfigError("method bc_easy requires 'a_y' in its bounds")
    return NonasymptoticMethod(method, bounds)


@dataclass
class ExperimentConfig:
    experiment_id: str
    dgps: list[DgpSpec]
    n_grid: list[int]
    alphas: list[float]
    methods: list
    reps: int
    seed: int
    counting_mode: CountingMode
    csv_path: str | None
    svg_path: str | None
    rule_bounds: MomentBounds | None = None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ExperimentConfig:
        try:
            raw_dgp = d["dgp"]
            dgp_list = raw_dgp if isinstance(raw_dgp, list) else [raw_dgp]
            dgps = [DgpSpec.from_dict(x) for x in dgp_list]
            n_grid = [int(v) for v in d["n_grid"]]
            alpha = d["alpha"]
            alphas = [float(a) for a in (alpha if isinstance(alpha, list) else [alpha])]
            methods = [parse_method(m) for m in d["methods"]]
            reps = int(d["reps"])
            seed = int(d.get("seed", 0))
            mode = CountingMode(d.get("counting_mode", CountingMode.UNDEFINED_AS_MISS.value))
        except ConfigError:
            raise
        except KeyError as exc:
            raise ConfigError(f"config missing key {exc.args[0]!r}") from None
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        if not dgps or not n_grid or not alphas or not methods:
            raise ConfigError("dgp, n_grid, alpha and methods must be non-empty")
        if any(n < 1 for n in n_grid):
            raise ConfigError("n_grid entries must be positive")
        if any(not 0 < a < 1 for a in alphas):
            raise ConfigError("alpha values must lie in (0, 1)")
        if reps < 1:
            raise ConfigError("reps must be positive")
        outputs = d.get("outputs", {})
        rule = d.get("rule_bounds")
        rule_bounds = None
        if rule is not None:
            rule_bounds = _bounds_for("bc_rule", {"u_x": 1.0, **rule})
        else:
            for m in methods:
                if isinstance(m, NonasymptoticMethod) and isinstance(m.bounds, MomentBounds):
                    rule_bounds = m.bounds
                    break
        return cls(
            experiment_id=str(d.get("experiment_id", "experiment")),
            dgps=dgps,
            n_grid=n_grid,
            alphas=alphas,
            methods=methods,
            reps=reps,
            seed=seed,
            counting_mode=mode,
            csv_path=outputs.get("csv_path"),
            svg_path=outputs.get("svg_path"),
            rule_bounds=rule_bounds,
        )


def bundled_configs() -> list[str]:
    root = resources.files("ratioci") / "configs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def load_config(ref: str) -> ExperimentConfig:
    path = Path(ref)
    if path.is_file():
        text = path.read_text()
    else:
        name = ref[:-5] if ref.endswith(".json") else ref
        res = resources.files("ratioci") / "configs" / f"{name}.json"
        if not res.is_file():
            raise ConfigError(f"no such config file or bundled config: {ref}")
        text = res.read_text()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("config must be a JSON object")
    return ExperimentConfig.from_dict(raw)


def _g(v: float | None) -> str:
    return "" if v is None else f"{v:.6g}"


def report_rows(experiment_id: str, reports: Sequence[CoverageReport]) -> list[list[str]]:
    return [
        [
            experiment_id,
            r.spec_id,
            str(r.n),
            _g(r.alpha),
            r.method_id,
            r.counting_mode.value,
            _g(r.coverage),
            _g(r.undefined_rate),
            _g(r.mc_se),
            str(r.reps),
            str(r.seed),
            "true" if r.feasible else "false",
        ]
        for r in reports
    ]


def format_csv(experiment_id: str, reports: Sequence[CoverageReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(report_rows(experiment_id, reports))
    return buf.getvalue()


def run_grid(cfg: ExperimentConfig, workers: int | None = None) -> list[CoverageReport]:
    reports = []
    for spec in cfg.dgps:
        for alpha in cfg.alphas:
            for method in cfg.methods:
                for n in cfg.n_grid:
                    reports.append(
                        estimate_coverage(spec, n, alpha, method, cfg.reps, cfg.seed, cfg.counting_mode, workers)
                    )
    return reports


def build_chart(cfg: ExperimentConfig, reports: Sequence[CoverageReport]) -> LineChart:
    by_level = len(cfg.n_grid) == 1 and len(cfg.alphas) > 1
    chart = LineChart(
        title=cfg.experiment_id,
        x_label="nominal level 1 - alpha" if by_level else "n",
        log_x=not by_level,
    )
    groups: dict[str, list[CoverageReport]] = {}
    for r in reports:
        if r.coverage is None:
            continue
        key = f"{r.method_id}" if len(cfg.dgps) == 1 else f"{r.spec_id[:40]} {r.method_id}"
        if not by_level and len(cfg.alphas) > 1:
            key += f" a={r.alpha:g}"
        groups.setdefault(key, []).append(r)
    for label, rs in groups.items():
        xs = [1.0 - r.alpha for r in rs] if by_level else [float(r.n) for r in rs]
        chart.series.append(Series(label, xs, [r.coverage for r in rs]))
    if by_level:
        # Coverage at level 1 - alpha is compared against the diagonal.
        levels = sorted(1.0 - a for a in cfg.alphas)
        chart.series.append(Series("nominal", levels, levels))
        if cfg.rule_bounds is not None:
            a_bar = alpha_bar_bc(cfg.n_grid[0], cfg.rule_bounds)
            chart.v_rules.append((1.0 - a_bar, f"1 - alpha_bar = {1.0 - a_bar:.4g}"))
    else:
        for a in cfg.alphas:
            chart.h_rules.append((1.0 - a, f"nominal {1.0 - a:g}"))
        if cfg.rule_bounds is not None:
            for a in cfg.alphas:
                nb = n_bar_bc(a, cfg.rule_bounds)
                chart.v_rules.append((nb, f"n_bar = {nb:.6g}"))
    return chart


def _write(path: str, text: str) -> None:
    p = Path(path)
    if p.parent and not p.parent.exists():
        p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text)


def run_experiment(
    config_ref: str,
    csv_path: str | None = None,
    svg_path: str | None = None,
    reps: int | None = None,
    out=sys.stdout,
    err=sys.stderr,
) -> int:
    try:
        cfg = load_config(config_ref)
    except ConfigError as exc:
        print(f"error: {exc}", file=err)
        return 2
    if reps is not None:
        cfg.reps = reps
    csv_path = csv_path or cfg.csv_path or f"{cfg.experiment_id}.csv"
    svg_path = svg_path or cfg.svg_path
    for m in cfg.methods:
        if not any(m.feasible(n, a) for n in cfg.n_grid for a in cfg.alphas):
            print(f"error: method {m.method_id} is infeasible at every (n, alpha) of the grid", file=err)
            return 2
    reports = run_grid(cfg)
    try:
        _write(csv_path, format_csv(cfg.experiment_id, reports))
        if svg_path:
            _write(svg_path, build_chart(cfg, reports).render())
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=err)
        return 3
    print(f"wrote {len(reports)} rows to {csv_path}" + (f" and chart to {svg_path}" if svg_path else ""), file=out)
    return 0


# -- data analysis --------------------------------------------------------------


class DataError(ValueError):
    pass


def _read_columns(path: str) -> dict[str, list[str]]:
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path} is empty")
            cols: dict[str, list[str]] = {h.strip(): [] for h in header}
            names = [h.strip() for h in header]
            for line_no, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(names):
                    raise DataError(f"{path}:{line_no}: expected {len(names)} fields, got {len(row)}")
                for name, value in zip(names, row):
                    cols[name].append(value)
    except OSError as exc:
        raise DataError(str(exc)) from None
    if not cols or not next(iter(cols.values())):
        raise DataError(f"{path} has no data rows")
    return cols


def _numeric(cols: dict[str, list[str]], name: str) -> np.ndarray:
    if name not in cols:
        raise DataError(f"missing column {name!r} (available: {', '.join(cols)})")
    try:
        return np.array([float(v) for v in cols[name]])
    except ValueError as exc:
        raise DataError(f"column {name!r}: {exc}") from None


def build_pair(cols: dict[str, list[str]], num: str, den: str) -> PairedSample:
    """Numerator/denominator arrays; ``den`` is a column or ``indicator:COL>=w0``."""
    x = _numeric(cols, num)
    if den.startswith("indicator:"):
        rule = den[len("indicator:"):]
        if ">=" not in rule:
            raise DataError(f"bad indicator rule {den!r}; expected indicator:COL>=w0")
        col, thr = rule.split(">=", 1)
        try:
            w0 = float(thr)
        except ValueError:
            raise DataError(f"bad threshold in {den!r}") from None
        ind = (_numeric(cols, col.strip()) >= w0).astype(float)
        return PairedSample(x * ind, ind)
    return PairedSample(x, _numeric(cols, den))


@dataclass
class AnalysisReport:
    n: int
    theta_hat: float | None
    delta: Any = None
    bootstrap: Any = None
    n_bar: float | None = None

    @property
    def flagged(self) -> bool:
        return self.n_bar is not None and self.n_bar > self.n

    def lines(self, alpha: float) -> list[str]:
        if self.theta_hat is None:
            return [f"n = {self.n}", "estimate undefined: the denominator sums to zero"]
        level = f"{100 * (1 - alpha):g}%"
        out = [
            f"n = {self.n}",
            f"theta_hat = {self.theta_hat:.6g}",
            f"delta {level} CI = [{self.delta.interval.lo:.6g}, {self.delta.interval.hi:.6g}]",
        ]
        b = self.bootstrap.interval
        if b.defined:
            out.append(f"bootstrap {level} CI = [{b.lo:.6g}, {b.hi:.6g}] (dropped {self.bootstrap.dropped_reps})")
        else:
            out.append(f"bootstrap {level} CI = undefined (dropped {self.bootstrap.dropped_reps})")
        out.append(f"plug-in n_bar = {self.n_bar:.6g}")
        if self.flagged:
            out.append("delta method flagged unreliable: plug-in n_bar exceeds n")
        else:
            out.append("delta method not flagged: plug-in n_bar is at most n")
        return out


def analyze_sample(s: PairedSample, alpha: float, b_reps: int, seed: int = 0) -> AnalysisReport:
    theta = ratio_estimate(s)
    if theta is None:
        return AnalysisReport(s.n, None)
    return AnalysisReport(
        n=s.n,
        theta_hat=theta,
        delta=delta_ci(s, alpha),
        bootstrap=bootstrap_ci(s, alpha, BootstrapConfig(b_reps=b_reps, seed=seed)),
        n_bar=plug_in_n_bar(s, alpha),
    )


def analyze_csv(path: str, num: str, den: str, alpha: float = 0.05, b_reps: int = 2000, seed: int = 0) -> AnalysisReport:
    return analyze_sample(build_pair(_read_columns(path), num, den), alpha, b_reps, seed)


def wage_mimic(n: int = 204_246, seed: int = 2017) -> tuple[np.ndarray, np.ndarray]:
    """Synthetic monthly wages and a female indicator with a thin upper tail.

    The body is log-normal (90% quantile near 3000, 99% near 6000); the top
    percent is a Pareto tail tuned so that a few dozen wages exceed 20000.
    """
    rng = generator(seed)
    z = rng.standard_normal(n)
    wage = np.exp(7.148 + 0.667 * z)
    tail = rng.random(n) < 0.01
    u = 1.0 - rng.random(int(tail.sum()))
    wage[tail] = 6000.0 * u ** (-1.0 / 3.19)
    wage[~tail] = np.minimum(wage[~tail], 6000.0)
    p_female = np.where(wage < 3000, 0.5, np.where(wage < 10000, 0.35, 0.2))
    female = (rng.random(n) < p_female).astype(int)
    return np.round(wage, 2), female


# -- argument parsing -----------------------------------------------------------------


def _cmd_simulate(args) -> int:
    if args.list:
        print("\n".join(bundled_configs()))
        return 0
    if not args.config:
        print("error: simulate needs a config path or bundled config name", file=sys.stderr)
        return 2
    return run_experiment(args.config, args.csv, args.svg, args.reps)


def _cmd_analyze(args) -> int:
    try:
        report = analyze_csv(args.data, args.num, args.den, args.alpha, args.bootstrap_reps, args.seed)
    except (DataError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print("\n".join(report.lines(args.alpha)))
    return 0


def _cmd_diagnose(args) -> int:
    try:
        mb = MomentBounds(args.ly, 1.0 if args.ux is None else args.ux, args.uy)
        a_bar = alpha_bar_bc(args.n, mb)
        n_bar = n_bar_bc(args.alpha, mb)
        a_low = alpha_underline_bc(args.n, mb)
        br = critical_bracket(args.n, mb, ClassKind.BC)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"alpha_bar_n = {a_bar:.10g}")
    print(f"n_bar_alpha = {n_bar:.10g}")
    print(f"alpha_underline_n = {a_low:.10g}")
    print(f"critical level bracket: 1 - alpha_c in [{1 - br.alpha_upper:.10g}, {1 - br.alpha_lower:.10g}]")
    if args.ux is None:
        print("length lower bound = n/a (needs --ux)")
    else:
        lb = length_lower_bound(args.n, args.alpha, mb)
        print("length lower bound = " + ("n/a (outside its range)" if lb is None else f"{lb:.10g}"))
    print("nonasymptotic CI feasible" if args.alpha > a_bar else "nonasymptotic CI infeasible (alpha <= alpha_bar_n)")
    return 0


def _cmd_classify(args) -> int:
    try:
        v = classify_regime(RegimeInput(args.a, args.a_prime, args.b, args.b_prime, args.c1, args.c2))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"snr_class = {v.snr_class.value}")
    print(f"row = {v.row.value}")
    print(f"col = {v.col.value}")
    print(f"law_family = {v.law_family.value}")
    print(f"renorm_exponent = {v.renorm_exponent:.10g}")
    print(f"delta_method_ok = {str(v.delta_method_ok).lower()}")
    return 0


def _cmd_wage_mimic(args) -> int:
    wage, female = wage_mimic(args.n, args.seed)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["wage", "female"])
    w.writerows(zip((f"{v:.2f}" for v in wage), female.tolist()))
    try:
        _write(args.out, buf.getvalue())
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    print(f"wrote {args.n} rows to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratioci", description="Confidence intervals for ratios of expectations.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a coverage experiment config")
    s.add_argument("config", nargs="?", help="config path or bundled config name")
    s.add_argument("--csv", help="override the CSV output path")
    s.add_argument("--svg", help="override the SVG output path")
    s.add_argument("--reps", type=int, help="override the number of repetitions")
    s.add_argument("--list", action="store_true", help="list bundled configs")
    s.set_defaults(func=_cmd_simulate)

    a = sub.add_parser("analyze", help="estimate a ratio and its CIs from a CSV file")
    a.add_argument("data")
    a.add_argument("--num", required=True, help="numerator column")
    a.add_argument("--den", required=True, help="denominator column or indicator:COL>=w0")
    a.add_argument("--alpha", type=float, default=0.05)
    a.add_argument("--bootstrap-reps", type=int, default=2000)
    a.add_argument("--seed", type=int, default=0)
    a.set_defaults(func=_cmd_analyze)

    d = sub.add_parser("diagnose", help="feasibility and impossibility thresholds of the moment class")
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--ly", type=float, required=True)
    d.add_argument("--uy", type=float, required=True)
    d.add_argument("--ux", type=float)
    d.set_defaults(func=_cmd_diagnose)

    c = sub.add_parser("classify", help="asymptotic regime of power-law moment sequences")
    c.add_argument("--a", required=True)
    c.add_argument("--a-prime", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--b-prime", required=True)
    c.add_argument("--c1", type=float, default=1.0)
    c.add_argument("--c2", type=float, default=1.0)
    c.set_defaults(func=_cmd_classify)

    w = sub.add_parser("wage-mimic", help="write a synthetic wage/female CSV")
    w.add_argument("--out", required=True)
    w.add_argument("--n", type=int, default=204_246)
    w.add_argument("--seed", type=int, default=2017)
    w.set_defaults(func=_cmd_wage_mimic)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
