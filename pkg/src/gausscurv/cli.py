"""Command-line front end: seeded shape generation, batch runs, reports.

Every command writes a JSON report; scan-style commands additionally write a
CSV table with columns ``r, predicted, measured, relative_error``.  Reports
are byte-reproducible for a fixed configuration apart from the wall-time
field.  Exit statuses: 0 all checks passed, 1 some check failed, 2 usage
error, 3 bad configuration value, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import body as bd
from . import experiments as ex
from . import plane, sphere
from .errors import ConfigError, GausscurvError
from .weights import make_gaussian_weight, make_weight, radial_moments

__all__ = [
    "RunConfig",
    "RunReport",
    "parse_config",
    "generate_convex_polar",
    "generate_star_polar",
    "run",
    "main",
    "weight_preset",
    "WEIGHT_PRESETS",
]

COMMANDS = (
    "verify2d",
    "bounds2d",
    "stability2d",
    "counterexample",
    "second-variation",
    "threshold-scan",
    "calibration",
    "moments",
)

SCAN_COMMANDS = {"counterexample", "threshold-scan", "stability2d", "second-variation"}


def weight_preset(name: str):
    if name == "gaussian":
        return make_gaussian_weight()
    if name == "inverse-quadratic":
        return make_weight(lambda r: 1.0 / (1.0 + r * r), lambda r: -2.0 * r / (1.0 + r * r) ** 2)
    if name == "exponential":
        return make_weight(lambda r: np.exp(-r), lambda r: -np.exp(-r))
    raise ConfigError(f"unknown weight preset {name!r}")


WEIGHT_PRESETS = ("gaussian", "inverse-quadratic", "exponential")


@dataclass
class RunConfig:
    command: str
    seed: int = 42
    trials: int = 1000
    n: int = 3
    r: float | None = None
    k: int = 2
    epsilon: float = 1e-3
    amplitude: float = 0.1
    weight: str = "gaussian"
    slack: float = 1e-8
    cap_height: float = 40.0
    r_min: float = 0.01
    r_max: float = 0.25
    points: int = 100
    h_min: int = 4
    h_max: int = 64
    output: str = ""

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must fit in 64 bits")
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if not 2 <= self.n <= sphere.MAX_DIMENSION:
            raise ConfigError(f"dimension must be in 2..{sphere.MAX_DIMENSION}")
        if self.command in ("second-variation", "threshold-scan", "calibration") and self.n < 3:
            raise ConfigError("this command needs dimension at least 3")
        if self.r is not None and self.r <= 0:
            raise ConfigError("radius must be positive")
        if self.k < 2 or self.k % 2:
            raise ConfigError("mode must be even and at least 2")
        if not 4.0 * ex.EPSILON_FLOOR <= self.epsilon <= ex.EPSILON_CAP:
            raise ConfigError("epsilon out of the supported range")
        if not 0.0 < self.amplitude <= 0.3:
            raise ConfigError("amplitude must lie in (0, 0.3]")
        if self.weight != "all" and self.weight not in WEIGHT_PRESETS:
            raise ConfigError(f"weight must be one of {WEIGHT_PRESETS} or 'all'")
        if self.slack <= 0:
            raise ConfigError("slack must be positive")
        if self.cap_height <= 0:
            raise ConfigError("cap height must be positive")
        if not 0 < self.r_min < self.r_max:
            raise ConfigError("need 0 < r-min < r-max")
        if self.points < 1:
            raise ConfigError("points must be at least 1")
        if not 1 <= self.h_min < self.h_max:
            raise ConfigError("need 1 <= h-min < h-max")
        if not self.output:
            self.output = f"report-{self.command}"
        return self

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class RunReport:
    config: dict
    entries: list
    summary: dict
    wall_time_s: float = 0.0
    csv_rows: list = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return self.summary.get("passed") == self.summary.get("total")

    def to_dict(self) -> dict:
        return {
            "config": self.config,
            "entries": self.entries,
            "summary": self.summary,
            "wall_time_s": self.wall_time_s,
        }


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    # Counter-based keying: every trial owns an independent Philox stream.
    key = np.array([seed, trial], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _random_polar_coeffs(rng: np.random.Generator, amplitude: float, degree: int, decay: float = 3.0):
    k = np.arange(1, degree + 1)
    scale = amplitude / k.astype(float) ** decay
    cos_c = np.concatenate([[1.0], rng.uniform(-1.0, 1.0, degree) * scale])
    sin_c = rng.uniform(-1.0, 1.0, degree) * scale
    return cos_c, sin_c


def generate_convex_polar(seed: int, amplitude: float, trial: int = 0, degree: int = 12) -> plane.PolarCurve:
    """Deterministic random convex curve near the unit circle.

    Coefficients decay like 1/k^3 and candidates are rejection-sampled on the
    convexity certificate; at amplitude 0.1 well over half are accepted.

    Raises
    ------
    GausscurvError
        After 1000 consecutive rejections.
    """
    if not 0.0 < amplitude <= 0.3:
        raise ValueError("amplitude must lie in (0, 0.3]")
    rng = _trial_rng(seed, trial)
    for _ in range(1000):
        cos_c, sin_c = _random_polar_coeffs(rng, amplitude, degree)
        curve = plane.PolarCurve(cos_c, sin_c)
        if curve.is_convex():
            return curve
    raise GausscurvError("convex curve generator exceeded 1000 rejections")


def generate_star_polar(seed: int, amplitude: float, trial: int = 0, degree: int = 12) -> plane.PolarCurve:
    """Deterministic random star-shaped (possibly non-convex) curve.

    Coefficients decay like 1/k^2, slowly enough that higher amplitudes
    routinely produce non-convex boundaries; only positivity is enforced.
    """
    if not 0.0 < amplitude <= 0.3:
        raise ValueError("amplitude must lie in (0, 0.3]")
    rng = _trial_rng(seed, trial)
    for _ in range(1000):
        cos_c, sin_c = _random_polar_coeffs(rng, amplitude, degree, decay=2.0)
        try:
            curve = plane.PolarCurve(cos_c, sin_c)
        except ValueError:
            continue
        if curve.min_radius >= plane.ORIGIN_CLEARANCE:
            return curve
    raise GausscurvError("star-shaped curve generator exceeded 1000 rejections")


def _report_dict(rep: plane.InequalityReport) -> dict:
    return {
        "lhs": rep.lhs,
        "rhs": rep.rhs,
        "margin": rep.margin,
        "quad_error": rep.quad_error,
        "passed": rep.passed,
    }


def _thread_count() -> int:
    raw = os.environ.get("GAUSSCURV_THREADS", "1")
    try:
        value = int(raw)
    except ValueError:
        raise ConfigError(f"GAUSSCURV_THREADS must be an integer, got {raw!r}")
    if value == 0:
        return min(os.cpu_count() or 1, 8)
    return max(value, 1)


def _map_trials(fn, count: int, seed: int | None = None):
    """Run trials in index order; failures carry the trial's stream key."""

    def wrapped(i):
        try:
            return fn(i)
        except GausscurvError as exc:
            raise type(exc)(f"trial {i} (seed {seed}): {exc}") from exc

    workers = _thread_count()
    if workers == 1:
        return [wrapped(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(wrapped, range(count)))


def _weights_for(config: RunConfig):
    names = WEIGHT_PRESETS if config.weight == "all" else (config.weight,)
    return [(name, weight_preset(name)) for name in names]


def _run_verify2d(config: RunConfig):
    pairs = _weights_for(config)

    def one(trial: int) -> dict:
        curve = generate_convex_polar(config.seed, config.amplitude, trial)
        entry = {"trial": trial, "weights": {}}
        ok = True
        for name, wp in pairs:
            two = plane.verify_two_sided(curve, wp)
            entry["weights"][name] = {
                "lower": _report_dict(two.lower),
                "upper": _report_dict(two.upper),
            }
            ok = ok and two.lower.margin >= -config.slack and two.upper.margin >= -config.slack
        entry["passed"] = ok
        return entry

    entries = _map_trials(one, config.trials, config.seed)
    margins = [
        rep[key]["margin"]
        for e in entries
        for rep in e["weights"].values()
        for key in ("lower", "upper")
    ]
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": min(margins),
        "max_relative_error": None,
    }
    return entries, summary, None


def _run_bounds2d(config: RunConfig):
    pairs = _weights_for(config)

    def one(trial: int) -> dict:
        curve = generate_star_polar(config.seed, config.amplitude, trial)
        entry = {"trial": trial, "weights": {}}
        ok = True
        for name, wp in pairs:
            rep = plane.boundary_inverse_weight(curve, wp)
            entry["weights"][name] = _report_dict(rep)
            ok = ok and rep.margin >= -config.slack
        entry["passed"] = ok
        return entry

    entries = _map_trials(one, config.trials, config.seed)
    margins = [w["margin"] for e in entries for w in e["weights"].values()]
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": min(margins),
        "max_relative_error": None,
    }
    return entries, summary, None


def _stability_families(h_values):
    ellipses = [plane.PolarCurve.ellipse(1.0 + 1.0 / h, 1.0) for h in h_values]
    bumps = [
        plane.PolarCurve(np.array([1.0, 0.0, 1.0 / h]), np.zeros(2)) for h in h_values
    ]
    return {"ellipse": ellipses, "fourier-bump": bumps}


def _run_stability2d(config: RunConfig):
    wp = weight_preset(config.weight if config.weight != "all" else "gaussian")
    r = config.r if config.r is not None else 1.0
    h_values = list(range(config.h_min, config.h_max + 1))
    entries = []
    rows = []
    passed = 0
    total = 0
    for name, family in _stability_families(h_values).items():
        ratios = plane.stability_ratio(family, wp, r)
        tail = ratios[len(ratios) // 2 :]
        bounded = max(tail) <= 10.0 * min(tail) and all(math.isfinite(x) for x in ratios)
        entries.append(
            {
                "family": name,
                "h": h_values,
                "ratios": ratios,
                "tail_spread": max(tail) / min(tail),
                "passed": bounded,
            }
        )
        rows.extend(
            {"r": float(h), "predicted": ratios[-1], "measured": ratio, "relative_error": abs(ratio - ratios[-1]) / max(abs(ratios[-1]), 1e-300)}
            for h, ratio in zip(h_values, ratios)
        )
        passed += bounded
        total += 1
    summary = {
        "passed": passed,
        "total": total,
        "worst_margin": None,
        "max_relative_error": max(e["tail_spread"] for e in entries),
    }
    return entries, summary, rows


def _run_counterexample(config: RunConfig):
    if config.r is not None:
        r_values = [config.r]
    else:
        r_values = list(np.linspace(config.r_min, config.r_max, config.points))
    entries = []
    rows = []
    for r in r_values:
        gap = ex.counterexample_gap(r)
        s = ex.matched_cylinder_radius(r)
        capped = ex.capped_cylinder(ex.CylinderSpec(s=s, half_height=config.cap_height))
        r_prime = bd.ball_match_radius(3, capped.volume)
        capped_gap = capped.energy - bd.ball_energy(3, r_prime)
        ok = gap > 1.0 and capped_gap > 0.0
        entries.append(
            {
                "r": float(r),
                "s": s,
                "gap": gap,
                "capped_volume": capped.volume,
                "capped_energy": capped.energy,
                "capped_matched_radius": r_prime,
                "capped_gap": capped_gap,
                "passed": ok,
            }
        )
        rows.append(
            {
                "r": float(r),
                "predicted": 1.0,
                "measured": gap,
                "relative_error": abs(gap - 1.0),
            }
        )
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": min(e["gap"] - 1.0 for e in entries),
        "max_relative_error": None,
    }
    return entries, summary, rows


def _run_second_variation(config: RunConfig):
    r = config.r if config.r is not None else 1.0
    rep = ex.measure_second_variation(config.n, r, config.k, config.epsilon)
    entries = [
        {
            "n": rep.n,
            "r": rep.r,
            "k": rep.k,
            "epsilon": rep.epsilon,
            "measured_gap": rep.measured_gap,
            "predicted_quadratic": rep.predicted_quadratic,
            "relative_error": rep.relative_error,
            "measured_coefficient": rep.measured_coefficient,
            "raw_gaps": list(rep.raw_gaps),
            "passed": rep.relative_error <= 0.05,
        }
    ]
    rows = [
        {
            "r": rep.r,
            "predicted": rep.predicted_quadratic,
            "measured": rep.measured_gap,
            "relative_error": rep.relative_error,
        }
    ]
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": None,
        "max_relative_error": rep.relative_error,
    }
    return entries, summary, rows


def _run_threshold_scan(config: RunConfig):
    measured = ex.threshold_scan(config.n, config.k, config.epsilon)
    algebraic = ex.algebraic_threshold(config.n, config.k)
    stated = ex.statement_threshold(config.n)
    err = abs(measured - algebraic)
    entries = [
        {
            "n": config.n,
            "k": config.k,
            "measured_r_squared": measured,
            "algebraic_r_squared": algebraic,
            "statement_candidate_r_squared": stated,
            "abs_error": err,
            "passed": err <= 1e-3,
        }
    ]
    rows = [
        {
            "r": math.sqrt(measured),
            "predicted": algebraic,
            "measured": measured,
            "relative_error": err / max(algebraic, 1e-300),
        }
    ]
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": None,
        "max_relative_error": err,
    }
    return entries, summary, rows


def random_even_body(seed: int, trial: int, n: int, radius: float, amplitude: float, degree: int = 6) -> bd.RadialGraph:
    """Seeded even (origin-symmetric) perturbation of the ball of given radius."""
    rng = _trial_rng(seed, trial)
    if n == 3:
        u0 = sphere.HarmonicField.zero(n, degree)
        coeffs = u0.coeffs.copy()
        for k in range(2, degree + 1, 2):
            block = slice(k * k, (k + 1) * (k + 1))
            coeffs[block] = rng.normal(size=2 * k + 1) / k**3
    else:
        coeffs = np.zeros(degree + 1)
        for k in range(2, degree + 1, 2):
            coeffs[k] = rng.normal() / k**3
    norm = np.linalg.norm(coeffs)
    coeffs *= amplitude / norm
    u = sphere.HarmonicField(n=n, degree=degree, coeffs=coeffs)
    return bd.RadialGraph(n, radius, u)


def _run_calibration(config: RunConfig):
    r = config.r if config.r is not None else 3.0
    amp = min(config.epsilon * 10.0, 1e-2)

    def one(trial: int) -> dict:
        graph = random_even_body(config.seed, trial, config.n, r, amp)
        M = float(np.max(bd.mean_curvature_at_nodes(graph)))
        res = ex.calibration_check(graph, M)
        ok = (
            res.hypothesis_ok
            and res.ineq1.margin >= -config.slack
            and res.ineq3.margin >= -config.slack
        )
        return {
            "trial": trial,
            "hypothesis_ok": res.hypothesis_ok,
            "gate_curvature": res.gate_curvature,
            "gate_inscribed_stated": res.gate_inscribed_stated,
            "gate_inscribed_used": res.gate_inscribed_used,
            "volume": res.volume,
            "matched_radius": res.matched_radius,
            "ineq1": _report_dict(res.ineq1),
            "ineq3": _report_dict(res.ineq3),
            "passed": ok,
        }

    entries = _map_trials(one, config.trials, config.seed)
    margins = [e[k]["margin"] for e in entries for k in ("ineq1", "ineq3")]
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": min(margins),
        "max_relative_error": None,
    }
    return entries, summary, None


def _run_moments(config: RunConfig):
    dims = [config.n] if config.n != 3 or config.r is not None else list(range(2, 9))
    radii = [config.r] if config.r is not None else [0.1, 0.5, 1.0, 2.0, 4.0]
    entries = []
    for n in dims:
        for r in radii:
            m = radial_moments(n, r)
            e = math.exp(-0.5 * r * r)
            res_b = abs(m.b_n - (n * m.a_n - e) / r**2)
            res_c = abs(m.c_n - ((n * (n + 2) * m.a_n - (n + 2) * e) / r**4 - e / r**2))
            entries.append(
                {
                    "n": n,
                    "r": r,
                    "a_n": m.a_n,
                    "b_n": m.b_n,
                    "c_n": m.c_n,
                    "residual_b": res_b,
                    "residual_c": res_c,
                    "passed": max(res_b, res_c) < 1e-10,
                }
            )
    summary = {
        "passed": sum(e["passed"] for e in entries),
        "total": len(entries),
        "worst_margin": -max(max(e["residual_b"], e["residual_c"]) for e in entries),
        "max_relative_error": None,
    }
    return entries, summary, None


_RUNNERS = {
    "verify2d": _run_verify2d,
    "bounds2d": _run_bounds2d,
    "stability2d": _run_stability2d,
    "counterexample": _run_counterexample,
    "second-variation": _run_second_variation,
    "threshold-scan": _run_threshold_scan,
    "calibration": _run_calibration,
    "moments": _run_moments,
}


def run(config: RunConfig) -> RunReport:
    """Execute one command, write the JSON (and CSV) outputs, return the report."""
    config.validate()
    start = time.perf_counter()
    entries, summary, rows = _RUNNERS[config.command](config)
    report = RunReport(
        config=config.to_dict(),
        entries=entries,
        summary=summary,
        wall_time_s=time.perf_counter() - start,
        csv_rows=rows or [],
    )
    with open(config.output + ".json", "w") as fh:
        json.dump(report.to_dict(), fh, sort_keys=True, indent=1)
        fh.write("\n")
    if config.command in SCAN_COMMANDS and rows:
        with open(config.output + ".csv", "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["r", "predicted", "measured", "relative_error"])
            writer.writeheader()
            writer.writerows(rows)
    return report


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gausscurv",
        description="Verify weighted curvature-energy inequalities and ball stability thresholds.",
    )
    parser.add_argument("--config", help="key = value file supplying any flag, including the command")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("--trials", type=int, default=1000)
        p.add_argument("--n", type=int, default=3)
        p.add_argument("--r", type=float, default=None)
        p.add_argument("--k", type=int, default=2)
        p.add_argument("--epsilon", type=float, default=1e-3)
        p.add_argument("--amplitude", type=float, default=0.1)
        p.add_argument("--weight", default="gaussian", help="gaussian, inverse-quadratic, exponential, or all")
        p.add_argument("--slack", type=float, default=1e-8)
        p.add_argument("--cap-height", dest="cap_height", type=float, default=40.0)
        p.add_argument("--r-min", dest="r_min", type=float, default=0.01)
        p.add_argument("--r-max", dest="r_max", type=float, default=0.25)
        p.add_argument("--points", type=int, default=100)
        p.add_argument("--h-min", dest="h_min", type=int, default=4)
        p.add_argument("--h-max", dest="h_max", type=int, default=64)
        p.add_argument("--output", default="")
    return parser


def _argv_from_file(path: str) -> list:
    argv = []
    command = None
    try:
        with open(path) as fh:
            for raw in fh:
                line = raw.split("#", 1)[0].strip()
                if not line:
                    continue
                if "=" not in line:
                    raise ConfigError(f"config line is not 'key = value': {raw.rstrip()!r}")
                key, value = (part.strip() for part in line.split("=", 1))
                if key == "command":
                    command = value
                else:
                    argv.extend([f"--{key.replace('_', '-')}", value])
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}")
    if command is None:
        raise ConfigError("config file must set 'command'")
    return [command] + argv


def parse_config(argv) -> RunConfig:
    """Parse flags or a config file into a validated :class:`RunConfig`.

    Raises
    ------
    ConfigError
        For malformed config files or out-of-range values.
    SystemExit
        With status 2, for unknown flags or commands (argparse usage errors).
    """
    argv = list(argv)
    if argv[:1] == ["--config"]:
        if len(argv) < 2:
            raise ConfigError("--config needs a file path")
        argv = _argv_from_file(argv[1]) + argv[2:]
    parser = _build_parser()
    ns = parser.parse_args(argv)
    if ns.command is None:
        parser.error("a command is required")
    kwargs = {k: v for k, v in vars(ns).items() if k not in ("config",) and v is not None}
    try:
        return RunConfig(**kwargs).validate()
    except TypeError as exc:
        raise ConfigError(str(exc))


def main(argv=None) -> int:
    try:
        config = parse_config(sys.argv[1:] if argv is None else argv)
    except ConfigError as exc:
        print(f"gausscurv: configuration error: {exc}", file=sys.stderr)
        return 3
    try:
        report = run(config)
    except GausscurvError as exc:
        print(f"gausscurv: numerical failure: {exc}", file=sys.stderr)
        return 4
    summary = report.summary
    print(
        f"{config.command}: {summary['passed']}/{summary['total']} passed "
        f"in {report.wall_time_s:.2f}s -> {config.output}.json"
    )
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
