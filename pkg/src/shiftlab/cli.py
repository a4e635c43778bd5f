"""Command-line front end.

Subcommands: ``analyze`` runs all checkers on a configured operator and
writes a JSON report; ``catalog`` verifies the built-in operators against
their expected verdicts; ``simulate`` writes a trajectory CSV plus
per-grade convergence classes.

Configs are INI-style files with [space], [weights], [shift] and optional
[budget] and [expect] sections; table-backed sequences come from two-column
text files (index, value) with consecutive indices from 0.  Exit codes:
0 ok, 1 config or usage error, 2 contradiction with declared expectations.
JSON output is deterministic: sorted keys, shortest round-trip floats.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .catalog import catalog_entries, entry_by_name, verify_entry
from .checkers import Outcome, TruncationBudget, full_report
from .shifts import ShiftKind, ShiftOperatorSpec
from .simulator import classify, export_csv, run_trajectory
from .spaces import (
    ExponentSequence,
    FiniteVector,
    KoetheMatrix,
    PNorm,
    ShiftLabError,
    SpaceSpec,
    WeightSequence,
    basis_vector,
    make_power_series_space,
)


class ConfigError(ShiftLabError):
    pass


def _load_table(path: str) -> list[float]:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"table file not found: {path}")
    values: list[float] = []
    with open(p) as fh:
        for line_no, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ConfigError(f"{path}:{line_no}: expected two columns (index, value)")
            idx, val = parts
            try:
                idx_i = int(idx)
                val_f = float(val)
            except ValueError as exc:
                raise ConfigError(f"{path}:{line_no}: {exc}") from exc
            if idx_i != len(values):
                raise ConfigError(
                    f"{path}:{line_no}: indices must increase consecutively from 0, got {idx_i}"
                )
            values.append(val_f)
    if not values:
        raise ConfigError(f"table file {path} is empty")
    return values


@dataclass
class RunConfig:
    """Parsed operator configuration."""

    space: SpaceSpec
    weights: WeightSequence
    kind: ShiftKind
    budget: TruncationBudget
    expectations: dict[str, Outcome] = field(default_factory=dict)
    description: dict = field(default_factory=dict)

    def operator(self) -> ShiftOperatorSpec:
        return ShiftOperatorSpec(self.kind, self.weights, self.space)


def _parse_alpha(section: configparser.SectionProxy, config_dir: Path) -> ExponentSequence:
    table = section.get("alpha_table")
    if table:
        path = str((config_dir / table).resolve()) if not os.path.isabs(table) else table
        return ExponentSequence.from_table(_load_table(path), name=f"table:{table}")
    family = section.get("alpha", "linear").strip()
    theta = section.getfloat("theta", fallback=None)
    return ExponentSequence.builtin(family, theta)


def _parse_space(cfg: configparser.ConfigParser, config_dir: Path) -> SpaceSpec:
    if not cfg.has_section("space"):
        raise ConfigError("config needs a [space] section")
    section = cfg["space"]
    family = section.get("family", "power-series").strip()
    p = PNorm.parse(section.get("p", "1"))
    if family == "power-series":
        type_ = section.get("type", "infinite").strip()
        if type_ not in ("finite", "infinite"):
            raise ConfigError(f"space type must be finite or infinite, got '{type_}'")
        alpha = _parse_alpha(section, config_dir)
        return make_power_series_space(alpha, type_, p)
    if family == "koethe-custom":
        matrix_name = section.get("matrix", "power").strip()
        if matrix_name == "power":
            matrix = KoetheMatrix.power_matrix()
        elif matrix_name == "constant":
            matrix = KoetheMatrix.constant_matrix()
        else:
            raise ConfigError(f"unknown custom matrix '{matrix_name}' (use power or constant)")
        matrix.validate_sample()
        return SpaceSpec(matrix=matrix, p=p)
    raise ConfigError(f"unknown space family '{family}'")


def _parse_weights(
    cfg: configparser.ConfigParser, space: SpaceSpec, config_dir: Path
) -> WeightSequence:
    if not cfg.has_section("weights"):
        raise ConfigError("config needs a [weights] section")
    section = cfg["weights"]
    family = section.get("family", "constant").strip()
    parameter = section.getfloat("parameter", fallback=None)
    if family == "constant":
        return WeightSequence.constant(1.0 if parameter is None else parameter)
    if family == "polynomial":
        return WeightSequence.polynomial(1.0 if parameter is None else parameter)
    if family == "exp-alpha":
        if space.power_series is None:
            raise ConfigError("exp-alpha weights need a power-series space (they use its exponents)")
        gamma = 1.0 if parameter is None else parameter
        return WeightSequence.exp_of_alpha(gamma, space.power_series.alpha)
    if family == "reciprocal-factorial":
        return WeightSequence.reciprocal_factorial()
    if family == "sqrt-shifted":
        return WeightSequence.sqrt_shifted()
    if family == "sqrt":
        return WeightSequence.sqrt()
    if family == "table":
        table = section.get("table")
        if not table:
            raise ConfigError("weight family 'table' needs a table = PATH entry")
        path = str((config_dir / table).resolve()) if not os.path.isabs(table) else table
        return WeightSequence.from_table(_load_table(path), name=f"table:{table}")
    raise ConfigError(f"unknown weight family '{family}'")


def _parse_budget(cfg: configparser.ConfigParser) -> TruncationBudget:
    defaults = TruncationBudget()
    if not cfg.has_section("budget"):
        return defaults
    section = cfg["budget"]
    return TruncationBudget(
        n_max=section.getint("n_max", defaults.n_max),
        m_max=section.getint("m_max", defaults.m_max),
        k_max=section.getint("k_max", defaults.k_max),
        l_max=section.getint("l_max", defaults.l_max),
        growth_tol=section.getfloat("growth_tol", defaults.growth_tol),
        stability_tol=section.getfloat("stability_tol", defaults.stability_tol),
    )


def _parse_expectations(cfg: configparser.ConfigParser) -> dict[str, Outcome]:
    if not cfg.has_section("expect"):
        return {}
    out: dict[str, Outcome] = {}
    for key, value in cfg["expect"].items():
        try:
            out[key] = Outcome(value.strip())
        except ValueError as exc:
            raise ConfigError(f"[expect] {key}: unknown outcome '{value}'") from exc
    return out


def load_config(path: str) -> RunConfig:
    p = Path(path)
    if not p.exists():
        raise ConfigError(f"config file not found: {path}")
    cfg = configparser.ConfigParser()
    try:
        cfg.read(p)
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    config_dir = p.resolve().parent
    space = _parse_space(cfg, config_dir)
    weights = _parse_weights(cfg, space, config_dir)
    if not cfg.has_section("shift"):
        raise ConfigError("config needs a [shift] section")
    kind_text = cfg["shift"].get("kind", "backward").strip()
    try:
        kind = ShiftKind(kind_text)
    except ValueError as exc:
        raise ConfigError(f"shift kind must be backward or forward, got '{kind_text}'") from exc
    description = {
        "space": dict(cfg["space"]),
        "weights": dict(cfg["weights"]),
        "shift": dict(cfg["shift"]),
    }
    return RunConfig(
        space=space,
        weights=weights,
        kind=kind,
        budget=_parse_budget(cfg),
        expectations=_parse_expectations(cfg),
        description=description,
    )


def parse_x0(spec: str) -> FiniteVector:
    """Grammar: "e:R" for a basis vector, or "i:coef,i:coef,..."."""
    spec = spec.strip()
    if spec.startswith("e:"):
        try:
            return basis_vector(int(spec[2:]))
        except ValueError as exc:
            raise ConfigError(f"bad basis index in x0 spec '{spec}'") from exc
    entries: dict[int, float] = {}
    for item in spec.split(","):
        item = item.strip()
        if not item:
            continue
        if ":" not in item:
            raise ConfigError(f"bad x0 component '{item}' (expected INDEX:COEFFICIENT)")
        idx, coef = item.split(":", 1)
        try:
            entries[int(idx)] = float(coef)
        except ValueError as exc:
            raise ConfigError(f"bad x0 component '{item}'") from exc
    if not entries:
        raise ConfigError(f"empty x0 spec '{spec}'")
    coeff = np.zeros(max(entries) + 1)
    for i, c in entries.items():
        if i < 0:
            raise ConfigError("x0 indices must be nonnegative")
        coeff[i] = c
    return FiniteVector(coeff)


def _dump_json(payload: dict, out: str | None) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2)
    if out:
        Path(out).write_text(text + "\n")
    else:
        print(text)


def _thread_count() -> int:
    raw = os.environ.get("SHIFTLAB_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def cmd_analyze(config_path: str, out: str | None = None) -> int:
    config = load_config(config_path)
    report = full_report(config.operator(), config.budget)
    payload = {
        "config": config.description,
        "report": report.to_json_dict(),
    }
    contradictions = []
    for prop, expected in sorted(config.expectations.items()):
        verdicts = report.verdicts()
        if prop not in verdicts:
            raise ConfigError(f"[expect] references unknown property '{prop}'")
        got = verdicts[prop].outcome
        if got is not Outcome.INCONCLUSIVE and got is not expected:
            contradictions.append(f"{prop}: expected {expected.value}, got {got.value}")
    payload["expectation_contradictions"] = contradictions
    _dump_json(payload, out)
    return 2 if contradictions else 0


def cmd_catalog(
    entry: str | None = None,
    budget_scale: float = 1.0,
    out: str | None = None,
) -> int:
    budget = TruncationBudget().scaled(budget_scale)
    entries = [entry_by_name(entry)] if entry else catalog_entries()
    workers = _thread_count()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            comparisons = list(pool.map(lambda e: verify_entry(e, budget), entries))
    else:
        comparisons = [verify_entry(e, budget) for e in entries]
    rows = []
    any_contradiction = False
    for comp in comparisons:
        verdicts = comp.report.verdicts()
        rows.append(
            [comp.entry.name]
            + [verdicts[p].outcome.value for p in (
                "continuity", "topologizability", "power_boundedness",
                "cesaro_boundedness", "mean_ergodicity",
            )]
            + ["ok" if comp.ok else "CONTRADICTION"]
        )
        any_contradiction = any_contradiction or not comp.ok
    header = ["entry", "continuity", "topologizable", "power_bounded", "cesaro_bounded",
              "mean_ergodic", "status"]
    widths = [max(len(str(r[i])) for r in [header] + rows) for i in range(len(header))]
    for row in [header] + rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(row, widths)))
    payload = {
        "budget": budget.to_json_dict(),
        "entries": [comp.to_json_dict() for comp in comparisons],
        "contradictions": any_contradiction,
    }
    if out:
        _dump_json(payload, out)
    return 2 if any_contradiction else 0


def cmd_simulate(
    config_path: str,
    x0_spec: str,
    n_max: int,
    out: str | None = None,
) -> int:
    config = load_config(config_path)
    x0 = parse_x0(x0_spec)
    op = config.operator()
    k_list = list(range(min(3, config.budget.k_max) + 1))
    traj = run_trajectory(op, x0, k_list, n_max)
    if out:
        export_csv(traj, out)
    classes = classify(traj)
    for k in k_list:
        cp = classes[k]["cesaro"]
        pp = classes[k]["power_over_n"]
        print(
            f"k={k}  cesaro: {cp.kind.value} (rate {cp.rate:.4g})  "
            f"power/n: {pp.kind.value} (rate {pp.rate:.4g})"
        )
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="shiftlab",
        description="numerical verdicts for weighted shift dynamics on graded sequence spaces",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="run all checkers on a configured operator")
    p_analyze.add_argument("--config", required=True)
    p_analyze.add_argument("--out", default=None, help="write the JSON report here")

    p_catalog = sub.add_parser("catalog", help="verify the built-in operator catalog")
    p_catalog.add_argument("--entry", default=None, help="verify a single entry by name")
    p_catalog.add_argument("--budget-scale", type=float, default=1.0)
    p_catalog.add_argument("--out", default=None, help="write the JSON summary here")

    p_sim = sub.add_parser("simulate", help="run a trajectory and classify it")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--x0", required=True, help='initial vector: "e:R" or "i:coef,..."')
    p_sim.add_argument("--n-max", type=int, required=True)
    p_sim.add_argument("--out", default=None, help="write the trajectory CSV here")

    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return cmd_analyze(args.config, args.out)
        if args.command == "catalog":
            if args.entry is not None:
                entry_by_name(args.entry)
            return cmd_catalog(args.entry, args.budget_scale, args.out)
        if args.command == "simulate":
            return cmd_simulate(args.config, args.x0, args.n_max, args.out)
    except (ConfigError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ShiftLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
