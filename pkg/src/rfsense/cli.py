"""Command-line front end: ``rf-sense report | figure | validate``.

Exit codes: 0 success, 1 validation failure, 2 configuration error,
3 unstable model.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from . import closed_form as cf
from .figures import DEFAULT_POINTS, FIGURES, make_figure
from .measurement import PERTURBATION_MODES, snr_matrix
from .model import ConfigurationError, DomainError, PreconditionError, SystemParams, Topology, check_params
from .optimize import apply_gamma2_rule, source_revision
from .scattering import SingularModelError, UnstableModelError
from .tables import Table, to_csv, write_csv

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_CONFIG = 2
EXIT_UNSTABLE = 3

SPEC_VERSION = 1

# key -> documentation (units); the schema of a scenario file
SCHEMA = {
    "spec_version": "schema version, must be 1",
    "topology": "FourMode | ThreeModeHigh | ThreeModeLow",
    "omega_lc": "rf resonance frequency (rad/s)",
    "gamma_lc": "rf damping rate (rad/s)",
    "omega_1": "lower mechanical frequency (rad/s)",
    "omega_2": "upper mechanical frequency (rad/s)",
    "gamma_m": "mechanical damping rate, both modes (rad/s)",
    "gamma_m1": "damping of mechanical mode 1 (rad/s)",
    "gamma_m2": "damping of mechanical mode 2 (rad/s)",
    "kappa": "optical half-linewidth (rad/s)",
    "delta": "two-tone detuning (rad/s)",
    "phi": "loop phase (rad)",
    "temperature": "bath temperature (K)",
    "gamma1": "optical cooperativity",
    "gamma2": "electrical cooperativity: number, 'w_opt' or 'matched'",
    "eta": "detection efficiency in (0, 1]",
    "zeta": "detection-noise coefficient (1/K); eta = 1/(1 + zeta*T)",
    "epsilon": "relative capacitance change",
    "beta": "rf drive amplitude: number or [re, im] (sqrt(quanta/s))",
    "tau": "detection time (s)",
    "bare_couplings": "object with any of g0_11, g0_12, g0_21, g0_22 (rad/s)",
    "g0_11": "bare optomechanical coupling, mode 1 (rad/s)",
    "g0_12": "bare optomechanical coupling, mode 2 (rad/s)",
    "g0_21": "bare electromechanical coupling, mode 1 (rad/s)",
    "g0_22": "bare electromechanical coupling, mode 2 (rad/s)",
    "perturbation_mode": "dominant | full",
}

BARE_KEYS = ("g0_11", "g0_12", "g0_21", "g0_22")

REPORT_COLUMNS = [
    "u", "w", "xi", "rho", "sigma", "w_opt", "snr_per_unit", "snr0_per_unit",
    "r", "r_max", "r_im", "s22_abs", "sx_out", "stability_margin",
]


@dataclass(frozen=True)
class Scenario:
    params: SystemParams
    topology: Topology
    perturbation: str
    gamma2_rule: Optional[str]
    source: Dict[str, object]


def _number(key: str, value) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"key {key!r}: expected a number, got {value!r}")
    return float(value)


def load_config_text(text: str, origin: str = "<config>") -> Dict[str, object]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{origin}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{origin}: top level must be an object")
    return data


def parse_assignment(text: str) -> Tuple[str, object]:
    """``key=value``; the value is read as JSON when possible, else as a string."""
    if "=" not in text:
        raise ConfigurationError(f"--set expects key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def build_scenario(config: Dict[str, object]) -> Scenario:
    """Validate a configuration mapping and turn it into a scenario."""
    unknown = sorted(set(config) - set(SCHEMA))
    if unknown:
        raise ConfigurationError(f"unknown key(s) {unknown}; valid keys: {sorted(SCHEMA)}")
    version = config.get("spec_version", SPEC_VERSION)
    if version != SPEC_VERSION:
        raise ConfigurationError(f"key 'spec_version': unsupported version {version!r}")
    if "eta" in config and "zeta" in config:
        raise ConfigurationError("keys 'eta' and 'zeta' are mutually exclusive")

    topology = Topology.parse(str(config.get("topology", Topology.FOUR_MODE.value)))
    perturbation = config.get("perturbation_mode", "dominant")
    if perturbation not in PERTURBATION_MODES:
        raise ConfigurationError(f"key 'perturbation_mode': expected one of {PERTURBATION_MODES}")

    changes: Dict[str, object] = {}
    for key in ("omega_lc", "gamma_lc", "omega_1", "omega_2", "gamma_m", "gamma_m1",
                "gamma_m2", "kappa", "delta", "phi", "temperature", "gamma1",
                "eta", "zeta", "epsilon", "tau") + BARE_KEYS:
        if key in config:
            changes[key] = _number(key, config[key])
    bare = config.get("bare_couplings", {})
    if not isinstance(bare, dict) or set(bare) - set(BARE_KEYS):
        raise ConfigurationError(f"key 'bare_couplings': expected an object with keys from {BARE_KEYS}")
    for key, value in bare.items():
        changes[key] = _number(f"bare_couplings.{key}", value)

    if "beta" in config:
        b = config["beta"]
        if isinstance(b, list) and len(b) == 2:
            changes["beta"] = complex(_number("beta", b[0]), _number("beta", b[1]))
        else:
            changes["beta"] = _number("beta", b)

    gamma2 = config.get("gamma2", "w_opt")
    rule = None
    if isinstance(gamma2, str):
        if gamma2 not in ("w_opt", "matched"):
            raise ConfigurationError("key 'gamma2': expected a number, 'w_opt' or 'matched'")
        rule = gamma2
    else:
        changes["gamma2"] = _number("gamma2", gamma2)

    # a 4-mode scenario fixes omega_lc from the mechanical frequencies
    if topology is Topology.FOUR_MODE and "omega_lc" not in changes and (
            "omega_1" in changes or "omega_2" in changes):
        base = SystemParams()
        o1 = changes.get("omega_1", base.omega_1)
        o2 = changes.get("omega_2", base.omega_2)
        changes["omega_lc"] = 0.5 * (o1 + o2)

    try:
        params = SystemParams().replace(**changes)
        check_params(params, topology)
        if rule is not None:
            params = apply_gamma2_rule(params, topology, rule)
    except (DomainError, PreconditionError) as exc:
        raise ConfigurationError(str(exc)) from None
    return Scenario(params, topology, perturbation, rule, dict(config))


def read_scenario(path: Optional[str], assignments: Sequence[str]) -> Scenario:
    config: Dict[str, object] = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from None
        config = load_config_text(text, path)
    for item in assignments or ():
        key, value = parse_assignment(item)
        if key in ("eta", "zeta"):
            config.pop("zeta" if key == "eta" else "eta", None)
        config[key] = value
    return build_scenario(config)


def report_table(scenario: Scenario) -> Table:
    p, topo = scenario.params, scenario.topology
    rep = snr_matrix(p, topo, scenario.perturbation)
    nan = math.nan
    noise = rep.noise
    values = {
        "u": noise.u if noise else nan,
        "w": noise.w if noise else nan,
        "xi": noise.xi if noise else nan,
        "rho": noise.rho if noise else nan,
        "sigma": noise.sigma if noise else nan,
        "w_opt": rep.w_opt if rep.w_opt is not None else nan,
        "snr_per_unit": rep.snr_per_unit,
        "snr0_per_unit": rep.snr0_per_unit,
        "r": rep.r,
        "r_max": cf.r_max(noise.xi) if noise else nan,
        "r_im": cf.r_im(noise.rho, noise.sigma) if noise else nan,
        "s22_abs": abs(rep.s22),
        "sx_out": rep.sx_out,
        "stability_margin": rep.stability_margin,
    }
    comments = [
        f"revision: {source_revision()}",
        f"topology: {topo.value}",
        f"perturbation: {scenario.perturbation}",
        f"gamma2: {p.gamma2!r}" + (f" (rule {scenario.gamma2_rule})" if scenario.gamma2_rule else ""),
        f"eta: {p.efficiency!r}",
        "snr values are divided by tau*|beta|^2*epsilon^2",
        rep.metadata["tau_validity"],
    ]
    return Table(columns=REPORT_COLUMNS, rows=[tuple(values[c] for c in REPORT_COLUMNS)],
                 comments=comments)


# --- commands ----------------------------------------------------------------

def cmd_report(args) -> int:
    scenario = read_scenario(args.config, args.set)
    sys.stdout.write(to_csv(report_table(scenario)))
    return EXIT_OK


def _output_paths(out: Optional[str], stems: List[str]) -> List[Path]:
    target = Path(out) if out else Path(".")
    if target.suffix.lower() == ".csv":
        first = [target]
        rest = [target.parent / f"{s}.csv" for s in stems[1:]]
        return first + rest
    return [target / f"{s}.csv" for s in stems]


def cmd_figure(args) -> int:
    if args.name not in FIGURES:
        print(f"unknown figure {args.name!r}; valid names: {', '.join(FIGURES)}", file=sys.stderr)
        return EXIT_CONFIG
    if args.points is not None and args.points < 1:
        raise ConfigurationError("--points must be positive")
    scenario = read_scenario(args.config, args.set)
    tables = make_figure(args.name, scenario.params, args.points, workers=args.workers)
    for path, (stem, table) in zip(_output_paths(args.out, [s for s, _ in tables]), tables):
        write_csv(table, path)
        print(f"wrote {path} ({len(table.rows)} rows)", file=sys.stderr)
    return EXIT_OK


def cmd_validate(args) -> int:
    from .validate import run_checks

    results = run_checks(args.filter)
    if not results:
        print(f"no check matches {args.filter!r}", file=sys.stderr)
        return EXIT_CONFIG
    for res in results:
        status = "PASS" if res.passed else "FAIL"
        print(f"{status} {res.name} ({res.seconds:.2f} s): {res.detail}")
    failed = [r.name for r in results if not r.passed]
    if failed:
        print(f"failed: {', '.join(failed)}")
        return EXIT_VALIDATION
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rf-sense",
        description="Optoelectromechanical rf sensing: scattering model, SNR and figure data.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log warnings and debug output")
    sub = parser.add_subparsers(dest="command", required=True)

    keys = "; ".join(f"{k}: {v}" for k, v in SCHEMA.items())

    p = sub.add_parser("report", help="single-scenario figures of merit as one CSV row",
                       epilog=f"config keys -- {keys}")
    p.add_argument("--config", help="JSON scenario file (defaults: the cryogenic MHz set)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.set_defaults(func=cmd_report)

    defaults = ", ".join(f"{k}={v}" for k, v in DEFAULT_POINTS.items())
    p = sub.add_parser("figure", help="write figure data as CSV",
                       epilog=f"figures: {', '.join(FIGURES)}. default points: {defaults}")
    p.add_argument("name", help="figure name")
    p.add_argument("--config", help="JSON scenario file supplying the base parameters")
    p.add_argument("--out", help="output directory, or a .csv path for the main table (default: .)")
    p.add_argument("--points", type=int, help="points per axis (default depends on the figure)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes (default 1)")
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override one config key (repeatable)")
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("validate", help="run the invariant suite")
    p.add_argument("--filter", help="only run checks whose name contains this text")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (UnstableModelError, SingularModelError) as exc:
        print(f"unstable model: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE


if __name__ == "__main__":
    sys.exit(main())
