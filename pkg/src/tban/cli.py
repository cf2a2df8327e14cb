"""Command-line front end.

    tban analyze  --config run.json
    tban exact    --config run.json
    tban simulate --config run.json [--seed S]
    tban sweep    --config run.json --out table.csv [--threads N]
    tban validate --config run.json

Results go to stdout as JSON (floats with 17 significant digits), each echoing
the resolved configuration. Exit codes: 0 ok, 1 configuration error,
2 numerical failure, 3 size cap exceeded.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from typing import List, Optional

import numpy as np

from .dynamics import PotentialSet
from .errors import ConfigurationError, ConvergenceError, SizeCapError, TBANError
from .exact_markov import MODES, boundary_influence
from .lattice import NodeId, build_lattice, uniform_weights, validate_structure
from .montecarlo import SWEEP_PARAMS, SimulationPlan, simulate, sweep, write_csv
from .projectivity import phase_transition_report

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SIZE_CAP = 0, 1, 2, 3


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


@dataclass
class LatticeConfig:
    width: int
    height: int


@dataclass
class PotentialsConfig:
    T: float
    w0: float
    w1: float
    k: int = 5
    w2: float = 0.0
    w3: float = 0.0
    w4: float = 0.0


@dataclass
class BoundaryConfig:
    value: int = 0


@dataclass
class DynamicsConfig:
    mode: str = "synchronous"
    burn_in: int = 1000
    samples: int = 100_000
    thinning: int = 1
    seed: int = 0
    batches: int = 20


@dataclass
class ExactConfig:
    tol: float = 1e-12
    max_iter: int = 200_000


@dataclass
class SweepConfig:
    param: str
    start: float
    stop: float
    steps: int


@dataclass
class RunConfig:
    lattice: LatticeConfig
    potentials: PotentialsConfig
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    dynamics: DynamicsConfig = field(default_factory=DynamicsConfig)
    exact: ExactConfig = field(default_factory=ExactConfig)
    sweep: Optional[SweepConfig] = None
    arc_weights: List[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.sweep is not None:
            s = d["sweep"]
            d["sweep"] = {"param": s["param"], "from": s["start"], "to": s["stop"], "steps": s["steps"]}
        return d

    def potential_set(self) -> PotentialSet:
        p = self.potentials
        try:
            return PotentialSet(p.T, p.k, p.w0, p.w1, p.w2, p.w3, p.w4)
        except ConfigurationError as exc:
            raise ConfigurationError(f"potentials: {exc}") from None

    def plan(self) -> SimulationPlan:
        d = self.dynamics
        try:
            return SimulationPlan(build_lattice(self.lattice.width, self.lattice.height), self.potential_set(),
                                  self.boundary.value, d.mode, d.burn_in, d.samples, d.thinning, d.seed, d.batches)
        except ConfigurationError as exc:
            raise ConfigurationError(f"dynamics: {exc}") from None


def _number(value, path, integer=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigurationError(f"{path}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigurationError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    if not math.isfinite(value):
        raise ConfigurationError(f"{path}: must be finite")
    return float(value)


def _section(raw, name, required, optional, numbers, integers=()):
    path = name
    if not isinstance(raw, dict):
        raise ConfigurationError(f"{path}: expected an object")
    unknown = set(raw) - set(required) - set(optional)
    if unknown:
        raise ConfigurationError(f"{path}.{sorted(unknown)[0]}: unknown field")
    out = {}
    for key in required:
        if key not in raw:
            raise ConfigurationError(f"{path}.{key}: missing required field")
    for key, value in raw.items():
        if key in integers:
            out[key] = _number(value, f"{path}.{key}", integer=True)
        elif key in numbers:
            out[key] = _number(value, f"{path}.{key}")
        else:
            out[key] = value
    return out


def parse_config(raw: dict) -> RunConfig:
    """Validate a config mapping; every error names the offending field path."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config: expected a JSON object")
    allowed = {"lattice", "potentials", "boundary", "dynamics", "exact", "sweep", "arc_weights"}
    unknown = set(raw) - allowed
    if unknown:
        raise ConfigurationError(f"{sorted(unknown)[0]}: unknown section")
    for name in ("lattice", "potentials"):
        if name not in raw:
            raise ConfigurationError(f"{name}: missing required section")

    lat = _section(raw["lattice"], "lattice", ("width", "height"), (), (), ("width", "height"))
    for key in ("width", "height"):
        if lat[key] < 1:
            raise ConfigurationError(f"lattice.{key}: must be >= 1")

    pot = _section(raw["potentials"], "potentials", ("T", "w0", "w1"), ("k", "w2", "w3", "w4"),
                   ("T", "w0", "w1", "w2", "w3", "w4"), ("k",))
    if not pot["T"] > 0:
        raise ConfigurationError("potentials.T: must be > 0")
    if "k" in pot and not 2 <= pot["k"] <= 5:
        raise ConfigurationError("potentials.k: must be in [2, 5]")

    bnd = _section(raw.get("boundary", {}), "boundary", (), ("value",), (), ("value",))
    if bnd.get("value", 0) not in (0, 1):
        raise ConfigurationError("boundary.value: must be 0 or 1")

    dyn = _section(raw.get("dynamics", {}), "dynamics", (),
                   ("mode", "burn_in", "samples", "thinning", "seed", "batches"), (),
                   ("burn_in", "samples", "thinning", "seed", "batches"))
    if dyn.get("mode", "synchronous") not in MODES:
        raise ConfigurationError(f"dynamics.mode: must be one of {list(MODES)}")
    for key in ("burn_in", "samples", "seed"):
        if dyn.get(key, 0) < 0:
            raise ConfigurationError(f"dynamics.{key}: must be >= 0")
    for key in ("thinning", "batches"):
        if key in dyn and dyn[key] < 1:
            raise ConfigurationError(f"dynamics.{key}: must be >= 1")

    ex = _section(raw.get("exact", {}), "exact", (), ("tol", "max_iter"), ("tol",), ("max_iter",))
    if not ex.get("tol", 1.0) > 0:
        raise ConfigurationError("exact.tol: must be > 0")
    if ex.get("max_iter", 1) < 1:
        raise ConfigurationError("exact.max_iter: must be >= 1")

    sweep_cfg = None
    if raw.get("sweep") is not None:
        sw = _section(raw["sweep"], "sweep", ("param", "from", "to", "steps"), (), ("from", "to"), ("steps",))
        if sw["param"] not in SWEEP_PARAMS:
            raise ConfigurationError(f"sweep.param: must be one of {list(SWEEP_PARAMS)}")
        if sw["steps"] < 2:
            raise ConfigurationError("sweep.steps: must be >= 2")
        sweep_cfg = SweepConfig(sw["param"], sw["from"], sw["to"], sw["steps"])

    arcs = raw.get("arc_weights", [])
    if not isinstance(arcs, list):
        raise ConfigurationError("arc_weights: expected a list")
    clean_arcs = []
    for n, arc in enumerate(arcs):
        a = _section(arc, f"arc_weights[{n}]", ("node", "neighbour", "weight"), (), ("weight",))
        for key in ("node", "neighbour"):
            v = a[key]
            if not (isinstance(v, list) and len(v) == 2 and all(isinstance(c, int) for c in v)):
                raise ConfigurationError(f"arc_weights[{n}].{key}: expected [row, col]")
        clean_arcs.append(a)

    return RunConfig(LatticeConfig(**lat), PotentialsConfig(**pot), BoundaryConfig(**bnd),
                     DynamicsConfig(**dyn), ExactConfig(**ex), sweep_cfg, clean_arcs)


def load_config(path: str) -> RunConfig:
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path!r}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"config {path!r} is not valid JSON: {exc}") from None
    return parse_config(raw)


# ---------------------------------------------------------------------------
# Output
# ---------------------------------------------------------------------------


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits; non-finite floats become null."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {to_json(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format(float(obj), ".17g") if math.isfinite(obj) else "null"
    return json.dumps(str(obj))


def _emit(payload: dict, config: RunConfig) -> None:
    sys.stdout.write(to_json({**payload, "config": config.to_dict()}) + "\n")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------


def cmd_analyze(cfg: RunConfig, args) -> int:
    _emit(phase_transition_report(cfg.potential_set()).to_dict(), cfg)
    return EXIT_OK


def cmd_exact(cfg: RunConfig, args) -> int:
    topo = build_lattice(cfg.lattice.width, cfg.lattice.height)
    result = boundary_influence(topo, cfg.potential_set(), cfg.dynamics.mode, cfg.exact.tol, cfg.exact.max_iter)
    _emit(result.to_dict(), cfg)
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    if args.seed is not None:
        cfg.dynamics.seed = args.seed
    _emit(simulate(cfg.plan()).to_dict(), cfg)
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    if cfg.sweep is None:
        raise ConfigurationError("sweep: missing required section for the sweep command")
    if args.threads is not None and args.threads < 1:
        raise ConfigurationError("--threads must be >= 1")
    s = cfg.sweep
    rows = sweep(cfg.plan(), s.param, s.start, s.stop, s.steps, threads=args.threads)
    write_csv(rows, args.out)
    _emit({"out": args.out, "rows": len(rows)}, cfg)
    return EXIT_OK


def cmd_validate(cfg: RunConfig, args) -> int:
    topo = build_lattice(cfg.lattice.width, cfg.lattice.height)
    weights = uniform_weights(topo, cfg.potentials.w0, cfg.potentials.w1)
    for n, arc in enumerate(cfg.arc_weights):
        key = (NodeId(*arc["node"]), NodeId(*arc["neighbour"]))
        if key not in weights:
            raise ConfigurationError(f"arc_weights[{n}]: {arc['neighbour']} is not in the neighbourhood of {arc['node']}")
        weights[key] = arc["weight"]
    _emit(validate_structure(weights, topo).to_dict(), cfg)
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "exact": cmd_exact, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "validate": cmd_validate}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigurationError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="tban", description="Stochastic nonlinear threshold Boolean automata networks on Z^2.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="JSON run configuration")
        if name == "simulate":
            p.add_argument("--seed", type=int, help="override dynamics.seed")
        if name == "sweep":
            p.add_argument("--out", required=True, help="CSV output path")
            p.add_argument("--threads", type=int, default=None, help="worker cap (default: all cores)")
    return parser


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = load_config(args.config)
        return COMMANDS[args.command](cfg, args)
    except ConfigurationError as exc:
        code, msg = EXIT_CONFIG, str(exc)
    except ConvergenceError as exc:
        code, msg = EXIT_NUMERICAL, str(exc)
    except SizeCapError as exc:
        code, msg = EXIT_SIZE_CAP, str(exc)
    except TBANError as exc:
        code, msg = EXIT_CONFIG, str(exc)
    print(f"tban: error: {msg}", file=sys.stderr)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
