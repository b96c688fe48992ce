"""Command-line entry point.

    fullerene-gates spectrum | gate <kind> | refocus | sweep | budget  [flags]

Frequencies are rad/µs, times µs. Config files hold flat ``key = value`` lines
(``#`` starts a comment) using the flag names without dashes; command-line
flags win over the file.

Exit codes: 0 ok, 2 bad arguments or parameters, 3 physics validity check
failed (only with ``--strict``), 4 integrator did not converge.
"""

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from . import experiments, gates, propagator, refocus
from .spin_model import SystemParams

EXIT_OK, EXIT_USAGE, EXIT_INVALID, EXIT_NONCONVERGENT = 0, 2, 3, 4
GATE_KINDS = ("cnot-ab", "cnot-ba", "flip-a", "flip-b", "cphase")
# Richardson error estimate (4/3)‖U_dt − U_dt/2‖_F allowed for stepped gates
CONVERGENCE_TOL = 1e-2


@dataclass
class CliConfig:
    omega1: float = 100.0
    omega2: float = 106.35
    j: float = 50.0
    rabi: float = 25.0
    q: int = 7
    delta1: float = 31.35
    tau: float = None
    dt: float = None
    out: str = None

    @property
    def params(self):
        return SystemParams(self.omega1, self.omega2, self.j)

    def to_text(self):
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if value is None:
                lines.append(f"# {f.name} =")
            else:
                lines.append(f"{f.name} = {value!r}" if not isinstance(value, str) else f"{f.name} = {value}")
        return "\n".join(lines) + "\n"


class ConfigError(ValueError):
    pass


def _convert(name, raw):
    if name == "q":
        return int(raw)
    if name == "out":
        return raw
    return float(raw)


def parse_config_text(text):
    values = {}
    known = {f.name for f in fields(CliConfig)}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = _convert(key, value)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {value!r}") from exc
    return values


def build_config(args):
    values = {}
    if args.config:
        try:
            values.update(parse_config_text(Path(args.config).read_text()))
        except OSError as exc:
            raise ConfigError(f"cannot read config: {exc}") from exc
    for f in fields(CliConfig):
        flag = getattr(args, f.name, None)
        if flag is not None:
            values[f.name] = flag
    cfg = CliConfig(**values)
    validate(cfg)
    return cfg


def validate(cfg):
    for name in ("omega1", "omega2", "j", "rabi", "delta1"):
        if not math.isfinite(getattr(cfg, name)):
            raise ConfigError(f"{name} must be finite")
    if cfg.j < 0:
        raise ConfigError("j must be non-negative")
    if cfg.rabi <= 0:
        raise ConfigError("rabi must be positive")
    if cfg.q <= 0:
        raise ConfigError("q must be positive")
    if cfg.tau is not None and cfg.tau <= 0:
        raise ConfigError("tau must be positive")
    if cfg.dt is not None and cfg.dt <= 0:
        raise ConfigError("dt must be positive")


def _emit(text, path, suffix=None):
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    if suffix:
        target = target.with_name(target.stem + suffix + (target.suffix or ".csv"))
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(text)


def _warn(msg):
    print(f"warning: {msg}", file=sys.stderr)


# --- commands -----------------------------------------------------------------

def cmd_spectrum(cfg, args):
    tables = experiments.spectrum_tables(cfg.params)
    if cfg.out is None:
        _emit(experiments.levels_csv(tables) + "\n" + experiments.transitions_csv(tables), None)
    else:
        _emit(experiments.levels_csv(tables), cfg.out)
        _emit(experiments.transitions_csv(tables), cfg.out, suffix=".transitions")
    return EXIT_OK


def _cphase_params(cfg):
    return gates.CphaseParams.with_q(cfg.params, cfg.delta1, cfg.q)


def cmd_gate(cfg, args):
    p = cfg.params
    kind = args.kind
    problems = []
    if kind == "cphase":
        cp = _cphase_params(cfg)
        schedule = gates.cphase_schedule(cp, p)
        gate_kind = gates.GateKind.CPHASE
        metrics = gates.selectivity(cp)
        # P = Ω₀/(2δ_min) ≥ 1, with slack for rounding in the derived detunings
        if metrics.p >= 1 - 1e-9:
            problems.append(f"Rabi frequency {metrics.omega0:.6g} >= 2*delta_min = {2 * metrics.delta_min:.6g}")
    else:
        metrics = None
        if kind.startswith("cnot"):
            control = kind[-2].upper()
            schedule = gates.cnot_schedule(control, p, cfg.rabi)
            gate_kind = gates.GateKind.CNOT_AB if control == "A" else gates.GateKind.CNOT_BA
        else:
            spin = kind[-1].upper()
            schedule = gates.flip_schedule(spin, p, cfg.rabi)
            gate_kind = gates.GateKind.FLIP_A if spin == "A" else gates.GateKind.FLIP_B
        if cfg.rabi >= p.j:
            problems.append(f"Rabi frequency {cfg.rabi:.6g} >= J = {p.j:.6g}: manifolds not resolved")

    for msg in problems:
        _warn(msg)
    if problems and args.strict:
        return EXIT_INVALID

    report = gates.run_gate(schedule, gate_kind, dt=cfg.dt, metrics=metrics)
    if report.step_count > 1:
        dt = cfg.dt or propagator.default_dt(schedule)
        coarse = propagator.evolve_stepped(schedule, dt).unitary
        fine = propagator.evolve_stepped(schedule, dt / 2).unitary
        err = 4 / 3 * float(np.linalg.norm(coarse - fine))
        if err > CONVERGENCE_TOL:
            _warn(f"estimated integrator error {err:.3e} exceeds {CONVERGENCE_TOL}")
            return EXIT_NONCONVERGENT
    _emit(report.to_text(), cfg.out)
    return EXIT_OK


def cmd_refocus(cfg, args):
    p = cfg.params
    tau = cfg.tau if cfg.tau is not None else gates.cphase_duration(_cphase_params(cfg))
    core = refocus.gate_core(p, tau)
    rows = refocus.ledger_table(p, tau, core)
    result = refocus.verify_rephasing(p, tau, core)
    text = refocus.ledger_text(rows) + f"tau = {tau:.9g}\npass = {str(result.passed).lower()}\n"
    _emit(text, cfg.out)
    if not result.passed and args.strict:
        return EXIT_INVALID
    return EXIT_OK


def cmd_sweep(cfg, args):
    rows = experiments.sweep_cphase(cfg.params)
    _emit(experiments.sweep_csv(rows), cfg.out)
    return EXIT_OK


def cmd_budget(cfg, args):
    b = experiments.BudgetParams()
    t_cphase = gates.cphase_duration(_cphase_params(cfg))
    t_cnot = math.pi / cfg.rabi
    cph = experiments.gate_budget(b, t_cphase)
    cnot = experiments.gate_budget(b, t_cnot)
    text = (
        f"t2 = {b.t2:.9g}\n"
        f"cphase_duration = {t_cphase:.9g}\ncphase_count = {cph.count}\ncphase_ratio = {cph.ratio:.9g}\n"
        f"cnot_duration = {t_cnot:.9g}\ncnot_count = {cnot.count}\ncnot_ratio = {cnot.ratio:.9g}\n"
    )
    _emit(text, cfg.out)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "gate": cmd_gate,
    "refocus": cmd_refocus,
    "sweep": cmd_sweep,
    "budget": cmd_budget,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--omega1", type=float)
    common.add_argument("--omega2", type=float)
    common.add_argument("--j", type=float)
    common.add_argument("--rabi", type=float)
    common.add_argument("--q", type=int)
    common.add_argument("--delta1", type=float)
    common.add_argument("--tau", type=float)
    common.add_argument("--dt", type=float)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--config", help="key = value config file")
    common.add_argument("--strict", action="store_true", help="fail (exit 3) on validity warnings")
    common.add_argument("--dump-config", action="store_true", help="print the effective config and exit")

    parser = argparse.ArgumentParser(prog="fullerene-gates", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "gate":
            sp.add_argument("kind", choices=GATE_KINDS)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.dump_config:
        _emit(cfg.to_text(), cfg.out)
        return EXIT_OK
    try:
        return COMMANDS[args.command](cfg, args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
