"""Batch command-line interface; all results land as CSV files.

Subcommands: spectrum, evolve, gate, bell, sweep, selfcheck.  Each run
writes into <out>/<subcommand>-<label>/ together with a
config.resolved.json echo of the fully-defaulted configuration; floats
use a fixed 17-significant-digit format so repeated runs are
byte-identical.  Exit codes: 2 for configuration-schema violations,
3 for physics-invariant violations, 1 for failed selfchecks.
"""

import argparse
import json
import math
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import device as dev
from . import gates as gt
from . import selfcheck as sc
from . import spectral as sp
from .config import ConfigSchemaError, default_config_path, load_config, load_config_dict
from .drive import DriveSchedule, reduced_hamiltonian
from .errors import ConfigurationError, SquidGatesError
from .propagator import StateVector, propagate

FMT = "%.17g"


def _solve_system(cfg):
    p = cfg.device
    d = dev.derive_constants(p)
    sol = sp.solve_coupled(p, d, n_states=cfg.solver.n_states,
                           method=cfg.solver.method, k_1d=cfg.solver.K,
                           half_width=cfg.solver.half_width,
                           n_points=cfg.solver.n_points)
    basis = sp.label_computational_states(sol, dev.find_wells(p, d))
    table = sp.transition_table(sol, basis)
    return p, d, sol, basis, table


def cmd_spectrum(cfg, args, outdir):
    _, _, sol, basis, table = _solve_system(cfg)
    sp.write_spectrum_csv(sol, outdir / "spectrum.csv", FMT)
    sp.write_transitions_csv(table, outdir / "transitions.csv", FMT)
    for a, b in (("00", "10"), ("01", "11"), ("10", "11"), ("00", "01")):
        print(f"dE({a}->{b}) = {table.spacing(a, b):.6f} (units of hbar*omega_LC)")
    print(f"wrote {outdir / 'spectrum.csv'} and {outdir / 'transitions.csv'}")
    return 0


def cmd_evolve(cfg, args, outdir):
    if not cfg.pulses:
        raise ConfigurationError("the evolve subcommand needs a nonempty pulses array")
    _, _, sol, basis, table = _solve_system(cfg)
    sched = DriveSchedule(pulses=cfg.pulses)
    ham = reduced_hamiltonian(sol, table, sched, include_d12=cfg.include_d12)
    c0 = StateVector.basis_state(sol.n_states, basis.index(args.init))
    traj = propagate(c0, ham, cfg.integrator)
    traj.to_csv(outdir / "trajectory.csv", basis, FMT)
    print(f"final populations: " + ", ".join(
        f"P{lab}={traj.populations[-1][basis.index(lab)]:.6f}" for lab in sp.LABELS))
    print(f"wrote {outdir / 'trajectory.csv'}")
    return 0


def _calibrations(cfg, table, amp_c, amp_t, need_rotation, need_cnot):
    out = {}
    if need_rotation:
        out["rotation"] = gt.calibrate_pi_pulse(table, "C", gt.CONTROL_TRANSITIONS[0],
                                                amp_c, cfg=cfg.integrator)
    if need_cnot:
        out["cnot"] = gt.calibrate_pi_pulse(table, "T", gt.TARGET_TRANSITION,
                                            amp_t, cfg=cfg.integrator)
    return out


def cmd_gate(cfg, args, outdir):
    _, _, sol, basis, table = _solve_system(cfg)
    cal = _calibrations(cfg, table, args.amplitude_c, args.amplitude_t,
                        need_rotation=args.name in ("not", "rotation"),
                        need_cnot=args.name == "cnot")
    if args.name == "cnot":
        sched = gt.schedule_cnot(basis, table, args.amplitude_t,
                                 cal["cnot"].omega_rabi)
    else:
        amps = gt.rotation_amplitudes(table, args.amplitude_c)
        theta = math.pi if args.name == "not" else args.theta
        sched = gt.schedule_rotation(theta, basis, table, amps,
                                     cal["rotation"].omega_rabi)
    result = gt.run_gate(sched, table, cfg=cfg.integrator,
                         include_d12=cfg.include_d12)
    result.to_csv(outdir / "gate_report.csv", FMT)
    for r in result.runs:
        r.trajectory.to_csv(outdir / f"trajectory-{r.init_label}.csv", basis, FMT)
        print(f"{r.init_label} -> {r.target_label or '(superposition)'}: "
              f"fidelity={r.fidelity:.6f} leakage_max={r.leakage_max:.3e}")
    print(f"wrote {outdir / 'gate_report.csv'}")
    return 0


def cmd_bell(cfg, args, outdir):
    _, _, sol, basis, table = _solve_system(cfg)
    cal = _calibrations(cfg, table, args.amplitude_c, args.amplitude_t,
                        need_rotation=True, need_cnot=True)
    amps = gt.rotation_amplitudes(table, args.amplitude_c)
    sched = gt.schedule_bell(args.init, basis, table, amps,
                             cal["rotation"].omega_rabi, args.amplitude_t,
                             cal["cnot"].omega_rabi)
    result = gt.run_gate(sched, table, cfg=cfg.integrator, inits=(args.init,),
                         include_d12=cfg.include_d12)
    run = result.runs[0]
    traj = run.trajectory
    traj.to_csv(outdir / "trajectory.csv", basis, FMT)
    name, near_fid = gt.nearest_bell_fidelity(traj.rotating_amps()[-1],
                                              sol.n_states, basis)
    mid_idx = int(np.argmin(np.abs(traj.taus - sched.marks["rotation_end"])))
    mid = traj.rotating_amps()[mid_idx]
    prod = np.zeros(sol.n_states, complex)
    i = args.init
    prod[basis.index(f"0{i[1]}")] = 1.0 / math.sqrt(2.0)
    prod[basis.index(f"1{i[1]}")] = math.copysign(1.0, 0.5 - int(i[0])) / math.sqrt(2.0)
    prod_fid = float(np.abs(np.vdot(prod, mid)) ** 2)
    with open(outdir / "bell_report.csv", "w") as f:
        f.write("init_label,nearest_bell,fidelity,product_state_fidelity,leakage_max\n")
        f.write(f"{args.init},{name},{FMT % near_fid},{FMT % prod_fid},"
                f"{FMT % run.leakage_max}\n")
    print(f"bell from |{args.init}>: fidelity {near_fid:.6f} to {name} "
          f"(intermediate product state {prod_fid:.6f})")
    print(f"wrote {outdir / 'trajectory.csv'} and {outdir / 'bell_report.csv'}")
    return 0


def cmd_selfcheck(cfg, args, outdir):
    results = sc.run_all(cfg.device)
    failed = 0
    lines = []
    for r in results:
        lines.append(r.line())
        print(r.line())
        failed += 0 if r.passed else 1
    (outdir / "selfcheck.txt").write_text("\n".join(lines) + "\n")
    return 1 if failed else 0


def _set_by_path(tree, path, value):
    """Assign into a nested dict/list using e.g. device.xe2 or pulses[0].amplitude."""
    node = tree
    parts = path.split(".")
    for k, part in enumerate(parts):
        last = k == len(parts) - 1
        name, idx = part, None
        if part.endswith("]"):
            name, bracket = part[:-1].split("[")
            idx = int(bracket)
        if name not in node:
            raise ConfigurationError(f"sweep parameter path {path!r}: no field {name!r}")
        if idx is not None:
            node = node[name]
            if last:
                node[idx] = value
            else:
                node = node[idx]
        elif last:
            node[name] = value
        else:
            node = node[name]


def _sweep_point(payload):
    raw, task, point_dir, opts = payload
    cfg = load_config_dict(raw)
    outdir = Path(point_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.resolved.json").write_text(
        json.dumps(cfg.resolved, indent=2, sort_keys=True) + "\n")
    args = argparse.Namespace(**opts)
    handler = {"spectrum": cmd_spectrum, "evolve": cmd_evolve,
               "gate": cmd_gate, "bell": cmd_bell}[task]
    try:
        return handler(cfg, args, outdir)
    except SquidGatesError as exc:
        (outdir / "FAILED").write_text(str(exc) + "\n")
        return 3


def cmd_sweep(cfg, args, outdir):
    values = [float(v) for v in args.values]
    opts = dict(init=args.init, name=args.name, theta=args.theta,
                amplitude_c=args.amplitude_c, amplitude_t=args.amplitude_t)
    jobs = []
    for v in values:
        raw = json.loads(json.dumps(cfg.resolved))
        _set_by_path(raw, args.param, v)
        point_dir = outdir / f"{args.param}={v:g}"
        jobs.append((raw, args.task, str(point_dir), opts))
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            codes = list(pool.map(_sweep_point, jobs))
    else:
        codes = [_sweep_point(j) for j in jobs]
    bad = sum(1 for c in codes if c != 0)
    print(f"sweep over {args.param}: {len(values) - bad}/{len(values)} points succeeded")
    return 3 if bad else 0


def build_parser():
    ap = argparse.ArgumentParser(
        prog="squidgates",
        description="Pulse-level simulator of two coupled rf-SQUID flux qubits")
    ap.add_argument("--config", default=default_config_path(),
                    help="JSON run configuration (default: shipped working point)")
    ap.add_argument("--out", default=None,
                    help="output root (default: $SQUIDGATES_OUT or ./runs)")
    ap.add_argument("--label", default=None,
                    help="run directory suffix (default: timestamp)")
    sub = ap.add_subparsers(dest="cmd", required=True)

    sub.add_parser("spectrum", help="eigenenergies and transition table")

    p_evolve = sub.add_parser("evolve", help="propagate the configured pulses")
    p_evolve.add_argument("--init", default="00", choices=sp.LABELS)

    p_gate = sub.add_parser("gate", help="calibrate and run a named gate")
    p_gate.add_argument("--name", required=True, choices=("not", "rotation", "cnot"))
    p_gate.add_argument("--theta", type=float, default=math.pi,
                        help="rotation angle in radians (rotation gate only)")
    p_gate.add_argument("--amplitude-c", type=float, default=5e-5)
    p_gate.add_argument("--amplitude-t", type=float, default=5e-5)

    p_bell = sub.add_parser("bell", help="pi/2 block plus CNOT from a basis state")
    p_bell.add_argument("--init", default="00", choices=sp.LABELS)
    p_bell.add_argument("--amplitude-c", type=float, default=5e-5)
    p_bell.add_argument("--amplitude-t", type=float, default=5e-5)

    p_sweep = sub.add_parser("sweep", help="re-run a task over a parameter range")
    p_sweep.add_argument("--param", required=True,
                         help="config path, e.g. device.xe2 or pulses[0].amplitude")
    p_sweep.add_argument("--values", required=True, nargs="+")
    p_sweep.add_argument("--task", default="spectrum",
                         choices=("spectrum", "evolve", "gate", "bell"))
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--init", default="00", choices=sp.LABELS)
    p_sweep.add_argument("--name", default="not", choices=("not", "rotation", "cnot"))
    p_sweep.add_argument("--theta", type=float, default=math.pi)
    p_sweep.add_argument("--amplitude-c", type=float, default=5e-5)
    p_sweep.add_argument("--amplitude-t", type=float, default=5e-5)

    sub.add_parser("selfcheck", help="run the numerical oracle suite")
    return ap


HANDLERS = {"spectrum": cmd_spectrum, "evolve": cmd_evolve, "gate": cmd_gate,
            "bell": cmd_bell, "sweep": cmd_sweep, "selfcheck": cmd_selfcheck}


def main(argv=None):
    args = build_parser().parse_args(argv)
    import os
    out_root = Path(args.out or os.environ.get("SQUIDGATES_OUT", "runs"))
    label = args.label or time.strftime("%Y%m%d-%H%M%S")
    outdir = out_root / f"{args.cmd}-{label}"
    try:
        cfg = load_config(args.config)
    except ConfigSchemaError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SquidGatesError as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return 3
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "config.resolved.json").write_text(
        json.dumps(cfg.resolved, indent=2, sort_keys=True) + "\n")
    try:
        return HANDLERS[args.cmd](cfg, args, outdir)
    except SquidGatesError as exc:
        (outdir / "FAILED").write_text(str(exc) + "\n")
        print(f"run failed: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
