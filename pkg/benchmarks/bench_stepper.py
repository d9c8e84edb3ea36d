#!/usr/bin/env python3
"""Benchmark the compiled stepping kernels against the pure-numpy fallback.

Times three representative workloads on the shipped working point:

  proportional  two simultaneous control tones (single-line fast path)
  general       control and target tones together (per-step eigensolve)
  rk4           the reference integrator on the two-tone drive

and reports per-step cost plus the compiled/pure speedup.  Endpoints are
cross-checked between backends.

Usage: python benchmarks/bench_stepper.py [--steps N] [--dtau DT]
"""

import argparse
import time

import numpy as np

from squidgates import device as dev
from squidgates import spectral as sp
from squidgates.drive import DriveSchedule, PulseSpec, ReducedHamiltonian
from squidgates.gates import CONTROL_TRANSITIONS, TARGET_TRANSITION, _tone_phase
from squidgates.propagator import (IntegratorConfig, StateVector,
                                   available_backends, propagate)


def build_system():
    p = dev.default_device()
    d = dev.derive_constants(p)
    sol = sp.solve_coupled(p, d)
    basis = sp.label_computational_states(sol, dev.find_wells(p, d))
    table = sp.transition_table(sol, basis)
    return sol, basis, table


def schedules(table, duration):
    d13 = table.dipole("C", *CONTROL_TRANSITIONS[0])
    d24 = table.dipole("C", *CONTROL_TRANSITIONS[1])
    d34 = table.dipole("T", *TARGET_TRANSITION)
    c_tones = [
        PulseSpec(line="C", amplitude=5e-5, width=duration,
                  omega=abs(table.spacing(*CONTROL_TRANSITIONS[0])),
                  phase=_tone_phase(d13)),
        PulseSpec(line="C", amplitude=5.13e-5, width=duration,
                  omega=abs(table.spacing(*CONTROL_TRANSITIONS[1])),
                  phase=_tone_phase(d24)),
    ]
    t_tone = PulseSpec(line="T", amplitude=5e-5, width=duration,
                       omega=abs(table.spacing(*TARGET_TRANSITION)),
                       phase=_tone_phase(d34))
    return {
        "proportional": DriveSchedule(pulses=c_tones),
        "general": DriveSchedule(pulses=c_tones + [t_tone]),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--dtau", type=float, default=0.05)
    args = ap.parse_args()

    sol, basis, table = build_system()
    duration = args.steps * args.dtau
    c0 = StateVector.basis_state(sol.n_states, basis.index("00"))
    backends = available_backends()
    print(f"backends: {', '.join(backends)};  n_states={sol.n_states}, "
          f"steps={args.steps}, dtau={args.dtau}\n")
    print(f"{'workload':<14}" + "".join(f"{b + ' [us/step]':>20}" for b in backends)
          + f"{'speedup':>10}{'max |endpoint diff|':>22}")

    cases = [(name, sched, "split-operator", args.dtau)
             for name, sched in schedules(table, duration).items()]
    # RK4 needs a finer step to hold its norm over long spans
    cases.append(("rk4", schedules(table, duration)["proportional"],
                  "reference-rk4", min(args.dtau, 0.0125)))

    for name, sched, method, dtau in cases:
        ham = ReducedHamiltonian(energies=table.energies.copy(), D1=table.D1,
                                 D2=table.D2, schedule=sched,
                                 params=table.params, constants=table.constants)
        cfg = IntegratorConfig(dtau=dtau, record_stride=10**9, method=method)
        per_step = {}
        final = {}
        for backend in backends:
            start = time.perf_counter()
            traj = propagate(c0, ham, cfg, duration=args.steps * dtau,
                             backend=backend)
            per_step[backend] = (time.perf_counter() - start) / args.steps * 1e6
            final[backend] = traj.amps[-1]
        row = f"{name:<14}" + "".join(f"{per_step[b]:>20.2f}" for b in backends)
        if len(backends) == 2:
            diff = float(np.max(np.abs(final["compiled"] - final["pure"])))
            row += f"{per_step['pure'] / per_step['compiled']:>9.1f}x{diff:>22.2e}"
        print(row)


if __name__ == "__main__":
    main()
