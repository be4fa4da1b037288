"""Command-line front end.

    planarstring <command> SCENARIO [overrides]

Commands: synth, spectrum, worldsheet, charges, cusps, braid, pipeline.
Exit codes are 0 on success, 2 for invalid input and 3 for numerical
failures; on failure a one-line JSON record with the stage name is written
to stderr.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
from pathlib import Path

import numpy as np

from . import io
from .braid import braid_word, classify
from .charges import compute_charges
from .chiral_field import ExternalVariables, GridSpec, MINUS, PLUS, topological_charge
from .cusps import track
from .errors import NumericalError, PlanarStringError, ValidationError
from .plotting import braid_diagram, string_snapshot
from .scattering import forward_scatter, recover_spectrum, synth_nsoliton
from .scenario import ScenarioError, load_scenario
from .worldsheet import reconstruct

COMMANDS = ("synth", "spectrum", "worldsheet", "charges", "cusps", "braid", "pipeline")
_NAMES = {PLUS: "plus", MINUS: "minus"}


@contextlib.contextmanager
def stage(name):
    try:
        yield
    except PlanarStringError as exc:
        if exc.stage is None:
            exc.stage = name
        raise


class Run:
    """Lazily computed stages of one scenario, sharing intermediate results."""

    def __init__(self, sc, threads=1, log=print):
        self.sc = sc
        self.threads = threads
        self.log = log
        self.out = Path(sc.out_dir)
        self._fields = None
        self._tracked = None

    def path(self, name):
        return self.out / name

    @property
    def fields(self):
        if self._fields is None:
            with stage("synth"):
                sc = self.sc
                out = []
                for s in (PLUS, MINUS):
                    if s in sc.field_files:
                        f = io.read_field_csv(sc.field_files[s], s, sc.tolerances)
                        if f.grid != sc.grid:
                            raise ValidationError(f"field file {sc.field_files[s]} is not on the scenario grid "
                                                  f"(L={sc.grid.L}, N={sc.grid.N})")
                    else:
                        f = synth_nsoliton(sc.spectra[s], sc.grid, sc.tolerances)
                    out.append(f)
                self._fields = tuple(out)
        return self._fields

    def synth(self):
        fp, fm = self.fields
        with stage("synth"):
            summary = {"name": self.sc.name,
                       "n_plus": topological_charge(fp, self.sc.tolerances),
                       "n_minus": topological_charge(fm, self.sc.tolerances),
                       "total_plus": fp.total, "total_minus": fm.total}
            for f in (fp, fm):
                io.write_field_csv(self.path(f"rho_{_NAMES[f.chirality]}.csv"), f)
            io.write_json(self.path("synth.json"), summary)
        self.log(f"synth: n_plus={summary['n_plus']} n_minus={summary['n_minus']}")
        return summary

    def spectrum(self):
        sc = self.sc
        lam = np.linspace(-sc.lambda_max, sc.lambda_max, sc.n_lambda)
        spectra, summary = [], {}
        with stage("spectrum"):
            for f in self.fields:
                name = _NAMES[f.chirality]
                data = forward_scatter(f, lam, threads=self.threads, tol=sc.tolerances)
                io.write_monodromy_csv(self.path(f"monodromy_{name}.csv"), data)
                spectrum = recover_spectrum(f, threads=self.threads, tol=sc.tolerances)
                spectra.append(spectrum)
                summary[name] = {"parity": data.parity, "max_abs_b": float(np.abs(data.b_values).max()),
                                 "det_error": data.det_error, "n_eigenvalues": len(spectrum)}
            io.write_spectrum_json(self.path("spectrum.json"), spectra)
            io.write_json(self.path("spectrum_summary.json"), summary)
        self.log("spectrum: " + ", ".join(f"{k} {v['n_eigenvalues']} eigenvalue(s)" for k, v in summary.items()))
        return spectra

    def worldsheet(self):
        sc = self.sc
        with stage("worldsheet"):
            xi0 = np.linspace(sc.xi0_min, sc.xi0_max, sc.snapshots) if sc.snapshots > 1 else np.array([sc.xi0_min])
            xi1 = sc.grid.xi[::sc.xi1_stride]
            ws = reconstruct(self.fields, sc.externals, xi0, xi1, threads=self.threads, tol=sc.tolerances)
            io.write_worldsheet_csv(self.path("worldsheet.csv"), ws)
            string_snapshot(ws, self.path("snapshot.svg"), title=sc.name or None)
        self.log(f"worldsheet: {xi0.size} x {xi1.size} nodes, {int(ws.cusp_mask.sum())} cusp node(s)")
        return ws

    def charges(self):
        with stage("charges"):
            ch = compute_charges(self.fields, self.sc.externals, 0.0, self.sc.tolerances)
            io.write_charges_json(self.path("charges.json"), ch)
        self.log(f"charges: P=({ch.P[0]:.6g}, {ch.P[1]:.6g}) J={ch.J:.6g} H={ch.H:.6g}")
        return ch

    def tracked(self):
        if self._tracked is None:
            sc = self.sc
            with stage("cusps"):
                self._tracked = track(self.fields, sc.externals, sc.xi0_range, sc.xi0_step, sc.tolerances)
        return self._tracked

    def cusps(self):
        lines, events = self.tracked()
        with stage("cusps"):
            io.write_cusps_csv(self.path("cusps.csv"), lines)
            io.write_events_json(self.path("events.json"), events)
        n_ev = sum(1 for e in events if e.type in ("birth", "death"))
        self.log(f"cusps: {len(lines)} line(s), {n_ev} birth/death event(s)")
        return lines, events

    def braid(self):
        lines, events = self.tracked()
        with stage("braid"):
            word = braid_word(lines, window=self.sc.xi0_range, tol=self.sc.tolerances)
            io.write_braid_json(self.path("braid.json"), word)
            io.write_json(self.path("braid_summary.json"), classify(word))
            braid_diagram(lines, self.path("braid.svg"), events, title=self.sc.name or None)
        self.log(f"braid: {word.n_strands} strand(s), word {word.letters()}, tangle={word.tangle}")
        return word

    def pipeline(self):
        self.synth()
        self.spectrum()
        self.worldsheet()
        self.charges()
        self.cusps()
        self.braid()


def _apply_overrides(sc, args):
    g = sc.grid
    if args.L is not None or args.N is not None:
        N = args.N if args.N is not None else g.N
        if N & (N - 1):
            raise ScenarioError(f"--N {N} is not a power of two", field="grid.N")
        sc.grid = GridSpec(args.L if args.L is not None else g.L, N)
    e = sc.externals
    if any(v is not None for v in (args.kappa, args.beta, args.gamma)):
        sc.externals = ExternalVariables(e.kappa if args.kappa is None else args.kappa,
                                         e.beta if args.beta is None else args.beta, e.Z,
                                         e.gamma if args.gamma is None else args.gamma)
    for name in ("xi0_min", "xi0_max", "xi0_step"):
        v = getattr(args, name)
        if v is not None:
            setattr(sc, name, v)
    if sc.xi0_max < sc.xi0_min or not sc.xi0_step > 0:
        raise ScenarioError("invalid xi0 window after overrides", field="grid")
    if args.out is not None:
        sc.out_dir = Path(args.out)
    if args.tol:
        kw = {}
        for item in args.tol:
            key, sep, val = item.partition("=")
            if not sep:
                raise ScenarioError(f"--tol expects NAME=VALUE, got {item!r}", field="tolerances")
            kw[key] = float(val)
        sc.tolerances = sc.tolerances.replace(**kw)
    return sc


_HELP = {
    "synth": "build rho_plus/rho_minus from the scenario spectra",
    "spectrum": "forward scattering: monodromy tables and recovered spectrum",
    "worldsheet": "reconstruct the world-sheet and draw string snapshots",
    "charges": "evaluate P, J, M, H and the constraint",
    "cusps": "track cusp world-lines and birth/death events",
    "braid": "extract the braid word and draw the braid diagram",
    "pipeline": "run every stage in order",
}


def build_parser():
    p = argparse.ArgumentParser(
        prog="planarstring",
        description="Soliton synthesis, world-sheet, charges and cusp braids of a planar string.",
        epilog="Exit codes: 0 success, 2 invalid input, 3 numerical failure.")
    sub = p.add_subparsers(dest="command", required=True)
    for cmd in COMMANDS:
        s = sub.add_parser(cmd, help=_HELP[cmd], description=_HELP[cmd])
        s.add_argument("scenario", help="scenario JSON file")
        s.add_argument("--out", help="output directory (overrides outputs.dir)")
        s.add_argument("--threads", type=int, default=1, help="worker threads for the dense kernels")
        s.add_argument("--L", type=float, help="grid half-width")
        s.add_argument("--N", type=int, help="number of grid samples (power of two)")
        s.add_argument("--kappa", type=float, help="embedding scale")
        s.add_argument("--beta", type=float, help="rotation angle")
        s.add_argument("--gamma", type=float, help="string tension factor")
        s.add_argument("--xi0-min", dest="xi0_min", type=float, help="first time slice")
        s.add_argument("--xi0-max", dest="xi0_max", type=float, help="last time slice")
        s.add_argument("--xi0-step", dest="xi0_step", type=float, help="time step between slices")
        s.add_argument("--tol", action="append", metavar="NAME=VALUE",
                       help="tolerance override, repeatable (eps_decay, eps_topo, eps_cusp, "
                            "eps_root, eps_braid, eps_geom)")
        s.add_argument("-q", "--quiet", action="store_true", help="suppress progress output")
    return p


def _fail(record, code):
    print(json.dumps(record), file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        return _fail({"error": "ValidationError", "stage": "cli", "message": "--threads must be >= 1"}, 2)
    try:
        sc = _apply_overrides(load_scenario(args.scenario), args)
        run = Run(sc, args.threads, log=(lambda *a: None) if args.quiet else print)
        getattr(run, args.command)()
    except ScenarioError as exc:
        return _fail({**exc.to_record(), "stage": "scenario"}, 2)
    except ValidationError as exc:
        return _fail({"error": type(exc).__name__, "stage": exc.stage or "cli", "message": str(exc)}, 2)
    except NumericalError as exc:
        return _fail({"error": type(exc).__name__, "stage": exc.stage or "cli", "message": str(exc)}, 3)
    except OSError as exc:
        return _fail({"error": "OSError", "stage": "io", "message": str(exc)}, 2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
