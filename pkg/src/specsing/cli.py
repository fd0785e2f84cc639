"""Command-line front end.

Every command reads an optional JSON scene (``--config``).  A config holding a
list of scenes is a sweep: each scene runs in its own process and writes into
``OUT/run-NNN``.  Exit codes: 0 success, 2 invalid input, 3 numerical failure,
4 no plateau found.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional, TextIO

import numpy as np
from pydantic import ValidationError

from . import cavity, solver, wavefield
from .config import SceneConfig, SimSpec, parse_scene
from .errors import SingularAmplitudeError
from .scatter import HARD_WALL, composite_matrix, prepare_centers

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3
EXIT_NOT_CONVERGED = 4


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _json_float(x: Optional[float]):
    return None if x is None or not math.isfinite(x) else float(x)


def _dump_json(obj, stream: TextIO) -> None:
    json.dump(obj, stream, indent=2, sort_keys=True)
    stream.write("\n")


def _k_grid(scene: SceneConfig, opts: dict) -> np.ndarray:
    k_min = opts.get("k_min") if opts.get("k_min") is not None else scene.solver.k_min
    k_max = opts.get("k_max") if opts.get("k_max") is not None else scene.solver.k_max
    points = opts.get("k_points") or scene.solver.grid_points
    if k_min is None or k_max is None:
        raise ValueError("a k range is required: set solver.k_min/k_max or pass --k-min/--k-max")
    if not 0 <= k_min < k_max:
        raise ValueError(f"need 0 <= k_min < k_max, got {k_min}, {k_max}")
    if points < 2:
        raise ValueError(f"need at least 2 k points, got {points}")
    return np.linspace(k_min, k_max, points)


def _open_out(out: Optional[Path], name: str, stdout: TextIO):
    if out is None:
        return stdout, False
    out.mkdir(parents=True, exist_ok=True)
    return open(out / name, "w", newline=""), True


# -- commands ---------------------------------------------------------------

def cmd_amplitudes(scene: SceneConfig, opts: dict, out: Optional[Path], stdout: TextIO) -> int:
    centers = prepare_centers(scene.scattering_centers())
    if any(c.kind == HARD_WALL for c in centers):
        raise ValueError("amplitudes are not defined with a hard wall; use find-ss")
    ks = _k_grid(scene, opts)
    stream, close = _open_out(out, "amplitudes.csv", stdout)
    try:
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["k", "re_r_left", "im_r_left", "re_r_right", "im_r_right",
                         "re_t_left", "im_t_left", "re_t_right", "im_t_right", "abs_m22"])
        for k in ks:
            try:
                m = composite_matrix(centers, k)
                amps = m.amplitudes()
                row = [amps.r_left, amps.r_right, amps.t_left, amps.t_right]
                m22 = abs(m.m22)
            except SingularAmplitudeError:
                row = [complex(math.nan, math.nan)] * 4
                m22 = 0.0
            cells = [_fmt(k)]
            for z in row:
                cells += [_fmt(z.real), _fmt(z.imag)]
            writer.writerow(cells + [_fmt(m22)])
    finally:
        if close:
            stream.close()
    return EXIT_OK


def cmd_find_ss(scene: SceneConfig, opts: dict, out: Optional[Path], stdout: TextIO) -> int:
    ks = _k_grid(scene, opts)
    tol = opts.get("tolerance") or scene.solver.tolerance
    query = solver.SsQuery(tuple(scene.scattering_centers()), float(ks[0]), float(ks[-1]), len(ks), tol)
    results = solver.find_ss(query)
    payload = [{"k_c": r.k_c, "residual": r.residual, "multiplicity_hint": r.multiplicity_hint}
               for r in results]
    stream, close = _open_out(out, "ss.json", stdout)
    try:
        _dump_json(payload, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _center(kind: str, position: float, strength: complex) -> dict:
    return {"kind": kind, "position": position, "strength": [strength.real, strength.imag]}


def cmd_design(args: argparse.Namespace, stdout: TextIO) -> int:
    if args.system == "two-delta":
        V1, V2, d = solver.design_two_delta(args.k_c, args.split, args.m)
        design = {"V1": V1, "V2": V2, "spacing": d, "k_c": args.k_c}
        scene = {"model": {"type": "continuous"},
                 "centers": [_center("continuous-delta", 0.0, 1j * V1),
                             _center("continuous-delta", d, 1j * V2)]}
    elif args.system == "lattice-pair":
        gamma, V = solver.design_lattice_pair(args.k_c, args.a, args.kappa)
        design = {"gamma": gamma, "V": V, "a": args.a, "kappa": args.kappa, "k_c": args.k_c}
        scene = {"model": {"type": "lattice", "kappa": args.kappa},
                 "centers": [_center("lattice-site", 0, 1j * gamma),
                             _center("lattice-site", args.a, complex(V))]}
    else:
        k_c, a = solver.design_cavity(args.gamma, args.n)
        design = {"gamma": args.gamma, "n": args.n, "a": a, "k_c": k_c}
        scene = {"model": {"type": "continuous"},
                 "centers": [_center("hard-wall", 0.0, 0j),
                             _center("continuous-delta", a, 1j * args.gamma)]}
    # the scene must itself be valid so it can be fed back with --config
    SceneConfig.model_validate(scene)
    _dump_json({"design": design, "scene": scene}, stdout)
    return EXIT_OK


def cmd_wave(scene: SceneConfig, opts: dict, out: Optional[Path], stdout: TextIO) -> int:
    spec = scene.wave
    if spec is None:
        raise ValueError("the scene has no 'wave' section")
    if spec.type == "two-delta":
        cs = prepare_centers(scene.scattering_centers())
        if len(cs) != 2 or any(c.kind != "continuous-delta" or abs(c.strength.real) > 0 for c in cs):
            raise ValueError("a two-delta wave needs exactly two purely imaginary continuous deltas")
        wave = wavefield.two_delta_ss_wave(cs[0].strength.imag, cs[1].strength.imag,
                                           cs[0].position, cs[1].position)
    elif spec.type in ("cavity", "initial"):
        sim = scene.resolved_sim()
        k = spec.k if spec.k is not None else sim["k_c"]
        if spec.type == "cavity":
            wave = wavefield.cavity_wave(k, sim["gamma"], sim["a"])
        else:
            wave = wavefield.initial_cavity_state(k, sim["a"])
    else:
        if spec.k is None:
            raise ValueError("wave.k is required for Jost waves")
        wave = wavefield.jost_wave(scene.scattering_centers(), spec.k, spec.type.split("-")[1])
    xs = np.linspace(spec.x_min, spec.x_max, spec.points)
    stream, close = _open_out(out, "wave.csv", stdout)
    try:
        wavefield.write_csv(wave, xs, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


def _resolve_sim(scene: SceneConfig, opts: dict) -> dict:
    overrides = {key: opts[key] for key in ("dx", "dt", "length") if opts.get(key) is not None}
    if overrides:
        sim = SimSpec.model_validate({**scene.sim.model_dump(), **overrides})
        scene = scene.model_copy(update={"sim": sim})
    return scene.resolved_sim()


def _run_cavity(sim: dict, dx: float):
    grid = sim["k_grid"]
    model = cavity.build_lattice(sim["gamma"], sim["a"], sim["length"], dx, k=max(grid["k_max"], sim["k_c"]))
    t_end = sim["t_end"] if sim["t_end"] is not None else model.guard_time
    if t_end > model.guard_time * (1 + 1e-12):
        raise ValueError(f"t_end = {t_end} exceeds the reflection guard {model.guard_time:.6g}")
    state = cavity.initial_state(model, sim["k_c"])
    dt = sim["dt"] if dx == sim["dx"] else sim["dt"] * (dx / sim["dx"]) ** 2
    run = cavity.simulate(model, state, dt, t_end, sim["k_c"], sim["sample_interval"], symmetric=sim["symmetric"])
    ks = np.linspace(grid["k_min"], grid["k_max"], grid["points"])
    spec = cavity.k_spectrum(model, run.final, ks, sim["symmetric"])
    return model, t_end, run, spec


def _write_trace(run: cavity.SimulationRun, path: Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["t", "re_F", "im_F", "abs_F", "norm"])
        for t, v, n in zip(run.trace.times, run.trace.values, run.norms):
            writer.writerow([_fmt(t), _fmt(v.real), _fmt(v.imag), _fmt(abs(v)), _fmt(n)])


def _write_spectrum(spec: cavity.KSpectrum, stream: TextIO) -> None:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["k", "abs_F"])
    for k, v in zip(spec.k, spec.values):
        writer.writerow([_fmt(k), _fmt(v)])


def _check_window(sim: dict) -> None:
    if sim["t_end"] is not None and sim["window"] > sim["t_end"]:
        raise ValueError(f"plateau window {sim['window']} exceeds t_end = {sim['t_end']}")


def cmd_simulate(scene: SceneConfig, opts: dict, out: Optional[Path], stdout: TextIO) -> int:
    if out is None:
        raise ValueError("simulate needs --out")
    sim = _resolve_sim(scene, opts)
    _check_window(sim)
    model, t_end, run, spec = _run_cavity(sim, sim["dx"])
    try:
        t_f = cavity.relaxation_time(run.trace, sim["window"], sim["epsilon"], sim["relative"])
        plateau_note = None
    except ValueError as exc:
        t_f, plateau_note = None, str(exc)

    out.mkdir(parents=True, exist_ok=True)
    _write_trace(run, out / "trace.csv")
    with open(out / "spectrum.csv", "w", newline="") as f:
        _write_spectrum(spec, f)
    with open(out / "final_state.csv", "w", newline="") as f:
        cavity.write_checkpoint(run.final, f)

    manifest = {
        "config": {**scene.model_dump(mode="json"), "sim": sim},
        "k_c": sim["k_c"],
        "n_sites": model.n_sites,
        "guard_time": model.guard_time,
        "t_end": t_end,
        "fidelity_window": [0.0, model.length],
        "t_f": t_f,
        "final_abs_F": float(run.trace.magnitude[-1]),
        "final_norm": float(run.norms[-1]),
        "peak_k": spec.peak_k,
        "fwhm": _json_float(spec.fwhm),
        "status": "converged" if t_f is not None else "not-converged",
        "note": plateau_note,
    }
    if sim["convergence"]:
        _, _, run2, spec2 = _run_cavity(sim, sim["dx"] / 2)
        try:
            t_f2 = cavity.relaxation_time(run2.trace, sim["window"], sim["epsilon"], sim["relative"])
        except ValueError:
            t_f2 = None
        manifest["convergence"] = {
            "dx_refined": sim["dx"] / 2,
            "delta_final_abs_F": abs(float(run2.trace.magnitude[-1]) - manifest["final_abs_F"]),
            "delta_peak_k": abs(spec2.peak_k - spec.peak_k),
            "delta_fwhm": _json_float(abs(spec2.fwhm - spec.fwhm)),
            "delta_t_f": None if t_f is None or t_f2 is None else abs(t_f2 - t_f),
        }
    with open(out / "manifest.json", "w") as f:
        _dump_json(manifest, f)
    if t_f is None:
        print(f"no plateau of width {sim['window']} within epsilon = {sim['epsilon']}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_spectrum(scene: SceneConfig, opts: dict, out: Optional[Path], stdout: TextIO) -> int:
    sim = _resolve_sim(scene, opts)
    grid = sim["k_grid"]
    ks = np.linspace(grid["k_min"], grid["k_max"], grid["points"])
    if opts.get("checkpoint"):
        with open(opts["checkpoint"]) as f:
            state = cavity.read_checkpoint(f)
        model = cavity.build_lattice(sim["gamma"], sim["a"], sim["length"], state.dx, k=grid["k_max"])
        if model.n_sites != len(state.amplitudes):
            raise ValueError("checkpoint does not match the scene's lattice")
        spec = cavity.k_spectrum(model, state, ks, sim["symmetric"])
    else:
        _, _, _, spec = _run_cavity(sim, sim["dx"])
    stream, close = _open_out(out, "spectrum.csv", stdout)
    try:
        _write_spectrum(spec, stream)
    finally:
        if close:
            stream.close()
    return EXIT_OK


SCENE_COMMANDS = {
    "amplitudes": cmd_amplitudes,
    "find-ss": cmd_find_ss,
    "wave": cmd_wave,
    "simulate": cmd_simulate,
    "spectrum": cmd_spectrum,
}


# -- dispatch ---------------------------------------------------------------

def _guarded(fn, *args) -> int:
    try:
        return fn(*args)
    except ValidationError as exc:
        print(f"invalid configuration:\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


def _run_one(command: str, data: dict, opts: dict, out: Optional[str]) -> int:
    def go():
        scene = SceneConfig.model_validate(data)
        return SCENE_COMMANDS[command](scene, opts, Path(out) if out else None, sys.stdout)
    return _guarded(go)


def _load_config(path: Optional[str]):
    if path is None:
        return {}
    with open(path) as f:
        try:
            return json.load(f)
        except json.JSONDecodeError as exc:
            raise ValueError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None


def _scene_command(args: argparse.Namespace) -> int:
    data = _load_config(args.config)
    opts = {key: getattr(args, key, None) for key in
            ("k_min", "k_max", "k_points", "tolerance", "dx", "dt", "length", "checkpoint")}
    if not isinstance(data, list):
        return _run_one(args.command, data, opts, args.out)
    if args.out is None:
        raise ValueError("a sweep (a list of scenes) needs --out")
    parse_scene(data)  # validate the whole sweep before starting any run
    out = Path(args.out)
    jobs = [(args.command, d, opts, str(out / f"run-{i:03d}")) for i, d in enumerate(data)]
    with ProcessPoolExecutor(max_workers=max(1, min(args.workers, len(jobs)))) as pool:
        codes = list(pool.map(_run_one, *zip(*jobs)))
    return max(codes, default=EXIT_OK)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON scene (or list of scenes for a sweep)")
    common.add_argument("--out", help="output directory; CSV/JSON go to stdout when omitted")
    common.add_argument("--seedless", action="store_true",
                        help="accepted for scripts; every run is deterministic anyway")
    common.add_argument("--workers", type=int, default=1, help="parallel runs for a sweep")

    kgrid = argparse.ArgumentParser(add_help=False)
    kgrid.add_argument("--k-min", type=float)
    kgrid.add_argument("--k-max", type=float)
    kgrid.add_argument("--k-points", type=int)

    lattice = argparse.ArgumentParser(add_help=False)
    lattice.add_argument("--dx", type=float)
    lattice.add_argument("--dt", type=float)
    lattice.add_argument("--length", type=float)

    p = argparse.ArgumentParser(prog="specsing", description="Spectral singularities of 1D scatterers.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("amplitudes", parents=[common, kgrid], help="r and t of the composite on a k grid")
    fs = sub.add_parser("find-ss", parents=[common, kgrid], help="real zeros of m22")
    fs.add_argument("--tolerance", type=float)
    sub.add_parser("wave", parents=[common], help="sample the scene's 'wave' section")
    sub.add_parser("simulate", parents=[common, lattice], help="cavity time evolution")
    sp = sub.add_parser("spectrum", parents=[common, lattice], help="|F(k)| of an evolved cavity")
    sp.add_argument("--checkpoint", help="final_state.csv from a previous simulate run")

    d = sub.add_parser("design", help="parameters with a singularity at a chosen k")
    dsub = d.add_subparsers(dest="system", required=True)
    td = dsub.add_parser("two-delta")
    td.add_argument("--k-c", type=float, required=True)
    td.add_argument("--split", type=float, default=0.5, help="V1 / k_c")
    td.add_argument("--m", type=int, default=1, help="spacing in units of pi / k_c")
    lp = dsub.add_parser("lattice-pair")
    lp.add_argument("--k-c", type=float, required=True)
    lp.add_argument("--a", type=int, required=True, help="site separation")
    lp.add_argument("--kappa", type=float, default=1.0)
    cv = dsub.add_parser("cavity")
    cv.add_argument("--gamma", type=float, default=1.0)
    cv.add_argument("--n", type=int, default=20)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "design":
        return _guarded(cmd_design, args, sys.stdout)
    return _guarded(_scene_command, args)


if __name__ == "__main__":
    sys.exit(main())
