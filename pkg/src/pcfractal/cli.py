"""Command-line front end.

All numerics live in the library; the CLI parses flags, orchestrates the
pipelines and writes schema-stable CSV/JSON artifacts.  Exit status is 0 iff
every requested check passed its declared tolerance, 1 on a failed check,
2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import definition as defs
from . import fredholm, harmonic, spectra, structure
from .reports import fmt, meta_block, write_csv, write_json


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="pcfractal",
        description="Spectral and Fredholm-module invariants of self-similar fractals",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, level_default=4):
        src = p.add_mutually_exclusive_group(required=True)
        src.add_argument("--preset", help="embedded structure name (interval, gasket)")
        src.add_argument("--def", dest="def_path", help="path to a definition JSON file")
        p.add_argument("--level", type=int, default=level_default, metavar="M")
        p.add_argument("--mu", help="comma-separated measure weights override")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--tol", type=float, default=None, help="tolerance override")
        p.add_argument("--max-level", type=int, default=10)

    p = sub.add_parser("describe", help="structure summary, harmonic check, d_S")
    common(p, level_default=1)

    p = sub.add_parser("spectrum", help="eigensolve; writes spectrum.csv")
    common(p, level_default=6)
    p.add_argument("--bc", choices=["dirichlet", "neumann"], default="dirichlet")

    p = sub.add_parser("weyl", help="counting-function fit; writes weyl.json")
    common(p, level_default=6)
    p.add_argument("--bc", choices=["dirichlet", "neumann"], default="dirichlet")

    p = sub.add_parser("kernels", help="Green/heat/potential kernels; writes kernels.json")
    common(p, level_default=6)
    p.add_argument("--p", type=float, default=None, help="potential exponent in (d_S, 2]")

    p = sub.add_parser("commutator", help="commutator spectrum and summability reports")
    common(p, level_default=4)
    p.add_argument("--p", type=float, default=None, help="Schatten exponent in (d_S, 2]")
    p.add_argument("--fn", default=None, help="function spec, inline JSON or path")

    p = sub.add_parser("invariance", help="self-similar invariance of the energy functional")
    common(p, level_default=4)
    p.add_argument("--fn", default=None, help="function spec, inline JSON or path")
    return ap


class _Ctx:
    def __init__(self, args):
        self.doc = defs.load_definition(args.preset or args.def_path)
        self.S = defs.structure_from_definition(self.doc)
        self.hs = defs.harmonic_from_definition(self.doc)
        mu = None
        if args.mu:
            mu = [float(x) for x in args.mu.split(",")]
        self.mw = defs.measure_from_definition(self.doc, override=mu)
        self.se = spectra.solve_spectral_exponent(self.hs, self.mw)
        if args.level > args.max_level:
            raise ValueError(f"level {args.level} exceeds configured max {args.max_level}")
        self.level = args.level
        self.seed = args.seed
        self.out = Path(args.out)
        self.meta = meta_block(self.doc, args.seed)

    def energy_form(self, m=None):
        return harmonic.assemble_energy(self.S, self.hs, self.level if m is None else m)

    def spectral_data(self, ef, bc):
        mass = spectra.mass_vector(self.S, self.hs, self.mw, ef.level, cm=ef.complex)
        return spectra.eigensolve(ef, mass, bc)


def _parse_fn_spec(raw: str | None, seed: int) -> dict:
    if raw is None:
        return {"type": "random-harmonic", "level": 0, "seed": seed}
    text = raw
    p = Path(raw)
    if not raw.lstrip().startswith("{") and p.exists():
        text = p.read_text()
    spec = json.loads(text)
    if spec.get("type") not in ("harmonic", "random-harmonic"):
        raise ValueError(f"unknown function spec type {spec.get('type')!r}")
    return spec


def _make_function(ctx: _Ctx, spec: dict, m: int) -> tuple[np.ndarray, str]:
    m0 = int(spec.get("level", 0))
    if spec["type"] == "harmonic":
        vals = np.asarray(spec["boundary_values"], dtype=float)
        a = harmonic.harmonic_function(ctx.S, ctx.hs, m0, m, boundary_values=vals)
        return a, f"harmonic(level={m0})"
    seed = int(spec.get("seed", ctx.seed))
    a = harmonic.harmonic_function(ctx.S, ctx.hs, m0, m, seed=seed)
    return a, f"random-harmonic(level={m0},seed={seed})"


def cmd_describe(args) -> int:
    ctx = _Ctx(args)
    tol = args.tol if args.tol is not None else 1e-9
    report = harmonic.verify_harmonic(ctx.S, ctx.hs, tol=tol)
    cm1 = structure.build_level(ctx.S, 1)
    nu = spectra.kl_weights(ctx.se)
    payload = {
        "meta": ctx.meta,
        "structure": {
            "name": ctx.S.name,
            "N": ctx.S.N,
            "n0": ctx.S.n0,
            "gluings": [[i, p, j, q] for (i, p), (j, q) in ctx.S.gluings],
            "level1_vertices": cm1.n_vertices,
        },
        "harmonic_verification": report,
        "d_S": ctx.se.d_S,
        "gamma": list(ctx.se.gamma),
        "nu_weights": list(nu),
        "lattice": ctx.se.lattice,
        "pass": report["pass"],
    }
    write_json(ctx.out / "describe.json", payload)
    print(f"{ctx.S.name}: N={ctx.S.N} n0={ctx.S.n0} |V_1|={cm1.n_vertices}")
    print(f"harmonic verification: pass={report['pass']} "
          f"deviation={report['deviation']:.3e} tol={report['tol']:.1e}")
    print(f"d_S={ctx.se.d_S:.10f} lattice={ctx.se.lattice}")
    print(f"nu={np.array2string(nu, precision=6)}")
    return 0 if report["pass"] else 1


def cmd_spectrum(args) -> int:
    ctx = _Ctx(args)
    ef = ctx.energy_form()
    sd = ctx.spectral_data(ef, args.bc)
    rows = [(k, fmt(lam)) for k, lam in enumerate(sd.eigenvalues, start=1)]
    write_csv(ctx.out / "spectrum.csv", "index,eigenvalue", rows)
    write_json(ctx.out / "spectrum.json", {
        "meta": ctx.meta,
        "bc": sd.bc,
        "level": sd.level,
        "count": len(sd.eigenvalues),
        "lambda_min": float(sd.eigenvalues[0]),
        "lambda_max": float(sd.eigenvalues[-1]),
        "pass": True,
    })
    print(f"wrote {ctx.out / 'spectrum.csv'} ({len(sd.eigenvalues)} eigenvalues)")
    return 0


def cmd_weyl(args) -> int:
    ctx = _Ctx(args)
    ef = ctx.energy_form()
    sd = ctx.spectral_data(ef, args.bc)
    tol = args.tol if args.tol is not None else 0.05
    fit = spectra.weyl_fit(sd, ctx.se, slope_tol=tol)
    payload = {"meta": ctx.meta, "bc": sd.bc, "level": sd.level, "d_S": ctx.se.d_S, **fit}
    write_json(ctx.out / "weyl.json", payload)
    print(f"weyl slope={fit['slope']:.4f} expected={fit['expected_slope']:.4f} "
          f"pass={fit['pass']}")
    return 0 if fit["pass"] else 1


def cmd_kernels(args) -> int:
    ctx = _Ctx(args)
    ef = ctx.energy_form()
    sd = ctx.spectral_data(ef, "dirichlet")
    g, sup_g = spectra.green_diagonal(sd)
    heat = spectra.heat_bound_check(sd, ctx.se)
    p = args.p if args.p is not None else min(2.0, ctx.se.d_S + 0.3)
    pot = spectra.potential_kernel(sd, ctx.se, p)
    payload = {
        "meta": ctx.meta,
        "level": sd.level,
        "green": {"sup": sup_g},
        "heat": heat,
        "potential": pot,
    }
    if not ctx.se.lattice:
        vol, band = spectra.spectral_volume_estimate(sd, ctx.se)
        payload["spectral_volume"] = {"estimate": vol, "band": band}
    else:
        payload["spectral_volume"] = {
            "refused": "lattice case: log-contraction ratios are commensurable"
        }
    ok = heat["pass"] and pot["pass"]
    payload["pass"] = bool(ok)
    write_json(ctx.out / "kernels.json", payload)
    rows = [(k, fmt(val)) for k, val in enumerate(g)]
    write_csv(ctx.out / "green_diagonal.csv", "vertex,green", rows)
    print(f"sup g={sup_g:.6g} heat pass={heat['pass']} potential pass={pot['pass']}")
    return 0 if ok else 1


def cmd_commutator(args) -> int:
    ctx = _Ctx(args)
    ef = ctx.energy_form()
    em = fredholm.build_module(ef)
    sd = ctx.spectral_data(ef, "dirichlet")
    spec = _parse_fn_spec(args.fn, ctx.seed)
    a, fn_id = _make_function(ctx, spec, ctx.level)
    cs = fredholm.commutator(em, a, d_S=ctx.se.d_S, function_id=fn_id)
    rows = [(k, fmt(s)) for k, s in enumerate(cs.svals, start=1)]
    write_csv(ctx.out / "svals.csv", "rank,sigma", rows)

    c1 = spectra.c1_estimate(sd, ctx.se)
    p = args.p if args.p is not None else min(2.0, ctx.se.d_S + 0.3)
    energy_a = ef.energy(a)
    sch = fredholm.schatten_report(cs, sd, ctx.se, p, energy_a, c1=c1)
    sums = fredholm.log_averaged_sums(cs, ctx.se.d_S)
    phi = fredholm.energy_functional(em, sd, ctx.se, a, c1=c1)
    payload = {
        "meta": ctx.meta,
        "level": ctx.level,
        "function": fn_id,
        "energy": energy_a,
        "schatten": sch,
        "log_averaged": {
            "max": sums["max"],
            "at_full": sums["at_full"],
            "at_half": sums["at_half"],
            "raw_sum": sums["raw_sum"],
        },
        "energy_functional": phi,
        "pass": bool(sch["ratio"] <= 1.0),
    }
    write_json(ctx.out / "summability.json", payload)
    print(f"{fn_id}: schatten ratio={sch['ratio']:.4f} phi={phi['phi']:.6g}")
    return 0 if payload["pass"] else 1


def cmd_invariance(args) -> int:
    ctx = _Ctx(args)
    m = ctx.level
    ef_c = ctx.energy_form(m)
    ef_f = ctx.energy_form(m + 1)
    em_c = fredholm.build_module(ef_c)
    em_f = fredholm.build_module(ef_f)
    sd_c = ctx.spectral_data(ef_c, "dirichlet")
    spec = _parse_fn_spec(args.fn, ctx.seed)
    a, fn_id = _make_function(ctx, spec, m + 1)
    cell_idx = [
        structure.cell_restriction_indices(ef_c.complex, ef_f.complex, i)
        for i in range(1, ctx.S.N + 1)
    ]
    rep = fredholm.invariance_check(
        em_c, em_f, sd_c, ctx.se, ctx.hs.r, a, cell_idx
    )
    payload = {"meta": ctx.meta, "levels": [m, m + 1], "function": fn_id, **rep}
    payload["pass"] = bool(rep["corollary_pass"] and rep["holder_pass"])
    write_json(ctx.out / "invariance.json", payload)
    print(f"{fn_id}: rel_gap={rep['rel_gap']:.4f} corollary={rep['corollary_pass']} "
          f"holder={rep['holder_pass']}")
    return 0 if payload["pass"] else 1


COMMANDS = {
    "describe": cmd_describe,
    "spectrum": cmd_spectrum,
    "weyl": cmd_weyl,
    "kernels": cmd_kernels,
    "commutator": cmd_commutator,
    "invariance": cmd_invariance,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
