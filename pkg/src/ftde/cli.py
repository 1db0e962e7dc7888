"""Command-line front end: ``ftde synthesize | verify | simulate | toric``.

Exit codes: 0 when every check passes, 1 when checks ran and at least one
failed, 2 for bad input or usage.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .channels import (
    PreconditionError,
    TooLargeError,
    cde_generator,
    compose_encoder,
    dump_state,
    encoded_state,
    evolve_cde,
    expectation,
    fidelity,
    product_state,
    trace_distance,
)
from .code import (
    CodeFormatError,
    EncoderPlan,
    InvalidCodeError,
    SynthesisError,
    basin_dimension,
    load_code,
    plan_from_dict,
    plan_from_reference,
    plan_to_dict,
    synthesize_plan,
)
from .config import DEFAULT_TOL, MAX_CHANNEL_QUBITS
from .fixtures import BUILTIN_CODES, builtin
from .report import ARTIFACT_VERSION, VerificationReport
from .tableau import BranchEnsemble, check_tableau_encoding, tableau_from_product
from .toric import (
    check_quasi_locality,
    lattice_to_dict,
    parallel_schedule,
    toric_gauge_state,
    toric_neighborhoods,
    toric_plan,
)
from .verify import check_E1, check_E2, check_E3, verify_ftde, verify_plan

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    code: str | None = None
    plan: str | None = None
    out: str | None = None
    tol: float = DEFAULT_TOL.cptp
    seed: int = 0
    ordered: bool = False
    backend: str = "auto"  # auto | dense | tableau
    L: int | None = None
    reference: bool = False
    input: str | None = None
    dump_state: str | None = None
    cde: bool = False
    t_grid: list[float] = field(default_factory=lambda: [float(t) for t in range(51)])
    lattice: str | None = None

    @classmethod
    def from_args(cls, ns: argparse.Namespace) -> "RunConfig":
        backend = "dense" if getattr(ns, "dense", False) else "tableau" if getattr(ns, "tableau", False) else "auto"
        grid = getattr(ns, "t_grid", None)
        kw = dict(
            command=ns.command,
            code=getattr(ns, "code", None),
            plan=getattr(ns, "plan", None),
            out=getattr(ns, "out", None),
            tol=ns.tol,
            seed=ns.seed,
            ordered=getattr(ns, "ordered", False),
            backend=backend,
            L=getattr(ns, "L", None),
            reference=getattr(ns, "reference", False),
            input=getattr(ns, "input", None),
            dump_state=getattr(ns, "dump_state", None),
            cde=getattr(ns, "cde", False),
            lattice=getattr(ns, "lattice", None),
        )
        if grid is not None:
            kw["t_grid"] = parse_grid(grid)
        return cls(**kw)


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            start, stop, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise ValueError
            count = int(round((stop - start) / step)) + 1
            return [start + k * step for k in range(count)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"bad time grid {text!r}; use start:stop:step or a comma list") from None


# -- input resolution ---------------------------------------------------------------------


def resolve_plan(cfg: RunConfig) -> EncoderPlan:
    if cfg.plan:
        path = Path(cfg.plan)
        if not path.exists():
            raise UsageError(f"plan file {path} does not exist")
        try:
            return plan_from_dict(json.loads(path.read_text()))
        except json.JSONDecodeError as exc:
            raise CodeFormatError(f"{path}: not valid JSON ({exc})") from exc
    if not cfg.code:
        raise UsageError("give --code or --plan")
    spec = cfg.code
    if spec.startswith("toric:"):
        try:
            L = int(spec.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad toric size in {spec!r}") from None
        return toric_plan(L)[1]
    if spec.startswith("builtin:"):
        name = spec.split(":", 1)[1]
        if name not in BUILTIN_CODES:
            raise UsageError(f"unknown builtin {name!r}; choose from {', '.join(sorted(BUILTIN_CODES))}")
        code = builtin(name)
    else:
        if not Path(spec).exists():
            raise UsageError(f"code file {spec} does not exist")
        code = load_code(spec)
    if cfg.reference:
        if not code.reference_corrections:
            raise UsageError(f"{code.name} carries no published corrections")
        return plan_from_reference(code)
    return synthesize_plan(code)


def write_json(data: dict, path: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def _finish(rep: VerificationReport, cfg: RunConfig) -> int:
    print(rep.summary())
    if cfg.out:
        Path(cfg.out).write_text(rep.to_json())
    return EXIT_OK if rep.overall else EXIT_FAIL


# -- commands ----------------------------------------------------------------------------


def cmd_synthesize(cfg: RunConfig) -> int:
    plan = resolve_plan(cfg)
    dim = basin_dimension(plan.basin_Rz, plan.basin_Rx) if plan.gauge_qubits else 1
    if plan.r == 0:
        print("warning: no stabilizers; the plan is the identity map", file=sys.stderr)
    print(f"code {plan.code.name}: n={plan.n} r={plan.r} m={plan.m} maps={len(plan.ordered_pairs)}", file=sys.stderr)
    print(f"basin dimension {dim}; nominal gauge state |{plan.nominal_gauge}>", file=sys.stderr)
    for k, (S, C) in enumerate(plan.ordered_pairs):
        print(f"  map {k + 1}: S={S}  C={C}", file=sys.stderr)
    write_json(plan_to_dict(plan), cfg.out)
    return EXIT_OK


def _upload_specs(m: int, count: int = 6) -> list[str]:
    from itertools import product

    specs = ["".join(p) for p in product("0+1-", repeat=m)]
    return specs[:count] if m else [""]


def cmd_verify(cfg: RunConfig) -> int:
    plan = resolve_plan(cfg)
    use_dense = cfg.backend == "dense" or (cfg.backend == "auto" and plan.n <= MAX_CHANNEL_QUBITS)
    if use_dense and plan.n > MAX_CHANNEL_QUBITS:
        raise TooLargeError(f"n={plan.n} exceeds the dense limit of {MAX_CHANNEL_QUBITS}; rerun with --tableau")
    rep = verify_plan(plan, ordered=cfg.ordered, seed=cfg.seed, tol=cfg.tol, dense=use_dense)
    if not use_dense:
        for up in _upload_specs(plan.m):
            rep.extend(check_tableau_encoding(plan, up, seed=cfg.seed)[0])
    return _finish(rep, cfg)


def _initial_state(plan: EncoderPlan, spec: str | None) -> tuple[str, str, bool]:
    """Returns ``(full product spec, upload symbols, start from codeword)``."""
    spec = spec or "0" * plan.m
    codeword = spec.startswith("codeword:")
    if codeword:
        spec = spec.split(":", 1)[1]
    if len(spec) == plan.m:
        upload = spec
        full = plan.full_nominal_spec(upload) if plan.m else plan.nominal_gauge
    elif len(spec) == plan.n and not codeword:
        full = spec
        upload = "".join(spec[q] for q in plan.upload_qubits)
    else:
        raise UsageError(f"--input needs {plan.m} upload symbols or {plan.n} qubit symbols")
    bad = set(full) - set("01+-rl")
    if bad:
        raise UsageError(f"invalid state symbols {sorted(bad)}")
    return full, upload, codeword


def cmd_simulate(cfg: RunConfig) -> int:
    plan = resolve_plan(cfg)
    full, upload, codeword = _initial_state(plan, cfg.input)
    out: dict = {"artifact_version": ARTIFACT_VERSION, "code_name": plan.code.name, "input": cfg.input or upload}
    if cfg.backend == "tableau":
        if codeword or cfg.cde:
            raise UsageError("the tableau backend runs the discrete maps from product inputs only")
        rows = []
        ens = BranchEnsemble.from_tableau(tableau_from_product(full), seed=cfg.seed)
        for k, (S, C) in enumerate(plan.ordered_pairs):
            ens = ens.apply_map(S, C)
            rows.append({"step": k + 1, "branches": len(ens),
                         "stabilizers": [round(ens.mean_expectation(s), 12) for s in plan.stabilizers]})
            print(f"step {k + 1:3d}  branches {len(ens):6d}  "
                  f"<S> = {' '.join(f'{v:+.3f}' for v in rows[-1]['stabilizers'])}")
        ok = all(v == 1 for v in rows[-1]["stabilizers"]) if rows else True
        out.update(mode="tableau", trajectory=rows, overall=ok)
        if cfg.out:
            write_json(out, cfg.out)
        return EXIT_OK if ok else EXIT_FAIL

    if plan.n > MAX_CHANNEL_QUBITS:
        raise TooLargeError(f"n={plan.n} exceeds the dense limit of {MAX_CHANNEL_QUBITS}; rerun with --tableau")
    target = encoded_state(product_state(upload), plan)
    rho = target if codeword else product_state(full)
    phi = compose_encoder(plan)
    rows = []
    if cfg.cde:
        gen = cde_generator(phi)
        prev = None
        monotone = True
        for t in cfg.t_grid:
            state = evolve_cde(gen, rho, t)
            td = trace_distance(state, target)
            if prev is not None and td > prev + cfg.tol:
                monotone = False
            prev = td
            rows.append({"t": t, "fidelity": fidelity(target, state), "trace_distance": td})
            print(f"t={t:8.3f}  fidelity {rows[-1]['fidelity']:.12f}  trace distance {td:.3e}")
        final = state
        ok = monotone
        out.update(mode="cde")
    else:
        state = rho
        rows.append(_dense_row(0, state, target, plan))
        for k, m in enumerate(phi.maps):
            state = m.apply(state)
            rows.append(_dense_row(k + 1, state, target, plan))
        for row in rows:
            print(f"step {row['step']:3d}  fidelity {row['fidelity']:.12f}  "
                  f"<S> = {' '.join(f'{v:+.3f}' for v in row['stabilizers'])}")
        final = state
        ok = 1 - rows[-1]["fidelity"] <= cfg.tol
        out.update(mode="discrete")
    out.update(trajectory=rows, overall=ok)
    if cfg.dump_state:
        dump_state(final, cfg.dump_state, f"{plan.code.name} output, input {cfg.input or upload}")
    if cfg.out:
        write_json(out, cfg.out)
    return EXIT_OK if ok else EXIT_FAIL


def _dense_row(step: int, state: np.ndarray, target: np.ndarray, plan: EncoderPlan) -> dict:
    return {
        "step": step,
        "fidelity": fidelity(target, state),
        "stabilizers": [round(float(expectation(state, s).real), 12) for s in plan.stabilizers],
    }


def cmd_toric(cfg: RunConfig) -> int:
    L = cfg.L if cfg.L is not None else 2
    if L < 2:
        raise UsageError(f"toric lattice needs L >= 2, got {L}")
    lat, plan = toric_plan(L)
    dense = cfg.backend == "dense" or (cfg.backend == "auto" and L == 2)
    if dense and plan.n > MAX_CHANNEL_QUBITS:
        raise TooLargeError(f"L={L} gives n={plan.n} > {MAX_CHANNEL_QUBITS}; drop --dense to use the tableau backend")
    rep = VerificationReport(plan.code.name)
    rep.extend(check_E1(plan, ordered=True))
    rep.extend(check_E2(plan)[0])
    rep.extend(check_E3(plan))
    rep.extend(check_quasi_locality(plan, toric_neighborhoods(lat)))
    if dense:
        rng = np.random.default_rng(cfg.seed)
        gauge = [("nominal", toric_gauge_state(lat, plan)), ("random_D", toric_gauge_state(lat, plan, rng))]
        rep.extend(verify_ftde(plan, gauge_states=gauge, tol=cfg.tol))
    else:
        for up in _upload_specs(plan.m):
            rep.extend(check_tableau_encoding(plan, up, seed=cfg.seed)[0])
    depth = len(parallel_schedule(plan.ordered_pairs))
    rep.add("schedule_depth", True, details=f"{depth} layers for {plan.r} maps")
    print(f"toric L={L}: n={plan.n} maps={plan.r} schedule depth={depth}")
    if cfg.lattice:
        write_json(lattice_to_dict(lat, plan), cfg.lattice)
    return _finish(rep, cfg)


COMMANDS = {"synthesize": cmd_synthesize, "verify": cmd_verify, "simulate": cmd_simulate, "toric": cmd_toric}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=DEFAULT_TOL.cptp, help="numerical tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="output file (plan or report JSON)")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--code", help="builtin:NAME, toric:L, or a code JSON file")
    source.add_argument("--plan", help="plan JSON file (overrides --code)")
    source.add_argument("--reference", action="store_true", help="use the published corrections of a builtin code")

    backend = argparse.ArgumentParser(add_help=False)
    group = backend.add_mutually_exclusive_group()
    group.add_argument("--dense", action="store_true")
    group.add_argument("--tableau", action="store_true")

    p = argparse.ArgumentParser(prog="ftde", description="Finite-time dissipative encoders for stabilizer codes")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("synthesize", parents=[common, source], help="build an encoder plan")
    v = sub.add_parser("verify", parents=[common, source, backend], help="run the verification battery")
    v.add_argument("--ordered", action="store_true", help="only require the ordered commutation conditions")
    s = sub.add_parser("simulate", parents=[common, source, backend], help="step through the encoder")
    s.add_argument("--input", help="upload symbols, full product spec, or codeword:SYMBOLS")
    s.add_argument("--cde", action="store_true", help="continuous-time evolution exp(t(Phi - I))")
    s.add_argument("--t-grid", dest="t_grid", help="start:stop:step or comma list (default 0:50:1)")
    s.add_argument("--dump-state", dest="dump_state", help="write the final density matrix here")
    t = sub.add_parser("toric", parents=[common, backend], help="toric-code construction and checks")
    t.add_argument("--L", type=int, default=2)
    t.add_argument("--lattice", help="write the lattice, plan and schedule JSON here")
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = RunConfig.from_args(ns)
        return COMMANDS[cfg.command](cfg)
    except InvalidCodeError as exc:
        failed = ", ".join(c.name for c in exc.report.failures()) if exc.report else ""
        print(f"error: invalid code: {exc}" + (f" (failed: {failed})" if failed else ""), file=sys.stderr)
    except (UsageError, CodeFormatError, SynthesisError, TooLargeError, PreconditionError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
