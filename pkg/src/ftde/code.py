"""Stabilizer codes, their standard form, and encoder synthesis.

The synthesis follows the constructive recipe for finite-time dissipative
encoders: put the check matrix in standard form (after relabeling qubits so
the upload qubits come first), read the logical operators off the blocks,
solve one symplectic linear system per generator for its correction
operator, and assemble the gauge-qubit operators that carve out the basin of
attraction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .pauli import (
    NoSolutionError,
    PauliOperator,
    PauliParseError,
    check_matrix,
    gf2_rank,
    gf2_row_reduce,
    paulis_from_check,
    pauli_from_string,
    solve_symplectic,
    symplectic_gram,
)
from .report import VerificationReport

__all__ = [
    "InvalidCodeError",
    "SynthesisError",
    "CodeFormatError",
    "StabilizerCode",
    "StandardForm",
    "EncoderPlan",
    "validate_code",
    "standard_form",
    "logical_operators",
    "correction_operators",
    "basin_generators",
    "basin_dimension",
    "basin_free_qubits",
    "nominal_gauge_state",
    "synthesize_plan",
    "plan_from_reference",
    "load_code",
    "code_from_dict",
    "code_to_dict",
    "plan_to_dict",
    "plan_from_dict",
]


class InvalidCodeError(ValueError):
    def __init__(self, message: str, report: VerificationReport | None = None):
        super().__init__(message)
        self.report = report


class SynthesisError(RuntimeError):
    pass


class CodeFormatError(ValueError):
    pass


@dataclass(frozen=True)
class StabilizerCode:
    name: str
    n: int
    generators: tuple[PauliOperator, ...]
    distance: int | None = None
    # operators quoted alongside a code definition; validated, never trusted
    reference_logical_X: tuple[PauliOperator, ...] | None = None
    reference_logical_Z: tuple[PauliOperator, ...] | None = None
    reference_corrections: tuple[PauliOperator, ...] | None = None

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def m(self) -> int:
        return self.n - self.r

    @classmethod
    def from_strings(cls, name: str, stabilizers: Sequence[str], n: int | None = None, **kw) -> "StabilizerCode":
        gens = tuple(pauli_from_string(s) for s in stabilizers)
        if n is None:
            if not gens:
                raise CodeFormatError("n is required when there are no stabilizers")
            n = gens[0].n
        conv = {}
        for key in ("reference_logical_X", "reference_logical_Z", "reference_corrections"):
            if kw.get(key) is not None:
                conv[key] = tuple(pauli_from_string(s) for s in kw.pop(key))
        return cls(name, n, gens, **kw, **conv)


def validate_code(code: StabilizerCode) -> VerificationReport:
    rep = VerificationReport(code.name)
    if code.n < 1:
        rep.add("qubit_count", False, details=f"n must be positive, got {code.n}")
        return rep
    bad_n = [i for i, g in enumerate(code.generators) if g.n != code.n]
    rep.add("generator_sizes", not bad_n, details=f"generators with wrong length: {bad_n}" if bad_n else "")
    if bad_n:
        return rep
    signed = [i for i, g in enumerate(code.generators) if g.sign_exponent != 0]
    rep.add(
        "positive_hermitian_generators",
        not signed,
        details=f"generators not +1-signed Pauli products: {[str(code.generators[i]) for i in signed]}" if signed else "",
    )
    gens = code.generators
    for i in range(len(gens)):
        for j in range(i + 1, len(gens)):
            ok = gens[i].commutes(gens[j])
            rep.add(
                f"commute[S{i + 1},S{j + 1}]",
                ok,
                residual=0.0 if ok else 1.0,
                details="" if ok else f"{gens[i]} and {gens[j]} anticommute",
            )
    rank = gf2_rank(check_matrix(list(gens), code.n)) if gens else 0
    rep.add("independence", rank == code.r, residual=float(code.r - rank), details=f"rank {rank} of {code.r} generators")
    return rep


@dataclass(frozen=True)
class StandardForm:
    """Check matrix in standard form under a qubit relabeling.

    In permuted coordinates the columns are ordered (upload: m, middle: r-s,
    s-block: s) on both the X and the Z side, with::

        [ A1 A2 I | B 0 C ]   s rows
        [ 0  0  0 | D I E ]   r-s rows

    ``qubit_permutation[i]`` is the original label of permuted position ``i``.
    ``transformed_generators`` are the rows above, written on original labels.
    """

    source: StabilizerCode
    qubit_permutation: tuple[int, ...]
    s: int
    A1: np.ndarray
    A2: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    E: np.ndarray
    transformed_generators: tuple[PauliOperator, ...]

    @property
    def n(self) -> int:
        return self.source.n

    @property
    def r(self) -> int:
        return self.source.r

    @property
    def m(self) -> int:
        return self.n - self.r

    @property
    def upload_qubits(self) -> tuple[int, ...]:
        return self.qubit_permutation[: self.m]

    @property
    def gauge_qubits(self) -> tuple[int, ...]:
        return self.qubit_permutation[self.m :]

    def permuted_matrix(self) -> np.ndarray:
        """Assemble the block matrix in permuted coordinates."""
        m, r, s = self.m, self.r, self.s
        top = np.hstack([self.A1, self.A2, np.eye(s, dtype=np.uint8), self.B, np.zeros((s, r - s), np.uint8), self.C])
        bot = np.hstack(
            [np.zeros((r - s, m + r), np.uint8), self.D, np.eye(r - s, dtype=np.uint8), self.E]
        )
        return np.vstack([top, bot]).astype(np.uint8).reshape(r, 2 * self.n)

    def unpermute(self, mat: np.ndarray) -> np.ndarray:
        """Map a check matrix from permuted to original qubit labels."""
        mat = np.atleast_2d(np.asarray(mat, dtype=np.uint8))
        n = self.n
        out = np.zeros_like(mat)
        perm = np.array(self.qubit_permutation, dtype=int)
        out[:, perm] = mat[:, :n]
        out[:, n + perm] = mat[:, n:]
        return out


def standard_form(code: StabilizerCode) -> StandardForm:
    rep = validate_code(code)
    if not rep.overall:
        names = ", ".join(c.name for c in rep.failures())
        raise InvalidCodeError(f"code {code.name!r} failed validation: {names}", rep)
    n, r = code.n, code.r
    if r == 0:
        empty = np.zeros((0, n), np.uint8)
        return StandardForm(code, tuple(range(n)), 0, empty, np.zeros((0, 0), np.uint8), empty,
                            np.zeros((0, 0), np.uint8), empty, np.zeros((0, 0), np.uint8), ())

    mat = check_matrix(list(code.generators), n)
    # highest-index pivots first: upload qubits end up on the lowest labels
    red_x = gf2_row_reduce(mat, columns=range(n), reverse=True)
    s = red_x.rank
    x_piv = list(red_x.pivots)
    top = red_x.reduced[:s].copy()
    bottom = red_x.reduced[s:]
    rest = [q for q in range(n) if q not in x_piv]
    red_z = gf2_row_reduce(bottom, columns=[n + q for q in rest], reverse=True)
    if red_z.rank != r - s:
        raise SynthesisError("Z block of the standard form is rank deficient")
    z_piv = [c - n for c in red_z.pivots]
    bottom = red_z.reduced
    for i, q in enumerate(z_piv):
        hit = top[:, n + q].astype(bool)
        top[hit] ^= bottom[i]

    upload = sorted(set(range(n)) - set(x_piv) - set(z_piv))
    middle = sorted(z_piv)
    sblock = sorted(x_piv)
    top = top[[x_piv.index(q) for q in sblock]] if s else top
    bottom = bottom[[z_piv.index(q) for q in middle]] if r - s else bottom

    tx, tz = top[:, :n], top[:, n:]
    bz = bottom[:, n:]
    if s and not (np.array_equal(tx[:, sblock], np.eye(s, dtype=np.uint8)) and not tz[:, middle].any()):
        raise SynthesisError("top block of the standard form is malformed")
    if r - s and not (np.array_equal(bz[:, middle], np.eye(r - s, dtype=np.uint8)) and not bottom[:, :n].any()):
        raise SynthesisError("bottom block of the standard form is malformed")

    gens = tuple(paulis_from_check(np.vstack([top, bottom])))
    return StandardForm(
        source=code,
        qubit_permutation=tuple(upload + middle + sblock),
        s=s,
        A1=tx[:, upload].copy(),
        A2=tx[:, middle].copy(),
        B=tz[:, upload].copy(),
        C=tz[:, sblock].copy(),
        D=bz[:, upload].copy(),
        E=bz[:, sblock].copy(),
        transformed_generators=gens,
    )


def logical_operators(sf: StandardForm) -> tuple[list[PauliOperator], list[PauliOperator]]:
    """Canonical logical pairs ``G_x = [I D^T 0 | 0 0 B^T]``, ``G_z = [0 0 0 | I 0 A1^T]``."""
    n, m, r, s = sf.n, sf.m, sf.r, sf.s
    gz = np.zeros((m, 2 * n), np.uint8)
    gx = np.zeros((m, 2 * n), np.uint8)
    eye = np.eye(m, dtype=np.uint8)
    gz[:, n : n + m] = eye
    gz[:, 2 * n - s :] = sf.A1.T
    gx[:, :m] = eye
    gx[:, m : m + r - s] = sf.D.T
    gx[:, 2 * n - s :] = sf.B.T
    lx = paulis_from_check(sf.unpermute(gx)) if m else []
    lz = paulis_from_check(sf.unpermute(gz)) if m else []

    gens = check_matrix(list(sf.transformed_generators), n)
    if m:
        if r and (symplectic_gram(gens, sf.unpermute(gz)).any() or symplectic_gram(gens, sf.unpermute(gx)).any()):
            raise SynthesisError("logical operators do not commute with the stabilizer")
        gram = symplectic_gram(sf.unpermute(gz), sf.unpermute(gx))
        if not np.array_equal(gram, eye):
            raise SynthesisError("logical operators are not a canonical set")
        if symplectic_gram(sf.unpermute(gx), sf.unpermute(gx)).any() or symplectic_gram(sf.unpermute(gz), sf.unpermute(gz)).any():
            raise SynthesisError("logical operators of one type fail to commute")
    return lx, lz


def correction_operators(
    sf: StandardForm, logicals: tuple[Sequence[PauliOperator], Sequence[PauliOperator]]
) -> list[PauliOperator]:
    """Solve ``Sbar Lambda x_i = e_i`` for each stabilizer row ``i``."""
    lx, lz = logicals
    n, r = sf.n, sf.r
    if r == 0:
        return []
    sbar = np.vstack(
        [check_matrix(list(sf.transformed_generators), n), check_matrix(list(lz), n), check_matrix(list(lx), n)]
    )
    out = []
    for i in range(r):
        e = np.zeros(sbar.shape[0], np.uint8)
        e[i] = 1
        try:
            x = solve_symplectic(sbar, e)
        except NoSolutionError as exc:
            raise SynthesisError(f"no correction operator for S{i + 1}: {exc}") from exc
        out.append(PauliOperator.from_row(x))
    return out


def basin_generators(sf: StandardForm) -> tuple[np.ndarray, np.ndarray]:
    """Gauge-qubit check matrices ``Rz = [0 0 | 0 A1^T]`` and ``Rx = [D^T 0 | 0 B^T]``.

    Columns follow ``sf.gauge_qubits`` (middle block, then s-block).
    """
    m, r, s = sf.m, sf.r, sf.s
    rz = np.zeros((m, 2 * r), np.uint8)
    rx = np.zeros((m, 2 * r), np.uint8)
    rz[:, 2 * r - s :] = sf.A1.T
    rx[:, : r - s] = sf.D.T
    rx[:, 2 * r - s :] = sf.B.T
    return rz, rx


def basin_dimension(rz: np.ndarray, rx: np.ndarray) -> int:
    """``2**(r - rank([Rz; Rx]))`` for ``r`` gauge qubits."""
    r = np.asarray(rz).shape[1] // 2
    stacked = np.vstack([np.atleast_2d(rz), np.atleast_2d(rx)])
    rank = gf2_rank(stacked) if stacked.size else 0
    return 2 ** (r - rank)


def basin_worst_case_exponent(n: int, r: int) -> int:
    """log2 of the basin dimension when ``[Rz; Rx]`` has full row rank."""
    return 3 * r - 2 * n


def basin_free_qubits(rz: np.ndarray, rx: np.ndarray) -> list[int]:
    """Gauge positions on which no basin operator acts."""
    r = np.asarray(rz).shape[1] // 2
    stacked = np.vstack([np.atleast_2d(rz), np.atleast_2d(rx)])
    if stacked.size == 0:
        return list(range(r))
    touched = stacked[:, :r].any(axis=0) | stacked[:, r:].any(axis=0)
    return [j for j in range(r) if not touched[j]]


@dataclass(frozen=True)
class NominalGauge:
    pattern: str
    gauge_qubits: tuple[int, ...]

    def full_spec(self, n: int, upload: str = "0", upload_qubits: Sequence[int] = ()) -> str:
        """Product-state spec on all ``n`` qubits, upload qubits set to ``upload``."""
        chars = ["?"] * n
        for q, c in zip(self.gauge_qubits, self.pattern):
            chars[q] = c
        for k, q in enumerate(upload_qubits):
            chars[q] = upload[k] if len(upload) > 1 else upload
        return "".join(chars)


def nominal_gauge_state(sf: StandardForm) -> NominalGauge:
    return NominalGauge("+" * (sf.r - sf.s) + "0" * sf.s, sf.gauge_qubits)


@dataclass(frozen=True)
class EncoderPlan:
    code: StabilizerCode
    ordered_pairs: tuple[tuple[PauliOperator, PauliOperator], ...]
    logical_X: tuple[PauliOperator, ...]
    logical_Z: tuple[PauliOperator, ...]
    upload_qubits: tuple[int, ...]
    gauge_qubits: tuple[int, ...]
    basin_Rz: np.ndarray
    basin_Rx: np.ndarray
    nominal_gauge: str
    order_robust: bool = True
    label: str = field(default="")

    @property
    def n(self) -> int:
        return self.code.n

    @property
    def r(self) -> int:
        return len(self.ordered_pairs)

    @property
    def m(self) -> int:
        return len(self.logical_X)

    @property
    def stabilizers(self) -> list[PauliOperator]:
        return [s for s, _ in self.ordered_pairs]

    @property
    def corrections(self) -> list[PauliOperator]:
        return [c for _, c in self.ordered_pairs]

    @property
    def qubit_permutation(self) -> tuple[int, ...]:
        return self.upload_qubits + self.gauge_qubits

    def basin_operators(self, embed: bool = False) -> list[PauliOperator]:
        """Rows of ``[Rz; Rx]`` as Paulis on the gauge qubits (or on all ``n`` qubits)."""
        rows = np.vstack([np.atleast_2d(self.basin_Rz), np.atleast_2d(self.basin_Rx)])
        if rows.size == 0:
            return []
        ops = paulis_from_check(rows)
        if embed:
            ops = [p.embed(self.n, self.gauge_qubits) for p in ops]
        return ops

    def with_pairs(self, pairs: Sequence[tuple[PauliOperator, PauliOperator]], **changes) -> "EncoderPlan":
        from dataclasses import replace

        return replace(self, ordered_pairs=tuple(pairs), **changes)

    def reordered(self, order: Sequence[int]) -> "EncoderPlan":
        if sorted(order) != list(range(self.r)):
            raise ValueError(f"{list(order)} is not a permutation of 0..{self.r - 1}")
        return self.with_pairs([self.ordered_pairs[k] for k in order])

    def full_nominal_spec(self, upload: str = "0") -> str:
        return NominalGauge(self.nominal_gauge, self.gauge_qubits).full_spec(self.n, upload, self.upload_qubits)


def synthesize_plan(code: StabilizerCode) -> EncoderPlan:
    sf = standard_form(code)
    lx, lz = logical_operators(sf)
    cs = correction_operators(sf, (lx, lz))
    rz, rx = basin_generators(sf)
    return EncoderPlan(
        code=code,
        ordered_pairs=tuple(zip(sf.transformed_generators, cs)),
        logical_X=tuple(lx),
        logical_Z=tuple(lz),
        upload_qubits=sf.upload_qubits,
        gauge_qubits=sf.gauge_qubits,
        basin_Rz=rz,
        basin_Rx=rx,
        nominal_gauge=nominal_gauge_state(sf).pattern,
        order_robust=True,
        label="synthesized",
    )


def plan_from_reference(code: StabilizerCode) -> EncoderPlan:
    """Plan built from the operators quoted with ``code`` (generators kept as given)."""
    if code.reference_corrections is None:
        raise CodeFormatError(f"code {code.name!r} carries no reference corrections")
    if len(code.reference_corrections) != code.r:
        raise CodeFormatError("need exactly one reference correction per generator")
    sf = standard_form(code)
    if code.reference_logical_X is not None and code.reference_logical_Z is not None:
        lx, lz = list(code.reference_logical_X), list(code.reference_logical_Z)
    else:
        lx, lz = logical_operators(sf)
    rz, rx = basin_generators(sf)
    pairs = tuple(zip(code.generators, code.reference_corrections))
    # the quoted corrections may only satisfy the constraints in the given order
    robust = all(c.commutes(s) for k, (_, c) in enumerate(pairs) for j, (s, _) in enumerate(pairs) if j != k)
    return EncoderPlan(
        code=code,
        ordered_pairs=pairs,
        logical_X=tuple(lx),
        logical_Z=tuple(lz),
        upload_qubits=sf.upload_qubits,
        gauge_qubits=sf.gauge_qubits,
        basin_Rz=rz,
        basin_Rx=rx,
        nominal_gauge=nominal_gauge_state(sf).pattern,
        order_robust=robust,
        label="reference",
    )


# -- file formats ---------------------------------------------------------------


def _parse_list(value: Any, what: str) -> list[PauliOperator]:
    if not isinstance(value, list):
        raise CodeFormatError(f"{what} must be a list of Pauli strings")
    try:
        return [pauli_from_string(s) for s in value]
    except (PauliParseError, TypeError) as exc:
        raise CodeFormatError(f"{what}: {exc}") from exc


def code_from_dict(data: dict[str, Any]) -> StabilizerCode:
    if not isinstance(data, dict):
        raise CodeFormatError("code definition must be a JSON object")
    for key in ("name", "n", "stabilizers"):
        if key not in data:
            raise CodeFormatError(f"missing field {key!r}")
    n = data["n"]
    if not isinstance(n, int) or n < 1:
        raise CodeFormatError(f"n must be a positive integer, got {n!r}")
    gens = _parse_list(data["stabilizers"], "stabilizers")
    for g in gens:
        if g.n != n:
            raise CodeFormatError(f"stabilizer {g} has length {g.n}, expected {n}")
    lx = lz = corr = None
    if data.get("logicals") is not None:
        logs = data["logicals"]
        lx = tuple(_parse_list(logs.get("X", []), "logicals.X"))
        lz = tuple(_parse_list(logs.get("Z", []), "logicals.Z"))
    if data.get("corrections") is not None:
        corr = tuple(_parse_list(data["corrections"], "corrections"))
    distance = data.get("distance")
    if distance is not None and not isinstance(distance, int):
        raise CodeFormatError("distance must be an integer")
    return StabilizerCode(str(data["name"]), n, tuple(gens), distance, lx, lz, corr)


def code_to_dict(code: StabilizerCode) -> dict[str, Any]:
    out: dict[str, Any] = {"name": code.name, "n": code.n, "stabilizers": [str(g) for g in code.generators]}
    if code.reference_logical_X is not None:
        out["logicals"] = {
            "X": [str(p) for p in code.reference_logical_X],
            "Z": [str(p) for p in code.reference_logical_Z or ()],
        }
    if code.reference_corrections is not None:
        out["corrections"] = [str(p) for p in code.reference_corrections]
    if code.distance is not None:
        out["distance"] = code.distance
    return out


def load_code(path: str | Path) -> StabilizerCode:
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CodeFormatError(f"{path}: not valid JSON ({exc})") from exc
    return code_from_dict(data)


def plan_to_dict(plan: EncoderPlan) -> dict[str, Any]:
    r = len(plan.gauge_qubits)
    return {
        "code": code_to_dict(plan.code),
        "label": plan.label,
        "ordered_pairs": [{"stabilizer": str(s), "correction": str(c)} for s, c in plan.ordered_pairs],
        "logicals": {"X": [str(p) for p in plan.logical_X], "Z": [str(p) for p in plan.logical_Z]},
        "upload_qubits": list(plan.upload_qubits),
        "gauge_qubits": list(plan.gauge_qubits),
        "permutation": list(plan.qubit_permutation),
        "basin": {
            "Rz": [str(p) for p in paulis_from_check(plan.basin_Rz)] if r else [],
            "Rx": [str(p) for p in paulis_from_check(plan.basin_Rx)] if r else [],
            "dimension": basin_dimension(plan.basin_Rz, plan.basin_Rx),
        },
        "nominal_gauge": plan.nominal_gauge,
        "order_robust": plan.order_robust,
    }


def plan_from_dict(data: dict[str, Any]) -> EncoderPlan:
    try:
        code = code_from_dict(data["code"])
        pairs = tuple(
            (pauli_from_string(p["stabilizer"]), pauli_from_string(p["correction"])) for p in data["ordered_pairs"]
        )
        lx = tuple(_parse_list(data["logicals"]["X"], "logicals.X"))
        lz = tuple(_parse_list(data["logicals"]["Z"], "logicals.Z"))
        upload = tuple(int(q) for q in data["upload_qubits"])
        gauge = tuple(int(q) for q in data["gauge_qubits"])
        r = len(gauge)
        rz_ops = _parse_list(data["basin"]["Rz"], "basin.Rz")
        rx_ops = _parse_list(data["basin"]["Rx"], "basin.Rx")
        rz = check_matrix(rz_ops, r) if rz_ops else np.zeros((0, 2 * r), np.uint8)
        rx = check_matrix(rx_ops, r) if rx_ops else np.zeros((0, 2 * r), np.uint8)
        nominal = str(data["nominal_gauge"])
        robust = bool(data.get("order_robust", True))
    except (KeyError, TypeError, PauliParseError) as exc:
        raise CodeFormatError(f"malformed plan: {exc!r}") from exc
    if sorted(upload + gauge) != list(range(code.n)):
        raise CodeFormatError("upload and gauge qubits must partition the register")
    for s, c in pairs:
        if s.n != code.n or c.n != code.n:
            raise CodeFormatError("plan operator length does not match n")
    return EncoderPlan(code, pairs, lx, lz, upload, gauge, rz, rx, nominal, robust, str(data.get("label", "")))
