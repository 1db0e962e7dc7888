"""Stabilizer-state simulation of measure-and-correct maps.

A pure stabilizer state is stored in the usual destabilizer/stabilizer layout:
``x`` and ``z`` have shape ``(2n, n)``.  Rows ``0..n-1`` are destabilizers and
rows ``n..2n-1`` are stabilizer generators, each with a sign bit ``r`` meaning
``(-1)**r * (letters)``.

Measuring a Pauli changes the bit pattern in a way that depends only on bits,
never on signs, and a Pauli correction only flips signs.  All branches of an
encoding run therefore share one bit skeleton and differ only in their sign
vectors.  :class:`BranchEnsemble` exploits this: it stores the skeleton once
plus a ``(branches, n)`` sign matrix, which makes deduplication a call to
``np.unique``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import PauliOperator, pauli_from_string

__all__ = [
    "StabilizerTableau",
    "BranchEnsemble",
    "tableau_from_product",
    "measure_pauli",
    "apply_encoding_map",
    "expectation",
    "run_plan",
    "upload_expectations",
    "check_tableau_encoding",
    "cross_validate_dense",
    "DEFAULT_LEAF_CAP",
]

DEFAULT_LEAF_CAP = 1 << 16


def _pauli_bits(P: PauliOperator) -> tuple[np.ndarray, np.ndarray, int]:
    if not P.is_hermitian:
        raise ValueError(f"{P} is not Hermitian")
    return P.x_bits.astype(np.uint8), P.z_bits.astype(np.uint8), P.sign_exponent // 2


def _anticommuting_rows(x: np.ndarray, z: np.ndarray, px: np.ndarray, pz: np.ndarray) -> np.ndarray:
    return ((x.astype(np.int64) @ pz + z.astype(np.int64) @ px) & 1).astype(bool)


def _product_phase_bit(x1, z1, x2, z2) -> np.ndarray:
    """Sign bit picked up when multiplying letter strings ``(x1, z1)`` by ``(x2, z2)``.

    Works row-wise when the first pair is 2-d.  The i-exponent of the product
    of the two unsigned strings is always 0 or 2 mod 4 for commuting inputs.
    """
    x1 = x1.astype(np.int64)
    z1 = z1.astype(np.int64)
    x2 = x2.astype(np.int64)
    z2 = z2.astype(np.int64)
    g = np.where(
        (x1 == 1) & (z1 == 1),
        z2 - x2,
        np.where((x1 == 1) & (z1 == 0), z2 * (2 * x2 - 1), np.where((x1 == 0) & (z1 == 1), x2 * (1 - 2 * z2), 0)),
    )
    return ((g.sum(axis=-1) % 4) // 2).astype(np.uint8)


@dataclass(frozen=True)
class _Skeleton:
    x: np.ndarray  # (2n, n) uint8
    z: np.ndarray

    @property
    def n(self) -> int:
        return self.x.shape[1]


@dataclass
class _Outcome:
    skeleton: _Skeleton
    random: bool
    pivot: int = -1  # stabilizer index that now holds S (random case)
    outcome_bits: np.ndarray | None = None  # per-branch (deterministic case)
    # random case: signs for the +1 / -1 results, one row per input branch
    signs_plus: np.ndarray | None = None
    signs_minus: np.ndarray | None = None


def _measure(skel: _Skeleton, signs: np.ndarray, S: PauliOperator) -> _Outcome:
    n = skel.n
    sx, sz, rs = _pauli_bits(S)
    anti = _anticommuting_rows(skel.x, skel.z, sx, sz)
    stab_hits = np.flatnonzero(anti[n:])
    if stab_hits.size:
        p = n + int(stab_hits[0])
        x, z = skel.x.copy(), skel.z.copy()
        signs = signs.copy()
        rows = np.flatnonzero(anti)
        rows = rows[rows != p]
        stab_rows = rows[rows >= n]
        if stab_rows.size:
            bits = _product_phase_bit(x[p][None, :], z[p][None, :], x[stab_rows], z[stab_rows])
            signs[:, stab_rows - n] ^= signs[:, [p - n]] ^ bits[None, :]
        x[rows] ^= x[p]
        z[rows] ^= z[p]
        x[p - n], z[p - n] = x[p], z[p]
        x[p], z[p] = sx, sz
        plus, minus = signs.copy(), signs.copy()
        plus[:, p - n] = rs
        minus[:, p - n] = rs ^ 1
        return _Outcome(_Skeleton(x, z), True, pivot=p - n, signs_plus=plus, signs_minus=minus)
    # deterministic: S is (up to sign) a product of the stabilizers paired with
    # the destabilizers it anticommutes with
    rows = np.flatnonzero(anti[:n])
    acc_x = np.zeros(n, dtype=np.uint8)
    acc_z = np.zeros(n, dtype=np.uint8)
    const = 0
    for i in rows:
        const ^= int(_product_phase_bit(skel.x[n + i], skel.z[n + i], acc_x, acc_z))
        acc_x ^= skel.x[n + i]
        acc_z ^= skel.z[n + i]
    acc = (np.bitwise_xor.reduce(signs[:, rows], axis=1) if rows.size else np.zeros(signs.shape[0], np.uint8))
    return _Outcome(skel, False, outcome_bits=(acc ^ const ^ rs).astype(np.uint8))


def _flip_mask(skel: _Skeleton, C: PauliOperator) -> np.ndarray:
    cx, cz, _ = _pauli_bits(C.unsigned)
    return _anticommuting_rows(skel.x[skel.n:], skel.z[skel.n:], cx, cz).astype(np.uint8)


@dataclass(frozen=True)
class StabilizerTableau:
    n: int
    x: np.ndarray
    z: np.ndarray
    r: np.ndarray  # (n,) sign bits of the stabilizer rows
    tracked_observables: tuple[PauliOperator, ...] = ()

    @property
    def state_generators(self) -> list[PauliOperator]:
        out = []
        for i in range(self.n):
            letters = "".join("IXZY"[int(a) + 2 * int(b)] for a, b in zip(self.x[self.n + i], self.z[self.n + i]))
            out.append(pauli_from_string(("-" if self.r[i] else "") + letters))
        return out

    @property
    def _skeleton(self) -> _Skeleton:
        return _Skeleton(self.x, self.z)

    def expectation(self, P: PauliOperator) -> int:
        return expectation(self, P)

    def tracked_expectations(self) -> dict[str, int]:
        return {str(P): expectation(self, P) for P in self.tracked_observables}

    def key(self) -> bytes:
        return self.x.tobytes() + self.z.tobytes() + self.r.tobytes()


_PRODUCT = {"0": ("Z", 0), "1": ("Z", 1), "+": ("X", 0), "-": ("X", 1), "−": ("X", 1), "r": ("Y", 0), "l": ("Y", 1)}


def tableau_from_product(spec: str, tracked: Sequence[PauliOperator] = ()) -> StabilizerTableau:
    """Product stabilizer state from symbols ``0 1 + -`` (``r``/``l`` give the Y eigenstates)."""
    n = len(spec)
    x = np.zeros((2 * n, n), dtype=np.uint8)
    z = np.zeros((2 * n, n), dtype=np.uint8)
    r = np.zeros(n, dtype=np.uint8)
    for q, c in enumerate(spec):
        if c not in _PRODUCT:
            raise ValueError(f"invalid state symbol {c!r} at qubit {q}")
        kind, sign = _PRODUCT[c]
        r[q] = sign
        if kind == "Z":
            x[q, q] = 1  # destabilizer X
            z[n + q, q] = 1
        elif kind == "X":
            z[q, q] = 1
            x[n + q, q] = 1
        else:
            z[q, q] = 1
            x[n + q, q] = z[n + q, q] = 1
    return StabilizerTableau(n, x, z, r, tuple(tracked))


def measure_pauli(t: StabilizerTableau, S: PauliOperator, forced_outcome: int | None = None
                  ) -> tuple[int, StabilizerTableau, bool]:
    """Measure ``S``; returns ``(outcome, post-measurement tableau, deterministic)``.

    For a random outcome, ``forced_outcome`` picks the branch; otherwise +1 is
    taken so the call stays deterministic.
    """
    if forced_outcome not in (None, 1, -1):
        raise ValueError("forced_outcome must be +1, -1 or None")
    res = _measure(t._skeleton, t.r[None, :], S)
    if not res.random:
        out = -1 if res.outcome_bits[0] else 1
        return out, t, True
    out = forced_outcome if forced_outcome is not None else 1
    signs = res.signs_plus if out == 1 else res.signs_minus
    return out, StabilizerTableau(t.n, res.skeleton.x, res.skeleton.z, signs[0], t.tracked_observables), False


def _apply_pauli(t: StabilizerTableau, C: PauliOperator) -> StabilizerTableau:
    flip = _flip_mask(t._skeleton, C)
    return StabilizerTableau(t.n, t.x, t.z, t.r ^ flip, t.tracked_observables)


def apply_encoding_map(t: StabilizerTableau, S: PauliOperator, C: PauliOperator) -> list[tuple[float, StabilizerTableau]]:
    """Measure ``S`` and apply ``C`` on the -1 result; every branch ends stabilized by ``+S``."""
    if S.commutes(C):
        raise ValueError(f"correction {C} must anticommute with {S}")
    res = _measure(t._skeleton, t.r[None, :], S)
    if not res.random:
        return [(1.0, _apply_pauli(t, C) if res.outcome_bits[0] else t)]
    skel = res.skeleton
    plus = StabilizerTableau(t.n, skel.x, skel.z, res.signs_plus[0], t.tracked_observables)
    minus = StabilizerTableau(t.n, skel.x, skel.z, res.signs_minus[0], t.tracked_observables)
    return [(0.5, plus), (0.5, _apply_pauli(minus, C))]


def _expectation_bits(skel: _Skeleton, signs: np.ndarray, P: PauliOperator) -> np.ndarray:
    res = _measure(skel, signs, P)
    if res.random:
        return np.zeros(signs.shape[0], dtype=np.int64)
    return 1 - 2 * res.outcome_bits.astype(np.int64)


def expectation(t: StabilizerTableau, P: PauliOperator) -> int:
    """``+1``/``-1`` if ``+P``/``-P`` is in the stabilizer group, else 0."""
    return int(_expectation_bits(t._skeleton, t.r[None, :], P)[0])


@dataclass
class BranchEnsemble:
    """All measurement branches of a run, sharing one bit skeleton."""

    skeleton: _Skeleton
    signs: np.ndarray  # (branches, n) uint8
    weights: np.ndarray  # (branches,)
    leaf_cap: int = DEFAULT_LEAF_CAP
    seed: int = 0
    coverage: float = 1.0  # probability mass kept after any sampling
    raw_branches: int = 1  # leaves before deduplication, summed over steps
    history: list[dict] = field(default_factory=list)

    @classmethod
    def from_tableau(cls, t: StabilizerTableau, leaf_cap: int = DEFAULT_LEAF_CAP, seed: int = 0) -> "BranchEnsemble":
        return cls(t._skeleton, t.r[None, :].copy(), np.ones(1), leaf_cap, seed)

    @property
    def n(self) -> int:
        return self.skeleton.n

    def __len__(self) -> int:
        return self.signs.shape[0]

    def tableau(self, b: int) -> StabilizerTableau:
        return StabilizerTableau(self.n, self.skeleton.x, self.skeleton.z, self.signs[b].copy())

    def apply_map(self, S: PauliOperator, C: PauliOperator) -> "BranchEnsemble":
        if S.commutes(C):
            raise ValueError(f"correction {C} must anticommute with {S}")
        res = _measure(self.skeleton, self.signs, S)
        flip = _flip_mask(res.skeleton, C)
        if res.random:
            signs = np.concatenate([res.signs_plus, res.signs_minus ^ flip[None, :]])
            weights = np.concatenate([self.weights, self.weights]) / 2
        else:
            signs = self.signs ^ (res.outcome_bits[:, None] * flip[None, :])
            weights = self.weights
        before = signs.shape[0]
        signs, inverse = np.unique(signs, axis=0, return_inverse=True)
        weights = np.bincount(inverse.ravel(), weights=weights, minlength=signs.shape[0])
        coverage = self.coverage
        if signs.shape[0] > self.leaf_cap:
            rng = np.random.default_rng([self.seed, len(self.history)])
            keep = np.sort(rng.choice(signs.shape[0], self.leaf_cap, replace=False, p=weights / weights.sum()))
            coverage *= float(weights[keep].sum() / weights.sum())
            signs, weights = signs[keep], weights[keep] / weights[keep].sum()
        step = {"map": len(self.history), "random": res.random, "branches": before, "distinct": int(signs.shape[0])}
        return BranchEnsemble(res.skeleton, signs, weights, self.leaf_cap, self.seed, coverage,
                              self.raw_branches + before, self.history + [step])

    def expectations(self, P: PauliOperator) -> np.ndarray:
        """Per-branch values in ``{-1, 0, +1}``."""
        return _expectation_bits(self.skeleton, self.signs, P)

    def mean_expectation(self, P: PauliOperator) -> float:
        return float(self.weights @ self.expectations(P) / self.weights.sum())


def run_plan(plan, spec: str, leaf_cap: int = DEFAULT_LEAF_CAP, seed: int = 0) -> BranchEnsemble:
    """Apply every map of ``plan`` to the product state ``spec`` (qubits in natural order)."""
    if len(spec) != plan.n:
        raise ValueError(f"state spec has {len(spec)} symbols for {plan.n} qubits")
    ens = BranchEnsemble.from_tableau(tableau_from_product(spec), leaf_cap, seed)
    for S, C in plan.ordered_pairs:
        ens = ens.apply_map(S, C)
    return ens


_SINGLE = {"0": {"Z": 1}, "1": {"Z": -1}, "+": {"X": 1}, "-": {"X": -1}, "r": {"Y": 1}, "l": {"Y": -1}}


def upload_expectations(plan, upload: str) -> list[tuple[PauliOperator, int]]:
    """Logical observables built from X-bar/Z-bar factors and their expected values.

    For each logical qubit the factor is I, X-bar or Z-bar (never both, so every
    product is Hermitian); the expected value is the product of the single
    upload-qubit expectations.
    """
    from itertools import product

    m = plan.m
    out = []
    for choice in product("IXZ", repeat=m):
        if all(c == "I" for c in choice):
            continue
        op = PauliOperator.identity(plan.n)
        val = 1
        for k, c in enumerate(choice):
            if c == "I":
                continue
            op = op * (plan.logical_X[k] if c == "X" else plan.logical_Z[k])
            val *= _SINGLE[upload[k]].get(c, 0)
        out.append((op, val))
    return out


def check_tableau_encoding(plan, upload: str, leaf_cap: int = DEFAULT_LEAF_CAP, seed: int = 0):
    """Run the plan from the nominal initialization and check every leaf.

    Each leaf must have every stabilizer at +1 and every logical observable at
    the value set by the upload state.
    """
    from .report import VerificationReport

    spec = plan.full_nominal_spec(upload)
    ens = run_plan(plan, spec, leaf_cap, seed)
    rep = VerificationReport(plan.code.name)
    worst = 0
    for S in plan.stabilizers:
        worst = max(worst, int(np.max(np.abs(ens.expectations(S) - 1))))
    rep.add(f"tableau.stabilizers[{upload}]", worst == 0, residual=float(worst),
            details=f"{len(ens)} distinct leaves, coverage {ens.coverage:.3g}")
    bad = []
    for op, val in upload_expectations(plan, upload):
        got = ens.expectations(op)
        if np.any(got != val):
            bad.append(f"{op}: expected {val}, got {sorted(set(got.tolist()))}")
    rep.add(f"tableau.logicals[{upload}]", not bad, residual=float(len(bad)), details="; ".join(bad[:3]))
    return rep, ens


def cross_validate_dense(plan, spec: str, observables: Sequence[PauliOperator], leaf_cap: int = DEFAULT_LEAF_CAP
                         ) -> tuple[float, np.ndarray, np.ndarray]:
    """Largest gap between branch-averaged tableau and dense expectations.

    Returns ``(residual, tableau values, dense values)``.
    """
    from .channels import compose_encoder, expectation as dense_expectation, product_state

    ens = run_plan(plan, spec, leaf_cap)
    tab = np.array([ens.mean_expectation(P) for P in observables])
    rho = compose_encoder(plan).apply(product_state(spec))
    dense = np.array([dense_expectation(rho, P).real for P in observables])
    return float(np.max(np.abs(tab - dense), initial=0.0)), tab, dense
