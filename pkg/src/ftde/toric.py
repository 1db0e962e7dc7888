"""Toric code on an L x L torus with a local, ordered encoder.

Edge qubits are indexed as follows (documented here because lattice dumps and
fixtures depend on it).  Vertex ``(r, c)`` sits at row ``r``, column ``c``,
all indices taken mod ``L``.

* horizontal edge ``h(r, c) = r*L + c`` joins vertices ``(r, c)`` and ``(r, c+1)``;
* vertical edge ``v(r, c) = L*L + r*L + c`` joins vertices ``(r, c)`` and ``(r+1, c)``.

Plaquette ``(r, c)`` is the face with lower-left vertex ``(r, c)``; its edges
are S ``h(r, c)``, N ``h(r+1, c)``, W ``v(r, c)``, E ``v(r, c+1)``.  Vertex
``(r, c)`` touches E ``h(r, c)``, W ``h(r, c-1)``, N ``v(r, c)``, S ``v(r-1, c)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


from .code import EncoderPlan, StabilizerCode, SynthesisError, code_to_dict, plan_to_dict, validate_code
from .pauli import PauliOperator, check_matrix
from .report import VerificationReport

__all__ = [
    "ToricLattice",
    "build_toric",
    "toric_logicals",
    "toric_corrections",
    "toric_basin",
    "toric_plan",
    "toric_neighborhoods",
    "check_quasi_locality",
    "parallel_schedule",
    "lattice_to_dict",
    "toric_gauge_state",
]


@dataclass(frozen=True)
class ToricLattice:
    L: int

    def __post_init__(self):
        if not isinstance(self.L, int) or self.L < 2:
            raise ValueError(f"lattice size must be an integer >= 2, got {self.L!r}")

    @property
    def n(self) -> int:
        return 2 * self.L * self.L

    def h(self, r: int, c: int) -> int:
        L = self.L
        return (r % L) * L + (c % L)

    def v(self, r: int, c: int) -> int:
        L = self.L
        return L * L + (r % L) * L + (c % L)

    def edge(self, index: int) -> tuple[str, int, int]:
        L = self.L
        kind = "h" if index < L * L else "v"
        rc = index % (L * L)
        return kind, rc // L, rc % L

    def plaquette(self, r: int, c: int) -> tuple[int, int, int, int]:
        """(S, N, W, E)"""
        return self.h(r, c), self.h(r + 1, c), self.v(r, c), self.v(r, c + 1)

    def vertex(self, r: int, c: int) -> tuple[int, int, int, int]:
        """(E, W, N, S)"""
        return self.h(r, c), self.h(r, c - 1), self.v(r, c), self.v(r - 1, c)

    @property
    def cells(self) -> list[tuple[int, int]]:
        return [(r, c) for r in range(self.L) for c in range(self.L)]

    p_star = (0, 0)
    v_star = (0, 0)

    def H_p(self, r: int, c: int) -> PauliOperator:
        return PauliOperator.on_support(self.n, self.plaquette(r, c), "Z")

    def H_v(self, r: int, c: int) -> PauliOperator:
        return PauliOperator.on_support(self.n, self.vertex(r, c), "X")

    # regions -------------------------------------------------------------

    @property
    def A1(self) -> tuple[int, ...]:
        return (self.v(0, 0),)

    @property
    def A2(self) -> tuple[int, ...]:
        return (self.h(0, 0),)

    @property
    def B1(self) -> tuple[int, ...]:
        return tuple(self.v(0, c) for c in range(1, self.L))

    @property
    def C1(self) -> tuple[int, ...]:
        return tuple(self.v(r, 0) for r in range(1, self.L))

    @property
    def B2(self) -> tuple[int, ...]:
        return tuple(self.h(r, 0) for r in range(1, self.L))

    @property
    def C2(self) -> tuple[int, ...]:
        return tuple(self.h(0, c) for c in range(1, self.L))

    @property
    def D(self) -> tuple[int, ...]:
        used = set(self.A1 + self.A2 + self.B1 + self.C1 + self.B2 + self.C2)
        return tuple(q for q in range(self.n) if q not in used)

    def regions(self) -> dict[str, tuple[int, ...]]:
        return {"A1": self.A1, "A2": self.A2, "B1": self.B1, "B2": self.B2, "C1": self.C1, "C2": self.C2, "D": self.D}


def build_toric(L: int) -> tuple[ToricLattice, StabilizerCode]:
    lat = ToricLattice(L)
    gens = [lat.H_p(r, c) for r, c in lat.cells if (r, c) != lat.p_star]
    gens += [lat.H_v(r, c) for r, c in lat.cells if (r, c) != lat.v_star]
    code = StabilizerCode(f"toric{L}", lat.n, tuple(gens))
    rep = validate_code(code)
    if not rep.overall:
        raise SynthesisError(f"toric generators failed validation: {[c.name for c in rep.failures()]}")
    return lat, code


def toric_logicals(lat: ToricLattice) -> tuple[list[PauliOperator], list[PauliOperator]]:
    """``([X1, X2], [Z1, Z2])``; X1 on A1+B1, Z1 on A1+C1, X2 on A2+B2, Z2 on A2+C2."""
    n = lat.n
    x1 = PauliOperator.on_support(n, lat.A1 + lat.B1, "X")
    z1 = PauliOperator.on_support(n, lat.A1 + lat.C1, "Z")
    x2 = PauliOperator.on_support(n, lat.A2 + lat.B2, "X")
    z2 = PauliOperator.on_support(n, lat.A2 + lat.C2, "Z")
    return [x1, x2], [z1, z2]


def _vertex_sweep(lat: ToricLattice) -> list[tuple[tuple[int, int], int]]:
    """Vertices with the edge carrying their Z correction, in application order.

    Each correction also flips the vertex's parent, which is either applied
    later or is the omitted vertex, so earlier vertex constraints are kept.
    """
    L = lat.L
    out = [((r, c), lat.v(r, c)) for c in range(L) for r in range(1, L)]  # parent (r+1, c)
    out += [((0, c), lat.h(0, c)) for c in range(1, L)]  # parent (0, c+1)
    return out


def _plaquette_sweep(lat: ToricLattice) -> list[tuple[tuple[int, int], int]]:
    L = lat.L
    out = [((r, c), lat.h(r, c)) for c in range(L) for r in range(L - 1, 0, -1)]  # parent (r-1, c)
    out += [((0, c), lat.v(0, c)) for c in range(L - 1, 0, -1)]  # parent (0, c-1)
    return out


def toric_corrections(lat: ToricLattice) -> list[tuple[PauliOperator, PauliOperator]]:
    """Ordered (stabilizer, correction) pairs: all vertex maps, then all plaquette maps."""
    n = lat.n
    pairs = [(lat.H_v(*cell), PauliOperator.single(n, q, "Z")) for cell, q in _vertex_sweep(lat)]
    pairs += [(lat.H_p(*cell), PauliOperator.single(n, q, "X")) for cell, q in _plaquette_sweep(lat)]
    for k, (S, C) in enumerate(pairs):
        if S.commutes(C):
            raise SynthesisError(f"correction {k + 1} commutes with its stabilizer")
        for j in range(k):
            if not C.commutes(pairs[j][0]):
                raise SynthesisError(f"ordering violated: C{k + 1} anticommutes with S{j + 1}")
    return pairs


@dataclass(frozen=True)
class ToricBasin:
    generators: tuple[PauliOperator, ...]  # X_B1, Z_C1, X_B2, Z_C2 on all n qubits
    unconstrained: tuple[int, ...]  # region D
    nominal: str  # per-qubit spec over all n qubits, upload qubits marked '?'


def toric_basin(lat: ToricLattice, d_state: str = "0") -> ToricBasin:
    n = lat.n
    gens = (
        PauliOperator.on_support(n, lat.B1, "X"),
        PauliOperator.on_support(n, lat.C1, "Z"),
        PauliOperator.on_support(n, lat.B2, "X"),
        PauliOperator.on_support(n, lat.C2, "Z"),
    )
    spec = ["?"] * n
    for q in lat.B1 + lat.B2:
        spec[q] = "+"
    for q in lat.C1 + lat.C2:
        spec[q] = "0"
    for q in lat.D:
        spec[q] = d_state
    return ToricBasin(gens, lat.D, "".join(spec))


def toric_plan(L: int) -> tuple[ToricLattice, EncoderPlan]:
    lat, code = build_toric(L)
    lx, lz = toric_logicals(lat)
    pairs = toric_corrections(lat)
    upload = lat.A1 + lat.A2
    gauge = tuple(q for q in range(lat.n) if q not in upload)
    basin = toric_basin(lat)
    r = len(gauge)
    rx = check_matrix([basin.generators[0].restrict(gauge), basin.generators[2].restrict(gauge)], r)
    rz = check_matrix([basin.generators[1].restrict(gauge), basin.generators[3].restrict(gauge)], r)
    nominal = "".join(basin.nominal[q] for q in gauge)
    ordered_code = StabilizerCode(code.name, code.n, tuple(s for s, _ in pairs))
    plan = EncoderPlan(
        code=ordered_code,
        ordered_pairs=tuple(pairs),
        logical_X=tuple(lx),
        logical_Z=tuple(lz),
        upload_qubits=upload,
        gauge_qubits=gauge,
        basin_Rz=rz,
        basin_Rx=rx,
        nominal_gauge=nominal,
        order_robust=False,
        label="toric",
    )
    return lat, plan


def toric_neighborhoods(lat: ToricLattice) -> list[tuple[int, ...]]:
    return [lat.plaquette(*cell) for cell in lat.cells] + [lat.vertex(*cell) for cell in lat.cells]


def check_quasi_locality(plan: EncoderPlan, neighborhoods: Sequence[Sequence[int]]) -> VerificationReport:
    """Each map must act inside one declared neighborhood."""
    rep = VerificationReport(plan.code.name)
    hoods = [frozenset(h) for h in neighborhoods]
    for k, (S, C) in enumerate(plan.ordered_pairs):
        supp = frozenset(S.support) | frozenset(C.support)
        ok = any(supp <= h for h in hoods)
        rep.add(f"quasi_local[{k + 1}]", ok, residual=0.0 if ok else float(len(supp)),
                details=f"support {sorted(supp)}" + ("" if ok else " fits no neighborhood"))
    return rep


def maps_commute(a: tuple[PauliOperator, PauliOperator], b: tuple[PauliOperator, PauliOperator]) -> bool:
    """Sufficient condition for two measure-and-correct channels to commute."""
    (Sa, Ca), (Sb, Cb) = a, b
    return Ca.commutes(Sb) and Cb.commutes(Sa) and Sa.commutes(Sb)


def parallel_schedule(pairs: Sequence[tuple[PauliOperator, PauliOperator]]) -> list[list[int]]:
    """Greedy as-soon-as-possible layering that keeps every non-commuting pair in order."""
    layer_of: list[int] = []
    for k in range(len(pairs)):
        deps = [layer_of[j] for j in range(k) if not maps_commute(pairs[j], pairs[k])]
        layer_of.append(1 + max(deps, default=-1))
    layers: list[list[int]] = [[] for _ in range(max(layer_of, default=-1) + 1)]
    for k, ell in enumerate(layer_of):
        layers[ell].append(k)
    return layers


def lattice_to_dict(lat: ToricLattice, plan: EncoderPlan | None = None) -> dict:
    edges = []
    for q in range(lat.n):
        kind, r, c = lat.edge(q)
        edges.append({"index": q, "orientation": "horizontal" if kind == "h" else "vertical", "row": r, "col": c})
    out = {
        "L": lat.L,
        "n": lat.n,
        "edges": edges,
        "plaquettes": {f"{r},{c}": list(lat.plaquette(r, c)) for r, c in lat.cells},
        "vertices": {f"{r},{c}": list(lat.vertex(r, c)) for r, c in lat.cells},
        "p_star": list(lat.p_star),
        "v_star": list(lat.v_star),
        "regions": {k: list(v) for k, v in lat.regions().items()},
    }
    if plan is not None:
        out["plan"] = plan_to_dict(plan)
        out["schedule"] = parallel_schedule(plan.ordered_pairs)
    else:
        out["code"] = code_to_dict(build_toric(lat.L)[1])
    return out


def toric_gauge_state(lat: ToricLattice, plan: EncoderPlan, rng: np.random.Generator | None = None) -> np.ndarray:
    """Gauge-register state with B qubits in |+>, C qubits in |0> and region D arbitrary.

    With ``rng`` the D region gets a random full-rank (generally entangled)
    density matrix; without it D is left in |0...0>.
    """
    from .channels import permute_qubits, product_state, random_density_matrix

    gauge = list(plan.gauge_qubits)
    d_set = set(lat.D)
    bc = [q for q in gauge if q not in d_set]
    d = [q for q in gauge if q in d_set]
    sigma_bc = product_state("".join(plan.nominal_gauge[gauge.index(q)] for q in bc))
    sigma_d = random_density_matrix(len(d), rng) if rng is not None else product_state("0" * len(d))
    return permute_qubits(np.kron(sigma_bc, sigma_d), [gauge.index(q) for q in bc + d])
