"""Dense Kraus-map simulation of the measure-and-correct encoding maps.

Dense matrices use qubit 0 as the most significant tensor factor, so the
basis index of ``|b_0 b_1 ... b_{n-1}>`` is ``sum_j b_j 2**(n-1-j)``.
Superoperators act on row-major vectorizations: ``vec(A X B) = (A kron B^T) vec(X)``.
"""

from __future__ import annotations

import functools
import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import expm

from .config import DEFAULT_TOL, MAX_CHANNEL_QUBITS, MAX_STATE_QUBITS, MAX_SUPEROP_QUBITS
from .pauli import DimensionError, PauliOperator, _basis_masks, pauli_matrix

__all__ = [
    "PreconditionError",
    "TooLargeError",
    "KrausMap",
    "ComposedMap",
    "encoding_map",
    "compose_encoder",
    "superoperator",
    "identity_channel",
    "embed_logical",
    "permute_qubits",
    "projector_onto_code",
    "cde_generator",
    "evolve_cde",
    "ket_product",
    "product_state",
    "random_density_matrix",
    "random_pure_state",
    "logical_basis_states",
    "encoded_state",
    "expectation",
    "fidelity",
    "trace_distance",
    "density_matrix_residuals",
    "partial_trace",
    "dump_state",
]


class PreconditionError(ValueError):
    pass


class TooLargeError(ValueError):
    pass


def _nqubits(dim: int) -> int:
    n = dim.bit_length() - 1
    if 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two")
    return n


def superoperator(kraus: Sequence[np.ndarray]) -> np.ndarray:
    dim = kraus[0].shape[0]
    if _nqubits(dim) > MAX_SUPEROP_QUBITS:
        raise TooLargeError(f"superoperator on {_nqubits(dim)} qubits exceeds the {MAX_SUPEROP_QUBITS}-qubit cap")
    out = np.zeros((dim * dim, dim * dim), dtype=complex)
    for k in kraus:
        out += np.kron(k, k.conj())
    return out


@functools.lru_cache(maxsize=4096)
def _pauli_action(P: PauliOperator) -> tuple[np.ndarray, np.ndarray]:
    """``P|b> = c[b] |perm[b]>`` in the dense basis (``perm`` is an involution)."""
    xm, zm = _basis_masks(P)
    b = np.arange(1 << P.n, dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(b & zm) % 2).astype(np.int64)
    perm, c = b ^ xm, (1j**P.phase) * signs
    perm.flags.writeable = False
    c.flags.writeable = False
    return perm, c


def pauli_left(P: PauliOperator, rho: np.ndarray) -> np.ndarray:
    """``P @ rho``; ``rho`` may carry leading batch axes."""
    perm, c = _pauli_action(P)
    # (P rho)[perm[b], :] = c[b] rho[b, :], and perm is its own inverse
    return c[perm][:, None] * rho[..., perm, :]


def pauli_right(rho: np.ndarray, P: PauliOperator) -> np.ndarray:
    """``rho @ P``; ``rho`` may carry leading batch axes."""
    perm, c = _pauli_action(P)
    # (rho P)[:, b] = rho[:, perm[b]] c[b]
    return rho[..., :, perm] * c


@dataclass(frozen=True)
class KrausMap:
    """Channel ``rho -> sum_i K_i rho K_i^dag``.

    Measure-and-correct maps carry ``paulis = (S, C)``; they are applied
    through signed permutations and their dense Kraus matrices are built
    only on request.
    """

    kraus: tuple[np.ndarray, ...] = ()
    label: str = ""
    paulis: tuple[PauliOperator, PauliOperator] | None = None

    @functools.cached_property
    def operators(self) -> tuple[np.ndarray, ...]:
        if self.kraus or self.paulis is None:
            return self.kraus
        S, C = self.paulis
        eye = np.eye(1 << S.n, dtype=complex)
        s = pauli_left(S, eye)
        return ((eye + s) / 2, pauli_left(C, eye - s) / 2)

    @property
    def dim(self) -> int:
        if self.paulis is not None:
            return 1 << self.paulis[0].n
        return self.kraus[0].shape[0]

    @property
    def n(self) -> int:
        return _nqubits(self.dim)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if self.paulis is not None:
            S, C = self.paulis
            s_rho = pauli_left(S, rho)
            sym = rho + pauli_right(s_rho, S)
            cross = s_rho + pauli_right(rho, S)
            return ((sym + cross) + pauli_right(pauli_left(C, sym - cross), C)) / 4
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.apply(rho)

    def kraus_operators(self) -> list[np.ndarray]:
        return list(self.operators)

    def trace_preservation_residual(self) -> float:
        acc = sum(k.conj().T @ k for k in self.operators)
        return float(np.max(np.abs(acc - np.eye(self.dim))))

    def is_trace_preserving(self, tol: float = DEFAULT_TOL.cptp) -> bool:
        return self.trace_preservation_residual() <= tol

    def superoperator(self) -> np.ndarray:
        if self.paulis is not None:
            return _superoperator_by_action(self.apply, self.n)
        return superoperator(self.operators)


def _superoperator_by_action(apply, n: int) -> np.ndarray:
    """Columns ``vec(Phi(|a><b|))`` obtained by applying ``Phi`` to unit matrices."""
    if n > MAX_SUPEROP_QUBITS:
        raise TooLargeError(f"superoperator on {n} qubits exceeds the {MAX_SUPEROP_QUBITS}-qubit cap")
    dim = 1 << n
    out = np.empty((dim * dim, dim * dim), dtype=complex)
    for a in range(dim):
        # all |a><b| for b = 0..dim-1 as one batch
        units = np.zeros((dim, dim, dim), dtype=complex)
        units[np.arange(dim), a, np.arange(dim)] = 1
        out[:, a * dim : (a + 1) * dim] = apply(units).reshape(dim, dim * dim).T
    return out


@dataclass(frozen=True)
class ComposedMap:
    """Sequential composition; ``maps[0]`` acts first."""

    maps: tuple[KrausMap, ...]
    n: int
    label: str = ""
    order: tuple[int, ...] = field(default=())

    @property
    def dim(self) -> int:
        return 1 << self.n

    def apply(self, rho: np.ndarray) -> np.ndarray:
        for m in self.maps:
            rho = m.apply(rho)
        return rho

    def __call__(self, rho: np.ndarray) -> np.ndarray:
        return self.apply(rho)

    def kraus_operators(self) -> list[np.ndarray]:
        """All products ``K_r ... K_1`` (exponential in the number of maps)."""
        ops = [np.eye(self.dim, dtype=complex)]
        for m in self.maps:
            ops = [k @ o for o in ops for k in m.operators]
        return ops

    def as_kraus_map(self) -> KrausMap:
        return KrausMap(tuple(self.kraus_operators()), self.label)

    def superoperator(self) -> np.ndarray:
        if all(m.paulis is not None for m in self.maps):
            return _superoperator_by_action(self.apply, self.n)
        if self.n > MAX_SUPEROP_QUBITS:
            raise TooLargeError(f"superoperator on {self.n} qubits exceeds the {MAX_SUPEROP_QUBITS}-qubit cap")
        out = np.eye(self.dim * self.dim, dtype=complex)
        for m in self.maps:
            out = m.superoperator() @ out
        return out

    def trace_preservation_residual(self) -> float:
        return max((m.trace_preservation_residual() for m in self.maps), default=0.0)


def identity_channel(n: int) -> KrausMap:
    return KrausMap((np.eye(1 << n, dtype=complex),), "identity")


def encoding_map(S: PauliOperator, C: PauliOperator, label: str = "") -> KrausMap:
    """Measure ``S``; on outcome -1 apply ``C``: ``{(I+S)/2, C(I-S)/2}``."""
    if S.n != C.n:
        raise DimensionError("stabilizer and correction act on different registers")
    if S.n > MAX_CHANNEL_QUBITS:
        raise TooLargeError(f"dense maps limited to {MAX_CHANNEL_QUBITS} qubits; use the tableau backend")
    if not (S.is_hermitian and C.is_hermitian):
        raise PreconditionError(f"{S} and {C} must both be Hermitian Paulis")
    if S.commutes(C):
        raise PreconditionError(f"correction {C} commutes with {S}; it must anticommute")
    return KrausMap((), label or f"{S}|{C}", (S, C))


def compose_encoder(plan, order: Sequence[int] | None = None) -> ComposedMap:
    pairs = plan.ordered_pairs
    if order is None:
        order = range(len(pairs))
    order = tuple(order)
    if sorted(order) != list(range(len(pairs))):
        raise ValueError(f"{list(order)} is not a permutation of the {len(pairs)} maps")
    maps = tuple(encoding_map(*pairs[k], label=f"map{k + 1}") for k in order)
    return ComposedMap(maps, plan.n, label=getattr(plan.code, "name", ""), order=order)


# -- states -------------------------------------------------------------------------

_KETS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "-": np.array([1, -1], dtype=complex) / np.sqrt(2),
    "r": np.array([1, 1j], dtype=complex) / np.sqrt(2),  # |+i>
    "l": np.array([1, -1j], dtype=complex) / np.sqrt(2),  # |-i>
}


def ket_product(spec: str) -> np.ndarray:
    """Product ket from symbols ``0 1 + - r l`` (``r``/``l`` are the Y eigenstates)."""
    if not spec:
        return np.ones(1, dtype=complex)
    try:
        vecs = [_KETS[c] for c in spec]
    except KeyError as exc:
        raise ValueError(f"invalid state symbol {exc.args[0]!r} in {spec!r}") from None
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return out


def product_state(spec: str) -> np.ndarray:
    if len(spec) > MAX_STATE_QUBITS:
        raise TooLargeError(f"dense states limited to {MAX_STATE_QUBITS} qubits")
    v = ket_product(spec)
    return np.outer(v, v.conj())


def random_pure_state(n: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


def random_density_matrix(n: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    dim = 1 << n
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def logical_basis_states(m: int) -> list[tuple[str, np.ndarray]]:
    """``4**m`` product states over ``{0, 1, +, +i}``; they span all operators on ``m`` qubits."""
    out = []
    for spec in itertools.product("01+r", repeat=m):
        s = "".join(spec)
        out.append((s, product_state(s)))
    return out


def permute_qubits(rho: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Move factor ``i`` of ``rho`` onto physical qubit ``perm[i]``."""
    n = len(perm)
    if rho.shape != (1 << n, 1 << n):
        raise DimensionError("state dimension does not match the permutation")
    inv = np.argsort(perm)
    t = rho.reshape((2,) * (2 * n))
    axes = list(inv) + [n + i for i in inv]
    return t.transpose(axes).reshape(1 << n, 1 << n)


def embed_logical(rho_L: np.ndarray, sigma: np.ndarray, plan) -> np.ndarray:
    """``rho_L`` on the upload qubits, ``sigma`` on the gauge qubits, in physical order."""
    m, r = len(plan.upload_qubits), len(plan.gauge_qubits)
    if rho_L.shape != (1 << m, 1 << m):
        raise DimensionError(f"logical state must be {1 << m}-dimensional")
    if sigma.shape != (1 << r, 1 << r):
        raise DimensionError(f"gauge state must be {1 << r}-dimensional")
    return permute_qubits(np.kron(rho_L, sigma), tuple(plan.upload_qubits) + tuple(plan.gauge_qubits))


def partial_trace(rho: np.ndarray, keep: Sequence[int], n: int) -> np.ndarray:
    """Reduced state on ``keep`` (in the given order)."""
    keep = list(keep)
    drop = [q for q in range(n) if q not in keep]
    t = rho.reshape((2,) * (2 * n)).transpose(keep + drop + [n + q for q in keep] + [n + q for q in drop])
    dk, dd = 1 << len(keep), 1 << len(drop)
    t = t.reshape(dk, dd, dk, dd)
    return np.einsum("ajbj->ab", t)


def projector_onto_code(generators: Sequence[PauliOperator], n: int) -> np.ndarray:
    if n > MAX_STATE_QUBITS:
        raise TooLargeError(f"dense projector limited to {MAX_STATE_QUBITS} qubits")
    eye = np.eye(1 << n, dtype=complex)
    out = eye.copy()
    for g in generators:
        out = (out + pauli_right(out, g)) / 2
    return out


def _logical_product(lx: Sequence[PauliOperator], lz: Sequence[PauliOperator], p: Sequence[int], q: Sequence[int]):
    n = lx[0].n if lx else lz[0].n
    op = PauliOperator.identity(n)
    for i in range(len(lx)):
        if p[i]:
            op = op * lx[i]
        if q[i]:
            op = op * lz[i]
    return op


def _upload_product(m: int, p: Sequence[int], q: Sequence[int]) -> PauliOperator:
    op = PauliOperator.identity(m)
    for i in range(m):
        if p[i]:
            op = op * PauliOperator.single(m, i, "X")
        if q[i]:
            op = op * PauliOperator.single(m, i, "Z")
    return op


def encoded_state(rho_L: np.ndarray, plan) -> np.ndarray:
    """Codeword ``(1/2**m) sum_P tr(P^dag rho_L) Pbar Pi_C`` with ``P = prod X^p Z^q``."""
    m, n = plan.m, plan.n
    proj = projector_onto_code(plan.stabilizers, n)
    if m == 0:
        return proj
    out = np.zeros((1 << n, 1 << n), dtype=complex)
    for bits in itertools.product((0, 1), repeat=2 * m):
        p, q = bits[:m], bits[m:]
        coeff = np.trace(pauli_matrix(_upload_product(m, p, q)).conj().T @ rho_L)
        if abs(coeff) < 1e-15:
            continue
        out += coeff * pauli_left(_logical_product(plan.logical_X, plan.logical_Z, p, q), proj)
    return out / (1 << m)


# -- figures of merit ------------------------------------------------------------------


def expectation(rho: np.ndarray, P: PauliOperator | np.ndarray) -> complex:
    if isinstance(P, PauliOperator):
        return complex(np.trace(pauli_left(P, rho)))
    return complex(np.trace(P @ rho))


def _psd_sqrt(a: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh((a + a.conj().T) / 2)
    w = np.where(w > 1e-14, w, 0.0)
    return (v * np.sqrt(w)) @ v.conj().T


def fidelity(rho: np.ndarray, sigma: np.ndarray) -> float:
    """Squared Uhlmann fidelity ``(tr sqrt(sqrt(rho) sigma sqrt(rho)))**2``.

    When either argument is pure this reduces to ``tr(rho sigma)``, which is
    used directly to avoid square roots of near-zero eigenvalues.
    """
    for a in (rho, sigma):
        if abs(np.trace(a @ a).real - 1) < 1e-12:
            return float(np.trace(rho @ sigma).real)
    root = _psd_sqrt(rho)
    w = np.linalg.eigvalsh(root @ sigma @ root)
    return float(np.sum(np.sqrt(np.clip(w, 0.0, None))) ** 2)


def trace_distance(rho: np.ndarray, sigma: np.ndarray) -> float:
    d = rho - sigma
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh((d + d.conj().T) / 2))))


def density_matrix_residuals(rho: np.ndarray) -> dict[str, float]:
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    tr = float(abs(np.trace(rho) - 1))
    neg = float(max(0.0, -np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2))))
    return {"hermiticity": herm, "trace": tr, "negativity": neg}


# -- continuous-time generator -----------------------------------------------------------


def cde_generator(phi) -> np.ndarray:
    """``L = superop(Phi) - identity``."""
    sup = phi.superoperator()
    return sup - np.eye(sup.shape[0])


def evolve_cde(L: np.ndarray, rho: np.ndarray, t: float) -> np.ndarray:
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    dim = rho.shape[0]
    if _nqubits(dim) > 5:
        raise TooLargeError("matrix exponential limited to 5 qubits")
    out = expm(L * t) @ rho.reshape(-1)
    return out.reshape(dim, dim)


def dump_state(rho: np.ndarray, path: str | Path, description: str = "") -> tuple[Path, Path]:
    """Write ``rho`` as row-major little-endian complex128 plus a JSON sidecar."""
    path = Path(path)
    np.ascontiguousarray(rho, dtype="<c16").tofile(path)
    side = path.with_name(path.name + ".json")
    side.write_text(json.dumps({"n": _nqubits(rho.shape[0]), "description": description}, sort_keys=True) + "\n")
    return path, side
