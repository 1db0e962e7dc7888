"""Phase-tracked Pauli operators and GF(2) linear algebra on check matrices.

A Pauli operator on ``n`` qubits is stored as two packed bit masks and a
phase exponent::

    P = i**phase * prod_j X_j**x_j Z_j**z_j

Bit ``j`` of ``x``/``z`` refers to qubit ``j`` (0-based), which is the
``j``-th character of the textual form, leftmost first.  Check matrices are
``numpy.uint8`` arrays of shape ``(rows, 2n)`` laid out as ``[X | Z]``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PauliOperator",
    "PauliParseError",
    "DimensionError",
    "NoSolutionError",
    "GF2Reduction",
    "pauli_from_string",
    "multiply",
    "symplectic_product",
    "check_matrix",
    "paulis_from_check",
    "gf2_row_reduce",
    "gf2_rank",
    "in_row_span",
    "solve_symplectic",
    "pauli_matrix",
]


class PauliParseError(ValueError):
    pass


class DimensionError(ValueError):
    pass


class NoSolutionError(ArithmeticError):
    pass


_SIGNS = {"": 0, "+": 0, "i": 1, "+i": 1, "-": 2, "-i": 3}
_SIGN_RE = re.compile(r"^([+-]?i?)")


@dataclass(frozen=True)
class PauliOperator:
    n: int
    x: int = 0
    z: int = 0
    phase: int = 0

    def __post_init__(self):
        if self.n < 0:
            raise DimensionError(f"qubit count must be non-negative, got {self.n}")
        limit = 1 << self.n
        if not (0 <= self.x < limit and 0 <= self.z < limit):
            raise DimensionError(f"bit masks do not fit in {self.n} qubits")
        object.__setattr__(self, "phase", self.phase % 4)

    # construction -----------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n)

    @classmethod
    def from_bits(cls, x_bits: Sequence[int], z_bits: Sequence[int]) -> "PauliOperator":
        """The +1-signed Hermitian Pauli with the given bit vectors (Y for x=z=1)."""
        if len(x_bits) != len(z_bits):
            raise DimensionError("x and z bit vectors differ in length")
        n = len(x_bits)
        x = _pack(x_bits)
        z = _pack(z_bits)
        return cls(n, x, z, (x & z).bit_count())

    @classmethod
    def from_row(cls, row: Sequence[int]) -> "PauliOperator":
        row = np.asarray(row, dtype=np.uint8)
        if row.ndim != 1 or row.size % 2:
            raise DimensionError(f"check-matrix row must have even length, got {row.shape}")
        n = row.size // 2
        return cls.from_bits(row[:n], row[n:])

    @classmethod
    def single(cls, n: int, qubit: int, kind: str) -> "PauliOperator":
        """Weight-one operator ``kind`` in {X, Y, Z} on ``qubit``."""
        chars = ["I"] * n
        chars[qubit] = kind
        return pauli_from_string("".join(chars))

    @classmethod
    def on_support(cls, n: int, qubits: Iterable[int], kind: str) -> "PauliOperator":
        chars = ["I"] * n
        for q in qubits:
            chars[q] = kind
        return pauli_from_string("".join(chars))

    # views -----------------------------------------------------------

    @property
    def x_bits(self) -> np.ndarray:
        return _unpack(self.x, self.n)

    @property
    def z_bits(self) -> np.ndarray:
        return _unpack(self.z, self.n)

    @property
    def row(self) -> np.ndarray:
        return np.concatenate([self.x_bits, self.z_bits])

    @property
    def weight(self) -> int:
        return (self.x | self.z).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(j for j in range(self.n) if mask >> j & 1)

    @property
    def sign_exponent(self) -> int:
        """Exponent ``k`` with ``P = i**k * (tensor product of I, X, Y, Z)``."""
        return (self.phase - (self.x & self.z).bit_count()) % 4

    @property
    def is_hermitian(self) -> bool:
        return self.sign_exponent % 2 == 0

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    @property
    def unsigned(self) -> "PauliOperator":
        """Same bits, +1-signed Hermitian representative."""
        return PauliOperator(self.n, self.x, self.z, (self.x & self.z).bit_count())

    def letters(self) -> str:
        out = []
        for j in range(self.n):
            xb, zb = self.x >> j & 1, self.z >> j & 1
            out.append("IXZY"[xb + 2 * zb])
        return "".join(out)

    def __str__(self) -> str:
        prefix = {0: "", 1: "i", 2: "-", 3: "-i"}[self.sign_exponent]
        return prefix + self.letters()

    def __repr__(self) -> str:
        return f"PauliOperator('{self}')"

    # algebra -----------------------------------------------------------

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        return multiply(self, other)

    def inverse(self) -> "PauliOperator":
        # P**2 = i**(2 phase) (-1)**|x & z| I
        return PauliOperator(self.n, self.x, self.z, -self.phase + 2 * (self.x & self.z).bit_count())

    def commutes(self, other: "PauliOperator") -> bool:
        _check_n(self, other)
        return ((self.x & other.z).bit_count() + (self.z & other.x).bit_count()) % 2 == 0

    def restrict(self, qubits: Sequence[int]) -> "PauliOperator":
        """Letters on ``qubits`` (in that order), +1-signed."""
        chars = self.letters()
        return pauli_from_string("".join(chars[q] for q in qubits))

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliOperator":
        """Place this operator's letters on ``qubits`` of an ``n``-qubit register."""
        if len(qubits) != self.n:
            raise DimensionError("embedding needs one target qubit per factor")
        x = z = 0
        for j, q in enumerate(qubits):
            x |= (self.x >> j & 1) << q
            z |= (self.z >> j & 1) << q
        return PauliOperator(n, x, z, self.phase)

    def to_matrix(self) -> np.ndarray:
        return pauli_matrix(self)


def _pack(bits) -> int:
    out = 0
    for j, b in enumerate(bits):
        if int(b) & 1:
            out |= 1 << j
    return out


def _unpack(mask: int, n: int) -> np.ndarray:
    return np.array([(mask >> j) & 1 for j in range(n)], dtype=np.uint8)


def _check_n(p: PauliOperator, q: PauliOperator) -> None:
    if p.n != q.n:
        raise DimensionError(f"qubit counts differ: {p.n} vs {q.n}")


def pauli_from_string(s: str) -> PauliOperator:
    """Parse ``[+|-][i]`` followed by letters from ``IXYZ``; qubit 0 is leftmost."""
    if not isinstance(s, str) or not s.strip():
        raise PauliParseError("empty Pauli string")
    text = s.strip().replace(" ", "")
    prefix = _SIGN_RE.match(text).group(1)
    body = text[len(prefix):]
    if prefix not in _SIGNS:
        raise PauliParseError(f"bad sign prefix {prefix!r}")
    if not body:
        raise PauliParseError(f"no Pauli letters after sign prefix at position {len(prefix)}")
    x = z = 0
    n_y = 0
    for j, ch in enumerate(body):
        if ch == "I":
            continue
        if ch == "X":
            x |= 1 << j
        elif ch == "Z":
            z |= 1 << j
        elif ch == "Y":
            x |= 1 << j
            z |= 1 << j
            n_y += 1
        else:
            raise PauliParseError(f"invalid character {ch!r} at position {len(prefix) + j}")
    # Y = i X Z
    return PauliOperator(len(body), x, z, _SIGNS[prefix] + n_y)


def multiply(p: PauliOperator, q: PauliOperator) -> PauliOperator:
    """Exact product ``p @ q`` including phase."""
    _check_n(p, q)
    # Z^z1 X^x2 = (-1)^{z1.x2} X^x2 Z^z1
    phase = p.phase + q.phase + 2 * (p.z & q.x).bit_count()
    return PauliOperator(p.n, p.x ^ q.x, p.z ^ q.z, phase)


def symplectic_product(u, v) -> int:
    """``u Lambda v^T mod 2`` for check-matrix rows ``u`` and ``v``."""
    u = np.asarray(u, dtype=np.uint8).ravel()
    v = np.asarray(v, dtype=np.uint8).ravel()
    if u.size != v.size:
        raise DimensionError(f"row lengths differ: {u.size} vs {v.size}")
    if u.size % 2:
        raise DimensionError(f"row length must be even, got {u.size}")
    n = u.size // 2
    return int((u[:n] @ v[n:] + u[n:] @ v[:n]) % 2)


def symplectic_gram(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix of symplectic products between rows of ``a`` and rows of ``b``."""
    a = np.atleast_2d(np.asarray(a, dtype=np.int64))
    b = np.atleast_2d(np.asarray(b, dtype=np.int64))
    if a.shape[1] != b.shape[1] or a.shape[1] % 2:
        raise DimensionError("incompatible check matrices")
    n = a.shape[1] // 2
    return ((a[:, :n] @ b[:, n:].T + a[:, n:] @ b[:, :n].T) % 2).astype(np.uint8)


def check_matrix(paulis: Sequence[PauliOperator], n: int | None = None) -> np.ndarray:
    if not paulis:
        if n is None:
            raise DimensionError("need n for an empty check matrix")
        return np.zeros((0, 2 * n), dtype=np.uint8)
    n0 = paulis[0].n
    for p in paulis:
        if p.n != n0:
            raise DimensionError("operators act on different qubit counts")
    return np.array([p.row for p in paulis], dtype=np.uint8).reshape(len(paulis), 2 * n0)


def paulis_from_check(m: np.ndarray) -> list[PauliOperator]:
    return [PauliOperator.from_row(row) for row in np.asarray(m, dtype=np.uint8)]


@dataclass(frozen=True)
class GF2Reduction:
    """Result of reducing a binary matrix to reduced row-echelon form.

    ``transform @ original == reduced (mod 2)``; ``pivots[i]`` is the pivot
    column of reduced row ``i`` for ``i < rank``.  ``column_order`` lists the
    pivot columns first, then the remaining ones, so that
    ``reduced[:rank, column_order]`` starts with an identity block.
    """

    reduced: np.ndarray
    rank: int
    pivots: tuple[int, ...]
    transform: np.ndarray
    column_order: tuple[int, ...]


def gf2_row_reduce(m, columns: Sequence[int] | None = None, reverse: bool = False) -> GF2Reduction:
    """Gauss-Jordan elimination over GF(2).

    Pivots are searched only in ``columns`` (default: all), lowest index first
    unless ``reverse`` is set.  Row operations act on the full rows.
    """
    a = np.array(m, dtype=np.uint8, ndmin=2) % 2
    rows, cols = a.shape
    t = np.eye(rows, dtype=np.uint8)
    order = list(range(cols)) if columns is None else list(columns)
    if reverse:
        order = order[::-1]
    pivots: list[int] = []
    r = 0
    for c in order:
        if r == rows:
            break
        hits = np.nonzero(a[r:, c])[0]
        if hits.size == 0:
            continue
        h = r + hits[0]
        if h != r:
            a[[r, h]] = a[[h, r]]
            t[[r, h]] = t[[h, r]]
        mask = a[:, c].astype(bool)
        mask[r] = False
        a[mask] ^= a[r]
        t[mask] ^= t[r]
        pivots.append(c)
        r += 1
    rest = [c for c in range(cols) if c not in pivots]
    return GF2Reduction(a, r, tuple(pivots), t, tuple(pivots) + tuple(rest))


def gf2_rank(m) -> int:
    a = np.asarray(m)
    if a.size == 0:
        return 0
    return gf2_row_reduce(a).rank


def in_row_span(m, v) -> bool:
    """True when ``v`` is a GF(2) combination of the rows of ``m``."""
    m = np.asarray(m, dtype=np.uint8)
    v = np.asarray(v, dtype=np.uint8).reshape(1, -1)
    if m.size == 0:
        return not v.any()
    return gf2_rank(np.vstack([m, v])) == gf2_rank(m)


def solve_symplectic(m, e) -> np.ndarray:
    """Return ``x`` with ``m Lambda x = e (mod 2)``.

    Elimination takes the lowest-index pivot and sets free variables to zero,
    so the answer is a fixed function of the input.
    """
    m = np.array(m, dtype=np.uint8, ndmin=2) % 2
    e = np.asarray(e, dtype=np.uint8).ravel() % 2
    rows, cols = m.shape
    if cols % 2:
        raise DimensionError(f"check matrix must have an even column count, got {cols}")
    if e.size != rows:
        raise DimensionError(f"right-hand side has length {e.size}, expected {rows}")
    n = cols // 2
    # (m Lambda) swaps the X and Z halves
    a = np.hstack([m[:, n:], m[:, :n]])
    red = gf2_row_reduce(np.hstack([a, e[:, None]]), columns=range(cols))
    if red.rank < rows:
        defect = rows - red.rank
        raise NoSolutionError(f"system has rank {red.rank} < {rows} rows (rank defect {defect})")
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(red.pivots):
        x[c] = red.reduced[i, -1]
    if np.any((a.astype(np.int64) @ x) % 2 != e):
        raise NoSolutionError("back-substitution failed to reproduce the right-hand side")
    return x


def _basis_masks(p: PauliOperator) -> tuple[int, int]:
    """Masks in computational-basis index convention (qubit 0 most significant)."""
    xm = zm = 0
    for j in range(p.n):
        shift = p.n - 1 - j
        xm |= (p.x >> j & 1) << shift
        zm |= (p.z >> j & 1) << shift
    return xm, zm


def pauli_matrix(p: PauliOperator) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix, qubit 0 as the most significant tensor factor."""
    dim = 1 << p.n
    xm, zm = _basis_masks(p)
    b = np.arange(dim, dtype=np.int64)
    signs = 1 - 2 * (np.bitwise_count(b & zm) % 2).astype(np.int64)
    out = np.zeros((dim, dim), dtype=complex)
    out[b ^ xm, b] = (1j ** p.phase) * signs
    return out
