"""Checks for encoder plans: algebraic requirements, dense encoding tests,
basin probes, noise tolerance and compatibility of subsystem embeddings."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .channels import (
    ComposedMap,
    KrausMap,
    PreconditionError,
    compose_encoder,
    embed_logical,
    encoded_state,
    expectation,
    fidelity,
    ket_product,
    logical_basis_states,
    pauli_left,
    pauli_right,
    product_state,
    random_density_matrix,
)
from .code import EncoderPlan, basin_dimension
from .config import DEFAULT_TOL, MAX_CHANNEL_QUBITS, MAX_SUPEROP_QUBITS
from .pauli import PauliOperator, check_matrix, gf2_rank, paulis_from_check, pauli_matrix
from .report import VerificationReport

__all__ = [
    "NotSubsystemError",
    "check_E1",
    "check_E2",
    "check_E3",
    "logical_product",
    "upload_product",
    "encoding_identity_residual",
    "verify_ftde",
    "check_range",
    "check_idempotence",
    "check_order_robustness",
    "check_invariance",
    "out_of_basin_gauge_state",
    "enumerate_basin",
    "NoiseModel",
    "pauli_noise",
    "random_gauge_noise",
    "random_trailing_noise",
    "unitary_noise",
    "check_noise_tolerance",
    "SubsystemDecomposition",
    "induced_decomposition",
    "check_compatibility",
    "construct_tolerant_encoder",
    "tolerance_and_compatibility",
    "verify_plan",
]


class NotSubsystemError(ValueError):
    """The map is not an isometric embedding of the form ``V (rho x tau) V^dag``."""


# -- algebraic requirements -------------------------------------------------------------


def check_E1(plan: EncoderPlan, ordered: bool = False) -> VerificationReport:
    rep = VerificationReport(plan.code.name)
    pairs = plan.ordered_pairs
    for k, (_, C) in enumerate(pairs):
        bad = []
        if pairs[k][0].commutes(C):
            bad.append(f"C{k + 1} commutes with S{k + 1}")
        js = range(k) if ordered else (j for j in range(len(pairs)) if j != k)
        for j in js:
            if not C.commutes(pairs[j][0]):
                bad.append(f"C{k + 1} anticommutes with S{j + 1}")
        rep.add(f"E1[{k + 1}]", not bad, residual=float(len(bad)), details="; ".join(bad))
    return rep


def check_E3(plan: EncoderPlan) -> VerificationReport:
    rep = VerificationReport(plan.code.name)
    for k, C in enumerate(plan.corrections):
        bad = [f"C{k + 1} anticommutes with X{j + 1}" for j, L in enumerate(plan.logical_X) if not C.commutes(L)]
        bad += [f"C{k + 1} anticommutes with Z{j + 1}" for j, L in enumerate(plan.logical_Z) if not C.commutes(L)]
        rep.add(f"E3[{k + 1}]", not bad, residual=float(len(bad)), details="; ".join(bad))
    return rep


def logical_product(plan: EncoderPlan, p: Sequence[int], q: Sequence[int]) -> PauliOperator:
    """``prod_i Xbar_i**p_i Zbar_i**q_i`` (factors ordered by logical index)."""
    op = PauliOperator.identity(plan.n)
    for i in range(plan.m):
        if p[i]:
            op = op * plan.logical_X[i]
        if q[i]:
            op = op * plan.logical_Z[i]
    return op


def upload_product(m: int, p: Sequence[int], q: Sequence[int]) -> PauliOperator:
    op = PauliOperator.identity(m)
    for i in range(m):
        if p[i]:
            op = op * PauliOperator.single(m, i, "X")
        if q[i]:
            op = op * PauliOperator.single(m, i, "Z")
    return op


def _compress(P: PauliOperator, qubits: Sequence[int]) -> PauliOperator:
    """Bits of ``P`` on ``qubits`` as a smaller operator, phase carried over."""
    x = z = 0
    for j, q in enumerate(qubits):
        x |= (P.x >> q & 1) << j
        z |= (P.z >> q & 1) << j
    return PauliOperator(len(qubits), x, z, P.phase)


def _index_pairs(m: int):
    for bits in itertools.product((0, 1), repeat=2 * m):
        yield bits[:m], bits[m:]


def check_E2(plan: EncoderPlan) -> tuple[VerificationReport, dict]:
    """Factor every logical product as (upload Pauli) x R on the gauge qubits."""
    rep = VerificationReport(plan.code.name)
    m, n = plan.m, plan.n
    upload, gauge = plan.upload_qubits, plan.gauge_qubits
    R: dict[tuple, PauliOperator] = {}
    for p, q in _index_pairs(m):
        L = logical_product(plan, p, q)
        U = upload_product(m, p, q).embed(n, upload)
        rest = U.inverse() * L
        leak = [qb for qb in rest.support if qb in upload]
        ok = not leak
        rep.add(
            f"E2[p={''.join(map(str, p))},q={''.join(map(str, q))}]",
            ok,
            residual=float(len(leak)),
            details="" if ok else f"logical product {L} acts beyond the upload Pauli on qubits {leak}",
        )
        if ok:
            R[(tuple(p), tuple(q))] = _compress(rest, gauge)
    if m and len(R) == 4**m and gauge:
        r = len(gauge)
        rows = np.vstack([np.atleast_2d(plan.basin_Rx), np.atleast_2d(plan.basin_Rz)])
        unit = [tuple(int(i == k) for i in range(m)) for k in range(m)]
        zero = (0,) * m
        extracted = [R[(u, zero)] for u in unit] + [R[(zero, u)] for u in unit]
        got = check_matrix(extracted, r)
        exact = [str(a) for a in paulis_from_check(rows)] == [str(b) for b in extracted]
        same_group = gf2_rank(rows) == gf2_rank(got) == gf2_rank(np.vstack([rows, got]))
        rep.add(
            "E2.basin_cross_check",
            exact and same_group,
            details="" if exact else "extracted R operators differ from the plan's basin generators",
        )
    return rep, R


# -- dense encoding tests ---------------------------------------------------------------------


def encoding_identity_residual(plan: EncoderPlan, rho_L: np.ndarray, out: np.ndarray) -> float:
    worst = 0.0
    for p, q in _index_pairs(plan.m):
        lhs = expectation(out, logical_product(plan, p, q))
        rhs = np.trace(pauli_matrix(upload_product(plan.m, p, q)) @ rho_L) if plan.m else 1.0
        worst = max(worst, abs(lhs - rhs))
    return float(worst)


def _require_dense(plan: EncoderPlan):
    if plan.n > MAX_CHANNEL_QUBITS:
        raise PreconditionError(f"dense checks limited to {MAX_CHANNEL_QUBITS} qubits; use the tableau backend")


def verify_ftde(
    plan: EncoderPlan,
    logical_states: Sequence[tuple[str, np.ndarray]] | None = None,
    gauge_states: Sequence[tuple[str, np.ndarray]] | None = None,
    expected_fail: Sequence[str] = (),
    tol: float = DEFAULT_TOL.cptp,
    phi: ComposedMap | None = None,
) -> VerificationReport:
    """Encoding identity and codeword fidelity for every (logical, gauge) input.

    Gauge states whose labels appear in ``expected_fail`` are negative
    controls: their checks pass when the encoding breaks.
    """
    _require_dense(plan)
    rep = VerificationReport(plan.code.name)
    phi = phi or compose_encoder(plan)
    logical_states = logical_states if logical_states is not None else logical_basis_states(plan.m)
    gauge_states = gauge_states if gauge_states is not None else [("nominal", product_state(plan.nominal_gauge))]
    targets = {}
    for lab, rho_L in logical_states:
        targets[lab] = encoded_state(rho_L, plan)
    for glab, sigma in gauge_states:
        worst, worst_lab, worst_ident, worst_fid = -1.0, "", 0.0, 0.0
        for lab, rho_L in logical_states:
            out = phi(embed_logical(rho_L, sigma, plan))
            ident = encoding_identity_residual(plan, rho_L, out)
            fid = 1.0 - fidelity(targets[lab], out)
            res = max(ident, abs(fid))
            if res > worst:
                worst, worst_lab, worst_ident, worst_fid = res, lab, ident, fid
        rep.add(
            f"ftde[sigma={glab}]",
            worst <= tol,
            residual=worst,
            details=f"{len(logical_states)} logical inputs; worst rho={worst_lab}: "
            f"identity residual {worst_ident:.3g}, infidelity {worst_fid:.3g}",
            expected_fail=glab in expected_fail,
        )
    rep.extend(check_invariance(plan, phi=phi, tol=tol, logical_states=logical_states, targets=targets))
    return rep


def check_invariance(plan, phi=None, tol=DEFAULT_TOL.cptp, logical_states=None, targets=None) -> VerificationReport:
    rep = VerificationReport(plan.code.name)
    phi = phi or compose_encoder(plan)
    logical_states = logical_states if logical_states is not None else logical_basis_states(plan.m)
    worst = 0.0
    for lab, rho_L in logical_states:
        bar = targets[lab] if targets else encoded_state(rho_L, plan)
        worst = max(worst, float(np.max(np.abs(phi(bar) - bar))))
    rep.add("invariance", worst <= tol, residual=worst, details="codewords are fixed points")
    return rep


def _project(rho: np.ndarray, gens: Sequence[PauliOperator]) -> np.ndarray:
    for g in gens:
        rho = (rho + pauli_left(g, rho)) / 2
        rho = (rho + pauli_right(rho, g)) / 2
    return rho


def check_range(plan: EncoderPlan, rng: np.random.Generator, samples: int = 200,
                tol: float = DEFAULT_TOL.cptp, phi=None) -> VerificationReport:
    """``Pi_C Phi(rho) Pi_C == Phi(rho)`` on random inputs."""
    _require_dense(plan)
    phi = phi or compose_encoder(plan)
    worst = 0.0
    rank = min(1 << plan.n, 4)
    for _ in range(samples):
        out = phi(random_density_matrix(plan.n, rng, rank=rank))
        worst = max(worst, float(np.max(np.abs(_project(out, plan.stabilizers) - out))))
    rep = VerificationReport(plan.code.name)
    rep.add("range_in_code", worst <= tol, residual=worst, details=f"{samples} random inputs")
    return rep


def check_idempotence(plan: EncoderPlan, rng: np.random.Generator, tol: float = DEFAULT_TOL.cptp,
                      probes: int = 5, phi=None) -> VerificationReport:
    phi = phi or compose_encoder(plan)
    rep = VerificationReport(plan.code.name)
    if plan.n <= MAX_SUPEROP_QUBITS:
        sup = phi.superoperator()
        res = float(np.max(np.abs(sup @ sup - sup)))
        how = "superoperator"
    else:
        res = 0.0
        for _ in range(probes):
            once = phi(random_density_matrix(plan.n, rng, rank=4))
            res = max(res, float(np.max(np.abs(phi(once) - once))))
        how = f"{probes} random probe states"
    rep.add("idempotence", res <= tol, residual=res, details=how)
    return rep


def check_order_robustness(
    plan: EncoderPlan,
    rng: np.random.Generator,
    n_random: int = 20,
    tol: float = DEFAULT_TOL.equality,
    probes: int = 3,
) -> VerificationReport:
    """Compare channels built from different map orders.

    With ``r <= 4`` every order is tried, otherwise ``n_random`` seeded
    permutations.  Channels are compared as superoperators when ``n`` is small
    and through their outputs on random full-rank probe states otherwise.
    """
    rep = VerificationReport(plan.code.name)
    r = plan.r
    if r <= 4:
        orders = list(itertools.permutations(range(r)))
    else:
        orders = [tuple(rng.permutation(r).tolist()) for _ in range(n_random)]
    use_superop = plan.n <= MAX_SUPEROP_QUBITS
    if use_superop:
        ref = compose_encoder(plan).superoperator()
        evaluate = lambda order: compose_encoder(plan, order).superoperator()  # noqa: E731
    else:
        states = [random_density_matrix(plan.n, rng) for _ in range(probes)]
        ref_phi = compose_encoder(plan)
        ref = [ref_phi(s) for s in states]
        evaluate = lambda order: [compose_encoder(plan, order)(s) for s in states]  # noqa: E731
    worst = 0.0
    for order in orders:
        got = evaluate(order)
        if use_superop:
            res = float(np.max(np.abs(got - ref)))
        else:
            res = max(float(np.max(np.abs(a - b))) for a, b in zip(got, ref))
        worst = max(worst, res)
    how = "superoperators" if use_superop else f"outputs on {probes} random full-rank states"
    rep.add("order_robustness", worst <= tol, residual=worst, details=f"{len(orders)} orders compared via {how}")
    return rep


# -- basin probes ------------------------------------------------------------------------------


def out_of_basin_gauge_state(plan: EncoderPlan) -> tuple[str, np.ndarray, PauliOperator]:
    """Nominal gauge state hit by a single-qubit Pauli that flips one basin operator."""
    ops = plan.basin_operators()
    r = len(plan.gauge_qubits)
    for j in range(r):
        for kind in "ZXY":
            Q = PauliOperator.single(r, j, kind)
            if any(not Q.commutes(R) for R in ops):
                ket = ket_product(plan.nominal_gauge)
                v = pauli_matrix(Q) @ ket
                return f"{Q}|nominal>", np.outer(v, v.conj()), Q
    raise ValueError("basin has no constraints; every gauge state lies inside it")


def enumerate_basin(plan: EncoderPlan, tol: float = 1e-10) -> tuple[int, list[str]]:
    """Dense search over all product stabilizer gauge states.

    Each of the ``6**r`` states is encoded together with the logical basis;
    the accepted kets are stacked and the dimension of their span returned.
    """
    r = len(plan.gauge_qubits)
    if r > 5:
        raise PreconditionError("exhaustive basin enumeration limited to 5 gauge qubits")
    phi = compose_encoder(plan)
    basis = logical_basis_states(plan.m)
    kets, labels = [], []
    for spec in itertools.product("01+-rl", repeat=r):
        s = "".join(spec)
        sigma = product_state(s)
        ok = True
        for _, rho_L in basis:
            out = phi(embed_logical(rho_L, sigma, plan))
            if encoding_identity_residual(plan, rho_L, out) > tol:
                ok = False
                break
        if ok:
            kets.append(ket_product(s))
            labels.append(s)
    if not kets:
        return 0, []
    return int(np.linalg.matrix_rank(np.array(kets), tol=1e-9)), labels


# -- noise tolerance ---------------------------------------------------------------------------


@dataclass(frozen=True)
class NoiseModel:
    kraus: tuple[np.ndarray, ...]
    label: str = ""

    def apply(self, rho: np.ndarray) -> np.ndarray:
        return sum(k @ rho @ k.conj().T for k in self.kraus)

    def mixed(self, lam: float) -> Callable[[np.ndarray], np.ndarray]:
        """``M_lam = lam N + (1 - lam) I``."""
        return lambda rho: lam * self.apply(rho) + (1 - lam) * rho

    def trace_preservation_residual(self) -> float:
        acc = sum(k.conj().T @ k for k in self.kraus)
        return float(np.max(np.abs(acc - np.eye(acc.shape[0]))))


def pauli_noise(paulis: Sequence[PauliOperator], probs: Sequence[float], label: str = "") -> NoiseModel:
    probs = np.asarray(probs, dtype=float)
    if np.any(probs < 0) or abs(probs.sum() - 1) > 1e-12:
        raise ValueError("probabilities must be non-negative and sum to one")
    return NoiseModel(tuple(np.sqrt(p) * pauli_matrix(P) for P, p in zip(paulis, probs)), label or "pauli-mixture")


def random_gauge_noise(plan: EncoderPlan, rng: np.random.Generator, terms: int = 3) -> NoiseModel:
    """Random mixture of gauge-qubit Paulis that commute with every basin operator."""
    r = len(plan.gauge_qubits)
    ops = plan.basin_operators()
    chosen = [PauliOperator.identity(plan.n)]
    while len(chosen) < terms + 1:
        x = int(rng.integers(0, 1 << r))
        z = int(rng.integers(0, 1 << r))
        Q = PauliOperator(r, x, z).unsigned
        if Q.is_identity or not all(Q.commutes(R) for R in ops):
            continue
        chosen.append(Q.embed(plan.n, plan.gauge_qubits))
    probs = rng.dirichlet(np.ones(len(chosen)))
    return pauli_noise(chosen, probs, "gauge:" + ",".join(str(c) for c in chosen[1:]))


def random_trailing_noise(n: int, k: int, rng: np.random.Generator, rank: int = 2, label: str = "") -> NoiseModel:
    """Random CPTP map on the last ``k`` of ``n`` qubits, identity elsewhere.

    Kraus operators are the blocks of a Haar-like random isometry.
    """
    d = 1 << k
    g = rng.normal(size=(d * rank, d)) + 1j * rng.normal(size=(d * rank, d))
    q, _ = np.linalg.qr(g)
    eye = np.eye(1 << (n - k))
    kraus = tuple(np.kron(eye, q[a * d : (a + 1) * d]) for a in range(rank))
    return NoiseModel(kraus, label or f"random rank-{rank} channel on last {k} qubits")


def unitary_noise(U: np.ndarray, label: str = "") -> NoiseModel:
    return NoiseModel((np.asarray(U, dtype=complex),), label or "unitary")


def check_noise_tolerance(
    encoder,
    phi_L: Callable[[np.ndarray], np.ndarray],
    noise: NoiseModel,
    m: int,
    lambdas: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    tol: float = DEFAULT_TOL.cptp,
    expected_fail: bool = False,
) -> VerificationReport:
    """``Phi_P(M_lam(Phi_L(rho))) == Phi_P(Phi_L(rho))`` on the logical basis.

    ``encoder`` may be an :class:`EncoderPlan` or any callable channel.
    """
    if isinstance(encoder, EncoderPlan):
        name = encoder.code.name
        encoder = compose_encoder(encoder)
    else:
        name = getattr(encoder, "label", "")
    rep = VerificationReport(name)
    basis = logical_basis_states(m)
    nominal = [encoder(phi_L(rho)) for _, rho in basis]
    for lam in lambdas:
        M = noise.mixed(lam)
        res = max(float(np.max(np.abs(encoder(M(phi_L(rho))) - ref))) for (_, rho), ref in zip(basis, nominal))
        rep.add(f"tolerance[lambda={lam:g}]", res <= tol, residual=res, details=noise.label, expected_fail=expected_fail)
    return rep


# -- subsystem decompositions --------------------------------------------------------------------


@dataclass(frozen=True)
class SubsystemDecomposition:
    """``H_P = (H_L x H_F) + H_R`` through an isometry ``V`` with cofactor ``tau``.

    Column ``i * gauge_dim + f`` of ``isometry`` is the image of ``|i>|f>``.
    """

    logical_dim: int
    gauge_dim: int
    isometry: np.ndarray
    cofactor: np.ndarray

    def __post_init__(self):
        V = self.isometry
        if V.shape[1] != self.logical_dim * self.gauge_dim:
            raise ValueError("isometry width must equal logical_dim * gauge_dim")
        if np.max(np.abs(V.conj().T @ V - np.eye(V.shape[1]))) > 1e-12:
            raise ValueError("isometry columns are not orthonormal")
        w = np.linalg.eigvalsh(self.cofactor)
        if w.min() <= 1e-12:
            raise PreconditionError("cofactor state must be full rank")

    @property
    def physical_dim(self) -> int:
        return self.isometry.shape[0]

    def embed(self, rho_L: np.ndarray) -> np.ndarray:
        V = self.isometry
        return V @ np.kron(rho_L, self.cofactor) @ V.conj().T

    def __call__(self, rho_L: np.ndarray) -> np.ndarray:
        return self.embed(rho_L)

    def projector(self) -> np.ndarray:
        return self.isometry @ self.isometry.conj().T

    def block(self, i: int) -> np.ndarray:
        g = self.gauge_dim
        return self.isometry[:, i * g : (i + 1) * g]


def induced_decomposition(init: Callable[[np.ndarray], np.ndarray], logical_dim: int,
                          tol: float = 1e-10) -> SubsystemDecomposition:
    """Recover ``V`` and ``tau`` from a linear map ``rho_L -> V (rho_L x tau) V^dag``."""
    d = logical_dim

    def unit(i, j):
        e = np.zeros((d, d), dtype=complex)
        e[i, j] = 1
        return e

    m00 = init(unit(0, 0))
    m00 = (m00 + m00.conj().T) / 2
    w, v = np.linalg.eigh(m00)
    keep = w > tol
    if not keep.any():
        raise NotSubsystemError("image of |0><0| vanishes")
    tau = np.diag(w[keep]).astype(complex)
    v0 = v[:, keep]
    g = v0.shape[1]
    tau_inv = np.diag(1 / w[keep])
    blocks = [v0]
    for i in range(1, d):
        blocks.append(init(unit(i, 0)) @ v0 @ tau_inv)
    V = np.hstack(blocks)
    if np.max(np.abs(V.conj().T @ V - np.eye(d * g))) > 1e-8:
        raise NotSubsystemError("recovered embedding is not isometric; logical information is degraded")
    for i in range(d):
        for j in range(d):
            expect = blocks[i] @ tau @ blocks[j].conj().T
            if np.max(np.abs(init(unit(i, j)) - expect)) > 1e-8:
                raise NotSubsystemError(f"image of |{i}><{j}| does not factor through a fixed cofactor")
    # re-orthonormalize to machine precision
    q, rr = np.linalg.qr(V)
    q = q * np.sign(np.real(np.diag(rr)))[None, :]
    return SubsystemDecomposition(d, g, q, tau)


def _factorization_residual(src: SubsystemDecomposition, dst: SubsystemDecomposition,
                            basis) -> tuple[float, np.ndarray]:
    """Project states prepared by ``src`` onto ``dst`` and fit ``rho_L x tau~``."""
    V = dst.isometry
    d, g = dst.logical_dim, dst.gauge_dim
    tau_fit = None
    worst = 0.0
    for _, rho_L in basis:
        X = V.conj().T @ src.embed(rho_L) @ V
        if tau_fit is None:
            # first basis state is |0...0><0...0|
            tau_fit = np.einsum("ajak->jk", X.reshape(d, g, d, g))
        worst = max(worst, float(np.max(np.abs(X - np.kron(rho_L, tau_fit)))))
    return worst, tau_fit


def check_compatibility(d1: SubsystemDecomposition, d2: SubsystemDecomposition,
                        tol: float = DEFAULT_TOL.cptp, label: str = "") -> VerificationReport:
    if d1.logical_dim != d2.logical_dim:
        raise ValueError("decompositions carry different logical dimensions")
    m = d1.logical_dim.bit_length() - 1
    basis = logical_basis_states(m)
    rep = VerificationReport(label)
    res12, _ = _factorization_residual(d2, d1, basis)
    rep.add("compatibility[second->first]", res12 <= tol, residual=res12,
            details="projection of second embedding onto the first factors with one cofactor")
    res21, _ = _factorization_residual(d1, d2, basis)
    rep.add("compatibility[first->second]", res21 <= tol, residual=res21,
            details="projection of first embedding onto the second factors with one cofactor")
    return rep


def construct_tolerant_encoder(d2: SubsystemDecomposition, target_cofactor: np.ndarray,
                               out: SubsystemDecomposition | None = None) -> KrausMap:
    """Identity on the logical factor and the remainder, gauge factor reset to ``target_cofactor``.

    The output lives in ``out``'s embedding (``d2`` itself by default), whose
    gauge dimension must match ``target_cofactor``.
    """
    V_in = d2.isometry
    V_out = (out or d2).isometry
    d, g_in = d2.logical_dim, d2.gauge_dim
    g_out = target_cofactor.shape[0]
    if V_out.shape[1] != d * g_out or V_out.shape[0] != V_in.shape[0]:
        raise ValueError("target cofactor does not fit the output embedding")
    w, v = np.linalg.eigh((target_cofactor + target_cofactor.conj().T) / 2)
    kraus = []
    eye_L = np.eye(d)
    for a in range(g_out):
        if w[a] <= 1e-15:
            continue
        for j in range(g_in):
            ej = np.zeros(g_in)
            ej[j] = 1
            local = np.kron(eye_L, np.sqrt(w[a]) * np.outer(v[:, a], ej))
            kraus.append(V_out @ local @ V_in.conj().T)
    kraus.append(np.eye(V_in.shape[0]) - V_in @ V_in.conj().T)
    return KrausMap(tuple(kraus), "tolerant-encoder")


def tolerance_and_compatibility(
    phi_L: Callable[[np.ndarray], np.ndarray],
    noise: NoiseModel,
    m: int,
    lambdas: Sequence[float] = (0.0, 0.25, 0.5, 0.75, 1.0),
    lam_hat: float = 0.5,
    tol: float = DEFAULT_TOL.cptp,
) -> tuple[VerificationReport, VerificationReport]:
    """Run both sides of the compatibility/tolerance equivalence on one instance.

    Returns ``(compatibility, tolerance)``.  Compatibility is checked against
    the embedding induced by ``M_lam o Phi_L`` for every ``lam``; the tolerant
    encoder is built from the embedding at ``lam_hat`` (falling back to
    ``lam = 1`` if that mixture is not an embedding) and then tested.
    """
    d = 1 << m
    nominal = induced_decomposition(phi_L, d)
    compat = VerificationReport(noise.label)
    for lam in lambdas:
        M = noise.mixed(lam)
        try:
            d2 = induced_decomposition(lambda rho, M=M: M(phi_L(rho)), d)
        except NotSubsystemError as exc:
            compat.add(f"compatibility[lambda={lam:g}]", False, residual=float("inf"), details=str(exc))
            continue
        sub = check_compatibility(nominal, d2, tol)
        compat.add(f"compatibility[lambda={lam:g}]", sub.overall, residual=sub.max_residual(),
                   details=f"induced gauge dimension {d2.gauge_dim}")
    tolerance = VerificationReport(noise.label)
    encoder_src = None
    for lam in (lam_hat, 1.0):
        try:
            M = noise.mixed(lam)
            encoder_src = induced_decomposition(lambda rho, M=M: M(phi_L(rho)), d)
            break
        except NotSubsystemError:
            continue
    if encoder_src is None:
        tolerance.add("construct_encoder", False, residual=float("inf"),
                      details="noisy initialization is not a subsystem embedding")
        return compat, tolerance
    target = np.zeros((encoder_src.gauge_dim,) * 2, dtype=complex)
    target[0, 0] = 1
    enc = construct_tolerant_encoder(encoder_src, target)
    tolerance.add("construct_encoder", enc.is_trace_preserving(), residual=enc.trace_preservation_residual())
    tolerance.extend(check_noise_tolerance(enc, phi_L, noise, m, lambdas, tol))
    return compat, tolerance


# -- full battery --------------------------------------------------------------------------------


def verify_plan(plan: EncoderPlan, ordered: bool | None = None, seed: int = 0, tol: float = DEFAULT_TOL.cptp,
                dense: bool | None = None) -> VerificationReport:
    """Full battery.  ``ordered=None`` follows the plan's ``order_robust`` flag."""
    if ordered is None:
        ordered = not plan.order_robust
    rng = np.random.default_rng(seed)
    rep = VerificationReport(plan.code.name)
    rep.extend(check_E1(plan, ordered=ordered))
    e2, _ = check_E2(plan)
    rep.extend(e2)
    rep.extend(check_E3(plan))
    r = len(plan.gauge_qubits)
    rep.add("basin_dimension", True, details=str(basin_dimension(plan.basin_Rz, plan.basin_Rx)) if r else "1")
    if dense is None:
        dense = plan.n <= MAX_CHANNEL_QUBITS
    if dense and plan.r:
        try:
            phi = compose_encoder(plan)
        except PreconditionError as exc:
            rep.add("dense_channel", False, residual=float("inf"), details=f"channel not built: {exc}")
            return rep
        rep.extend(verify_ftde(plan, tol=tol, phi=phi))
        try:
            name, sigma, _ = out_of_basin_gauge_state(plan)
            rep.extend(verify_ftde(plan, gauge_states=[(name, sigma)], expected_fail=[name], tol=tol, phi=phi),
                       prefix="negative:")
        except ValueError:
            pass
        rep.extend(check_range(plan, rng, samples=20 if plan.n > 8 else 50, tol=tol, phi=phi))
        if plan.order_robust and not ordered:
            rep.extend(check_order_robustness(plan, rng, tol=max(tol * 1e-2, DEFAULT_TOL.equality)))
    return rep
