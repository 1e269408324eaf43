"""Constructive lower-bound machinery for CDQS protocols.

Three reductions are mechanized here, each turning a protocol object into a
different resource-bounded procedure whose behaviour witnesses the protocol's
cost:

* a one-way classical protocol: Bob quantizes the joint state of his message
  and the shared resource to ``k`` binary digits, Alice applies her channel
  to the reconstruction and thresholds the distance from product at
  ``gamma_threshold``;
* a two-prover, two-message, public-coin proof: the protocol's channels are
  purified into isometries, the verifier's accept vector for secret ``s`` is
  the purified run on ``|s>``, honest provers replay the protocol through the
  purified decoder, and cheating provers are limited by a shared,
  secret-independent marginal on the purifying systems;
* complementary decoding: on hiding inputs the secret is absent from the
  messages, so it must be recoverable from the channel's environment.

The cheating-prover optimum is approximated from below by a see-saw
(alternating polar updates of per-secret rotations with a top-eigenvector
update of the shared purification), so asserting it under the soundness
bound checks a necessary condition of the theorem, never a vacuous one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .framework import CdqsProtocol, PromiseFunction, joint_channel, parallel_repeat
from .qcore import (
    DensityMatrix,
    Isometry,
    StateVector,
    apply_channel,
    apply_channel_matrix,
    apply_isometry,
    basis_state,
    complementary_channel,
    find_best_decoder,
    identity_channel,
    layout_dim,
    layout_dims,
    layout_names,
    maximally_entangled,
    partial_trace,
    partial_trace_matrix,
    permute_matrix,
    purify_channel,
    tensor,
    trace_norm,
)


# ---------------------------------------------------------------------------
# thresholds and digit counts
# ---------------------------------------------------------------------------

def gamma_threshold(epsilon: float, delta: float, d_q: int) -> float:
    """Decision margin ``(1 - 1/sqrt(d_Q))/2 - eps/4 - delta/4``.

    This is the slack separating hiding inputs (distance to product at most
    ``delta``) from disclosing ones (distance at least ``2(1-1/sqrt(d_Q)) -
    eps``) after halving; it must stay positive for the one-way reduction
    to decide correctly.
    """
    if not (0 <= epsilon < 1 and 0 <= delta < 1):
        raise ValueError("error budgets must lie in [0, 1)")
    if d_q < 2:
        raise ValueError("secret dimension must be at least 2")
    gamma = 0.5 * (1 - 1 / math.sqrt(d_q)) - epsilon / 4 - delta / 4
    if gamma <= 0:
        raise ValueError(f"threshold {gamma} is not positive; budgets too loose")
    return gamma


def required_digits(q_b: int, e: int, gamma: float) -> int:
    """Binary digits per component so quantization noise stays under gamma.

    ``ceil(1.5 (q_B + E) - log2 gamma)`` where ``q_B`` counts Bob's message
    qubits and ``E`` the shared-resource qubits on his side of the cut.
    """
    if not 0 < gamma <= 1:
        raise ValueError("gamma must lie in (0, 1]")
    if q_b < 0 or e < 0:
        raise ValueError("qubit counts must be nonnegative")
    return math.ceil(1.5 * (q_b + e) - math.log2(gamma))


# ---------------------------------------------------------------------------
# fixed-point quantization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuantizedState:
    """A density matrix with every real component rounded to ``digits`` bits."""

    entries: np.ndarray
    layout: tuple
    digits: int
    frobenius_error: float
    l1_error: float
    frobenius_bound: float
    l1_bound: float


def quantize_state(rho: DensityMatrix, k: int) -> QuantizedState:
    """Round each real component of ``rho`` to ``k`` binary digits.

    The norm chain ``||rho_hat - rho||_1 <= sqrt(d) ||.||_2 <= d^{3/2}/2^k``
    is recomputed and asserted on every call.
    """
    if k < 1:
        raise ValueError("digit count must be at least 1")
    scale = float(1 << k)
    source = np.asarray(rho.entries, dtype=complex)
    entries = (np.round(source.real * scale) + 1j * np.round(source.imag * scale)) / scale
    d = source.shape[0]
    diff = entries - source
    fro = float(np.linalg.norm(diff))
    l1 = trace_norm(diff)
    fro_bound = d / scale
    l1_bound = d ** 1.5 / scale
    if l1 > math.sqrt(d) * fro + 1e-12 or math.sqrt(d) * fro > l1_bound + 1e-12:
        raise AssertionError(
            f"norm chain violated: {l1} <= sqrt({d})*{fro} <= {l1_bound}"
        )
    return QuantizedState(
        entries=entries, layout=rho.layout, digits=k,
        frobenius_error=fro, l1_error=l1,
        frobenius_bound=fro_bound, l1_bound=l1_bound,
    )


# ---------------------------------------------------------------------------
# one-way reduction
# ---------------------------------------------------------------------------

def _bob_side_state(p: CdqsProtocol, y: int) -> Optional[DensityMatrix]:
    """Joint state of Bob's message and Alice's resource half, or ``None``
    when the protocol has neither (Alice holds the whole pre-message state)."""
    state = maximally_entangled("Qbar", "Q", p.d_q)
    if p.resource is not None:
        state = tensor(state, p.resource)
    rho = state.density_matrix()
    if p.bob_channel is not None:
        rho = apply_channel(p.bob_channel(y), rho)
    names = [nm for nm, _ in rho.layout if nm not in ("Qbar", "Q")]
    if not names:
        return None
    return partial_trace(rho.permuted(["Qbar", "Q"] + names), keep=names)


def quantized_product_gap(p: CdqsProtocol, x: int, y: int, k: int):
    """Distance from product of the mid state rebuilt from a quantized
    description of Bob's side, plus the quantization record."""
    bob_side = _bob_side_state(p, y)
    record = None
    if bob_side is not None:
        record = quantize_state(bob_side, k)
        phi = maximally_entangled("Qbar", "Q", p.d_q).density_matrix()
        full = np.kron(np.asarray(phi.entries), record.entries)
        layout = phi.layout + record.layout
    else:
        phi = maximally_entangled("Qbar", "Q", p.d_q).density_matrix()
        full = np.asarray(phi.entries)
        layout = phi.layout
    mid, mid_layout = apply_channel_matrix(p.alice_channel(x), full, layout)
    mid_names = list(layout_names(mid_layout))
    perm = [mid_names.index("Qbar")] + [
        i for i, nm in enumerate(mid_names) if nm != "Qbar"
    ]
    mid = permute_matrix(mid, mid_layout, perm)
    dims = [layout_dims(mid_layout)[i] for i in perm]
    rho_m = partial_trace_matrix(mid, dims, keep_positions=list(range(1, len(dims))))
    gap = trace_norm(mid - np.kron(np.eye(p.d_q) / p.d_q, rho_m))
    return gap, record


def one_way_decide(
    p: CdqsProtocol,
    f: PromiseFunction,
    x: int,
    y: int,
    k: int,
    epsilon: float = 0.0,
    delta: float = 0.0,
) -> int:
    """Decide ``f(x, y)`` from a ``k``-digit classical message about Bob's side.

    Alice thresholds the reconstructed mid state's distance from product at
    ``gamma_threshold(epsilon, delta, d_q)``: above means disclosing, below
    means hiding.
    """
    gamma = gamma_threshold(epsilon, delta, p.d_q)
    bob_side = _bob_side_state(p, y)
    if bob_side is not None:
        dim_bob = layout_dim(bob_side.layout)
        needed = required_digits(math.ceil(math.log2(dim_bob)), 0, gamma)
    else:
        needed = 1
    if k < needed:
        raise ValueError(f"need at least {needed} digits, got {k}")
    gap, _ = quantized_product_gap(p, x, y, k)
    return 1 if gap > gamma else 0


# ---------------------------------------------------------------------------
# two-prover proof
# ---------------------------------------------------------------------------

def _pad_environment(iso: Isometry, target_dim: int) -> Isometry:
    """Grow the trailing environment register to ``target_dim`` with zeros."""
    env_name, env_dim = iso.output_layout[-1]
    if env_dim > target_dim:
        raise ValueError("environment already exceeds the requested dimension")
    if env_dim == target_dim:
        return iso
    dout = layout_dim(iso.output_layout) // env_dim
    din = layout_dim(iso.input_layout)
    mat = np.zeros((dout, target_dim, din), dtype=complex)
    mat[:, :env_dim, :] = iso.matrix.reshape(dout, env_dim, din)
    out_layout = iso.output_layout[:-1] + ((env_name, target_dim),)
    return Isometry(mat.reshape(dout * target_dim, din), iso.input_layout, out_layout)


@dataclass
class TwoProverProof:
    """Purified form of a protocol, ready for the two-prover verifier test.

    The verifier draws a uniform secret ``s`` (shared only with prover 1),
    receives the message systems from prover 1 and the purifying systems
    from prover 2, runs the purifications backwards and accepts exactly on
    the state ``|s> (x) resource`` — equivalently, acceptance probability is
    the overlap with the accept vector ``psi^s``.
    """

    protocol: CdqsProtocol
    k: int
    d_q: int
    alice_purification: Callable[[int], Isometry]
    bob_purification: Optional[Callable[[int], Isometry]]
    recovery: Callable[[int, int], Isometry]
    padded: bool
    test_description: str

    def accept_vector(self, x: int, y: int, s: int) -> StateVector:
        """``psi^s``: the purified protocol run on the basis secret ``s``."""
        if not 0 <= s < self.d_q:
            raise ValueError(f"secret {s} outside [0, {self.d_q})")
        state = basis_state(s, (("Q", self.d_q),))
        if self.protocol.resource is not None:
            state = tensor(state, self.protocol.resource)
        state = apply_isometry(self.alice_purification(x), state)
        if self.bob_purification is not None:
            state = apply_isometry(self.bob_purification(y), state)
        return state

    def system_names(self, x: int, y: int):
        """Message-system and purifying-system names, in layout order."""
        message = list(layout_names(self.protocol.alice_channel(x).output_layout))
        private = ["EA"]
        if self.protocol.bob_channel is not None:
            message += list(layout_names(self.protocol.bob_channel(y).output_layout))
            private.append("EB")
        return message, private

    def communication_cost(self, x: int, y: int) -> dict:
        """Log-dimensions of everything the provers and Bob send, with the
        ``2 * protocol cost + k`` budget recomputed from the same layouts."""
        a = self.alice_purification(x)
        d_ma = layout_dim(a.output_layout[:-1])
        d_ma_env = a.output_layout[-1][1]
        d_mb = d_mb_env = d_r = 1
        if self.bob_purification is not None:
            b = self.bob_purification(y)
            d_mb = layout_dim(b.output_layout[:-1])
            d_mb_env = b.output_layout[-1][1]
            d_r = layout_dim(b.input_layout)
        d_l = 1
        if self.protocol.resource is not None:
            total_resource = layout_dim(self.protocol.resource.layout)
            d_l = total_resource // d_r
        logs = {
            "m_a": math.log2(d_ma),
            "m_a_env": math.log2(d_ma_env),
            "m_b": math.log2(d_mb),
            "m_b_env": math.log2(d_mb_env),
            "r": math.log2(d_r),
        }
        total = sum(logs.values())
        bound = 2 * (math.log2(d_ma) + math.log2(d_mb)) + math.log2(self.d_q) \
            + math.log2(d_l) + math.log2(d_r)
        if total > bound + 1e-9:
            raise AssertionError(f"communication {total} exceeds the budget {bound}")
        logs["total"] = total
        logs["budget"] = bound
        return logs

    def system_bounds_ok(self, x: int, y: int) -> bool:
        """Purification environments within ``d_Q d_L d_MA`` and ``d_R d_MB``."""
        cost = self.communication_cost(x, y)
        a_ok = cost["m_a_env"] <= math.log2(self.d_q) + cost["m_a"] + (
            math.log2(layout_dim(self.protocol.resource.layout)) - cost["r"]
            if self.protocol.resource is not None else 0.0
        ) + 1e-9
        b_ok = cost["m_b_env"] <= cost["r"] + cost["m_b"] + 1e-9
        return a_ok and b_ok


def build_two_prover_proof(
    p: CdqsProtocol, k: int, pad_environments: bool = False
) -> TwoProverProof:
    """Purify a ``k``-fold parallel repetition of ``p`` into proof form.

    ``pad_environments`` grows each purifying register to its worst-case
    dimension so the communication identity ``total = 2 * protocol qubits
    + k`` holds exactly on resource-free protocols; unpadded environments
    (the default) keep the minimal Choi-rank dimensions, which changes no
    acceptance statistics but keeps the optimization spaces small.
    """
    rep = parallel_repeat(p, k)
    d_q = rep.d_q

    alice_cache: dict = {}
    bob_cache: dict = {}
    recovery_cache: dict = {}

    d_r = 1
    if rep.resource is not None and rep.bob_channel is not None:
        d_r = layout_dim(rep.bob_channel(0).input_layout)
    d_l = 1
    if rep.resource is not None:
        d_l = layout_dim(rep.resource.layout) // d_r

    def alice_purification(x: int) -> Isometry:
        if x not in alice_cache:
            iso = purify_channel(rep.alice_channel(x), env_name="EA")
            if pad_environments:
                ch = rep.alice_channel(x)
                iso = _pad_environment(iso, d_q * d_l * ch.dim_out)
            alice_cache[x] = iso
        return alice_cache[x]

    bob_purification = None
    if rep.bob_channel is not None:
        def bob_purification(y: int) -> Isometry:
            if y not in bob_cache:
                iso = purify_channel(rep.bob_channel(y), env_name="EB")
                if pad_environments:
                    ch = rep.bob_channel(y)
                    iso = _pad_environment(iso, d_r * ch.dim_out)
                bob_cache[y] = iso
            return bob_cache[y]

    def recovery(x: int, y: int) -> Isometry:
        if (x, y) not in recovery_cache:
            dec = rep.decoder(x, y)
            if dec is None:
                raise ValueError(f"no decoder shipped for input ({x}, {y})")
            recovery_cache[(x, y)] = purify_channel(dec, env_name="P")
        return recovery_cache[(x, y)]

    return TwoProverProof(
        protocol=rep,
        k=k,
        d_q=d_q,
        alice_purification=alice_purification,
        bob_purification=bob_purification,
        recovery=recovery,
        padded=pad_environments,
        test_description=(
            "verifier sends uniform s to prover 1 only; provers return message "
            "and purifying systems; verifier inverts both purifications and "
            "accepts on outcome (s, resource state, ancillas zero)"
        ),
    )


def _vector_as_matrix(state: StateVector, row_names, col_names) -> np.ndarray:
    """Amplitudes reshaped with ``row_names`` indexing rows (row-major)."""
    ordered = state.permuted(list(row_names) + list(col_names))
    rows = math.prod(d for nm, d in ordered.layout if nm in set(row_names))
    return np.asarray(ordered.amplitudes).reshape(rows, -1)


def honest_acceptance_by_secret(tp: TwoProverProof, f: PromiseFunction, x: int, y: int):
    """Exact acceptance probability of the honest strategy, per secret.

    Honest provers pre-share the state left after running the protocol on a
    maximally entangled secret and recovering through the purified decoder;
    prover 1 swaps in ``|s>`` and inverts the recovery.
    """
    if f.value(x, y) != 1:
        raise ValueError(f"input ({x}, {y}) is not a disclosing input")
    rec = tp.recovery(x, y)
    message, private = tp.system_names(x, y)

    phi = maximally_entangled("Qbar", "Q", tp.d_q)
    if tp.protocol.resource is not None:
        phi = tensor(phi, tp.protocol.resource)
    run = apply_isometry(tp.alice_purification(x), phi)
    if tp.bob_purification is not None:
        run = apply_isometry(tp.bob_purification(y), run)
    xi = apply_isometry(rec, run)
    # rows of xi over (Qbar, Q) are the (unnormalised) pure components of the
    # prover pre-shared state on (P, private); their squared norms sum to 1
    shares = _vector_as_matrix(xi, ["Qbar", "Q"], ["P"] + private)

    out = []
    for s in range(tp.d_q):
        chi = apply_isometry(rec, tp.accept_vector(x, y, s))
        blocks = _vector_as_matrix(chi, ["Q"], ["P"] + private)
        out.append(float(sum(abs(np.vdot(blocks[s], row)) ** 2 for row in shares)))
    return out


def honest_acceptance(tp: TwoProverProof, f: PromiseFunction, x: int, y: int) -> float:
    """Average honest acceptance over the uniform secret."""
    return float(np.mean(honest_acceptance_by_secret(tp, f, x, y)))


def _marginal_fidelity(a: np.ndarray, b: np.ndarray) -> float:
    """``F(tr_M |a><a|, tr_M |b><b|)`` from (M, M') amplitude matrices.

    Works in the singular bases, so the cost scales with the message
    dimension even when the purifying systems are much larger.
    """
    ua, sa, vha = np.linalg.svd(a, full_matrices=False)
    ub, sb, vhb = np.linalg.svd(b, full_matrices=False)
    core = (sa[:, None] * (vha.conj() @ vhb.conj().T)) * sb[None, :]
    root = float(np.linalg.svd(core, compute_uv=False).sum())
    return float(np.clip(root ** 2, 0.0, 1.0))


def message_orthogonality_check(tp: TwoProverProof, f: PromiseFunction, x: int, y: int) -> float:
    """Max pairwise fidelity of the accept vectors' purifying-side marginals."""
    if f.value(x, y) != 0:
        raise ValueError(f"input ({x}, {y}) is not a hiding input")
    message, private = tp.system_names(x, y)
    mats = [
        _vector_as_matrix(tp.accept_vector(x, y, s), message, private)
        for s in range(tp.d_q)
    ]
    worst = 0.0
    for s in range(tp.d_q):
        for t in range(s + 1, tp.d_q):
            worst = max(worst, _marginal_fidelity(mats[s], mats[t]))
    return worst


def soundness_bound(k: int, delta: float) -> float:
    """``sqrt(2^-k + delta 2^{-k/4})``: the cheating-prover ceiling."""
    if k < 1:
        raise ValueError("secret qubit count must be at least 1")
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    return math.sqrt(2.0 ** -k + delta * 2.0 ** (-k / 4))


@dataclass
class CheatResult:
    """Best cheating strategy found by the see-saw."""

    estimate: float
    sigma: np.ndarray
    rounds: int
    converged: bool
    unconstrained: float


def cheat_optimize(
    tp: TwoProverProof,
    f: PromiseFunction,
    x: int,
    y: int,
    max_rounds: int = 500,
    tol: float = 1e-10,
    restarts: int = 3,
    seed: int = 11,
) -> CheatResult:
    """See-saw lower estimate of the cheating provers' passing probability.

    The passing probability with a secret-independent marginal ``sigma`` on
    the purifying systems equals ``mean_s F(psi^s_{M'}, sigma)``; each
    fidelity is reached through a local rotation of the message systems
    (polar update), and the shared purification is then refreshed as the top
    eigenvector of the rotated accept vectors.  ``unconstrained`` reports the
    ablation where both provers see ``s`` and simply replay ``psi^s``.
    """
    if f.value(x, y) != 0:
        raise ValueError(f"input ({x}, {y}) is not a hiding input")
    message, private = tp.system_names(x, y)
    mats = [
        _vector_as_matrix(tp.accept_vector(x, y, s), message, private)
        for s in range(tp.d_q)
    ]
    d_q = tp.d_q
    unconstrained = float(np.mean([np.vdot(m, m).real ** 2 for m in mats]))

    def value_and_rotations(w):
        total = 0.0
        rotations = []
        for a in mats:
            g = w @ a.conj().T
            u, sv, vh = np.linalg.svd(g)
            rotations.append((vh.conj().T @ u.conj().T))
            total += float(sv.sum()) ** 2
        return total / d_q, rotations

    def refresh(rotations):
        # top eigenvector of mean_s |phi^s><phi^s| via the small Gram matrix
        phis = [rot.conj().T @ a for rot, a in zip(rotations, mats)]
        gram = np.array([[np.vdot(pa, pb) for pb in phis] for pa in phis])
        vals, vecs = np.linalg.eigh(gram)
        coeff = vecs[:, -1]
        w = sum(c * ph for c, ph in zip(coeff, phis))
        return w / np.linalg.norm(w)

    rng = np.random.default_rng(seed)
    starts = [mats[0] / np.linalg.norm(mats[0])]
    mean = sum(mats)
    starts.append(mean / np.linalg.norm(mean))
    for _ in range(max(0, restarts - len(starts) + 1)):
        guess = rng.standard_normal(mats[0].shape) + 1j * rng.standard_normal(mats[0].shape)
        starts.append(guess / np.linalg.norm(guess))

    best = -1.0
    best_sigma = None
    best_rounds = 0
    best_converged = False
    for w in starts:
        current, rotations = value_and_rotations(w)
        converged = False
        rounds = 0
        for rounds in range(1, max_rounds + 1):
            w = refresh(rotations)
            nxt, rotations = value_and_rotations(w)
            if nxt - current < tol:
                current = max(current, nxt)
                converged = True
                break
            current = nxt
        if current > best:
            best = current
            best_sigma = w.T @ w.conj()
            best_rounds = rounds
            best_converged = converged
    return CheatResult(
        estimate=best,
        sigma=best_sigma,
        rounds=best_rounds,
        converged=best_converged,
        unconstrained=unconstrained,
    )


# ---------------------------------------------------------------------------
# complementary decoding
# ---------------------------------------------------------------------------

def complementary_decode_check(p: CdqsProtocol, f: PromiseFunction, x: int, y: int) -> float:
    """Best-decoder error for recovering the secret from the environment.

    On hiding inputs the messages carry no secret, so the complementary
    channel must; the returned value is the Choi-difference trace norm of
    the best found decoder composed with the complement, against identity.
    """
    if f.value(x, y) != 0:
        raise ValueError(f"input ({x}, {y}) is not a hiding input")
    comp = complementary_channel(joint_channel(p, x, y))
    result = find_best_decoder(comp, identity_channel((("Q", p.d_q),)))
    return result.achieved_error


# ---------------------------------------------------------------------------
# proof-lab report
# ---------------------------------------------------------------------------

def proof_lab_report(
    p: CdqsProtocol,
    f: PromiseFunction,
    k: int,
    inputs: Optional[Sequence[tuple]] = None,
    epsilon_hat: float = 0.0,
    delta_hat: float = 0.0,
) -> str:
    """Structured text report of the two-prover checks per promise input."""
    tp = build_two_prover_proof(p, k)
    if inputs is None:
        inputs = list(f.promise_pairs())
    lines = [
        f"two-prover proof lab: protocol={getattr(p, 'construction', '') or 'anonymous'} "
        f"k={k} d_Q={tp.d_q}",
        f"budgets: epsilon_hat={epsilon_hat:.6g} delta_hat={delta_hat:.6g}",
    ]
    for x, y in sorted(inputs):
        value = f.value(x, y)
        if value == 1:
            accept = honest_acceptance(tp, f, x, y)
            floor = 1 - 2 * math.sqrt(max(epsilon_hat, 0.0))
            flag = "PASS" if accept >= floor - 1e-9 else "FAIL"
            lines.append(
                f"input ({x}, {y}) value=1: honest={accept:.9f} floor={floor:.9f} {flag}"
            )
        else:
            cheat = cheat_optimize(tp, f, x, y)
            ceiling = soundness_bound(k, delta_hat)
            ortho = message_orthogonality_check(tp, f, x, y)
            ortho_cap = 4 * math.sqrt(max(delta_hat, 0.0))
            c_flag = "PASS" if cheat.estimate <= ceiling + 1e-6 else "FAIL"
            o_flag = "PASS" if ortho <= ortho_cap + 1e-9 else "FAIL"
            lines.append(
                f"input ({x}, {y}) value=0: cheat={cheat.estimate:.9f} "
                f"bound={ceiling:.9f} {c_flag}; orthogonality={ortho:.9f} "
                f"cap={ortho_cap:.9f} {o_flag}; unconstrained={cheat.unconstrained:.6f}"
            )
    return "\n".join(lines)
