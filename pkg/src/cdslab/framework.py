"""Protocol objects and their exact execution.

Three families of protocol representations live here:

* classical :class:`CdsProtocol` / :class:`PsmProtocol`: message functions
  over integer-encoded inputs plus dyadic shared randomness, executed by
  exhaustive enumeration with exact rational probabilities;
* dense :class:`CdqsProtocol`: named-subsystem quantum channels for Alice
  and Bob plus an optional pure resource state, executed by channel
  composition (feasible for the small toy protocols);
* :class:`TranscriptCdqsProtocol`: the special but common shape "classical
  transcript + one Pauli-padded qubit", stored as exact probability blocks
  so that protocols with large classical registers stay cheap to verify.

Integer encodings: an ``n``-bit input is an integer in ``[0, 2^n)``; bit
``i`` of ``x`` is ``(x >> i) & 1``.  Shared randomness is an integer
``r in [0, 2^randomness_bits)``.

Subsystem naming convention for dense CDQS protocols: the secret is ``Q``
(reference copy ``Qbar``), the resource state lives on ``(L, R)``, Alice's
channel consumes ``(Q, L)`` and Bob's consumes ``R``; message subsystems
may have any non-colliding names, and the decoder consumes exactly the
message subsystems and outputs ``Q``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Optional, Sequence

import numpy as np

from .qcore import (
    DensityMatrix,
    QuantumChannel,
    StateVector,
    apply_channel,
    canonical_kraus,
    channel_from_choi,
    layout_dim,
    layout_names,
    maximally_entangled,
    tensor,
)

ENUMERATION_BUDGET_BITS = 24
#: cap on the mid-protocol state dimension of dense CDQS objects
DENSE_DIMENSION_BUDGET = 4096

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
#: qubit pad operators X^{k1} Z^{k2} indexed by k = 2*k1 + k2
PAD_OPERATORS = (_I2, _Z, _X, _X @ _Z)


# ---------------------------------------------------------------------------
# promise functions
# ---------------------------------------------------------------------------

class PromiseFunction:
    """A partial Boolean function on integer-encoded input pairs.

    Parameters
    ----------
    n : int
        Input bit-length (both sides), so inputs range over ``[0, 2^n)``
        unless explicit domain sizes are given.
    value_fn : callable
        ``(x, y) -> 0 | 1 | None`` with None meaning "outside the promise".
    name : str
    x_size, y_size : int, optional
        Domain sizes when they are not ``2^n``.
    """

    __slots__ = ("n", "name", "x_size", "y_size", "_value_fn")

    def __init__(self, n, value_fn, name, x_size=None, y_size=None):
        object.__setattr__(self, "n", int(n))
        object.__setattr__(self, "name", str(name))
        object.__setattr__(self, "x_size", int(x_size) if x_size else 1 << int(n))
        object.__setattr__(self, "y_size", int(y_size) if y_size else 1 << int(n))
        object.__setattr__(self, "_value_fn", value_fn)

    def __setattr__(self, *_):
        raise AttributeError("PromiseFunction is immutable")

    def value(self, x: int, y: int) -> Optional[int]:
        if not (0 <= x < self.x_size and 0 <= y < self.y_size):
            raise ValueError(f"input ({x}, {y}) outside domain of {self.name}")
        v = self._value_fn(x, y)
        return None if v is None else int(v)

    def promise_pairs(self):
        """All in-promise input pairs, in lexicographic order."""
        for x in range(self.x_size):
            for y in range(self.y_size):
                if self.value(x, y) is not None:
                    yield x, y

    def ones(self):
        return [(x, y) for x, y in self.promise_pairs() if self.value(x, y) == 1]

    def zeros(self):
        return [(x, y) for x, y in self.promise_pairs() if self.value(x, y) == 0]

    def __repr__(self):
        return f"PromiseFunction({self.name}, n={self.n})"


# ---------------------------------------------------------------------------
# cost accounting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CostReport:
    """Exact resource counts for one protocol.

    Communication is ``comm_bits + comm_qubits`` (the log of the total
    message dimension); the shared-resource side is split the same way.
    """

    comm_bits: int
    comm_qubits: int
    shared_random_bits: int
    shared_epr_pairs: int

    def __post_init__(self):
        for name in ("comm_bits", "comm_qubits", "shared_random_bits", "shared_epr_pairs"):
            v = getattr(self, name)
            if not isinstance(v, int) or v < 0:
                raise ValueError(f"{name} must be a nonnegative integer, got {v!r}")

    @property
    def total_communication(self) -> int:
        return self.comm_bits + self.comm_qubits

    def scaled(self, k: int) -> "CostReport":
        return CostReport(
            self.comm_bits * k,
            self.comm_qubits * k,
            self.shared_random_bits * k,
            self.shared_epr_pairs * k,
        )

    def as_dict(self) -> dict:
        return {
            "comm_bits": self.comm_bits,
            "comm_qubits": self.comm_qubits,
            "shared_random_bits": self.shared_random_bits,
            "shared_epr_pairs": self.shared_epr_pairs,
        }


def _exact_log2(d: int, what: str) -> int:
    k = d.bit_length() - 1
    if d <= 0 or (1 << k) != d:
        raise ValueError(f"{what} dimension {d} is not a power of two; supply an explicit cost")
    return k


# ---------------------------------------------------------------------------
# classical protocols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CdsProtocol:
    """A classical conditional-disclosure-of-secrets protocol.

    ``message_a(x, s, r)`` and ``message_b(y, r)`` return hashable message
    values; ``decoder(m_a, x, m_b, y)`` returns the recovered secret, or
    None when the transcript announces "nothing disclosed".
    """

    n: int
    randomness_bits: int
    secret_alphabet: int
    message_a: Callable[[int, int, int], Hashable]
    message_b: Callable[[int, int], Hashable]
    decoder: Callable[[Hashable, int, Hashable, int], Optional[int]]
    message_bits_a: int
    message_bits_b: int
    construction: str = ""
    params: tuple = ()

    @property
    def kind(self) -> str:
        return "cds"

    def x_inputs(self):
        return range(1 << self.n)

    def y_inputs(self):
        return range(1 << self.n)


@dataclass(frozen=True)
class PsmProtocol:
    """A private-simultaneous-messages protocol (referee sees only messages)."""

    n: int
    randomness_bits: int
    value_alphabet: int
    message_a: Callable[[int, int], Hashable]
    message_b: Callable[[int, int], Hashable]
    referee: Callable[[Hashable, Hashable], int]
    message_bits_a: int
    message_bits_b: int
    x_bits: int = 0  # Alice's input width when it differs from n
    construction: str = ""
    params: tuple = ()

    @property
    def kind(self) -> str:
        return "psm"

    def x_inputs(self):
        return range(1 << (self.x_bits or self.n))

    def y_inputs(self):
        return range(1 << self.n)


def enumerate_message_distribution(protocol, x: int, y: int, s: Optional[int] = None):
    """Exact transcript distribution of a classical protocol at one input.

    Returns a mapping ``(m_a, m_b) -> Fraction`` whose values sum to 1.
    For CDS protocols the secret ``s`` is required; PSM protocols take none.
    """
    if protocol.randomness_bits > ENUMERATION_BUDGET_BITS:
        raise ValueError(
            f"enumeration over {protocol.randomness_bits} randomness bits exceeds "
            f"the {ENUMERATION_BUDGET_BITS}-bit budget"
        )
    total = 1 << protocol.randomness_bits
    counts: dict = {}
    if isinstance(protocol, CdsProtocol):
        if s is None:
            raise ValueError("CDS enumeration requires the secret value")
        for r in range(total):
            key = (protocol.message_a(x, s, r), protocol.message_b(y, r))
            counts[key] = counts.get(key, 0) + 1
    else:
        for r in range(total):
            key = (protocol.message_a(x, r), protocol.message_b(y, r))
            counts[key] = counts.get(key, 0) + 1
    return {key: Fraction(c, total) for key, c in counts.items()}

def cds_decode_failure(p: CdsProtocol, x: int, y: int, s: int) -> Fraction:
    """Exact probability that the referee fails to output ``s``."""
    total = 1 << p.randomness_bits
    bad = 0
    for r in range(total):
        got = p.decoder(p.message_a(x, s, r), x, p.message_b(y, r), y)
        if got != s:
            bad += 1
    return Fraction(bad, total)

def psm_decode_failure(p: PsmProtocol, x: int, y: int, value: int) -> Fraction:
    """Exact probability that the referee's output differs from ``value``."""
    total = 1 << p.randomness_bits
    bad = 0
    for r in range(total):
        if p.referee(p.message_a(x, r), p.message_b(y, r)) != value:
            bad += 1
    return Fraction(bad, total)


# ---------------------------------------------------------------------------
# dense quantum protocols
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CdqsProtocol:
    """A CDQS protocol in explicit channel form.

    ``alice_channel(x)`` consumes ``(Q, L)`` (or just ``Q`` when there is
    no resource), ``bob_channel(y)`` consumes ``R``; ``decoder(x, y)``
    returns a channel from the message subsystems to ``Q``, or None on
    inputs where decoding is not promised.
    """

    n: int
    d_q: int
    alice_channel: Callable[[int], QuantumChannel]
    bob_channel: Optional[Callable[[int], QuantumChannel]]
    decoder: Callable[[int, int], Optional[QuantumChannel]]
    resource: Optional[StateVector] = None
    cost: Optional[CostReport] = None
    construction: str = ""
    params: tuple = ()

    @property
    def kind(self) -> str:
        return "cdqs"

    def x_inputs(self):
        return range(1 << self.n)

    def y_inputs(self):
        return range(1 << self.n)

    def message_dims(self) -> tuple[int, int]:
        """(dim of Alice's message, dim of Bob's message), probed at x=y=0."""
        da = layout_dim(self.alice_channel(0).output_layout)
        db = layout_dim(self.bob_channel(0).output_layout) if self.bob_channel else 1
        return da, db


def run_cdqs(p: CdqsProtocol, x: int, y: int, secret: DensityMatrix) -> DensityMatrix:
    """Execute the protocol on an explicit secret state; result on messages."""
    if secret.layout != (("Q", p.d_q),):
        raise ValueError(f"secret must live on (('Q', {p.d_q}),), got {secret.layout}")
    state = secret if p.resource is None else tensor(secret, p.resource.density_matrix())
    state = apply_channel(p.alice_channel(x), state)
    if p.bob_channel is not None:
        state = apply_channel(p.bob_channel(y), state)
    return state

def mid_protocol_state(p: CdqsProtocol, x: int, y: int) -> DensityMatrix:
    """Joint state of the reference ``Qbar`` and both messages.

    The secret register enters maximally entangled with ``Qbar``, so this
    is the (normalised) Choi state of the combined protocol channel.
    """
    phi = maximally_entangled("Qbar", "Q", p.d_q)
    state = phi if p.resource is None else tensor(phi, p.resource)
    rho = state.density_matrix()
    rho = apply_channel(p.alice_channel(x), rho)
    if p.bob_channel is not None:
        rho = apply_channel(p.bob_channel(y), rho)
    return rho

def decoded_entanglement_fidelity(p: CdqsProtocol, x: int, y: int) -> float:
    """``<phi+| (decoder (x) id)(mid state) |phi+>`` for the shipped decoder."""
    dec = p.decoder(x, y)
    if dec is None:
        raise ValueError(f"no decoder shipped for input ({x}, {y})")
    rho = apply_channel(dec, mid_protocol_state(p, x, y))
    rho = rho.permuted(["Qbar", "Q"])
    phi = maximally_entangled("Qbar", "Q", p.d_q)
    return float(np.real(phi.amplitudes.conj() @ rho.entries @ phi.amplitudes))

def joint_channel(p: CdqsProtocol, x: int, y: int) -> QuantumChannel:
    """The combined channel ``Q -> messages`` at a fixed input pair."""
    mid = mid_protocol_state(p, x, y)
    msg_names = [nm for nm, _ in mid.layout if nm != "Qbar"]
    msg_layout = tuple(item for item in mid.layout if item[0] != "Qbar")
    j = mid.permuted(list(msg_names) + ["Qbar"])
    return channel_from_choi(j.entries, (("Q", p.d_q),), msg_layout)


def _regroup_matrix(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Permutation matrix sending basis order ``dims`` to ``dims[perm]``."""
    dims = tuple(dims)
    d = math.prod(dims)
    src = np.arange(d)
    digits = np.array(np.unravel_index(src, dims))
    new_dims = [dims[p] for p in perm]
    dst = np.ravel_multi_index([digits[p] for p in perm], new_dims)
    mat = np.zeros((d, d))
    mat[dst, src] = 1.0
    return mat

def _interleave(k: int) -> list[int]:
    # (a1..ak, b1..bk) -> (a1, b1, a2, b2, ...)
    out = []
    for i in range(k):
        out.extend([i, k + i])
    return out

def _kron_repeat(channel: QuantumChannel, k: int, in_dims, out_dim, in_layout, out_layout):
    """k-fold product of a channel whose input has two registers.

    Input registers group as (first^k, second^k); the single output
    register groups as out^k.
    """
    da, db = in_dims
    perm = _interleave(k)
    p_in = _regroup_matrix([da] * k + [db] * k, perm)
    ops = [np.eye(1)]
    for _ in range(k):
        ops = [np.kron(a, b) for a in ops for b in channel.kraus_operators]
    kraus = [op @ p_in for op in ops]
    ch = QuantumChannel(kraus, in_layout, out_layout, validate=False)
    if len(kraus) > ch.dim_in * ch.dim_out:
        ch = canonical_kraus(ch)
    return ch

def parallel_repeat(p: CdqsProtocol, k: int) -> CdqsProtocol:
    """Independent k-fold parallel composition (secret dimension ``d_q^k``).

    Costs scale exactly by ``k``; correctness and security of the result
    are measured, not assumed.
    """
    if k < 1:
        raise ValueError("repetition count must be >= 1")
    if k == 1:
        return p
    da, db = p.message_dims()
    dl = layout_dim(p.resource.layout[:1]) if p.resource is not None else 1
    dr = layout_dim(p.resource.layout[1:]) if p.resource is not None else 1
    mid_dim = (p.d_q * da * db) ** k
    if mid_dim > DENSE_DIMENSION_BUDGET:
        raise ValueError(
            f"parallel_repeat({k}) mid-state dimension {mid_dim} exceeds the "
            f"dense budget {DENSE_DIMENSION_BUDGET}"
        )

    resource = None
    if p.resource is not None:
        amps = np.array([1.0], dtype=complex)
        for _ in range(k):
            amps = np.kron(amps, p.resource.amplitudes)
        regroup = _regroup_matrix([dl, dr] * k, [2 * i for i in range(k)] + [2 * i + 1 for i in range(k)])
        resource = StateVector(regroup @ amps, (("L", dl**k), ("R", dr**k)), validate=False)

    def alice(x, _p=p, _k=k, _dl=dl):
        base = _p.alice_channel(x)
        if _p.resource is None:
            # single input register: plain Kronecker power
            ops = [np.eye(1)]
            for _ in range(_k):
                ops = [np.kron(a, b) for a in ops for b in base.kraus_operators]
            return QuantumChannel(
                ops, (("Q", _p.d_q**_k),), (("MA", base.dim_out**_k),), validate=False
            )
        return _kron_repeat(
            base,
            _k,
            (_p.d_q, _dl),
            base.dim_out,
            (("Q", _p.d_q**_k), ("L", _dl**_k)),
            (("MA", base.dim_out**_k),),
        )

    bob = None
    if p.bob_channel is not None:
        def bob(y, _p=p, _k=k):
            base = _p.bob_channel(y)
            ops = [np.eye(1)]
            for _ in range(_k):
                ops = [np.kron(a, b) for a in ops for b in base.kraus_operators]
            return QuantumChannel(
                ops, (("R", base.dim_in**_k),), (("MB", base.dim_out**_k),), validate=False
            )

    def decoder(x, y, _p=p, _k=k, _da=da, _db=db):
        base = _p.decoder(x, y)
        if base is None:
            return None
        if _db == 1:
            ops = [np.eye(1)]
            for _ in range(_k):
                ops = [np.kron(a, b) for a in ops for b in base.kraus_operators]
            in_lt = (("MA", _da**_k),) if _p.bob_channel is None else (("MA", _da**_k), ("MB", 1))
            return QuantumChannel(ops, in_lt, (("Q", _p.d_q**_k),), validate=False)
        return _kron_repeat(
            base,
            _k,
            (_da, _db),
            _p.d_q,
            (("MA", _da**_k), ("MB", _db**_k)),
            (("Q", _p.d_q**_k),),
        )

    return CdqsProtocol(
        n=p.n,
        d_q=p.d_q**k,
        alice_channel=alice,
        bob_channel=bob,
        decoder=decoder,
        resource=resource,
        cost=p.cost.scaled(k) if p.cost is not None else None,
        construction=f"parallel_repeat({p.construction or 'anonymous'}, k={k})",
        params=p.params + (("repetitions", k),),
    )


# ---------------------------------------------------------------------------
# transcript-form CDQS
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TranscriptCdqsProtocol:
    """CDQS protocols of the shape "classical transcript + padded qubit".

    ``blocks(x, y)`` returns the exact joint distribution of the classical
    transcript and the Pauli pad key as a list of
    ``(probability: Fraction, transcript: hashable, pad_key: 0..3)``;
    the message consists of the transcript plus the secret qubit padded by
    ``X^{k1} Z^{k2}`` with ``k = 2*k1 + k2``.  ``decode_key(t, x, y)``
    recovers the pad key from the transcript (None when it cannot).

    This exact block form keeps verification rational-arithmetic cheap even
    when the classical registers are far too large for dense simulation.
    """

    n: int
    d_q: int
    blocks: Callable[[int, int], Sequence[tuple]]
    decode_key: Callable[[Hashable, int, int], Optional[int]]
    cost: CostReport
    construction: str = ""
    params: tuple = ()

    @property
    def kind(self) -> str:
        return "cdqs-transcript"

    def x_inputs(self):
        return range(1 << self.n)

    def y_inputs(self):
        return range(1 << self.n)

    def entanglement_fidelity(self, x: int, y: int) -> Fraction:
        return transcript_entanglement_fidelity(self, x, y)

    def product_distance(self, x: int, y: int) -> Fraction:
        return transcript_product_distance(self, x, y)


def transcript_block_checks(p: TranscriptCdqsProtocol, x: int, y: int) -> None:
    """Validate that the block list at one input is a distribution."""
    total = Fraction(0)
    for prob, _t, key in p.blocks(x, y):
        if prob < 0:
            raise ValueError("negative block probability")
        if not 0 <= int(key) < 4:
            raise ValueError(f"pad key {key} outside 0..3")
        total += prob
    if total != 1:
        raise ValueError(f"block probabilities sum to {total}, not 1")

def transcript_entanglement_fidelity(p: TranscriptCdqsProtocol, x: int, y: int) -> Fraction:
    """Exact decoded entanglement fidelity at one input.

    Unpadding with the decoded key either restores the maximally entangled
    state (key correct) or maps it to an orthogonal Bell state, so the
    fidelity is the probability mass whose key is decoded correctly.
    """
    good = Fraction(0)
    for prob, t, key in p.blocks(x, y):
        if p.decode_key(t, x, y) == key:
            good += prob
    return good

def transcript_product_distance(p: TranscriptCdqsProtocol, x: int, y: int) -> Fraction:
    """Exact ``|| rho_{QbarM} - pi (x) rho_M ||_1`` at one input.

    Within each transcript block the padded half of the entangled pair is
    a Bell-diagonal state with weights given by the pad-key distribution;
    the product comparison state is the uniform Bell mixture, so the block
    contributes an exact l1 distance between key distributions.
    """
    per_transcript: dict = {}
    for prob, t, key in p.blocks(x, y):
        bucket = per_transcript.setdefault(t, [Fraction(0)] * 4)
        bucket[key] += prob
    dist = Fraction(0)
    for weights in per_transcript.values():
        block_total = sum(weights)
        for w in weights:
            dist += abs(w - block_total / 4)
    return dist


# ---------------------------------------------------------------------------
# conversions
# ---------------------------------------------------------------------------

def classical_to_quantum_lift(key_cds: CdsProtocol) -> CdqsProtocol:
    """Turn a classical CDS hiding 2-bit keys into a CDQS for one qubit.

    Alice draws a uniform pad key ``k = (k1, k2)``, applies ``X^{k1} Z^{k2}``
    to the secret qubit, and runs the classical CDS with secret ``k``; the
    referee recovers the key exactly when the CDS discloses it and unpads.
    Message subsystems: ``MAc`` (Alice's classical message), ``Qs`` (the
    padded qubit), ``MBc`` (Bob's classical message).
    """
    if key_cds.secret_alphabet != 4:
        raise ValueError("the pad lift needs a CDS hiding 2-bit secrets (alphabet 4)")
    r_count = 1 << key_cds.randomness_bits
    xs = list(key_cds.x_inputs())
    ys = list(key_cds.y_inputs())
    ma_space = sorted(
        {key_cds.message_a(x, s, r) for x in xs for s in range(4) for r in range(r_count)}
    )
    mb_space = sorted({key_cds.message_b(y, r) for y in ys for r in range(r_count)})
    ma_index = {m: i for i, m in enumerate(ma_space)}
    mb_index = {m: i for i, m in enumerate(mb_space)}
    dim_a, dim_b = len(ma_space), len(mb_space)

    resource = StateVector(
        np.eye(r_count, dtype=complex).reshape(-1) / math.sqrt(r_count),
        (("L", r_count), ("R", r_count)),
        validate=False,
    )

    def alice(x, _p=key_cds):
        kraus = []
        for r in range(r_count):
            sel = np.zeros((1, r_count))
            sel[0, r] = 1.0
            for key in range(4):
                col = np.zeros((dim_a, 1))
                col[ma_index[_p.message_a(x, key, r)], 0] = 1.0
                op = np.kron(np.kron(col, PAD_OPERATORS[key]), sel) / 2.0
                kraus.append(op)
        return QuantumChannel(
            kraus, (("Q", 2), ("L", r_count)), (("MAc", dim_a), ("Qs", 2)), validate=False
        )

    def bob(y, _p=key_cds):
        kraus = []
        for r in range(r_count):
            sel = np.zeros((1, r_count))
            sel[0, r] = 1.0
            col = np.zeros((dim_b, 1))
            col[mb_index[_p.message_b(y, r)], 0] = 1.0
            kraus.append(col @ sel)
        return QuantumChannel(kraus, (("R", r_count),), (("MBc", dim_b),), validate=False)

    def decoder(x, y, _p=key_cds):
        kraus = []
        for i, ma in enumerate(ma_space):
            row_a = np.zeros((1, dim_a))
            row_a[0, i] = 1.0
            for j, mb in enumerate(mb_space):
                row_b = np.zeros((1, dim_b))
                row_b[0, j] = 1.0
                key = _p.decoder(ma, x, mb, y)
                unpad = _I2 if key is None else PAD_OPERATORS[int(key)].conj().T
                kraus.append(np.kron(np.kron(row_a, unpad), row_b))
        return QuantumChannel(
            kraus, (("MAc", dim_a), ("Qs", 2), ("MBc", dim_b)), (("Q", 2),), validate=False
        )

    cost = CostReport(
        comm_bits=key_cds.message_bits_a + key_cds.message_bits_b,
        comm_qubits=1,
        shared_random_bits=key_cds.randomness_bits,
        shared_epr_pairs=0,
    )
    return CdqsProtocol(
        n=key_cds.n,
        d_q=2,
        alice_channel=alice,
        bob_channel=bob,
        decoder=decoder,
        resource=resource,
        cost=cost,
        construction=f"pad_lift({key_cds.construction or 'anonymous'})",
        params=key_cds.params,
    )

def transcript_form(key_cds: CdsProtocol) -> TranscriptCdqsProtocol:
    """The same pad construction as :func:`classical_to_quantum_lift`, but
    kept in exact transcript form instead of dense channels.

    Each block is one (pad key, randomness) draw: probability
    ``1/(4 * 2^randomness_bits)``, transcript ``(m_A, m_B)``, and the key the
    pad used; the key is recovered by the classical decoder.  Agreement of
    the resulting fidelity/distance with the dense lift is a cross-check,
    and the rational form stays usable when the dense one would not fit.
    """
    if key_cds.secret_alphabet != 4:
        raise ValueError("the pad lift needs a CDS hiding 2-bit secrets (alphabet 4)")
    r_count = 1 << key_cds.randomness_bits
    weight = Fraction(1, 4 * r_count)

    def blocks(x, y, _p=key_cds):
        out = []
        for key in range(4):
            for r in range(r_count):
                out.append((weight, (_p.message_a(x, key, r), _p.message_b(y, r)), key))
        return out

    def decode_key(t, x, y, _p=key_cds):
        ma, mb = t
        key = _p.decoder(ma, x, mb, y)
        return None if key is None else int(key)

    return TranscriptCdqsProtocol(
        n=key_cds.n,
        d_q=2,
        blocks=blocks,
        decode_key=decode_key,
        cost=CostReport(
            comm_bits=key_cds.message_bits_a + key_cds.message_bits_b,
            comm_qubits=1,
            shared_random_bits=key_cds.randomness_bits,
            shared_epr_pairs=0,
        ),
        construction=f"pad_lift_transcript({key_cds.construction or 'anonymous'})",
        params=key_cds.params,
    )


def psm_to_cds(psm_family: Callable[..., PsmProtocol], f: PromiseFunction) -> CdsProtocol:
    """Build a one-bit-secret CDS for ``f`` from a PSM for ``h = s AND f``.

    ``psm_family(h, x_bits, y_bits)`` must return a PSM protocol computing
    ``h`` where Alice's input packs ``(x, s)`` with the secret in the low
    bit.  Outside the promise ``h`` is extended by 0 (those inputs are
    never judged).
    """

    def h(xt: int, y: int) -> int:
        s = xt & 1
        x = xt >> 1
        v = f.value(x, y)
        return s & v if v is not None else 0

    psm = psm_family(h, f.n + 1, f.n)

    return CdsProtocol(
        n=f.n,
        randomness_bits=psm.randomness_bits,
        secret_alphabet=2,
        message_a=lambda x, s, r, _p=psm: _p.message_a((x << 1) | s, r),
        message_b=lambda y, r, _p=psm: _p.message_b(y, r),
        decoder=lambda ma, x, mb, y, _p=psm: _p.referee(ma, mb),
        message_bits_a=psm.message_bits_a,
        message_bits_b=psm.message_bits_b,
        construction=f"psm_to_cds({f.name})",
        params=(("inner_psm", psm.construction),),
    )


# ---------------------------------------------------------------------------
# costs and descriptors
# ---------------------------------------------------------------------------

def protocol_cost(p) -> CostReport:
    """Exact resource counts; message sizes are input-independent."""
    if isinstance(p, (CdsProtocol, PsmProtocol)):
        return CostReport(
            comm_bits=p.message_bits_a + p.message_bits_b,
            comm_qubits=0,
            shared_random_bits=p.randomness_bits,
            shared_epr_pairs=0,
        )
    if isinstance(p, TranscriptCdqsProtocol):
        return p.cost
    if isinstance(p, CdqsProtocol):
        if p.cost is not None:
            return p.cost
        da, db = p.message_dims()
        qubits = _exact_log2(da, "Alice message") + _exact_log2(db, "Bob message")
        pairs = 0
        if p.resource is not None:
            pairs = _exact_log2(layout_dim(p.resource.layout[:1]), "resource")
        return CostReport(
            comm_bits=0, comm_qubits=qubits, shared_random_bits=0, shared_epr_pairs=pairs
        )
    cost = getattr(p, "cost", None)
    if isinstance(cost, CostReport):
        return cost
    raise TypeError(f"not a protocol object: {type(p).__name__}")

def describe(p) -> dict:
    """Structured descriptor: kind, size, construction, parameters, cost."""
    out = {
        "kind": p.kind,
        "n": p.n,
        "construction": p.construction or "anonymous",
        "params": {k: v for k, v in p.params},
        "cost": protocol_cost(p).as_dict(),
    }
    if isinstance(p, (CdqsProtocol, TranscriptCdqsProtocol)):
        out["d_q"] = p.d_q
    if isinstance(p, CdsProtocol):
        out["secret_alphabet"] = p.secret_alphabet
        out["randomness_bits"] = p.randomness_bits
    if isinstance(p, PsmProtocol):
        out["value_alphabet"] = p.value_alphabet
        out["randomness_bits"] = p.randomness_bits
    return out

def serialize_protocol(p) -> str:
    """Canonical JSON form of :func:`describe` (sorted keys, stable)."""
    return json.dumps(describe(p), sort_keys=True, indent=2)
