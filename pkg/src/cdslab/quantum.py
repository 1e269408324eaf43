"""Entanglement-assisted protocols, executed with exact arithmetic.

Everything in this module reduces to counting: measurement outcome
distributions come out of integer Walsh-Hadamard transforms, so all
probabilities are exact rationals and the verification layer never sees
floating-point noise.

Bit conventions match the classical module: an n-bit string is an integer
with bit i equal to ``(x >> i) & 1``; inner products are ``(u & v)``
parities.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .classical import ip_psm, neq_cds, double_secret, promise_neq_function
from .framework import CostReport, PsmProtocol, enumerate_message_distribution

_QUARTER = Fraction(1, 4)


def _as_bits_int(x, n: int) -> int:
    """Accept an integer or a bit sequence ('0011', [0,0,1,1], ...)."""
    if isinstance(x, int):
        if not 0 <= x < (1 << n):
            raise ValueError(f"input {x} does not fit in {n} bits")
        return x
    bits = [int(b) for b in x]
    if len(bits) != n or any(b not in (0, 1) for b in bits):
        raise ValueError(f"expected {n} bits, got {x!r}")
    return sum(b << i for i, b in enumerate(bits))


def _parity(v: int) -> int:
    return v.bit_count() & 1


def _wht_signs(z: int, n: int) -> list[int]:
    """Integer Walsh-Hadamard transform of the sign vector (-1)^{z_i}."""
    arr = [1 - 2 * ((z >> i) & 1) for i in range(n)]
    h = 1
    while h < n:
        for base in range(0, n, 2 * h):
            for j in range(base, base + h):
                a, b = arr[j], arr[j + h]
                arr[j], arr[j + h] = a + b, a - b
        h *= 2
    return arr


# ---------------------------------------------------------------------------
# Deutsch-Jozsa input shortening
# ---------------------------------------------------------------------------

def dj_shorten(x, y, n: int | None = None) -> dict[tuple[int, int], Fraction]:
    """Exact outcome distribution of the input-shortening measurement.

    Alice and Bob share ``(1/sqrt n) sum_i |i,i>``, inject the phases
    ``(-1)^{x_i}`` and ``(-1)^{y_i}``, apply Hadamards on both sides and
    measure, obtaining ``(a, b)`` of ``log n`` bits each.  The amplitude
    of ``(a, b)`` is ``S_{a xor b} / (n sqrt n)`` where ``S`` is the
    Walsh-Hadamard transform of the joint phase signs, so the distribution
    is an exact rational function of ``z = x xor y``.
    """
    if n is None:
        if isinstance(x, int):
            raise ValueError("pass n explicitly when inputs are integers")
        n = len(x)
    if n < 2 or n & (n - 1):
        raise ValueError("string length must be a power of two >= 2")
    z = _as_bits_int(x, n) ^ _as_bits_int(y, n)
    signs = _wht_signs(z, n)
    cube = n**3
    out = {}
    for a in range(n):
        for b in range(n):
            s = signs[a ^ b]
            if s:
                out[(a, b)] = Fraction(s * s, cube)
    return out


def dj_equal_probability(x, y, n: int | None = None) -> Fraction:
    """Exact probability that the two shortened outcomes coincide."""
    dist = dj_shorten(x, y, n)
    return sum((p for (a, b), p in dist.items() if a == b), Fraction(0))


# ---------------------------------------------------------------------------
# hybrid promise-NEQ CDQS
# ---------------------------------------------------------------------------

class HybridNeqCdqs:
    """CDQS for promise NEQ: shorten inputs, then disclose a qubit pad key.

    On strings of length ``n`` (a power of two), Alice and Bob first run
    the Deutsch-Jozsa shortening to get ``log n``-bit outcomes ``(a, b)``
    with ``a = b`` exactly when ``x = y`` under the promise.  Alice then
    draws a uniform two-bit pad key, applies ``X^{k1} Z^{k2}`` to the
    secret qubit, and both run two independent NEQ CDS copies on ``(a, b)``
    hiding the key bits.  Alice's message is ``(a, CDS messages, padded
    qubit)``; Bob's is ``(b, CDS messages)`` — the outcomes travel with
    the messages because the referee needs the CDS input pair to decode.

    Verification quantities are exact: per-(a, b) transcript statistics of
    a single CDS copy are tabulated once, and both the decoded
    entanglement fidelity and the distance from product factorize through
    them because the two copies are conditionally independent given
    ``(a, b)``.
    """

    kind = "cdqs-transcript"
    d_q = 2

    def __init__(self, n: int):
        if n < 2 or n & (n - 1):
            raise ValueError("hybrid protocol needs a power-of-two string length >= 2")
        self.n = n
        self.m = n.bit_length() - 1
        self._copy = neq_cds(self.m)
        self.key_cds = double_secret(self._copy)
        self.construction = f"neq_promise_cdqs({n})"
        self.params = (("shortened_bits", self.m),)
        r_count = 1 << self._copy.randomness_bits
        # Per shortened pair (a, b): the per-copy posterior classes
        # {(P[key=0|t], P[key=1|t]) -> transcript mass} and the exact
        # probability that the copy's decoder returns the right key bit.
        self._classes: dict = {}
        self._correct: dict = {}
        for a in range(n):
            for b in range(n):
                counts: dict = {}
                good = 0
                for s in (0, 1):
                    for r in range(r_count):
                        t = (self._copy.message_a(a, s, r), self._copy.message_b(b, r))
                        bucket = counts.setdefault(t, [0, 0])
                        bucket[s] += 1
                        if self._copy.decoder(t[0], a, t[1], b) == s:
                            good += 1
                classes: dict = {}
                for c0, c1 in counts.values():
                    tot = c0 + c1
                    key = (Fraction(c0, tot), Fraction(c1, tot))
                    classes[key] = classes.get(key, Fraction(0)) + Fraction(tot, 2 * r_count)
                self._classes[(a, b)] = classes
                self._correct[(a, b)] = Fraction(good, 2 * r_count)
        self._block_cache: dict = {}

    @property
    def cost(self) -> CostReport:
        m = self.m
        return CostReport(
            # a and b travel alongside the doubled CDS messages
            comm_bits=2 * m + self.key_cds.message_bits_a + self.key_cds.message_bits_b,
            comm_qubits=1,
            shared_random_bits=self.key_cds.randomness_bits,
            shared_epr_pairs=m,
        )

    def x_inputs(self):
        return range(1 << self.n)

    def y_inputs(self):
        return range(1 << self.n)

    def entanglement_fidelity(self, x: int, y: int) -> Fraction:
        """Exact post-decoding entanglement fidelity with the reference.

        Whenever ``a != b`` both CDS copies disclose their key bit with the
        tabulated probability and the referee unpads; a wrongly decoded key
        sends the entangled pair to an orthogonal Bell state.  On ``a = b``
        outcomes nothing is disclosed and the referee's identity unpad is
        right only for the zero key (probability 1/4).
        """
        fid = Fraction(0)
        for (a, b), p in dj_shorten(x, y, self.n).items():
            if a == b:
                fid += p * _QUARTER
            else:
                c = self._correct[(a, b)]
                fid += p * c * c
        return fid

    def product_distance(self, x: int, y: int) -> Fraction:
        """Exact ``|| rho_{QbarM} - pi (x) rho_M ||_1``.

        Within one transcript the padded qubit half of the entangled pair
        is Bell-diagonal with weights equal to the key posterior, so each
        transcript contributes the l1 distance between that posterior and
        uniform; posteriors factorize across the two CDS copies.
        """
        dist = Fraction(0)
        for (a, b), p in dj_shorten(x, y, self.n).items():
            dist += p * self._block_distance(a, b)
        return dist

    def _block_distance(self, a: int, b: int) -> Fraction:
        if (a, b) in self._block_cache:
            return self._block_cache[(a, b)]
        classes = self._classes[(a, b)]
        total = Fraction(0)
        for qs, w1 in classes.items():
            for ps, w2 in classes.items():
                gap = sum(abs(qa * qb - _QUARTER) for qa in qs for qb in ps)
                total += w1 * w2 * gap
        self._block_cache[(a, b)] = total
        return total


def neq_promise_cdqs(n: int) -> HybridNeqCdqs:
    """The hybrid CDQS for promise NEQ on length-n strings (n power of 2)."""
    return HybridNeqCdqs(n)


def hybrid_promise_function(n: int):
    return promise_neq_function(n)


# ---------------------------------------------------------------------------
# Boolean Hidden Matching
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BhmInstance:
    """One promise instance: string x, perfect matching, shift w, value.

    ``(Mx)_k = x_i xor x_j`` for the k-th matching edge ``(i, j)``; the
    promise is that ``Mx xor w`` has Hamming weight at least ``2n/3``
    (value 1) or below ``n/3`` (value 0).
    """

    n: int
    x: int
    matching: tuple[tuple[int, int], ...]
    w: int
    promised_value: int

    def __post_init__(self):
        two_n = 2 * self.n
        if not 0 <= self.x < (1 << two_n):
            raise ValueError("x out of range")
        if not 0 <= self.w < (1 << self.n):
            raise ValueError("w out of range")
        touched = [idx for pair in self.matching for idx in pair]
        if len(self.matching) != self.n or sorted(touched) != list(range(two_n)):
            raise ValueError("matching is not a perfect matching of [2n]")
        weight = (self.mx() ^ self.w).bit_count()
        if self.promised_value == 1:
            if 3 * weight < 2 * self.n:
                raise ValueError(f"weight {weight} violates the value-1 promise")
        elif self.promised_value == 0:
            if 3 * weight >= self.n:
                raise ValueError(f"weight {weight} violates the value-0 promise")
        else:
            raise ValueError("promised_value must be 0 or 1")

    def mx(self) -> int:
        out = 0
        for k, (i, j) in enumerate(self.matching):
            out |= (((self.x >> i) ^ (self.x >> j)) & 1) << k
        return out

    def edge_bit(self, k: int) -> int:
        """The target bit (Mx xor w)_k of edge k."""
        return ((self.mx() ^ self.w) >> k) & 1


def bhm_instance(n: int, target_value: int, seed: int) -> BhmInstance:
    """Deterministic promise instance with the requested value.

    The promise thresholds are the exact integer forms ``3w >= 2n``
    (value 1) and ``3w < n`` (value 0), which are meaningful for every
    positive edge count, not only multiples of 3.
    """
    if n <= 0:
        raise ValueError("edge count must be positive")
    if 2 * n > 24:
        raise ValueError("string length 2n must stay <= 24")
    rng = np.random.default_rng(seed)
    x = int(rng.integers(0, 1 << (2 * n)))
    perm = rng.permutation(2 * n)
    matching = tuple(
        tuple(sorted((int(perm[2 * k]), int(perm[2 * k + 1]))))
        for k in range(n)
    )
    if target_value == 1:
        weight = int(rng.integers((2 * n + 2) // 3, n + 1))
    else:
        weight = int(rng.integers(0, (n - 1) // 3 + 1))
    positions = rng.choice(n, size=weight, replace=False)
    noise = 0
    for p in positions:
        noise |= 1 << int(p)
    mx = 0
    for k, (i, j) in enumerate(matching):
        mx |= (((x >> i) ^ (x >> j)) & 1) << k
    return BhmInstance(
        n=n, x=x, matching=matching, w=mx ^ noise, promised_value=target_value
    )


def bhm_to_text(inst: BhmInstance) -> str:
    pairs = " ".join(f"({i},{j})" for i, j in inst.matching)
    return "\n".join(
        [
            "bhm-instance",
            f"n: {inst.n}",
            f"x: {inst.x:#x}",
            f"matching: {pairs}",
            f"w: {inst.w:#x}",
            f"promised_value: {inst.promised_value}",
        ]
    )


def bhm_from_text(text: str) -> BhmInstance:
    lines = [ln.strip() for ln in text.strip().splitlines()]
    if not lines or lines[0] != "bhm-instance":
        raise ValueError("missing bhm-instance header")
    fields = {}
    for ln in lines[1:]:
        key, _, value = ln.partition(":")
        fields[key.strip()] = value.strip()
    matching = tuple(
        (int(i), int(j)) for i, j in re.findall(r"\((\d+),(\d+)\)", fields["matching"])
    )
    return BhmInstance(
        n=int(fields["n"]),
        x=int(fields["x"], 16),
        matching=matching,
        w=int(fields["w"], 16),
        promised_value=int(fields["promised_value"]),
    )


class BhmPsqm:
    """The PSQM for Boolean Hidden Matching, simulated exactly.

    Alice and Bob share ``log(2n~)`` EPR pairs over the matching index
    space (``2n~`` = ``2n`` padded to a power of two; padded indices carry
    zero amplitude and no projector).  Alice injects the phases
    ``(-1)^{x_i}``; Bob measures the edge projectors ``|i><i| + |j><j|``;
    both apply Hadamards and measure, giving Alice ``k`` and Bob
    ``(l, i, j)``.  They then run the inner-product PSM on
    ``u = (k, 1, 1)`` and ``v = (i xor j, <l, i xor j>, w_ij)``, whose
    value is the vote ``x_i xor x_j xor w_ij`` for the measured edge.
    """

    kind = "psqm"

    def __init__(self, n: int):
        if n <= 0:
            raise ValueError("need at least one edge")
        if 2 * n > 24:
            raise ValueError("string length 2n must stay <= 24")
        self.n = n
        self.padded = 1 << (2 * n - 1).bit_length()
        self.index_bits = self.padded.bit_length() - 1
        self.inner = ip_psm(self.index_bits + 2)
        self.construction = f"bhm_psqm({n})"
        self.params = (("padded_index_space", self.padded),)

    @property
    def cost(self) -> CostReport:
        return CostReport(
            comm_bits=self.inner.message_bits_a + self.inner.message_bits_b,
            comm_qubits=0,
            shared_random_bits=self.inner.randomness_bits,
            shared_epr_pairs=self.index_bits,
        )

    def psm_inputs(self, inst: BhmInstance, edge: int, k: int, l: int) -> tuple[int, int]:
        """The inner PSM input pair produced by one measurement outcome."""
        i, j = inst.matching[edge]
        c = i ^ j
        mb = self.index_bits
        u = k | (1 << mb) | (1 << (mb + 1))
        v = c | (_parity(l & c) << mb) | (((inst.w >> edge) & 1) << (mb + 1))
        return u, v

    def outcome_distribution(self, inst: BhmInstance):
        """All measurement outcomes: (probability, edge, k, l, vote).

        Bob's edge outcome is uniform (each projector catches amplitude
        2/(2n~) out of the live 2n/(2n~)); given the edge, the surviving
        Hadamard outcomes are those with ``<k xor l, i xor j> = x_i xor
        x_j``, each carrying probability ``2 / padded^2``.
        """
        if inst.n != self.n:
            raise ValueError("instance size does not match the protocol")
        per_edge = Fraction(1, self.n)
        per_outcome = per_edge * Fraction(2, self.padded * self.padded)
        out = []
        for e, (i, j) in enumerate(inst.matching):
            d = ((inst.x >> i) ^ (inst.x >> j)) & 1
            c = i ^ j
            for k in range(self.padded):
                for l in range(self.padded):
                    if _parity((k ^ l) & c) != d:
                        continue
                    u, v = self.psm_inputs(inst, e, k, l)
                    vote = _parity(u & v)
                    out.append((per_outcome, e, k, l, vote))
        return out

    def vote_identity_holds(self, inst: BhmInstance) -> bool:
        """Decoded vote == (Mx xor w)_edge for every nonzero outcome."""
        return all(
            vote == inst.edge_bit(e) for _, e, _k, _l, vote in self.outcome_distribution(inst)
        )

    def correctness_probability(self, inst: BhmInstance) -> Fraction:
        """Exact single-shot probability that the vote equals the value."""
        agree = sum(
            1 for e in range(self.n) if inst.edge_bit(e) == inst.promised_value
        )
        return Fraction(agree, self.n)

    def inner_layer_secure(self, inst: BhmInstance) -> bool:
        """Inner PSM transcript distribution depends only on the vote.

        Exact comparison across every (u, v) pair the instance can
        produce, grouped by the vote value.  The randomness-to-transcript
        map is checked to be injective, in which case two transcript
        distributions are equal exactly when their supports coincide;
        otherwise the full distributions are compared.
        """
        reference: dict = {}
        for _, e, k, l, vote in self.outcome_distribution(inst):
            u, v = self.psm_inputs(inst, e, k, l)
            support = self._inner_support(u, v)
            if support is None:  # non-uniform: compare exact distributions
                support = tuple(sorted(self._inner_distribution(u, v).items()))
            if vote in reference:
                if reference[vote] != support:
                    return False
            else:
                reference[vote] = support
        return True

    def message_distribution(self, inst: BhmInstance) -> dict:
        """Exact referee view: mixture of inner PSM transcripts."""
        out: dict = {}
        for prob, e, k, l, _vote in self.outcome_distribution(inst):
            u, v = self.psm_inputs(inst, e, k, l)
            for t, q in self._inner_distribution(u, v).items():
                out[t] = out.get(t, Fraction(0)) + prob * q
        return out

    @lru_cache(maxsize=4096)
    def _inner_distribution(self, u: int, v: int):
        return enumerate_message_distribution(self.inner, u, v)

    def _pack_transcript(self, t) -> int:
        (ua, aa), (vb, bb) = t
        m = self.inner.n
        return ua | (aa << m) | (vb << (m + 1)) | (bb << (2 * m + 1))

    @lru_cache(maxsize=8192)
    def _inner_support(self, u: int, v: int):
        """Canonical transcript support when every transcript is equally likely.

        Vectorized replay of the inner-product messages over all shared
        randomness; a deterministic subsample of pairs is re-derived
        through the protocol's own message functions to guard the fast
        path.  Returns None when the support is smaller than the
        randomness space (non-uniform distribution).
        """
        m = self.inner.n
        mask = np.uint32((1 << m) - 1)
        r = np.arange(1 << self.inner.randomness_bits, dtype=np.uint32)
        r1 = r & mask
        r2 = (r >> np.uint32(m)) & mask
        r3 = r >> np.uint32(2 * m)

        def par(arr):
            return np.bitwise_count(arr).astype(np.uint32) & np.uint32(1)

        ua = np.uint32(u) ^ r1
        aa = par(np.uint32(u) & r2) ^ r3
        vb = np.uint32(v) ^ r2
        bb = par(np.uint32(v) & r1) ^ par(r1 & r2) ^ r3
        packed = (
            ua
            | (aa << np.uint32(m))
            | (vb << np.uint32(m + 1))
            | (bb << np.uint32(2 * m + 1))
        )
        unique = np.unique(packed)
        if (u * 31 + v) % 17 == 0:
            reference = {
                self._pack_transcript(
                    (self.inner.message_a(u, rr), self.inner.message_b(v, rr))
                )
                for rr in range(len(r))
            }
            if reference != {int(t) for t in unique}:
                raise AssertionError("vectorized transcript replay diverged")
        if len(unique) != len(r):
            return None
        return unique.tobytes()


def bhm_psqm(n: int) -> BhmPsqm:
    return BhmPsqm(n)
