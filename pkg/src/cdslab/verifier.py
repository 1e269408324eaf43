"""Correctness and security estimation for protocol objects.

Classical protocols are verified by exact rational enumeration of their
message distributions.  Security radii are Chebyshev-center problems: the
best simulator distribution minimises the worst-case L1 distance to the
observed per-secret (CDS) or per-input (PSM) distributions.  For binary
secrets the optimal simulator is the midpoint of the two distributions; for
anything larger a linear program finds it.

Quantum protocols are certified at the channel level.  By linearity a
channel is determined by its action on one maximally entangled input (its
Choi state), which is why every quantity below is evaluated there: the
normalised Choi-state distance lower-bounds the diamond norm and ``d_Q``
times it upper-bounds it, giving honest two-sided intervals without an SDP.
The constant simulator is instantiated as ``sigma_M = rho_M``, the actual
message marginal at the entangled input.

Reports carry one diagnostic entry per promise input, merged in
lexicographic input order, and serialise to a fixed JSON schema
(protocol, n, epsilon_hat, delta_hat_lower, delta_hat_upper, inputs,
cost, seed, wall_time_ms).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import linprog
from scipy.sparse import coo_matrix

from .framework import (
    CdsProtocol,
    CdqsProtocol,
    CostReport,
    PromiseFunction,
    PsmProtocol,
    cds_decode_failure,
    enumerate_message_distribution,
    mid_protocol_state,
    protocol_cost,
    psm_decode_failure,
)
from .qcore import apply_channel, maximally_entangled, partial_trace, trace_norm

#: Default error budgets for pass/fail verdicts.
EPSILON_BUDGET = 0.09
DELTA_BUDGET = 0.09

_ENUMERABLE_PAIRS = 1 << 20


@dataclass(frozen=True)
class VerificationReport:
    """Outcome of verifying one protocol against one promise function."""

    protocol: str
    n: int
    epsilon_hat: float
    delta_hat_lower: float
    delta_hat_upper: float
    inputs: tuple
    cost: CostReport
    seed: Optional[int] = None
    wall_time_ms: Optional[float] = None

    def __post_init__(self):
        for v in (self.epsilon_hat, self.delta_hat_lower, self.delta_hat_upper):
            if not 0.0 <= v <= 2.0:
                raise ValueError(f"estimate {v} outside [0, 2]")
        if self.delta_hat_lower > self.delta_hat_upper + 1e-12:
            raise ValueError("delta interval is inverted")

    @property
    def delta_hat(self) -> float:
        """Point value when the interval is degenerate (classical verifiers)."""
        return self.delta_hat_upper

    def passes(self, epsilon: float = EPSILON_BUDGET, delta: float = DELTA_BUDGET) -> bool:
        """Budget verdict, taken on the certified side of the interval."""
        return self.epsilon_hat <= epsilon and self.delta_hat_upper <= delta

    def as_dict(self) -> dict:
        return {
            "protocol": self.protocol,
            "n": self.n,
            "epsilon_hat": self.epsilon_hat,
            "delta_hat_lower": self.delta_hat_lower,
            "delta_hat_upper": self.delta_hat_upper,
            "inputs": list(self.inputs),
            "cost": self.cost.as_dict(),
            "seed": self.seed,
            "wall_time_ms": self.wall_time_ms,
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)


# ---------------------------------------------------------------------------
# simulator radii for distributions
# ---------------------------------------------------------------------------

def _l1(a: dict, b: dict) -> Fraction:
    keys = set(a) | set(b)
    return sum((abs(a.get(k, Fraction(0)) - b.get(k, Fraction(0))) for k in keys), Fraction(0))


def chebyshev_radius(dists: Sequence[dict]):
    """``min over Sim of max_i ||Sim - P_i||_1`` over distributions.

    Returns ``(radius, center)``.  One distinct distribution gives radius 0
    exactly; two give the midpoint (optimal for the two-point problem, with
    radius half their L1 distance, also exact); more run a linear program
    over the union support with per-distribution absolute-value slacks.
    """
    distinct = []
    for d in dists:
        if d not in distinct:
            distinct.append(d)
    if not distinct:
        raise ValueError("no distributions given")
    if len(distinct) == 1:
        return Fraction(0), dict(distinct[0])
    if len(distinct) == 2:
        p0, p1 = distinct
        keys = set(p0) | set(p1)
        center = {
            k: (p0.get(k, Fraction(0)) + p1.get(k, Fraction(0))) / 2 for k in keys
        }
        return _l1(p0, p1) / 2, center

    support = sorted(set().union(*distinct))
    t_count = len(support)
    m = len(distinct)
    tables = np.array(
        [[float(d.get(k, Fraction(0))) for k in support] for d in distinct]
    )
    # variables: center (t_count), slacks u_{i,j} (m * t_count), radius t
    n_vars = t_count + m * t_count + 1
    rows, cols, vals, rhs = [], [], [], []
    row = 0
    for i in range(m):
        for j in range(t_count):
            u = t_count + i * t_count + j
            # c_j - u_ij <= P_ij   and   -c_j - u_ij <= -P_ij
            rows += [row, row]; cols += [j, u]; vals += [1.0, -1.0]
            rhs.append(tables[i, j]); row += 1
            rows += [row, row]; cols += [j, u]; vals += [-1.0, -1.0]
            rhs.append(-tables[i, j]); row += 1
        # sum_j u_ij - t <= 0
        for j in range(t_count):
            rows.append(row); cols.append(t_count + i * t_count + j); vals.append(1.0)
        rows.append(row); cols.append(n_vars - 1); vals.append(-1.0)
        rhs.append(0.0); row += 1
    a_ub = coo_matrix((vals, (rows, cols)), shape=(row, n_vars))
    a_eq = coo_matrix(
        (np.ones(t_count), (np.zeros(t_count, dtype=int), np.arange(t_count))),
        shape=(1, n_vars),
    )
    c = np.zeros(n_vars)
    c[-1] = 1.0
    res = linprog(
        c, A_ub=a_ub, b_ub=rhs, A_eq=a_eq, b_eq=[1.0],
        bounds=[(0, None)] * n_vars, method="highs",
    )
    if not res.success:
        raise RuntimeError(f"simulator LP failed: {res.message}")
    center = {k: float(res.x[j]) for j, k in enumerate(support)}
    return float(res.fun), center


# ---------------------------------------------------------------------------
# classical verifiers
# ---------------------------------------------------------------------------

def cds_verify(p: CdsProtocol, f: PromiseFunction, seed: Optional[int] = None) -> VerificationReport:
    """Exact correctness and simulator-radius security for a classical CDS.

    ``epsilon_hat`` is the worst decode-failure probability over disclosing
    inputs and secrets; ``delta_hat`` the worst simulator radius over hiding
    inputs.  Both are exact rationals cast to float at the end.
    """
    eps = Fraction(0)
    delta = 0.0
    diagnostics = []
    for x, y in f.promise_pairs():
        value = f.value(x, y)
        if value == 1:
            worst = max(cds_decode_failure(p, x, y, s) for s in range(p.secret_alphabet))
            eps = max(eps, worst)
            diagnostics.append(
                {"x": x, "y": y, "value": 1, "decode_failure": float(worst)}
            )
        else:
            dists = [
                enumerate_message_distribution(p, x, y, s)
                for s in range(p.secret_alphabet)
            ]
            radius, _ = chebyshev_radius(dists)
            delta = max(delta, float(radius))
            diagnostics.append(
                {"x": x, "y": y, "value": 0, "simulator_distance": float(radius)}
            )
    return VerificationReport(
        protocol=p.construction or "anonymous",
        n=p.n,
        epsilon_hat=float(eps),
        delta_hat_lower=float(delta),
        delta_hat_upper=float(delta),
        inputs=tuple(diagnostics),
        cost=protocol_cost(p),
        seed=seed,
    )


def psm_verify(p: PsmProtocol, f: PromiseFunction, seed: Optional[int] = None) -> VerificationReport:
    """Exact verification of a PSM: the simulator may depend only on the value.

    Security solves one Chebyshev-center problem per function value over all
    inputs in that value class.
    """
    eps = Fraction(0)
    diagnostics = {}
    classes: dict = {}
    for x, y in f.promise_pairs():
        value = f.value(x, y)
        eps = max(eps, psm_decode_failure(p, x, y, value))
        diagnostics[(x, y)] = {"x": x, "y": y, "value": value}
        classes.setdefault(value, []).append((x, y))
    delta = 0.0
    for value, pairs in sorted(classes.items()):
        dists = {pair: enumerate_message_distribution(p, *pair) for pair in pairs}
        radius, center = chebyshev_radius(list(dists.values()))
        exact_center = all(isinstance(v, Fraction) for v in center.values())
        for pair in pairs:
            if exact_center:
                dist = float(_l1(dists[pair], center))
            else:
                dist = float(
                    sum(
                        abs(float(dists[pair].get(k, 0.0)) - center.get(k, 0.0))
                        for k in set(dists[pair]) | set(center)
                    )
                )
            diagnostics[pair]["simulator_distance"] = dist
            delta = max(delta, dist)
        delta = max(delta, float(radius))
    ordered = tuple(diagnostics[key] for key in sorted(diagnostics))
    return VerificationReport(
        protocol=p.construction or "anonymous",
        n=p.n,
        epsilon_hat=float(eps),
        delta_hat_lower=delta,
        delta_hat_upper=delta,
        inputs=ordered,
        cost=protocol_cost(p),
        seed=seed,
    )


# ---------------------------------------------------------------------------
# quantum verifier
# ---------------------------------------------------------------------------

def _product_gap_dense(p: CdqsProtocol, x: int, y: int) -> float:
    """``|| rho_{QbarM} - pi (x) rho_M ||_1`` from the dense mid state."""
    mid = mid_protocol_state(p, x, y)
    msg_names = [name for name, _ in mid.layout if name != "Qbar"]
    mid = mid.permuted(["Qbar"] + msg_names)
    rho_m = partial_trace(mid, keep=msg_names)
    product = np.kron(np.eye(p.d_q) / p.d_q, np.asarray(rho_m.entries))
    return trace_norm(np.asarray(mid.entries) - product)


def _dense_epsilon(p: CdqsProtocol, x: int, y: int):
    """Choi-state distance of decoder-composed channel from the identity.

    The mid state already is the Choi state of the combined channel, so
    applying the shipped decoder and comparing against the maximally
    entangled state gives ``||J(D o N) - J(id)||_1`` directly.
    """
    dec = p.decoder(x, y)
    if dec is None:
        raise ValueError(f"no decoder shipped for input ({x}, {y})")
    rho = apply_channel(dec, mid_protocol_state(p, x, y)).permuted(["Qbar", "Q"])
    phi = maximally_entangled("Qbar", "Q", p.d_q).density_matrix()
    lo = trace_norm(np.asarray(rho.entries) - np.asarray(phi.entries))
    return lo, min(2.0, p.d_q * lo)


def cdqs_verify(
    p,
    f: PromiseFunction,
    inputs: Optional[Sequence[tuple]] = None,
    seed: Optional[int] = None,
) -> VerificationReport:
    """Channel-level verification of a CDQS protocol.

    Correctness: per disclosing input, the normalised Choi distance between
    decoder-composed channel and identity (a diamond-norm lower bound), with
    the ``d_Q``-scaled upper bound alongside in the diagnostics.  Security:
    per hiding input, the distance of the entangled-input mid state from
    ``pi (x) rho_M``, bracketing the diamond distance to the constant
    simulator as ``[value, d_Q * value]``.

    Transcript-form protocols (exposing ``entanglement_fidelity`` and
    ``product_distance``) are measured exactly in rational arithmetic; dense
    ones go through their Choi states.  ``inputs`` defaults to every promise
    pair, which must be explicitly supplied when the domain is too large to
    enumerate.
    """
    if inputs is None:
        if f.x_size * f.y_size > _ENUMERABLE_PAIRS:
            raise ValueError(
                "promise domain too large to enumerate; pass inputs explicitly"
            )
        inputs = list(f.promise_pairs())
    inputs = sorted(inputs)
    exact = hasattr(p, "entanglement_fidelity") and hasattr(p, "product_distance")
    eps_lower = 0.0
    delta_lower = 0.0
    delta_upper = 0.0
    diagnostics = []
    for x, y in inputs:
        value = f.value(x, y)
        if value is None:
            raise ValueError(f"input ({x}, {y}) is outside the promise")
        entry = {"x": x, "y": y, "value": value}
        if value == 1:
            if exact:
                lo = float(2 * (1 - p.entanglement_fidelity(x, y)))
                hi = min(2.0, p.d_q * lo)
            else:
                lo, hi = _dense_epsilon(p, x, y)
            eps_lower = max(eps_lower, lo)
            entry["epsilon_lower"] = lo
            entry["epsilon_upper"] = hi
        else:
            gap = float(p.product_distance(x, y)) if exact else _product_gap_dense(p, x, y)
            entry["delta_lower"] = gap
            entry["delta_upper"] = min(2.0, p.d_q * gap)
            delta_lower = max(delta_lower, entry["delta_lower"])
            delta_upper = max(delta_upper, entry["delta_upper"])
        diagnostics.append(entry)
    return VerificationReport(
        protocol=getattr(p, "construction", "") or "anonymous",
        n=p.n,
        epsilon_hat=eps_lower,
        delta_hat_lower=delta_lower,
        delta_hat_upper=delta_upper,
        inputs=tuple(diagnostics),
        cost=protocol_cost(p),
        seed=seed,
    )


def productness_check(
    p,
    f: PromiseFunction,
    inputs: Optional[Sequence[tuple]] = None,
    report: Optional[VerificationReport] = None,
) -> list:
    """Mid-protocol witness of the hiding/disclosing separation, per input.

    Hiding inputs must leave the secret side of the entangled pair in
    product with the messages (distance at most the verified delta upper
    bound); disclosing inputs must decode with entanglement fidelity at
    least ``1 - epsilon_hat``.
    """
    if report is None:
        report = cdqs_verify(p, f, inputs=inputs)
    if inputs is None:
        inputs = [(e["x"], e["y"]) for e in report.inputs]
    exact = hasattr(p, "entanglement_fidelity") and hasattr(p, "product_distance")
    out = []
    for x, y in sorted(inputs):
        value = f.value(x, y)
        if value == 1:
            if exact:
                fid = float(p.entanglement_fidelity(x, y))
            else:
                from .framework import decoded_entanglement_fidelity

                fid = decoded_entanglement_fidelity(p, x, y)
            bound = 1.0 - report.epsilon_hat - 1e-9
            out.append(
                {"x": x, "y": y, "value": 1, "fidelity": fid, "bound": bound,
                 "ok": fid >= bound}
            )
        else:
            gap = float(p.product_distance(x, y)) if exact else _product_gap_dense(p, x, y)
            bound = report.delta_hat_upper + 1e-9
            out.append(
                {"x": x, "y": y, "value": 0, "distance": gap, "bound": bound,
                 "ok": gap <= bound}
            )
    return out
