"""Calculus of certified log-Sobolev (LSI) and Poincare (PI) constants.

Every rule takes a certificate, applies one composition law, and returns a
new certificate whose derivation chain records the rule application.  Chains
replay deterministically: :func:`replay_chain` recomputes the constant from
the base fact and must reproduce it bit-for-bit.

Constants are lower bounds by convention -- rules only ever weaken them.
The bounded-perturbation rule is flagged NONTIGHT because its oscillation
input is itself only estimated (see :mod:`langevin_lab.targets`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

__all__ = [
    "IsoperimetryCert",
    "bakry_emery",
    "lipschitz_pushforward",
    "gaussian_convolution",
    "tensorize",
    "bounded_perturbation",
    "lsi_implies_pi",
    "ula_limit_cert",
    "replay_chain",
    "serialize_chain",
]

LSI = "LSI"
PI = "PI"


@dataclass(frozen=True)
class IsoperimetryCert:
    """A certified isoperimetry constant plus the rules that produced it.

    ``chain`` is a tuple of ``(rule_name, args)`` entries; ``args`` is a tuple
    of floats except for ``tensorize``, whose single argument is the partner
    certificate's chain (so the whole derivation tree is retained).
    """

    kind: str
    constant: float
    chain: tuple = field(default_factory=tuple)
    nontight: bool = False

    def __post_init__(self):
        if self.kind not in (LSI, PI):
            raise ValueError(f"unknown certificate kind {self.kind!r}")
        if not (self.constant > 0.0):
            raise ValueError(f"certificate constant must be positive, got {self.constant}")


def bakry_emery(strong_convexity: float) -> IsoperimetryCert:
    """LSI certificate for a strongly logconcave measure, constant = convexity."""
    if not (strong_convexity > 0.0):
        raise ValueError(f"strong convexity must be positive, got {strong_convexity}")
    sc = float(strong_convexity)
    return IsoperimetryCert(LSI, sc, (("bakry_emery", (sc,)),))


def lipschitz_pushforward(cert: IsoperimetryCert, lip: float) -> IsoperimetryCert:
    """Pushforward under an ``lip``-Lipschitz map: constant -> constant / lip**2."""
    if not (lip > 0.0):
        raise ValueError(f"Lipschitz constant must be positive, got {lip}")
    lip = float(lip)
    const = cert.constant / (lip * lip)
    return IsoperimetryCert(
        cert.kind, const, cert.chain + (("lipschitz_pushforward", (lip,)),), cert.nontight
    )


def gaussian_convolution(cert: IsoperimetryCert, t: float) -> IsoperimetryCert:
    """Convolution with N(0, 2tI): constant -> (1/constant + 2t)**-1."""
    if t < 0.0:
        raise ValueError(f"convolution time must be nonnegative, got {t}")
    t = float(t)
    const = 1.0 / (1.0 / cert.constant + 2.0 * t)
    return IsoperimetryCert(
        cert.kind, const, cert.chain + (("gaussian_convolution", (t,)),), cert.nontight
    )


def tensorize(c1: IsoperimetryCert, c2: IsoperimetryCert) -> IsoperimetryCert:
    """Product measure: constant is the min of the factors' constants."""
    if c1.kind != c2.kind:
        raise ValueError(f"cannot tensorize mixed kinds {c1.kind} and {c2.kind}")
    const = min(c1.constant, c2.constant)
    return IsoperimetryCert(
        c1.kind,
        const,
        c1.chain + (("tensorize", (c2.chain,)),),
        c1.nontight or c2.nontight,
    )


def bounded_perturbation(cert: IsoperimetryCert, osc: float) -> IsoperimetryCert:
    """Holley-Stroock: multiply the constant by exp(-osc).

    ``osc`` is the oscillation (sup - inf) of the log-density perturbation.
    The resulting certificate is flagged NONTIGHT.
    """
    if osc < 0.0:
        raise ValueError(f"oscillation must be nonnegative, got {osc}")
    osc = float(osc)
    const = cert.constant * math.exp(-osc)
    return IsoperimetryCert(
        cert.kind, const, cert.chain + (("bounded_perturbation", (osc,)),), True
    )


def lsi_implies_pi(cert: IsoperimetryCert) -> IsoperimetryCert:
    """Convert an LSI certificate to a PI certificate with the same constant."""
    if cert.kind != LSI:
        raise ValueError("lsi_implies_pi requires an LSI certificate")
    return IsoperimetryCert(
        PI, cert.constant, cert.chain + (("lsi_implies_pi", ()),), cert.nontight
    )


def ula_limit_cert(cert_nu_eps: IsoperimetryCert, L: float, eps: float) -> IsoperimetryCert:
    """Constant surviving one decomposed ULA step from the biased limit.

    For a biased limit with constant ``beta``, a gradient step (Lipschitz
    1 + eps*L) followed by heat flow for time eps leaves the constant at
    ((1 + eps*L)**2 / beta + 2*eps)**-1.  Under the admissibility window
    eps <= min(1/(3L), 1/(9 beta)) this never drops below beta/2; that floor
    is recorded in the chain entry.
    """
    beta = cert_nu_eps.constant
    if not (L > 0.0 and eps > 0.0):
        raise ValueError("L and eps must be positive")
    if eps > 1.0 / (3.0 * L):
        raise ValueError(f"eps={eps} violates eps <= 1/(3L) = {1.0 / (3.0 * L)}")
    if eps > 1.0 / (9.0 * beta):
        raise ValueError(f"eps={eps} violates eps <= 1/(9 beta) = {1.0 / (9.0 * beta)}")
    L = float(L)
    eps = float(eps)
    lip = 1.0 + eps * L
    const = 1.0 / (lip * lip / beta + 2.0 * eps)
    floor = beta / 2.0
    return IsoperimetryCert(
        cert_nu_eps.kind,
        const,
        cert_nu_eps.chain + (("ula_limit_cert", (L, eps, floor)),),
        cert_nu_eps.nontight,
    )


def replay_chain(chain: tuple) -> float:
    """Recompute the constant a chain certifies, starting from its base fact."""
    if not chain:
        raise ValueError("empty chain has no base fact")
    rule, args = chain[0]
    if rule != "bakry_emery":
        raise ValueError(f"chain must begin with a base fact, got {rule!r}")
    const = args[0]
    for rule, args in chain[1:]:
        if rule == "lipschitz_pushforward":
            const = const / (args[0] * args[0])
        elif rule == "gaussian_convolution":
            const = 1.0 / (1.0 / const + 2.0 * args[0])
        elif rule == "tensorize":
            const = min(const, replay_chain(args[0]))
        elif rule == "bounded_perturbation":
            const = const * math.exp(-args[0])
        elif rule == "lsi_implies_pi":
            pass
        elif rule == "ula_limit_cert":
            L, eps, _floor = args
            lip = 1.0 + eps * L
            const = 1.0 / (lip * lip / const + 2.0 * eps)
        else:
            raise ValueError(f"unknown rule {rule!r} in chain")
    return const


def _fmt_args(rule, args):
    if rule == "tensorize":
        return f"with={replay_chain(args[0])!r}"
    return ", ".join(repr(a) for a in args)


def serialize_chain(cert: IsoperimetryCert) -> str:
    """Line-oriented text form ``rule(args) -> constant``, one rule per line."""
    lines = []
    for i in range(len(cert.chain)):
        rule, args = cert.chain[i]
        const = replay_chain(cert.chain[: i + 1])
        lines.append(f"{rule}({_fmt_args(rule, args)}) -> {const!r}")
    if cert.nontight:
        lines.append("# NONTIGHT")
    return "\n".join(lines)
