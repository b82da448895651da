"""Executable versions of the worked differentiation examples.

Three routes are expected to disagree with the direct derivative: the naive
product rule, the naive chain rule and the HR product rule. The GHR product
rule is expected to agree. :func:`demonstrate_rule_failures` evaluates all four
at a seeded random point and reports the mismatches.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import ghr
from .quaternion import (
    UNITS,
    Axis,
    Quaternion,
    conj,
    conj_involution,
    involution,
    mul,
    norm,
)

EXPECTED_FAILURE = "FAILED-AS-EXPECTED"
PASSED = "PASSED"
UNEXPECTED = "UNEXPECTED"

FAILURE_THRESHOLD = 0.1
MATCH_TOLERANCE = 1e-12


@dataclass(frozen=True)
class RouteResult:
    route: str
    expected: Quaternion
    actual: Quaternion
    mismatch: float
    should_match: bool

    @property
    def verdict(self) -> str:
        if self.should_match:
            return PASSED if self.mismatch <= MATCH_TOLERANCE else UNEXPECTED
        return EXPECTED_FAILURE if self.mismatch > FAILURE_THRESHOLD else UNEXPECTED


@dataclass
class FailureReport:
    seed: int
    q: Quaternion
    x: Quaternion
    y: Quaternion
    routes: list[RouteResult]
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.verdict != UNEXPECTED for r in self.routes)

    def to_records(self) -> list[dict]:
        return [
            {
                "route": r.route,
                "expected": list(r.expected),
                "actual": list(r.actual),
                "mismatch": r.mismatch,
                "verdict": r.verdict,
            }
            for r in self.routes
        ]

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "points": {"q": list(self.q), "x": list(self.x), "y": list(self.y)},
            "routes": self.to_records(),
            "notes": list(self.notes),
            "ok": self.ok,
        }

    def to_text(self) -> str:
        lines = [f"rule-failure demonstration (seed={self.seed})",
                 f"  q = {_fmt(self.q)}",
                 f"  x = {_fmt(self.x)}  y = {_fmt(self.y)}"]
        for r in self.routes:
            lines.append(f"  [{r.verdict}] {r.route}")
            lines.append(f"      expected {_fmt(r.expected)}")
            lines.append(f"      actual   {_fmt(r.actual)}")
            lines.append(f"      mismatch {r.mismatch:.3e}")
        lines.extend(f"  note: {n}" for n in self.notes)
        return "\n".join(lines)

    def to_key_values(self) -> str:
        out = []
        for r in self.routes:
            key = r.route.split(":")[0].strip()
            out.append(f"{key}.expected={' '.join(repr(c) for c in r.expected)}")
            out.append(f"{key}.actual={' '.join(repr(c) for c in r.actual)}")
            out.append(f"{key}.mismatch={r.mismatch!r}")
            out.append(f"{key}.verdict={r.verdict}")
        return "\n".join(out)


def _fmt(q: Quaternion) -> str:
    return "(" + ", ".join(f"{c:+.6f}" for c in q) + ")"


def random_nonreal(rng: np.random.Generator, min_imag: float = 0.5) -> Quaternion:
    """Uniform on [-1, 1]^4, rejecting points whose imaginary part is shorter than ``min_imag``."""
    while True:
        q = Quaternion.from_array(rng.uniform(-1.0, 1.0, size=4))
        if q.imag_norm() >= min_imag:
            return q


def naive_product_route(q: Quaternion) -> tuple[Quaternion, Quaternion]:
    """(direct, via product rule) for d(q q*)/dq with plain component partials."""
    direct = ghr.naive_derivative(ghr.norm_squared().gradient(q))
    d_conj = ghr.naive_derivative(ghr.conjugate().gradient(q))
    d_id = ghr.naive_derivative(ghr.identity().gradient(q))
    via_rule = mul(q, d_conj) + mul(d_id, conj(q))
    return direct, via_rule


def naive_chain_route(x: Quaternion, y: Quaternion) -> tuple[Quaternion, Quaternion]:
    """(direct, via chain rule) for d|xy|^2/dx with plain component partials."""
    ny2 = norm(y) ** 2
    # |xy|^2 = |x|^2 |y|^2, so each partial is 2 x_a |y|^2
    composite_partials = ghr.ComponentGradient(*(Quaternion.real(2.0 * c * ny2) for c in x))
    direct = ghr.naive_derivative(composite_partials)
    z = mul(x, y)
    outer = ghr.naive_derivative(ghr.norm_squared().gradient(z))
    # z = x y, so dz/dx_a = u_a y
    inner = ghr.naive_derivative(ghr.ComponentGradient(*(mul(u, y) for u in UNITS)))
    return direct, mul(outer, inner)


def hr_product_route(q: Quaternion) -> tuple[Quaternion, Quaternion]:
    direct = ghr.hr_derivative(ghr.norm_squared().gradient(q))
    d_conj = ghr.hr_derivative(ghr.conjugate().gradient(q))
    d_id = ghr.hr_derivative(ghr.identity().gradient(q))
    return direct, mul(q, d_conj) + mul(d_id, conj(q))


def ghr_product_route(q: Quaternion) -> tuple[Quaternion, Quaternion]:
    direct = ghr.ghr_derivative(ghr.norm_squared().gradient(q))
    via_rule = ghr.ghr_product_rule(ghr.identity(), ghr.conjugate(), q)
    return direct, via_rule


def demonstrate_rule_failures(seed: int = 0) -> FailureReport:
    rng = np.random.default_rng(seed)
    q = random_nonreal(rng)
    x = random_nonreal(rng)
    y = random_nonreal(rng)

    routes = []
    for name, (direct, via), should_match in (
        ("naive-product: d(qq*)/dq, direct 2q vs 4q - 2q*", naive_product_route(q), False),
        ("naive-chain: d|xy|^2/dx, direct vs 2z * (-2y*)", naive_chain_route(x, y), False),
        ("hr-product: d(qq*)/dq, direct q*/2 vs -q/2 + q*", hr_product_route(q), False),
        ("ghr-product: d(qq*)/dq, direct q*/2 vs GHR product rule", ghr_product_route(q), True),
    ):
        routes.append(RouteResult(name, direct, via, norm(direct - via), should_match))

    notes = [
        "real inputs do not separate the product-rule routes: for q = q* the naive "
        "route 4q - 2q* collapses to 2q and the HR route -q/2 + q* collapses to q*/2",
    ]
    return FailureReport(seed=seed, q=q, x=x, y=y, routes=routes, notes=notes)


# --- involution reconstruction identities -----------------------------------


def _inv(q: Quaternion):
    return (q, involution(q, Axis.I), involution(q, Axis.J), involution(q, Axis.K))


def _cinv(q: Quaternion):
    return (conj(q), conj_involution(q, Axis.I), conj_involution(q, Axis.J), conj_involution(q, Axis.K))


def _signed_sum(terms, signs, scale: float) -> Quaternion:
    total = Quaternion()
    for t, s in zip(terms, signs):
        total = total + t.scale(s)
    return total.scale(scale)


_COMPONENT_SIGNS = ((1, 1, 1, 1), (1, 1, -1, -1), (1, -1, 1, -1), (1, -1, -1, 1))
_RECOMBINE_SIGNS = ((-1, 1, 1, 1), (1, -1, 1, 1), (1, 1, -1, 1), (1, 1, 1, -1))


def involution_identity_residuals(q: Quaternion) -> dict[str, float]:
    """Largest deviation of each identity family at ``q``.

    ``components-from-involutions`` rebuilds q0..q3 from q, q^i, q^j, q^k;
    ``components-from-conj-involutions`` from q*, q^{i*}, q^{j*}, q^{k*};
    ``conj-involutions-from-involutions`` and its inverse rebuild one family
    from the other.
    """
    inv = _inv(q)
    cinv = _cinv(q)
    units = UNITS
    comps = q.as_tuple()

    out = {}
    worst = 0.0
    for a in range(4):
        inner = _signed_sum(inv, _COMPONENT_SIGNS[a], 0.25)
        value = inner if a == 0 else mul(units[a], inner).scale(-1.0)
        worst = max(worst, norm(value - Quaternion.real(comps[a])))
    out["components-from-involutions"] = worst

    worst = 0.0
    for a in range(4):
        inner = _signed_sum(cinv, _COMPONENT_SIGNS[a], 0.25)
        value = inner if a == 0 else mul(units[a], inner)
        worst = max(worst, norm(value - Quaternion.real(comps[a])))
    out["components-from-conj-involutions"] = worst

    out["conj-involutions-from-involutions"] = max(
        norm(_signed_sum(inv, _RECOMBINE_SIGNS[a], 0.5) - cinv[a]) for a in range(4)
    )
    out["involutions-from-conj-involutions"] = max(
        norm(_signed_sum(cinv, _RECOMBINE_SIGNS[a], 0.5) - inv[a]) for a in range(4)
    )
    return out


@dataclass
class IdentityReport:
    samples: int
    seed: int
    max_residual: dict[str, float]
    tolerance: float = 1e-12

    @property
    def ok(self) -> bool:
        return all(v <= self.tolerance for v in self.max_residual.values())

    def to_dict(self) -> dict:
        return asdict(self) | {"ok": self.ok}


def check_involution_identities(samples: int = 1000, seed: int = 0) -> IdentityReport:
    rng = np.random.default_rng(seed)
    worst: dict[str, float] = {}
    for row in rng.uniform(-1.0, 1.0, size=(samples, 4)):
        for key, value in involution_identity_residuals(Quaternion.from_array(row)).items():
            worst[key] = max(worst.get(key, 0.0), value)
    return IdentityReport(samples=samples, seed=seed, max_residual=worst)
