"""Exact-arithmetic exponent algebra for fractional NLS / fractional wave equations.

Critical regularity exponents, Strichartz admissibility, the distinguished
space-time exponent pairs of the local well-posedness theory, and a hypothesis
auditor that evaluates every inequality of a named theorem and records both
sides.

All arithmetic runs on `fractions.Fraction`.  Float inputs are converted to
their exact binary rational value, so algebraic identities (e.g. the scaling
gap of a constructed pair being exactly zero) hold exactly, never up to
round-off.  Infinity is a first-class exponent with 1/inf == 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional, Union

INF = math.inf

Real = Union[int, float, Fraction, str]


class EquationKind(Enum):
    NLFS = "nlfs"  # fractional Schrodinger
    NLFW = "nlfw"  # fractional wave


class HypothesisError(ValueError):
    """Raised when an operation's parameter preconditions fail."""


def _is_inf(x) -> bool:
    return isinstance(x, float) and math.isinf(x)


def as_fraction(x: Real) -> Fraction:
    """Exact rational value of x; floats convert via their binary expansion."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        if math.isnan(x) or math.isinf(x):
            raise ValueError(f"not a finite number: {x!r}")
        return Fraction(x)
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "oo"):
            raise ValueError("infinite value not allowed here")
        return Fraction(s)
    raise TypeError(f"cannot interpret {x!r} as a rational number")


def as_exponent(x) -> Union[Fraction, float]:
    """Like as_fraction but passes infinity through (Lebesgue exponents)."""
    if _is_inf(x):
        return INF
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    return as_fraction(x)


def inv(x) -> Fraction:
    """Reciprocal with the convention 1/inf == 0."""
    if _is_inf(x):
        return Fraction(0)
    x = as_fraction(x)
    if x == 0:
        raise ZeroDivisionError("reciprocal of zero exponent")
    return 1 / x


def conjugate(p):
    """Holder conjugate p' with 1/p + 1/p' = 1."""
    p = as_exponent(p)
    if _is_inf(p):
        return Fraction(1)
    if p == 1:
        return INF
    return 1 / (1 - inv(p))


def ceil_pos(g) -> int:
    """Smallest positive integer >= g (so ceil_pos(0) == 1)."""
    return max(1, math.ceil(as_fraction(g)))


def is_odd_integer(nu) -> bool:
    nu = as_fraction(nu)
    return nu.denominator == 1 and nu.numerator % 2 == 1


@dataclass(frozen=True)
class EquationParams:
    """Full parameter tuple (d, sigma, nu, mu, kind) of the equation family.

    d >= 1 spatial dimension, sigma > 0 (sigma != 1) dispersion order,
    nu > 1 nonlinearity power, mu = +1 defocusing / -1 focusing.
    """

    d: int
    sigma: Fraction
    nu: Fraction
    mu: int = 1
    kind: EquationKind = EquationKind.NLFS

    def __post_init__(self):
        object.__setattr__(self, "sigma", as_fraction(self.sigma))
        object.__setattr__(self, "nu", as_fraction(self.nu))
        if not isinstance(self.d, int) or self.d < 1:
            raise ValueError(f"dimension d must be a positive integer, got {self.d}")
        if self.sigma <= 0 or self.sigma == 1:
            raise ValueError(f"sigma must be positive and != 1, got {self.sigma}")
        if self.nu <= 1:
            raise ValueError(f"nonlinearity power nu must exceed 1, got {self.nu}")
        if self.mu not in (1, -1):
            raise ValueError(f"mu must be +1 or -1, got {self.mu}")
        if not isinstance(self.kind, EquationKind):
            object.__setattr__(self, "kind", EquationKind(self.kind))


@dataclass(frozen=True)
class ExponentPair:
    """A Lebesgue exponent pair (p, q), each in [1, inf]."""

    p: Union[Fraction, float]
    q: Union[Fraction, float]

    def __post_init__(self):
        object.__setattr__(self, "p", as_exponent(self.p))
        object.__setattr__(self, "q", as_exponent(self.q))
        for name, v in (("p", self.p), ("q", self.q)):
            if not _is_inf(v) and v < 1:
                raise ValueError(f"exponent {name} must be >= 1, got {v}")

    def as_floats(self):
        return (float(self.p), float(self.q))


def critical_exponent_nlfs(params: EquationParams) -> Fraction:
    """Scaling-critical Sobolev regularity d/2 - sigma/(nu-1) for the NLFS flow."""
    return Fraction(params.d, 2) - params.sigma / (params.nu - 1)


def critical_exponent_nlfw(params: EquationParams) -> Fraction:
    """Scaling-critical Sobolev regularity d/2 - 2*sigma/(nu-1) for the NLFW flow."""
    return Fraction(params.d, 2) - 2 * params.sigma / (params.nu - 1)


def critical_exponent(params: EquationParams) -> Fraction:
    if params.kind is EquationKind.NLFW:
        return critical_exponent_nlfw(params)
    return critical_exponent_nlfs(params)


def regularity_gap(d: int, sigma: Real, pair: ExponentPair) -> Fraction:
    """Derivative gap d/2 - d/q - sigma/p of a space-time exponent pair."""
    sigma = as_fraction(sigma)
    return Fraction(d, 2) - d * inv(pair.q) - sigma * inv(pair.p)


def is_admissible(d: int, pair: ExponentPair) -> bool:
    """Strichartz admissibility: p,q in [2,inf], (p,q,d) != (2,inf,2), 2/p + d/q <= d/2."""
    p, q = pair.p, pair.q
    if (not _is_inf(p) and p < 2) or (not _is_inf(q) and q < 2):
        return False
    if p == 2 and _is_inf(q) and d == 2:
        return False
    return 2 * inv(p) + d * inv(q) <= Fraction(d, 2)


def nlfs_subcritical_pair(params: EquationParams, gamma: Real) -> ExponentPair:
    """Contraction-space pair for the subcritical NLFS theory at sigma >= 2.

    p = 2*sigma*(nu+1) / ((nu-1)*(d-2*gamma)),  q = d*(nu+1) / (d + (nu-1)*gamma).
    The result is admissible with regularity_gap == 0 exactly.
    """
    d, sigma, nu = params.d, params.sigma, params.nu
    gamma = as_fraction(gamma)
    if sigma < 2:
        raise HypothesisError(f"subcritical pair requires sigma >= 2, got {sigma}")
    if gamma < 0:
        raise HypothesisError(f"gamma must be >= 0, got {gamma}")
    if gamma >= Fraction(d, 2):
        raise HypothesisError(f"gamma must be < d/2 = {Fraction(d, 2)}, got {gamma}")
    gs = critical_exponent_nlfs(params)
    if gamma <= gs:
        raise HypothesisError(f"gamma must exceed the critical exponent {gs}, got {gamma}")
    p = 2 * sigma * (nu + 1) / ((nu - 1) * (d - 2 * gamma))
    q = d * (nu + 1) / (d + (nu - 1) * gamma)
    return ExponentPair(p, q)


def nlfs_critical_pair(params: EquationParams) -> ExponentPair:
    """Critical-regularity pair (nu+1, 2d(nu+1)/(d(nu+1)-2*sigma)) for sigma >= 2."""
    d, sigma, nu = params.d, params.sigma, params.nu
    if sigma < 2:
        raise HypothesisError(f"critical pair requires sigma >= 2, got {sigma}")
    gs = critical_exponent_nlfs(params)
    if gs < 0:
        raise HypothesisError(f"critical exponent is negative ({gs}); no critical pair")
    p = nu + 1
    q = 2 * d * (nu + 1) / (d * (nu + 1) - 2 * sigma)
    return ExponentPair(p, q)


def sigma_star(d: int, sigma: Real) -> Fraction:
    """The endpoint power (d + 2*sigma)/(d - 2*sigma); requires sigma < d/2."""
    sigma = as_fraction(sigma)
    if 2 * sigma >= d:
        raise HypothesisError(f"sigma* needs sigma < d/2, got sigma={sigma}, d={d}")
    return Fraction(d + 2 * sigma, 1) / (d - 2 * sigma)


def nlfw_nu_window(d: int, sigma: Real) -> "Interval":
    """Admissible nonlinearity-power window for the energy-space subcritical
    NLFW pair at sigma in (0,2)\\{1}, solved from the linear inequality system:

    d == 1: (1-2s)nu > 1, (1-2s)nu < 1+2s, (2-5s)nu <= 2-s
    d >= 2: (d-2s)nu > d, (d-2s)nu < d+2s, (d-3s)nu <= d, (2d-4s-ds)nu <= 2d-ds
    """
    s = as_fraction(sigma)
    window = Interval.all()
    for a, op, b in _nlfw_subcritical_system(d, s):
        window = window.intersect(Interval.solve_linear(a, op, b))
    return window


def _nlfw_subcritical_system(d: int, s: Fraction):
    if d == 1:
        return [
            (1 - 2 * s, ">", Fraction(1)),
            (1 - 2 * s, "<", 1 + 2 * s),
            (2 - 5 * s, "<=", 2 - s),
        ]
    return [
        (d - 2 * s, ">", Fraction(d)),
        (d - 2 * s, "<", d + 2 * s),
        (d - 3 * s, "<=", Fraction(d)),
        (2 * d - 4 * s - d * s, "<=", 2 * d - d * s),
    ]


def nlfw_subcritical_pair(params: EquationParams, enforce_range: bool = True) -> ExponentPair:
    """Energy-space pair for the subcritical NLFW theory.

    sigma in (0,2)\\{1}:  p = 2*sigma*nu / ((d-2*sigma)*nu - d),  q = 2*nu,
    subject to the parameter window of nlfw_nu_window.
    sigma in [2, d/2):    p = 2*sigma*,  q = 2*d*sigma*/(d+sigma),
    subject to nu in [d*sigma*/(d+sigma), sigma*).
    Either branch yields an admissible pair with regularity_gap == sigma.
    """
    d, s, nu = params.d, params.sigma, params.nu
    if s >= 2:
        st = sigma_star(d, s)  # raises unless sigma < d/2
        if enforce_range:
            lo = d * st / (d + s)
            if not (lo <= nu < st):
                raise HypothesisError(
                    f"nu={nu} outside the window [{lo}, {st}) for sigma={s}, d={d}"
                )
        return ExponentPair(2 * st, 2 * d * st / (d + s))
    denom = (d - 2 * s) * nu - d
    if denom <= 0:
        raise HypothesisError(
            f"(d-2*sigma)*nu - d = {denom} must be positive (d={d}, sigma={s}, nu={nu})"
        )
    if enforce_range and not nlfw_nu_window(d, s).contains(nu):
        raise HypothesisError(
            f"nu={nu} outside the admissible window {nlfw_nu_window(d, s)} "
            f"for d={d}, sigma={s}"
        )
    return ExponentPair(2 * s * nu / denom, 2 * nu)


def nlfw_critical_pair(params: EquationParams):
    """Critical NLFW exponents (p, a): p = (d+sigma)(nu-1)/(2*sigma),
    a = 2(d+sigma)/(d-sigma).  (p,p) and (a,a) are admissible with
    regularity_gap(p,p) == gamma_w and regularity_gap(a,a) == sigma/2.
    """
    d, s, nu = params.d, params.sigma, params.nu
    if not (Fraction(d, d + 1) <= s < d):
        raise HypothesisError(
            f"sigma={s} outside [d/(d+1), d) = [{Fraction(d, d + 1)}, {d}) for d={d}"
        )
    nu_floor = 1 + 4 * s / (d - s)
    if nu < nu_floor:
        raise HypothesisError(f"nu={nu} below the critical floor {nu_floor}")
    p = (d + s) * (nu - 1) / (2 * s)
    a = Fraction(2 * (d + s), 1) / (d - s)
    return p, a


def h_sigma_critical_nu(d: int, sigma: Real) -> Fraction:
    """The energy-critical power 1 + 4*sigma/(d - 2*sigma); rejects d == 2*sigma."""
    s = as_fraction(sigma)
    if d == 2 * s:
        raise HypothesisError(f"d - 2*sigma vanishes (d={d}, sigma={s})")
    return 1 + 4 * s / (d - 2 * s)


# ---------------------------------------------------------------------------
# interval arithmetic for one-variable linear inequality systems
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Interval:
    """Interval with independent open/closed endpoints over Fraction U {±inf}."""

    lo: Union[Fraction, float]
    hi: Union[Fraction, float]
    lo_closed: bool = False
    hi_closed: bool = False

    @staticmethod
    def all() -> "Interval":
        return Interval(-INF, INF, False, False)

    @staticmethod
    def empty() -> "Interval":
        return Interval(Fraction(0), Fraction(0), False, False)

    @staticmethod
    def solve_linear(a: Fraction, op: str, b: Fraction) -> "Interval":
        """Solution set {x : a*x op b} for op in {<, <=, >, >=}."""
        if a == 0:
            ok = {"<": 0 < b, "<=": 0 <= b, ">": 0 > b, ">=": 0 >= b}[op]
            return Interval.all() if ok else Interval.empty()
        flip = {"<": ">", "<=": ">=", ">": "<", ">=": "<="}
        if a < 0:
            op = flip[op]
        bound = b / a
        if op == "<":
            return Interval(-INF, bound, False, False)
        if op == "<=":
            return Interval(-INF, bound, False, True)
        if op == ">":
            return Interval(bound, INF, False, False)
        return Interval(bound, INF, True, False)

    def is_empty(self) -> bool:
        if self.lo > self.hi:
            return True
        if self.lo == self.hi:
            return not (self.lo_closed and self.hi_closed)
        return False

    def intersect(self, other: "Interval") -> "Interval":
        if self.lo > other.lo or (self.lo == other.lo and not self.lo_closed):
            lo, lo_closed = self.lo, self.lo_closed
        else:
            lo, lo_closed = other.lo, other.lo_closed
        if self.hi < other.hi or (self.hi == other.hi and not self.hi_closed):
            hi, hi_closed = self.hi, self.hi_closed
        else:
            hi, hi_closed = other.hi, other.hi_closed
        return Interval(lo, hi, lo_closed, hi_closed)

    def contains(self, x) -> bool:
        x = as_fraction(x)
        if self.is_empty():
            return False
        above = x > self.lo or (x == self.lo and self.lo_closed)
        below = x < self.hi or (x == self.hi and self.hi_closed)
        return above and below

    def __str__(self):
        lb = "[" if self.lo_closed else "("
        rb = "]" if self.hi_closed else ")"
        return f"{lb}{self.lo}, {self.hi}{rb}"


# ---------------------------------------------------------------------------
# theorem auditor
# ---------------------------------------------------------------------------

THEOREM_IDS = (
    "lwp-subcrit-nls-low-sigma",
    "lwp-subcrit-nls-high-sigma",
    "global-energy",
    "crit-nls-low-sigma",
    "crit-nls-high-sigma",
    "lwp-subcrit-nlfw",
    "hsigma-subcrit-nlfw",
    "crit-nlfw",
    "hsigma-crit-nlfw",
    "global-defocusing-nlfw",
    "nlfw-pair-range",
)

_RELATIONS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
    "!=": lambda a, b: a != b,
}


@dataclass(frozen=True)
class ConditionCheck:
    """One audited hypothesis: lhs RELATION rhs, with the evaluated sides."""

    cid: str
    lhs: object
    relation: str
    rhs: object
    passed: bool
    note: str = ""

    def to_dict(self):
        return {
            "condition": self.cid,
            "lhs": _num(self.lhs),
            "relation": self.relation,
            "rhs": _num(self.rhs),
            "lhs_exact": _exact(self.lhs),
            "rhs_exact": _exact(self.rhs),
            "passed": self.passed,
            "note": self.note,
        }


@dataclass
class TheoremAudit:
    theorem_id: str
    conditions: list
    passed: bool
    extras: dict = field(default_factory=dict)

    def to_dict(self):
        extras = {}
        for k, v in self.extras.items():
            if isinstance(v, ExponentPair):
                extras[k] = {"p": _num(v.p), "q": _num(v.q),
                             "p_exact": _exact(v.p), "q_exact": _exact(v.q)}
            elif isinstance(v, Interval):
                extras[k] = {"lo": _num(v.lo), "hi": _num(v.hi),
                             "lo_closed": v.lo_closed, "hi_closed": v.hi_closed,
                             "text": str(v)}
            else:
                extras[k] = _num(v)
        return {
            "theorem": self.theorem_id,
            "passed": self.passed,
            "conditions": [c.to_dict() for c in self.conditions],
            "extras": extras,
        }


@dataclass
class ExponentReport:
    """Evaluated critical exponents plus per-theorem hypothesis ledgers."""

    params: EquationParams
    gamma: Optional[Fraction]
    gamma_s: Fraction
    gamma_w: Fraction
    audits: list

    def to_dict(self):
        return {
            "params": {
                "d": self.params.d,
                "sigma": _num(self.params.sigma),
                "nu": _num(self.params.nu),
                "mu": self.params.mu,
                "kind": self.params.kind.value,
            },
            "gamma": None if self.gamma is None else _num(self.gamma),
            "gamma_s": _num(self.gamma_s),
            "gamma_s_exact": _exact(self.gamma_s),
            "gamma_w": _num(self.gamma_w),
            "gamma_w_exact": _exact(self.gamma_w),
            "audits": [a.to_dict() for a in self.audits],
        }

    def format_table(self) -> str:
        rows = [("theorem", "condition", "lhs", "rel", "rhs", "status", "note")]
        for audit in self.audits:
            for c in audit.conditions:
                rows.append((
                    audit.theorem_id, c.cid, _fmt(c.lhs), c.relation, _fmt(c.rhs),
                    "pass" if c.passed else "FAIL", c.note,
                ))
            extra = "; ".join(f"{k}={_fmt_extra(v)}" for k, v in audit.extras.items())
            rows.append((audit.theorem_id, "overall", "", "", "",
                         "pass" if audit.passed else "FAIL", extra))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        lines = ["  ".join(r[i].ljust(widths[i]) for i in range(len(r))).rstrip()
                 for r in rows]
        lines.insert(1, "  ".join("-" * w for w in widths))
        head = (f"gamma_s = {_fmt(self.gamma_s)}   gamma_w = {_fmt(self.gamma_w)}"
                + (f"   gamma = {_fmt(self.gamma)}" if self.gamma is not None else ""))
        return head + "\n" + "\n".join(lines)


def _num(x):
    if x is None:
        return None
    if isinstance(x, bool):
        return x
    if isinstance(x, Fraction):
        return float(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, (int, float)):
        return float(x) if isinstance(x, float) else x
    return str(x)


def _exact(x):
    if x is None:
        return None
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(x)


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        if x.denominator > 1000:  # binary float artifact, print the float form
            return f"{float(x):.6g}"
        return f"{x} ({float(x):.6g})"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _fmt_extra(v):
    if isinstance(v, ExponentPair):
        return f"(p={_fmt(v.p)}, q={_fmt(v.q)})"
    return str(v)


def _cond(cid, lhs, relation, rhs, note="") -> ConditionCheck:
    passed = bool(_RELATIONS[relation](lhs, rhs))
    return ConditionCheck(cid, lhs, relation, rhs, passed, note)


def _skip(cid, note) -> ConditionCheck:
    return ConditionCheck(cid, None, "", None, True, note)


def _need_gamma(gamma, theorem_id):
    if gamma is None:
        raise HypothesisError(f"theorem {theorem_id!r} requires a gamma argument")
    return as_fraction(gamma)


def _smoothness(gamma_like, nu, bound_shift=0, cid="power-smoothness"):
    """ceil_pos(gamma) <= nu - bound_shift unless nu is an odd integer."""
    if is_odd_integer(nu):
        return _skip(cid, "nu is an odd integer: nonlinearity is smooth")
    return _cond(cid, Fraction(ceil_pos(gamma_like)), "<=", nu - bound_shift)


def _embedding_floor(d, sigma, nu):
    cap = max(nu - 1, Fraction(4 if d == 1 else 2))
    return Fraction(d, 2) - sigma / cap


def audit_theorem(params: EquationParams, gamma: Optional[Real],
                  theorem_id: str) -> ExponentReport:
    """Evaluate every hypothesis of one theorem; see THEOREM_IDS for names."""
    if theorem_id not in THEOREM_IDS:
        raise KeyError(f"unknown theorem id {theorem_id!r}; known: {THEOREM_IDS}")
    audit = _AUDITORS[theorem_id](params, gamma)
    g = None if gamma is None else as_fraction(gamma)
    return ExponentReport(
        params=params,
        gamma=g,
        gamma_s=critical_exponent_nlfs(params),
        gamma_w=critical_exponent_nlfw(params),
        audits=[audit],
    )


def audit_all(params: EquationParams, gamma: Optional[Real] = None) -> ExponentReport:
    """Audit every theorem whose inputs are available (gamma-needing ones
    are skipped when gamma is None)."""
    audits = []
    for tid in THEOREM_IDS:
        try:
            audits.append(_AUDITORS[tid](params, gamma))
        except HypothesisError:
            continue
    g = None if gamma is None else as_fraction(gamma)
    return ExponentReport(params, g, critical_exponent_nlfs(params),
                          critical_exponent_nlfw(params), audits)


def _audit_lwp_subcrit_low(params, gamma, theorem_id="lwp-subcrit-nls-low-sigma"):
    d, s, nu = params.d, params.sigma, params.nu
    g = _need_gamma(gamma, theorem_id)
    conds = [
        _cond("sigma-below-two", s, "<", Fraction(2)),
        _cond("sigma-not-one", s, "!=", Fraction(1)),
        _cond("gamma-nonneg", g, ">=", Fraction(0)),
        _cond("gamma-below-half-d", g, "<", Fraction(d, 2)),
        _cond("gamma-floor", g, ">", _embedding_floor(d, s, nu),
              note="Sobolev-embedding floor"),
        _smoothness(g, nu),
    ]
    return TheoremAudit(theorem_id, conds, all(c.passed for c in conds))


def _audit_lwp_subcrit_high(params, gamma):
    d, s, nu = params.d, params.sigma, params.nu
    g = _need_gamma(gamma, "lwp-subcrit-nls-high-sigma")
    gs = critical_exponent_nlfs(params)
    conds = [
        _cond("sigma-at-least-two", s, ">=", Fraction(2)),
        _cond("gamma-nonneg", g, ">=", Fraction(0)),
        _cond("gamma-below-half-d", g, "<", Fraction(d, 2)),
        _cond("gamma-above-critical", g, ">", gs),
        _smoothness(g, nu),
    ]
    audit = TheoremAudit("lwp-subcrit-nls-high-sigma", conds,
                         all(c.passed for c in conds))
    if audit.passed:
        audit.extras["pair"] = nlfs_subcritical_pair(params, g)
    return audit


def _audit_global_energy(params, gamma):
    d, s, nu, mu = params.d, params.sigma, params.nu, params.mu
    gs = critical_exponent_nlfs(params)
    if d == 1:
        win = [_cond("sigma-window-lo", s, ">", Fraction(2, 3)),
               _cond("sigma-window-hi", s, "<", Fraction(1))]
    elif d == 2:
        win = [_cond("sigma-window-lo", s, ">", Fraction(1)),
               _cond("sigma-window-hi", s, "<", Fraction(2))]
    elif d == 3:
        win = [_cond("sigma-window-lo", s, ">", Fraction(3, 2)),
               _cond("sigma-window-hi", s, "<", Fraction(3))]
    else:
        win = [_cond("sigma-window-lo", s, ">=", Fraction(2)),
               _cond("sigma-window-hi", s, "<", Fraction(d))]
    conds = win + [
        _cond("energy-above-critical", s / 2, ">", gs),
        _smoothness(s / 2, nu),
    ]
    mass_cap = 1 + 2 * s / Fraction(d)
    if mu == 1:
        conds.append(_skip("global-route", "defocusing: global unconditionally"))
    else:
        conds.append(_cond("global-route", nu, "<", mass_cap,
                           note="focusing: unconditional only below the mass-critical "
                                "power; at/above it, global needs small data"))
    return TheoremAudit("global-energy", conds, all(c.passed for c in conds))


def _audit_crit_low(params, gamma):
    d, s, nu = params.d, params.sigma, params.nu
    gs = critical_exponent_nlfs(params)
    conds = [
        _cond("sigma-below-two", s, "<", Fraction(2)),
        _cond("sigma-not-one", s, "!=", Fraction(1)),
        _cond("nu-floor", nu, ">", Fraction(5 if d == 1 else 3)),
        _cond("critical-nonneg", gs, ">=", Fraction(0)),
        _smoothness(gs if gs >= 0 else Fraction(0), nu),
    ]
    audit = TheoremAudit("crit-nls-low-sigma", conds, all(c.passed for c in conds))
    if d == 1:
        audit.extras["anchor_pair"] = ExponentPair(4, INF)
    elif d >= 3:
        audit.extras["anchor_pair"] = ExponentPair(2, Fraction(2 * d, d - 2))
    return audit


def _audit_crit_high(params, gamma):
    s, nu = params.sigma, params.nu
    gs = critical_exponent_nlfs(params)
    conds = [
        _cond("sigma-at-least-two", s, ">=", Fraction(2)),
        _cond("critical-nonneg", gs, ">=", Fraction(0)),
        _smoothness(gs if gs >= 0 else Fraction(0), nu),
    ]
    audit = TheoremAudit("crit-nls-high-sigma", conds, all(c.passed for c in conds))
    if audit.passed:
        audit.extras["pair"] = nlfs_critical_pair(params)
    return audit


def _audit_lwp_subcrit_nlfw(params, gamma):
    d, s, nu = params.d, params.sigma, params.nu
    g = _need_gamma(gamma, "lwp-subcrit-nlfw")
    conds = [
        _cond("sigma-not-one", s, "!=", Fraction(1)),
        _cond("gamma-nonneg", g, ">=", Fraction(0)),
        _cond("gamma-below-half-d", g, "<", Fraction(d, 2)),
        _cond("gamma-floor", g, ">", _embedding_floor(d, s, nu),
              note="Sobolev-embedding floor"),
        _smoothness(g, nu),
    ]
    return TheoremAudit("lwp-subcrit-nlfw", conds, all(c.passed for c in conds))


_SUBCRIT_WAVE_CIDS_1D = ("p-positive", "p-subcritical", "admissibility")
_SUBCRIT_WAVE_CIDS = ("p-positive", "p-subcritical", "p-floor", "admissibility")


def _audit_hsigma_subcrit(params, gamma, theorem_id="hsigma-subcrit-nlfw"):
    d, s, nu = params.d, params.sigma, params.nu
    conds = [_cond("sigma-not-one", s, "!=", Fraction(1))]
    if s >= 2:
        conds.append(_cond("sigma-window-hi", s, "<", Fraction(d, 2)))
        if 2 * s < d:
            st = sigma_star(d, s)
            conds.append(_cond("nu-window-lo", nu, ">=", d * st / (d + s)))
            conds.append(_cond("nu-window-hi", nu, "<", st))
    else:
        cids = _SUBCRIT_WAVE_CIDS_1D if d == 1 else _SUBCRIT_WAVE_CIDS
        rels = {"p-positive": ">", "p-subcritical": "<"}
        for cid, (a, op, b) in zip(cids, _nlfw_subcritical_system(d, s)):
            conds.append(_cond(cid, a * nu, rels.get(cid, "<="), b))
    audit = TheoremAudit(theorem_id, conds, all(c.passed for c in conds))
    if audit.passed:
        audit.extras["pair"] = nlfw_subcritical_pair(params)
    if s < 2:
        audit.extras["nu_window"] = nlfw_nu_window(d, s)
    return audit


def _audit_crit_nlfw(params, gamma):
    d, s, nu = params.d, params.sigma, params.nu
    gw = critical_exponent_nlfw(params)
    part1 = [
        _cond("sigma-lo", s, ">=", Fraction(d, d + 1)),
        _cond("sigma-hi", s, "<", Fraction(d)),
        _cond("sigma-not-one", s, "!=", Fraction(1)),
    ]
    if s < d:
        part1.append(_cond("nu-floor", nu, ">=", 1 + 4 * s / (d - s)))
        if is_odd_integer(nu):
            part1.append(_skip("power-smoothness", "nu is an odd integer"))
        else:
            part1.append(_cond("power-smoothness",
                               ceil_pos(gw if gw >= 0 else Fraction(0)) - s / 2,
                               "<=", nu - 1))
    p1 = all(c.passed for c in part1)

    lo_branch_split = Fraction(d * d + 4 * d, 3 * d + 4)
    nu_floor2 = 1 + 4 * s * (d + 2) / (d * (d + s))
    part2 = [_cond("part2-sigma-not-one", s, "!=", Fraction(1)),
             _cond("part2-nu-floor", nu, ">=", nu_floor2)]
    if s >= lo_branch_split:
        part2.append(_skip("part2-sigma-branch", f"sigma >= {lo_branch_split}"))
    else:
        part2.append(_cond("part2-sigma-lo", s, ">=", Fraction(d, d + 1)))
        cap_den = d * d - 3 * d * s + 4 * d - 4 * s
        if cap_den > 0:
            part2.append(_cond("part2-nu-cap", nu, "<=",
                               1 + 4 * s * (d + 2) / cap_den))
        else:
            part2.append(_cond("part2-nu-cap", cap_den, ">", Fraction(0),
                               note="upper-branch denominator nonpositive"))
    p2 = all(c.passed for c in part2)

    audit = TheoremAudit("crit-nlfw", part1 + part2, p1 or p2,
                         extras={"part1_passed": p1, "part2_passed": p2})
    if p1:
        p, a = nlfw_critical_pair(params)
        audit.extras["p"] = p
        audit.extras["a"] = a
    return audit


def _audit_hsigma_crit(params, gamma):
    d, s, nu = params.d, params.sigma, params.nu
    lo = Fraction(d, d + 2) if d <= 4 else Fraction(d, 6)
    conds = [
        _cond("sigma-window-lo", s, ">=", lo),
        _cond("sigma-window-hi", s, "<", Fraction(d, 2)),
        _cond("sigma-not-one", s, "!=", Fraction(1)),
    ]
    if 2 * s != d:
        conds.append(_cond("nu-equals-critical", nu, "==", h_sigma_critical_nu(d, s)))
    audit = TheoremAudit("hsigma-crit-nlfw", conds, all(c.passed for c in conds))
    if audit.passed:
        audit.extras["pair"] = ExponentPair(nu, 2 * nu)
    return audit


def _audit_global_defocusing_nlfw(params, gamma):
    base = _audit_hsigma_subcrit(params, gamma, theorem_id="global-defocusing-nlfw")
    base.conditions.append(_cond("defocusing", Fraction(params.mu), "==", Fraction(1)))
    base.passed = all(c.passed for c in base.conditions)
    return base


def _audit_nlfw_pair_range(params, gamma):
    d, s, nu = params.d, params.sigma, params.nu
    conds = []
    rels = {0: ">", 1: "<"}
    for i, (a, op, b) in enumerate(_nlfw_subcritical_system(d, s)):
        cid = (_SUBCRIT_WAVE_CIDS_1D if d == 1 else _SUBCRIT_WAVE_CIDS)[i]
        conds.append(_cond(cid, a * nu, rels.get(i, "<="), b))
    window = nlfw_nu_window(d, s)
    audit = TheoremAudit("nlfw-pair-range", conds, all(c.passed for c in conds))
    audit.extras["nu_window"] = window
    audit.extras["window_empty"] = window.is_empty()
    return audit


_AUDITORS = {
    "lwp-subcrit-nls-low-sigma": _audit_lwp_subcrit_low,
    "lwp-subcrit-nls-high-sigma": _audit_lwp_subcrit_high,
    "global-energy": _audit_global_energy,
    "crit-nls-low-sigma": _audit_crit_low,
    "crit-nls-high-sigma": _audit_crit_high,
    "lwp-subcrit-nlfw": _audit_lwp_subcrit_nlfw,
    "hsigma-subcrit-nlfw": _audit_hsigma_subcrit,
    "crit-nlfw": _audit_crit_nlfw,
    "hsigma-crit-nlfw": _audit_hsigma_crit,
    "global-defocusing-nlfw": _audit_global_defocusing_nlfw,
    "nlfw-pair-range": _audit_nlfw_pair_range,
}
