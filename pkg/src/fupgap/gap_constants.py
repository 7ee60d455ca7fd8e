"""Closed-form gap exponents and the constants of the energy argument.

Unnamed absolute constants are configuration and default to 1. Those
defaults are placeholders, not known values.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

from .errors import ValidationError


@dataclass(frozen=True)
class ConstantsConfig:
    K_thm4: float = 1.0
    K_thm61: float = 1.0
    K5: float = 1.0
    K1: float = 1.0
    K3: float = 1.0
    note: str = field(default="absolute constants are placeholders (default 1), not known values")

    def __post_init__(self):
        for name in ("K_thm4", "K_thm61", "K5", "K1", "K3"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be a positive finite number, got {v}")


@dataclass(frozen=True)
class LogValue:
    """A positive quantity kept as its natural log; ``value`` may be inf or 0."""

    log: float

    @property
    def value(self) -> float:
        try:
            return math.exp(self.log)
        except OverflowError:
            return math.inf

    def to_json(self, log_form: bool = False):
        if log_form:
            return {"sign": 1, "log": self.log}
        return self.value


def beta_std(n: int, delta: float) -> float:
    return max(0.0, (n - 1) / 2 - delta)


def beta_jn(n: int, delta: float) -> float:
    return (n - 1) / 2 - delta / 2


def beta_gap(n: int, delta: float, beta_E: float) -> float:
    if n < 2:
        raise ValidationError("n must be at least 2")
    if not 0 < delta < n - 1:
        raise ValidationError(f"delta must lie in (0, {n - 1})")
    if beta_E < 0:
        raise ValidationError("beta_E must be non-negative")
    if beta_E > delta:
        raise ValidationError("beta_E cannot exceed delta")
    return 3.0 / 8.0 * ((n - 1) / 2 - delta) + beta_E / 16.0


def improvement_range(n: int) -> tuple[float, float]:
    if n < 2:
        raise ValidationError("n must be at least 2")
    return (5 * (n - 1) / 11, 3 * (n - 1) / 5)


def _check_delta_C(delta, C):
    if not 0 < delta < 1:
        raise ValidationError("delta must lie in (0, 1)")
    if C < 1:
        raise ValidationError("regularity constant C must be >= 1")


def log_beta_E(delta: float, C: float, cfg: ConstantsConfig = ConstantsConfig()) -> float:
    _check_delta_C(delta, C)
    return math.log(delta) - cfg.K_thm4 * (1 - delta) ** -28 * (1 + math.log(C) ** 14)


def beta_E_of_C(delta: float, C: float, cfg: ConstantsConfig = ConstantsConfig()) -> LogValue:
    """Energy-improvement exponent as a function of the regularity constant."""
    return LogValue(log_beta_E(delta, C, cfg))


@dataclass(frozen=True)
class ConstantsSuite:
    C1: float
    C2: float
    S: float
    M0: LogValue
    rho_tree: LogValue
    beta_X: LogValue

    def to_json(self, log_form: bool = False) -> dict:
        return {
            "C1": self.C1,
            "C2": self.C2,
            "S": self.S,
            "M0": self.M0.to_json(log_form),
            "rho_tree": self.rho_tree.to_json(log_form),
            "beta_X": self.beta_X.to_json(log_form),
        }


def C1_of(C: float, delta: float) -> float:
    _check_delta_C(delta, C)
    return (10 * C * C) ** (1 / (1 - delta))


def C2_of(C: float, delta: float) -> float:
    return C * C * C1_of(C, delta) ** delta


def S_of(eps: float, C: float, delta: float) -> float:
    """Length beyond which no progression is eps-dense in a C-regular set."""
    _check_delta_C(delta, C)
    if not 0 < eps <= 1:
        raise ValidationError("eps must lie in (0, 1]")
    return (10 * C * C / eps) ** (1 / (1 - delta))


def constants_suite(
    delta: float, C: float, M: int, eps: float = 1.0, cfg: ConstantsConfig = ConstantsConfig()
) -> ConstantsSuite:
    _check_delta_C(delta, C)
    if M < 2:
        raise ValidationError("M must be at least 2")
    logC14 = 1 + math.log(C) ** 14
    C1 = C1_of(C, delta)
    C2 = C2_of(C, delta)
    log_M0 = cfg.K5 / delta * (1 - delta) ** -14 * logC14
    log_rho = -(6 * math.log(C2) + 3 * delta * math.log(M) + math.log(math.log(M)))
    log_bx = math.log(delta) - cfg.K_thm61 * (1 - delta) ** -14 * logC14
    return ConstantsSuite(
        C1=C1,
        C2=C2,
        S=S_of(eps, C, delta),
        M0=LogValue(log_M0),
        rho_tree=LogValue(log_rho),
        beta_X=LogValue(log_bx),
    )


@dataclass(frozen=True)
class GapReport:
    n: int
    delta: float
    C_reg: float | None
    beta_E: float
    beta_formula: float
    beta_std: float
    beta_jn: float
    improvement_range: tuple[float, float]
    improves: bool

    def to_json(self) -> dict:
        d = asdict(self)
        d["improvement_range"] = list(self.improvement_range)
        return d


def gap_report(
    n: int,
    delta: float,
    beta_E: float | None = None,
    C: float | None = None,
    cfg: ConstantsConfig = ConstantsConfig(),
) -> GapReport:
    if beta_E is None:
        if C is None:
            raise ValidationError("give either beta_E or the regularity constant C")
        beta_E = beta_E_of_C(delta, C, cfg).value
    b = beta_gap(n, delta, beta_E)
    s = beta_std(n, delta)
    return GapReport(
        n=n,
        delta=delta,
        C_reg=C,
        beta_E=beta_E,
        beta_formula=b,
        beta_std=s,
        beta_jn=beta_jn(n, delta),
        improvement_range=improvement_range(n),
        improves=b > s,
    )
