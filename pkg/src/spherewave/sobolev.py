"""Multi-parameter Sobolev norms ||f||_{L^p_s} = ||f * B_s||_{L^p}."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ContractError, ValidationError
from .grid import PHYSICAL, Field, norm
from .multipliers import _range_violations, apply_multiplier, b_s_table


@dataclass(frozen=True)
class SobolevParams:
    s: tuple[float, ...]
    p: float

    def __post_init__(self):
        object.__setattr__(self, "s", tuple(float(v) for v in self.s))
        object.__setattr__(self, "p", float(self.p))

    @property
    def s_total(self) -> float:
        return float(sum(self.s))


def validate_s_params(factors, s, p=2.0):
    """Return ``(params, violations)``; ``params`` is None when anything is violated.

    Checks s_i >= 0, 1 < p < inf and, when 0 < |s| <= (N-1)/2,
    (N_i - 1)/(N - 1) |s| < s_i < N_i/2 for every block.
    """
    s = tuple(float(v) for v in s)
    problems = []
    if len(s) != len(factors):
        problems.append(f"s has {len(s)} entries but there are {len(factors)} factors")
        return None, problems
    for i, v in enumerate(s):
        if v < 0:
            problems.append(f"s_{i + 1} = {v:g} must be >= 0")
    if not 1 < float(p) < float("inf"):
        problems.append(f"p = {p:g} must lie in (1, inf)")
    problems += _range_violations(factors, s, "s")
    if problems:
        return None, problems
    return SobolevParams(s, p), []


def make_sobolev_params(factors, s, p=2.0) -> SobolevParams:
    params, problems = validate_s_params(factors, s, p)
    if problems:
        raise ValidationError("; ".join(problems))
    return params


def sobolev_norm(f: Field, params: SobolevParams) -> float:
    """||f * B_s||_{L^p} with the same p on every block."""
    if f.side != PHYSICAL:
        raise ContractError("sobolev_norm expects a physical-side field")
    if len(params.s) != f.spec.n_blocks:
        raise ValidationError(f"s has {len(params.s)} entries for {f.spec.n_blocks} blocks")
    if all(v == 0 for v in params.s):
        return norm(f, params.p)
    return norm(apply_multiplier(f, b_s_table(f.spec, params.s)), params.p)


__all__ = ["SobolevParams", "validate_s_params", "make_sobolev_params", "sobolev_norm"]
