"""Seeded Monte Carlo estimation of test error probabilities.

Estimates the two error probabilities of the first-statistic and
joint-statistic tests by simulating under each hypothesis, and checks the
estimates against the analytic affinity bounds.  Every stream is derived
from the caller's seed with `seeding.derive_seed`, so reruns are
bit-identical and replicates are decorrelated by construction; decisions
are evaluated vectorized (count aggregation is order-insensitive).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import ClassVar, Sequence

import numpy as np

from .affinity import expanded_bound, marginal_bound
from .models import ExpandedModel, MarginalFamily, SimpleHypotheses, joint_logpdf
from .quadrature import QuadratureConfig
from .seeding import derive_seed

Z_99 = 2.576  # normal 99% two-sided quantile used for half-widths


@dataclass(frozen=True)
class ErrorProbEstimate:
    """Monte Carlo estimates of the two error probabilities.

    alpha_hat estimates the probability of rejecting under the null;
    beta_hat the probability of retaining under the alternative.
    Half-widths are 99% normal-approximation intervals.
    """

    alpha_hat: float
    beta_hat: float
    replicates: int
    seed: int
    half_width_alpha: float
    half_width_beta: float

    @property
    def error_sum(self) -> float:
        return self.alpha_hat + self.beta_hat


@dataclass(frozen=True)
class BoundCheck:
    estimate: ErrorProbEstimate
    bound: float
    satisfied: bool
    slack: float


def _half_width(p_hat: float, n: int) -> float:
    return Z_99 * math.sqrt(p_hat * (1.0 - p_hat) / n)


def _half_log_ratio(l1: np.ndarray, l0: np.ndarray) -> np.ndarray:
    both_dead = np.isneginf(l1) & np.isneginf(l0)
    if np.any(both_dead):
        raise ValueError("simulated observation has zero density under both hypotheses")
    return 0.5 * (l1 - l0)


def estimate_phi_errors(
    family: MarginalFamily, hyp: SimpleHypotheses, replicates: int, seed: int
) -> ErrorProbEstimate:
    """Error probabilities of the first-statistic test.

    Draws t1 under each hypothesis from decorrelated streams, applies the
    strict positive-half-log-ratio rejection rule, and reports rejection /
    retention frequencies.
    """
    if replicates < 100:
        raise ValueError(f"need at least 100 replicates, got {replicates}")
    replicates = int(replicates)
    d0 = family.density_at(hyp.theta0)
    d1 = family.density_at(hyp.theta1)
    t_h0 = d0.sample(replicates, derive_seed(seed, 0))
    t_h1 = d1.sample(replicates, derive_seed(seed, 1))
    lr_h0 = _half_log_ratio(d1.logpdf(t_h0), d0.logpdf(t_h0))
    lr_h1 = _half_log_ratio(d1.logpdf(t_h1), d0.logpdf(t_h1))
    alpha = float(np.mean(lr_h0 > 0.0))
    beta = float(np.mean(lr_h1 <= 0.0))
    return ErrorProbEstimate(
        alpha_hat=alpha,
        beta_hat=beta,
        replicates=replicates,
        seed=int(seed),
        half_width_alpha=_half_width(alpha, replicates),
        half_width_beta=_half_width(beta, replicates),
    )


def _sample_joint(em: ExpandedModel, theta: float, n: int, seed_t1: int, seed_t2: int):
    t1 = em.marginal.density_at(theta, em.eta0).sample(n, seed_t1)
    if em.conditional.sample_given is not None:
        t2 = em.conditional.sample_given(t1, theta, em.eta0, seed_t2)
    else:
        t2 = np.array([
            em.conditional.density_at(float(x), theta, em.eta0).sample(1, derive_seed(seed_t2, i))[0]
            for i, x in enumerate(t1)
        ])
    return t1, t2


def estimate_psi_errors(
    em: ExpandedModel, hyp: SimpleHypotheses, replicates: int, seed: int
) -> ErrorProbEstimate:
    """Error probabilities of the joint-statistic test at eta0."""
    if replicates < 100:
        raise ValueError(f"need at least 100 replicates, got {replicates}")
    replicates = int(replicates)
    t1_h0, t2_h0 = _sample_joint(em, hyp.theta0, replicates, derive_seed(seed, 0), derive_seed(seed, 1))
    t1_h1, t2_h1 = _sample_joint(em, hyp.theta1, replicates, derive_seed(seed, 2), derive_seed(seed, 3))
    lr_h0 = _half_log_ratio(
        joint_logpdf(em, t1_h0, t2_h0, hyp.theta1), joint_logpdf(em, t1_h0, t2_h0, hyp.theta0)
    )
    lr_h1 = _half_log_ratio(
        joint_logpdf(em, t1_h1, t2_h1, hyp.theta1), joint_logpdf(em, t1_h1, t2_h1, hyp.theta0)
    )
    alpha = float(np.mean(lr_h0 > 0.0))
    beta = float(np.mean(lr_h1 <= 0.0))
    return ErrorProbEstimate(
        alpha_hat=alpha,
        beta_hat=beta,
        replicates=replicates,
        seed=int(seed),
        half_width_alpha=_half_width(alpha, replicates),
        half_width_beta=_half_width(beta, replicates),
    )


def check_bound(estimate: ErrorProbEstimate, bound: float) -> BoundCheck:
    """Compare an error-sum estimate against its analytic upper bound.

    The check passes when the estimated sum does not exceed the bound by
    more than the two half-widths combined.
    """
    if not 0.0 <= bound <= 1.0:
        raise ValueError(f"bound must lie in [0, 1], got {bound}")
    total = estimate.alpha_hat + estimate.beta_hat
    cushion = estimate.half_width_alpha + estimate.half_width_beta
    return BoundCheck(
        estimate=estimate,
        bound=bound,
        satisfied=total <= bound + cushion,
        slack=bound - total,
    )


@dataclass(frozen=True)
class SweepRow:
    theta1: float
    alpha_hat: float
    beta_hat: float
    half_width_alpha: float
    half_width_beta: float
    bound: float
    slack: float
    satisfied: bool


@dataclass(frozen=True)
class SweepTable:
    """One bound-check row per alternative value.

    Row seeds are derived from the base seed and the theta1 value itself,
    so permuting the input list permutes the rows and nothing else.
    """

    kind: str
    theta0: float
    replicates: int
    seed: int
    rows: tuple[SweepRow, ...]

    columns: ClassVar[tuple[str, ...]] = (
        "theta1",
        "alpha_hat",
        "beta_hat",
        "half_width_alpha",
        "half_width_beta",
        "bound",
        "slack",
        "satisfied",
    )

    def records(self) -> list[dict]:
        return [{c: getattr(r, c) for c in self.columns} for r in self.rows]


def row_seed(base_seed: int, theta1: float) -> int:
    """Seed used for the sweep row at this alternative value."""
    return derive_seed(base_seed, float(theta1))


def sweep(
    kind: str,
    model: MarginalFamily | ExpandedModel,
    theta0: float,
    theta1_list: Sequence[float],
    replicates: int,
    seed: int,
    cfg: QuadratureConfig | None = None,
) -> SweepTable:
    """Bound checks across a list of alternatives for one test type."""
    if kind not in ("phi", "psi"):
        raise ValueError(f"kind must be 'phi' or 'psi', got {kind!r}")
    if len(theta1_list) == 0:
        raise ValueError("theta1_list must be nonempty")
    if kind == "phi" and not isinstance(model, MarginalFamily):
        raise ValueError("phi sweep requires a MarginalFamily")
    if kind == "psi" and not isinstance(model, ExpandedModel):
        raise ValueError("psi sweep requires an ExpandedModel")
    rows = []
    for theta1 in theta1_list:
        hyp = SimpleHypotheses(theta0, float(theta1))
        rseed = row_seed(seed, float(theta1))
        if kind == "phi":
            est = estimate_phi_errors(model, hyp, replicates, rseed)
            bound = marginal_bound(model, hyp, cfg).value
        else:
            est = estimate_psi_errors(model, hyp, replicates, rseed)
            bound = expanded_bound(model, hyp, cfg).value
        chk = check_bound(est, bound)
        rows.append(
            SweepRow(
                theta1=float(theta1),
                alpha_hat=est.alpha_hat,
                beta_hat=est.beta_hat,
                half_width_alpha=est.half_width_alpha,
                half_width_beta=est.half_width_beta,
                bound=bound,
                slack=chk.slack,
                satisfied=chk.satisfied,
            )
        )
    return SweepTable(
        kind=kind, theta0=float(theta0), replicates=int(replicates), seed=int(seed), rows=tuple(rows)
    )
