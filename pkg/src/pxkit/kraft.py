"""Square-root density-ratio tests for simple hypotheses.

Both tests reject when the square root of the density ratio under the
alternative versus the null exceeds 1, i.e. when the half-log-ratio is
strictly positive.  Ties retain the null.  Decisions are computed in log
space so extreme observations cannot overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .models import ExpandedModel, MarginalFamily, SimpleHypotheses


@dataclass(frozen=True)
class Decision:
    reject_h0: bool
    log_ratio: float


def _decide(l1: float, l0: float) -> Decision:
    if math.isinf(l1) and l1 < 0 and math.isinf(l0) and l0 < 0:
        raise ValueError("observation has zero density under both hypotheses")
    log_ratio = 0.5 * (l1 - l0)
    return Decision(reject_h0=log_ratio > 0.0, log_ratio=log_ratio)


def phi_decide(t1: float, family: MarginalFamily, hyp: SimpleHypotheses) -> Decision:
    """Test based on the first statistic alone."""
    l1 = float(family.density_at(hyp.theta1).logpdf(t1))
    l0 = float(family.density_at(hyp.theta0).logpdf(t1))
    return _decide(l1, l0)


def psi_decide(t1: float, t2: float, em: ExpandedModel, hyp: SimpleHypotheses) -> Decision:
    """Test based on the joint statistic of the expanded model at eta0."""
    eta0 = em.eta0
    l1 = float(em.marginal.density_at(hyp.theta1, eta0).logpdf(t1)) + float(
        em.conditional.density_at(t1, hyp.theta1, eta0).logpdf(t2)
    )
    l0 = float(em.marginal.density_at(hyp.theta0, eta0).logpdf(t1)) + float(
        em.conditional.density_at(t1, hyp.theta0, eta0).logpdf(t2)
    )
    return _decide(l1, l0)
