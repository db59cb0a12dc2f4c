"""
Audits of an observed common period q against the permutation-order form
and the known and conjectured bounds on periods.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Union

from numerics.combinatorics import best_known_bound, landau, partitions_lcm_set

P_NORMS = (1, "inf")


@dataclass
class BoundAudit:
    q: int
    n: int
    p_norm: Union[int, str, None]
    verdicts: Dict[str, bool] = field(default_factory=dict)
    landau: Optional[int] = None
    permutation_orders: tuple = ()

    @property
    def guaranteed(self) -> Dict[str, bool]:
        """Verdicts that must hold for real-analytic ℓ1/ℓ∞ maps."""
        if self.p_norm not in P_NORMS:
            return {}
        keys = ["divides_q", "permutation_order_form", "below_2n"]
        if self.p_norm == "inf":
            keys.append("below_best_known")
        return {k: self.verdicts[k] for k in keys}

    @property
    def alarm(self) -> bool:
        return not all(self.guaranteed.values())

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "n": self.n,
            "p_norm": self.p_norm,
            "verdicts": dict(self.verdicts),
            "landau": self.landau,
            "permutation_orders": list(self.permutation_orders),
            "alarm": self.alarm,
        }


def normalize_p_norm(p_norm) -> Union[int, str, None]:
    if p_norm in (None, "custom"):
        return None
    if p_norm in (1, "1", "l1"):
        return 1
    if p_norm in ("inf", "linf", math.inf, "∞"):
        return "inf"
    raise ValueError(f"p_norm must be 1 or inf, got {p_norm!r}")


def audit_period(q: int, n: int, p_norm=None, periods: Iterable[int] = ()) -> BoundAudit:
    """Check q against S ∪ 2S (S = permutation orders on n letters), 2^n and 2^n max_k C(n, k).

    ``divides_q`` records that every observed period divides q (vacuous when
    no periods are passed).

    Args:
        q: Candidate period, usually the lcm of observed periods
        n: Dimension
        p_norm: 1, "inf" or None; only the first two carry guarantees
        periods: Observed minimal periods

    Returns:
        BoundAudit: per-bound verdicts, with alarm set when a guaranteed one fails
    """
    if q < 1:
        raise ValueError(f"q must be at least 1, got {q}")
    orders = partitions_lcm_set(n)
    verdicts = {
        "divides_q": all(q % int(p) == 0 for p in periods),
        "permutation_order_form": q in orders or (q % 2 == 0 and q // 2 in orders),
        "below_2n": q <= 2**n,
        "below_best_known": q <= best_known_bound(n),
    }
    return BoundAudit(q, n, normalize_p_norm(p_norm), verdicts, landau(n), tuple(sorted(orders)))
