"""Statistical comparisons for BER claims."""

import math
from dataclasses import dataclass

from .engine import IncrementalRun

ALPHA = 0.01
MIN_EVENTS = 100
MAX_ITERATIONS = 10**6


def rule_of_three(n):
    """95 % upper bound on a probability after zero events in ``n`` trials."""
    return 3.0 / n


def two_proportion_z(e1, n1, e2, n2):
    """Pooled two-proportion z statistic; 0 when the pooled rate is 0 or 1."""
    if n1 == 0 or n2 == 0:
        raise ValueError("both samples need at least one trial")
    pooled = (e1 + e2) / (n1 + n2)
    var = pooled * (1.0 - pooled) * (1.0 / n1 + 1.0 / n2)
    if var == 0.0:
        return 0.0
    return (e1 / n1 - e2 / n2) / math.sqrt(var)


def two_sided_p(z):
    return math.erfc(abs(z) / math.sqrt(2.0))


def proportions_differ(e1, n1, e2, n2, alpha=ALPHA):
    return two_sided_p(two_proportion_z(e1, n1, e2, n2)) < alpha


def within_combined_stderr(p1, se1, p2, se2, k=3.0):
    """``p2 <= p1 + k * sqrt(se1^2 + se2^2)``."""
    return p2 <= p1 + k * math.hypot(se1, se2)


@dataclass(frozen=True)
class Comparison:
    errors_a: int
    bits_a: int
    errors_b: int
    bits_b: int
    iterations: int
    z: float
    p_value: float
    reject: bool

    @property
    def ber_a(self):
        return self.errors_a / self.bits_a

    @property
    def ber_b(self):
        return self.errors_b / self.bits_b


def compare_classes(cfg_a, class_a, cfg_b=None, class_b=None, alpha=ALPHA,
                    start_iterations=None, max_iterations=MAX_ITERATIONS,
                    min_events=MIN_EVENTS, workers=1):
    """Two-proportion test between two class tallies, escalating iterations x10.

    ``class_*=None`` pools every user of that scenario. With ``cfg_b=None``
    both tallies come from one run of ``cfg_a``. Escalation continues while
    either side has fewer than ``min_events`` errors and the next stage stays
    within ``max_iterations``.
    """
    run_a = IncrementalRun(cfg_a, workers)
    run_b = run_a if cfg_b is None else IncrementalRun(cfg_b, workers)
    n = cfg_a.iterations if start_iterations is None else start_iterations
    while True:
        rep_a = run_a.extend_to(n)
        rep_b = run_b.extend_to(n)
        ta, tb = rep_a.tally(class_a), rep_b.tally(class_b)
        enough = min(ta.bit_errors, tb.bit_errors) >= min_events
        if enough or n * 10 > max_iterations:
            break
        n *= 10
    z = two_proportion_z(ta.bit_errors, ta.transmitted_bits, tb.bit_errors, tb.transmitted_bits)
    p = two_sided_p(z)
    return Comparison(ta.bit_errors, ta.transmitted_bits, tb.bit_errors, tb.transmitted_bits,
                      n, z, p, p < alpha)
