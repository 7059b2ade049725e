import math

import pytest

from conftest import make_allocation
from hpcwl.metrics import (
    allocation_size_summary,
    allocation_utilization,
    select_size_fraction,
)


def test_two_allocations_utilization_and_unused():
    allocs = [make_allocation(charge_number="A", awarded=100, used=100),
              make_allocation(charge_number="B", awarded=100, used=0)]
    stats = allocation_utilization(allocs, "all")[0]
    assert stats.utilization_pct == 50.0
    assert stats.n_unused == 1
    assert stats.n_alloc == 2
    assert stats.total == 200.0


def test_overcharge_passes_through():
    stats = allocation_utilization([make_allocation(awarded=100, used=120)], "all")[0]
    assert stats.utilization_pct == 120.0


def brute_force_top(allocs, fraction):
    # independent re-derivation: count by threshold value, ties included
    sizes = sorted((a.awarded_local_su for a in allocs), reverse=True)
    k = max(1, math.ceil(fraction * len(sizes)))
    threshold = sizes[k - 1]
    return sorted((a.charge_number for a in allocs
                   if a.awarded_local_su >= threshold))


def test_top_fraction_matches_brute_force_oracle():
    sizes = [5, 50, 50, 50, 500, 5000, 1, 2, 3, 50,
             70, 80, 90, 100, 50, 60, 50, 40, 30, 20]
    allocs = [make_allocation(charge_number=f"P{i}", awarded=float(s), used=0.0)
              for i, s in enumerate(sizes)]
    for fraction in (0.01, 0.05, 0.25, 0.5):
        got = sorted(a.charge_number
                     for a in select_size_fraction(allocs, fraction, from_top=True))
        assert got == brute_force_top(allocs, fraction)


def test_ties_at_threshold_are_included():
    allocs = [make_allocation(charge_number=f"P{i}", awarded=50.0, used=0.0)
              for i in range(8)]
    allocs.append(make_allocation(charge_number="BIG", awarded=500.0, used=0.0))
    top = select_size_fraction(allocs, 0.25, from_top=True)
    # threshold lands on the tied 50s, so everything tied comes along
    assert len(top) == 9


def test_size_summary_groups():
    allocs = [make_allocation(charge_number=f"P{i}", awarded=float(10 * (i + 1)),
                              used=float(5 * (i + 1))) for i in range(20)]
    summary = allocation_size_summary(allocs)
    groups = [s.group for s in summary]
    assert groups == ["All", "Top 1%", "Top 5%", "Top 25%", "Bottom 25%"]
    assert summary[0].utilization_pct == 50.0
    assert summary[1].n_alloc == 1 and summary[1].total == 200.0
    assert summary[4].n_alloc == 5  # bottom quarter of 20


def test_group_by_fields_and_ordering():
    allocs = [
        make_allocation(charge_number="A", resource="R1", awarded=100, used=10),
        make_allocation(charge_number="B", resource="R2", awarded=900, used=900),
        make_allocation(charge_number="C", resource="R1", awarded=50, used=0),
    ]
    by_resource = allocation_utilization(allocs, "resource")
    assert [s.group for s in by_resource] == ["R2", "R1"]  # descending total
    r1 = by_resource[1]
    assert r1.n_alloc == 2 and r1.n_unused == 1
    assert r1.utilization_pct == pytest.approx(100.0 * 10 / 150)
    assert r1.median == 75.0


def test_variance_is_sample_variance():
    allocs = [make_allocation(charge_number=c, awarded=a, used=0.0)
              for c, a in (("A", 10.0), ("B", 20.0), ("C", 30.0))]
    stats = allocation_utilization(allocs, "all")[0]
    assert stats.variance == pytest.approx(100.0)  # ddof=1
