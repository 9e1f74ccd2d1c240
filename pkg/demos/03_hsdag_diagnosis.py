# coding: utf-8

# # From alarmed pairs to diagnoses
#
# Every alarmed pair says "at least one of these two is broken". The minimal
# hitting sets of those conflicts are the diagnoses.

from corrfdd import brute_force_hitting_sets, conflicts_at, hs_dag

alarms = [("c1", "c3"), ("c1", "c4"), ("c2", "c3"), ("c2", "c4"), ("c3", "c4")]
conflicts = conflicts_at(alarms)
print([sorted(c) for c in conflicts])


# With at most two faulty components there is exactly one explanation.

print([sorted(d) for d in hs_dag(conflicts, max_cardinality=2)])


# Allowing three adds the explanations in which c1 and c2 are both faulty.

print([sorted(d) for d in hs_dag(conflicts, max_cardinality=3)])


# The DAG should agree with plain enumeration, which is only feasible for
# small component sets.

for card in (1, 2, 3, 4):
    assert set(hs_dag(conflicts, card)) == set(brute_force_hitting_sets(conflicts, card))
print("hs_dag agrees with enumeration")


# A lone alarm cannot tell its two sensors apart.

print([sorted(d) for d in hs_dag(conflicts_at([("c2", "c4")]), 2)])
