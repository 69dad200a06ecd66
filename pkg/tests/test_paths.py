"""Paths-respecting generators and validator."""

import pytest

from gossipsim.core import AdversarySchedule, NetworkSnapshot, canonical_edge, derive_rng, validate_snapshot
from gossipsim.paths import (
    PathSystem,
    build_center_terminal,
    build_ring_failure,
    center_terminal_infrastructure,
    ring_infrastructure,
    validate_paths_respecting,
)


class TestRingFailure:
    def test_round_robin_removes_expected_edge(self):
        schedule, infra, _ = build_ring_failure(4, "round-robin", seed=0, horizon=8)
        for t in range(1, 9):
            removed = infra.edges - schedule.snapshot_at(t).edges
            k = (t - 1) % 4
            assert removed == {canonical_edge(k, (k + 1) % 4)}

    def test_every_snapshot_is_a_path(self):
        schedule, _, _ = build_ring_failure(7, "random", seed=3, horizon=30)
        for snap in schedule.snapshots:
            assert validate_snapshot(snap).ok
            degs = [len(a) for a in snap.adjacency]
            assert max(degs) <= 2 and degs.count(1) == 2

    def test_validator_accepts_generated(self):
        schedule, infra, systems = build_ring_failure(6, "round-robin", seed=1, horizon=24)
        report = validate_paths_respecting(schedule, infra, systems)
        assert report.ok

    def test_budget_is_one_failed_edge(self):
        _, _, systems = build_ring_failure(5, "fixed-edge", seed=1, horizon=4)
        assert all(len(s.paths) - 1 == 1 for s in systems)

    def test_rejects_n_below_three(self):
        with pytest.raises(ValueError):
            build_ring_failure(2, "round-robin", seed=0, horizon=1)

    def test_reject_double_failure_on_a_pair(self):
        schedule, infra, systems = build_ring_failure(4, "round-robin", seed=0, horizon=3)
        # kill both arcs of the (0,1) pair in round 2
        bad = NetworkSnapshot(4, schedule.snapshot_at(2).edges - {(0, 1), (1, 2)})
        mutated = AdversarySchedule(
            4, 3, [schedule.snapshot_at(1), bad, schedule.snapshot_at(3)]
        )
        report = validate_paths_respecting(mutated, infra, systems)
        assert not report.ok
        assert report.reason == "budget-exceeded"
        _, _, count, budget = report.violation
        assert count == 2 and budget == 1


class TestCenterTerminal:
    def test_r3_disables_nothing(self):
        schedule, infra, _ = build_center_terminal(8, 3, seed=0, horizon=5)
        for snap in schedule.snapshots:
            assert snap.edges == infra.edges

    def test_removed_edge_count_matches_independent_counter(self):
        n, r = 12, 6
        schedule, infra, _ = build_center_terminal(n, r, seed=2, horizon=10)
        for snap in schedule.snapshots:
            removed = len(infra.edges) - len(snap.edges)
            assert removed == 2 * (n - r)  # fail_count=2 centers, each losing n-r edges
        # infrastructure edge count oracle: r*(n-r) + C(r,2)
        assert len(infra.edges) == r * (n - r) + r * (r - 1) // 2

    def test_all_rounds_connected(self):
        schedule, _, _ = build_center_terminal(12, 6, seed=2, horizon=20)
        for snap in schedule.snapshots:
            assert validate_snapshot(snap).ok

    def test_validator_accepts_every_round(self):
        schedule, infra, systems = build_center_terminal(12, 6, seed=2, horizon=20)
        report = validate_paths_respecting(schedule, infra, systems)
        assert report.ok

    def test_per_system_inactive_at_most_r_minus_2(self):
        n, r = 12, 6
        schedule, infra, systems = build_center_terminal(n, r, seed=4, horizon=12)
        for t in range(1, 13):
            inactive = infra.edges - schedule.snapshot_at(t).edges
            for system in systems:
                count = sum(
                    1
                    for group in system.edges()
                    for e in group
                    if e in inactive
                )
                assert count <= r - 2

    def test_precondition(self):
        with pytest.raises(ValueError):
            build_center_terminal(8, 8, seed=0, horizon=1)


class TestValidatorRejections:
    def test_edge_outside_infrastructure(self):
        infra = ring_infrastructure(5)
        snap = NetworkSnapshot(5, set(infra.edges) | {(0, 2)})
        schedule = AdversarySchedule(5, 1, [snap])
        report = validate_paths_respecting(schedule, infra, [])
        assert not report.ok
        assert report.reason == "edge-outside-infrastructure"

    def test_bad_path_system(self):
        infra = ring_infrastructure(5)
        schedule = AdversarySchedule(5, 1, [infra])
        bad = PathSystem(0, 2, ((0, 3, 2),))  # (0,3) not an infrastructure edge
        report = validate_paths_respecting(schedule, infra, [bad])
        assert not report.ok
        assert report.reason == "bad-path-system"

    def test_non_disjoint_paths_rejected(self):
        infra = center_terminal_infrastructure(8, 3)
        schedule = AdversarySchedule(8, 1, [infra])
        overlapping = PathSystem(3, 4, ((3, 0, 4), (3, 0, 4)))
        report = validate_paths_respecting(schedule, infra, [overlapping])
        assert not report.ok

    def test_mutation_fuzz_always_rejected(self):
        # deactivate one extra path edge in a random round: must reject
        n = 6
        schedule, infra, systems = build_ring_failure(n, "round-robin", seed=7, horizon=12)
        rng = derive_rng("mutate")
        for _ in range(50):
            t = rng.randrange(1, 13)
            base = schedule.snapshot_at(t)
            candidates = sorted(base.edges)
            extra = candidates[rng.randrange(len(candidates))]
            mutated_snaps = list(schedule.snapshots)
            mutated_snaps[t - 1] = NetworkSnapshot(n, base.edges - {extra})
            mutated = AdversarySchedule(n, 12, mutated_snaps)
            report = validate_paths_respecting(mutated, infra, systems)
            assert not report.ok
