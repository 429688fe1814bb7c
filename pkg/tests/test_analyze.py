import numpy as np
import networkx as nx
import pytest

from helpers import (
    CHAIN_CLUSTER,
    CITY_FIPS,
    STRATA_CLUSTER,
    STRATA_COVER,
    chain_table,
    toy_graph,
    toy_table,
)
from oracles import two_core_oracle
from mapper_scope import (
    CalibrationError,
    ClusterParams,
    ColorMap,
    CoverParams,
    FilterSpec,
    build_mapper,
    calibrate,
    connected_components,
    cycle_basis,
    detect_flares,
    two_core,
)


def random_graph(rng, max_nodes=40, edge_prob=0.08):
    v = int(rng.integers(1, max_nodes))
    edges = [
        (a, b)
        for a in range(v)
        for b in range(a + 1, v)
        if rng.random() < edge_prob
    ]
    return toy_graph(v, edges)


def as_nx(graph):
    g = nx.Graph()
    g.add_nodes_from(n.id for n in graph.nodes)
    g.add_edges_from((e.a, e.b) for e in graph.edges)
    return g


class TestConnectedComponents:
    def test_edgeless_graph(self):
        partition = connected_components(toy_graph(5, []))
        assert partition.count == 5
        assert partition.sizes == (1, 1, 1, 1, 1)

    def test_path_graph(self):
        partition = connected_components(toy_graph(6, [(i, i + 1) for i in range(5)]))
        assert partition.count == 1 and partition.sizes == (6,)

    def test_population_strata_split_into_components(self, strata_table):
        filt = FilterSpec(tuple(range(6)))
        graph = build_mapper(strata_table, filt, STRATA_COVER, STRATA_CLUSTER)
        partition = connected_components(graph)
        assert partition.count == 5
        # Each component is one population stratum.
        for cid in range(5):
            pops = {
                strata_table.column("population")[row]
                for u in partition.nodes_in(cid)
                for row in graph.node(u).members
            }
            assert len(pops) == 1

    def test_component_ids_ordered_by_smallest_node(self):
        partition = connected_components(toy_graph(4, [(1, 3)]))
        assert partition.component_of == (0, 1, 2, 1)

    def test_matches_networkx_on_random_graphs(self):
        rng = np.random.default_rng(17)
        for _ in range(100):
            graph = random_graph(rng)
            partition = connected_components(graph)
            expected = list(nx.connected_components(as_nx(graph)))
            assert partition.count == len(expected)
            groups = {}
            for u, c in enumerate(partition.component_of):
                groups.setdefault(c, set()).add(u)
            assert set(map(frozenset, groups.values())) == set(map(frozenset, expected))


class TestCycleBasis:
    def test_tree_has_no_cycles(self):
        report = cycle_basis(toy_graph(5, [(0, 1), (0, 2), (2, 3), (2, 4)]))
        assert report.cycle_count == 0 and report.basis == ()

    def test_square(self):
        report = cycle_basis(toy_graph(4, [(0, 1), (1, 2), (2, 3), (0, 3)]))
        assert report.cycle_count == 1
        assert set(report.basis[0]) == {0, 1, 2, 3}

    def test_ring_fixture_single_hole(self, ring):
        from helpers import ANNULUS_CLUSTER

        graph = build_mapper(ring, FilterSpec((1,)), CoverParams(4, 0.3), ANNULUS_CLUSTER)
        assert cycle_basis(graph).cycle_count == 1

    def test_euler_identity_random_graphs(self):
        rng = np.random.default_rng(23)
        for _ in range(300):
            graph = random_graph(rng)
            report = cycle_basis(graph)
            c = connected_components(graph).count
            assert report.cycle_count == len(graph.edges) - len(graph.nodes) + c
            assert report.cycle_count == len(nx.cycle_basis(as_nx(graph)))

    def test_basis_cycles_are_closed_walks(self):
        rng = np.random.default_rng(29)
        for _ in range(50):
            graph = random_graph(rng, edge_prob=0.15)
            adjacency = {n.id: set() for n in graph.nodes}
            for e in graph.edges:
                adjacency[e.a].add(e.b)
                adjacency[e.b].add(e.a)
            for cycle in cycle_basis(graph).basis:
                assert len(cycle) >= 3
                assert len(set(cycle)) == len(cycle)
                for u, v in zip(cycle, cycle[1:] + cycle[:1]):
                    assert v in adjacency[u]


class TestTwoCore:
    def test_matches_peeling_oracle_and_networkx(self):
        rng = np.random.default_rng(31)
        for _ in range(100):
            graph = random_graph(rng, edge_prob=0.12)
            core = two_core(graph)
            assert core == two_core_oracle(graph.adjacency())
            assert core == set(nx.k_core(as_nx(graph), 2).nodes)

    def test_trunk_degrees_at_least_two(self):
        rng = np.random.default_rng(37)
        for _ in range(50):
            graph = random_graph(rng, edge_prob=0.1)
            core = two_core(graph)
            adjacency = graph.adjacency()
            for u in core:
                assert sum(1 for v in adjacency[u] if v in core) >= 2


def uniform_color(graph, value=0.0):
    return ColorMap("value", {n.id: value for n in graph.nodes})


class TestDetectFlares:
    def test_star_is_trunkless(self):
        graph = toy_graph(5, [(0, i) for i in range(1, 5)])
        table = toy_table(5)
        report = detect_flares(graph, uniform_color(graph), table)
        assert report.trunkless_components == (0,)
        assert report.flares == ()
        assert not report.trunk_nodes

    def test_pendant_path_with_rising_color(self):
        # 4-cycle trunk with a 5-node path hanging off node 0.
        edges = [(0, 1), (1, 2), (2, 3), (0, 3)] + [(3 + i, 4 + i) for i in range(1, 5)]
        edges.append((0, 4))
        graph = toy_graph(9, edges)
        color = ColorMap("value", {i: float(i) for i in range(9)})
        report = detect_flares(graph, color, toy_table(9))
        assert len(report.flares) == 1
        flare = report.flares[0]
        assert flare.attachments == (0,)
        assert set(flare.nodes) == {4, 5, 6, 7, 8}
        assert flare.trend == 1 and flare.trend_rho == pytest.approx(1.0)

    def test_falling_color_trend(self):
        edges = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (4, 5), (5, 6)]
        graph = toy_graph(7, edges)
        color = ColorMap("value", {i: float(-i) for i in range(7)})
        report = detect_flares(graph, color, toy_table(7))
        assert report.flares[0].trend == -1

    def test_partition_of_nodes(self):
        rng = np.random.default_rng(41)
        for _ in range(80):
            graph = random_graph(rng, edge_prob=0.1)
            table = toy_table(len(graph.nodes))
            report = detect_flares(graph, uniform_color(graph), table)
            flare_nodes = [u for f in report.flares for u in f.nodes]
            assert len(flare_nodes) == len(set(flare_nodes))  # disjoint
            trunkless_nodes = {
                u
                for c in report.trunkless_components
                for u in connected_components(graph).nodes_in(c)
            }
            all_nodes = set(report.trunk_nodes) | set(flare_nodes) | trunkless_nodes
            assert all_nodes == {n.id for n in graph.nodes}
            assert not (report.trunk_nodes & trunkless_nodes)
            assert not (report.trunk_nodes & set(flare_nodes))

    def test_flares_attach_to_single_trunk_node(self):
        rng = np.random.default_rng(43)
        for _ in range(80):
            graph = random_graph(rng, edge_prob=0.1)
            report = detect_flares(graph, uniform_color(graph), toy_table(len(graph.nodes)))
            for flare in report.flares:
                assert len(flare.attachments) == 1

    def test_five_city_fixture(self, city_chain):
        graph = build_mapper(city_chain, FilterSpec((0, 1, 2, 3)), CoverParams(8, 0.10), CHAIN_CLUSTER)
        from mapper_scope import color_by

        month = color_by(graph, city_chain, "month")
        report = detect_flares(graph, month, city_chain)
        assert len(report.flares) >= 5
        pure = {f.dominant_region for f in report.flares if f.purity == 1.0}
        assert pure == set(CITY_FIPS)


class TestCalibrate:
    def test_chain_minimal_overlap(self, geo_chain):
        result = calibrate(geo_chain, FilterSpec((0, 1, 2)), (8, 10, 12), 0.05, CHAIN_CLUSTER)
        assert result.n == 8 and result.p == pytest.approx(0.10)
        assert result.per_n == {8: pytest.approx(0.10), 10: pytest.approx(0.15), 12: pytest.approx(0.15)}
        # One grid step below the chosen overlap must fail.
        below = [c for n, p, c in result.scan if n == result.n and p == pytest.approx(0.05)]
        assert below and below[0] > 1

    def test_single_region_returns_smallest_grid_point(self):
        # Long enough that every overlap band contains a month at the first
        # grid point, so any (n, p) yields one component.
        table = chain_table(months=240, count=1)
        result = calibrate(table, FilterSpec((0,)), (4, 8), 0.05, ClusterParams(eps=2.0))
        assert result.p == pytest.approx(0.05)
        assert result.per_n == {4: pytest.approx(0.05), 8: pytest.approx(0.05)}
        assert result.n == 4  # ties prefer the smaller interval count

    def test_unreachable_connectivity_reports_scan(self):
        table = chain_table(months=6, count=2)
        # Two counties, far apart relative to eps: never one component.
        far = table.rows.copy()
        far[~np.isfinite(far)] = 0
        from mapper_scope import PointTable

        far[len(far) // 2:, 1:3] += 1000.0
        spread = PointTable(table.columns, far, table.row_meta)
        with pytest.raises(CalibrationError) as info:
            calibrate(spread, FilterSpec((0, 1, 2)), (4,), 0.25, ClusterParams(eps=0.5))
        assert info.value.scan  # carries the full scan table
        assert all(c > 1 for _, _, c in info.value.scan)

    def test_p_step_validated(self, geo_chain):
        with pytest.raises(CalibrationError, match="p step"):
            calibrate(geo_chain, FilterSpec((0, 1, 2)), (8,), 0.6, CHAIN_CLUSTER)

    def test_outcome_columns_stay_out_of_scan(self, city_chain):
        # Calibration on the spatial dims must ignore the death column: the
        # result equals a scan over the fully projected sub-table.
        result = calibrate(city_chain, FilterSpec((0, 1, 2)), (8,), 0.05, CHAIN_CLUSTER)
        sub = city_chain.select((0, 1, 2))
        direct = calibrate(sub, FilterSpec((0, 1, 2)), (8,), 0.05, CHAIN_CLUSTER)
        assert (result.n, result.p) == (direct.n, direct.p)
        assert result.scan == direct.scan
