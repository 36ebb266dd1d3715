"""Throughput and shortest-path benchmarks."""

from .graph import INF, Graph, dijkstra_ref, gen_gnp
from .sssp import DistTable, SSSPResult, sssp_run
from .throughput import ThroughputConfig, ThroughputStats, throughput_run

__all__ = [
    "INF", "DistTable", "Graph", "SSSPResult", "ThroughputConfig", "ThroughputStats",
    "dijkstra_ref", "gen_gnp", "sssp_run", "throughput_run",
]
