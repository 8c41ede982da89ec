"""Dependency DAG over representation specs.

Builds a validated acyclic graph, caches a deterministic topological order
(ties between independent nodes broken by name, ascending) and partitions
the graph into independent groups whose cross-group dependencies are
resolved from disk at run time.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .config import GlobalConfig, RepresentationSpec
from .errors import CycleError, GraphError


@dataclass(frozen=True)
class RepresentationGraph:
    nodes: dict[str, RepresentationSpec]
    edges: dict[str, tuple[str, ...]]  # dep name -> dependents, sorted
    topo_order: tuple[str, ...]
    external_inputs: frozenset[str] = field(default_factory=frozenset)  # deps loaded from disk

    def spec(self, name: str) -> RepresentationSpec:
        return self.nodes[name]

    def ancestors(self, name: str) -> tuple[str, ...]:
        """Transitive in-graph deps of ``name``, in topo order."""
        wanted: set[str] = set()
        stack = [name]
        while stack:
            node = stack.pop()
            for dep in self.nodes[node].deps:
                if dep in self.nodes and dep not in wanted:
                    wanted.add(dep)
                    stack.append(dep)
        return tuple(n for n in self.topo_order if n in wanted)


def _find_cycle(nodes: dict[str, RepresentationSpec]) -> list[str]:
    """Return one concrete cycle path (first == last) via iterative DFS."""
    WHITE, GRAY, BLACK = 0, 1, 2
    color = {name: WHITE for name in nodes}
    for start in sorted(nodes):
        if color[start] != WHITE:
            continue
        path: list[str] = []
        stack: list[tuple[str, int]] = [(start, 0)]
        while stack:
            node, dep_idx = stack[-1]
            if dep_idx == 0:
                color[node] = GRAY
                path.append(node)
            deps = [d for d in nodes[node].deps if d in nodes]
            if dep_idx < len(deps):
                stack[-1] = (node, dep_idx + 1)
                nxt = deps[dep_idx]
                if color[nxt] == GRAY:
                    return path[path.index(nxt):] + [nxt]
                if color[nxt] == WHITE:
                    stack.append((nxt, 0))
            else:
                color[node] = BLACK
                path.pop()
                stack.pop()
    raise AssertionError("no cycle found")  # callers check in-degrees first


def topo_sort(nodes: dict[str, RepresentationSpec], external: frozenset[str] = frozenset()) -> tuple[str, ...]:
    """Deterministic Kahn's algorithm; ties broken by name ascending."""
    pending = {name: sum(1 for d in spec.deps if d in nodes) for name, spec in nodes.items()}
    dependents: dict[str, list[str]] = {name: [] for name in nodes}
    for name, spec in nodes.items():
        for dep in spec.deps:
            if dep in nodes:
                dependents[dep].append(name)
            elif dep not in external:
                raise GraphError(f"representation {name!r} depends on unknown node {dep!r}")
    ready = [name for name, n in pending.items() if n == 0]
    heapq.heapify(ready)
    order: list[str] = []
    while ready:
        name = heapq.heappop(ready)
        order.append(name)
        for dependent in dependents[name]:
            pending[dependent] -= 1
            if pending[dependent] == 0:
                heapq.heappush(ready, dependent)
    if len(order) != len(nodes):
        raise CycleError(_find_cycle({n: s for n, s in nodes.items() if pending[n] > 0}))
    return tuple(order)


def build_graph(
    specs: list[RepresentationSpec], external_inputs: frozenset[str] = frozenset()
) -> RepresentationGraph:
    """Validate specs into a DAG with a cached topo order.

    ``external_inputs`` names deps that are not part of this graph and will
    be loaded from disk (used by partition_groups).
    """
    nodes = {spec.name: spec for spec in sorted(specs, key=lambda s: s.name)}
    if len(nodes) != len(specs):
        dupes = sorted({s.name for s in specs if sum(t.name == s.name for t in specs) > 1})
        raise GraphError(f"duplicate representation name(s): {dupes}")
    order = topo_sort(nodes, external_inputs)
    edges: dict[str, list[str]] = {name: [] for name in nodes}
    for name, spec in nodes.items():
        for dep in spec.deps:
            if dep in nodes:
                edges[dep].append(name)
    return RepresentationGraph(
        nodes=nodes,
        edges={name: tuple(sorted(deps)) for name, deps in edges.items()},
        topo_order=order,
        external_inputs=frozenset(external_inputs),
    )


def partition_groups(
    graph: RepresentationGraph,
    group_assignment: dict[str, str],
    global_cfg: GlobalConfig | None = None,
) -> list[RepresentationGraph]:
    """Split the graph into per-group subgraphs (one process per group).

    Cross-group dependencies become external inputs of the consuming group,
    resolved through disk, so the dependency must be exported as binary by
    its own group.
    """
    unassigned = sorted(set(graph.nodes) - set(group_assignment))
    if unassigned:
        raise GraphError(f"node(s) not assigned to any group: {unassigned}")
    stray = sorted(set(group_assignment) - set(graph.nodes))
    if stray:
        raise GraphError(f"group assignment references unknown node(s): {stray}")

    groups: dict[str, list[RepresentationSpec]] = {}
    for name in graph.topo_order:
        groups.setdefault(group_assignment[name], []).append(graph.nodes[name])

    result = []
    for group_id in sorted(groups):
        members = groups[group_id]
        member_names = {s.name for s in members}
        external = set()
        for spec in members:
            for dep in spec.deps:
                if dep in member_names:
                    continue
                dep_spec = graph.nodes[dep]
                export = dep_spec.effective_export(global_cfg) if global_cfg else dep_spec.export
                if export is not None and not export.binary:
                    raise GraphError(
                        f"cross-group dependency {dep!r} of {spec.name!r} is never exported as binary"
                    )
                external.add(dep)
        result.append(build_graph(members, external_inputs=frozenset(external)))
    return result


def parse_group_assignment(text: str) -> dict[str, str]:
    """Parse 'name=group' pairs separated by commas or newlines."""
    assignment = {}
    for chunk in text.replace("\n", ",").split(","):
        chunk = chunk.strip()
        if not chunk or chunk.startswith("#"):
            continue
        if "=" not in chunk:
            raise GraphError(f"bad group assignment entry {chunk!r}, expected 'name=group'")
        name, group = chunk.split("=", 1)
        assignment[name.strip()] = group.strip()
    return assignment
