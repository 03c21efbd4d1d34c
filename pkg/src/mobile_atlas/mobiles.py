"""Well-labeled mobiles and the bijection with blocked-edge maps.

A mobile is a plane tree with three node kinds: labeled vertices (positive
integer labels), white nodes and black nodes. Edges are either type (iii)
(white node to labeled vertex) or flagged (white to black, one non-negative
flag per side, optionally marked). Marked edges encode blocked map edges.

Conventions (shared with :mod:`mobile_atlas.maps`):

- ``sigma`` rotations are counterclockwise; every clockwise rule below is a
  sweep along ``sigma`` inverted.
- ``flag_left[d]`` is the flag on the left-hand side of dart ``d`` walking
  from its base node to the opposite node.
- Sweeping clockwise around a node, crossing a flagged dart ``d`` based
  there reads ``flag_left[d]`` first and ``flag_left[alpha(d)]`` second;
  around a white node the pair must increase weakly (unmarked edges), which
  is the same constraint as the weak decrease around the black endpoint.
- The clockwise contour of the tree is the orbit of ``x -> sigma^{-1}(alpha(x))``;
  along dart ``x`` it passes ``flag_left[x]``, and after ``x`` it visits the
  corner of head(x) whose arrival dart is ``alpha(x)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (ConnectivityViolated, DegenerateMap, NotWellLabeled,
                     RatchetViolated)
from .maps import (BLACK, MODE_DIRECTED, WHITE, Bicoloring, BlockedConfig,
                   PlanarMap, bicolor_faces, build_map, canonical_orientation,
                   canonical_relabeling, distances)

LABELED = "labeled"
EDGE_III = "iii"
EDGE_FLAGGED = "flagged"


@dataclass
class MobileNode:
    kind: str                       # LABELED | WHITE | BLACK
    label: Optional[int] = None     # labeled vertices only
    particles: int = 0              # white/black occupancy for particle models


class Mobile:
    """Half-edge plane tree; isolated labeled vertices are allowed."""

    __slots__ = ("nodes", "rot", "alpha", "edge_kind", "marked", "flag_left",
                 "node_of", "root_corner")

    def __init__(self, nodes: list[MobileNode], rot: list[list[int]],
                 alpha: dict, edge_kind: dict, marked: dict, flag_left: dict,
                 root_corner: Optional[int] = None):
        self.nodes = nodes
        self.rot = rot
        self.alpha = alpha
        self.edge_kind = edge_kind      # edge id (min dart) -> EDGE_III | EDGE_FLAGGED
        self.marked = marked            # edge id -> bool (flagged edges only)
        self.flag_left = flag_left      # dart -> flag on its left side
        self.root_corner = root_corner  # dart at a labeled vertex, or None
        self.node_of = {}
        for nid, darts in enumerate(rot):
            for d in darts:
                self.node_of[d] = nid

    # --- structure helpers ---

    def dart_count(self) -> int:
        return len(self.alpha)

    def edge_count(self) -> int:
        return len(self.alpha) // 2

    def edge_of(self, d: int) -> int:
        return min(d, self.alpha[d])

    def darts(self):
        return self.alpha.keys()

    def sigma_next(self, d: int) -> int:
        ring = self.rot[self.node_of[d]]
        return ring[(ring.index(d) + 1) % len(ring)]

    def sigma_prev(self, d: int) -> int:
        ring = self.rot[self.node_of[d]]
        return ring[(ring.index(d) - 1) % len(ring)]

    def clockwise_ring(self, nid: int) -> list[int]:
        return list(reversed(self.rot[nid]))

    def labeled_nodes(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.kind == LABELED]

    def white_nodes(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.kind == WHITE]

    def black_nodes(self) -> list[int]:
        return [i for i, n in enumerate(self.nodes) if n.kind == BLACK]

    def is_tree(self) -> bool:
        n_nodes = len(self.nodes)
        if self.edge_count() != n_nodes - 1:
            return False
        if n_nodes == 1:
            return True
        seen = {0}
        stack = [0]
        while stack:
            nid = stack.pop()
            for d in self.rot[nid]:
                other = self.node_of[self.alpha[d]]
                if other not in seen:
                    seen.add(other)
                    stack.append(other)
        return len(seen) == n_nodes

    def black_effective_valence(self, nid: int) -> int:
        """Incident flagged edges plus the total corner label increments."""
        ring = self.clockwise_ring(nid)
        total = len(ring)
        for i, d in enumerate(ring):
            after = self.flag_left[self.alpha[d]]
            before_next = self.flag_left[ring[(i + 1) % len(ring)]]
            total += before_next - after
        return total

    def __repr__(self):
        kinds = {LABELED: 0, WHITE: 0, BLACK: 0}
        for n in self.nodes:
            kinds[n.kind] += 1
        return (f"Mobile(labeled={kinds[LABELED]}, white={kinds[WHITE]}, "
                f"black={kinds[BLACK]}, edges={self.edge_count()})")


# --- encoding: map with blocked edges -> mobile ---

def to_mobile(config: BlockedConfig, coloring: Optional[Bicoloring] = None,
              root_edge: Optional[int] = None) -> Mobile:
    """Encode a pointed map with blocked edges as a well-labeled mobile.

    ``root_edge`` optionally marks a non-blocked edge whose head is one step
    further from the origin than its tail; the returned mobile then carries
    the corresponding root corner.
    """
    m = config.map
    if len(m.vertices) == 1:
        raise DegenerateMap("single-vertex petal maps carry no labeled vertex")
    coloring = coloring or bicolor_faces(m)
    orient = canonical_orientation(m, coloring)
    dist = distances(config, coloring)

    nodes: list[MobileNode] = []
    node_id: dict = {}
    for f in m.faces:
        node_id[("f", f)] = len(nodes)
        nodes.append(MobileNode(kind=coloring.color(f)))
    for v in m.vertices:
        if v != config.origin:
            node_id[("v", v)] = len(nodes)
            nodes.append(MobileNode(kind=LABELED, label=dist[v]))

    # one mobile edge per map edge; dart pair (2e-1, 2e) indexed by edge rank
    edge_ids = m.edges()
    edge_rank = {e: i for i, e in enumerate(edge_ids)}
    alpha: dict[int, int] = {}
    edge_kind: dict[int, bool] = {}
    marked: dict[int, bool] = {}
    flag_left: dict[int, int] = {}
    # end assignment: dart 2i+1 sits at the white-face node (flagged) or the
    # white-face node (iii); dart 2i+2 at the black node / labeled vertex.
    ends: dict[int, int] = {}
    for e in edge_ids:
        d = orient[e]
        i = edge_rank[e]
        d_first, d_second = 2 * i + 1, 2 * i + 2
        alpha[d_first] = d_second
        alpha[d_second] = d_first
        white_face = m.face_of[m.alpha[d]]
        black_face = m.face_of[d]
        n_tail, n_head = dist[m.tail(d)], dist[m.head(d)]
        if e in config.blocked or n_head <= n_tail:
            edge_kind[d_first] = EDGE_FLAGGED
            marked[d_first] = e in config.blocked
            ends[d_first] = node_id[("f", white_face)]
            ends[d_second] = node_id[("f", black_face)]
            flag_left[d_first] = n_head    # white-side dart: head on its left
            flag_left[d_second] = n_tail
        else:
            if n_head != n_tail + 1:
                raise AssertionError("oriented distance step exceeds one")
            edge_kind[d_first] = EDGE_III
            ends[d_first] = node_id[("f", white_face)]
            ends[d_second] = node_id[("v", m.head(d))]

    def mobile_dart_at(map_edge: int, nid: int) -> int:
        i = edge_rank[map_edge]
        return 2 * i + 1 if ends[2 * i + 1] == nid else 2 * i + 2

    rot: list[list[int]] = [[] for _ in nodes]
    for f, orbit in m.faces.items():
        nid = node_id[("f", f)]
        cw = []
        for x in orbit:  # face orbit = clockwise sweep around the face node
            e = m.edge_of(x)
            if coloring.color(f) == BLACK and edge_kind[2 * edge_rank[e] + 1] == EDGE_III:
                continue  # spurious dangling slot, not stored
            cw.append(mobile_dart_at(e, nid))
        rot[nid] = list(reversed(cw))
    for v in m.vertices:
        if v == config.origin:
            continue
        nid = node_id[("v", v)]
        ccw = []
        for a in m.vertices[v]:  # map darts at v in counterclockwise order
            e = m.edge_of(a)
            i = edge_rank[e]
            if edge_kind[2 * i + 1] == EDGE_III and ends[2 * i + 2] == nid and m.head(orient[e]) == v:
                ccw.append(2 * i + 2)
        rot[nid] = ccw

    mob = Mobile(nodes, rot, alpha, edge_kind, marked, flag_left)

    n_nodes, n_edges = len(nodes), mob.edge_count()
    if n_edges != m.edge_count:
        raise AssertionError("mobile edge count must equal the map edge count")
    if n_nodes != len(m.faces) + len(m.vertices) - 1:
        raise AssertionError("mobile node count must be F + V - 1")
    if not mob.is_tree():
        raise AssertionError("encoded mobile is not a tree")

    if root_edge is not None:
        d = orient[root_edge]
        if root_edge in config.blocked or dist[m.head(d)] != dist[m.tail(d)] + 1:
            raise ValueError("root edge must be non-blocked and increase the distance")
        mob.root_corner = _corner_of_edge(mob, edge_rank[root_edge])
    return mob


def _corner_of_edge(mob: Mobile, rank: int) -> int:
    """Root corner matching a distance-increasing map edge.

    The map edge lies immediately counterclockwise of its own type (iii)
    mobile edge at the labeled endpoint, so the rebuilding corner is the one
    whose clockwise-side edge is that mobile edge; the contour enters it
    through the next dart counterclockwise.
    """
    return mob.sigma_next(2 * rank + 2)


# --- rule validation ---

@dataclass
class Diagnostics:
    problems: list = field(default_factory=list)

    def ok(self) -> bool:
        return not self.problems

    def add(self, msg: str):
        self.problems.append(msg)


def _crossing_values(mob: Mobile, d: int) -> tuple[int, int]:
    """(first, second) values read when the clockwise sweep around the base
    of ``d`` crosses it; only meaningful at white and black nodes."""
    e = mob.edge_of(d)
    if mob.edge_kind[e] == EDGE_FLAGGED:
        return mob.flag_left[d], mob.flag_left[mob.alpha[d]]
    lab = mob.nodes[mob.node_of[mob.alpha[d]]].label
    return lab, lab - 1


def check_well_labeled(mob: Mobile) -> Diagnostics:
    """Report every violated well-labeled-mobile invariant."""
    diag = Diagnostics()
    if not mob.is_tree():
        diag.add("underlying graph is not a tree")
        return diag
    if not mob.labeled_nodes():
        diag.add("no labeled vertex (degenerate all-flag mobile)")

    for nid, node in enumerate(mob.nodes):
        if node.kind == LABELED and (node.label is None or node.label < 1):
            diag.add(f"node {nid}: label {node.label} is not a positive integer")
        if node.particles < 0:
            diag.add(f"node {nid}: negative particle count")
    for d in mob.darts():
        e = mob.edge_of(d)
        if mob.edge_kind[e] == EDGE_FLAGGED and mob.flag_left[d] < 0:
            diag.add(f"dart {d}: negative flag")

    # edge endpoint kinds
    for e, kind in mob.edge_kind.items():
        k1 = mob.nodes[mob.node_of[e]].kind
        k2 = mob.nodes[mob.node_of[mob.alpha[e]]].kind
        pair = {k1, k2}
        if kind == EDGE_FLAGGED and pair != {WHITE, BLACK}:
            diag.add(f"flagged edge {e} must join a white and a black node")
        if kind == EDGE_III and pair != {WHITE, LABELED}:
            diag.add(f"type (iii) edge {e} must join a white node and a labeled vertex")

    # corner and crossing rules (label consistency at the labeled end of a
    # type (iii) edge is imposed through the white-side crossing values)
    for nid, node in enumerate(mob.nodes):
        if node.kind == LABELED:
            continue
        ring = mob.clockwise_ring(nid)
        if not ring:
            continue
        k = len(ring)
        for i, d in enumerate(ring):
            e = mob.edge_of(d)
            flagged = mob.edge_kind[e] == EDGE_FLAGGED
            first, second = _crossing_values(mob, d)
            if node.kind == WHITE and flagged and not mob.marked[e] and first > second:
                diag.add(f"white node {nid}: unmarked flags must increase "
                         f"weakly clockwise ({first} then {second})")
            if node.kind == BLACK and flagged and not mob.marked[e] and first < second:
                diag.add(f"black node {nid}: unmarked flags must decrease "
                         f"weakly clockwise ({first} then {second})")
            nxt_first, _ = _crossing_values(mob, ring[(i + 1) % k])
            if node.kind == WHITE and nxt_first != second:
                diag.add(f"white node {nid}: corner value jumps from {second} "
                         f"to {nxt_first}")
            if node.kind == BLACK and nxt_first < second:
                diag.add(f"black node {nid}: corner value decreases from "
                         f"{second} to {nxt_first}")

    has_one = any(n.kind == LABELED and n.label == 1 for n in mob.nodes)
    has_zero_flag = any(mob.edge_kind[mob.edge_of(d)] == EDGE_FLAGGED
                        and mob.flag_left[d] == 0 for d in mob.darts())
    if not has_one and not has_zero_flag and mob.labeled_nodes():
        diag.add("no vertex labeled 1 and no flag labeled 0")
    return diag


# --- contour words ---

@dataclass(frozen=True)
class Token:
    kind: str         # 'corner' | 'flag'
    value: int
    dart: int         # corner: arrival dart at the vertex; flag: side dart


@dataclass(frozen=True)
class ContourWord:
    tokens: tuple

    def values(self) -> list[int]:
        return [t.value for t in self.tokens]

    def __len__(self):
        return len(self.tokens)


def contour_tokens(mob: Mobile) -> list[Token]:
    """Clockwise contour: flags along darts, corners at labeled vertices."""
    if mob.edge_count() == 0:
        v = mob.labeled_nodes()[0]
        return [Token("corner", mob.nodes[v].label, -1)]
    start = min(mob.darts())
    tokens = []
    x = start
    while True:
        e = mob.edge_of(x)
        if mob.edge_kind[e] == EDGE_FLAGGED:
            tokens.append(Token("flag", mob.flag_left[x], x))
        arrival = mob.alpha[x]
        head = mob.node_of[arrival]
        if mob.nodes[head].kind == LABELED:
            tokens.append(Token("corner", mob.nodes[head].label, arrival))
        x = mob.sigma_prev(arrival)
        if x == start:
            break
    return tokens


def contour_word(mob: Mobile) -> ContourWord:
    """Cyclic label sequence around the mobile, ratchet-checked."""
    tokens = contour_tokens(mob)
    n = len(tokens)
    if n > 1:
        for i, t in enumerate(tokens):
            nxt = tokens[(i + 1) % n]
            if t.kind == "corner" and nxt.value != t.value - 1:
                raise RatchetViolated(
                    f"value after a corner labeled {t.value} is {nxt.value}")
            if t.kind == "flag" and nxt.value < t.value:
                raise RatchetViolated(
                    f"value decreases from flag {t.value} to {nxt.value}")
    expected = sum(len(mob.rot[v]) if mob.rot[v] else 1 for v in mob.labeled_nodes())
    flagged = sum(1 for e, k in mob.edge_kind.items() if k == EDGE_FLAGGED)
    if n != expected + 2 * flagged:
        raise RatchetViolated("token count differs from corners plus two flags per edge")
    return ContourWord(tuple(tokens))


# --- decoding: mobile -> map with blocked edges ---

ORIGIN = -1


def from_mobile(mob: Mobile, mode: str = MODE_DIRECTED):
    """Rebuild the pointed map with blocked edges encoded by a mobile.

    Returns (config, root_edge_id_or_None); labels of the mobile equal the
    oriented distances of the output.
    """
    diag = check_well_labeled(mob)
    if not diag.ok():
        raise NotWellLabeled("; ".join(diag.problems))
    word = contour_word(mob)  # raises RatchetViolated on malformed input
    tokens = word.tokens
    n_tok = len(tokens)

    # successors: first corner forward with the target value
    succ: list[int] = []
    for i, t in enumerate(tokens):
        target = t.value - 1 if t.kind == "corner" else t.value
        if target == 0:
            succ.append(ORIGIN)
            continue
        j = None
        for step in range(1, n_tok + 1):
            cand = tokens[(i + step) % n_tok]
            if cand.kind == "corner" and cand.value == target:
                j = (i + step) % n_tok
                break
        if j is None:
            raise NotWellLabeled(f"token {i} (value {t.value}) has no successor")
        succ.append(j)

    # darts: one out-dart per corner token, one landing dart per token
    next_dart = 1
    out_dart: dict[int, int] = {}
    land_dart: dict[int, int] = {}
    for i, t in enumerate(tokens):
        if t.kind == "corner":
            out_dart[i] = next_dart
            next_dart += 1
        land_dart[i] = next_dart
        next_dart += 1
    total_darts = next_dart - 1

    alpha = [0] * (total_darts + 1)
    blocked_darts: list[int] = []
    root_edge_dart = None
    sample_iii_landing = None
    flag_sides: dict[int, list[int]] = {}
    for i, t in enumerate(tokens):
        if t.kind == "corner":
            alpha[out_dart[i]] = land_dart[i]
            alpha[land_dart[i]] = out_dart[i]
            if sample_iii_landing is None:
                sample_iii_landing = land_dart[i]
            if mob.root_corner is not None and t.dart == mob.root_corner:
                root_edge_dart = out_dart[i]
        else:
            flag_sides.setdefault(mob.edge_of(t.dart), []).append(i)
    if mob.root_corner is not None and mob.edge_count() == 0:
        root_edge_dart = out_dart[0]
    for e, sides in flag_sides.items():
        if len(sides) != 2:
            raise NotWellLabeled("flagged edge passed other than twice by the contour")
        i1, i2 = sides
        alpha[land_dart[i1]] = land_dart[i2]
        alpha[land_dart[i2]] = land_dart[i1]
        if mob.marked[e]:
            blocked_darts.append(land_dart[i1])

    # rotations: per labeled vertex, corners in contour order; inside one
    # corner, incoming chords from nearest source to farthest, then the
    # outgoing chord; all clockwise, reversed at the end. The origin sees
    # its chords in contour order (counterclockwise from inside the face).
    incoming: dict[int, list[int]] = {i: [] for i in range(n_tok)}
    origin_ccw: list[int] = []
    for i in range(n_tok):
        s = succ[i]
        if s == ORIGIN:
            origin_ccw.append(land_dart[i])
        else:
            incoming[s].append(i)

    corner_tokens_of: dict[int, list[int]] = {}
    for i, t in enumerate(tokens):
        if t.kind == "corner":
            v = mob.node_of.get(t.dart, None)
            if t.dart == -1:
                v = mob.labeled_nodes()[0]
            corner_tokens_of.setdefault(v, []).append(i)

    rotations: list[list[int]] = []
    for v, corner_list in corner_tokens_of.items():
        cw: list[int] = []
        for i in corner_list:  # contour order == clockwise corner order
            sources = incoming[i]
            sources.sort(key=lambda t0: (i - t0) % n_tok)
            cw.extend(land_dart[t0] for t0 in sources)
            cw.append(out_dart[i])
        rotations.append(list(reversed(cw)))
    rotations.append(list(origin_ccw))
    origin_marker_dart = (origin_ccw[0] if origin_ccw else None)
    if origin_marker_dart is None:
        raise NotWellLabeled("no chord reaches the origin")

    sigma = [0] * (total_darts + 1)
    for ring in rotations:
        k = len(ring)
        for idx, d in enumerate(ring):
            sigma[d] = ring[(idx + 1) % k]

    raw = build_map(alpha[1:], sigma[1:])

    # relabel so dart 1 lies on a black face: the landing dart of a type
    # (iii) chord points along the rebuilt edge with the black face on its
    # right, matching the coloring convention.
    relab = canonical_relabeling(raw, sample_iii_landing)
    from .maps import relabel_map
    final = relabel_map(raw, relab)
    blocked = frozenset(final.edge_of(relab[d]) for d in blocked_darts)
    origin_vertex = final.vertex_of[relab[origin_marker_dart]]
    config = BlockedConfig(map=final, origin=origin_vertex,
                           blocked=blocked, mode=mode)

    dist = distances(config)
    for v, corner_list in corner_tokens_of.items():
        want = mob.nodes[v].label
        got = dist[final.vertex_of[relab[out_dart[corner_list[0]]]]]
        if got != want:
            raise AssertionError(
                f"decoded distance {got} disagrees with label {want}")
    root_edge = final.edge_of(relab[root_edge_dart]) if root_edge_dart else None
    return config, root_edge


# --- JSON serialization ---

def mobile_to_json(mob: Mobile) -> dict:
    """Nested plane-tree form rooted at the root corner's vertex if present,
    else at the lowest-id labeled vertex."""
    if mob.root_corner is not None and mob.root_corner != -1:
        root = mob.node_of[mob.root_corner]
    elif mob.root_corner == -1 or mob.edge_count() == 0:
        root = mob.labeled_nodes()[0]
    else:
        root = mob.labeled_nodes()[0]

    def node_obj(nid: int, parent_dart: Optional[int]) -> dict:
        node = mob.nodes[nid]
        obj: dict = {"kind": node.kind}
        if node.kind == LABELED:
            obj["label"] = node.label
        if node.particles:
            obj["particles"] = node.particles
        ring = mob.rot[nid]
        if parent_dart is not None:
            k = ring.index(parent_dart)
            ring = ring[k + 1:] + ring[:k]
        children = []
        for d in ring:
            e = mob.edge_of(d)
            child: dict = {"edge": mob.edge_kind[e]}
            if mob.edge_kind[e] == EDGE_FLAGGED:
                child["marked"] = bool(mob.marked[e])
                child["flag_left"] = mob.flag_left[d]
                child["flag_right"] = mob.flag_left[mob.alpha[d]]
            child["node"] = node_obj(mob.node_of[mob.alpha[d]], mob.alpha[d])
            children.append(child)
        if children:
            obj["children"] = children
        return obj

    out = {"root": node_obj(root, None)}
    if mob.root_corner is not None:
        if mob.root_corner == -1 or mob.edge_count() == 0:
            out["root_corner"] = 0
        else:
            ring = mob.rot[root]
            out["root_corner"] = ring.index(mob.root_corner)
    return out


def mobile_from_json(data: dict) -> Mobile:
    nodes: list[MobileNode] = []
    rot: list[list[int]] = []
    alpha: dict = {}
    edge_kind: dict = {}
    marked: dict = {}
    flag_left: dict = {}
    counter = [1]

    def walk(obj: dict, parent_dart: Optional[int]) -> int:
        kind = obj["kind"]
        nid = len(nodes)
        nodes.append(MobileNode(kind=kind, label=obj.get("label"),
                                particles=int(obj.get("particles", 0))))
        ring: list[int] = []
        if parent_dart is not None:
            ring.append(parent_dart)
        rot.append(ring)
        for child in obj.get("children", []):
            d_here, d_there = counter[0], counter[0] + 1
            counter[0] += 2
            alpha[d_here] = d_there
            alpha[d_there] = d_here
            e = min(d_here, d_there)
            edge_kind[e] = child["edge"]
            if child["edge"] == EDGE_FLAGGED:
                marked[e] = bool(child.get("marked", False))
                flag_left[d_here] = int(child["flag_left"])
                flag_left[d_there] = int(child["flag_right"])
            ring.append(d_here)
            child_id = walk(child["node"], d_there)
            rot[nid] = ring
        return nid

    root_id = walk(data["root"], None)
    mob = Mobile(nodes, rot, alpha, edge_kind, marked, flag_left)
    if "root_corner" in data:
        idx = int(data["root_corner"])
        ring = rot[root_id]
        mob.root_corner = ring[idx] if ring else -1
    return mob
