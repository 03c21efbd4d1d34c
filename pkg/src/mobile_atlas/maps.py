"""Rotation-system planar maps with face bicoloring and blocked edges.

Encoding conventions used throughout the package:

- Darts are 1..2E. ``alpha`` is a fixed-point-free involution pairing the two
  darts of each edge; ``sigma`` is the counterclockwise rotation at each
  vertex. Both are stored as image tuples indexed by dart (slot 0 unused).
- A dart is directed away from its base vertex: tail(d) is the vertex whose
  rotation contains d, head(d) = tail(alpha(d)).
- Faces are the orbits of phi = sigma o alpha; the face of a dart lies on the
  RIGHT of the dart.
- The face containing dart 1 is black. The canonical direction of an edge is
  the dart whose face is black, so edges run clockwise around black faces,
  and allowed paths follow canonical darts of non-blocked edges.
- Vertex/face/edge ids are the minimal dart of the corresponding orbit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import (ConnectivityViolated, NonPlanar, NotBivalent,
                     NotConnected, NotEulerian, NotInvolution)

BLACK = "black"
WHITE = "white"

MODE_DIRECTED = "directed"
MODE_PAIRS = "pairs"
MODE_NONE = "none"


def standard_alpha(dart_count: int) -> tuple:
    """The involution (1 2)(3 4)... used by the file format."""
    img = [0] * (dart_count + 1)
    for e in range(dart_count // 2):
        img[2 * e + 1] = 2 * e + 2
        img[2 * e + 2] = 2 * e + 1
    return tuple(img)


def _orbits(perm: tuple, n: int) -> list[list[int]]:
    seen = [False] * (n + 1)
    out = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        orbit = []
        d = start
        while not seen[d]:
            seen[d] = True
            orbit.append(d)
            d = perm[d]
        out.append(orbit)
    return out


class PlanarMap:
    """Validated connected genus-0 rotation system."""

    __slots__ = ("dart_count", "alpha", "sigma", "phi",
                 "vertex_of", "face_of", "vertices", "faces")

    def __init__(self, alpha: tuple, sigma: tuple, dart_count: int):
        self.dart_count = dart_count
        self.alpha = alpha
        self.sigma = sigma
        self.phi = tuple(0 if d == 0 else sigma[alpha[d]] for d in range(dart_count + 1))
        vs = _orbits(sigma, dart_count)
        fs = _orbits(self.phi, dart_count)
        self.vertices = {min(o): o for o in vs}
        self.faces = {min(o): o for o in fs}
        self.vertex_of = [0] * (dart_count + 1)
        for vid, orbit in self.vertices.items():
            for d in orbit:
                self.vertex_of[d] = vid
        self.face_of = [0] * (dart_count + 1)
        for fid, orbit in self.faces.items():
            for d in orbit:
                self.face_of[d] = fid

    # --- basic structure ---

    @property
    def edge_count(self) -> int:
        return self.dart_count // 2

    def edge_of(self, d: int) -> int:
        return min(d, self.alpha[d])

    def edges(self) -> list[int]:
        return sorted({self.edge_of(d) for d in range(1, self.dart_count + 1)})

    def tail(self, d: int) -> int:
        return self.vertex_of[d]

    def head(self, d: int) -> int:
        return self.vertex_of[self.alpha[d]]

    def vertex_valence(self, v: int) -> int:
        return len(self.vertices[v])

    def face_valence(self, f: int) -> int:
        return len(self.faces[f])

    def euler_characteristic(self) -> int:
        return len(self.vertices) - self.edge_count + len(self.faces)

    def __eq__(self, other):
        if not isinstance(other, PlanarMap):
            return NotImplemented
        return self.sigma == other.sigma and self.alpha == other.alpha

    def __repr__(self):
        return (f"PlanarMap(E={self.edge_count}, V={len(self.vertices)}, "
                f"F={len(self.faces)})")


def build_map(alpha: Iterable[int] | tuple, sigma: Iterable[int], *,
              allow_higher_genus: bool = False) -> PlanarMap:
    """Validate a permutation pair and derive all orbit structures.

    ``alpha`` and ``sigma`` are image sequences for darts 1..2E (a leading
    0 entry is accepted). ``alpha`` may be None for the standard pairing.
    """
    sigma = tuple(sigma)
    if sigma and sigma[0] == 0:
        sigma_t = sigma
    else:
        sigma_t = (0,) + sigma
    n = len(sigma_t) - 1
    if n == 0 or n % 2:
        raise NotInvolution("dart count must be even and positive")
    if alpha is None:
        alpha_t = standard_alpha(n)
    else:
        alpha = tuple(alpha)
        alpha_t = alpha if alpha and alpha[0] == 0 else (0,) + alpha
    if len(alpha_t) != n + 1:
        raise NotInvolution("alpha and sigma must act on the same darts")
    if sorted(sigma_t[1:]) != list(range(1, n + 1)):
        raise NotInvolution("sigma is not a permutation of 1..2E")
    for d in range(1, n + 1):
        a = alpha_t[d]
        if not 1 <= a <= n or a == d or alpha_t[a] != d:
            raise NotInvolution("alpha is not a fixed-point-free involution")

    # connectivity of the group generated by sigma and alpha
    seen = [False] * (n + 1)
    stack = [1]
    seen[1] = True
    count = 0
    while stack:
        d = stack.pop()
        count += 1
        for nxt in (sigma_t[d], alpha_t[d]):
            if not seen[nxt]:
                seen[nxt] = True
                stack.append(nxt)
    if count != n:
        raise NotConnected("the rotation system is not connected")

    m = PlanarMap(alpha_t, sigma_t, n)
    if not allow_higher_genus and m.euler_characteristic() != 2:
        raise NonPlanar(f"Euler characteristic {m.euler_characteristic()} != 2")
    return m


# --- bicoloring and orientation ---

@dataclass(frozen=True)
class Bicoloring:
    face_color: dict  # face id -> BLACK | WHITE

    def color(self, f: int) -> str:
        return self.face_color[f]

    def swapped(self) -> "Bicoloring":
        flip = {BLACK: WHITE, WHITE: BLACK}
        return Bicoloring({f: flip[c] for f, c in self.face_color.items()})


def bicolor_faces(m: PlanarMap) -> Bicoloring:
    """Proper 2-coloring of faces; the face of dart 1 is black."""
    colors: dict[int, str] = {}
    root = m.face_of[1]
    colors[root] = BLACK
    stack = [root]
    while stack:
        f = stack.pop()
        opposite = WHITE if colors[f] == BLACK else BLACK
        for d in m.faces[f]:
            g = m.face_of[m.alpha[d]]
            if g not in colors:
                colors[g] = opposite
                stack.append(g)
            elif colors[g] != opposite:
                raise NotEulerian("faces admit no proper two-coloring")
    return Bicoloring(colors)


def canonical_orientation(m: PlanarMap, coloring: Bicoloring) -> dict:
    """Map each edge id to its canonical dart (the dart with black face)."""
    out = {}
    for d in range(1, m.dart_count + 1):
        if coloring.color(m.face_of[d]) == BLACK:
            out[m.edge_of(d)] = d
    return out


def is_canonical_dart(m: PlanarMap, coloring: Bicoloring, d: int) -> bool:
    return coloring.color(m.face_of[d]) == BLACK


# --- blocked configurations ---

@dataclass(frozen=True)
class BlockedConfig:
    """Pointed map with a set of blocked edges.

    ``blocked`` holds edge ids. In 'pairs' mode the two edges squeezed from
    one bivalent black face are blocked together; validity enforces that.
    """
    map: PlanarMap
    origin: int
    blocked: frozenset = frozenset()
    mode: str = MODE_DIRECTED

    def __post_init__(self):
        if self.origin not in self.map.vertices:
            raise ValueError(f"{self.origin} is not a vertex id")
        for e in self.blocked:
            if e not in self.map.vertices and e > self.map.dart_count:
                raise ValueError(f"{e} is not an edge id")


@dataclass(frozen=True)
class DistanceLabeling:
    dist: dict  # vertex id -> int

    def __getitem__(self, v: int) -> int:
        return self.dist[v]


def distances(config: BlockedConfig, coloring: Optional[Bicoloring] = None) -> DistanceLabeling:
    """Oriented BFS distances from the origin over non-blocked edges."""
    m = config.map
    coloring = coloring or bicolor_faces(m)
    arcs: dict[int, list[int]] = {v: [] for v in m.vertices}
    for e, d in canonical_orientation(m, coloring).items():
        if e not in config.blocked:
            arcs[m.tail(d)].append(m.head(d))
    dist = {config.origin: 0}
    frontier = [config.origin]
    while frontier:
        nxt = []
        for u in frontier:
            du = dist[u]
            for w in arcs[u]:
                if w not in dist:
                    dist[w] = du + 1
                    nxt.append(w)
        frontier = nxt
    for v in m.vertices:
        if v not in dist:
            raise ConnectivityViolated(v)
    return DistanceLabeling(dist)


def _pairs_partner(m: PlanarMap, coloring: Bicoloring) -> dict:
    """Edge pairing induced by bivalent black faces (pairs blocking mode)."""
    partner = {}
    for f, orbit in m.faces.items():
        if coloring.color(f) != BLACK:
            continue
        if len(orbit) != 2:
            raise NotBivalent(f"black face {f} is {len(orbit)}-valent, pairs mode "
                              f"needs bivalent black faces")
        e1, e2 = m.edge_of(orbit[0]), m.edge_of(orbit[1])
        partner[e1] = e2
        partner[e2] = e1
    return partner


def validate_blocking(config: BlockedConfig, coloring: Optional[Bicoloring] = None):
    """True iff the configuration is reachable (plus mode constraints).

    Returns (ok, witness): witness is None on success, otherwise a short
    description of the first violation found. On success the duals of
    blocked edges are additionally asserted to form a forest.
    """
    m = config.map
    try:
        coloring = coloring or bicolor_faces(m)
    except NotEulerian as exc:
        return False, str(exc)
    if config.mode == MODE_NONE and config.blocked:
        return False, "mode 'none' admits no blocked edges"
    if config.mode == MODE_PAIRS:
        try:
            partner = _pairs_partner(m, coloring)
        except NotBivalent as exc:
            return False, str(exc)
        for e in config.blocked:
            if partner[e] not in config.blocked:
                return False, f"edge {e} blocked without its partner {partner[e]}"
    try:
        distances(config, coloring)
    except ConnectivityViolated as exc:
        return False, f"vertex {exc.vertex} unreachable"

    # reachability implies the blocked duals are acyclic; assert it
    parent: dict[int, int] = {}

    def find(x):
        while parent.get(x, x) != x:
            parent[x] = parent.get(parent[x], parent[x])
            x = parent[x]
        return x

    for e in config.blocked:
        f1, f2 = m.face_of[e], m.face_of[m.alpha[e]]
        r1, r2 = find(f1), find(f2)
        if r1 == r2:
            raise AssertionError("blocked duals contain a cycle despite reachability")
        parent[r1] = r2
    return True, None


# --- duality and squeezing ---

def dual(m: PlanarMap) -> PlanarMap:
    """Faces become vertices: the dual rotation is phi, pairing unchanged."""
    return build_map(m.alpha[1:], m.phi[1:])


def squeeze_bivalent(m: PlanarMap, coloring: Bicoloring, color_to_squeeze: str):
    """Replace every face of one color (all bivalent) by a single edge.

    Returns (new_map, dart_map) where dart_map sends old darts to new darts
    (darts of squeezed faces map to None).
    """
    squeeze_faces = [f for f, orbit in m.faces.items()
                     if coloring.color(f) == color_to_squeeze]
    removed = set()
    fused = {}  # dart -> dart glued to it across a squeezed face
    for f in squeeze_faces:
        orbit = m.faces[f]
        if len(orbit) != 2:
            raise NotBivalent(f"face {f} has valence {len(orbit)}")
        d1, d2 = orbit
        a1, a2 = m.alpha[d1], m.alpha[d2]
        if a1 == d2:
            raise NotBivalent(f"face {f} is a petal bounded by a single edge")
        removed.update((d1, d2))
        fused[a1] = a2
        fused[a2] = a1

    survivors = [d for d in range(1, m.dart_count + 1) if d not in removed]
    if not survivors:
        raise NotBivalent("squeezing would remove every edge")

    # new alpha: fused pairs where the partner was squeezed, old pairs otherwise
    new_alpha_old = {}
    for d in survivors:
        a = m.alpha[d]
        new_alpha_old[d] = fused[d] if a in removed else a

    # new sigma: old sigma with removed darts skipped inside each rotation
    new_sigma_old = {}
    for d in survivors:
        nxt = m.sigma[d]
        while nxt in removed:
            nxt = m.sigma[nxt]
        new_sigma_old[d] = nxt

    # compact relabeling with the standard pairing
    dart_map: dict[int, Optional[int]] = {d: None for d in removed}
    next_id = 1
    for d in survivors:
        if d in dart_map:
            continue
        dart_map[d] = next_id
        dart_map[new_alpha_old[d]] = next_id + 1
        next_id += 2
    n_new = next_id - 1
    sigma_new = [0] * (n_new + 1)
    for d in survivors:
        sigma_new[dart_map[d]] = dart_map[new_sigma_old[d]]
    new_map = build_map(None, sigma_new)
    return new_map, dart_map


# --- canonical forms ---

def canonical_relabeling(m: PlanarMap, root_dart: int) -> dict:
    """Deterministic dart relabeling from a breadth-first traversal.

    The new pairing is the standard one: partners get adjacent labels.
    """
    new: dict[int, int] = {root_dart: 1, m.alpha[root_dart]: 2}
    order = [root_dart, m.alpha[root_dart]]
    next_id = 3
    i = 0
    while i < len(order):
        d = order[i]
        i += 1
        s = m.sigma[d]
        if s not in new:
            new[s] = next_id
            new[m.alpha[s]] = next_id + 1
            order.append(s)
            order.append(m.alpha[s])
            next_id += 2
    return new


def canonical_form(m: PlanarMap, root_dart: int) -> tuple:
    """Relabeled sigma image sequence; equal iff rooted maps are isomorphic."""
    new = canonical_relabeling(m, root_dart)
    n = m.dart_count
    out = [0] * n
    for d in range(1, n + 1):
        out[new[d] - 1] = new[m.sigma[d]]
    return tuple(out)


def relabel_map(m: PlanarMap, relabeling: dict) -> PlanarMap:
    n = m.dart_count
    sigma = [0] * (n + 1)
    alpha = [0] * (n + 1)
    for d in range(1, n + 1):
        sigma[relabeling[d]] = relabeling[m.sigma[d]]
        alpha[relabeling[d]] = relabeling[m.alpha[d]]
    return build_map(alpha[1:], sigma[1:])


def config_key(config: BlockedConfig, root_dart: Optional[int] = None) -> tuple:
    """Canonical key of (map, origin, blocked set, mode) for isomorphism tests.

    With ``root_dart`` the key is for the rooted object; otherwise the
    minimum over all rootings (coloring-preserving relabelings fix the color
    classes because black faces must stay black, i.e. dart 1's face class).
    """
    m = config.map
    coloring = bicolor_faces(m)
    root_color = coloring.color(m.face_of[1])

    def key_for(root: int) -> tuple:
        new = canonical_relabeling(m, root)
        sigma_key = canonical_form(m, root)
        blocked_key = tuple(sorted(
            min(new[e], new[m.alpha[e]]) for e in config.blocked))
        origin_key = min(new[d] for d in m.vertices[config.origin])
        return (sigma_key, blocked_key, origin_key, config.mode)

    if root_dart is not None:
        return key_for(root_dart)
    roots = [d for d in range(1, m.dart_count + 1)
             if coloring.color(m.face_of[d]) == root_color]
    return min(key_for(d) for d in roots)


# --- JSON format ---

def config_to_json(config: BlockedConfig, coloring: Optional[Bicoloring] = None) -> dict:
    """File format with alpha implicit as (1 2)(3 4)...

    Blocked edges are listed through their canonical darts.
    """
    m = config.map
    if m.alpha != standard_alpha(m.dart_count):
        raise ValueError("serialize maps with the standard pairing only")
    coloring = coloring or bicolor_faces(m)
    orient = canonical_orientation(m, coloring)
    return {
        "darts": m.dart_count,
        "sigma": list(m.sigma[1:]),
        "blocked_darts": sorted(orient[e] for e in config.blocked),
        "origin_vertex": config.origin,
        "mode": config.mode,
    }


def config_from_json(data: dict) -> BlockedConfig:
    n = int(data["darts"])
    sigma = [int(x) for x in data["sigma"]]
    if len(sigma) != n:
        raise ValueError("sigma length must equal the dart count")
    m = build_map(None, sigma)
    coloring = bicolor_faces(m)
    blocked = set()
    for d in data.get("blocked_darts", []):
        d = int(d)
        if not 1 <= d <= n:
            raise ValueError(f"dart {d} out of range")
        if not is_canonical_dart(m, coloring, d):
            raise ValueError(f"dart {d} is not the canonical dart of its edge")
        blocked.add(m.edge_of(d))
    origin = int(data.get("origin_vertex", m.vertex_of[1]))
    mode = data.get("mode", MODE_DIRECTED)
    if mode not in (MODE_DIRECTED, MODE_PAIRS, MODE_NONE):
        raise ValueError(f"unknown mode {mode!r}")
    return BlockedConfig(map=m, origin=origin, blocked=frozenset(blocked), mode=mode)


def map_from_sigma(sigma: Iterable[int]) -> PlanarMap:
    return build_map(None, list(sigma))
