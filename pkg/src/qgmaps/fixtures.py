"""Hand-built decorated quadrangulations used as golden test data.

Faces are listed as vertex cycles with loop crossings given as vertex pairs;
``orient`` flips cycles so that every edge is traversed once in each
direction, which makes the lists independent of how they were typed.
"""
from __future__ import annotations

from collections import deque
from importlib import resources

from .gasket import EMPTY, DecoratedQuadrangulation, QuadAnnotation, _frozen
from .maps import PlanarMap, build_from_face_lists, load

GOLDEN_FILE = "golden_gasket.pmap.json"


def orient(faces: list[list]) -> list[list]:
    """Reverse cycles as needed for a coherent orientation (face 0 is kept)."""
    def edges(c):
        return [(c[i], c[(i + 1) % len(c)]) for i in range(len(c))]

    by_edge: dict = {}
    for i, c in enumerate(faces):
        for u, v in edges(c):
            by_edge.setdefault(frozenset((u, v)), []).append(i)
    out: list = [None] * len(faces)
    out[0] = list(faces[0])
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for u, v in edges(out[i]):
            for j in by_edge[frozenset((u, v))]:
                if j == i or out[j] is not None:
                    continue
                c = list(faces[j])
                out[j] = c if (v, u) in edges(c) else c[::-1]
                queue.append(j)
    if any(c is None for c in out):
        raise ValueError("face lists are not connected")
    return out


def decorate(faces: list[list], crossings: dict, root: tuple) -> DecoratedQuadrangulation:
    """Build a decorated map; ``faces[0]`` is the boundary and ``crossings``
    maps the index of a quad to the two vertex pairs its loop strand crosses."""
    faces = orient(faces)
    m, index = build_from_face_lists(faces, root=root, return_index=True)
    by_face: dict = {}
    for i, cyc in enumerate(faces[1:], start=1):
        f = int(m.face_of[index[(cyc[0], cyc[1])]])
        darts = m.face_half_edges(f)
        ann = EMPTY
        if i in crossings:
            pos = []
            for pair in crossings[i]:
                u, v = pair
                h = index[(u, v)] if (u, v) in index and int(m.face_of[index[(u, v)]]) == f else index[(v, u)]
                pos.append(darts.index(h))
            ann = QuadAnnotation.from_crossed(*pos)
        by_face[f] = ann.to_json()
    boundary = int(m.face_of[m.root])
    ann = tuple(_frozen(by_face[f]) for f in range(m.n_faces) if f != boundary)
    return DecoratedQuadrangulation.from_map(PlanarMap(m.sigma, m.root, None, ann))


def golden_lists():
    """Octagon boundary, 28 quads, three loops (two outermost, one nested)."""
    b = [f"b{i}" for i in range(8)]
    x = [f"x{i}" for i in range(5)]
    y = [f"y{i}" for i in range(3)]
    w = [f"w{i}" for i in range(6)]
    v = [f"v{i}" for i in range(10)]
    faces = [list(reversed(b))]
    crossings: dict = {}

    def quad(cyc, cross=None):
        faces.append(cyc)
        if cross:
            crossings[len(faces) - 1] = cross

    # gasket quads outside both outermost loops
    quad([b[0], b[7], y[0], x[0]])
    quad([b[7], b[6], y[1], y[0]])
    quad([b[6], b[5], y[2], y[1]])
    quad([b[5], b[4], x[4], y[2]])
    quad([x[0], y[0], x[2], x[1]])
    # decagon b0 b1 b2 b3 b4 x4 x3 x2 x1 x0: five cis quads around a centre
    spokes = [b[0], b[2], b[4], x[3], x[1]]
    deca = [b[0], b[1], b[2], b[3], b[4], x[4], x[3], x[2], x[1], x[0]]
    for i in range(5):
        a, mid, c = deca[2 * i], deca[2 * i + 1], deca[(2 * i + 2) % 10]
        assert a == spokes[i]
        quad(["z", a, mid, c], [("z", a), ("z", c)])
    # hexagon y0 y1 y2 x4 x3 x2: ring of six trans quads to w0..w5
    hexa = [y[0], y[1], y[2], x[4], x[3], x[2]]
    for i in range(6):
        j = (i + 1) % 6
        quad([hexa[i], hexa[j], w[j], w[i]], [(hexa[i], w[i]), (hexa[j], w[j])])
    # nested loop inside w: trans, outer cis, inner cis, inner cis, twice
    quad([w[0], w[1], v[1], v[0]], [(w[0], v[0]), (w[1], v[1])])
    quad([w[1], w[2], w[3], v[1]], [(w[1], v[1]), (w[3], v[1])])
    quad([w[3], v[3], v[2], v[1]], [(w[3], v[1]), (w[3], v[3])])
    quad([w[3], v[5], v[4], v[3]], [(w[3], v[3]), (w[3], v[5])])
    quad([w[3], w[4], v[6], v[5]], [(w[3], v[5]), (w[4], v[6])])
    quad([w[4], w[5], w[0], v[6]], [(w[4], v[6]), (w[0], v[6])])
    quad([w[0], v[8], v[7], v[6]], [(w[0], v[6]), (w[0], v[8])])
    quad([w[0], v[0], v[9], v[8]], [(w[0], v[8]), (w[0], v[0])])
    # empty fan inside the innermost decagon
    for i in range(4):
        quad([v[0], v[2 * i + 1], v[2 * i + 2], v[(2 * i + 3) % 10]])
    return faces, crossings, (b[1], b[0])


def build_golden() -> DecoratedQuadrangulation:
    faces, crossings, root = golden_lists()
    return decorate(faces, crossings, root)


def load_golden() -> DecoratedQuadrangulation:
    path = resources.files("qgmaps") / "data" / GOLDEN_FILE
    with resources.as_file(path) as p:
        return DecoratedQuadrangulation.from_map(load(p))


def single_loop_lists():
    """Four cis quads around one vertex inside four empty quads (octagon boundary)."""
    a = [f"a{i}" for i in range(8)]
    c = [f"c{i}" for i in range(4)]
    faces = [[a[0], c[0], a[2], c[1], a[4], c[2], a[6], c[3]]]
    crossings: dict = {}
    for i in range(4):
        faces.append([a[2 * i], a[2 * i + 1], a[(2 * i + 2) % 8], c[i]])
    for i in range(4):
        faces.append(["z", a[2 * i], a[2 * i + 1], a[(2 * i + 2) % 8]])
        crossings[len(faces) - 1] = [("z", a[2 * i]), ("z", a[(2 * i + 2) % 8])]
    return faces, crossings, (a[0], c[0])


def build_single_loop() -> DecoratedQuadrangulation:
    faces, crossings, root = single_loop_lists()
    return decorate(faces, crossings, root)
