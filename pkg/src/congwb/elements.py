"""Element types for the finite categories: transformations, partitions
(diagrams), matrices over a prime field, and projective classes of matrices.

Conventions used throughout:

* An object is a finite set [n] = {1,...,n} (or an n-dimensional space) and is
  identified with its size n, so object ids ARE sizes.  Internally all points
  are 0-based; canonical strings are 1-based with primes on codomain points.
* A partition from [m] to [n] is a set partition of m+n vertices where vertex
  i < m is the i-th domain point and vertex m+j is the j-th codomain point.
* Composition is left to right: compose(x, y) applies x first.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .errors import ValidationError

VALID_PRIMES = (2, 3, 5, 7)

FAMILY_TAGS = (
    "T", "OP-T", "OPR-T", "OriP-T", "OriPR-T",
    "P", "PB", "Motzkin", "OP-P", "OPR-P", "OriP-P", "OriPR-P",
    "B", "TL", "TLpm", "J", "Jpm",
    "L", "PL",
)

TRANSFORMATION_TAGS = {"T", "OP-T", "OPR-T", "OriP-T", "OriPR-T"}
MATRIX_TAGS = {"L", "PL"}
PARITY_TAGS = {"B", "TL", "TLpm", "J", "Jpm"}
# diagram families whose elements are perfect matchings
MATCHING_TAGS = {"B", "TL", "TLpm", "J", "Jpm"}


# ---------------------------------------------------------------------------
# element types


@dataclass(frozen=True)
class Transformation:
    """A total map [len(images)] -> [cod_size]; images are 0-based."""

    cod_size: int
    images: tuple[int, ...]

    @property
    def dom(self) -> int:
        return len(self.images)

    @property
    def cod(self) -> int:
        return self.cod_size


@dataclass(frozen=True)
class Partition:
    """A set partition of the m+n vertices (m domain points, then n codomain
    points).  blocks is canonical: each block sorted, blocks sorted by min."""

    dom_size: int
    cod_size: int
    blocks: tuple[tuple[int, ...], ...]

    @property
    def dom(self) -> int:
        return self.dom_size

    @property
    def cod(self) -> int:
        return self.cod_size

    @staticmethod
    def make(m: int, n: int, blocks) -> "Partition":
        canon = tuple(sorted((tuple(sorted(b)) for b in blocks if b)))
        seen = [v for b in canon for v in b]
        if sorted(seen) != list(range(m + n)):
            raise ValidationError(
                f"blocks do not partition the {m}+{n} vertices: {blocks!r}")
        return Partition(m, n, canon)


@dataclass(frozen=True)
class Matrix:
    """A matrix over Z_p, row-major entries; acts on row vectors, so an
    m x n matrix is a map from an m-dimensional to an n-dimensional space."""

    p: int
    entries: tuple[tuple[int, ...], ...]

    @property
    def dom(self) -> int:
        return len(self.entries)

    @property
    def cod(self) -> int:
        return len(self.entries[0])


@dataclass(frozen=True)
class ProjectivePoint:
    """A matrix up to nonzero scalars; entries hold the canonical
    representative (first nonzero entry in row-major order scaled to 1,
    the zero matrix is its own class)."""

    p: int
    entries: tuple[tuple[int, ...], ...]

    @property
    def dom(self) -> int:
        return len(self.entries)

    @property
    def cod(self) -> int:
        return len(self.entries[0])

    @staticmethod
    def make(p: int, entries) -> "ProjectivePoint":
        return ProjectivePoint(p, pl_canonicalize(p, entries))


Element = Transformation | Partition | Matrix | ProjectivePoint


def bd(x: Element) -> int:
    return x.dom


def br(x: Element) -> int:
    return x.cod


# ---------------------------------------------------------------------------
# composition


def _compose_transformations(x: Transformation, y: Transformation) -> Transformation:
    return Transformation(y.cod_size, tuple(y.images[v] for v in x.images))


class _UF:
    """Plain union-find over range(n)."""

    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, v: int) -> int:
        p = self.parent
        while p[v] != v:
            p[v] = p[p[v]]
            v = p[v]
        return v

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if rb < ra:
            ra, rb = rb, ra
        self.parent[rb] = ra
        return True


def _compose_partitions(x: Partition, y: Partition) -> Partition:
    m, k, n = x.dom_size, x.cod_size, y.cod_size
    # product graph on m + k + n vertices; x's codomain glued to y's domain
    uf = _UF(m + k + n)
    for b in x.blocks:
        for u, v in zip(b, b[1:]):
            uf.union(u, v)
    for b in y.blocks:
        for u, v in zip(b, b[1:]):
            uf.union(u + m, v + m)
    groups: dict[int, list[int]] = {}
    for v in range(m):
        groups.setdefault(uf.find(v), []).append(v)
    for j in range(n):
        groups.setdefault(uf.find(m + k + j), []).append(m + j)
    return Partition.make(m, n, groups.values())


def _mat_mul(x: Matrix, y: Matrix) -> Matrix:
    p = x.p
    yt = list(zip(*y.entries))
    rows = tuple(
        tuple(sum(a * b for a, b in zip(row, col)) % p for col in yt)
        for row in x.entries)
    return Matrix(p, rows)


def compose(x: Element, y: Element):
    """Left-to-right composition; raises if the codomain/domain mismatch."""
    if x.cod != y.dom:
        raise ValidationError(f"not composable: cod {x.cod} != dom {y.dom}")
    if isinstance(x, Transformation):
        return _compose_transformations(x, y)
    if isinstance(x, Partition):
        return _compose_partitions(x, y)
    if isinstance(x, Matrix):
        return _mat_mul(x, y)
    if isinstance(x, ProjectivePoint):
        prod = _mat_mul(Matrix(x.p, x.entries), Matrix(y.p, y.entries))
        return ProjectivePoint.make(x.p, prod.entries)
    raise TypeError(type(x).__name__)


def star(x: Partition) -> Partition:
    """Reflect a partition top to bottom (the diagram involution)."""
    m, n = x.dom_size, x.cod_size

    def flip(v: int) -> int:
        return v - m if v >= m else n + v

    return Partition.make(n, m, [[flip(v) for v in b] for b in x.blocks])


def oplus(x: Partition, y: Partition) -> Partition:
    """Place y to the right of x (horizontal sum of diagrams)."""
    m1, n1, m2, n2 = x.dom_size, x.cod_size, y.dom_size, y.cod_size

    def shift_x(v: int) -> int:
        return v if v < m1 else v + m2

    def shift_y(v: int) -> int:
        return v + m1 if v < m2 else v + m1 + n1

    blocks = [[shift_x(v) for v in b] for b in x.blocks]
    blocks += [[shift_y(v) for v in b] for b in y.blocks]
    return Partition.make(m1 + m2, n1 + n2, blocks)


# ---------------------------------------------------------------------------
# partition structure: rank, kernel, domain


def transversals(x: Partition) -> list[tuple[int, ...]]:
    m = x.dom_size
    return [b for b in x.blocks if b[0] < m and b[-1] >= m]


def rank(x: Element) -> int:
    """Number of transversal blocks / image size / matrix rank."""
    if isinstance(x, Partition):
        return len(transversals(x))
    if isinstance(x, Transformation):
        return len(set(x.images))
    if isinstance(x, Matrix):
        return matrix_rank(x.p, x.entries)
    if isinstance(x, ProjectivePoint):
        return matrix_rank(x.p, x.entries)
    raise TypeError(type(x).__name__)


def ker(x: Partition) -> tuple[tuple[int, ...], ...]:
    """Restriction of the block partition to the domain points."""
    m = x.dom_size
    parts = [tuple(v for v in b if v < m) for b in x.blocks]
    return tuple(sorted(p for p in parts if p))


def coker(x: Partition) -> tuple[tuple[int, ...], ...]:
    m = x.dom_size
    parts = [tuple(v - m for v in b if v >= m) for b in x.blocks]
    return tuple(sorted(p for p in parts if p))


def dom_points(x: Partition) -> tuple[int, ...]:
    return tuple(sorted(v for b in transversals(x) for v in b if v < x.dom_size))


def codom_points(x: Partition) -> tuple[int, ...]:
    m = x.dom_size
    return tuple(sorted(v - m for b in transversals(x) for v in b if v >= m))


# ---------------------------------------------------------------------------
# planarity and annularity


def is_planar(x: Partition) -> bool:
    """Non-crossing test in the boundary order: domain points left to right,
    then codomain points right to left (one walk around the rectangle)."""
    m, n = x.dom_size, x.cod_size
    block_of = {}
    count = {}
    for i, b in enumerate(x.blocks):
        count[i] = len(b)
        for v in b:
            block_of[v] = i
    walk = list(range(m)) + [m + n - 1 - j for j in range(n)]
    stack: list[int] = []
    open_done: set[int] = set()
    for v in walk:
        b = block_of[v]
        if stack and stack[-1] == b:
            count[b] -= 1
        elif b in open_done:
            return False
        else:
            open_done.add(b)
            stack.append(b)
            count[b] -= 1
        while stack and count[stack[-1]] == 0:
            stack.pop()
    return True


def gamma_images(k: int) -> tuple[int, ...]:
    """The order-reversing permutation of [k]."""
    return tuple(k - 1 - i for i in range(k))


def delta_images(k: int, power: int = 1) -> tuple[int, ...]:
    """The rotation i -> i+power of [k] (cyclically)."""
    return tuple((i + power) % k for i in range(k))


def _perm_partition(images: tuple[int, ...]) -> Partition:
    k = len(images)
    return Partition.make(k, k, [[i, k + images[i]] for i in range(k)])


def gamma(k: int) -> Partition:
    """Order-reversing permutation of [k] as a diagram."""
    return _perm_partition(gamma_images(k))


def delta(k: int, power: int = 1) -> Partition:
    """Rotation of [k] by power steps as a diagram."""
    return _perm_partition(delta_images(k, power))


def is_annular(x: Partition) -> bool:
    """True when some rotation of the two boundaries makes x planar."""
    m, n = x.dom_size, x.cod_size
    for i in range(m):
        rot = compose(delta(m, -i), x) if i else x
        for j in range(n):
            cand = compose(rot, delta(n, -j)) if j else rot
            if is_planar(cand):
                return True
    return False


def is_anti_planar(x: Partition) -> bool:
    left = is_planar(compose(gamma(x.dom_size), x))
    right = is_planar(compose(x, gamma(x.cod_size)))
    assert left == right, "reflection on either side must agree"
    return left


def is_anti_annular(x: Partition) -> bool:
    left = is_annular(compose(gamma(x.dom_size), x))
    right = is_annular(compose(x, gamma(x.cod_size)))
    assert left == right, "reflection on either side must agree"
    return left


# ---------------------------------------------------------------------------
# transformation order predicates


def is_order_preserving(x: Transformation) -> bool:
    s = x.images
    return all(s[i] <= s[i + 1] for i in range(len(s) - 1))


def is_order_reversing(x: Transformation) -> bool:
    s = x.images
    return all(s[i] >= s[i + 1] for i in range(len(s) - 1))


def is_orientation_preserving(x: Transformation) -> bool:
    """At most one cyclic descent, so some rotation reads non-decreasing."""
    s = x.images
    k = len(s)
    descents = sum(1 for i in range(k) if s[i] > s[(i + 1) % k])
    return descents <= 1


def is_orientation_reversing(x: Transformation) -> bool:
    s = x.images
    k = len(s)
    ascents = sum(1 for i in range(k) if s[i] < s[(i + 1) % k])
    return ascents <= 1


# ---------------------------------------------------------------------------
# matrix helpers


def matrix_rank(p: int, entries) -> int:
    """Gaussian elimination over Z_p."""
    rows = [list(r) for r in entries]
    n_rows, n_cols = len(rows), len(rows[0])
    r = 0
    for c in range(n_cols):
        pivot = next((i for i in range(r, n_rows) if rows[i][c] % p), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = pow(rows[r][c], p - 2, p)
        rows[r] = [(v * inv) % p for v in rows[r]]
        for i in range(n_rows):
            if i != r and rows[i][c] % p:
                f = rows[i][c]
                rows[i] = [(a - f * b) % p for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == n_rows:
            break
    return r


def pl_canonicalize(p: int, entries) -> tuple[tuple[int, ...], ...]:
    """Scale so the first nonzero entry (row-major) is 1; zero stays zero."""
    flat = [v % p for row in entries for v in row]
    lead = next((v for v in flat if v), None)
    if lead is not None and lead != 1:
        inv = pow(lead, p - 2, p)
        flat = [(v * inv) % p for v in flat]
    n_cols = len(entries[0])
    it = iter(flat)
    return tuple(tuple(itertools.islice(it, n_cols)) for _ in entries)


# ---------------------------------------------------------------------------
# family retractions on single elements (used as a cross-check against the
# searched retraction)


def retract_hat(x: Partition, mode: str) -> Partition:
    """mode="cut": sever every transversal into its two halves (partition
    style, for rank <= 1 ideals).  mode="merge": a rank-2 matching loses its
    two transversals to one domain pair and one codomain pair."""
    m = x.dom_size
    if mode == "cut":
        blocks = []
        for b in x.blocks:
            top = [v for v in b if v < m]
            bot = [v for v in b if v >= m]
            if top and bot:
                blocks += [top, bot]
            else:
                blocks.append(list(b))
        return Partition.make(m, x.cod_size, blocks)
    if mode == "merge":
        tr = transversals(x)
        if not tr:
            return x
        if len(tr) != 2:
            raise ValidationError("merge retraction needs rank 0 or 2")
        tops = [v for b in tr for v in b if v < m]
        bots = [v for b in tr for v in b if v >= m]
        blocks = [list(b) for b in x.blocks if b not in tr] + [tops, bots]
        return Partition.make(m, x.cod_size, blocks)
    raise ValidationError(f"unknown retraction mode {mode!r}")


def hat_mode(tag: str) -> str:
    return "merge" if tag in MATCHING_TAGS else "cut"


# ---------------------------------------------------------------------------
# family specification and hom-set generation


@dataclass(frozen=True)
class FamilySpec:
    """Which category to build: a family tag, the object sizes, and (for the
    matrix families) the field prime."""

    tag: str
    objects: tuple[int, ...]
    field_p: int | None = None

    def __post_init__(self):
        if self.tag not in FAMILY_TAGS:
            raise ValidationError(
                f"unknown family {self.tag!r}; valid tags: {', '.join(FAMILY_TAGS)}")
        objs = tuple(self.objects)
        if not objs or any((not isinstance(v, int)) or v < 1 for v in objs):
            raise ValidationError(f"objects must be positive sizes, got {objs!r}")
        if len(set(objs)) != len(objs):
            raise ValidationError(f"objects must be distinct sizes, got {objs!r}")
        object.__setattr__(self, "objects", tuple(sorted(objs)))
        if self.tag in PARITY_TAGS:
            evens = [v for v in self.objects if v % 2 == 0]
            odds = [v for v in self.objects if v % 2 == 1]
            if evens and odds:
                raise ValidationError(
                    f"family {self.tag} needs objects of one parity; got even part "
                    f"{evens} and odd part {odds}. Build each part separately; the "
                    f"congruence lattice of the whole is the direct product of the parts.")
        if self.tag in MATRIX_TAGS:
            if self.field_p not in VALID_PRIMES:
                raise ValidationError(
                    f"family {self.tag} needs field_p in {VALID_PRIMES}, got {self.field_p!r}")
        elif self.field_p is not None:
            raise ValidationError(f"family {self.tag} takes no field_p")

    def key(self) -> str:
        p = f",p={self.field_p}" if self.field_p else ""
        return f"{self.tag}[{','.join(map(str, self.objects))}{p}]"


def _set_partitions(n: int):
    """All set partitions of range(n) via restricted growth strings."""
    if n == 0:
        yield ()
        return
    rgs = [0] * n
    max_seen = [0] * n
    while True:
        blocks: dict[int, list[int]] = {}
        for v, c in enumerate(rgs):
            blocks.setdefault(c, []).append(v)
        yield tuple(tuple(b) for b in blocks.values())
        i = n - 1
        while i > 0 and rgs[i] == max_seen[i - 1] + 1:
            i -= 1
        if i == 0:
            return
        rgs[i] += 1
        for j in range(i + 1, n):
            rgs[j] = 0
        for j in range(i, n):
            max_seen[j] = max(max_seen[j - 1], rgs[j])


def _matchings(points: list[int], allow_singletons: bool):
    """Partitions of points into pairs (and singletons when allowed)."""
    if not points:
        yield []
        return
    first, rest = points[0], points[1:]
    if allow_singletons:
        for tail in _matchings(rest, True):
            yield [[first]] + tail
    for i, other in enumerate(rest):
        remaining = rest[:i] + rest[i + 1:]
        for tail in _matchings(remaining, allow_singletons):
            yield [[first, other]] + tail


_PARTITION_FILTERS = {
    "P": None,
    "OP-P": is_planar,
    "OPR-P": lambda x: is_planar(x) or is_anti_planar(x),
    "OriP-P": is_annular,
    "OriPR-P": lambda x: is_annular(x) or is_anti_annular(x),
    "PB": None,
    "Motzkin": is_planar,
    "B": None,
    "TL": is_planar,
    "TLpm": lambda x: is_planar(x) or is_anti_planar(x),
    "J": is_annular,
    "Jpm": lambda x: is_annular(x) or is_anti_annular(x),
}

_TRANSFORMATION_FILTERS = {
    "T": None,
    "OP-T": is_order_preserving,
    "OPR-T": lambda x: is_order_preserving(x) or is_order_reversing(x),
    "OriP-T": is_orientation_preserving,
    "OriPR-T": lambda x: is_orientation_preserving(x) or is_orientation_reversing(x),
}


def generate_homset(spec: FamilySpec, a: int, b: int) -> list:
    """All elements from object a to object b, in a fixed canonical order."""
    if a not in spec.objects or b not in spec.objects:
        raise ValidationError(f"objects ({a},{b}) not in {spec.objects}")
    tag = spec.tag
    if tag in TRANSFORMATION_TAGS:
        pred = _TRANSFORMATION_FILTERS[tag]
        out = [Transformation(b, images)
               for images in itertools.product(range(b), repeat=a)]
        return [x for x in out if pred is None or pred(x)]
    if tag == "L":
        p = spec.field_p
        return [Matrix(p, tuple(tuple(row) for row in rows))
                for rows in itertools.product(
                    itertools.product(range(p), repeat=b), repeat=a)]
    if tag == "PL":
        p = spec.field_p
        seen = []
        seen_set = set()
        for rows in itertools.product(
                itertools.product(range(p), repeat=b), repeat=a):
            x = ProjectivePoint.make(p, rows)
            if x.entries not in seen_set:
                seen_set.add(x.entries)
                seen.append(x)
        return seen
    # diagram families
    pred = _PARTITION_FILTERS[tag]
    pts = list(range(a + b))
    if tag in MATCHING_TAGS:
        raw = _matchings(pts, allow_singletons=False)
    elif tag in ("PB", "Motzkin"):
        raw = _matchings(pts, allow_singletons=True)
    else:
        raw = _set_partitions(a + b)
    out = [Partition.make(a, b, blocks) for blocks in raw]
    return [x for x in out if pred is None or pred(x)]


# ---------------------------------------------------------------------------
# canonical strings (1-based, primes on codomain points)


def canonical_str(x: Element) -> str:
    if isinstance(x, Transformation):
        return "[" + " ".join(str(v + 1) for v in x.images) + "]"
    if isinstance(x, Partition):
        m = x.dom_size

        def pt(v: int) -> str:
            return str(v + 1) if v < m else f"{v - m + 1}'"

        return "{" + "|".join(",".join(pt(v) for v in b) for b in x.blocks) + "}"
    if isinstance(x, Matrix):
        return "[" + ";".join(" ".join(map(str, r)) for r in x.entries) + "]"
    if isinstance(x, ProjectivePoint):
        return "P[" + ";".join(" ".join(map(str, r)) for r in x.entries) + "]"
    raise TypeError(type(x).__name__)


def parse_objects(text: str) -> tuple[int, ...]:
    """Parse a CLI object list like "2,4" into sizes."""
    try:
        return tuple(int(s) for s in text.split(","))
    except ValueError:
        raise ValidationError(f"bad object list {text!r}") from None
