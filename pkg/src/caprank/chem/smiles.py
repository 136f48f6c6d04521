"""SMILES subset reader and canonical writer.

Supported input: organic-subset atoms, bracket atoms with isotope / charge /
H-count, bonds - = # :, aromatic lowercase b c n o p s, branches, ring
closures 0-9 and %nn, dot-separated fragments.  Stereo markers (/ \\ @) are
parsed and discarded.  No valence model and no aromaticity perception:
lowercase input is trusted as written.
"""

from __future__ import annotations

import heapq

from .graph import Atom, Bond, BondOrder, MoleculeGraph


class SmilesError(ValueError):
    """Malformed SMILES text; `offset` is the byte offset of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class EmptyInput(SmilesError):
    pass


class UnknownElement(SmilesError):
    pass


class UnbalancedParenthesis(SmilesError):
    pass


class UnclosedRingBond(SmilesError):
    pass


# Bare (unbracketed) atoms; two-letter symbols must be matched first.
ORGANIC_SUBSET = ("Cl", "Br", "B", "C", "N", "O", "P", "S", "F", "I")
AROMATIC_SUBSET = ("b", "c", "n", "o", "p", "s")

KNOWN_ELEMENTS = frozenset(
    """H He Li Be B C N O F Ne Na Mg Al Si P S Cl Ar K Ca Sc Ti V Cr Mn Fe Co
    Ni Cu Zn Ga Ge As Se Br Kr Rb Sr Y Zr Nb Mo Tc Ru Rh Pd Ag Cd In Sn Sb Te
    I Xe Cs Ba La Ce Pr Nd Pm Sm Eu Gd Tb Dy Ho Er Tm Yb Lu Hf Ta W Re Os Ir
    Pt Au Hg Tl Pb Bi Po At Rn Fr Ra Ac Th Pa U Np Pu Am Cm Bk Cf Es Fm Md No
    Lr Rf Db Sg Bh Hs Mt Ds Rg Cn Nh Fl Mc Lv Ts Og""".split()
)

_BOND_CHARS = {
    "-": BondOrder.SINGLE,
    "=": BondOrder.DOUBLE,
    "#": BondOrder.TRIPLE,
    ":": BondOrder.AROMATIC,
    "/": BondOrder.SINGLE,
    "\\": BondOrder.SINGLE,
}

_BOND_TOKEN = {
    BondOrder.SINGLE: "-",
    BondOrder.DOUBLE: "=",
    BondOrder.TRIPLE: "#",
    BondOrder.AROMATIC: ":",
}

# Rank codes used by the canonical refinement; any fixed injection works.
_BOND_CODE = {
    BondOrder.SINGLE: 1,
    BondOrder.DOUBLE: 2,
    BondOrder.TRIPLE: 3,
    BondOrder.AROMATIC: 4,
}


def _byte_offset(text: str, index: int) -> int:
    return len(text[:index].encode("utf-8"))


class _Scanner:
    __slots__ = ("text", "pos")

    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self) -> str:
        ch = self.text[self.pos]
        self.pos += 1
        return ch

    def take_digits(self) -> str:
        start = self.pos
        while not self.eof() and self.text[self.pos].isdigit():
            self.pos += 1
        return self.text[start : self.pos]

    def offset(self) -> int:
        return _byte_offset(self.text, self.pos)


def _parse_bracket_atom(sc: _Scanner) -> Atom:
    """Parse the body of a bracket atom; `sc` sits just past the '['."""
    start = sc.offset()
    isotope: int | None = None
    digits = sc.take_digits()
    if digits:
        isotope = int(digits)
    if sc.eof():
        raise SmilesError("unterminated bracket atom", start)

    sym_off = sc.offset()
    ch = sc.peek()
    aromatic = False
    if ch.islower():
        if ch not in AROMATIC_SUBSET:
            raise UnknownElement(f"unknown aromatic symbol {ch!r}", sym_off)
        element = sc.take().upper()
        aromatic = True
    elif ch.isupper():
        sc.take()
        element = ch
        nxt = sc.peek()
        if nxt.islower() and (ch + nxt) in KNOWN_ELEMENTS:
            element += sc.take()
        if element not in KNOWN_ELEMENTS:
            raise UnknownElement(f"unknown element {element!r}", sym_off)
    else:
        raise SmilesError(f"expected element symbol, found {ch!r}", sym_off)

    while sc.peek() == "@":  # chirality: parsed and discarded
        sc.take()

    explicit_h = 0
    if sc.peek() == "H" and element != "H":
        sc.take()
        digits = sc.take_digits()
        explicit_h = int(digits) if digits else 1

    charge = 0
    if sc.peek() in ("+", "-"):
        sign = 1 if sc.take() == "+" else -1
        digits = sc.take_digits()
        if digits:
            charge = sign * int(digits)
        else:
            charge = sign
            while sc.peek() == ("+" if sign > 0 else "-"):
                sc.take()
                charge += sign

    if sc.peek() == ":":  # atom class: parsed and discarded
        sc.take()
        if not sc.take_digits():
            raise SmilesError("atom class expects digits after ':'", sc.offset())

    if sc.peek() != "]":
        raise SmilesError(f"expected ']', found {sc.peek()!r}", sc.offset())
    sc.take()
    return Atom(element, aromatic, charge, explicit_h, isotope)


def _parse_bare_atom(sc: _Scanner) -> Atom:
    off = sc.offset()
    rest = sc.text[sc.pos :]
    for sym in ORGANIC_SUBSET:
        if rest.startswith(sym):
            sc.pos += len(sym)
            return Atom(sym)
    ch = sc.peek()
    if ch in AROMATIC_SUBSET:
        sc.take()
        return Atom(ch.upper(), aromatic=True)
    raise UnknownElement(f"symbol {ch!r} not in the supported subset", off)


def parse_smiles(text: str) -> MoleculeGraph:
    """Parse `text` into a MoleculeGraph; errors carry byte offsets."""
    sc = _Scanner(text)
    while not sc.eof() and sc.peek().isspace():
        sc.take()
    if sc.eof():
        raise EmptyInput("empty SMILES string", 0)

    atoms: list[Atom] = []
    bonds: list[Bond] = []
    bond_keys: set[tuple[int, int]] = set()
    prev: int | None = None
    pending: BondOrder | None = None
    pending_off = 0
    # open branch stack holds (atom index restored on ')', byte offset of '(')
    branch_stack: list[tuple[int | None, int]] = []
    # ring number -> (atom index, explicit order or None, byte offset of digit)
    open_rings: dict[int, tuple[int, BondOrder | None, int]] = {}

    def add_bond(a: int, b: int, order: BondOrder | None, off: int) -> None:
        if order is None:
            both_aromatic = atoms[a].aromatic and atoms[b].aromatic
            order = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
        if a == b:
            raise SmilesError("ring bond closes on its own atom", off)
        key = (a, b) if a < b else (b, a)
        if key in bond_keys:
            raise SmilesError(f"duplicate bond between atoms {key}", off)
        bond_keys.add(key)
        bonds.append(Bond(a, b, order))

    def close_ring(number: int, off: int) -> None:
        nonlocal pending
        if prev is None:
            raise SmilesError("ring bond digit with no preceding atom", off)
        if number in open_rings:
            other, other_order, _ = open_rings.pop(number)
            if pending is not None and other_order is not None and pending is not other_order:
                raise SmilesError(f"conflicting bond orders for ring bond {number}", off)
            add_bond(other, prev, pending or other_order, off)
        else:
            open_rings[number] = (prev, pending, off)
        pending = None

    while not sc.eof():
        ch = sc.peek()
        off = sc.offset()
        if ch.isspace():  # only trailing whitespace is allowed
            while not sc.eof() and sc.peek().isspace():
                sc.take()
            if not sc.eof():
                raise SmilesError("whitespace inside SMILES string", off)
            break

        if ch in _BOND_CHARS:
            if pending is not None:
                raise SmilesError("two bond symbols in a row", off)
            if prev is None:
                raise SmilesError("bond symbol with no preceding atom", off)
            pending = _BOND_CHARS[sc.take()]
            pending_off = off
            continue

        if ch == "(":
            sc.take()
            if prev is None:
                raise SmilesError("branch with no preceding atom", off)
            if pending is not None:
                raise SmilesError("bond symbol before '('", off)
            branch_stack.append((prev, off))
            continue

        if ch == ")":
            sc.take()
            if not branch_stack:
                raise UnbalancedParenthesis("')' without matching '('", off)
            if pending is not None:
                raise SmilesError("dangling bond symbol before ')'", pending_off)
            prev, _ = branch_stack.pop()
            continue

        if ch == ".":
            sc.take()
            if pending is not None:
                raise SmilesError("bond symbol before '.'", pending_off)
            prev = None
            continue

        if ch.isdigit():
            sc.take()
            close_ring(int(ch), off)
            continue

        if ch == "%":
            sc.take()
            digits = sc.text[sc.pos : sc.pos + 2]
            if len(digits) != 2 or not digits.isdigit():
                raise SmilesError("'%' ring closure expects two digits", off)
            sc.pos += 2
            close_ring(int(digits), off)
            continue

        if ch == "[":
            sc.take()
            atom = _parse_bracket_atom(sc)
        elif ch.isalpha():
            atom = _parse_bare_atom(sc)
        else:
            raise SmilesError(f"unexpected character {ch!r}", off)

        atoms.append(atom)
        idx = len(atoms) - 1
        if prev is not None:
            add_bond(prev, idx, pending, off)
        elif pending is not None:
            raise SmilesError("bond symbol with no preceding atom", pending_off)
        pending = None
        prev = idx

    if pending is not None:
        raise SmilesError("dangling bond symbol at end of input", pending_off)
    if branch_stack:
        raise UnbalancedParenthesis("'(' never closed", branch_stack[0][1])
    if open_rings:
        first = min(off for _, _, off in open_rings.values())
        raise UnclosedRingBond("ring bond digit never closed", first)
    if not atoms:
        raise EmptyInput("no atoms in SMILES string", 0)
    return MoleculeGraph(tuple(atoms), tuple(bonds), text)


def _dense_ranks(keys: list) -> list[int]:
    order = {key: rank for rank, key in enumerate(sorted(set(keys)))}
    return [order[key] for key in keys]


def _refine(ranks: list[int], adj: list[list[tuple[int, BondOrder]]]) -> list[int]:
    while True:
        keys = [
            (ranks[i], tuple(sorted((_BOND_CODE[o], ranks[j]) for j, o in adj[i])))
            for i in range(len(ranks))
        ]
        new = _dense_ranks(keys)
        if new == ranks:
            return ranks
        ranks = new


def canonical_ranks(mol: MoleculeGraph) -> list[int]:
    """Permutation-invariant atom ranks; ties broken by lowest index."""
    n = len(mol.atoms)
    if n == 0:
        return []
    adj = mol.neighbors()
    base = [
        (
            a.element,
            a.aromatic,
            a.formal_charge,
            -1 if a.explicit_h is None else a.explicit_h,
            0 if a.isotope is None else a.isotope,
            len(adj[i]),
        )
        for i, a in enumerate(mol.atoms)
    ]
    ranks = _refine(_dense_ranks(base), adj)
    while len(set(ranks)) < n:
        classes: dict[int, list[int]] = {}
        for i, r in enumerate(ranks):
            classes.setdefault(r, []).append(i)
        tied_rank = min(r for r, members in classes.items() if len(members) > 1)
        chosen = min(classes[tied_rank])
        keys = [(ranks[i], 0 if i == chosen else 1) for i in range(n)]
        ranks = _refine(_dense_ranks(keys), adj)
    return ranks


def _atom_token(atom: Atom) -> str:
    plain = atom.formal_charge == 0 and atom.explicit_h is None and atom.isotope is None
    if plain and not atom.aromatic and atom.element in ORGANIC_SUBSET:
        return atom.element
    if plain and atom.aromatic and atom.element.lower() in AROMATIC_SUBSET:
        return atom.element.lower()
    if atom.aromatic and atom.element.lower() not in AROMATIC_SUBSET:
        raise ValueError(f"no aromatic SMILES form for element {atom.element!r}")
    sym = atom.element.lower() if atom.aromatic else atom.element
    parts = ["["]
    if atom.isotope is not None:
        parts.append(str(atom.isotope))
    parts.append(sym)
    h = atom.explicit_h or 0
    if h == 1:
        parts.append("H")
    elif h > 1:
        parts.append(f"H{h}")
    c = atom.formal_charge
    if c == 1:
        parts.append("+")
    elif c == -1:
        parts.append("-")
    elif c > 1:
        parts.append(f"+{c}")
    elif c < -1:
        parts.append(f"-{-c}")
    parts.append("]")
    return "".join(parts)


def _bond_token(a: Atom, b: Atom, order: BondOrder) -> str:
    both_aromatic = a.aromatic and b.aromatic
    default = BondOrder.AROMATIC if both_aromatic else BondOrder.SINGLE
    return "" if order is default else _BOND_TOKEN[order]


def _ring_digit(number: int) -> str:
    return str(number) if number < 10 else f"%{number:02d}"


def _emit_fragment(mol: MoleculeGraph, ranks: list[int], root: int) -> str:
    adj = mol.neighbors()

    def ordered(u: int) -> list[tuple[int, BondOrder]]:
        return sorted(adj[u], key=lambda vo: ranks[vo[0]])

    # first pass: classify edges into tree children and ring closures
    disc = {root: 0}
    tree: dict[int, list[tuple[int, BondOrder]]] = {root: []}
    opens: dict[int, list[tuple[int, BondOrder]]] = {}
    closes: dict[int, list[tuple[int, BondOrder]]] = {}
    seen_edges: set[tuple[int, int]] = set()
    frames: list[list] = [[root, ordered(root), 0]]
    while frames:
        frame = frames[-1]
        u, nbrs, i = frame
        if i == len(nbrs):
            frames.pop()
            continue
        frame[2] += 1
        v, order = nbrs[i]
        key = (u, v) if u < v else (v, u)
        if key in seen_edges:
            continue
        seen_edges.add(key)
        if v in disc:  # ancestor: ring closure opened at v, closed at u
            opens.setdefault(v, []).append((u, order))
            closes.setdefault(u, []).append((v, order))
        else:
            disc[v] = len(disc)
            tree[u].append((v, order))
            tree[v] = []
            frames.append([v, ordered(v), 0])

    free_numbers = list(range(1, 100))
    heapq.heapify(free_numbers)
    assigned: dict[tuple[int, int], int] = {}

    def atom_tokens(u: int) -> str:
        parts = [_atom_token(mol.atoms[u])]
        for v, _ in sorted(closes.get(u, ()), key=lambda vo: disc[vo[0]]):
            number = assigned.pop((v, u))
            heapq.heappush(free_numbers, number)
            parts.append(_ring_digit(number))
        for v, order in sorted(opens.get(u, ()), key=lambda vo: disc[vo[0]]):
            if not free_numbers:
                raise RuntimeError("more than 99 ring bonds open at once")
            number = heapq.heappop(free_numbers)
            assigned[(u, v)] = number
            parts.append(_bond_token(mol.atoms[u], mol.atoms[v], order))
            parts.append(_ring_digit(number))
        return "".join(parts)

    out = [atom_tokens(root)]
    stack: list[list] = [[root, tree[root], 0, False]]
    while stack:
        frame = stack[-1]
        u, kids, i, parenthesized = frame
        if i == len(kids):
            stack.pop()
            if parenthesized:
                out.append(")")
            continue
        frame[2] += 1
        v, order = kids[i]
        wrap = i < len(kids) - 1
        if wrap:
            out.append("(")
        out.append(_bond_token(mol.atoms[u], mol.atoms[v], order))
        out.append(atom_tokens(v))
        stack.append([v, tree[v], 0, wrap])
    return "".join(out)


def write_smiles(mol: MoleculeGraph) -> str:
    """Canonical writer: same graph (up to atom order) -> same string."""
    if len(mol.atoms) == 0:
        return ""
    ranks = canonical_ranks(mol)
    pieces = []
    for fragment in mol.fragments():
        root = min(fragment, key=lambda i: ranks[i])
        pieces.append((ranks[root], _emit_fragment(mol, ranks, root)))
    pieces.sort()
    return ".".join(text for _, text in pieces)
