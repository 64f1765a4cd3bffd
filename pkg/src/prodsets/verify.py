"""Independent replay of certificates and report identities.

Nothing here imports the search or tree code: words, point actions,
cylinder lists and measures are re-implemented from their definitions so
that a bug in the searchers cannot vouch for itself.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

_TOK = re.compile(r"a(\d+)('*)")


class ReplayError(Exception):
    pass


# ---------------------------------------------------------------------------
# free words
# ---------------------------------------------------------------------------


def reduce_word(seq: Sequence[int]) -> tuple:
    st: List[int] = []
    for x in seq:
        if st and st[-1] == -x:
            st.pop()
        else:
            st.append(x)
    return tuple(st)


def parse_word(text: str) -> tuple:
    s = text.replace(" ", "")
    if s in ("", "e"):
        return ()
    out, pos = [], 0
    while pos < len(s):
        m = _TOK.match(s, pos)
        if not m:
            raise ReplayError(f"unreadable word {text!r}")
        i = int(m.group(1))
        out.append(-i if len(m.group(2)) % 2 else i)
        pos = m.end()
    return reduce_word(out)


def inv(w: tuple) -> tuple:
    return tuple(-x for x in reversed(w))


def words_upto(r: int, k: int) -> List[tuple]:
    out = [()]
    layer = [()]
    for _ in range(k):
        nxt = []
        for w in layer:
            for i in range(1, r + 1):
                for x in (i, -i):
                    if not w or w[-1] != -x:
                        nxt.append(w + (x,))
        out.extend(nxt)
        layer = nxt
    return out


def ray_prefix(g: tuple, u: tuple, v: tuple, n: int) -> tuple:
    """First n letters of the reduced ray g u v v v ..."""
    need = len(g) + n
    body = list(u)
    while len(body) < need:
        body.extend(v)
    return reduce_word(list(g) + body)[:n]


# ---------------------------------------------------------------------------
# cylinder lists
# ---------------------------------------------------------------------------


def nu_word(r: int, w: tuple) -> Fraction:
    if not w:
        return Fraction(1)
    return Fraction(1, 2 * r * (2 * r - 1) ** (len(w) - 1))


def nu_list(r: int, ws) -> Fraction:
    return sum((nu_word(r, w) for w in ws), Fraction(0))


def translate_cyl(r: int, g: tuple, w: tuple) -> List[tuple]:
    """``g [w]`` as a list of disjoint cylinders."""
    j = 0
    while j < len(g) and j < len(w) and g[len(g) - 1 - j] == -w[j]:
        j += 1
    if j < len(w):
        return [g[: len(g) - j] + w[j:]]
    if not w:
        return [()]
    rest = g[: len(g) - len(w)]
    out = []
    for i in range(1, r + 1):
        for t in (i, -i):
            if t != -w[-1]:
                out.extend(translate_cyl(r, rest, (t,)))
    return out


def translate_list(r: int, g: tuple, ws) -> List[tuple]:
    out = []
    for w in ws:
        out.extend(translate_cyl(r, g, w))
    return out


def _index(ws):
    exact = set(ws)
    below: Dict[tuple, List[tuple]] = {}
    for w in ws:
        for k in range(len(w) + 1):
            below.setdefault(w[:k], []).append(w)
    return exact, below


def meet_measure(r: int, P, Q) -> Fraction:
    """``nu(P cap Q)`` for lists of pairwise disjoint cylinders."""
    exact, below = _index(Q)
    tot = Fraction(0)
    for w in P:
        if any(w[:k] in exact for k in range(len(w))):
            tot += nu_word(r, w)
        else:
            tot += nu_list(r, below.get(w, ()))
    return tot


def lists_disjoint(P, Q) -> bool:
    exact, below = _index(Q)
    for w in P:
        if w in below or any(w[:k] in exact for k in range(len(w))):
            return False
    return True


def list_subset(r: int, P, Q, index=None) -> bool:
    """Is the union of P inside the union of Q (Q pairwise disjoint)?"""
    exact, below = index or _index(Q)
    q = 2 * r - 1
    for w in P:
        if any(w[:k] in exact for k in range(len(w) + 1)):
            continue
        sub = below.get(w)
        if not sub:
            return False
        # integer weights relative to [w]: a cylinder j letters deeper has q**-j
        D = max(len(v) for v in sub) - len(w)
        if sum(q ** (D - (len(v) - len(w))) for v in sub) != q**D:
            return False
    return True


def in_list(ws, ray: tuple) -> bool:
    return any(ray[: len(w)] == w for w in ws)


# ---------------------------------------------------------------------------
# models and raw membership
# ---------------------------------------------------------------------------


class Space:
    def __init__(self, tag: str):
        kind, n = tag.split(":")
        self.kind, self.n = kind, int(n)
        if kind not in ("free", "lattice"):
            raise ReplayError(f"unknown model {tag!r}")

    def parse(self, s: str):
        if self.kind == "free":
            return parse_word(s)
        s = s.strip()
        if s.startswith("("):
            s = s[1:-1]
        v = tuple(int(c) for c in s.split(","))
        if len(v) != self.n:
            raise ReplayError(f"{s!r} is not in Z^{self.n}")
        return v

    def mul(self, a, b):
        if self.kind == "free":
            return reduce_word(a + b)
        return tuple(x + y for x, y in zip(a, b))

    def inv(self, a):
        if self.kind == "free":
            return inv(a)
        return tuple(-x for x in a)

    def norm(self, a) -> int:
        if self.kind == "free":
            return len(a)
        return sum(abs(x) for x in a)

    def ball(self, k: int):
        if self.kind == "free":
            return words_upto(self.n, k)
        pts = [()]
        for _ in range(self.n):
            pts = [p + (c,) for p in pts for c in range(-k, k + 1)]
        return [p for p in pts if sum(abs(c) for c in p) <= k]


def has_product(raw) -> bool:
    t = raw["type"]
    if t == "prod":
        return True
    if t in ("and", "or"):
        return any(has_product(s) for s in raw["sets"])
    if t in ("not", "inv"):
        return has_product(raw["set"])
    return False


_PARSED: Dict[int, tuple] = {}


def _cyls(raw_list) -> List[tuple]:
    # keyed by identity; the list itself is kept so the id stays valid
    hit = _PARSED.get(id(raw_list))
    if hit is not None and hit[0] is raw_list:
        return hit[1]
    ws = [parse_word(w) for w in raw_list]
    _PARSED[id(raw_list)] = (raw_list, ws, set(ws), max((len(w) for w in ws), default=0))
    return ws


def _cylset(raw_list):
    _cyls(raw_list)
    _, _, ws, d = _PARSED[id(raw_list)]
    return ws, d


def raw_member(sp: Space, raw, g) -> bool:
    """Membership straight from the definition (product-free sets only)."""
    t = raw["type"]
    if t == "all":
        return True
    if t == "explicit":
        return any(sp.parse(x) == g for x in raw["elements"])
    if t == "prefix":
        w = parse_word(raw["word"])
        return g[: len(w)] == w
    if t == "slice":
        ws, d = _cylset(raw["cylinders"])
        ray = ray_prefix(g, parse_word(raw["u"]), parse_word(raw["v"]), d)
        return any(ray[:k] in ws for k in range(d + 1))
    if t == "sign":
        w = raw["weights"]
        if sp.kind == "free":
            val = sum(w[x - 1] if x > 0 else -w[-x - 1] for x in g)
        else:
            val = sum(a * b for a, b in zip(g, w))
        k, op = raw["k"], raw["op"]
        return {">": val > k, "<": val < k, ">=": val >= k, "<=": val <= k, "=": val == k, "!=": val != k}[op]
    if t == "cong":
        return all(c % raw["m"] == raw["offset"] for c in g)
    if t == "and":
        return all(raw_member(sp, s, g) for s in raw["sets"])
    if t == "or":
        return any(raw_member(sp, s, g) for s in raw["sets"])
    if t == "not":
        return not raw_member(sp, raw["set"], g)
    if t == "inv":
        return raw_member(sp, raw["set"], sp.inv(g))
    if t == "nu-ge":
        r = raw["r"]
        B = _cyls(raw["B"])
        return nu_list(r, translate_list(r, g, B)) >= nu_list(r, B)
    if t == "meets":
        r = raw["r"]
        gB = translate_list(r, g, _cyls(raw["B"]))
        return meet_measure(r, _cyls(raw["C"]), gB) > 0
    if t == "prod":
        raise ReplayError("product membership needs a witness")
    raise ReplayError(f"unknown set type {t!r}")


def member(sp: Space, raw, g, wit) -> bool:
    """Membership using a witness wherever a product is involved."""
    if not has_product(raw):
        return raw_member(sp, raw, g)
    if wit is None:
        return False
    t = raw["type"]
    if t == "prod":
        a, b = sp.parse(wit["a"]), sp.parse(wit["b"])
        Rf = raw["factor_radius"]
        if sp.mul(a, b) != g or sp.norm(a) > Rf or sp.norm(b) > Rf:
            return False
        A, B = raw["sets"]
        return member(sp, A, a, wit.get("wa")) and member(sp, B, b, wit.get("wb"))
    if t == "inv":
        return member(sp, raw["set"], sp.inv(g), wit)
    if t == "and":
        return all(member(sp, s, g, w) for s, w in zip(raw["sets"], wit))
    if t == "or":
        return member(sp, raw["sets"][wit["side"]], g, wit["w"])
    if t == "not":
        raise ReplayError("complement of a product is not replayable")
    raise ReplayError(f"unknown set type {t!r}")


# ---------------------------------------------------------------------------
# certificates
# ---------------------------------------------------------------------------


def _family_ok(sp: Space, Ls, ell: int) -> List[str]:
    errs = []
    ball = sp.ball(ell)
    bset = set(ball)
    fam = [frozenset(L) for L in Ls]
    if frozenset(ball) not in fam:
        errs.append("test family lacks the full ball")
    for g in ball:
        if frozenset([g]) not in fam:
            errs.append(f"test family lacks singleton {g}")
    for L in Ls:
        if not set(L) <= bset:
            errs.append(f"tested set leaves ball({ell})")
    return errs


def _replay_thick(sp: Space, cert, target, left: bool) -> List[str]:
    p = cert["params"]
    errs = []
    Ls = [[sp.parse(x) for x in w["L"]] for w in cert["witnesses"]]
    errs += _family_ok(sp, Ls, p["ell"])
    for w, L in zip(cert["witnesses"], Ls):
        if w["g"] is None:
            if cert["verdict"] == "CERTIFIED":
                errs.append(f"certified but no translate for L={w['L']}")
            elif not has_product(target):
                for g in sp.ball(p["R_w"]):
                    if all(raw_member(sp, target, sp.mul(g, l) if left else sp.mul(l, g)) for l in L):
                        errs.append(f"claimed NOT-FOUND but g={g} works for L={w['L']}")
                        break
            continue
        g = sp.parse(w["g"])
        if sp.norm(g) > p["R_w"]:
            errs.append(f"translate {w['g']} outside ball({p['R_w']})")
        mems = w.get("members") or [None] * len(L)
        for l, mw in zip(L, mems):
            h = sp.mul(g, l) if left else sp.mul(l, g)
            if not member(sp, target, h, mw):
                side = "gL" if left else "Lg"
                errs.append(f"{side} not inside the set: {h} (L={w['L']}, g={w['g']})")
    return errs


def _explicit_F(sp: Space, raw, f: int) -> Tuple[Optional[list], List[str]]:
    if raw["type"] != "explicit":
        return None, ["translating factor is not an explicit finite set"]
    F = [sp.parse(x) for x in raw["elements"]]
    errs = [f"F element {x} outside ball({f})" for x in F if sp.norm(x) > f]
    return F, errs


def replay_certificate(cert: dict) -> List[str]:
    """Failure messages; empty means the certificate replays."""
    sp = Space(cert["model"])
    tag = cert["tag"]
    p = cert["params"]
    sets = cert["sets"]
    errs: List[str] = []
    if tag in ("thick", "left-thick"):
        return _replay_thick(sp, cert, sets["C"], tag == "left-thick")
    if tag in ("pw-syndetic", "pw-left-syndetic"):
        tgt = sets["target"]
        if tgt["type"] != "prod":
            return ["pw target is not a product"]
        left = tag == "pw-left-syndetic"
        Fraw, core = (tgt["sets"][1], tgt["sets"][0]) if left else (tgt["sets"][0], tgt["sets"][1])
        if core != sets["C"]:
            errs.append("pw target does not translate the stated set")
        _, e = _explicit_F(sp, Fraw, p["f"])
        errs += e
        return errs + _replay_thick(sp, cert, tgt, False)
    if tag in ("between-F", "left-F"):
        tgt = sets["target"]
        if tgt["type"] != "prod":
            return ["target is not a product"]
        if tag == "left-F":
            Fraw, inner = tgt["sets"]
            if inner["type"] != "prod" or inner["sets"] != [sets["A"], sets["B"]]:
                errs.append("target is not F(AB)")
        else:
            Araw, inner = tgt["sets"]
            if Araw != sets["A"] or inner["type"] != "prod" or inner["sets"][1] != sets["B"]:
                errs.append("target is not A(FB)")
            Fraw = inner["sets"][0] if inner["type"] == "prod" else None
        if Fraw is None:
            return errs + ["missing F"]
        _, e = _explicit_F(sp, Fraw, p["f"])
        errs += e
        return errs + _replay_thick(sp, cert, tgt, False)
    if tag in ("syndetic", "left-syndetic"):
        left = tag == "left-syndetic"
        C = sets["C"]
        seen = set()
        for w in cert["witnesses"]:
            h, phi, c = sp.parse(w["h"]), sp.parse(w["f"]), sp.parse(w["c"])
            if sp.norm(phi) > p["f"]:
                errs.append(f"F element {w['f']} outside ball({p['f']})")
            if (sp.mul(c, phi) if left else sp.mul(phi, c)) != h:
                errs.append(f"bad factorisation of {w['h']}")
            if not member(sp, C, c, w.get("w")):
                errs.append(f"{w['c']} not in C")
            seen.add(h)
        if cert["verdict"] == "CERTIFIED":
            missing = [g for g in sp.ball(p["R"]) if g not in seen]
            if missing:
                errs.append(f"cover misses {len(missing)} window elements, e.g. {missing[0]}")
        return errs
    if tag == "separator":
        A = sets["A"]
        if has_product(A):
            return ["separator replay needs a product-free set"]
        W = p["window"]
        ballW = sp.ball(W)
        Ls = [[sp.parse(x) for x in w["F"]] for w in cert["witnesses"]]
        errs += _family_ok(sp, Ls, p["f"])
        for w, F in zip(cert["witnesses"], Ls):
            if w["s"] is None:
                if cert["verdict"] == "CERTIFIED":
                    errs.append(f"certified but no separator for F={w['F']}")
                continue
            s = sp.parse(w["s"])
            if sp.norm(s) > p["R_w"]:
                errs.append(f"separator {w['s']} outside ball({p['R_w']})")
            sinv = sp.inv(s)
            for h in ballW:
                if raw_member(sp, A, sp.mul(sinv, h)) and any(
                    raw_member(sp, A, sp.mul(sp.inv(f), h)) for f in F
                ):
                    errs.append(f"{h} lies in FA and sA (F={w['F']}, s={w['s']})")
                    break
            if w.get("level") == "boundary":
                r = A["r"]
                U = _cyls(A["cylinders"])
                sU = translate_list(r, s, U)
                for f in F:
                    if not lists_disjoint(translate_list(r, f, U), sU):
                        errs.append(f"fU meets sU at boundary level (f={f}, s={w['s']})")
                        break
        return errs
    if tag == "shrinker":
        return replay_shrinker(cert)
    return [f"unknown certificate tag {tag!r}"]


def replay_shrinker(cert: dict) -> List[str]:
    """``nu(ball(n) s_n B) < eps_n`` for each step and their sum below eps."""
    p = cert["params"]
    r = p["r"]
    B = _cyls(cert["sets"]["B"])
    eps = Fraction(p["eps"])
    errs = []
    total = Fraction(0)
    for st in cert["witnesses"]:
        n, s = st["n"], parse_word(st["s"])
        eps_n = eps / 2 ** (n + 1)
        sB = translate_list(r, s, B)
        union = _union_lists(r, [translate_list(r, f, sB) for f in words_upto(r, n)])
        m = nu_list(r, union)
        if m != Fraction(st["measure"]):
            errs.append(f"step {n}: measure {m} differs from claimed {st['measure']}")
        if not m < eps_n:
            errs.append(f"step {n}: nu(F_n s_n B) = {m} is not below {eps_n}")
        total += m
    if not total < eps:
        errs.append(f"sum {total} is not below eps = {eps}")
    return errs


def _union_lists(r: int, lists) -> List[tuple]:
    """Disjoint cylinder list for a union of cylinder lists."""
    words = sorted({w for ws in lists for w in ws}, key=len)
    kept: set = set()
    out = []
    for w in words:
        if any(w[:k] in kept for k in range(len(w) + 1)):
            continue
        kept.add(w)
        out.append(w)
    return out


# ---------------------------------------------------------------------------
# report-level identities
# ---------------------------------------------------------------------------


def hecke_residual_bruteforce(r: int, k: int) -> Fraction:
    """TV distance between sigma_1 * sigma_k and the Hecke right-hand side."""
    lets = [x for i in range(1, r + 1) for x in (i, -i)]
    sk = [w for w in words_upto(r, k) if len(w) == k]
    conv: Dict[tuple, int] = {}
    for s in lets:
        for h in sk:
            g = reduce_word((s,) + h)
            conv[g] = conv.get(g, 0) + 1
    den = 2 * r * len(sk)
    lhs = {g: Fraction(c, den) for g, c in conv.items()}
    size = lambda j: 1 if j == 0 else 2 * r * (2 * r - 1) ** (j - 1)
    rhs: Dict[tuple, Fraction] = {}
    for w in words_upto(r, k + 1):
        if len(w) == k - 1:
            rhs[w] = Fraction(1, 2 * r) / size(k - 1)
        elif len(w) == k + 1:
            rhs[w] = (1 - Fraction(1, 2 * r)) / size(k + 1)
    keys = set(lhs) | set(rhs)
    return sum((abs(lhs.get(g, 0) - rhs.get(g, 0)) for g in keys), Fraction(0)) / 2


def replay_check(chk: dict) -> List[str]:
    kind = chk["kind"]
    claimed = Fraction(chk["value"]) if "value" in chk else None
    if kind == "hecke":
        got = hecke_residual_bruteforce(chk["r"], chk["k"])
        return [] if got == claimed else [f"hecke r={chk['r']} k={chk['k']}: {got} != {claimed}"]
    if kind == "nu":
        got = nu_list(chk["r"], _union_lists(chk["r"], [_cyls(chk["cylinders"])]))
        return [] if got == claimed else [f"nu mismatch for {chk.get('name', '?')}: {got} != {claimed}"]
    if kind == "translate-subset":
        r = chk["r"]
        P, Q = _cyls(chk["P"]), _cyls(chk["Q"])
        idx = _index(Q)
        bad = []
        for g in chk["elements"]:
            if not list_subset(r, translate_list(r, parse_word(g), P), Q, idx):
                bad.append(f"{g} P is not inside Q ({chk.get('name', '?')})")
                break
        return bad
    if kind == "ge":
        return [] if Fraction(chk["a"]) >= Fraction(chk["b"]) else [f"{chk.get('name')}: {chk['a']} < {chk['b']}"]
    if kind == "density":
        sp = Space(chk["model"])
        raw = chk["set"]
        n = chk["n"]
        acc = Fraction(0)
        for k in range(n):
            sph = [g for g in sp.ball(k) if sp.norm(g) == k]
            acc += Fraction(sum(1 for g in sph if raw_member(sp, raw, g)), len(sph))
        got = acc / n
        return [] if got == claimed else [f"density mismatch: {got} != {claimed}"]
    return [f"unknown check kind {kind!r}"]


def replay_report(report: dict) -> List[str]:
    errs: List[str] = []
    for name, cert in report.get("certificates", {}).items():
        for e in replay_certificate(cert):
            errs.append(f"[{name}] {e}")
    for chk in report.get("checks", []):
        for e in replay_check(chk):
            errs.append(f"[check:{chk['kind']}] {e}")
    return errs
